//! The directional algorithm: evaluate a gate by evaluating its children in a
//! uniformly random order until the output is forced.
//!
//! If a `T(k, n)` gate outputs 1 on a reluctant input, the zero children it
//! evaluates are those not behind the last one in the random order, giving
//! `(n - k) k / (k + 1)` of them on average; symmetrically for output 0. The
//! expected query counts `(phi_d, psi_d)` for the two root values therefore
//! satisfy `(phi_d, psi_d) = Delta(k, n) (phi_{d-1}, psi_{d-1})` with
//! `(phi_0, psi_0) = (1, 1)`.

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{CostMatrix, CostPair};
use crate::error::{Error, Result};
use crate::formula::{self, Assignment, FormulaSpec, GateSpec};
use crate::rational::{int, ratio, serde_fraction, to_f64, Rational};

/// Expected directional query counts at a given depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectionalCost {
    /// Root evaluates to 1.
    #[serde(with = "serde_fraction")]
    pub phi: Rational,
    /// Root evaluates to 0.
    #[serde(with = "serde_fraction")]
    pub psi: Rational,
    pub depth: u32,
}

impl DirectionalCost {
    pub fn for_value(&self, value: bool) -> &Rational {
        if value {
            &self.phi
        } else {
            &self.psi
        }
    }
}

/// Expected number of zero children read by a gate that outputs 1.
pub fn expected_zero_children(k: u32, n: u32) -> Result<Rational> {
    GateSpec::new(k, n)?;
    Ok(ratio(((n - k) * k).into(), (k + 1).into()))
}

/// Expected number of one children read by a gate that outputs 0.
pub fn expected_one_children(k: u32, n: u32) -> Result<Rational> {
    GateSpec::new(k, n)?;
    Ok(ratio(((k - 1) * (n - k + 1)).into(), (n - k + 2).into()))
}

pub fn delta_matrix(k: u32, n: u32) -> Result<CostMatrix> {
    Ok(CostMatrix::new(
        int(k.into()),
        expected_zero_children(k, n)?,
        expected_one_children(k, n)?,
        int((n - k + 1).into()),
    ))
}

fn delta_for(g: GateSpec) -> CostMatrix {
    delta_matrix(g.k(), g.n()).expect("gate already validated")
}

/// `(phi_d, psi_d)`: the per-level `Delta` matrices, root first, applied to `(1, 1)`.
pub fn exact_cost(f: &FormulaSpec) -> DirectionalCost {
    let mut pair = CostPair::unit();
    for level in (0..f.depth()).rev() {
        pair = delta_for(f.gate_at_level(level)).apply(&pair);
    }
    DirectionalCost {
        phi: pair.c1,
        psi: pair.c0,
        depth: f.depth(),
    }
}

/// Number of leaves the directional algorithm reads on `a`.
pub fn run_directional(f: &FormulaSpec, a: &Assignment, seed: u64) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_directional_with(f, a, &mut rng).map(|(_, q)| q)
}

/// Runs the algorithm with a caller-supplied generator; returns the root value
/// and the number of queries.
pub fn run_directional_with<R: Rng + ?Sized>(
    f: &FormulaSpec,
    a: &Assignment,
    rng: &mut R,
) -> Result<(bool, u64)> {
    let leaves = f.require_leaves()?;
    if a.len() != leaves {
        return Err(Error::LengthMismatch {
            expected: leaves,
            actual: a.len(),
        });
    }
    Ok(visit(f, 0, a.bits(), rng))
}

fn visit<R: Rng + ?Sized>(f: &FormulaSpec, level: u32, bits: &[bool], rng: &mut R) -> (bool, u64) {
    if level == f.depth() {
        return (bits[0], 1);
    }
    let g = f.gate_at_level(level);
    let n = g.n() as usize;
    let width = bits.len() / n;
    let mut order: Vec<usize> = (0..n).collect();
    let (mut ones, mut zeros, mut queries) = (0, 0, 0);
    // incremental Fisher-Yates: only draw the positions actually visited
    for i in 0..n {
        let j = rng.gen_range(i..n);
        order.swap(i, j);
        let c = order[i];
        let (v, q) = visit(f, level + 1, &bits[c * width..(c + 1) * width], rng);
        queries += q;
        if v {
            ones += 1;
            if ones == g.k() {
                return (true, queries);
            }
        } else {
            zeros += 1;
            if zeros == g.n() - g.k() + 1 {
                return (false, queries);
            }
        }
    }
    unreachable!("a threshold gate is forced after reading all inputs")
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionalStats {
    pub root_value: u8,
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    /// Exact target: `phi_d` for root value 1, `psi_d` for 0.
    #[serde(with = "serde_fraction")]
    pub exact: Rational,
    /// Standard error of the mean.
    pub std_error: f64,
    pub within_4_sigma: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub formula: String,
    pub trials: u64,
    pub seed: u64,
    pub condition: Option<u8>,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// Exact expectation of the overall mean under the sampling distribution.
    #[serde(with = "serde_fraction")]
    pub exact_mean: Rational,
    pub within_4_sigma: bool,
    pub by_root: Vec<ConditionalStats>,
}

impl SimulationReport {
    /// Every mean, overall and conditional, is within 4 standard errors of
    /// its exact target.
    pub fn passes(&self) -> bool {
        self.within_4_sigma && self.by_root.iter().all(|c| c.within_4_sigma)
    }

    pub fn conditional(&self, root_value: bool) -> Option<&ConditionalStats> {
        self.by_root
            .iter()
            .find(|c| c.root_value == u8::from(root_value))
    }
}

#[derive(Clone, Copy, Default)]
struct Tally {
    count: u64,
    sum: u128,
    sum_sq: u128,
}

impl Tally {
    fn add(&mut self, q: u64) {
        self.count += 1;
        self.sum += u128::from(q);
        self.sum_sq += u128::from(q) * u128::from(q);
    }

    fn merge(self, o: Tally) -> Tally {
        Tally {
            count: self.count + o.count,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }

    fn mean(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        self.sum as f64 / self.count as f64
    }

    /// Unbiased sample variance, computed from exact integer sums.
    fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let centered = self.sum_sq as f64 - (self.sum as f64) * (self.sum as f64) / n;
        (centered / (n - 1.0)).max(0.0)
    }

    fn std_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

fn within_4_sigma(mean: f64, exact: &Rational, std_error: f64) -> bool {
    let gap = (mean - to_f64(exact)).abs();
    gap <= 4.0 * std_error || gap <= 1e-12 * mean.abs().max(1.0)
}

/// Generator for trial `i`: one ChaCha stream per trial, so results do not
/// depend on how trials are split across threads.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Samples reluctant inputs (optionally with a fixed root value), runs the
/// directional algorithm on each and aggregates the query counts.
pub fn monte_carlo(
    f: &FormulaSpec,
    trials: u64,
    seed: u64,
    condition: Option<bool>,
) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    f.require_leaves()?;
    let counts = formula::reluctant_counts(f);
    let exact = exact_cost(f);

    let tallies = (0..trials)
        .into_par_iter()
        .fold(
            || [Tally::default(); 2],
            |mut acc, i| {
                let mut rng = trial_rng(seed, i);
                let root = match condition {
                    Some(v) => v,
                    None => {
                        use num_bigint::RandBigInt;
                        rng.gen_biguint_below(&counts.total()) < counts.n1
                    }
                };
                let a = formula::sample_reluctant_with(f, &mut rng, Some(root))
                    .expect("leaf count checked");
                let (value, q) = run_directional_with(f, &a, &mut rng).expect("shape checked");
                debug_assert_eq!(value, root);
                acc[usize::from(value)].add(q);
                acc
            },
        )
        .reduce(
            || [Tally::default(); 2],
            |a, b| [a[0].merge(b[0]), a[1].merge(b[1])],
        );
    let overall = tallies[0].merge(tallies[1]);

    let exact_mean = match condition {
        Some(v) => exact.for_value(v).clone(),
        None => {
            let p1 = counts.root_one_probability();
            &p1 * &exact.phi + (Rational::one() - &p1) * &exact.psi
        }
    };
    let by_root = [false, true]
        .into_iter()
        .filter(|&v| tallies[usize::from(v)].count > 0)
        .map(|v| {
            let t = &tallies[usize::from(v)];
            let target = exact.for_value(v).clone();
            ConditionalStats {
                root_value: u8::from(v),
                count: t.count,
                mean: t.mean(),
                variance: t.variance(),
                std_error: t.std_error(),
                within_4_sigma: within_4_sigma(t.mean(), &target, t.std_error()),
                exact: target,
            }
        })
        .collect();

    Ok(SimulationReport {
        formula: f.to_string(),
        trials,
        seed,
        condition: condition.map(u8::from),
        mean: overall.mean(),
        variance: overall.variance(),
        std_error: overall.std_error(),
        within_4_sigma: within_4_sigma(overall.mean(), &exact_mean, overall.std_error()),
        exact_mean,
        by_root,
    })
}
