//! Exhaustive optimizers over small instances.
//!
//! Everything here works directly on cylinders (partial assignments in
//! `{0, 1, *}^m`) with no symmetry assumptions, so it serves as an independent
//! check on the dynamic programs and recurrences elsewhere in the crate.
//!
//! A cylinder is encoded in base 3, one digit per variable (0, 1, or 2 for
//! unqueried). Fixing an unqueried variable lowers the code, so a single
//! ascending sweep visits every cylinder after all of its refinements.

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::bounds::{gamma_exact, CostPair};
use crate::check::{Check, PropertyResult};
use crate::directional;
use crate::error::{Error, Result};
use crate::formula::{self, Assignment, FormulaSpec, GateKind};
use crate::rational::{int, ratio, serde_fraction, to_fraction_string, Rational};

/// Largest number of variables the exhaustive search accepts (`3^12` cylinders).
pub const MAX_VARIABLES: usize = 12;

/// A partial assignment: `None` marks an unqueried variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cylinder(Vec<Option<bool>>);

impl Cylinder {
    pub fn root(m: usize) -> Self {
        Self(vec![None; m])
    }

    pub fn new(vars: Vec<Option<bool>>) -> Self {
        Self(vars)
    }

    pub fn vars(&self) -> &[Option<bool>] {
        &self.0
    }

    pub fn with(&self, var: usize, value: bool) -> Self {
        let mut v = self.0.clone();
        v[var] = Some(value);
        Self(v)
    }

    fn code(&self) -> usize {
        self.0.iter().rev().fold(0, |acc, v| {
            acc * 3
                + match v {
                    Some(false) => 0,
                    Some(true) => 1,
                    None => 2,
                }
        })
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            f.write_str(match v {
                Some(false) => "0",
                Some(true) => "1",
                None => "*",
            })?;
        }
        Ok(())
    }
}

impl FromStr for Cylinder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(Some(false)),
                '1' => Ok(Some(true)),
                '*' => Ok(None),
                _ => Err(Error::Parse(format!("cylinder {s:?} contains {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// Local cost: a `(c1, c0)` pair per variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CostModel {
    Uniform(CostPair),
    PerVariable(Vec<CostPair>),
}

impl CostModel {
    pub fn unit() -> Self {
        Self::Uniform(CostPair::unit())
    }

    pub fn uniform(c0: Rational, c1: Rational) -> Self {
        Self::Uniform(CostPair::new(c1, c0))
    }

    fn charge(&self, var: usize, value: bool) -> &Rational {
        let pair = match self {
            CostModel::Uniform(p) => p,
            CostModel::PerVariable(v) => &v[var],
        };
        if value {
            &pair.c1
        } else {
            &pair.c0
        }
    }

    fn check(&self, m: usize) -> Result<()> {
        match self {
            CostModel::PerVariable(v) if v.len() != m => Err(Error::LengthMismatch {
                expected: m,
                actual: v.len(),
            }),
            _ => Ok(()),
        }
    }
}

/// Input distribution over the formula's variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distribution {
    /// Uniform over reluctant inputs.
    Reluctant,
    /// Uniform over inputs with exactly this many ones.
    SliceUniform(u32),
    /// Unnormalized weights; unlisted inputs get weight 0.
    Explicit(Vec<(Assignment, Rational)>),
}

impl Distribution {
    fn weights(&self, f: &FormulaSpec, m: usize) -> Result<Vec<Rational>> {
        let mut w = vec![Rational::zero(); 1 << m];
        match self {
            Distribution::Reluctant => {
                for a in formula::enumerate_reluctant(f)? {
                    w[a.to_mask() as usize] = Rational::one();
                }
            }
            Distribution::SliceUniform(k) => {
                for (mask, x) in w.iter_mut().enumerate() {
                    if mask.count_ones() == *k {
                        *x = Rational::one();
                    }
                }
            }
            Distribution::Explicit(entries) => {
                for (a, p) in entries {
                    if a.len() != m {
                        return Err(Error::LengthMismatch {
                            expected: m,
                            actual: a.len(),
                        });
                    }
                    if p.is_negative() {
                        return Err(Error::Domain("negative probability weight".into()));
                    }
                    w[a.to_mask() as usize] += p;
                }
            }
        }
        if w.iter().all(Zero::is_zero) {
            return Err(Error::Domain("distribution has no mass".into()));
        }
        Ok(w)
    }
}

/// Parses `reluctant`, `slice:K`, or `explicit:BITS=W,BITS=W,...`.
impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "reluctant" {
            return Ok(Self::Reluctant);
        }
        if let Some(k) = s.strip_prefix("slice:") {
            return k
                .parse()
                .map(Self::SliceUniform)
                .map_err(|_| Error::Parse(format!("bad slice weight in {s:?}")));
        }
        if let Some(list) = s.strip_prefix("explicit:") {
            return list
                .split(',')
                .map(|item| {
                    let (bits, w) = item.split_once('=').ok_or_else(|| {
                        Error::Parse(format!("expected BITS=WEIGHT, got {item:?}"))
                    })?;
                    Ok((bits.trim().parse()?, crate::rational::parse_rational(w)?))
                })
                .collect::<Result<Vec<_>>>()
                .map(Self::Explicit);
        }
        Err(Error::Parse(format!(
            "distribution {s:?}; expected reluctant, slice:K or explicit:..."
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Goal {
    /// Stop only once `f` is constant on the cylinder (or it has no mass).
    Compute,
    /// Stop anywhere except at the root, which must read a variable.
    FreeStop,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    /// Optimal expected cost, normalized by the total mass.
    pub value: Rational,
    pub states_explored: u64,
    m: usize,
    best: Vec<Option<u8>>,
    weights: Vec<Rational>,
    cost: CostModel,
}

impl OracleResult {
    pub fn variables(&self) -> usize {
        self.m
    }

    /// Variable the optimal strategy reads at `cyl`, or `None` if it stops.
    pub fn first_query(&self, cyl: &Cylinder) -> Option<usize> {
        assert_eq!(cyl.vars().len(), self.m);
        self.best[cyl.code()].map(usize::from)
    }

    pub fn root_query(&self) -> Option<usize> {
        self.first_query(&Cylinder::root(self.m))
    }

    /// Expected cost of following the certificate on every input.
    pub fn replay_cost(&self) -> Rational {
        let pow3: Vec<usize> = (0..self.m).map(|i| 3usize.pow(i as u32)).collect();
        let root = 3usize.pow(self.m as u32) - 1;
        let mut total = Rational::zero();
        let mut mass = Rational::zero();
        for (mask, w) in self.weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let mut code = root;
            let mut cost = Rational::zero();
            while let Some(v) = self.best[code] {
                let v = usize::from(v);
                let bit = mask >> v & 1 == 1;
                cost += self.cost.charge(v, bit);
                code -= if bit { pow3[v] } else { 2 * pow3[v] };
            }
            total += w * cost;
            mass += w;
        }
        total / mass
    }
}

fn solve(
    m: usize,
    weights: Vec<Rational>,
    f_table: Option<&[bool]>,
    cost: CostModel,
    goal: Goal,
) -> OracleResult {
    let pow3: Vec<usize> = (0..=m).map(|i| 3usize.pow(i as u32)).collect();
    let states = pow3[m];
    let root = states - 1;
    let mut mass = vec![Rational::zero(); states];
    let mut outputs = vec![0u8; states];
    let mut w = vec![Rational::zero(); states];
    let mut best: Vec<Option<u8>> = vec![None; states];
    let mut explored = 0u64;

    for code in 0..states {
        let digit = |v: usize| code / pow3[v] % 3;
        let Some(first_free) = (0..m).find(|&v| digit(v) == 2) else {
            let mask = (0..m).fold(0usize, |acc, v| acc | (digit(v) << v));
            mass[code] = weights[mask].clone();
            if let Some(t) = f_table {
                outputs[code] = 1 << u8::from(t[mask]);
            }
            continue;
        };
        let (z, o) = (code - 2 * pow3[first_free], code - pow3[first_free]);
        mass[code] = &mass[z] + &mass[o];
        outputs[code] = outputs[z] | outputs[o];

        if mass[code].is_zero() || (goal == Goal::Compute && outputs[code] != 0b11) {
            continue;
        }
        explored += 1;
        let mut choice: Option<(Rational, u8)> = None;
        for v in (0..m).filter(|&v| digit(v) == 2) {
            let (z, o) = (code - 2 * pow3[v], code - pow3[v]);
            let c =
                &mass[z] * cost.charge(v, false) + &mass[o] * cost.charge(v, true) + &w[z] + &w[o];
            if choice.as_ref().is_none_or(|(b, _)| c < *b) {
                choice = Some((c, v as u8));
            }
        }
        let (c, v) = choice.expect("at least one free variable");
        if goal == Goal::FreeStop && code != root && !c.is_negative() {
            continue;
        }
        w[code] = c;
        best[code] = Some(v);
    }

    let value = &w[root] / &mass[root];
    OracleResult {
        value,
        states_explored: explored,
        m,
        best,
        weights,
        cost,
    }
}

fn guard(m: usize) -> Result<()> {
    if m > MAX_VARIABLES {
        return Err(Error::InstanceTooLarge {
            what: format!("{m} variables ({} cylinders)", 3f64.powi(m as i32)),
            limit: format!("{MAX_VARIABLES} variables"),
        });
    }
    Ok(())
}

/// Minimum expected cost, over all zero-error deterministic decision trees for
/// `f`, under the given distribution and local cost.
pub fn optimal_expected_cost(
    f: &FormulaSpec,
    dist: &Distribution,
    cost: &CostModel,
) -> Result<OracleResult> {
    let m = f
        .leaf_count()
        .filter(|&m| m <= MAX_VARIABLES)
        .ok_or_else(|| Error::InstanceTooLarge {
            what: format!("{}^{} variables", f.fan_out(), f.depth()),
            limit: format!("{MAX_VARIABLES} variables"),
        })?;
    guard(m)?;
    cost.check(m)?;
    let weights = dist.weights(f, m)?;
    let table: Vec<bool> = (0..1u64 << m)
        .map(|mask| formula::evaluate(f, &Assignment::from_mask(mask, m)).expect("length matches"))
        .collect();
    Ok(solve(m, weights, Some(&table), cost.clone(), Goal::Compute))
}

/// Optimal expected cost on the `(k, n)` slice under cost `(1, -eta)` over
/// all adaptive trees that read at least one bit.
pub fn optimal_tree_over_slice(k: u32, n: u32, eta: &Rational) -> Result<Rational> {
    optimal_tree_over_slice_result(k, n, eta).map(|r| r.value)
}

pub fn optimal_tree_over_slice_result(k: u32, n: u32, eta: &Rational) -> Result<OracleResult> {
    crate::pkn::SliceSpec::new(k, n)?;
    if eta.is_negative() {
        return Err(Error::Domain("eta must be nonnegative".into()));
    }
    let m = n as usize;
    guard(m)?;
    let weights = (0..1usize << m)
        .map(|mask| {
            if mask.count_ones() == k {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect();
    let cost = CostModel::uniform(Rational::one(), -eta.clone());
    Ok(solve(m, weights, None, cost, Goal::FreeStop))
}

/// Exact `(phi_d, psi_d)` for the directional algorithm by averaging over every
/// child order at every gate and every reluctant input.
pub fn directional_exact_small(f: &FormulaSpec) -> Result<(Rational, Rational)> {
    if f.depth() > 2 || f.fan_out() > 3 {
        return Err(Error::InstanceTooLarge {
            what: format!("depth {} fan-out {}", f.depth(), f.fan_out()),
            limit: "depth 2, fan-out 3".into(),
        });
    }
    let mut sums = [Rational::zero(), Rational::zero()];
    let mut counts = [0i64; 2];
    for a in formula::enumerate_reluctant(f)? {
        let (value, expected) = order_average(f, 0, a.bits());
        sums[usize::from(value)] += expected;
        counts[usize::from(value)] += 1;
    }
    let [s0, s1] = sums;
    Ok((s1 / int(counts[1]), s0 / int(counts[0])))
}

// Children's orders are independent, so the expected cost of a gate is the
// order-average of the summed expected costs of the children it reads.
fn order_average(f: &FormulaSpec, level: u32, bits: &[bool]) -> (bool, Rational) {
    if level == f.depth() {
        return (bits[0], Rational::one());
    }
    let g = f.gate_at_level(level);
    let n = g.n() as usize;
    let width = bits.len() / n;
    let children: Vec<(bool, Rational)> = bits
        .chunks(width)
        .map(|c| order_average(f, level + 1, c))
        .collect();
    let ones = children.iter().filter(|c| c.0).count() as u32;
    let value = g.fire(ones);
    let mut total = Rational::zero();
    let mut orders = 0i64;
    for perm in (0..n).permutations(n) {
        let (mut o, mut z) = (0, 0);
        for &i in &perm {
            total += &children[i].1;
            if children[i].0 {
                o += 1;
            } else {
                z += 1;
            }
            if o == g.k() || z == g.n() - g.k() + 1 {
                break;
            }
        }
        orders += 1;
    }
    (value, total / int(orders))
}

#[derive(Clone, Debug, Serialize)]
pub struct ShrinkReport {
    pub k: u32,
    pub n: u32,
    pub cost: CostPair,
    /// Optimal cost of depth-1 trees under the reluctant distribution.
    #[serde(with = "serde_fraction")]
    pub lhs: Rational,
    /// Transformed cost pair for the single remaining variable.
    pub shrunk: CostPair,
    /// `(c1' + c0') / 2`: the single forced query under the depth-0 marginal.
    #[serde(with = "serde_fraction")]
    pub rhs_average: Rational,
    #[serde(with = "serde_fraction")]
    pub rhs_min: Rational,
    /// `c1' p + c0' (1 - p)` with `p` the depth-1 reluctant root marginal.
    #[serde(with = "serde_fraction")]
    pub rhs_marginal: Rational,
    /// `lhs >= rhs_marginal`, the form the shrink step guarantees.
    pub passes: bool,
    pub passes_min: bool,
    pub passes_average: bool,
}

/// Compares the depth-1 optimum under `cost` with one shrink step.
pub fn check_shrink_inequality(k: u32, n: u32, cost: &CostPair) -> Result<ShrinkReport> {
    let f = FormulaSpec::constant(k, n, 1)?;
    let lhs = optimal_expected_cost(
        &f,
        &Distribution::Reluctant,
        &CostModel::Uniform(cost.clone()),
    )?
    .value;
    let shrunk = gamma_exact(k, n)?.apply(cost);
    let rhs_average = (&shrunk.c1 + &shrunk.c0) * ratio(1, 2);
    let rhs_min = shrunk.min().clone();
    let p1 = formula::reluctant_counts(&f).root_one_probability();
    let rhs_marginal = &shrunk.c1 * &p1 + &shrunk.c0 * (Rational::one() - &p1);
    Ok(ShrinkReport {
        k,
        n,
        cost: cost.clone(),
        passes: lhs >= rhs_marginal,
        passes_min: lhs >= rhs_min,
        passes_average: lhs >= rhs_average,
        lhs,
        shrunk,
        rhs_average,
        rhs_min,
        rhs_marginal,
    })
}

/// Human-readable summary of an oracle result.
pub fn describe(result: &OracleResult) -> String {
    format!(
        "value={} root_query={} states={}",
        to_fraction_string(&result.value),
        result
            .root_query()
            .map_or_else(|| "none".to_string(), |v| v.to_string()),
        result.states_explored
    )
}

/// Directional cost mixed over the reluctant root marginal.
pub fn directional_mixture(f: &FormulaSpec) -> Rational {
    let c = directional::exact_cost(f);
    let p1 = formula::reluctant_counts(f).root_one_probability();
    &p1 * &c.phi + (Rational::one() - &p1) * &c.psi
}

/// Cross-checks the DP and recurrences against the exhaustive optimizers:
/// the slice DP on `n <= slice_n_max`, the directional recurrence on every
/// formula with depth at most 2 and fan-out at most 3, and the shrink step on
/// `1 < k < n <= shrink_n_max` under costs `(1, 1)`, `(2, 1)` and `(1, 2)`.
pub fn verify_oracle_equivalence(
    slice_n_max: u32,
    shrink_n_max: u32,
    eta_grid: &[Rational],
) -> Result<Vec<PropertyResult>> {
    let mut slice = Check::new("slice", "p_eta equals the unrestricted slice optimum");
    for n in 1..=slice_n_max {
        for k in 0..=n {
            for eta in eta_grid {
                let dp = crate::pkn::p_eta(k, n, eta)?;
                let brute = optimal_tree_over_slice(k, n, eta)?;
                slice.expect(dp == brute, || {
                    format!(
                        "k={k} n={n} eta={}: dp {} vs oracle {}",
                        to_fraction_string(eta),
                        to_fraction_string(&dp),
                        to_fraction_string(&brute)
                    )
                });
            }
        }
    }

    let mut dir = Check::new(
        "directional",
        "order enumeration equals the exact recurrence",
    );
    for f in small_formulas() {
        let (phi, psi) = directional_exact_small(&f)?;
        let c = directional::exact_cost(&f);
        dir.expect(phi == c.phi && psi == c.psi, || {
            format!("{f}: ({}, {}) vs ({}, {})", phi, psi, c.phi, c.psi)
        });
    }

    let mut shrink = Check::new("shrink", "depth-1 optimum >= one shrink step");
    let costs = [
        CostPair::unit(),
        CostPair::new(int(2), int(1)),
        CostPair::new(int(1), int(2)),
    ];
    for n in 3..=shrink_n_max {
        for k in 2..n {
            for cost in &costs {
                let r = check_shrink_inequality(k, n, cost)?;
                shrink.expect(r.passes, || {
                    format!(
                        "k={k} n={n} cost=({},{}): {} < {}",
                        cost.c1,
                        cost.c0,
                        to_fraction_string(&r.lhs),
                        to_fraction_string(&r.rhs_marginal)
                    )
                });
            }
        }
    }
    Ok(vec![slice.finish(), dir.finish(), shrink.finish()])
}

/// Every formula the order-enumeration oracle accepts.
pub fn small_formulas() -> Vec<FormulaSpec> {
    let mut out = vec![];
    for n in 1..=3 {
        for d in 0..=2 {
            for k in 1..=n {
                out.push(FormulaSpec::constant(k, n, d).expect("valid gate"));
            }
            for root in [GateKind::And, GateKind::Or] {
                out.push(FormulaSpec::alternating(n, root, d).expect("valid gate"));
            }
        }
    }
    out
}
