//! The exchange rate `P(k, n)` on fixed-weight slices.
//!
//! Inputs are drawn uniformly from the `n`-bit strings with exactly `k` ones.
//! A decision tree pays 1 for every zero it reads and earns `eta` for every
//! one. `P_eta(k, n)` is the best expected cost of a tree that reads at least
//! one bit, and `P(k, n)` is the largest `eta` at which that cost is still
//! nonnegative.
//!
//! The slice distribution is exchangeable, so an optimal tree may read the
//! bits in a fixed order and its state is just the pair (ones left, bits
//! left). `V_eta(k, n)` is the optimal cost from such a state when stopping is
//! allowed:
//!
//! ```text
//! V(k, n) = min(0, k/n * (V(k-1, n-1) - eta) + (n-k)/n * (1 + V(k, n-1)))
//! ```
//!
//! The oracle module checks this reduction against an optimizer that does not
//! assume it.

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;

use crate::check::{Check, PropertyResult};
use crate::error::{Error, Result};
use crate::rational::{int, ratio, to_f64, to_fraction_string, Rational};

/// The uniform distribution over `n`-bit strings with exactly `k` ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SliceSpec {
    k: u32,
    n: u32,
}

impl SliceSpec {
    pub fn new(k: u32, n: u32) -> Result<Self> {
        if n == 0 || k > n {
            return Err(Error::InvalidSlice { k, n });
        }
        Ok(Self { k, n })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Stop,
    Query,
}

/// Cost of a fixed strategy as a function of `eta`: `zeros - ones * eta`,
/// where `zeros` and `ones` are the expected numbers of each bit read.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostLine {
    pub zeros: Rational,
    pub ones: Rational,
}

impl CostLine {
    fn stop() -> Self {
        Self {
            zeros: Rational::zero(),
            ones: Rational::zero(),
        }
    }

    pub fn at(&self, eta: &Rational) -> Rational {
        &self.zeros - &self.ones * eta
    }

    /// Slope of the line in `eta`.
    pub fn slope(&self) -> Rational {
        -self.ones.clone()
    }
}

#[derive(Clone, Debug)]
struct Cell {
    value: Rational,
    line: CostLine,
    decision: Decision,
}

/// Memoized `V_eta(k', n')` for every `0 <= k' <= n' <= max_n`.
#[derive(Clone, Debug)]
pub struct EtaDPTable {
    eta: Rational,
    max_n: u32,
    // cells[n][k]
    cells: Vec<Vec<Cell>>,
}

impl EtaDPTable {
    pub fn build(eta: &Rational, max_n: u32) -> Result<Self> {
        if eta.is_negative() {
            return Err(Error::Domain(format!(
                "eta must be nonnegative, got {}",
                to_fraction_string(eta)
            )));
        }
        let mut cells: Vec<Vec<Cell>> = Vec::with_capacity(max_n as usize + 1);
        cells.push(vec![Cell {
            value: Rational::zero(),
            line: CostLine::stop(),
            decision: Decision::Stop,
        }]);
        for n in 1..=max_n {
            let row = (0..=n)
                .map(|k| {
                    let line = query_line(&cells, k, n);
                    let q = line.at(eta);
                    // ties go to Stop
                    if q.is_negative() {
                        Cell {
                            value: q,
                            line,
                            decision: Decision::Query,
                        }
                    } else {
                        Cell {
                            value: Rational::zero(),
                            line: CostLine::stop(),
                            decision: Decision::Stop,
                        }
                    }
                })
                .collect();
            cells.push(row);
        }
        Ok(Self {
            eta: eta.clone(),
            max_n,
            cells,
        })
    }

    pub fn eta(&self) -> &Rational {
        &self.eta
    }

    pub fn max_n(&self) -> u32 {
        self.max_n
    }

    fn cell(&self, k: u32, n: u32) -> &Cell {
        assert!(k <= n && n <= self.max_n, "state ({k},{n}) outside table");
        &self.cells[n as usize][k as usize]
    }

    /// `V_eta(k, n)`, the optimal cost when stopping immediately is allowed.
    pub fn value(&self, k: u32, n: u32) -> &Rational {
        &self.cell(k, n).value
    }

    pub fn decision(&self, k: u32, n: u32) -> Decision {
        self.cell(k, n).decision
    }

    /// The cost line of the strategy chosen at `(k, n)`.
    pub fn line(&self, k: u32, n: u32) -> &CostLine {
        &self.cell(k, n).line
    }

    /// Cost line of the best strategy that must read one bit at `(k, n)`.
    pub fn forced_line(&self, k: u32, n: u32) -> CostLine {
        assert!(n >= 1 && k <= n && n <= self.max_n);
        query_line(&self.cells, k, n)
    }

    /// `P_eta(k, n)`: the optimum over trees that read at least one bit.
    pub fn forced_value(&self, k: u32, n: u32) -> Rational {
        self.forced_line(k, n).at(&self.eta)
    }

    /// Stop/Query decisions for every state, in `(k, n)` order.
    pub fn decisions(&self) -> BTreeMap<(u32, u32), Decision> {
        (1..=self.max_n)
            .flat_map(|n| (0..=n).map(move |k| (k, n)))
            .map(|(k, n)| ((k, n), self.decision(k, n)))
            .collect()
    }
}

// Query one bit at (k, n) and continue optimally.
fn query_line(cells: &[Vec<Cell>], k: u32, n: u32) -> CostLine {
    let nn = int(n.into());
    let mut zeros = Rational::zero();
    let mut ones = Rational::zero();
    if k > 0 {
        let p = int(k.into()) / &nn;
        let next = &cells[n as usize - 1][k as usize - 1].line;
        zeros += &p * &next.zeros;
        ones += &p * (Rational::one() + &next.ones);
    }
    if k < n {
        let p = int((n - k).into()) / &nn;
        let next = &cells[n as usize - 1][k as usize].line;
        zeros += &p * (Rational::one() + &next.zeros);
        ones += &p * &next.ones;
    }
    CostLine { zeros, ones }
}

pub fn v_eta(k: u32, n: u32, eta: &Rational) -> Result<Rational> {
    SliceSpec::new(k, n)?;
    Ok(EtaDPTable::build(eta, n)?.value(k, n).clone())
}

/// `P_eta(k, n)`. For `k = 0` every read bit is a zero and the value is 1.
pub fn p_eta(k: u32, n: u32, eta: &Rational) -> Result<Rational> {
    SliceSpec::new(k, n)?;
    Ok(EtaDPTable::build(eta, n)?.forced_value(k, n))
}

/// `P(k, n)`, with `P(0, n)` infinite.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Threshold {
    Finite(Rational),
    Infinite,
}

impl Threshold {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Threshold::Finite(r) => Some(r),
            Threshold::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Threshold::Finite(r) => to_f64(r),
            Threshold::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(r) => f.write_str(&to_fraction_string(r)),
            Threshold::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug)]
pub struct PValue {
    pub k: u32,
    pub n: u32,
    pub value: Threshold,
    /// The DP table at `eta = P(k, n)`; absent for `k = 0`.
    pub certificate: Option<EtaDPTable>,
    /// Number of structure-fixing steps taken by the root finder.
    pub iterations: u32,
}

impl PValue {
    /// Finite value; panics for `k = 0`.
    pub fn rational(&self) -> &Rational {
        self.value.finite().expect("P(0, n) is infinite")
    }
}

/// Exact `P(k, n)`.
///
/// `eta -> P_eta(k, n)` is the minimum of the cost lines of all trees, so it
/// is concave, piecewise linear and strictly decreasing for `k >= 1`. Starting
/// at `eta = 0`, the line of the current optimal tree lies above the curve, so
/// its root is an upper bound on `P(k, n)`. Moving to that root and repeating
/// decreases `eta` monotonically until the optimal tree's cost is exactly 0.
pub fn p(k: u32, n: u32) -> Result<PValue> {
    SliceSpec::new(k, n)?;
    if k == 0 {
        return Ok(PValue {
            k,
            n,
            value: Threshold::Infinite,
            certificate: None,
            iterations: 0,
        });
    }
    let mut eta = Rational::zero();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let table = EtaDPTable::build(&eta, n)?;
        let line = table.forced_line(k, n);
        let value = line.at(&eta);
        if value.is_zero() {
            return Ok(PValue {
                k,
                n,
                value: Threshold::Finite(eta),
                certificate: Some(table),
                iterations,
            });
        }
        debug_assert!(line.ones.is_positive());
        let next = &line.zeros / &line.ones;
        debug_assert!(iterations == 1 || next < eta);
        eta = next;
    }
}

pub const FLOAT_TOLERANCE: f64 = 1.0 / (1u64 << 40) as f64;

/// `P_eta(k, n)` in floating point.
pub fn p_eta_f64(k: u32, n: u32, eta: f64) -> f64 {
    let n = n as usize;
    let k = k as usize;
    let mut prev = vec![0.0f64];
    let mut forced = 0.0;
    for m in 1..=n {
        let mut row = vec![0.0; m + 1];
        for j in 0..=m.min(k) {
            let mut q = 0.0;
            if j > 0 {
                q += j as f64 / m as f64 * (prev[j - 1] - eta);
            }
            if j < m {
                q += (m - j) as f64 / m as f64 * (1.0 + prev[j]);
            }
            if m == n && j == k {
                forced = q;
            }
            row[j] = q.min(0.0);
        }
        prev = row;
    }
    forced
}

/// `P(k, n)` by bisection on the float DP, to within [`FLOAT_TOLERANCE`].
pub fn p_f64(k: u32, n: u32) -> Result<f64> {
    SliceSpec::new(k, n)?;
    if k == 0 {
        return Ok(f64::INFINITY);
    }
    // P(k, n) <= P(1, n - k + 1) = (n - k) / 2
    let (mut lo, mut hi) = (0.0f64, (n - k) as f64 / 2.0 + 1.0);
    if p_eta_f64(k, n, lo) <= 0.0 {
        return Ok(0.0);
    }
    while hi - lo > FLOAT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if p_eta_f64(k, n, mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `(n - k) / (2k)`, the closed-form lower bound on `P(k, n)` for `k >= 1`.
pub fn lower_bound(k: u32, n: u32) -> Rational {
    ratio((n - k).into(), (2 * k).into())
}

/// Exact `P(k, n)` for every `0 <= k <= n <= max_n`, `n >= 1`.
pub fn p_table(max_n: u32) -> Result<BTreeMap<(u32, u32), PValue>> {
    let mut out = BTreeMap::new();
    for n in 1..=max_n {
        for k in 0..=n {
            out.insert((k, n), p(k, n)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct PknReport {
    pub max_n: u32,
    pub eta_grid: Vec<String>,
    pub properties: Vec<PropertyResult>,
}

impl PknReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn property(&self, id: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.id == id)
    }
}

/// Checks the structural facts about `P_eta` and `P` on every slice with
/// `n <= max_n`.
pub fn verify_pkn_properties(max_n: u32, eta_grid: &[Rational]) -> Result<PknReport> {
    if max_n < 2 {
        return Err(Error::Domain(format!(
            "max_n must be at least 2, got {max_n}"
        )));
    }
    let table = p_table(max_n)?;
    let pv = |k: u32, n: u32| &table[&(k, n)].value;
    let fr = to_fraction_string;

    let mut a = Check::new("a", "P_eta(k, n+1) > P_eta(k, n) for eta > 0");
    for eta in eta_grid.iter().filter(|e| e.is_positive()) {
        let dp = EtaDPTable::build(eta, max_n)?;
        for n in 1..max_n {
            for k in 1..=n {
                let (lo, hi) = (dp.forced_value(k, n), dp.forced_value(k, n + 1));
                a.expect(hi > lo, || {
                    format!("eta={} k={k} n={n}: {} vs {}", fr(eta), fr(&lo), fr(&hi))
                });
            }
        }
    }

    let mut b = Check::new("b", "P(k, n) < P(k-1, n-1) for 0 < k < n");
    let mut c = Check::new(
        "c",
        "(k-1)/k * P(k-1, n-1) <= P(k, n), equality iff n = k+1 (1 < k < n)",
    );
    let mut d = Check::new(
        "d",
        "(n-k)/(2k) <= P(k, n), strict unless k in {1, n-1} (1 <= k < n)",
    );
    let mut e = Check::new("e", "P(1, n) = (n-1)/2");
    let mut f = Check::new("f", "Stop at (k-1, n-1) when eta = P(k, n)");
    for n in 1..=max_n {
        for k in 1..=n {
            let here = pv(k, n);
            if k < n {
                b.expect(here < pv(k - 1, n - 1), || {
                    format!("k={k} n={n}: P={here} vs P(k-1,n-1)={}", pv(k - 1, n - 1))
                });
            }
            let pk = table[&(k, n)].rational();
            if 1 < k && k < n {
                let prev = table[&(k - 1, n - 1)].rational();
                let scaled = ratio((k - 1).into(), k.into()) * prev;
                let ok = if n == k + 1 {
                    &scaled == pk
                } else {
                    &scaled < pk
                };
                c.expect(ok, || format!("k={k} n={n}: {} vs {}", fr(&scaled), fr(pk)));
            }
            if k < n {
                let lb = lower_bound(k, n);
                let ok = if k == 1 || k == n - 1 {
                    &lb == pk
                } else {
                    &lb < pk
                };
                d.expect(ok, || format!("k={k} n={n}: {} vs {}", fr(&lb), fr(pk)));
            }
            if k == 1 {
                e.expect(pk == &ratio((n - 1).into(), 2), || {
                    format!("n={n}: P(1,n)={}", fr(pk))
                });
            }
            let cert = table[&(k, n)].certificate.as_ref().expect("k >= 1");
            f.expect(cert.decision(k - 1, n - 1) == Decision::Stop, || {
                format!("k={k} n={n}: Query at ({}, {})", k - 1, n - 1)
            });
        }
    }

    Ok(PknReport {
        max_n,
        eta_grid: eta_grid.iter().map(fr).collect(),
        properties: [a, b, c, d, e, f].into_iter().map(Check::finish).collect(),
    })
}

/// The grid used when no other is given: 1/4, 1/2, 1, 2.
pub fn default_eta_grid() -> Vec<Rational> {
    vec![ratio(1, 4), ratio(1, 2), int(1), int(2)]
}
