//! Generalized-cost matrices and the growth rates they induce.
//!
//! A local cost function charges `c1` for reading a one and `c0` for reading a
//! zero. Shrinking the bottom level of a uniform tree turns a cost pair
//! `(c1, c0)` for the leaves into a pair for their parents,
//!
//! ```text
//! (c1')   ( k           alpha k ) (c1)
//! (c0') = ( beta (n-k+1)  n-k+1 ) (c0)
//! ```
//!
//! with `alpha = P(k, n)` and `beta = P(n-k+1, n)`, or any lower bounds on
//! them. Iterating down to a single variable gives a lower bound that grows
//! like the largest eigenvalue of the matrix. The directional algorithm obeys
//! the same kind of recurrence and gives the matching upper bound.

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

use crate::check::{Check, PropertyResult};
use crate::directional::{self, DirectionalCost};
use crate::error::{Error, Result};
use crate::formula::{FormulaSpec, GateKind, GateSpec};
use crate::pkn;
use crate::rational::{
    exact_sqrt, int, ratio, serde_fraction, sign_plus_sqrt, to_f64, to_fraction_string, Rational,
};

/// Cost of reading a one (`c1`) and a zero (`c0`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostPair {
    #[serde(with = "serde_fraction")]
    pub c1: Rational,
    #[serde(with = "serde_fraction")]
    pub c0: Rational,
}

impl CostPair {
    pub fn new(c1: Rational, c0: Rational) -> Self {
        Self { c1, c0 }
    }

    pub fn unit() -> Self {
        Self::new(Rational::one(), Rational::one())
    }

    pub fn min(&self) -> &Rational {
        std::cmp::min(&self.c1, &self.c0)
    }

    pub fn max(&self) -> &Rational {
        std::cmp::max(&self.c1, &self.c0)
    }
}

/// A 2x2 matrix acting on `(c1, c0)` column vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostMatrix {
    m: [[Rational; 2]; 2],
}

impl CostMatrix {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        Self {
            m: [[a, b], [c, d]],
        }
    }

    pub fn identity() -> Self {
        Self::new(
            Rational::one(),
            Rational::zero(),
            Rational::zero(),
            Rational::one(),
        )
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.m[row][col]
    }

    pub fn trace(&self) -> Rational {
        &self.m[0][0] + &self.m[1][1]
    }

    pub fn det(&self) -> Rational {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    pub fn apply(&self, v: &CostPair) -> CostPair {
        CostPair {
            c1: &self.m[0][0] * &v.c1 + &self.m[0][1] * &v.c0,
            c0: &self.m[1][0] * &v.c1 + &self.m[1][1] * &v.c0,
        }
    }

    pub fn mul(&self, rhs: &CostMatrix) -> CostMatrix {
        let e = |i: usize, j: usize| &self.m[i][0] * &rhs.m[0][j] + &self.m[i][1] * &rhs.m[1][j];
        CostMatrix::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    /// Entrywise `self >= other`.
    pub fn dominates(&self, other: &CostMatrix) -> bool {
        (0..2).all(|i| (0..2).all(|j| self.m[i][j] >= other.m[i][j]))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.m.iter().flatten().all(|x| !x.is_negative())
    }
}

impl fmt::Display for CostMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |i: usize, j: usize| to_fraction_string(&self.m[i][j]);
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            s(0, 0),
            s(0, 1),
            s(1, 0),
            s(1, 1)
        )
    }
}

impl Serialize for CostMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .m
            .iter()
            .map(|r| r.iter().map(to_fraction_string).collect())
            .collect();
        rows.serialize(s)
    }
}

/// Largest eigenvalue `T/2 + sqrt(T^2/4 - D)` of a 2x2 matrix, kept as the
/// exact pair `(T, D)` plus a float.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralBound {
    #[serde(with = "serde_fraction")]
    pub trace: Rational,
    #[serde(with = "serde_fraction")]
    pub det: Rational,
    pub lambda: f64,
}

impl SpectralBound {
    pub fn from_trace_det(trace: Rational, det: Rational) -> Result<Self> {
        let disc = &trace * &trace / int(4) - &det;
        if disc.is_negative() {
            return Err(Error::Domain(format!(
                "complex eigenvalues: T = {}, D = {}",
                to_fraction_string(&trace),
                to_fraction_string(&det)
            )));
        }
        let lambda = match exact_sqrt(&disc) {
            Some(root) => to_f64(&(&trace / int(2) + root)),
            None => to_f64(&trace) / 2.0 + to_f64(&disc).sqrt(),
        };
        Ok(Self { trace, det, lambda })
    }

    /// `T^2/4 - D`.
    pub fn discriminant(&self) -> Rational {
        &self.trace * &self.trace / int(4) - &self.det
    }

    pub fn half_trace(&self) -> Rational {
        &self.trace / int(2)
    }

    /// The eigenvalue as a rational, when the discriminant is a perfect square.
    pub fn exact_lambda(&self) -> Option<Rational> {
        exact_sqrt(&self.discriminant()).map(|r| self.half_trace() + r)
    }

    /// Exact comparison of the two eigenvalues.
    pub fn cmp_exact(&self, other: &SpectralBound) -> Ordering {
        // sign of x + sqrt(r1) - sqrt(r2)
        let x = self.half_trace() - other.half_trace();
        let r1 = self.discriminant();
        let r2 = other.discriminant();
        let left = sign_plus_sqrt(&x, &Rational::one(), &r1);
        if left == Ordering::Less || r2.is_zero() {
            return left;
        }
        // both sides nonnegative: compare squares
        let y = &x * &x + &r1 - &r2;
        sign_plus_sqrt(&y, &(int(2) * &x), &r1)
    }
}

fn gate(k: u32, n: u32) -> Result<GateSpec> {
    GateSpec::new(k, n)
}

pub fn gamma_matrix(k: u32, n: u32, alpha: &Rational, beta: &Rational) -> Result<CostMatrix> {
    gate(k, n)?;
    if alpha.is_negative() || beta.is_negative() {
        return Err(Error::Domain(format!(
            "alpha and beta must be nonnegative, got {} and {}",
            to_fraction_string(alpha),
            to_fraction_string(beta)
        )));
    }
    let k_ = int(k.into());
    let rest = int((n - k + 1).into());
    Ok(CostMatrix::new(k_.clone(), alpha * &k_, beta * &rest, rest))
}

/// Shrink matrix using the closed-form lower bounds
/// `alpha = (n-k)/(2k)` and `beta = (k-1)/(2(n-k+1))`.
pub fn gamma_generic(k: u32, n: u32) -> Result<CostMatrix> {
    gate(k, n)?;
    let alpha = pkn::lower_bound(k, n);
    let beta = pkn::lower_bound(n - k + 1, n);
    gamma_matrix(k, n, &alpha, &beta)
}

/// Shrink matrix using exact `alpha = P(k, n)` and `beta = P(n-k+1, n)`.
pub fn gamma_exact(k: u32, n: u32) -> Result<CostMatrix> {
    gate(k, n)?;
    let alpha = pkn::p(k, n)?;
    let beta = pkn::p(n - k + 1, n)?;
    gamma_matrix(k, n, alpha.rational(), beta.rational())
}

/// `M^d (1, 1)`.
pub fn matrix_power_cost(m: &CostMatrix, d: u32) -> CostPair {
    (0..d).fold(CostPair::unit(), |v, _| m.apply(&v))
}

pub fn largest_eigenvalue(m: &CostMatrix) -> Result<SpectralBound> {
    SpectralBound::from_trace_det(m.trace(), m.det())
}

#[derive(Clone, Debug, Serialize)]
pub struct AndOrProduct {
    pub n: u32,
    /// `Gamma(n, n)`, the AND level.
    pub a: CostMatrix,
    /// `Gamma(1, n)`, the OR level.
    pub b: CostMatrix,
    pub ab: CostMatrix,
    pub ba: CostMatrix,
    /// Growth rate per two levels.
    pub spectral: SpectralBound,
}

pub fn andor_product(n: u32) -> Result<AndOrProduct> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "AND-OR product needs n >= 2, got {n}"
        )));
    }
    let a = gamma_exact(n, n)?;
    let b = gamma_exact(1, n)?;
    let ab = a.mul(&b);
    let ba = b.mul(&a);
    let spectral = largest_eigenvalue(&ab)?;
    Ok(AndOrProduct {
        n,
        a,
        b,
        ab,
        ba,
        spectral,
    })
}

/// Both closed forms of the AND-OR growth rate per two levels.
pub fn closed_form_thm1(n: u32) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Domain(format!("closed form needs n >= 2, got {n}")));
    }
    let n = n as f64;
    let m = (n - 1.0).powi(2);
    let root = (1.0 + 16.0 * n / m).sqrt();
    let first = n + m / 8.0 + m / 8.0 * root;
    let second = ((n + 1.0) / 2.0).powi(2) + 2.0 * n / (1.0 + root);
    Ok((first, second))
}

fn strict_interior(k: u32, n: u32) -> Result<()> {
    if 1 < k && k < n {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "need 1 < k < n, got k = {k}, n = {n}"
        )))
    }
}

/// Closed-form growth rate of the directional algorithm on `T(k, n)` trees.
pub fn closed_form_thm2(k: u32, n: u32) -> Result<f64> {
    strict_interior(k, n)?;
    let (k, n) = (k as f64, n as f64);
    let h = (n + 1.0) / 2.0;
    let frac = 8.0 * k * (n - k + 1.0) / ((n - k + 2.0) * (k + 1.0) * (n + 1.0));
    Ok(h + h * (1.0 - frac).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct Thm3Check {
    pub k: u32,
    pub n: u32,
    /// The printed expression with radicand `1 - (3k(n-k+1) - n)/(n+1)^2`.
    pub printed: f64,
    /// Largest eigenvalue of `gamma_generic(k, n)`; the authoritative rate.
    pub matrix_derived: f64,
    pub consistent: bool,
}

pub const THM3_TOLERANCE: f64 = 1e-9;

pub fn closed_form_thm3(k: u32, n: u32) -> Result<Thm3Check> {
    strict_interior(k, n)?;
    let (kf, nf) = (k as f64, n as f64);
    let h = (nf + 1.0) / 2.0;
    let printed = h + h * (1.0 - (3.0 * kf * (nf - kf + 1.0) - nf) / (nf + 1.0).powi(2)).sqrt();
    let matrix_derived = largest_eigenvalue(&gamma_generic(k, n)?)?.lambda;
    Ok(Thm3Check {
        k,
        n,
        printed,
        matrix_derived,
        consistent: (printed - matrix_derived).abs() <= THM3_TOLERANCE,
    })
}

/// Scales a zero-error bound to one that holds with error probability `delta`.
pub fn bounded_error_scale(bound: f64, delta: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::Domain(format!(
            "delta must lie in [0, 1/2), got {delta}"
        )));
    }
    Ok(bound * (1.0 - 2.0 * delta))
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsRow {
    pub d: u32,
    pub lower_generic: CostPair,
    pub lower_exact: CostPair,
    #[serde(with = "serde_fraction")]
    pub scalar_generic: Rational,
    #[serde(with = "serde_fraction")]
    pub scalar_exact: Rational,
    pub upper: DirectionalCost,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub k: u32,
    pub n: u32,
    pub gamma_generic: CostMatrix,
    pub gamma_exact: CostMatrix,
    pub delta: CostMatrix,
    pub lambda_generic: SpectralBound,
    pub lambda_exact: SpectralBound,
    pub lambda_upper: SpectralBound,
    pub rows: Vec<BoundsRow>,
}

/// Lower and upper cost pairs for `T(k, n)` trees of depth `0..=d_max`.
pub fn report_bounds(k: u32, n: u32, d_max: u32) -> Result<BoundsReport> {
    strict_interior(k, n)?;
    let generic = gamma_generic(k, n)?;
    let exact = gamma_exact(k, n)?;
    let delta = directional::delta_matrix(k, n)?;
    let formula = FormulaSpec::constant(k, n, 0)?;
    let mut rows = Vec::with_capacity(d_max as usize + 1);
    let (mut g, mut e) = (CostPair::unit(), CostPair::unit());
    for d in 0..=d_max {
        if d > 0 {
            g = generic.apply(&g);
            e = exact.apply(&e);
        }
        rows.push(BoundsRow {
            d,
            scalar_generic: g.min().clone(),
            scalar_exact: e.min().clone(),
            lower_generic: g.clone(),
            lower_exact: e.clone(),
            upper: directional::exact_cost(&formula.with_depth(d)),
        });
    }
    Ok(BoundsReport {
        k,
        n,
        lambda_generic: largest_eigenvalue(&generic)?,
        lambda_exact: largest_eigenvalue(&exact)?,
        lambda_upper: largest_eigenvalue(&delta)?,
        gamma_generic: generic,
        gamma_exact: exact,
        delta,
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AlternatingRow {
    pub d: u32,
    pub lower: CostPair,
    #[serde(with = "serde_fraction")]
    pub scalar_lower: Rational,
    pub upper: DirectionalCost,
    /// Lower and upper pairs coincide.
    pub tight: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlternatingReport {
    pub n: u32,
    pub root: GateKind,
    pub product: AndOrProduct,
    pub closed_forms: (f64, f64),
    pub rows: Vec<AlternatingRow>,
}

/// Bounds for alternating AND-OR trees of depth `0..=d_max`.
pub fn report_alternating(n: u32, root: GateKind, d_max: u32) -> Result<AlternatingReport> {
    let product = andor_product(n)?;
    let closed_forms = closed_form_thm1(n)?;
    let mut rows = Vec::with_capacity(d_max as usize + 1);
    for d in 0..=d_max {
        let f = FormulaSpec::alternating(n, root, d)?;
        // shrink from the bottom level up
        let mut lower = CostPair::unit();
        for level in (0..d).rev() {
            let g = f.gate_at_level(level);
            lower = gamma_exact(g.k(), g.n())?.apply(&lower);
        }
        let upper = directional::exact_cost(&f);
        rows.push(AlternatingRow {
            d,
            scalar_lower: lower.min().clone(),
            tight: lower.c1 == upper.phi && lower.c0 == upper.psi,
            lower,
            upper,
        });
    }
    Ok(AlternatingReport {
        n,
        root,
        product,
        closed_forms,
        rows,
    })
}

/// Relative gap `|a - b| / max(|a|, |b|, 1)`.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// `(n-k)/(2k)` written as a rational, re-exported for reports.
pub fn alpha_generic(k: u32, n: u32) -> Rational {
    pkn::lower_bound(k, n)
}

/// `(k-1)/(2(n-k+1))`.
pub fn beta_generic(k: u32, n: u32) -> Rational {
    ratio((k - 1).into(), (2 * (n - k + 1)).into())
}

/// Printed-versus-matrix comparison of the lower-bound rate on every
/// `1 < k < n <= n_max`.
pub fn thm3_survey(n_max: u32) -> Result<Vec<Thm3Check>> {
    let mut out = vec![];
    for n in 3..=n_max {
        for k in 2..n {
            out.push(closed_form_thm3(k, n)?);
        }
    }
    Ok(out)
}

pub const CLOSED_FORM_TOLERANCE: f64 = 1e-9;

/// Exact and closed-form consistency checks on the cost matrices for
/// `n <= n_max`. Matrices built from exact `P` values are limited to
/// `n <= exact_n_max`.
pub fn verify_bounds_invariants(n_max: u32, exact_n_max: u32) -> Result<Vec<PropertyResult>> {
    let mut dom = Check::new("dominance", "gamma_exact >= gamma_generic entrywise");
    let mut order = Check::new(
        "ordering",
        "lambda(gamma_generic) <= lambda(gamma_exact) <= lambda(delta), exact comparison",
    );
    let mut thm2 = Check::new(
        "thm2",
        "directional closed form equals the Delta eigenvalue",
    );
    let mut edges = Check::new(
        "edges",
        "Delta(n,n) = Gamma(n,n) and Delta(1,n) = Gamma(1,n)",
    );
    let mut andor = Check::new(
        "andor",
        "det(AB) = n^2, trace(AB) = n + (n+1)^2/4, closed forms equal lambda(AB)",
    );
    let mut real = Check::new("real", "all matrices are nonnegative with real eigenvalues");

    for n in 2..=n_max {
        let with_exact = n <= exact_n_max;
        if with_exact {
            let p = andor_product(n)?;
            let nn = int(n.into());
            let want_t = &nn + (&nn + int(1)) * (&nn + int(1)) / int(4);
            andor.expect(p.ab.det() == &nn * &nn && p.ab.trace() == want_t, || {
                format!(
                    "n={n}: T={}, D={}",
                    to_fraction_string(&p.ab.trace()),
                    to_fraction_string(&p.ab.det())
                )
            });
            let (f1, f2) = closed_form_thm1(n)?;
            andor.expect(
                relative_gap(f1, f2) <= CLOSED_FORM_TOLERANCE
                    && relative_gap(f1, p.spectral.lambda) <= CLOSED_FORM_TOLERANCE,
                || format!("n={n}: {f1} {f2} {}", p.spectral.lambda),
            );
            for k in [1, n] {
                let (d, g) = (directional::delta_matrix(k, n)?, gamma_exact(k, n)?);
                edges.expect(d == g, || format!("k={k} n={n}: {d} vs {g}"));
            }
        }
        for k in 2..n {
            let delta = directional::delta_matrix(k, n)?;
            let generic = gamma_generic(k, n)?;
            let mut mats = vec![("delta", &delta), ("generic", &generic)];
            let exact = if with_exact {
                Some(gamma_exact(k, n)?)
            } else {
                None
            };
            if let Some(e) = &exact {
                mats.push(("exact", e));
            }
            for (name, m) in &mats {
                let ok = m.is_nonnegative() && largest_eigenvalue(m).is_ok();
                real.expect(ok, || format!("{name} k={k} n={n}: {m}"));
            }
            let up = largest_eigenvalue(&delta)?;
            let lo = largest_eigenvalue(&generic)?;
            order.expect(lo.cmp_exact(&up) != Ordering::Greater, || {
                format!("k={k} n={n}: generic {} > upper {}", lo.lambda, up.lambda)
            });
            if let Some(e) = &exact {
                dom.expect(e.dominates(&generic), || {
                    format!("k={k} n={n}: {e} vs {generic}")
                });
                let le = largest_eigenvalue(e)?;
                order.expect(
                    lo.cmp_exact(&le) != Ordering::Greater
                        && le.cmp_exact(&up) != Ordering::Greater,
                    || {
                        format!(
                            "k={k} n={n}: exact {} vs [{}, {}]",
                            le.lambda, lo.lambda, up.lambda
                        )
                    },
                );
            }
            let c = closed_form_thm2(k, n)?;
            thm2.expect((c - up.lambda).abs() <= CLOSED_FORM_TOLERANCE, || {
                format!("k={k} n={n}: {c} vs {}", up.lambda)
            });
        }
    }
    Ok([dom, order, thm2, edges, andor, real]
        .into_iter()
        .map(Check::finish)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directional::delta_matrix;

    fn q(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    fn mat(a: Rational, b: Rational, c: Rational, d: Rational) -> CostMatrix {
        CostMatrix::new(a, b, c, d)
    }

    #[test]
    fn gamma_matrix_examples() {
        assert_eq!(
            gamma_matrix(2, 3, &q(1, 4), &q(1, 4)).unwrap(),
            mat(int(2), q(1, 2), q(1, 2), int(2))
        );
        for n in 2..=8u32 {
            let half = q((n - 1).into(), 2);
            assert_eq!(
                gamma_matrix(n, n, &int(0), &half).unwrap(),
                delta_matrix(n, n).unwrap()
            );
            assert_eq!(
                gamma_matrix(1, n, &half, &int(0)).unwrap(),
                delta_matrix(1, n).unwrap()
            );
        }
        assert!(gamma_matrix(2, 3, &q(-1, 4), &int(0)).is_err());
        assert!(gamma_matrix(0, 3, &int(0), &int(0)).is_err());
    }

    #[test]
    fn gamma_generic_examples() {
        assert_eq!(
            gamma_generic(2, 3).unwrap(),
            mat(int(2), q(1, 2), q(1, 2), int(2))
        );
        assert_eq!(
            gamma_generic(2, 4).unwrap(),
            mat(int(2), int(1), q(1, 2), int(3))
        );
        for n in 1..=7u32 {
            assert_eq!(
                gamma_generic(1, n).unwrap(),
                mat(int(1), q((n - 1).into(), 2), int(0), int(n.into()))
            );
        }
        // beta is the closed-form lower bound on P(n-k+1, n)
        assert_eq!(beta_generic(3, 7), pkn::lower_bound(5, 7));
        assert_eq!(alpha_generic(2, 5), q(3, 4));
    }

    #[test]
    fn gamma_exact_examples() {
        assert_eq!(
            gamma_exact(2, 3).unwrap(),
            mat(int(2), q(1, 2), q(1, 2), int(2))
        );
        assert_eq!(
            gamma_exact(2, 4).unwrap(),
            mat(int(2), q(10, 9), q(1, 2), int(3))
        );
        for n in 1..=7 {
            assert_eq!(gamma_exact(1, n).unwrap(), gamma_generic(1, n).unwrap());
        }
    }

    #[test]
    fn matrix_power_examples() {
        let g = gamma_generic(2, 3).unwrap();
        assert_eq!(
            matrix_power_cost(&delta_matrix(3, 5).unwrap(), 0),
            CostPair::unit()
        );
        assert_eq!(matrix_power_cost(&g, 1), CostPair::new(q(5, 2), q(5, 2)));
        assert_eq!(matrix_power_cost(&g, 2), CostPair::new(q(25, 4), q(25, 4)));
        for d in 0..=8u32 {
            let v = matrix_power_cost(&g, d);
            assert_eq!(v.c1, q(5, 2).pow(d as i32));
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let s = largest_eigenvalue(&gamma_generic(2, 3).unwrap()).unwrap();
        assert_eq!((s.trace.clone(), s.det.clone()), (int(4), q(15, 4)));
        assert_eq!(s.exact_lambda(), Some(q(5, 2)));
        assert_eq!(s.lambda, 2.5);
        let s = largest_eigenvalue(&delta_matrix(2, 3).unwrap()).unwrap();
        assert_eq!((s.trace.clone(), s.det.clone()), (int(4), q(32, 9)));
        assert_eq!(s.exact_lambda(), Some(q(8, 3)));
        let s = largest_eigenvalue(&CostMatrix::identity()).unwrap();
        assert_eq!(s.exact_lambda(), Some(int(1)));
        // rotation-like matrix has complex eigenvalues
        let rot = mat(int(0), int(-1), int(1), int(0));
        assert!(matches!(largest_eigenvalue(&rot), Err(Error::Domain(_))));
    }

    #[test]
    fn exact_eigenvalue_ordering() {
        let lo = largest_eigenvalue(&gamma_generic(2, 3).unwrap()).unwrap();
        let hi = largest_eigenvalue(&delta_matrix(2, 3).unwrap()).unwrap();
        assert_eq!(lo.cmp_exact(&hi), Ordering::Less);
        assert_eq!(hi.cmp_exact(&lo), Ordering::Greater);
        assert_eq!(lo.cmp_exact(&lo), Ordering::Equal);
        // irrational case: 5/2 + sqrt(3)/2 < 5/2 + sqrt(29)/6
        let g = largest_eigenvalue(&gamma_generic(2, 4).unwrap()).unwrap();
        let e = largest_eigenvalue(&gamma_exact(2, 4).unwrap()).unwrap();
        assert_eq!(g.cmp_exact(&e), Ordering::Less);
        for (a, b) in [(&g, &e), (&e, &g), (&lo, &e), (&hi, &g)] {
            assert_eq!(a.cmp_exact(b), a.lambda.partial_cmp(&b.lambda).unwrap());
        }
    }

    #[test]
    fn andor_examples() {
        let p = andor_product(2).unwrap();
        assert_eq!(p.ab, mat(int(2), int(1), q(1, 2), q(9, 4)));
        let want = (17.0 + 33f64.sqrt()) / 8.0;
        assert!((p.spectral.lambda - want).abs() < 1e-12);
        assert!((want - ((1.0 + 33f64.sqrt()) / 4.0).powi(2)).abs() < 1e-12);
        assert_eq!(andor_product(3).unwrap().ab.det(), int(9));
        for n in 2..=10 {
            let p = andor_product(n).unwrap();
            assert_eq!(p.ab.trace(), p.ba.trace());
            assert_eq!(p.ab.det(), p.ba.det());
        }
        assert!(andor_product(1).is_err());
    }

    #[test]
    fn thm1_examples() {
        let (a, b) = closed_form_thm1(2).unwrap();
        assert!((a - 2.843070).abs() < 1e-6 && (b - 2.843070).abs() < 1e-6);
        let l3 = andor_product(3).unwrap().spectral.lambda;
        let (a, b) = closed_form_thm1(3).unwrap();
        assert!((a - l3).abs() < 1e-12 && (b - l3).abs() < 1e-12);
        let (a, b) = closed_form_thm1(10).unwrap();
        assert!(relative_gap(a, b) < 1e-12);
        assert!(closed_form_thm1(1).is_err());
    }

    #[test]
    fn thm2_examples() {
        assert!((closed_form_thm2(2, 3).unwrap() - 8.0 / 3.0).abs() < 1e-12);
        let want = 2.5 + 2.5 * 0.2f64.sqrt();
        let got = closed_form_thm2(2, 4).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!(
            (largest_eigenvalue(&delta_matrix(2, 4).unwrap())
                .unwrap()
                .lambda
                - want)
                .abs()
                < 1e-12
        );
        assert!((closed_form_thm2(3, 4).unwrap() - got).abs() < 1e-12);
        assert!(closed_form_thm2(1, 4).is_err());
        assert!(closed_form_thm2(4, 4).is_err());
    }

    #[test]
    fn thm3_examples() {
        let c = closed_form_thm3(2, 3).unwrap();
        assert!((c.printed - (2.0 + 7f64.sqrt() / 2.0)).abs() < 1e-12);
        assert!((c.printed - 3.3229).abs() < 1e-4);
        assert_eq!(c.matrix_derived, 2.5);
        assert!(!c.consistent);
        assert!(c.printed > 8.0 / 3.0);
        let c = closed_form_thm3(2, 4).unwrap();
        assert!((c.matrix_derived - (2.5 + 3f64.sqrt() / 2.0)).abs() < 1e-12);
        let exact = largest_eigenvalue(&gamma_exact(2, 4).unwrap()).unwrap();
        assert_eq!((exact.trace.clone(), exact.det.clone()), (int(5), q(49, 9)));
        assert!((exact.lambda - (2.5 + 29f64.sqrt() / 6.0)).abs() < 1e-12);
        assert!(exact.lambda >= c.matrix_derived);
    }

    #[test]
    fn bounded_error_examples() {
        assert_eq!(bounded_error_scale(2.5, 0.0).unwrap(), 2.5);
        assert_eq!(bounded_error_scale(2.5, 0.25).unwrap(), 1.25);
        assert!((bounded_error_scale(8.0 / 3.0, 1.0 / 6.0).unwrap() - 16.0 / 9.0).abs() < 1e-15);
        assert!(bounded_error_scale(1.0, 0.5).is_err());
        assert!(bounded_error_scale(1.0, -0.1).is_err());
    }

    #[test]
    fn report_examples() {
        let r = report_bounds(2, 3, 1).unwrap();
        assert_eq!(r.rows[0].scalar_generic, int(1));
        assert_eq!(r.rows[0].upper.phi, int(1));
        assert_eq!(r.rows[1].lower_generic, CostPair::new(q(5, 2), q(5, 2)));
        assert_eq!(r.rows[1].scalar_generic, q(5, 2));
        assert_eq!(r.rows[1].upper.phi, q(8, 3));
        let r = report_bounds(2, 4, 3).unwrap();
        let row = &r.rows[3];
        assert!(row.lower_exact.c1 >= row.lower_generic.c1);
        assert!(row.lower_exact.c0 >= row.lower_generic.c0);
        assert!(report_bounds(1, 3, 2).is_err());
    }

    #[test]
    fn alternating_report_is_tight() {
        for root in [GateKind::And, GateKind::Or] {
            let r = report_alternating(3, root, 5).unwrap();
            assert!(r.rows.iter().all(|row| row.tight));
        }
    }

    #[test]
    fn invariant_suite_passes() {
        for prop in verify_bounds_invariants(25, 12).unwrap() {
            assert!(prop.passed, "{}: {:?}", prop.name, prop.counterexamples);
            assert!(prop.checked > 0, "{}", prop.name);
        }
        let survey = thm3_survey(6).unwrap();
        assert_eq!(survey.len(), 10);
        assert!(survey.iter().any(|c| !c.consistent));
    }

    #[test]
    fn domination_and_ordering() {
        for n in 3..=12 {
            for k in 2..n {
                let g = gamma_generic(k, n).unwrap();
                let e = gamma_exact(k, n).unwrap();
                assert!(e.dominates(&g), "({k},{n})");
                assert!(g.is_nonnegative() && e.is_nonnegative());
            }
        }
    }

    #[test]
    fn normalized_powers_converge_monotonically() {
        for (k, n) in [(2, 3), (2, 4), (3, 5), (4, 7), (5, 9)] {
            for m in [gamma_generic(k, n).unwrap(), delta_matrix(k, n).unwrap()] {
                let lambda = largest_eigenvalue(&m).unwrap().lambda;
                let ratios: Vec<f64> = (1..=20)
                    .map(|d| to_f64(matrix_power_cost(&m, d).max()) / lambda.powi(d as i32))
                    .collect();
                let up = ratios.windows(2).all(|w| w[1] >= w[0] - 1e-12);
                let down = ratios.windows(2).all(|w| w[1] <= w[0] + 1e-12);
                assert!(up || down, "({k},{n}) {ratios:?}");
                assert!(ratios.iter().all(|r| *r > 0.1 && *r < 10.0));
            }
        }
    }
}
