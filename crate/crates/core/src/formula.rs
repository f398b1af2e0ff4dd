//! Uniform read-once threshold formulae and their reluctant inputs.
//!
//! A formula is a full `n`-ary tree of depth `d` whose internal nodes are
//! threshold gates `T(k, n)`, each outputting 1 iff at least `k` of its `n`
//! inputs are 1, and whose `n^d` leaves are distinct variables. Leaves are
//! indexed left to right, depth first, so an [`Assignment`] is a flat bit
//! string.
//!
//! An input is *reluctant* when every gate sees either exactly `k` ones and
//! outputs 1, or exactly `k - 1` ones and outputs 0. The reluctant
//! distribution is uniform over all reluctant inputs.

use itertools::Itertools;
use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rational::Rational;

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// A threshold gate `T(k, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateSpec {
    k: u32,
    n: u32,
}

impl GateSpec {
    pub fn new(k: u32, n: u32) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidGate { k, n });
        }
        Ok(Self { k, n })
    }

    pub fn and(n: u32) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn or(n: u32) -> Result<Self> {
        Self::new(1, n)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn is_and(&self) -> bool {
        self.k == self.n
    }

    pub fn is_or(&self) -> bool {
        self.k == 1
    }

    /// Number of one-valued inputs a reluctant gate sees for the given output.
    pub fn reluctant_ones(&self, output: bool) -> u32 {
        if output {
            self.k
        } else {
            self.k - 1
        }
    }

    pub fn fire(&self, ones: u32) -> bool {
        ones >= self.k
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    And,
    Or,
}

impl GateKind {
    pub fn flip(self) -> Self {
        match self {
            GateKind::And => GateKind::Or,
            GateKind::Or => GateKind::And,
        }
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Ok(GateKind::And),
            "or" => Ok(GateKind::Or),
            other => Err(Error::Parse(format!("unknown gate kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Schedule {
    /// Every gate is the same `T(k, n)`.
    Constant(GateSpec),
    /// AND and OR gates alternate level by level starting from `root`.
    Alternating { n: u32, root: GateKind },
}

/// A uniform read-once threshold formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormulaSpec {
    depth: u32,
    schedule: Schedule,
}

impl FormulaSpec {
    pub fn constant(k: u32, n: u32, depth: u32) -> Result<Self> {
        Ok(Self {
            depth,
            schedule: Schedule::Constant(GateSpec::new(k, n)?),
        })
    }

    pub fn alternating(n: u32, root: GateKind, depth: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGate { k: 1, n });
        }
        Ok(Self {
            depth,
            schedule: Schedule::Alternating { n, root },
        })
    }

    pub fn with_depth(&self, depth: u32) -> Self {
        Self { depth, ..*self }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    pub fn fan_out(&self) -> u32 {
        match self.schedule {
            Schedule::Constant(g) => g.n,
            Schedule::Alternating { n, .. } => n,
        }
    }

    /// Gate at `level`, counted from the root (level 0).
    pub fn gate_at_level(&self, level: u32) -> GateSpec {
        match self.schedule {
            Schedule::Constant(g) => g,
            Schedule::Alternating { n, root } => {
                let kind = if level.is_multiple_of(2) {
                    root
                } else {
                    root.flip()
                };
                match kind {
                    GateKind::And => GateSpec { k: n, n },
                    GateKind::Or => GateSpec { k: 1, n },
                }
            }
        }
    }

    /// `n^d`, or `None` when it does not fit in a `usize`.
    pub fn leaf_count(&self) -> Option<usize> {
        (self.fan_out() as usize).checked_pow(self.depth)
    }

    pub(crate) fn require_leaves(&self) -> Result<usize> {
        self.leaf_count().ok_or(Error::TooManyLeaves {
            n: self.fan_out(),
            depth: self.depth,
        })
    }

    fn check_len(&self, a: &Assignment) -> Result<usize> {
        let expected = self.require_leaves()?;
        if a.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: a.len(),
            });
        }
        Ok(expected)
    }
}

impl fmt::Display for FormulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.schedule {
            Schedule::Constant(g) => write!(f, "const:{}:{}:{}", g.k, g.n, self.depth),
            Schedule::Alternating { n, root } => {
                let kind = match root {
                    GateKind::And => "and",
                    GateKind::Or => "or",
                };
                write!(f, "{kind}:{n}:{}", self.depth)
            }
        }
    }
}

/// Parses `const:K:N:D`, `and:N:D` or `or:N:D`.
impl FromStr for FormulaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| {
            p.parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad number {p:?} in formula {s:?}")))
        };
        match parts.as_slice() {
            ["const", k, n, d] => Self::constant(num(k)?, num(n)?, num(d)?),
            [kind @ ("and" | "or"), n, d] => Self::alternating(num(n)?, kind.parse()?, num(d)?),
            _ => Err(Error::Parse(format!(
                "formula {s:?}; expected const:K:N:D, and:N:D or or:N:D"
            ))),
        }
    }
}

/// A full input to a formula, one bit per leaf.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Low `len` bits of `mask`, bit `i` becoming leaf `i`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        Self((0..len).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn to_mask(&self) -> u64 {
        assert!(self.0.len() <= 64);
        self.0
            .iter()
            .enumerate()
            .fold(0, |m, (i, &b)| m | (u64::from(b) << i))
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("bit string {s:?} contains {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn evaluate(f: &FormulaSpec, a: &Assignment) -> Result<bool> {
    f.check_len(a)?;
    Ok(eval_node(f, 0, a.bits()))
}

fn eval_node(f: &FormulaSpec, level: u32, bits: &[bool]) -> bool {
    if level == f.depth {
        return bits[0];
    }
    let gate = f.gate_at_level(level);
    let width = bits.len() / gate.n as usize;
    let ones = bits
        .chunks(width)
        .filter(|c| eval_node(f, level + 1, c))
        .count();
    gate.fire(ones as u32)
}

pub fn is_reluctant(f: &FormulaSpec, a: &Assignment) -> Result<bool> {
    f.check_len(a)?;
    Ok(reluctant_value(f, 0, a.bits()).is_some())
}

/// Root value of a reluctant subtree, `None` if some gate is not reluctant.
fn reluctant_value(f: &FormulaSpec, level: u32, bits: &[bool]) -> Option<bool> {
    if level == f.depth {
        return Some(bits[0]);
    }
    let gate = f.gate_at_level(level);
    let width = bits.len() / gate.n as usize;
    let mut ones = 0;
    for c in bits.chunks(width) {
        if reluctant_value(f, level + 1, c)? {
            ones += 1;
        }
    }
    if ones == gate.k {
        Some(true)
    } else if ones + 1 == gate.k {
        Some(false)
    } else {
        None
    }
}

/// Exact number of reluctant inputs, split by root value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReluctantCounts {
    #[serde(with = "biguint_decimal")]
    pub n0: BigUint,
    #[serde(with = "biguint_decimal")]
    pub n1: BigUint,
}

impl ReluctantCounts {
    pub fn total(&self) -> BigUint {
        &self.n0 + &self.n1
    }

    /// Probability that the root evaluates to 1 under the reluctant distribution.
    pub fn root_one_probability(&self) -> Rational {
        Rational::new(self.n1.clone().into(), self.total().into())
    }

    pub fn for_value(&self, value: bool) -> &BigUint {
        if value {
            &self.n1
        } else {
            &self.n0
        }
    }
}

mod biguint_decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

fn binomial(n: u32, k: u32) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Counts per level: entry `l` describes a subtree rooted at level `l`, the
/// last entry (level `d`) being a single leaf.
fn counts_by_level(f: &FormulaSpec) -> Vec<ReluctantCounts> {
    let mut out = vec![
        ReluctantCounts {
            n0: BigUint::one(),
            n1: BigUint::one(),
        };
        f.depth as usize + 1
    ];
    for level in (0..f.depth).rev() {
        let g = f.gate_at_level(level);
        let child = &out[level as usize + 1];
        let n1 = binomial(g.n, g.k) * child.n1.pow(g.k) * child.n0.pow(g.n - g.k);
        let n0 = binomial(g.n, g.k - 1) * child.n1.pow(g.k - 1) * child.n0.pow(g.n - g.k + 1);
        out[level as usize] = ReluctantCounts { n0, n1 };
    }
    out
}

pub fn reluctant_counts(f: &FormulaSpec) -> ReluctantCounts {
    counts_by_level(f).swap_remove(0)
}

/// Draws one reluctant input, uniformly over all of them or over those with
/// root value `condition`.
pub fn sample_reluctant(f: &FormulaSpec, seed: u64, condition: Option<bool>) -> Result<Assignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_reluctant_with(f, &mut rng, condition)
}

pub fn sample_reluctant_with<R: Rng + ?Sized>(
    f: &FormulaSpec,
    rng: &mut R,
    condition: Option<bool>,
) -> Result<Assignment> {
    let leaves = f.require_leaves()?;
    let root = match condition {
        Some(v) => v,
        None => {
            let counts = reluctant_counts(f);
            rng.gen_biguint_below(&counts.total()) < counts.n1
        }
    };
    let mut bits = vec![false; leaves];
    fill_reluctant(f, 0, root, &mut bits, rng);
    Ok(Assignment(bits))
}

// Given the gate output, every choice of which children carry ones extends to
// the same number of reluctant inputs, so a uniform choice of positions
// followed by independent uniform children is uniform overall.
fn fill_reluctant<R: Rng + ?Sized>(
    f: &FormulaSpec,
    level: u32,
    value: bool,
    out: &mut [bool],
    rng: &mut R,
) {
    if level == f.depth {
        out[0] = value;
        return;
    }
    let g = f.gate_at_level(level);
    let n = g.n as usize;
    let mut child_values = vec![false; n];
    for i in index::sample(rng, n, g.reluctant_ones(value) as usize) {
        child_values[i] = true;
    }
    let width = out.len() / n;
    for (chunk, v) in out.chunks_mut(width).zip(child_values) {
        fill_reluctant(f, level + 1, v, chunk, rng);
    }
}

pub fn enumerate_reluctant(f: &FormulaSpec) -> Result<ReluctantIter> {
    enumerate_reluctant_capped(f, DEFAULT_ENUMERATION_CAP)
}

/// Lazily enumerates every reluctant input exactly once: root value 0 first,
/// then root value 1.
pub fn enumerate_reluctant_capped(f: &FormulaSpec, cap: u64) -> Result<ReluctantIter> {
    let counts = counts_by_level(f);
    let total = counts[0].total();
    if total > BigUint::from(cap) {
        return Err(Error::EnumerationCap {
            count: total.to_string(),
            cap,
        });
    }
    let leaves = f.require_leaves()?;
    // all per-level counts divide the total, so they fit as well
    let small = counts
        .iter()
        .map(|c| [c.n0.to_u64().unwrap(), c.n1.to_u64().unwrap()])
        .collect();
    let patterns = (0..f.depth)
        .map(|level| {
            let g = f.gate_at_level(level);
            [false, true].map(|v| {
                (0..g.n as usize)
                    .combinations(g.reluctant_ones(v) as usize)
                    .collect()
            })
        })
        .collect();
    Ok(ReluctantIter {
        formula: *f,
        leaves,
        counts: small,
        patterns,
        next: 0,
        total: total.to_u64().unwrap(),
    })
}

pub struct ReluctantIter {
    formula: FormulaSpec,
    leaves: usize,
    counts: Vec<[u64; 2]>,
    patterns: Vec<[Vec<Vec<usize>>; 2]>,
    next: u64,
    total: u64,
}

impl ReluctantIter {
    fn unrank(&self, level: u32, value: bool, mut rank: u64, out: &mut [bool]) {
        if level == self.formula.depth {
            out[0] = value;
            return;
        }
        let n = self.formula.gate_at_level(level).n as usize;
        let child = self.counts[level as usize + 1];
        let patterns = &self.patterns[level as usize][usize::from(value)];
        let block = self.counts[level as usize][usize::from(value)] / patterns.len() as u64;
        let ones = &patterns[(rank / block) as usize];
        rank %= block;
        let width = out.len() / n;
        for (i, chunk) in out.chunks_mut(width).enumerate() {
            let v = ones.contains(&i);
            let radix = child[usize::from(v)];
            self.unrank(level + 1, v, rank % radix, chunk);
            rank /= radix;
        }
    }
}

impl Iterator for ReluctantIter {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        if self.next >= self.total {
            return None;
        }
        let zeros = self.counts[0][0];
        let (value, rank) = if self.next < zeros {
            (false, self.next)
        } else {
            (true, self.next - zeros)
        };
        let mut bits = vec![false; self.leaves];
        self.unrank(0, value, rank, &mut bits);
        self.next += 1;
        Some(Assignment(bits))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for ReluctantIter {}
