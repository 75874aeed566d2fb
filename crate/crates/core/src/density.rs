//! Interval families of the gap class, index sets and natural-density
//! profiles.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Start points of a family written as `s_1 = 1`, `s_i = b_i` (`i >= 2`),
/// `t_i = b_{i+1} - 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Boundaries {
    /// `b_i` given explicitly for `i = 1, 2, ...` (`b_1` is ignored).
    List { values: Vec<u64> },
    /// `b_i = c·i²`.
    ScaledSquare { scale: u64 },
}

impl Boundaries {
    fn get(&self, i: u64) -> Option<u64> {
        match self {
            Boundaries::List { values } => values.get((i - 1) as usize).copied(),
            Boundaries::ScaledSquare { scale } => Some(scale * i * i),
        }
    }
}

/// Integer intervals `[s_i, t_i]`, `i >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IntervalFamily {
    /// `t_i = s_i + ⌊i^ν⌋`, `s_{i+1} = t_i + 2`, with `ν = num/den`.
    Exponent { nu_num: u64, nu_den: u64, s1: u64 },
    /// `t_i - s_i = length` for every `i`; never in the class, kept for
    /// diagnostics.
    ConstantLength { s1: u64, length: u64 },
    Boundaries { starts: Boundaries },
    Explicit { intervals: Vec<(u64, u64)> },
}

/// `⌊i^{p/q}⌋`.
pub fn floor_power(i: u64, p: u64, q: u64) -> u64 {
    let x = BigUint::from(i).pow(p as u32);
    let r = if q == 1 { x } else { x.nth_root(q as u32) };
    r.to_u64().expect("interval length fits in u64")
}

/// Lengths `⌊i^ν⌋` for `ν > 1`.
pub fn family_from_exponent(nu: &BigRational, s1: u64) -> Result<IntervalFamily> {
    if nu <= &BigRational::one() {
        return Err(Error::Precondition(format!("exponent must exceed 1, got {nu}")));
    }
    if s1 == 0 {
        return Err(Error::Precondition("s_1 must be >= 1".into()));
    }
    let (Some(nu_num), Some(nu_den)) = (nu.numer().to_u64(), nu.denom().to_u64()) else {
        return Err(Error::Precondition("exponent too large".into()));
    };
    Ok(IntervalFamily::Exponent { nu_num, nu_den, s1 })
}

/// Iterator over `(s_i, t_i)`.
pub struct Intervals<'a> {
    family: &'a IntervalFamily,
    i: u64,
    next_s: u64,
}

impl Iterator for Intervals<'_> {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        let i = self.i;
        let out = match self.family {
            IntervalFamily::Exponent { nu_num, nu_den, .. } => {
                let s = self.next_s;
                Some((s, s + floor_power(i, *nu_num, *nu_den)))
            }
            IntervalFamily::ConstantLength { length, .. } => {
                let s = self.next_s;
                Some((s, s + length))
            }
            IntervalFamily::Boundaries { starts } => {
                let t = starts.get(i + 1).and_then(|b| b.checked_sub(2));
                let s = if i == 1 { Some(1) } else { starts.get(i) };
                match (s, t) {
                    (Some(s), Some(t)) => Some((s, t)),
                    _ => None,
                }
            }
            IntervalFamily::Explicit { intervals } => intervals.get((i - 1) as usize).copied(),
        }?;
        self.i += 1;
        self.next_s = out.1 + 2;
        Some(out)
    }
}

impl IntervalFamily {
    pub fn intervals(&self) -> Intervals<'_> {
        let next_s = match self {
            IntervalFamily::Exponent { s1, .. } | IntervalFamily::ConstantLength { s1, .. } => *s1,
            _ => 1,
        };
        Intervals {
            family: self,
            i: 1,
            next_s,
        }
    }

    /// Intervals with `s_i <= depth`.
    pub fn intervals_upto(&self, depth: u64) -> Vec<(u64, u64)> {
        self.intervals().take_while(|&(s, _)| s <= depth).collect()
    }

    /// `(s_i, t_i)` for `i >= 1`.
    pub fn interval(&self, i: usize) -> Option<(u64, u64)> {
        if i == 0 {
            return None;
        }
        self.intervals().nth(i - 1)
    }

    pub fn is_finite(&self) -> bool {
        matches!(
            self,
            IntervalFamily::Explicit { .. }
                | IntervalFamily::Boundaries {
                    starts: Boundaries::List { .. }
                }
        )
    }

    pub fn s1(&self) -> Option<u64> {
        self.intervals().next().map(|(s, _)| s)
    }

    pub fn label(&self) -> String {
        match self {
            IntervalFamily::Exponent { nu_num, nu_den, s1 } => {
                if *nu_den == 1 {
                    format!("exponent {nu_num}, s1={s1}")
                } else {
                    format!("exponent {nu_num}/{nu_den}, s1={s1}")
                }
            }
            IntervalFamily::ConstantLength { s1, length } => format!("constant {length}, s1={s1}"),
            IntervalFamily::Boundaries { starts: Boundaries::ScaledSquare { scale } } => {
                format!("starts {scale}i^2")
            }
            IntervalFamily::Boundaries { starts: Boundaries::List { values } } => {
                format!("starts list of {}", values.len())
            }
            IntervalFamily::Explicit { intervals } => format!("explicit {} intervals", intervals.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FamilyCheck {
    /// Gap rule holds on every interval up to `horizon` and the lengths
    /// grew over that prefix.
    Ok { horizon: usize, max_length: u64 },
    /// `s_{i+1} != t_i + 2` or `t_i < s_i`.
    Violation { index: usize, reason: String },
    /// Gap rule holds but lengths are not growing on the checked prefix.
    NoGrowth { horizon: usize, max_length: u64 },
}

impl FamilyCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, FamilyCheck::Ok { .. })
    }
}

/// Checks `s_i <= t_i`, `s_{i+1} = t_i + 2`, nondecreasing lengths, and that
/// the length at the horizon exceeds the first one.
pub fn family_validate(f: &IntervalFamily, depth: usize) -> FamilyCheck {
    let ivs: Vec<(u64, u64)> = f.intervals().take(depth + 1).collect();
    let horizon = ivs.len().min(depth);
    if horizon == 0 {
        return FamilyCheck::Violation {
            index: 1,
            reason: "family is empty".into(),
        };
    }
    for i in 0..horizon {
        let (s, t) = ivs[i];
        if t < s {
            return FamilyCheck::Violation {
                index: i + 1,
                reason: format!("t_{0} = {t} < s_{0} = {s}", i + 1),
            };
        }
        if let Some(&(s_next, _)) = ivs.get(i + 1) {
            if s_next != t + 2 {
                return FamilyCheck::Violation {
                    index: i + 1,
                    reason: format!("s_{} = {s_next} but t_{} + 2 = {}", i + 2, i + 1, t + 2),
                };
            }
        }
    }
    let lens: Vec<u64> = ivs[..horizon].iter().map(|(s, t)| t - s).collect();
    let max_length = *lens.iter().max().unwrap();
    let monotone = lens.windows(2).all(|w| w[0] <= w[1]);
    if monotone && lens[horizon - 1] > lens[0] {
        FamilyCheck::Ok { horizon, max_length }
    } else {
        FamilyCheck::NoGrowth { horizon, max_length }
    }
}

/// A set of nonnegative integers, either materialized or given by a rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IndexSet {
    Explicit { items: Vec<u64> },
    Intervals { intervals: Vec<(u64, u64)> },
    /// `{k² : k >= 1}`.
    Squares,
    /// `{k >= 1 : k ≡ residue (mod modulus)}`.
    Progression { modulus: u64, residue: u64 },
    /// `{t_i + 1}` together with `[1, s_1 - 1]`: the complement of the
    /// family's intervals in the positive integers.
    FamilyComplement { family: IntervalFamily },
    Union { parts: Vec<IndexSet> },
}

impl IndexSet {
    pub fn explicit(mut items: Vec<u64>) -> Self {
        items.sort_unstable();
        items.dedup();
        IndexSet::Explicit { items }
    }

    pub fn empty() -> Self {
        IndexSet::Explicit { items: vec![] }
    }

    /// Sorted, duplicate-free elements of `[lo, hi]`.
    pub fn elements_in(&self, lo: u64, hi: u64) -> Vec<u64> {
        if lo > hi {
            return vec![];
        }
        let mut out = match self {
            IndexSet::Explicit { items } => {
                let a = items.partition_point(|&x| x < lo);
                let b = items.partition_point(|&x| x <= hi);
                items[a..b].to_vec()
            }
            IndexSet::Intervals { intervals } => intervals
                .iter()
                .flat_map(|&(a, b)| a.max(lo)..=b.min(hi))
                .collect(),
            IndexSet::Squares => {
                let start = (lo.max(1) - 1).isqrt() + 1;
                (start..).map(|k| k * k).take_while(|&x| x <= hi).collect()
            }
            IndexSet::Progression { modulus, residue } => {
                let lo = lo.max(1);
                let r = residue % modulus;
                let first = lo + (r + modulus - lo % modulus) % modulus;
                (first..=hi).step_by(*modulus as usize).collect()
            }
            IndexSet::FamilyComplement { family } => {
                let mut v: Vec<u64> = Vec::new();
                if let Some(s1) = family.s1() {
                    v.extend(lo.max(1)..=hi.min(s1.saturating_sub(1)));
                }
                for (s, t) in family.intervals() {
                    if s > hi {
                        break;
                    }
                    if t + 1 >= lo && t < hi {
                        v.push(t + 1);
                    }
                }
                v
            }
            IndexSet::Union { parts } => parts.iter().flat_map(|p| p.elements_in(lo, hi)).collect(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Elements in `[1, depth]`.
    pub fn materialize(&self, depth: u64) -> Vec<u64> {
        self.elements_in(1, depth)
    }

    pub fn contains(&self, k: u64) -> bool {
        match self {
            IndexSet::Explicit { items } => items.binary_search(&k).is_ok(),
            IndexSet::Squares => k >= 1 && k.isqrt().pow(2) == k,
            IndexSet::Progression { modulus, residue } => k >= 1 && k % modulus == residue % modulus,
            IndexSet::Union { parts } => parts.iter().any(|p| p.contains(k)),
            _ => !self.elements_in(k, k).is_empty(),
        }
    }

    /// Largest element, when the set is known to be finite.
    pub fn finite_max(&self) -> Option<Option<u64>> {
        match self {
            IndexSet::Explicit { items } => Some(items.last().copied()),
            IndexSet::Intervals { intervals } => Some(intervals.iter().map(|&(_, b)| b).max()),
            IndexSet::FamilyComplement { family } if family.is_finite() => {
                Some(family.intervals().last().map(|(_, t)| t + 1))
            }
            IndexSet::Union { parts } => {
                let mut best = None;
                for p in parts {
                    if let Some(m) = p.finite_max()? {
                        best = Some(best.map_or(m, |b: u64| b.max(m)));
                    }
                }
                Some(best)
            }
            _ => None,
        }
    }
}

/// `{t_i + 1 : i >= 1} ∪ [1, s_1 - 1]` restricted to `[1, depth]`.
pub fn complement_support(f: &IntervalFamily, depth: u64) -> IndexSet {
    IndexSet::Explicit {
        items: IndexSet::FamilyComplement { family: f.clone() }.materialize(depth),
    }
}

fn exception_blocks(f: &IntervalFamily, m: u64, i0: usize, first: usize, depth: u64) -> Result<IndexSet> {
    if m == 0 {
        return Err(Error::Precondition("m must be >= 1".into()));
    }
    if i0 == 0 {
        return Err(Error::Precondition("i0 must be >= 1".into()));
    }
    let ivs = f.intervals_upto(depth);
    let mut items = IndexSet::FamilyComplement { family: f.clone() }.materialize(depth);
    let s_i0 = match ivs.get(i0 - 1) {
        Some(&(s, _)) => s,
        None => depth + 1,
    };
    items.extend(1..s_i0.min(depth + 1));
    for &(s, t) in ivs.iter().skip(i0 - 1 + first) {
        items.extend(s..=(s + m - 1).min(t).min(depth));
        items.extend((t + 1).saturating_sub(m).max(s)..=t.min(depth));
    }
    Ok(IndexSet::explicit(items))
}

/// `B_1 ∪ B_2 ∪ B_3` with `B_1 = {t_i + 1}`, `B_2 = [1, s_{i0} - 1]` and
/// `B_3` the `m` leftmost and `m` rightmost points of every interval
/// `[s_{i+i0}, t_{i+i0}]`, `i >= 1`.
pub fn predicted_exception_set(f: &IntervalFamily, m: u64, i0: usize, depth: u64) -> Result<IndexSet> {
    exception_blocks(f, m, i0, 1, depth)
}

/// As [`predicted_exception_set`], but the end blocks of interval `i0`
/// itself are included as well (`B_3` taken over `i >= 0`). Neither `B_2`
/// nor the literal `B_3` covers the points of `[s_{i0}, t_{i0}]` that sit
/// next to a support point.
pub fn closed_exception_set(f: &IntervalFamily, m: u64, i0: usize, depth: u64) -> Result<IndexSet> {
    exception_blocks(f, m, i0, 0, depth)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub n: u64,
    pub count: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub checkpoints: Vec<DensityPoint>,
    /// Ratios are nonincreasing over the last three checkpoints.
    pub tail_nonincreasing: bool,
    pub counts_nondecreasing: bool,
}

impl DensityReport {
    pub fn last_ratio(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |p| p.ratio)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(["N", "count", "ratio"]).unwrap();
        for p in &self.checkpoints {
            w.write_record([p.n.to_string(), p.count.to_string(), p.ratio.to_string()])
                .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

pub(crate) fn tail_nonincreasing(ratios: &[f64]) -> bool {
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    tail.windows(2).all(|w| w[1] <= w[0])
}

/// Density profile for a sorted, duplicate-free list of positive integers.
pub fn profile_of_sorted(items: &[u64], checkpoints: &[u64]) -> Result<DensityReport> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("checkpoints must be strictly increasing".into()));
    }
    if checkpoints.first() == Some(&0) {
        return Err(Error::Precondition("checkpoints must be >= 1".into()));
    }
    let pts: Vec<DensityPoint> = checkpoints
        .iter()
        .map(|&n| {
            let count = (items.partition_point(|&x| x <= n) - items.partition_point(|&x| x < 1)) as u64;
            DensityPoint {
                n,
                count,
                ratio: count as f64 / n as f64,
            }
        })
        .collect();
    let ratios: Vec<f64> = pts.iter().map(|p| p.ratio).collect();
    Ok(DensityReport {
        counts_nondecreasing: pts.windows(2).all(|w| w[0].count <= w[1].count),
        tail_nonincreasing: tail_nonincreasing(&ratios),
        checkpoints: pts,
    })
}

/// `|A ∩ [1, N_j]| / N_j` at each checkpoint.
pub fn density_profile(a: &IndexSet, checkpoints: &[u64]) -> Result<DensityReport> {
    let top = checkpoints.last().copied().unwrap_or(0);
    profile_of_sorted(&a.materialize(top), checkpoints)
}
