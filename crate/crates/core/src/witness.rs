//! Constructions of α, β and the merged sequence `(x_n)`.

use num_bigint::BigInt;
use serde::Serialize;

use crate::cf::{Boundedness, CfDigits, ConvergentTable, DigitRule};
use crate::density::{family_validate, Boundaries, FamilyCheck, IndexSet, IntervalFamily};
use crate::error::{Error, Result};
use crate::ostrowski::{validate, DigitValue, OstrowskiDigits};

/// Depth to which constructors validate the digits they produce.
pub const CHECK_DEPTH: usize = 4096;

fn check_depth(alpha: &CfDigits) -> usize {
    match alpha.known_len() {
        Some(l) => CHECK_DEPTH.min(l.saturating_sub(1)),
        None => CHECK_DEPTH,
    }
}

fn require_family(f: &IntervalFamily, depth: usize) -> Result<()> {
    match family_validate(f, depth) {
        FamilyCheck::Violation { index, reason } => Err(Error::InvalidFamily { index, reason }),
        _ => Ok(()),
    }
}

/// `d_k = 1` on `{t_i + 1}` (and on `[1, s_1 - 1]` if `s_1 > 1`), zero on
/// every `[s_i, t_i]`.
pub fn gap_family_beta(alpha: &CfDigits, f: &IntervalFamily) -> Result<OstrowskiDigits> {
    require_family(f, 256)?;
    let d = OstrowskiDigits::ones_on(alpha, IndexSet::FamilyComplement { family: f.clone() });
    validate(&d, check_depth(alpha))?.into_result()?;
    Ok(d)
}

/// Greedy indices `n_1 < n_2 < ...` with `a_{n_1} > 2`, `a_{n_{i+1}} >
/// a_{n_i}` and `n_{i+1} - n_i >= i`. Scans no further than `scan_limit`.
pub fn spike_subsequence(digits: &CfDigits, count: usize, scan_limit: usize) -> Result<Vec<u64>> {
    if let Boundedness::Bounded { max } = digits.boundedness() {
        return Err(Error::Precondition(format!(
            "{} is declared bounded (max digit {max})",
            digits.name()
        )));
    }
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut floor = 2u64;
    let mut k = 1usize;
    while out.len() < count {
        let i = out.len();
        if let Some(&last) = out.last() {
            k = k.max(last as usize + i);
        }
        loop {
            if k > scan_limit {
                return Err(Error::BudgetExceeded {
                    what: "searching for the next large partial quotient",
                    depth: k,
                });
            }
            let a = digits.digit(k)?;
            if a > floor {
                floor = a;
                out.push(k as u64);
                break;
            }
            k += 1;
        }
    }
    Ok(out)
}

/// A family with its digit stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub alpha: CfDigits,
    pub family: IntervalFamily,
    pub beta: OstrowskiDigits,
}

/// Family `s_1 = 1`, `t_1 = n_2 - 2`, `s_i = n_i`, `t_i = n_{i+1} - 2` and
/// digits `d_{t_i+1} = ⌊a_{t_i+2}/2⌋`.
pub fn half_digit_beta(alpha: &CfDigits, n: &[u64]) -> Result<Witness> {
    if n.len() < 3 {
        return Err(Error::Precondition("need at least three indices".into()));
    }
    if n.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidFamily {
            index: 1,
            reason: "indices must be strictly increasing".into(),
        });
    }
    let family = IntervalFamily::Boundaries {
        starts: Boundaries::List { values: n.to_vec() },
    };
    require_family(&family, n.len())?;
    let beta = OstrowskiDigits::on_set(
        alpha,
        IndexSet::FamilyComplement { family: family.clone() },
        DigitValue::HalfNext,
    );
    validate(&beta, check_depth(alpha).max(*n.last().unwrap() as usize))?.into_result()?;
    Ok(Witness {
        alpha: alpha.clone(),
        family,
        beta,
    })
}

/// Digits 1 on `support`. The flag reports whether the support looks
/// dense on `[1, 10^4]` (the membership argument needs density zero).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseWitness {
    pub beta: OstrowskiDigits,
    pub dense_warning: Option<String>,
}

pub fn sparse_support_beta(alpha: &CfDigits, support: IndexSet) -> Result<SparseWitness> {
    let probe = 10_000u64;
    let c = support.materialize(probe).len();
    let dense_warning = (c as f64 / probe as f64 > 0.05)
        .then(|| format!("support has {c} points in [1, {probe}]; density zero is not evident"));
    let beta = OstrowskiDigits::ones_on(alpha, support);
    validate(&beta, check_depth(alpha))?.into_result()?;
    Ok(SparseWitness { beta, dense_warning })
}

/// `a_{k²} = 4k²`, `a_n = 1` elsewhere.
pub fn square_spike_alpha() -> CfDigits {
    CfDigits::rule(DigitRule::SquareSpikes)
}

/// `n_i = 3i`, family `s_1 = 1`, `s_i = n_i²`, `t_i = n_{i+1}² - 2`, digits
/// 1 at `t_i + 1` against [`square_spike_alpha`].
pub fn square_spike_beta() -> Witness {
    let alpha = square_spike_alpha();
    let family = IntervalFamily::Boundaries {
        starts: Boundaries::ScaledSquare { scale: 9 },
    };
    let beta = OstrowskiDigits::ones_on(&alpha, IndexSet::FamilyComplement { family: family.clone() });
    Witness { alpha, family, beta }
}

/// The `n_i` of [`square_spike_beta`].
pub fn square_spike_n(i: u64) -> u64 {
    3 * i
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergedEntry {
    /// 1-based position in the merged sequence.
    pub j: usize,
    #[serde(serialize_with = "crate::cf::ser_bigint")]
    pub x: BigInt,
    pub n: usize,
    pub r: u64,
}

/// Increasing enumeration of `{r q_n : 1 <= r <= a_{n+1}, n >= 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergedSequence {
    pub alpha: CfDigits,
    pub entries: Vec<MergedEntry>,
}

impl MergedSequence {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest block index touched.
    pub fn last_block(&self) -> usize {
        self.entries.last().map_or(0, |e| e.n)
    }

    /// Positions `j` where a block starts (`r = 1`).
    pub fn block_starts(&self) -> IndexSet {
        IndexSet::Explicit {
            items: self.entries.iter().filter(|e| e.r == 1).map(|e| e.j as u64).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(["j", "x", "n", "r"]).unwrap();
        for e in &self.entries {
            w.write_record([e.j.to_string(), e.x.to_string(), e.n.to_string(), e.r.to_string()])
                .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

pub fn merged_sequence(digits: &CfDigits, count: usize) -> Result<MergedSequence> {
    if count == 0 {
        return Err(Error::Precondition("N must be >= 1".into()));
    }
    let mut table = ConvergentTable::new(digits.clone());
    let mut entries = Vec::with_capacity(count);
    let mut n = 1usize;
    while entries.len() < count {
        table.extend_to(n + 1)?;
        let a = table.digit(n + 1)?;
        let qn = table.q(n as isize).clone();
        for r in 1..=a {
            if entries.len() == count {
                break;
            }
            entries.push(MergedEntry {
                j: entries.len() + 1,
                x: &qn * r,
                n,
                r,
            });
        }
        n += 1;
    }
    Ok(MergedSequence {
        alpha: digits.clone(),
        entries,
    })
}

/// Which multiplier set to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MiddleVariant {
    /// All `i >= 1`.
    All,
    /// Only `i > i0`.
    After { i0: usize },
}

/// Positions `j` with `x_j = r q_{t_i+1}` and `a/4 <= r <= 3a/4`,
/// `a = a_{t_i+2}`.
pub fn middle_multiplier_set(seq: &MergedSequence, family: &IntervalFamily, variant: MiddleVariant) -> Result<IndexSet> {
    let top = seq.last_block() as u64;
    let blocks: Vec<(u64, usize)> = family
        .intervals()
        .take_while(|&(_, t)| t < top)
        .enumerate()
        .map(|(i, (_, t))| (t + 1, i + 1))
        .collect();
    let mut items = Vec::new();
    for e in &seq.entries {
        let Ok(pos) = blocks.binary_search_by_key(&(e.n as u64), |&(b, _)| b) else {
            continue;
        };
        let i = blocks[pos].1;
        if let MiddleVariant::After { i0 } = variant {
            if i <= i0 {
                continue;
            }
        }
        let a = seq.alpha.digit(e.n + 1)?;
        if 4 * e.r >= a && 4 * e.r <= 3 * a {
            items.push(e.j as u64);
        }
    }
    Ok(IndexSet::Explicit { items })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{complement_support, family_from_exponent};
    use crate::enclosure::rational;
    use crate::ostrowski::support;

    #[test]
    fn gap_family_witness() {
        let g = CfDigits::golden();
        let f2 = family_from_exponent(&rational(2, 1), 1).unwrap();
        let b = gap_family_beta(&g, &f2).unwrap();
        assert_eq!(&support(&b, 40).unwrap(), &[3, 9, 20, 38]);
        assert!((0..40).all(|k| b.digit(k).unwrap() <= 1));
        let f15 = family_from_exponent(&rational(3, 2), 1).unwrap();
        let b15 = gap_family_beta(&g, &f15).unwrap();
        assert_eq!(&support(&b15, 25).unwrap(), &[3, 7, 14, 24]);
        assert_ne!(b, b15);
        assert_eq!(complement_support(&f2, 40).materialize(40), vec![3, 9, 20, 38]);
    }

    #[test]
    fn subsequences() {
        let p = square_spike_alpha();
        assert_eq!(spike_subsequence(&p, 6, 1000).unwrap(), vec![1, 4, 9, 16, 25, 36]);
        assert!(spike_subsequence(&CfDigits::golden(), 3, 1000).is_err());
        let id = CfDigits::rule(DigitRule::Identity);
        let n = spike_subsequence(&id, 8, 1000).unwrap();
        assert_eq!(n[0], 3);
        for (i, w) in n.windows(2).enumerate() {
            assert!(w[1] - w[0] > i as u64);
            assert!(id.digit(w[1] as usize).unwrap() > id.digit(w[0] as usize).unwrap());
        }
        let short = CfDigits::explicit("short", vec![1, 1, 1]).unwrap();
        assert!(spike_subsequence(&short, 1, 10).is_err());
    }

    #[test]
    fn half_digit_witness() {
        let p = square_spike_alpha();
        let n = spike_subsequence(&p, 12, 10_000).unwrap();
        let w = half_digit_beta(&p, &n).unwrap();
        assert_eq!(w.family.interval(2).unwrap().0, w.family.interval(1).unwrap().1 + 2);
        for i in 1..=10u64 {
            let k = (i + 1).pow(2) - 1;
            assert_eq!(w.beta.digit(k as usize).unwrap(), 2 * (i + 1).pow(2));
        }
        assert!(half_digit_beta(&p, &[1, 4, 4, 9]).is_err());
        let three = CfDigits::periodic("three", vec![], vec![3]);
        let wt = half_digit_beta(&three, &[1, 5, 10, 16]).unwrap();
        assert_eq!(wt.beta.digit(4).unwrap(), 1);
        assert_eq!(crate::ostrowski::support(&wt.beta, 20).unwrap(), vec![4, 9, 15]);
    }

    #[test]
    fn sparse_witnesses() {
        let g = CfDigits::golden();
        let s = sparse_support_beta(&g, IndexSet::Squares).unwrap();
        assert!(s.dense_warning.is_none());
        let sil = CfDigits::silver();
        let all = sparse_support_beta(&sil, IndexSet::Intervals { intervals: vec![(0, 20_000)] }).unwrap();
        assert!(all.dense_warning.is_some());
        let empty = sparse_support_beta(&g, IndexSet::empty()).unwrap();
        assert_eq!(empty.beta.finite_extent(), Some(0));
        assert!(sparse_support_beta(&g, IndexSet::Intervals { intervals: vec![(1, 5)] }).is_err());
    }

    #[test]
    fn square_spike_construction() {
        let p = square_spike_alpha();
        assert_eq!((p.digit(1).unwrap(), p.digit(4).unwrap(), p.digit(9).unwrap()), (4, 16, 36));
        assert_eq!((p.digit(2).unwrap(), p.digit(3).unwrap(), p.digit(25).unwrap()), (1, 1, 100));
        assert_eq!(p.boundedness(), Boundedness::Unbounded);
        let w = square_spike_beta();
        assert_eq!((square_spike_n(1), square_spike_n(2), square_spike_n(3)), (3, 6, 9));
        assert_eq!(w.family.interval(1).unwrap().1, 34);
        assert_eq!(w.family.interval(2).unwrap().0, 36);
        assert_eq!(&support(&w.beta, 100).unwrap(), &[35, 80]);
        assert!(validate(&w.beta, 5000).unwrap().is_ok());
    }

    #[test]
    fn merged_examples() {
        let g = merged_sequence(&CfDigits::golden(), 10).unwrap();
        let t = ConvergentTable::with_depth(&CfDigits::golden(), 12).unwrap();
        for e in &g.entries {
            assert_eq!(&e.x, t.q(e.j as isize));
        }
        let s = merged_sequence(&CfDigits::silver(), 7).unwrap();
        let xs: Vec<i64> = s.entries.iter().map(|e| i64::try_from(&e.x).unwrap()).collect();
        assert_eq!(xs, vec![2, 4, 5, 10, 12, 24, 29]);
        assert!(s.to_csv().starts_with("j,x,n,r\n1,2,1,1\n"));
        assert!(merged_sequence(&CfDigits::golden(), 0).is_err());
    }

    #[test]
    fn middle_set_counts() {
        let w = square_spike_beta();
        let seq = merged_sequence(&w.alpha, 1500).unwrap();
        let b = middle_multiplier_set(&seq, &w.family, MiddleVariant::All).unwrap();
        let items = b.materialize(u64::MAX);
        // block n = 35 has a = a_36 = 144: r in [36, 108]
        let in_block: Vec<&MergedEntry> = seq.entries.iter().filter(|e| items.contains(&(e.j as u64))).collect();
        assert!(in_block.iter().all(|e| e.n == 35 || e.n == 80));
        let c35 = in_block.iter().filter(|e| e.n == 35).count();
        assert_eq!(c35, 108 - 36 + 1);
        let after = middle_multiplier_set(&seq, &w.family, MiddleVariant::After { i0: 1 }).unwrap();
        assert!(after.materialize(u64::MAX).iter().all(|j| seq.entries[*j as usize - 1].n == 80));
    }
}
