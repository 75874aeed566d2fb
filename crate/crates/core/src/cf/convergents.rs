use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::CfDigits;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub index: usize,
    #[serde(serialize_with = "crate::cf::ser_bigint")]
    pub p: BigInt,
    #[serde(serialize_with = "crate::cf::ser_bigint")]
    pub q: BigInt,
}

/// Convergents `p_n/q_n` of a digit stream, grown on demand.
///
/// Internally slot `n + 1` holds index `n`, so the seeds `p_{-1} = 1`,
/// `q_{-1} = 0` sit in slot 0.
#[derive(Debug, Clone)]
pub struct ConvergentTable {
    digits: CfDigits,
    a: Vec<u64>,
    p: Vec<BigInt>,
    q: Vec<BigInt>,
}

impl ConvergentTable {
    pub fn new(digits: CfDigits) -> Self {
        ConvergentTable {
            digits,
            a: vec![0],
            p: vec![BigInt::one(), BigInt::zero()],
            q: vec![BigInt::zero(), BigInt::one()],
        }
    }

    pub fn with_depth(digits: &CfDigits, n: usize) -> Result<Self> {
        let mut t = Self::new(digits.clone());
        t.extend_to(n)?;
        Ok(t)
    }

    pub fn digits(&self) -> &CfDigits {
        &self.digits
    }

    /// Largest `n` for which `p_n, q_n` are available.
    pub fn depth(&self) -> usize {
        self.q.len() - 2
    }

    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        while self.depth() < n {
            let k = self.depth() + 1;
            let a = self.digits.digit(k)?;
            let ab = BigInt::from(a);
            let p = &ab * &self.p[k] + &self.p[k - 1];
            let q = &ab * &self.q[k] + &self.q[k - 1];
            self.a.push(a);
            self.p.push(p);
            self.q.push(q);
        }
        Ok(())
    }

    /// `p_n` for `n >= -1`. Panics when `n` exceeds [`depth`](Self::depth).
    pub fn p(&self, n: isize) -> &BigInt {
        &self.p[(n + 1) as usize]
    }

    pub fn q(&self, n: isize) -> &BigInt {
        &self.q[(n + 1) as usize]
    }

    pub fn convergent(&self, n: usize) -> Convergent {
        Convergent {
            index: n,
            p: self.p[n + 1].clone(),
            q: self.q[n + 1].clone(),
        }
    }

    /// `a_k`, from the cache when the table already reaches it.
    pub fn digit(&self, k: usize) -> Result<u64> {
        match self.a.get(k) {
            Some(&a) => Ok(a),
            None => self.digits.digit(k),
        }
    }
}

/// The first `n + 1` convergents `p_0/q_0, ..., p_n/q_n`.
pub fn convergents(digits: &CfDigits, n: usize) -> Result<Vec<Convergent>> {
    let t = ConvergentTable::with_depth(digits, n)?;
    Ok((0..=n).map(|i| t.convergent(i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use num_integer::Integer;

    fn qs(d: &CfDigits, n: usize) -> Vec<i64> {
        convergents(d, n)
            .unwrap()
            .iter()
            .map(|c| i64::try_from(&c.q).unwrap())
            .collect()
    }

    #[test]
    fn golden_and_silver_denominators() {
        assert_eq!(qs(&CfDigits::golden(), 5), vec![1, 1, 2, 3, 5, 8]);
        assert_eq!(qs(&CfDigits::silver(), 3), vec![1, 2, 5, 12]);
    }

    #[test]
    fn zero_count_gives_seed() {
        let c = convergents(&CfDigits::silver(), 0).unwrap();
        assert_eq!(c, vec![Convergent { index: 0, p: BigInt::zero(), q: BigInt::one() }]);
    }

    #[test]
    fn exhausted_stream() {
        let d = CfDigits::explicit("x", vec![1, 2]).unwrap();
        assert_eq!(convergents(&d, 3), Err(Error::DigitsExhausted { index: 3 }));
    }

    #[test]
    fn determinant_and_coprimality() {
        for d in [
            CfDigits::golden(),
            CfDigits::silver(),
            CfDigits::rule(crate::cf::DigitRule::SquareSpikes),
            CfDigits::random_bounded(9, 3).unwrap(),
        ] {
            let t = ConvergentTable::with_depth(&d, 120).unwrap();
            for n in 0..=120isize {
                let det = t.p(n - 1) * t.q(n) - t.p(n) * t.q(n - 1);
                let expect = if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                assert_eq!(det, expect, "{d:?} n={n}");
                assert!(t.p(n).gcd(t.q(n)).is_one());
                if n >= 2 {
                    assert!(t.q(n) > t.q(n - 1));
                }
            }
        }
    }
}
