use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Closed-form digit rules for unbounded expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DigitRule {
    /// `a_{k²} = 4k²`, `a_n = 1` elsewhere.
    SquareSpikes,
    /// `a_n = n`.
    Identity,
    /// Partial quotients of `e - 2 = [0; 1, 2, 1, 1, 4, 1, 1, 6, ...]`.
    Euler,
}

impl DigitRule {
    pub fn name(self) -> &'static str {
        match self {
            DigitRule::SquareSpikes => "prop34",
            DigitRule::Identity => "identity",
            DigitRule::Euler => "euler",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "prop34" | "square-spikes" => Some(DigitRule::SquareSpikes),
            "identity" => Some(DigitRule::Identity),
            "euler" | "e" => Some(DigitRule::Euler),
            _ => None,
        }
    }

    fn digit(self, k: usize) -> u64 {
        let k64 = k as u64;
        match self {
            DigitRule::SquareSpikes => {
                let r = k64.isqrt();
                if r * r == k64 {
                    4 * k64
                } else {
                    1
                }
            }
            DigitRule::Identity => k64,
            DigitRule::Euler => {
                if k % 3 == 2 {
                    2 * (k64 + 1) / 3
                } else {
                    1
                }
            }
        }
    }
}

/// Where the partial quotients `a_1, a_2, ...` come from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DigitSource {
    /// A finite prefix; queries past its end fail.
    Explicit { digits: Vec<u64> },
    /// `prefix` followed by `period` repeated forever.
    Periodic { prefix: Vec<u64>, period: Vec<u64> },
    Rule { rule: DigitRule },
    /// Digits uniform in `1..=max`, reproducible from `seed`.
    RandomBounded { max: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Boundedness {
    Bounded { max: u64 },
    Unbounded,
    Unknown,
}

/// Partial-quotient stream of an irrational `α = [0; a_1, a_2, ...]` in
/// `(0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CfDigits {
    name: String,
    source: DigitSource,
}

impl fmt::Debug for CfDigits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CfDigits({})", self.name)
    }
}

impl CfDigits {
    pub fn new(name: impl Into<String>, source: DigitSource) -> Result<Self> {
        match &source {
            DigitSource::Explicit { digits } => check_digits(digits, 1)?,
            DigitSource::Periodic { prefix, period } => {
                if period.is_empty() {
                    return Err(Error::Precondition(
                        "periodic expansion needs a non-empty period".into(),
                    ));
                }
                check_digits(prefix, 1)?;
                check_digits(period, prefix.len() + 1)?;
            }
            DigitSource::RandomBounded { max, .. } => {
                if *max == 0 {
                    return Err(Error::Precondition("digit bound must be >= 1".into()));
                }
            }
            DigitSource::Rule { .. } => {}
        }
        Ok(CfDigits {
            name: name.into(),
            source,
        })
    }

    /// `[0; 1, 1, 1, ...]`, the reciprocal of the golden ratio.
    pub fn golden() -> Self {
        Self::periodic("golden", vec![], vec![1])
    }

    /// `[0; 2, 2, 2, ...] = √2 - 1`.
    pub fn silver() -> Self {
        Self::periodic("silver", vec![], vec![2])
    }

    pub fn periodic(name: &str, prefix: Vec<u64>, period: Vec<u64>) -> Self {
        Self::new(name, DigitSource::Periodic { prefix, period }).expect("valid periodic digits")
    }

    pub fn rule(rule: DigitRule) -> Self {
        CfDigits {
            name: rule.name().to_string(),
            source: DigitSource::Rule { rule },
        }
    }

    pub fn explicit(name: &str, digits: Vec<u64>) -> Result<Self> {
        Self::new(name, DigitSource::Explicit { digits })
    }

    pub fn random_bounded(max: u64, seed: u64) -> Result<Self> {
        Self::new(
            format!("random-bounded:{max},{seed}"),
            DigitSource::RandomBounded { max, seed },
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &DigitSource {
        &self.source
    }

    pub fn boundedness(&self) -> Boundedness {
        match &self.source {
            DigitSource::Explicit { .. } => Boundedness::Unknown,
            DigitSource::Periodic { prefix, period } => Boundedness::Bounded {
                max: prefix.iter().chain(period).copied().max().unwrap_or(1),
            },
            DigitSource::Rule { .. } => Boundedness::Unbounded,
            DigitSource::RandomBounded { max, .. } => Boundedness::Bounded { max: *max },
        }
    }

    /// Partial quotient `a_k`; `a_0 = 0` for every stream.
    pub fn digit(&self, k: usize) -> Result<u64> {
        if k == 0 {
            return Ok(0);
        }
        match &self.source {
            DigitSource::Explicit { digits } => digits
                .get(k - 1)
                .copied()
                .ok_or(Error::DigitsExhausted { index: k }),
            DigitSource::Periodic { prefix, period } => {
                if k <= prefix.len() {
                    Ok(prefix[k - 1])
                } else {
                    Ok(period[(k - 1 - prefix.len()) % period.len()])
                }
            }
            DigitSource::Rule { rule } => Ok(rule.digit(k)),
            DigitSource::RandomBounded { max, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos(16 * k as u128);
                Ok(rng.random_range(1..=*max))
            }
        }
    }

    /// Available prefix length, `None` for infinite streams.
    pub fn known_len(&self) -> Option<usize> {
        match &self.source {
            DigitSource::Explicit { digits } => Some(digits.len()),
            _ => None,
        }
    }

    /// Short stable hash of the stream descriptor, embedded in serialized
    /// documents that depend on this α.
    pub fn digest(&self) -> String {
        let doc = serde_json::to_vec(&self.source).expect("descriptor serializes");
        hex::encode(&Sha256::digest(&doc)[..8])
    }
}

fn check_digits(digits: &[u64], first_index: usize) -> Result<()> {
    for (i, &d) in digits.iter().enumerate() {
        if d == 0 {
            return Err(Error::InvalidDigit {
                index: first_index + i,
                value: d,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_spikes_rule() {
        let a = CfDigits::rule(DigitRule::SquareSpikes);
        assert_eq!(a.digit(1).unwrap(), 4);
        assert_eq!(a.digit(4).unwrap(), 16);
        assert_eq!(a.digit(9).unwrap(), 36);
        assert_eq!(a.digit(2).unwrap(), 1);
        assert_eq!(a.digit(3).unwrap(), 1);
        assert_eq!(a.digit(25).unwrap(), 100);
        assert_eq!(a.boundedness(), Boundedness::Unbounded);
    }

    #[test]
    fn euler_rule() {
        let e = CfDigits::rule(DigitRule::Euler);
        let got: Vec<u64> = (1..=9).map(|k| e.digit(k).unwrap()).collect();
        assert_eq!(got, vec![1, 2, 1, 1, 4, 1, 1, 6, 1]);
    }

    #[test]
    fn explicit_stream_exhausts() {
        let a = CfDigits::explicit("x", vec![3, 1, 4]).unwrap();
        assert_eq!(a.digit(3).unwrap(), 4);
        assert_eq!(a.digit(4), Err(Error::DigitsExhausted { index: 4 }));
        assert!(CfDigits::explicit("bad", vec![1, 0]).is_err());
    }

    #[test]
    fn random_stream_is_deterministic_and_bounded() {
        let a = CfDigits::random_bounded(5, 42).unwrap();
        let b = CfDigits::random_bounded(5, 42).unwrap();
        let c = CfDigits::random_bounded(5, 43).unwrap();
        let da: Vec<u64> = (1..200).map(|k| a.digit(k).unwrap()).collect();
        let db: Vec<u64> = (1..200).rev().map(|k| b.digit(k).unwrap()).collect();
        let dc: Vec<u64> = (1..200).map(|k| c.digit(k).unwrap()).collect();
        assert!(da.iter().all(|&d| (1..=5).contains(&d)));
        assert_eq!(da, db.into_iter().rev().collect::<Vec<_>>());
        assert_ne!(da, dc);
        assert_eq!(a.boundedness(), Boundedness::Bounded { max: 5 });
    }

    #[test]
    fn periodic_with_prefix() {
        let a = CfDigits::periodic("p", vec![7], vec![1, 2]);
        let got: Vec<u64> = (0..=5).map(|k| a.digit(k).unwrap()).collect();
        assert_eq!(got, vec![0, 7, 1, 2, 1, 2]);
        assert_eq!(a.boundedness(), Boundedness::Bounded { max: 7 });
    }

    #[test]
    fn digest_depends_on_source_only() {
        assert_eq!(CfDigits::golden().digest(), CfDigits::golden().digest());
        assert_ne!(CfDigits::golden().digest(), CfDigits::silver().digest());
    }
}
