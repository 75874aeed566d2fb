use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{CfDigits, ConvergentTable};
use crate::enclosure::{self, Enclosure};
use crate::error::{Error, Result};

/// Refinement limits. Every adaptive loop in the crate gives up with
/// [`Error::BudgetExceeded`] once it would pass one of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Budget {
    /// Extra convergent depth (beyond the index being refined) for
    /// computations through an enclosure of α.
    pub max_alpha_depth: usize,
    /// Number of digit positions past `n` summed explicitly before the
    /// telescoped tail bound takes over.
    pub max_span: usize,
    /// Depth of the local continued fraction used for complete quotients.
    pub max_local_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_alpha_depth: 4096,
            max_span: 4096,
            max_local_depth: 4096,
        }
    }
}

impl Budget {
    pub fn uniform(depth: usize) -> Self {
        Budget {
            max_alpha_depth: depth,
            max_span: depth,
            max_local_depth: depth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of_index(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

/// Enclosure of `θ_n = q_n α - p_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaValue {
    pub index: usize,
    pub enclosure: Enclosure,
    pub sign: Sign,
}

impl ThetaValue {
    pub fn abs(&self) -> Enclosure {
        self.enclosure.abs()
    }
}

impl ConvergentTable {
    /// α lies between `p_d/q_d` and `p_{d+1}/q_{d+1}`.
    pub fn alpha_enclosure(&mut self, depth: usize) -> Result<Enclosure> {
        if depth == 0 {
            return Err(Error::Precondition("alpha enclosure depth must be >= 1".into()));
        }
        self.extend_to(depth + 1)?;
        let d = depth as isize;
        let a = BigRational::new(self.p(d).clone(), self.q(d).clone());
        let b = BigRational::new(self.p(d + 1).clone(), self.q(d + 1).clone());
        Ok(Enclosure::hull(a, b))
    }

    /// Evaluates `c·α + e` over the α enclosure at `depth`.
    pub fn linear_at(&mut self, c: &BigInt, e: &BigRational, depth: usize) -> Result<Enclosure> {
        if c.is_zero() {
            return Ok(Enclosure::point(e.clone()));
        }
        Ok(self.alpha_enclosure(depth)?.scale(c).shift(e))
    }

    /// Smallest depth `d >= from` whose α enclosure, scaled by `|c|`, is no
    /// wider than `width`.
    pub fn depth_for_width(
        &mut self,
        c: &BigInt,
        width: &BigRational,
        from: usize,
        budget: &Budget,
    ) -> Result<usize> {
        let c = c.abs();
        let mut d = from.max(1);
        let limit = from + budget.max_alpha_depth;
        loop {
            self.extend_to(d + 1)?;
            // |p_d/q_d - p_{d+1}/q_{d+1}| = 1/(q_d q_{d+1})
            let w = BigRational::new(c.clone(), self.q(d as isize) * self.q(d as isize + 1));
            if &w <= width {
                return Ok(d);
            }
            d += 1;
            if d > limit {
                return Err(Error::BudgetExceeded {
                    what: "refining the alpha enclosure",
                    depth: d,
                });
            }
        }
    }

    /// `θ_n` computed by multiplying `q_n` into a sufficiently deep α
    /// enclosure.
    pub fn theta(&mut self, n: usize, target_width: &BigRational, budget: &Budget) -> Result<ThetaValue> {
        if !target_width.is_positive() {
            return Err(Error::Precondition("target width must be positive".into()));
        }
        self.extend_to(n)?;
        let qn = self.q(n as isize).clone();
        let pn = -BigRational::from_integer(self.p(n as isize).clone());
        let d = self.depth_for_width(&qn, target_width, n + 1, budget)?;
        let enclosure = self.linear_at(&qn, &pn, d)?;
        debug_assert!(!enclosure.contains_zero());
        Ok(ThetaValue {
            index: n,
            enclosure,
            sign: Sign::of_index(n),
        })
    }

    /// The integer `q_k θ_m - q_m θ_k = q_m p_k - q_k p_m`.
    pub fn cross_theta_integer(&mut self, k: usize, m: usize) -> Result<BigInt> {
        self.extend_to(k.max(m))?;
        let (k, m) = (k as isize, m as isize);
        Ok(self.q(m) * self.p(k) - self.q(k) * self.p(m))
    }

    /// Complete quotient `ζ_j = [a_j; a_{j+1}, a_{j+2}, ...]` bracketed by the
    /// local convergents of depth `local_depth` and `local_depth + 1`.
    pub fn complete_quotient(&self, j: usize, local_depth: usize) -> Result<Enclosure> {
        let ((p0, q0), (p1, q1)) = local_brackets(self, j, local_depth)?;
        Ok(Enclosure::hull(BigRational::new(p0, q0), BigRational::new(p1, q1)))
    }

    /// `θ_n = (-1)^n / (q_n ζ_{n+1} + q_{n-1})`, evaluated from the digits
    /// after position `n` instead of an enclosure of α.
    pub fn theta_from_tail(&mut self, n: usize, local_depth: usize) -> Result<ThetaValue> {
        self.extend_to(n)?;
        let zeta = self.complete_quotient(n + 1, local_depth)?;
        let qn = BigRational::from_integer(self.q(n as isize).clone());
        let qm = BigRational::from_integer(self.q(n as isize - 1).clone());
        let denom = zeta.scale_rational(&qn).shift(&qm);
        let mut enclosure = denom.recip()?;
        if n % 2 == 1 {
            enclosure = -enclosure;
        }
        Ok(ThetaValue {
            index: n,
            enclosure,
            sign: Sign::of_index(n),
        })
    }
}

/// `((P_L, Q_L), (P_{L+1}, Q_{L+1}))` for the local continued fraction
/// `[a_j; a_{j+1}, ..., a_{j+L}]`.
#[allow(clippy::type_complexity)]
pub(crate) fn local_brackets(
    table: &ConvergentTable,
    j: usize,
    local_depth: usize,
) -> Result<((BigInt, BigInt), (BigInt, BigInt))> {
    let (mut pp, mut qp) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (BigInt::from(table.digit(j)?), BigInt::one());
    for i in 1..=local_depth + 1 {
        let a = BigInt::from(table.digit(j + i)?);
        let np = &a * &p + &pp;
        let nq = &a * &q + &qp;
        pp = std::mem::replace(&mut p, np);
        qp = std::mem::replace(&mut q, nq);
    }
    Ok(((pp, qp), (p, q)))
}

/// Enclosure of α from the convergents at `depth` and `depth + 1`.
pub fn alpha_enclosure(digits: &CfDigits, depth: usize) -> Result<Enclosure> {
    ConvergentTable::new(digits.clone()).alpha_enclosure(depth)
}

pub fn theta(digits: &CfDigits, n: usize, target_width: &BigRational) -> Result<ThetaValue> {
    ConvergentTable::new(digits.clone()).theta(n, target_width, &Budget::default())
}

pub fn cross_theta_integer(digits: &CfDigits, k: usize, m: usize) -> Result<BigInt> {
    ConvergentTable::new(digits.clone()).cross_theta_integer(k, m)
}

/// Measured contraction rate `λ̂ = max_k (|θ_{k+2}| / |θ_k|)^{1/2}` over
/// `0 <= k <= n_max`, reported as a rational upper bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaHat {
    /// Upper bound on `max_k |θ_{k+2}|/|θ_k|`.
    #[serde(with = "enclosure::serde_rational")]
    pub ratio_upper: BigRational,
    /// Rational `λ` with `λ² >= ratio_upper`.
    #[serde(with = "enclosure::serde_rational")]
    pub lambda_upper: BigRational,
    pub lambda_approx: f64,
    pub argmax: usize,
    pub horizon: usize,
}

/// Uses `|θ_{k+2}|/|θ_k| = 1/(ζ_{k+2} ζ_{k+3})`.
pub fn lambda_hat(table: &ConvergentTable, n_max: usize, local_depth: usize) -> Result<LambdaHat> {
    let mut best: Option<(BigRational, usize)> = None;
    for k in 0..=n_max {
        let z2 = table.complete_quotient(k + 2, local_depth)?;
        let z3 = table.complete_quotient(k + 3, local_depth)?;
        let ratio = (z2.lo() * z3.lo()).recip();
        if best.as_ref().is_none_or(|(b, _)| &ratio > b) {
            best = Some((ratio, k));
        }
    }
    let (ratio_upper, argmax) = best.expect("non-empty range");
    let lambda_upper = sqrt_upper(&ratio_upper);
    Ok(LambdaHat {
        lambda_approx: enclosure::to_f64(&lambda_upper),
        ratio_upper,
        lambda_upper,
        argmax,
        horizon: n_max,
    })
}

/// A dyadic rational `s` with `s² >= x`, accurate to about `2^-40`.
pub(crate) fn sqrt_upper(x: &BigRational) -> BigRational {
    let scale = BigInt::one() << 40u32;
    let guess = enclosure::to_f64(x).sqrt();
    let mut num = BigInt::from((guess * (1u64 << 40) as f64).ceil() as u64);
    loop {
        let s = BigRational::new(num.clone(), scale.clone());
        if &(&s * &s) >= x {
            return s;
        }
        num += 1;
    }
}
