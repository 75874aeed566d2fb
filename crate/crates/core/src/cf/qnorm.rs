//! `‖q_nβ‖` from the Ostrowski digits of β.
//!
//! Write `q_nβ = Σ_{k<n} d_k q_nθ_k + Σ_{k>=n} d_k q_nθ_k`. Each head term
//! differs from `d_k q_kθ_n` by an integer, so the head reduces to `H_nθ_n`
//! with `H_n = Σ_{k<n} d_k q_k`. For `k >= n` put `θ_k = u_kθ_{n-1} +
//! v_kθ_n`; then `θ_k/θ_n = v_k - u_kζ` with `ζ = ζ_{n+1}` the complete
//! quotient, and `θ_n = (-1)^n/(q_nζ + q_{n-1})`. Summing the tail up to `K`
//! gives the representative
//!
//! ```text
//! W(ζ) = (-1)^n (H_n + q_nV - q_nUζ) / (q_nζ + q_{n-1}),
//! ```
//!
//! `U = Σ d_k u_k`, `V = Σ d_k v_k`, which is a Möbius map in `ζ` and so
//! monotone on an enclosure of `ζ`. The remainder past `K` is at most
//! `q_n|θ_n| (|ρ_K| + |ρ_{K+1}|) < (1/u_{K+1} + 1/u_{K+2}) / ζ`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::theta::local_brackets;
use super::{Budget, CfDigits, ConvergentTable};
use crate::enclosure::{self, Enclosure};
use crate::error::{Error, Result};
use crate::ostrowski::OstrowskiDigits;

const START_SPAN: usize = 24;
const START_LOCAL: usize = 24;

/// Precomputed convergents, head sums and support for evaluating
/// `‖q_nβ‖` at many `n <= n_max`.
#[derive(Debug, Clone)]
pub struct NormEngine {
    table: ConvergentTable,
    head: Vec<BigInt>,
    support: Vec<(usize, u64)>,
    extent: Option<usize>,
    horizon: usize,
    budget: Budget,
}

impl NormEngine {
    pub fn new(beta: &OstrowskiDigits, n_max: usize, budget: Budget) -> Result<Self> {
        let mut table = ConvergentTable::new(beta.alpha().clone());
        table.extend_to(n_max + 1)?;
        let extent = beta.finite_extent();
        let mut horizon = n_max + budget.max_span + 2;
        if let Some(e) = extent {
            horizon = horizon.min(e.max(n_max + 1));
        }
        let support = beta.nonzero_in(0, horizon)?;
        let mut head = Vec::with_capacity(n_max + 2);
        head.push(BigInt::zero());
        let mut acc = BigInt::zero();
        let mut it = support.iter().peekable();
        for n in 0..=n_max {
            while let Some(&&(k, d)) = it.peek() {
                if k != n {
                    break;
                }
                acc += BigInt::from(d) * table.q(k as isize);
                it.next();
            }
            head.push(acc.clone());
        }
        Ok(NormEngine {
            table,
            head,
            support,
            extent,
            horizon,
            budget,
        })
    }

    pub fn alpha(&self) -> &CfDigits {
        self.table.digits()
    }

    pub fn table(&self) -> &ConvergentTable {
        &self.table
    }

    pub fn n_max(&self) -> usize {
        self.head.len() - 2
    }

    /// `H_n = Σ_{k<n} d_k q_k`.
    pub fn head(&self, n: usize) -> &BigInt {
        &self.head[n]
    }

    fn support_in(&self, lo: usize, hi: usize) -> &[(usize, u64)] {
        let a = self.support.partition_point(|&(k, _)| k < lo);
        let b = self.support.partition_point(|&(k, _)| k <= hi);
        &self.support[a..b]
    }

    /// Enclosure of the representative `W ≡ q_nβ (mod 1)` obtained by
    /// discarding the integers `d_k (q_n p_k - q_k p_n)` of the head.
    pub fn lift(&self, n: usize, target_width: &BigRational) -> Result<Enclosure> {
        if n == 0 || n > self.n_max() {
            return Err(Error::Precondition(format!("index n = {n} outside 1..={}", self.n_max())));
        }
        if !target_width.is_positive() {
            return Err(Error::Precondition("target width must be positive".into()));
        }
        let bits = bits_for(target_width);
        let qn = self.table.q(n as isize).clone();
        let qm = self.table.q(n as isize - 1).clone();
        let h = &self.head[n];
        let mut span = START_SPAN;
        let mut local = START_LOCAL;
        loop {
            let k_end = match self.extent {
                Some(e) if e <= n + span => e.max(n),
                _ => n + span,
            };
            if k_end > self.horizon {
                return Err(Error::BudgetExceeded {
                    what: "summing the digit tail",
                    depth: span,
                });
            }
            let tail_known_zero = self.extent.is_some_and(|e| e <= k_end + 1);
            // u_k, v_k for k = n-1 ..= k_end + 2
            let (mut u0, mut v0) = (BigInt::one(), BigInt::zero());
            let (mut u1, mut v1) = (BigInt::zero(), BigInt::one());
            let (mut big_u, mut big_v) = (BigInt::zero(), BigInt::zero());
            let sup = self.support_in(n, k_end);
            let mut si = 0;
            let mut u_tail = (BigInt::zero(), BigInt::zero());
            for k in n..=k_end + 2 {
                if k > n {
                    let a = BigInt::from(self.table.digit(k)?);
                    let nu = &a * &u1 + &u0;
                    let nv = &a * &v1 + &v0;
                    u0 = std::mem::replace(&mut u1, nu);
                    v0 = std::mem::replace(&mut v1, nv);
                }
                if si < sup.len() && sup[si].0 == k {
                    let d = BigInt::from(sup[si].1);
                    big_u += &d * &u1;
                    big_v += &d * &v1;
                    si += 1;
                }
                if k == k_end + 1 {
                    u_tail.0 = u1.clone();
                } else if k == k_end + 2 {
                    u_tail.1 = u1.clone();
                }
            }
            let ((p0, q0), (p1, q1)) = local_brackets(&self.table, n + 1, local)?;
            let z_lo = BigRational::new(p0.clone(), q0.clone()).min(BigRational::new(p1.clone(), q1.clone()));
            let num_c = h + &qn * &big_v;
            let num_z = &qn * &big_u;
            let neg = n % 2 == 1;
            // W(P/Q) = ±(num_c Q - num_z P) / (q_n P + q_{n-1} Q), rounded
            // outward to a 2^-bits grid without reducing big fractions.
            let grid = |zp: &BigInt, zq: &BigInt| -> (BigInt, BigInt) {
                let mut num = &num_c * zq - &num_z * zp;
                if neg {
                    num = -num;
                }
                let den = &qn * zp + &qm * zq;
                let (f, r) = (num << bits).div_mod_floor(&den);
                let c = if r.is_zero() { f.clone() } else { &f + 1 };
                (f, c)
            };
            let (fa, ca) = grid(&p0, &q0);
            let (fb, cb) = grid(&p1, &q1);
            let scale = BigInt::one() << bits;
            let main = Enclosure::new(
                BigRational::new(fa.min(fb), scale.clone()),
                BigRational::new(ca.max(cb), scale),
            )?;
            let tail = if tail_known_zero {
                BigRational::zero()
            } else {
                (BigRational::new(BigInt::one(), u_tail.0.clone()) + BigRational::new(BigInt::one(), u_tail.1.clone()))
                    / &z_lo
            };
            let out = main.widen(&tail).round_outward(bits);
            if &out.width() <= target_width {
                return Ok(out);
            }
            let two = BigRational::from_integer(2.into());
            let quarter = target_width / BigRational::from_integer(4.into());
            let mut grew = false;
            if &tail * &two > quarter {
                span *= 2;
                grew = true;
                if span > self.budget.max_span {
                    return Err(Error::BudgetExceeded {
                        what: "summing the digit tail",
                        depth: span,
                    });
                }
            }
            if main.width() > quarter || !grew {
                local *= 2;
                if local > self.budget.max_local_depth {
                    return Err(Error::BudgetExceeded {
                        what: "refining the complete quotient",
                        depth: local,
                    });
                }
            }
        }
    }

    /// Enclosure of `‖q_nβ‖`.
    pub fn norm(&self, n: usize, target_width: &BigRational) -> Result<Enclosure> {
        Ok(self.lift(n, target_width)?.circle_norm())
    }

    /// Enclosure of `‖r q_nβ‖`, computed from the lift at width
    /// `target_width / r`.
    pub fn multiple_norm(&self, n: usize, r: u64, target_width: &BigRational) -> Result<Enclosure> {
        let w = target_width / BigRational::from_integer(r.into());
        Ok(self.lift(n, &w)?.scale(&BigInt::from(r)).circle_norm())
    }
}

fn bits_for(w: &BigRational) -> u32 {
    let inv = enclosure::to_f64(&w.recip());
    let b = if inv.is_finite() { inv.log2().ceil().max(0.0) as u32 } else { w.denom().bits() as u32 };
    b + 16
}

/// Enclosure of `‖q_nβ‖` with width at most `target_width`.
pub fn qn_beta_norm(
    alpha: &CfDigits,
    beta: &OstrowskiDigits,
    n: usize,
    target_width: &BigRational,
) -> Result<Enclosure> {
    if beta.alpha() != alpha {
        return Err(Error::Precondition("beta is written against a different alpha".into()));
    }
    NormEngine::new(beta, n, Budget::default())?.norm(n, target_width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::IndexSet;
    use crate::enclosure::{parse_rational, to_f64};
    use crate::ostrowski::{decode, OstrowskiDigits};

    fn w(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn golden_examples() {
        let g = CfDigits::golden();
        let b = OstrowskiDigits::finite(&g, vec![0, 0, 0, 1]);
        let e = qn_beta_norm(&g, &b, 3, &w("1e-12")).unwrap();
        let a = (5f64.sqrt() - 1.0) / 2.0;
        assert!((to_f64(&e.midpoint()) - 3.0 * a.powi(4)).abs() < 1e-10);
        assert!(e.width() <= w("1e-12"));
        let z = qn_beta_norm(&g, &OstrowskiDigits::zero(&g), 7, &w("1e-9")).unwrap();
        assert_eq!(z, Enclosure::zero());
        let mut d = vec![0; 11];
        d[10] = 1;
        let e = qn_beta_norm(&g, &OstrowskiDigits::finite(&g, d), 3, &w("1e-12")).unwrap();
        assert!(e.lo() >= &BigRational::zero());
        assert!(enclosure::to_f64(e.hi()) <= 3.0 * a.powi(11) + 1e-12);
        assert!(e.hi() <= &w("0.016"));
    }

    /// Compares against the direct route `q_n · decode(β)` on infinite
    /// streams.
    #[test]
    fn agrees_with_direct_product() {
        for alpha in [CfDigits::golden(), CfDigits::silver(), CfDigits::rule(crate::cf::DigitRule::Euler)] {
            let beta = OstrowskiDigits::ones_on(&alpha, IndexSet::Squares);
            let eng = NormEngine::new(&beta, 60, Budget::default()).unwrap();
            let mut t = ConvergentTable::with_depth(&alpha, 80).unwrap();
            let full = crate::ostrowski::decode_with(&mut t, &beta, 400, &w("1e-60"), &Budget::default()).unwrap();
            for n in 1..=60 {
                let qn = t.q(n as isize).clone();
                let direct = full.scale(&qn).circle_norm();
                let fast = eng.norm(n, &w("1e-20")).unwrap();
                assert!(fast.intersects(&direct), "{alpha:?} n={n} {fast:?} {direct:?}");
            }
            let _ = decode(&beta, 100, &w("1e-15")).unwrap();
        }
    }

    #[test]
    fn multiples() {
        let s = CfDigits::silver();
        let beta = OstrowskiDigits::ones_on(&s, IndexSet::Squares);
        let eng = NormEngine::new(&beta, 30, Budget::default()).unwrap();
        for n in 1..=30 {
            let l = eng.lift(n, &w("1e-25")).unwrap();
            for r in 1..=2u64 {
                let m = eng.multiple_norm(n, r, &w("1e-12")).unwrap();
                assert!(m.width() <= w("1e-12"));
                assert!(m.intersects(&l.scale(&BigInt::from(r)).circle_norm()));
            }
        }
    }

    #[test]
    fn bad_index() {
        let g = CfDigits::golden();
        let eng = NormEngine::new(&OstrowskiDigits::zero(&g), 5, Budget::default()).unwrap();
        assert!(eng.lift(0, &w("0.1")).is_err());
        assert!(eng.lift(6, &w("0.1")).is_err());
    }
}
