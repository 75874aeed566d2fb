//! Ostrowski numeration `β = Σ d_k θ_k` with respect to a fixed α.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cf::{Budget, CfDigits, ConvergentTable};
use crate::density::IndexSet;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};

/// Value placed on each support index of a rule-based stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DigitValue {
    Const { value: u64 },
    /// `d_k = ⌊a_{k+1} / 2⌋`.
    HalfNext,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DigitPattern {
    /// `d_0, d_1, ..., d_{len-1}`; every later digit is zero.
    Finite { digits: Vec<u64> },
    /// `d_k` given by `value` on `support`, zero elsewhere.
    OnSet { support: IndexSet, value: DigitValue },
}

/// Digit stream `(d_k)` together with the α it is written against.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OstrowskiDigits {
    alpha: CfDigits,
    pattern: DigitPattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// `0 <= d_0 < a_1`, `0 <= d_k <= a_{k+1}`.
    Range,
    /// `d_k = a_{k+1}` forces `d_{k-1} = 0`.
    Carry,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::Range => "range-rule",
            Rule::Carry => "carry-rule",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Validation {
    Ok,
    Violation { index: usize, rule: Rule },
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        matches!(self, Validation::Ok)
    }

    pub fn into_result(self) -> Result<()> {
        match self {
            Validation::Ok => Ok(()),
            Validation::Violation { index, rule } => Err(Error::InvalidOstrowski {
                index,
                rule: rule.id().to_string(),
            }),
        }
    }
}

#[derive(Serialize)]
struct DigitsDoc<'a> {
    context: String,
    alpha: &'a CfDigits,
    #[serde(flatten)]
    pattern: &'a DigitPattern,
}

impl OstrowskiDigits {
    pub fn new(alpha: CfDigits, pattern: DigitPattern) -> Self {
        OstrowskiDigits { alpha, pattern }
    }

    pub fn finite(alpha: &CfDigits, digits: Vec<u64>) -> Self {
        Self::new(alpha.clone(), DigitPattern::Finite { digits })
    }

    pub fn zero(alpha: &CfDigits) -> Self {
        Self::finite(alpha, vec![])
    }

    pub fn on_set(alpha: &CfDigits, support: IndexSet, value: DigitValue) -> Self {
        Self::new(alpha.clone(), DigitPattern::OnSet { support, value })
    }

    /// `d_k = 1` exactly on `support`.
    pub fn ones_on(alpha: &CfDigits, support: IndexSet) -> Self {
        Self::on_set(alpha, support, DigitValue::Const { value: 1 })
    }

    pub fn alpha(&self) -> &CfDigits {
        &self.alpha
    }

    pub fn pattern(&self) -> &DigitPattern {
        &self.pattern
    }

    pub fn digit(&self, k: usize) -> Result<u64> {
        match &self.pattern {
            DigitPattern::Finite { digits } => Ok(digits.get(k).copied().unwrap_or(0)),
            DigitPattern::OnSet { support, value } => {
                if !support.contains(k as u64) {
                    return Ok(0);
                }
                match value {
                    DigitValue::Const { value } => Ok(*value),
                    DigitValue::HalfNext => Ok(self.alpha.digit(k + 1)? / 2),
                }
            }
        }
    }

    /// Nonzero digits `(k, d_k)` with `lo <= k <= hi`.
    pub fn nonzero_in(&self, lo: usize, hi: usize) -> Result<Vec<(usize, u64)>> {
        let mut out = Vec::new();
        match &self.pattern {
            DigitPattern::Finite { digits } => {
                for k in lo..=hi.min(digits.len().saturating_sub(1)) {
                    if digits.len() > k && digits[k] != 0 {
                        out.push((k, digits[k]));
                    }
                }
            }
            DigitPattern::OnSet { support, .. } => {
                for k in support.elements_in(lo as u64, hi as u64) {
                    let d = self.digit(k as usize)?;
                    if d != 0 {
                        out.push((k as usize, d));
                    }
                }
            }
        }
        Ok(out)
    }

    /// One past the last possibly nonzero digit, when the stream is known to
    /// vanish from some point on.
    pub fn finite_extent(&self) -> Option<usize> {
        match &self.pattern {
            DigitPattern::Finite { digits } => Some(digits.iter().rposition(|&d| d != 0).map_or(0, |k| k + 1)),
            DigitPattern::OnSet { support, .. } => support.finite_max().map(|m| m.map_or(0, |k| k as usize + 1)),
        }
    }

    /// JSON document: α context digest, α descriptor and the digit pattern.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DigitsDoc {
            context: self.alpha.digest(),
            alpha: &self.alpha,
            pattern: &self.pattern,
        })
        .expect("digit stream serializes")
    }

    /// Reads [`to_json`](Self::to_json) output or a witness bundle, whose
    /// pattern sits under `beta`.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            context: Option<String>,
            alpha: CfDigits,
            beta: Option<DigitPattern>,
            #[serde(flatten)]
            rest: serde_json::Value,
        }
        let doc: Doc = serde_json::from_str(s)?;
        if let Some(c) = &doc.context {
            if c != &doc.alpha.digest() {
                return Err(Error::Parse(format!(
                    "context digest {c} does not match alpha {}",
                    doc.alpha.digest()
                )));
            }
        }
        let pattern = match doc.beta {
            Some(p) => p,
            None => serde_json::from_value(doc.rest)?,
        };
        Ok(Self::new(doc.alpha, pattern))
    }
}

/// `supp(β) ∩ [0, depth]`.
pub fn support(d: &OstrowskiDigits, depth: usize) -> Result<Vec<usize>> {
    Ok(d.nonzero_in(0, depth)?.into_iter().map(|(k, _)| k).collect())
}

/// First violated digit constraint among `d_0, ..., d_depth`.
pub fn validate(d: &OstrowskiDigits, depth: usize) -> Result<Validation> {
    let alpha = d.alpha();
    for (k, dk) in d.nonzero_in(0, depth)? {
        let cap = alpha.digit(k + 1)?;
        if k == 0 {
            if dk >= cap {
                return Ok(Validation::Violation { index: 0, rule: Rule::Range });
            }
            continue;
        }
        if dk > cap {
            return Ok(Validation::Violation { index: k, rule: Rule::Range });
        }
        if dk == cap && d.digit(k - 1)? != 0 {
            return Ok(Validation::Violation { index: k, rule: Rule::Carry });
        }
    }
    Ok(Validation::Ok)
}

/// Number of `i` with `2i <= depth` and `d_{2i} != a_{2i+1}`. Positive
/// growth of this count is the finite trace of the condition that rules
/// out the degenerate second expansion.
pub fn alternation_count(d: &OstrowskiDigits, depth: usize) -> Result<usize> {
    let mut c = 0;
    for i in 0..=depth / 2 {
        if d.digit(2 * i)? != d.alpha().digit(2 * i + 1)? {
            c += 1;
        }
    }
    Ok(c)
}

/// Enclosure of `β`: the exact truncation `Σ_{k<=K} d_kθ_k = Qα - P` over an
/// enclosure of α, widened by `|θ_K| + |θ_{K+1}| < 1/q_{K+1} + 1/q_{K+2}`
/// unless every later digit is known to vanish.
pub fn decode(d: &OstrowskiDigits, k_trunc: usize, target_width: &BigRational) -> Result<Enclosure> {
    decode_with(&mut ConvergentTable::new(d.alpha().clone()), d, k_trunc, target_width, &Budget::default())
}

pub fn decode_with(
    table: &mut ConvergentTable,
    d: &OstrowskiDigits,
    k_trunc: usize,
    target_width: &BigRational,
    budget: &Budget,
) -> Result<Enclosure> {
    if !target_width.is_positive() {
        return Err(Error::Precondition("target width must be positive".into()));
    }
    table.extend_to(k_trunc + 2)?;
    let (mut big_q, mut big_p) = (BigInt::zero(), BigInt::zero());
    for (k, dk) in d.nonzero_in(0, k_trunc)? {
        big_q += BigInt::from(dk) * table.q(k as isize);
        big_p += BigInt::from(dk) * table.p(k as isize);
    }
    let tail = match d.finite_extent() {
        Some(e) if e <= k_trunc + 1 => BigRational::zero(),
        _ => {
            BigRational::new(BigInt::one(), table.q(k_trunc as isize + 1).clone())
                + BigRational::new(BigInt::one(), table.q(k_trunc as isize + 2).clone())
        }
    };
    let room = target_width - &tail * BigRational::from_integer(2.into());
    if !room.is_positive() && !(tail.is_zero() && big_q.is_zero()) {
        return Err(Error::BudgetExceeded {
            what: "decoding (tail bound exceeds the target width)",
            depth: k_trunc,
        });
    }
    let minus_p = BigRational::from_integer(-big_p);
    let body = if big_q.is_zero() {
        Enclosure::point(minus_p)
    } else {
        let depth = table.depth_for_width(&big_q, &room, k_trunc + 1, budget)?;
        table.linear_at(&big_q, &minus_p, depth)?
    };
    Ok(body.widen(&tail))
}

/// Exact sign of `c·α + e`, refining the enclosure of α as needed.
pub(crate) fn sign_linear(
    table: &mut ConvergentTable,
    c: &BigInt,
    e: &BigRational,
    budget: &Budget,
) -> Result<Ordering> {
    if c.is_zero() {
        return Ok(e.cmp(&BigRational::zero()));
    }
    let mut depth = (c.bits() as usize / 2).max(2);
    let limit = depth + budget.max_alpha_depth;
    loop {
        if let Some(s) = table.linear_at(c, e, depth)?.sign() {
            if s != Ordering::Equal {
                return Ok(s);
            }
        }
        depth += depth / 2 + 1;
        if depth > limit {
            return Err(Error::BudgetExceeded {
                what: "deciding the sign of a linear form in alpha",
                depth,
            });
        }
    }
}

/// `c·α + e`.
#[derive(Clone, Debug)]
struct Linear {
    c: BigInt,
    e: BigRational,
}

impl Linear {
    fn theta(table: &ConvergentTable, k: isize) -> Self {
        Linear {
            c: table.q(k).clone(),
            e: BigRational::from_integer(-table.p(k).clone()),
        }
    }

    fn sub(&self, o: &Linear) -> Linear {
        Linear {
            c: &self.c - &o.c,
            e: &self.e - &o.e,
        }
    }

    fn add(&self, o: &Linear) -> Linear {
        Linear {
            c: &self.c + &o.c,
            e: &self.e + &o.e,
        }
    }

    fn scaled(&self, d: u64) -> Linear {
        Linear {
            c: &self.c * d,
            e: &self.e * BigRational::from_integer(d.into()),
        }
    }

    fn neg(&self) -> Linear {
        Linear {
            c: -&self.c,
            e: -&self.e,
        }
    }
}

/// `x` lies in the closed interval spanned by `a` and `b`.
fn between(table: &mut ConvergentTable, x: &Linear, a: &Linear, b: &Linear, budget: &Budget) -> Result<bool> {
    let xa = x.sub(a);
    let xb = x.sub(b);
    let sa = sign_linear(table, &xa.c, &xa.e, budget)?;
    let sb = sign_linear(table, &xb.c, &xb.e, budget)?;
    Ok(sa == Ordering::Equal || sb == Ordering::Equal || sa != sb)
}

/// Range of `Σ_{i>=j} d_iθ_i` over admissible tails: the interval spanned by
/// `-θ_j` and `-θ_{j-1}`, shrunk to `-θ_{j-1} - θ_j` when `d_{j-1} != 0`.
fn tail_range(table: &ConvergentTable, j: usize, prev_nonzero: bool) -> (Linear, Linear) {
    let tj = Linear::theta(table, j as isize);
    let tp = Linear::theta(table, j as isize - 1);
    let a = tj.neg();
    let b = if prev_nonzero { tp.add(&tj).neg() } else { tp.neg() };
    (a, b)
}

/// First `K` digits of the representation of a rational `β` in
/// `(-α, 1 - α)`, extracted greedily from `k = 0` upward.
pub fn encode(alpha: &CfDigits, beta: &BigRational, k_count: usize) -> Result<OstrowskiDigits> {
    encode_with(&mut ConvergentTable::new(alpha.clone()), beta, k_count, &Budget::default())
}

pub fn encode_with(
    table: &mut ConvergentTable,
    beta: &BigRational,
    k_count: usize,
    budget: &Budget,
) -> Result<OstrowskiDigits> {
    table.extend_to(k_count + 1)?;
    let one = BigRational::one();
    let lower = sign_linear(table, &BigInt::one(), beta, budget)?;
    let upper = sign_linear(table, &BigInt::one(), &(beta - &one), budget)?;
    if lower != Ordering::Greater || upper != Ordering::Less {
        return Err(Error::OutOfRange(format!("beta = {beta} is not in (-alpha, 1 - alpha)")));
    }
    let mut rem = Linear {
        c: BigInt::zero(),
        e: beta.clone(),
    };
    let mut digits = Vec::with_capacity(k_count);
    let mut prev = 0u64;
    for k in 0..k_count {
        let a_next = table.digit(k + 1)?;
        let max = if k == 0 || prev != 0 { a_next - 1 } else { a_next };
        let th = Linear::theta(table, k as isize);
        let mut chosen = None;
        for d in 0..=max {
            let cand = rem.sub(&th.scaled(d));
            let (a, b) = tail_range(table, k + 1, d != 0);
            if between(table, &cand, &a, &b, budget)? {
                chosen = Some((d, cand));
                break;
            }
        }
        let (d, cand) = chosen.ok_or_else(|| {
            Error::OutOfRange(format!("no admissible digit at k = {k} for beta = {beta}"))
        })?;
        digits.push(d);
        rem = cand;
        prev = d;
    }
    Ok(OstrowskiDigits::finite(table.digits(), digits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enclosure::{parse_rational, rational, to_f64};

    fn w(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn validate_examples() {
        let g = CfDigits::golden();
        let d = OstrowskiDigits::finite(&g, vec![0, 2]);
        assert_eq!(validate(&d, 5).unwrap(), Validation::Violation { index: 1, rule: Rule::Range });
        assert!(validate(&OstrowskiDigits::zero(&g), 50).unwrap().is_ok());
        let s = CfDigits::silver();
        let d = OstrowskiDigits::finite(&s, vec![1, 2]);
        assert_eq!(validate(&d, 5).unwrap(), Validation::Violation { index: 1, rule: Rule::Carry });
        let d0 = OstrowskiDigits::finite(&g, vec![1]);
        assert_eq!(validate(&d0, 5).unwrap(), Validation::Violation { index: 0, rule: Rule::Range });
    }

    #[test]
    fn decode_examples() {
        let g = CfDigits::golden();
        let e = decode(&OstrowskiDigits::finite(&g, vec![0, 0, 1]), 4, &w("1e-12")).unwrap();
        assert!((to_f64(&e.midpoint()) - 0.236068).abs() < 1e-6);
        assert!(e.width() <= w("1e-12"));
        let z = decode(&OstrowskiDigits::zero(&g), 10, &w("1e-30")).unwrap();
        assert_eq!(z, Enclosure::zero());
        let e = decode(&OstrowskiDigits::finite(&g, vec![0, 1, 0, 0, 1]), 6, &w("1e-12")).unwrap();
        assert!((to_f64(&e.midpoint()) + 0.291796).abs() < 1e-6);
    }

    #[test]
    fn decode_infinite_tail() {
        let g = CfDigits::golden();
        let d = OstrowskiDigits::ones_on(&g, IndexSet::Squares);
        assert!(decode(&d, 10, &w("1e-6")).is_err());
        let e = decode(&d, 80, &w("1e-15")).unwrap();
        let e2 = decode(&d, 120, &w("1e-20")).unwrap();
        assert!(e.contains_enclosure(&e2));
    }

    #[test]
    fn encode_zero_and_quarter() {
        let g = CfDigits::golden();
        let z = encode(&g, &BigRational::zero(), 10).unwrap();
        assert!(support(&z, 10).unwrap().is_empty());
        let q = encode(&g, &rational(1, 4), 12).unwrap();
        let DigitPattern::Finite { digits } = q.pattern() else { panic!() };
        assert_eq!(digits, &vec![0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0]);
        assert!(encode(&g, &rational(1, 2), 5).is_err());
        assert!(encode(&g, &rational(-7, 10), 5).is_err());
    }

    #[test]
    fn encode_decode_fixpoint_silver() {
        let s = CfDigits::silver();
        for digits in [vec![1, 0, 2, 0, 1], vec![0, 2, 0, 0, 1, 1], vec![1, 1, 1, 0, 2]] {
            let d = OstrowskiDigits::finite(&s, digits.clone());
            assert!(validate(&d, 10).unwrap().is_ok());
            let e = decode(&d, digits.len(), &w("1e-40")).unwrap();
            let back = encode(&s, &e.midpoint(), digits.len()).unwrap();
            assert_eq!(back.pattern(), &DigitPattern::Finite { digits });
        }
    }

    #[test]
    fn json_roundtrip() {
        let d = OstrowskiDigits::ones_on(&CfDigits::golden(), IndexSet::Squares);
        let s = d.to_json();
        assert!(s.contains("\"context\""));
        assert_eq!(OstrowskiDigits::from_json(&s).unwrap(), d);
        let tampered = s.replace(&CfDigits::golden().digest(), "0000000000000000");
        assert!(OstrowskiDigits::from_json(&tampered).is_err());
    }

    #[test]
    fn support_and_extent() {
        let g = CfDigits::golden();
        let d = OstrowskiDigits::finite(&g, vec![0, 1, 0, 1, 0, 0]);
        assert_eq!(support(&d, 10).unwrap(), vec![1, 3]);
        assert_eq!(d.finite_extent(), Some(4));
        assert_eq!(OstrowskiDigits::ones_on(&g, IndexSet::Squares).finite_extent(), None);
        assert!(alternation_count(&OstrowskiDigits::zero(&g), 20).unwrap() > 0);
    }
}
