//! Finite-scale evidence for statistical convergence of `‖a_nβ‖` to 0.
//!
//! Verdict policy (engineering thresholds, not asymptotic statements):
//!
//! * evidence-for-membership: at every ε the exceptional set (terms not
//!   certified below ε, unknown terms included) has density at most
//!   [`MEMBER_MAX_DENSITY`] at the last checkpoint, and its density is
//!   nonincreasing over the last three checkpoints;
//! * evidence-against: for some ε the terms certified `>= ε` have density at
//!   least [`AGAINST_MIN_DENSITY`] at each of the last three checkpoints;
//! * inconclusive otherwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::cf::{lambda_hat, Budget, ConvergentTable, LambdaHat, NormEngine};
use crate::density::{profile_of_sorted, DensityReport, IndexSet, IntervalFamily};
use crate::enclosure::{self, Enclosure};
use crate::error::{Error, Result};
use crate::ostrowski::OstrowskiDigits;
use crate::witness::merged_sequence;

pub const MEMBER_MAX_DENSITY: f64 = 0.05;
pub const AGAINST_MIN_DENSITY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    /// `a_n = q_n`.
    Qn,
    /// `a_n = x_n`, the merged sequence.
    Xn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormTerm {
    pub index: usize,
    pub n: usize,
    pub r: u64,
    /// Enclosure of `‖r q_nβ‖`; `None` when the budget ran out.
    pub norm: Option<Enclosure>,
    /// Enclosure of `r W_n`, the head-reduced representative of `r q_nβ`.
    pub lift: Option<Enclosure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSeries {
    pub alpha: String,
    pub alpha_digest: String,
    pub selector: Selector,
    #[serde(with = "enclosure::serde_rational")]
    pub target_width: BigRational,
    pub terms: Vec<NormTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Below,
    Above,
    Unknown,
}

impl NormTerm {
    pub fn classify(&self, eps: &BigRational) -> Class {
        match &self.norm {
            Some(e) if e.hi() < eps => Class::Below,
            Some(e) if e.lo() >= eps => Class::Above,
            _ => Class::Unknown,
        }
    }
}

impl NormSeries {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term at 1-based index `j`.
    pub fn term(&self, j: usize) -> Option<&NormTerm> {
        j.checked_sub(1).and_then(|i| self.terms.get(i))
    }

    /// CSV rows `(n, lo, hi, classification)` at `eps`; `n` is the series
    /// index.
    pub fn to_csv(&self, eps: &BigRational) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(["n", "lo", "hi", "classification"]).unwrap();
        for t in &self.terms {
            let (lo, hi) = match &t.norm {
                Some(e) => (enclosure::to_f64(e.lo()).to_string(), enclosure::to_f64(e.hi()).to_string()),
                None => (String::new(), String::new()),
            };
            let c = match t.classify(eps) {
                Class::Below => "below",
                Class::Above => "above",
                Class::Unknown => "unknown",
            };
            w.write_record([t.index.to_string(), lo, hi, c.to_string()]).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

#[cfg(feature = "parallel")]
fn map_indices<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indices<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

/// `‖a_nβ‖` for `n = 1..=count` with `a_n` chosen by `selector`. Indices
/// whose enclosure cannot be refined within `budget` are kept as unknown.
pub fn norm_series(
    beta: &OstrowskiDigits,
    selector: Selector,
    count: usize,
    target_width: &BigRational,
    budget: Budget,
) -> Result<NormSeries> {
    if count == 0 {
        return Err(Error::Precondition("N must be >= 1".into()));
    }
    if !target_width.is_positive() {
        return Err(Error::Precondition("target width must be positive".into()));
    }
    let alpha = beta.alpha();
    let terms = match selector {
        Selector::Qn => {
            let eng = NormEngine::new(beta, count, budget)?;
            map_indices(count, |i| {
                let n = i + 1;
                let lift = eng.lift(n, target_width).ok();
                NormTerm {
                    index: n,
                    n,
                    r: 1,
                    norm: lift.as_ref().map(Enclosure::circle_norm),
                    lift,
                }
            })
        }
        Selector::Xn => {
            let seq = merged_sequence(alpha, count)?;
            let top = seq.last_block();
            let eng = NormEngine::new(beta, top, budget)?;
            let a: Vec<u64> = (1..=top).map(|n| alpha.digit(n + 1)).collect::<Result<_>>()?;
            let lifts = map_indices(top, |i| {
                let w = target_width / BigRational::from_integer(a[i].into());
                eng.lift(i + 1, &w).ok()
            });
            seq.entries
                .iter()
                .map(|e| {
                    let lift = lifts[e.n - 1].as_ref().map(|l| l.scale(&BigInt::from(e.r)));
                    NormTerm {
                        index: e.j,
                        n: e.n,
                        r: e.r,
                        norm: lift.as_ref().map(Enclosure::circle_norm),
                        lift,
                    }
                })
                .collect()
        }
    };
    Ok(NormSeries {
        alpha: alpha.name().to_string(),
        alpha_digest: alpha.digest(),
        selector,
        target_width: target_width.clone(),
        terms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    EvidenceForMembership,
    EvidenceAgainst,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::EvidenceForMembership => "evidence-for-membership",
            Verdict::EvidenceAgainst => "evidence-against",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsRow {
    #[serde(with = "enclosure::serde_rational")]
    pub eps: BigRational,
    pub below: usize,
    pub above: usize,
    pub unknown: usize,
    /// Indices not certified below ε (excluded indices removed).
    pub exceptional: DensityReport,
    /// Indices certified `>= ε` (excluded indices removed).
    pub certified_above: DensityReport,
}

/// Parameters of the exceptional-set prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofParameters {
    pub lambda: LambdaHat,
    #[serde(with = "enclosure::serde_rational")]
    pub eps: BigRational,
    pub m: u64,
    pub i0: usize,
    pub i0_rule: I0Rule,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvidenceReport {
    pub n: usize,
    pub checkpoints: Vec<u64>,
    pub rows: Vec<EpsRow>,
    pub excluded: Option<usize>,
    pub verdict: Verdict,
    pub parameters: Vec<ProofParameters>,
}

impl EvidenceReport {
    pub fn row(&self, eps: &BigRational) -> Option<&EpsRow> {
        self.rows.iter().find(|r| &r.eps == eps)
    }
}

fn verdict_of(rows: &[EpsRow]) -> Verdict {
    let member = rows.iter().all(|r| {
        r.exceptional.last_ratio() <= MEMBER_MAX_DENSITY && r.exceptional.tail_nonincreasing
    });
    if member {
        return Verdict::EvidenceForMembership;
    }
    let against = rows.iter().any(|r| {
        let pts = &r.certified_above.checkpoints;
        pts[pts.len().saturating_sub(3)..]
            .iter()
            .all(|p| p.ratio >= AGAINST_MIN_DENSITY)
    });
    if against {
        Verdict::EvidenceAgainst
    } else {
        Verdict::Inconclusive
    }
}

/// Classification counts, exceptional-set profiles and verdict.
pub fn stat_report(series: &NormSeries, eps_grid: &[BigRational], checkpoints: &[u64]) -> Result<EvidenceReport> {
    report_inner(series, eps_grid, checkpoints, None)
}

/// As [`stat_report`] with the indices of `excluded` removed from the
/// exceptional sets (densities keep the full denominator).
pub fn stat_report_off(
    series: &NormSeries,
    excluded: &IndexSet,
    eps_grid: &[BigRational],
    checkpoints: &[u64],
) -> Result<EvidenceReport> {
    report_inner(series, eps_grid, checkpoints, Some(excluded))
}

fn report_inner(
    series: &NormSeries,
    eps_grid: &[BigRational],
    checkpoints: &[u64],
    excluded: Option<&IndexSet>,
) -> Result<EvidenceReport> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !e.is_positive() || e > &half) {
        return Err(Error::Precondition("every eps must lie in (0, 1/2]".into()));
    }
    let n = series.len();
    if checkpoints.is_empty() || checkpoints.iter().any(|&c| c as usize > n) {
        return Err(Error::Precondition(format!("checkpoints must be non-empty and <= N = {n}")));
    }
    let skip = excluded.map(|s| s.materialize(n as u64));
    let is_skipped = |j: usize| skip.as_ref().is_some_and(|s| s.binary_search(&(j as u64)).is_ok());
    let mut rows = Vec::with_capacity(eps_grid.len());
    for eps in eps_grid {
        let (mut below, mut above, mut unknown) = (0, 0, 0);
        let mut exc = Vec::new();
        let mut cert = Vec::new();
        for t in &series.terms {
            let c = t.classify(eps);
            match c {
                Class::Below => below += 1,
                Class::Above => above += 1,
                Class::Unknown => unknown += 1,
            }
            if c != Class::Below && !is_skipped(t.index) {
                exc.push(t.index as u64);
                if c == Class::Above {
                    cert.push(t.index as u64);
                }
            }
        }
        rows.push(EpsRow {
            eps: eps.clone(),
            below,
            above,
            unknown,
            exceptional: profile_of_sorted(&exc, checkpoints)?,
            certified_above: profile_of_sorted(&cert, checkpoints)?,
        });
    }
    Ok(EvidenceReport {
        n,
        checkpoints: checkpoints.to_vec(),
        verdict: verdict_of(&rows),
        excluded: skip.map(|s| s.len()),
        rows,
        parameters: vec![],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Unknown,
}

/// Which value a window is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowOn {
    /// `‖a_nβ‖`.
    Norm,
    /// `|r W_n|`, the absolute value of the head-reduced representative.
    Lift,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowReport {
    pub on: WindowOn,
    #[serde(with = "enclosure::serde_rational")]
    pub lo: BigRational,
    #[serde(with = "enclosure::serde_rational")]
    pub hi: BigRational,
    #[serde(with = "enclosure::serde_rational")]
    pub slack: BigRational,
    pub results: Vec<(usize, Outcome)>,
}

impl WindowReport {
    pub fn count(&self, o: Outcome) -> usize {
        self.results.iter().filter(|(_, x)| *x == o).count()
    }

    pub fn all_pass(&self) -> bool {
        !self.results.is_empty() && self.results.iter().all(|(_, o)| *o == Outcome::Pass)
    }
}

/// Pass when the enclosure lies in `[lo - slack, hi + slack]`, fail when it
/// misses that interval, unknown otherwise.
pub fn window_check(
    series: &NormSeries,
    at: &IndexSet,
    window: (&BigRational, &BigRational),
    slack: &BigRational,
    on: WindowOn,
) -> Result<WindowReport> {
    let (lo, hi) = window;
    if lo > hi {
        return Err(Error::Precondition("window must satisfy lo <= hi".into()));
    }
    let target = Enclosure::new(lo - slack, hi + slack)?;
    let mut results = Vec::new();
    for j in at.materialize(series.len() as u64) {
        let t = series.term(j as usize).expect("index within series");
        let v = match on {
            WindowOn::Norm => t.norm.clone(),
            WindowOn::Lift => t.lift.as_ref().map(Enclosure::abs),
        };
        let o = match v {
            Some(e) if target.contains_enclosure(&e) => Outcome::Pass,
            Some(e) if !target.intersects(&e) => Outcome::Fail,
            _ => Outcome::Unknown,
        };
        results.push((j as usize, o));
    }
    Ok(WindowReport {
        on,
        lo: lo.clone(),
        hi: hi.clone(),
        slack: slack.clone(),
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    #[serde(with = "enclosure::serde_rational")]
    pub eps: BigRational,
    pub predicted: usize,
    pub observed_above: usize,
    pub observed_unknown: usize,
    /// Indices certified `>= ε` outside the prediction.
    pub violations: Vec<usize>,
    /// Unknown indices outside the prediction.
    pub unknown_outside: Vec<usize>,
    /// The prediction covers every index.
    pub vacuous: bool,
}

impl CrossCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn exception_cross_check(series: &NormSeries, predicted: &IndexSet, eps: &BigRational) -> CrossCheck {
    let n = series.len();
    let pred = predicted.materialize(n as u64);
    let inside = |j: usize| pred.binary_search(&(j as u64)).is_ok();
    let (mut above, mut unknown) = (0, 0);
    let (mut violations, mut unknown_outside) = (Vec::new(), Vec::new());
    for t in &series.terms {
        match t.classify(eps) {
            Class::Below => {}
            Class::Above => {
                above += 1;
                if !inside(t.index) {
                    violations.push(t.index);
                }
            }
            Class::Unknown => {
                unknown += 1;
                if !inside(t.index) {
                    unknown_outside.push(t.index);
                }
            }
        }
    }
    CrossCheck {
        eps: eps.clone(),
        predicted: pred.len(),
        observed_above: above,
        observed_unknown: unknown,
        violations,
        unknown_outside,
        vacuous: pred.len() >= n,
    }
}

/// Smallest `m >= 1` with `λ^m / (1 - λ) < ε/2`.
pub fn choose_m(lambda: &BigRational, eps: &BigRational) -> Result<u64> {
    let one = BigRational::one();
    if lambda >= &one || !lambda.is_positive() {
        return Err(Error::Precondition(format!("lambda = {} must lie in (0, 1)", enclosure::to_f64(lambda))));
    }
    let bound = eps / BigRational::from_integer(2.into()) * (&one - lambda);
    let mut p = lambda.clone();
    for m in 1..=100_000u64 {
        if p < bound {
            return Ok(m);
        }
        p = enclosure::Enclosure::point(&p * lambda).round_outward(256).hi().clone();
    }
    Err(Error::BudgetExceeded {
        what: "choosing m",
        depth: 100_000,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum I0Rule {
    /// `t_i - s_i > 2m` for all `i >= i0`.
    Length,
    /// `t_{i+1} - t_i > 2m` for all `i >= i0`.
    Separation,
}

/// Smallest `i0` satisfying `rule` on every interval with `s_i <= horizon`.
pub fn choose_i0(f: &IntervalFamily, m: u64, horizon: u64, rule: I0Rule) -> Result<usize> {
    let ivs = f.intervals_upto(horizon);
    let ok: Vec<bool> = match rule {
        I0Rule::Length => ivs.iter().map(|&(s, t)| t - s > 2 * m).collect(),
        I0Rule::Separation => {
            let mut v: Vec<bool> = ivs.windows(2).map(|w| w[1].1 - w[0].1 > 2 * m).collect();
            if let (Some(&(_, t)), Some(next)) = (ivs.last(), f.interval(ivs.len() + 1)) {
                v.push(next.1 - t > 2 * m);
            }
            v
        }
    };
    match ok.iter().rposition(|&b| !b) {
        None if !ok.is_empty() => Ok(1),
        Some(p) if p + 1 < ok.len() => Ok(p + 2),
        _ => Err(Error::Precondition(format!(
            "no i0 with the {rule:?} property within horizon {horizon} (m = {m})"
        ))),
    }
}

/// `λ̂` on `k <= horizon`, then `m` and `i0`.
pub fn proof_parameters(
    table: &ConvergentTable,
    f: &IntervalFamily,
    eps: &BigRational,
    horizon: usize,
    rule: I0Rule,
) -> Result<ProofParameters> {
    let lambda = lambda_hat(table, horizon, 40)?;
    let m = choose_m(&lambda.lambda_upper, eps)?;
    let i0 = choose_i0(f, m, horizon as u64, rule)?;
    Ok(ProofParameters {
        lambda,
        eps: eps.clone(),
        m,
        i0,
        i0_rule: rule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::CfDigits;
    use crate::density::family_from_exponent;
    use crate::enclosure::{parse_rational, rational};
    use num_traits::Zero;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn constant_series(v: BigRational, n: usize) -> NormSeries {
        NormSeries {
            alpha: "golden".into(),
            alpha_digest: String::new(),
            selector: Selector::Qn,
            target_width: q("1e-9"),
            terms: (1..=n)
                .map(|i| NormTerm {
                    index: i,
                    n: i,
                    r: 1,
                    norm: Some(Enclosure::point(v.clone())),
                    lift: Some(Enclosure::point(v.clone())),
                })
                .collect(),
        }
    }

    #[test]
    fn verdicts_on_constant_series() {
        let z = constant_series(BigRational::zero(), 100);
        let r = stat_report(&z, &[q("0.01"), q("0.5")], &[10, 50, 100]).unwrap();
        assert_eq!(r.verdict, Verdict::EvidenceForMembership);
        let c = constant_series(rational(1, 4), 100);
        let r = stat_report(&c, &[q("0.1")], &[10, 50, 100]).unwrap();
        assert_eq!(r.verdict, Verdict::EvidenceAgainst);
        assert_eq!(r.rows[0].exceptional.last_ratio(), 1.0);
        assert!(stat_report(&c, &[q("0.6")], &[10]).is_err());
        assert!(stat_report(&c, &[q("0.1")], &[1000]).is_err());
        let w = window_check(&z, &IndexSet::Squares, (&rational(1, 8), &rational(1, 2)), &q("0.01"), WindowOn::Norm)
            .unwrap();
        assert_eq!(w.count(Outcome::Fail), 10);
    }

    #[test]
    fn zero_beta_series() {
        let g = CfDigits::golden();
        let s = norm_series(&OstrowskiDigits::zero(&g), Selector::Qn, 50, &q("1e-9"), Budget::default()).unwrap();
        assert!(s.terms.iter().all(|t| t.norm == Some(Enclosure::zero())));
        let x = norm_series(&OstrowskiDigits::zero(&g), Selector::Xn, 50, &q("1e-9"), Budget::default()).unwrap();
        assert_eq!(x.len(), 50);
    }

    #[test]
    fn theta_zero_silver_converges() {
        let s = CfDigits::silver();
        let b = OstrowskiDigits::finite(&s, vec![1]);
        let ser = norm_series(&b, Selector::Qn, 40, &q("1e-30"), Budget::default()).unwrap();
        let t = ConvergentTable::with_depth(&s, 42).unwrap();
        for term in &ser.terms {
            let bound = BigRational::new(BigInt::one(), t.q(term.n as isize + 1).clone());
            assert!(term.norm.as_ref().unwrap().hi() < &bound);
        }
    }

    #[test]
    fn classification_monotone_in_eps() {
        let g = CfDigits::golden();
        let f = family_from_exponent(&rational(2, 1), 1).unwrap();
        let b = crate::witness::gap_family_beta(&g, &f).unwrap();
        let s = norm_series(&b, Selector::Qn, 300, &q("1e-9"), Budget::default()).unwrap();
        let grid = [q("0.001"), q("0.01"), q("0.1"), q("0.5")];
        let r = stat_report(&s, &grid, &[100, 300]).unwrap();
        for w in r.rows.windows(2) {
            assert!(w[0].below <= w[1].below);
        }
    }

    #[test]
    fn parameter_choice() {
        let m = choose_m(&q("0.5"), &q("0.01")).unwrap();
        // 0.5^m / 0.5 < 0.005  <=>  0.5^(m-1) < 0.005
        assert_eq!(m, 9);
        assert!(choose_m(&q("1"), &q("0.01")).is_err());
        let f = family_from_exponent(&rational(2, 1), 1).unwrap();
        assert_eq!(choose_i0(&f, 14, 5000, I0Rule::Length).unwrap(), 6);
        let flat = IntervalFamily::ConstantLength { s1: 1, length: 3 };
        assert!(choose_i0(&flat, 2, 1000, I0Rule::Length).is_err());
        let sq = crate::witness::square_spike_beta().family;
        assert_eq!(choose_i0(&sq, 14, 5000, I0Rule::Separation).unwrap(), 1);
    }

    #[test]
    fn cross_check_vacuous_and_violations() {
        let c = constant_series(rational(1, 4), 20);
        let all = IndexSet::Intervals { intervals: vec![(1, 20)] };
        let cc = exception_cross_check(&c, &all, &q("0.1"));
        assert!(cc.holds() && cc.vacuous);
        let some = IndexSet::explicit(vec![1, 2, 3]);
        let cc = exception_cross_check(&c, &some, &q("0.1"));
        assert_eq!(cc.violations.len(), 17);
    }
}
