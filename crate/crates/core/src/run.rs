//! Reproducible runs: α registry, witness specs and the verify pipeline
//! shared by the CLI and the browser demo.

use std::path::Path;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cf::{Budget, CfDigits, ConvergentTable, DigitRule};
use crate::density::{family_from_exponent, predicted_exception_set, DensityReport, IndexSet, IntervalFamily};
use crate::enclosure::{self, parse_rational};
use crate::error::{Error, Result};
use crate::ostrowski::{validate, OstrowskiDigits};
use crate::statconv::{
    exception_cross_check, norm_series, proof_parameters, stat_report, stat_report_off, window_check, CrossCheck,
    EvidenceReport, I0Rule, NormSeries, ProofParameters, Selector, Verdict, WindowOn, WindowReport,
};
use crate::witness::{
    gap_family_beta, half_digit_beta, merged_sequence, middle_multiplier_set, sparse_support_beta, spike_subsequence,
    square_spike_beta, MiddleVariant,
};

/// Resolves an α name: `golden`, `silver`, `prop34`, `rule:<name>`,
/// `list:<path>`, `random-bounded:<M>[,<seed>]` (the run seed is used when
/// the seed is omitted).
pub fn parse_alpha(spec: &str, seed: u64) -> Result<CfDigits> {
    match spec {
        "golden" => return Ok(CfDigits::golden()),
        "silver" => return Ok(CfDigits::silver()),
        "prop34" => return Ok(CfDigits::rule(DigitRule::SquareSpikes)),
        _ => {}
    }
    if let Some(name) = spec.strip_prefix("rule:") {
        return DigitRule::from_name(name)
            .map(CfDigits::rule)
            .ok_or_else(|| Error::Parse(format!("unknown digit rule '{name}'")));
    }
    if let Some(path) = spec.strip_prefix("list:") {
        let text = std::fs::read_to_string(path)?;
        let digits = parse_u64_list(&text)?;
        let name = Path::new(path)
            .file_name()
            .map_or_else(|| path.to_string(), |s| s.to_string_lossy().into_owned());
        return CfDigits::explicit(&format!("list:{name}"), digits);
    }
    if let Some(rest) = spec.strip_prefix("random-bounded:") {
        let parts = parse_u64_list(rest)?;
        return match parts.as_slice() {
            [m] => CfDigits::random_bounded(*m, seed),
            [m, s] => CfDigits::random_bounded(*m, *s),
            _ => Err(Error::Parse(format!("bad random-bounded spec '{spec}'"))),
        };
    }
    Err(Error::Parse(format!("unknown alpha '{spec}'")))
}

pub fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u64>().map_err(|e| Error::Parse(format!("'{t}': {e}"))))
        .collect()
}

pub fn parse_rational_list(s: &str) -> Result<Vec<BigRational>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse_rational(t.trim())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Lemma21,
    Thm25,
    Prop34,
    Sparse,
}

impl WitnessKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lemma21" => Ok(WitnessKind::Lemma21),
            "thm25" => Ok(WitnessKind::Thm25),
            "prop34" => Ok(WitnessKind::Prop34),
            "sparse" => Ok(WitnessKind::Sparse),
            _ => Err(Error::Parse(format!("unknown witness kind '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    pub kind: WitnessKind,
    /// Exponent of the gap family (`lemma21`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1: Option<u64>,
    /// Sub-subsequence of the greedy indices (`thm25`): drop the first
    /// `skip`, then keep every `stride`-th.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    /// Support of a `sparse` witness: `squares` or a comma list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<String>,
}

impl WitnessSpec {
    pub fn of_kind(kind: WitnessKind) -> Self {
        WitnessSpec {
            kind,
            nu: None,
            s1: None,
            skip: None,
            stride: None,
            support: None,
        }
    }
}

/// A constructed β, with its family when it has one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bundle {
    pub kind: Option<WitnessKind>,
    pub beta: OstrowskiDigits,
    pub family: Option<IntervalFamily>,
    pub subsequence: Option<Vec<u64>>,
    pub warning: Option<String>,
}

impl Bundle {
    pub fn alpha(&self) -> &CfDigits {
        self.beta.alpha()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            kind: Option<WitnessKind>,
            context: String,
            alpha: &'a CfDigits,
            beta: &'a crate::ostrowski::DigitPattern,
            #[serde(skip_serializing_if = "Option::is_none")]
            family: &'a Option<IntervalFamily>,
            #[serde(skip_serializing_if = "Option::is_none")]
            subsequence: &'a Option<Vec<u64>>,
            #[serde(skip_serializing_if = "Option::is_none")]
            warning: &'a Option<String>,
            support_prefix: Vec<usize>,
            digit_prefix: Vec<(usize, u64)>,
        }
        let nz = self.beta.nonzero_in(0, 10_000).unwrap_or_default();
        serde_json::to_string_pretty(&Doc {
            kind: self.kind,
            context: self.alpha().digest(),
            alpha: self.alpha(),
            beta: self.beta.pattern(),
            family: &self.family,
            subsequence: &self.subsequence,
            warning: &self.warning,
            support_prefix: nz.iter().take(16).map(|&(k, _)| k).collect(),
            digit_prefix: nz.into_iter().take(16).collect(),
        })
        .expect("bundle serializes")
    }
}

/// Builds a witness. `horizon` is the largest index the caller will
/// evaluate; finite constructions are extended past it.
pub fn build_witness(spec: &WitnessSpec, alpha: &CfDigits, horizon: usize) -> Result<Bundle> {
    match spec.kind {
        WitnessKind::Lemma21 => {
            let nu = parse_rational(spec.nu.as_deref().unwrap_or("2"))?;
            let f = family_from_exponent(&nu, spec.s1.unwrap_or(1))?;
            Ok(Bundle {
                kind: Some(spec.kind),
                beta: gap_family_beta(alpha, &f)?,
                family: Some(f),
                subsequence: None,
                warning: None,
            })
        }
        WitnessKind::Thm25 => {
            let skip = spec.skip.unwrap_or(0);
            let stride = spec.stride.unwrap_or(1).max(1);
            let target = horizon as u64 + 512;
            let mut count = 16;
            let n = loop {
                let all = spike_subsequence(alpha, count, 64 * target as usize + 4096)?;
                let sub: Vec<u64> = all.iter().skip(skip).step_by(stride).copied().collect();
                if sub.len() >= 3 && *sub.last().unwrap() > target {
                    break sub;
                }
                count *= 2;
            };
            let w = half_digit_beta(alpha, &n)?;
            Ok(Bundle {
                kind: Some(spec.kind),
                beta: w.beta,
                family: Some(w.family),
                subsequence: Some(n),
                warning: None,
            })
        }
        WitnessKind::Prop34 => {
            let w = square_spike_beta();
            if alpha != &w.alpha {
                return Err(Error::Precondition("the prop34 witness is defined for alpha = prop34".into()));
            }
            Ok(Bundle {
                kind: Some(spec.kind),
                beta: w.beta,
                family: Some(w.family),
                subsequence: None,
                warning: None,
            })
        }
        WitnessKind::Sparse => {
            let support = match spec.support.as_deref().unwrap_or("squares") {
                "squares" => IndexSet::Squares,
                list => IndexSet::explicit(parse_u64_list(list)?),
            };
            let w = sparse_support_beta(alpha, support)?;
            Ok(Bundle {
                kind: Some(spec.kind),
                beta: w.beta,
                family: None,
                subsequence: None,
                warning: w.dense_warning,
            })
        }
    }
}

/// `zero`, `digits:<d0,d1,...>` or `json:<path>`.
pub fn parse_beta(spec: &str, alpha: &CfDigits) -> Result<OstrowskiDigits> {
    if spec == "zero" {
        return Ok(OstrowskiDigits::zero(alpha));
    }
    if let Some(list) = spec.strip_prefix("digits:") {
        let d = OstrowskiDigits::finite(alpha, parse_u64_list(list)?);
        validate(&d, d.finite_extent().unwrap_or(0))?.into_result()?;
        return Ok(d);
    }
    if let Some(path) = spec.strip_prefix("json:") {
        let d = OstrowskiDigits::from_json(&std::fs::read_to_string(path)?)?;
        if d.alpha() != alpha {
            return Err(Error::Precondition("beta document is written against a different alpha".into()));
        }
        return Ok(d);
    }
    Err(Error::Parse(format!("unknown beta '{spec}'")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Member,
    Against,
    Inconclusive,
}

impl Expectation {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "member" => Ok(Expectation::Member),
            "against" => Ok(Expectation::Against),
            "inconclusive" => Ok(Expectation::Inconclusive),
            _ => Err(Error::Parse(format!("unknown expectation '{s}'"))),
        }
    }

    pub fn matches(self, v: Verdict) -> bool {
        matches!(
            (self, v),
            (Expectation::Member, Verdict::EvidenceForMembership)
                | (Expectation::Against, Verdict::EvidenceAgainst)
                | (Expectation::Inconclusive, Verdict::Inconclusive)
        )
    }
}

fn default_selector() -> Selector {
    Selector::Qn
}
fn default_n() -> usize {
    2000
}
fn default_eps() -> Vec<String> {
    vec!["1e-2".into()]
}
fn default_width() -> String {
    "1e-9".into()
}
fn default_depth() -> usize {
    4096
}

/// One verify run. Serialized field order is fixed, so equal configs give
/// equal digests and byte-identical reports.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSpec>,
    #[serde(default = "default_selector")]
    pub selector: Selector,
    #[serde(default = "default_n", rename = "N")]
    pub n: usize,
    #[serde(default = "default_eps")]
    pub eps: Vec<String>,
    /// Defaults to `N/5, N/2, N`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<u64>,
    #[serde(default = "default_width")]
    pub width: String,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
    /// Remove the predicted exceptional set before judging membership.
    #[serde(default)]
    pub exclude_predicted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_csv: Option<String>,
}

impl RunConfig {
    pub fn new(alpha: &str) -> Self {
        RunConfig {
            alpha: alpha.into(),
            beta: None,
            witness: None,
            selector: default_selector(),
            n: default_n(),
            eps: default_eps(),
            checkpoints: vec![],
            width: default_width(),
            depth: default_depth(),
            seed: 0,
            expect: None,
            exclude_predicted: false,
            out: None,
            series_csv: None,
            density_csv: None,
        }
    }

    /// Hex SHA-256 of the canonical JSON of the fields that affect results.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.series_csv = None;
        c.density_csv = None;
        hex::encode(Sha256::digest(serde_json::to_vec(&c).expect("config serializes")))
    }

    pub fn checkpoints(&self) -> Vec<u64> {
        if !self.checkpoints.is_empty() {
            return self.checkpoints.clone();
        }
        let n = self.n as u64;
        let mut v = vec![n / 5, n / 2, n];
        v.retain(|&c| c >= 1);
        v.dedup();
        v
    }

    /// Checks budgets and parses the numeric fields.
    pub fn validate(&self) -> Result<(BigRational, Vec<BigRational>)> {
        let width = parse_rational(&self.width)?;
        if !width.is_positive() {
            return Err(Error::Precondition("width budget must be positive".into()));
        }
        if self.depth == 0 {
            return Err(Error::Precondition("depth budget must be positive".into()));
        }
        if self.n == 0 {
            return Err(Error::Precondition("N must be positive".into()));
        }
        if self.beta.is_some() == self.witness.is_some() {
            return Err(Error::Precondition("give exactly one of beta and witness".into()));
        }
        let eps = self.eps.iter().map(|e| parse_rational(e)).collect::<Result<Vec<_>>>()?;
        Ok((width, eps))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiddleSummary {
    pub i0: usize,
    pub b: DensityReport,
    pub b_prime: DensityReport,
    pub window_lift: WindowReport,
    pub window_norm: WindowReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub config_digest: String,
    pub budget: Budget,
    pub alpha: String,
    pub alpha_digest: String,
    pub witness: Option<WitnessKind>,
    pub parameters: Vec<ProofParameters>,
    pub cross_checks: Vec<CrossCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub middle: Option<MiddleSummary>,
    pub report: EvidenceReport,
    pub verdict: Verdict,
    pub expected: Option<Expectation>,
    pub matches: Option<bool>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Everything a verify run computes; the series is kept for CSV export.
pub struct RunOutput {
    pub report: RunReport,
    pub series: NormSeries,
}

pub fn run_verify(cfg: &RunConfig) -> Result<RunOutput> {
    let (width, eps) = cfg.validate()?;
    let checkpoints = cfg.checkpoints();
    let budget = Budget::uniform(cfg.depth);
    let alpha = parse_alpha(&cfg.alpha, cfg.seed)?;
    let bundle = match (&cfg.beta, &cfg.witness) {
        (Some(b), None) => Bundle {
            kind: None,
            beta: parse_beta(b, &alpha)?,
            family: None,
            subsequence: None,
            warning: None,
        },
        (None, Some(w)) => build_witness(w, &alpha, cfg.n)?,
        _ => unreachable!("validated above"),
    };
    let beta = &bundle.beta;
    let series = norm_series(beta, cfg.selector, cfg.n, &width, budget)?;
    let horizon = match cfg.selector {
        Selector::Qn => cfg.n,
        Selector::Xn => series.terms.last().map_or(1, |t| t.n),
    };
    let mut parameters = Vec::new();
    let mut cross_checks = Vec::new();
    let mut middle = None;
    let mut excluded: Option<IndexSet> = None;
    if let Some(f) = &bundle.family {
        let table = ConvergentTable::with_depth(&alpha, horizon + 1)?;
        let rule = match bundle.kind {
            Some(WitnessKind::Lemma21) => I0Rule::Length,
            _ => I0Rule::Separation,
        };
        for e in &eps {
            match proof_parameters(&table, f, e, horizon, rule) {
                Ok(p) => {
                    if cfg.selector == Selector::Qn {
                        let pred = predicted_exception_set(f, p.m, p.i0, cfg.n as u64)?;
                        cross_checks.push(exception_cross_check(&series, &pred, e));
                    }
                    parameters.push(p);
                }
                Err(Error::Precondition(_)) => {}
                Err(err) => return Err(err),
            }
        }
        if cfg.exclude_predicted && cfg.selector == Selector::Qn {
            // the prediction for the smallest ε contains the others
            if let Some(p) = parameters.iter().min_by(|a, b| a.eps.cmp(&b.eps)) {
                excluded = Some(predicted_exception_set(f, p.m, p.i0, cfg.n as u64)?);
            }
        }
        if cfg.selector == Selector::Xn {
            let i0 = parameters.iter().map(|p| p.i0).max().unwrap_or(1);
            let seq = merged_sequence(&alpha, cfg.n)?;
            let b = middle_multiplier_set(&seq, f, MiddleVariant::All)?;
            let bp = middle_multiplier_set(&seq, f, MiddleVariant::After { i0 })?;
            let slack = parse_rational("0.01")?;
            let (lo, hi) = (enclosure::rational(17, 72), enclosure::rational(3, 4));
            middle = Some(MiddleSummary {
                i0,
                b: crate::density::density_profile(&b, &checkpoints)?,
                b_prime: crate::density::density_profile(&bp, &checkpoints)?,
                window_lift: window_check(&series, &bp, (&lo, &hi), &slack, WindowOn::Lift)?,
                window_norm: window_check(&series, &bp, (&lo, &enclosure::rational(1, 2)), &slack, WindowOn::Norm)?,
            });
        }
    }
    if cfg.exclude_predicted && excluded.is_none() {
        return Err(Error::Precondition("exclude_predicted needs a witness with a family on the q_n selector".into()));
    }
    let mut report = match &excluded {
        Some(x) => stat_report_off(&series, x, &eps, &checkpoints)?,
        None => stat_report(&series, &eps, &checkpoints)?,
    };
    report.parameters = parameters.clone();
    let verdict = report.verdict;
    let report = RunReport {
        config: cfg.clone(),
        config_digest: cfg.digest(),
        budget,
        alpha: alpha.name().to_string(),
        alpha_digest: alpha.digest(),
        witness: bundle.kind,
        parameters,
        cross_checks,
        middle,
        report,
        verdict,
        expected: cfg.expect,
        matches: cfg.expect.map(|e| e.matches(verdict)),
    };
    Ok(RunOutput { report, series })
}
