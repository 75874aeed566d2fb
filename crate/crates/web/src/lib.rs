//! wasm-bindgen exports for the static demo page in `www/`. Every function
//! returns a JSON string; errors come back as JS exceptions.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use statchar::cf::{convergents, Convergent};
use statchar::density::{density_profile, family_from_exponent, IndexSet};
use statchar::enclosure::{parse_rational, to_f64};
use statchar::run::{parse_alpha, run_verify, RunConfig, WitnessKind, WitnessSpec};

fn js(e: statchar::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializes")
}

fn even_checkpoints(n: u64, count: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (1..=count).map(|i| (n * i / count).max(1)).collect();
    v.dedup();
    v
}

#[derive(Serialize)]
struct Table {
    alpha: String,
    digits: Vec<u64>,
    convergents: Vec<Convergent>,
}

pub fn convergent_table_json(alpha: &str, n: usize) -> statchar::Result<String> {
    let d = parse_alpha(alpha, 0)?;
    let rows = convergents(&d, n)?;
    let digits = (1..=n).map(|k| d.digit(k)).collect::<statchar::Result<_>>()?;
    Ok(json(&Table {
        alpha: d.name().to_string(),
        digits,
        convergents: rows,
    }))
}

#[derive(Serialize)]
struct Series {
    verdict: &'static str,
    m: Option<u64>,
    i0: Option<usize>,
    lambda: Option<f64>,
    /// `(n, lo, hi)` of each `‖q_nβ‖` enclosure; unknown terms are skipped.
    points: Vec<(usize, f64, f64)>,
    /// `(N, ratio)` of the exceptional set.
    exceptional: Vec<(u64, f64)>,
}

pub fn gap_series_json(alpha: &str, nu: &str, n: usize, eps: &str) -> statchar::Result<String> {
    let mut cfg = RunConfig::new(alpha);
    cfg.witness = Some(WitnessSpec {
        nu: Some(nu.into()),
        ..WitnessSpec::of_kind(WitnessKind::Lemma21)
    });
    cfg.n = n;
    cfg.eps = vec![eps.into()];
    cfg.checkpoints = even_checkpoints(n as u64, 50);
    let out = run_verify(&cfg)?;
    let p = out.report.parameters.first();
    let row = &out.report.report.rows[0];
    Ok(json(&Series {
        verdict: out.report.verdict.as_str(),
        m: p.map(|p| p.m),
        i0: p.map(|p| p.i0),
        lambda: p.map(|p| p.lambda.lambda_approx),
        points: out
            .series
            .terms
            .iter()
            .filter_map(|t| t.norm.as_ref().map(|e| (t.index, to_f64(e.lo()), to_f64(e.hi()))))
            .collect(),
        exceptional: row.exceptional.checkpoints.iter().map(|c| (c.n, c.ratio)).collect(),
    }))
}

#[derive(Serialize)]
struct FamilyDensity {
    intervals: Vec<(u64, u64)>,
    /// `(N, ratio)` for the union of the intervals and for its complement.
    inside: Vec<(u64, f64)>,
    outside: Vec<(u64, f64)>,
}

pub fn family_density_json(nu: &str, s1: u64, n: u64) -> statchar::Result<String> {
    let f = family_from_exponent(&parse_rational(nu)?, s1)?;
    let intervals = f.intervals_upto(n);
    let cps = even_checkpoints(n, 100);
    let inside = density_profile(&IndexSet::Intervals { intervals: intervals.clone() }, &cps)?;
    let outside = density_profile(&IndexSet::FamilyComplement { family: f }, &cps)?;
    let pts = |r: &statchar::density::DensityReport| r.checkpoints.iter().map(|c| (c.n, c.ratio)).collect();
    Ok(json(&FamilyDensity {
        intervals,
        inside: pts(&inside),
        outside: pts(&outside),
    }))
}

#[wasm_bindgen]
pub fn convergent_table(alpha: &str, n: usize) -> Result<String, JsError> {
    convergent_table_json(alpha, n).map_err(js)
}

#[wasm_bindgen]
pub fn gap_series(alpha: &str, nu: &str, n: usize, eps: &str) -> Result<String, JsError> {
    gap_series_json(alpha, nu, n, eps).map_err(js)
}

#[wasm_bindgen]
pub fn family_density(nu: &str, s1: u32, n: u32) -> Result<String, JsError> {
    family_density_json(nu, s1.into(), n.into()).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_fibonacci_denominators() {
        let v: serde_json::Value = serde_json::from_str(&convergent_table_json("golden", 6).unwrap()).unwrap();
        let q: Vec<&str> = v["convergents"].as_array().unwrap().iter().map(|c| c["q"].as_str().unwrap()).collect();
        assert_eq!(q, ["1", "1", "2", "3", "5", "8", "13"]);
    }

    #[test]
    fn series_and_density() {
        let v: serde_json::Value = serde_json::from_str(&gap_series_json("golden", "2", 300, "1e-2").unwrap()).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 300);
        assert_eq!(v["exceptional"].as_array().unwrap().len(), 50);
        let d: serde_json::Value = serde_json::from_str(&family_density_json("2", 1, 1000).unwrap()).unwrap();
        let (a, b) = (&d["inside"][99], &d["outside"][99]);
        assert_eq!(a[0], 1000);
        let total = a[1].as_f64().unwrap() + b[1].as_f64().unwrap();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(convergent_table_json("nope", 3).is_err());
        assert!(family_density_json("x", 1, 10).is_err());
    }
}
