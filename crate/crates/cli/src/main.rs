use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use statchar::cf::{convergents, CfDigits, Convergent};
use statchar::run::{
    build_witness, parse_alpha, parse_u64_list, run_verify, Expectation, RunConfig, RunReport, WitnessKind, WitnessSpec,
};
use statchar::statconv::{Selector, Verdict};
use statchar::witness::merged_sequence;
use statchar::Error;

const EXIT_MISMATCH: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "statchar", version, about = "Continued fractions, Ostrowski digits and density evidence")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args, Default)]
struct WitnessParams {
    /// Exponent of the gap family (lemma21).
    #[arg(long)]
    nu: Option<String>,
    /// First interval start (lemma21).
    #[arg(long)]
    s1: Option<u64>,
    /// Drop this many greedy spike indices (thm25).
    #[arg(long)]
    skip: Option<usize>,
    /// Keep every k-th greedy spike index (thm25).
    #[arg(long)]
    stride: Option<usize>,
    /// Support of a sparse witness: `squares` or a comma list.
    #[arg(long)]
    support: Option<String>,
}

impl WitnessParams {
    fn any(&self) -> bool {
        self.nu.is_some() || self.s1.is_some() || self.skip.is_some() || self.stride.is_some() || self.support.is_some()
    }

    fn spec(&self, kind: WitnessKind) -> WitnessSpec {
        WitnessSpec {
            kind,
            nu: self.nu.clone(),
            s1: self.s1,
            skip: self.skip,
            stride: self.stride,
            support: self.support.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the convergent table p_n, q_n for n = 0..=N.
    Cf {
        #[arg(long, default_value = "golden")]
        alpha: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build a witness β and print its bundle.
    Witness {
        /// lemma21, thm25, prop34 or sparse.
        kind: String,
        /// Defaults to prop34 for the prop34 kind and golden otherwise.
        #[arg(long)]
        alpha: Option<String>,
        #[command(flatten)]
        params: WitnessParams,
        /// Largest index the bundle must cover.
        #[arg(long, default_value_t = 2000)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate ‖a_nβ‖ and report density evidence.
    Verify(Box<VerifyArgs>),
    /// Print the merged sequence x_n as CSV.
    Xn {
        #[arg(long, default_value = "golden")]
        alpha: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// JSON run config; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<String>,
    /// `zero`, `digits:<d0,d1,...>` or `json:<path>`.
    #[arg(long)]
    beta: Option<String>,
    /// Witness kind; parameters as for `witness`.
    #[arg(long)]
    witness: Option<String>,
    #[command(flatten)]
    params: WitnessParams,
    /// qn or xn.
    #[arg(long)]
    selector: Option<String>,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Comma-separated ε grid.
    #[arg(long)]
    eps: Option<String>,
    /// Comma-separated checkpoints.
    #[arg(long)]
    checkpoints: Option<String>,
    /// Target enclosure width.
    #[arg(long)]
    width: Option<String>,
    /// Refinement depth budget.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// member, against or inconclusive.
    #[arg(long)]
    expect: Option<String>,
    /// Judge membership off the predicted exceptional set.
    #[arg(long)]
    exclude_predicted: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    series_csv: Option<String>,
    #[arg(long)]
    density_csv: Option<String>,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Precondition(_) | Error::Parse(_) | Error::InvalidDigit { .. } | Error::InvalidFamily { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn io_err(path: &str, e: std::io::Error) -> Failure {
    Failure::Compute(format!("{path}: {e}"))
}

type Out = Result<u8, Failure>;

fn cmd_cf(alpha: &str, n: usize, format: Format, seed: u64) -> Out {
    let digits = parse_alpha(alpha, seed)?;
    let table = convergents(&digits, n)?;
    let a: Vec<u64> = (1..=n).map(|k| digits.digit(k)).collect::<statchar::Result<_>>()?;
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                alpha: &'a str,
                digits: Vec<u64>,
                convergents: Vec<Convergent>,
            }
            let doc = Doc {
                alpha: digits.name(),
                digits: a,
                convergents: table,
            };
            println!("{}", serde_json::to_string_pretty(&doc).expect("table serializes"));
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let emit = |w: &mut csv::Writer<_>, rec: [String; 4]| w.write_record(rec).map_err(|e| Failure::Compute(e.to_string()));
            emit(&mut w, ["n".into(), "a".into(), "p".into(), "q".into()])?;
            for c in &table {
                let an = if c.index == 0 { String::new() } else { a[c.index - 1].to_string() };
                emit(&mut w, [c.index.to_string(), an, c.p.to_string(), c.q.to_string()])?;
            }
            w.flush().map_err(|e| Failure::Compute(e.to_string()))?;
        }
    }
    Ok(0)
}

fn cmd_witness(kind: &str, alpha: Option<&str>, params: &WitnessParams, horizon: usize, seed: u64) -> Out {
    let kind = WitnessKind::parse(kind)?;
    let default_alpha = if kind == WitnessKind::Prop34 { "prop34" } else { "golden" };
    let alpha = parse_alpha(alpha.unwrap_or(default_alpha), seed)?;
    let bundle = build_witness(&params.spec(kind), &alpha, horizon)?;
    if let Some(w) = &bundle.warning {
        eprintln!("warning: {w}");
    }
    println!("{}", bundle.to_json());
    Ok(0)
}

fn cmd_xn(alpha: &str, n: usize, seed: u64) -> Out {
    let digits: CfDigits = parse_alpha(alpha, seed)?;
    let seq = merged_sequence(&digits, n)?;
    print!("{}", seq.to_csv());
    Ok(0)
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect()
}

fn build_config(args: &VerifyArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::new(args.alpha.as_deref().unwrap_or("golden")),
    };
    if let Some(a) = &args.alpha {
        cfg.alpha = a.clone();
    }
    if let Some(b) = &args.beta {
        cfg.beta = Some(b.clone());
        cfg.witness = None;
    }
    if let Some(w) = &args.witness {
        cfg.witness = Some(args.params.spec(WitnessKind::parse(w)?));
        cfg.beta = None;
    } else if args.params.any() {
        let Some(spec) = cfg.witness.as_mut() else {
            return Err(Failure::Usage("witness parameters given without --witness".into()));
        };
        let p = &args.params;
        spec.nu = p.nu.clone().or(spec.nu.take());
        spec.s1 = p.s1.or(spec.s1);
        spec.skip = p.skip.or(spec.skip);
        spec.stride = p.stride.or(spec.stride);
        spec.support = p.support.clone().or(spec.support.take());
    }
    if let Some(s) = &args.selector {
        cfg.selector = match s.as_str() {
            "qn" => Selector::Qn,
            "xn" => Selector::Xn,
            _ => return Err(Failure::Usage(format!("unknown selector '{s}' (qn or xn)"))),
        };
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(e) = &args.eps {
        cfg.eps = split_list(e);
    }
    if let Some(c) = &args.checkpoints {
        cfg.checkpoints = parse_u64_list(c)?;
    }
    if let Some(w) = &args.width {
        cfg.width = w.clone();
    }
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(e) = &args.expect {
        cfg.expect = Some(Expectation::parse(e)?);
    }
    if args.exclude_predicted {
        cfg.exclude_predicted = true;
    }
    for (slot, v) in [
        (&mut cfg.out, &args.out),
        (&mut cfg.series_csv, &args.series_csv),
        (&mut cfg.density_csv, &args.density_csv),
    ] {
        if v.is_some() {
            *slot = v.clone();
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn density_csv(r: &RunReport) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["eps", "set", "N", "count", "ratio"]).unwrap();
    for row in &r.report.rows {
        let eps = statchar::enclosure::format_rational(&row.eps);
        for (name, d) in [("exceptional", &row.exceptional), ("certified_above", &row.certified_above)] {
            for p in &d.checkpoints {
                w.write_record([eps.clone(), name.into(), p.n.to_string(), p.count.to_string(), p.ratio.to_string()])
                    .unwrap();
            }
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn cmd_verify(args: &VerifyArgs) -> Out {
    let cfg = build_config(args)?;
    let out = run_verify(&cfg)?;
    let report = &out.report;
    let json = report.to_json();
    match &cfg.out {
        Some(path) => fs::write(path, format!("{json}\n")).map_err(|e| io_err(path, e))?,
        None => println!("{json}"),
    }
    if let Some(path) = &cfg.series_csv {
        let eps = &report.report.rows[0].eps;
        fs::write(path, out.series.to_csv(eps)).map_err(|e| io_err(path, e))?;
    }
    if let Some(path) = &cfg.density_csv {
        fs::write(path, density_csv(report)).map_err(|e| io_err(path, e))?;
    }
    let code = match (report.matches, report.verdict) {
        (Some(true), _) => 0,
        (_, Verdict::Inconclusive) => EXIT_INCONCLUSIVE,
        (Some(false), _) => EXIT_MISMATCH,
        (None, _) => 0,
    };
    eprintln!(
        "verdict: {}{}",
        report.verdict.as_str(),
        match report.matches {
            Some(true) => " (matches expectation)",
            Some(false) => " (does not match expectation)",
            None => "",
        }
    );
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { EXIT_USAGE } else { 0 });
        }
    };
    let res = match &cli.cmd {
        Cmd::Cf { alpha, n, format, seed } => cmd_cf(alpha, *n, *format, *seed),
        Cmd::Witness {
            kind,
            alpha,
            params,
            horizon,
            seed,
        } => cmd_witness(kind, alpha.as_deref(), params, *horizon, *seed),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Xn { alpha, n, seed } => cmd_xn(alpha, *n, *seed),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}
