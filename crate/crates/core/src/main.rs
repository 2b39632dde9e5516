use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use opsmooth::diagonal::{diag_smoothness, DiagonalOperator};
use opsmooth::examples::reproduce_examples;
use opsmooth::operator::{
    gateaux_derivative, hilbert_h0_test, m_t_delta, mt_delta_localization, mt_delta_localization_at, op_norm,
    orthogonality_transfer_test, smoothness_decide_with, transfer_test_at, MatrixOperator, Verdict,
    DEFAULT_H_SCHEDULE,
};
use opsmooth::oracle::{run_oracle, OracleInputs, OracleTarget};
use opsmooth::orthogonality::{approx_bj, bj_orthogonal, directional_class, right_additivity_probe};
use opsmooth::space::{duality_map, is_smooth_point, sip};
use opsmooth::{Citation, Error, Exponent, ExitStatus, Report, RunConfig, Vector};

#[derive(Parser, Debug)]
#[command(name = "opsmooth", version, about = "Smoothness of operators between lp spaces")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance for closed-form checks.
    #[arg(long, global = true)]
    tol_formula: Option<f64>,
    /// Tolerance for optimizer-produced quantities.
    #[arg(long, global = true)]
    tol_opt: Option<f64>,
    /// Radius for merging maximizers.
    #[arg(long, global = true)]
    tol_cluster: Option<f64>,
    /// Grid density for the brute-force oracles.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Exponents for `reproduce-examples`, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    p_values: Option<Vec<Exponent>>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    /// Record wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Birkhoff-James orthogonality of x to y.
    CheckOrth {
        x: String,
        y: String,
        #[arg(long)]
        p: Option<Exponent>,
        /// Also report approximate and directional classes at this eps.
        #[arg(long)]
        eps: Option<f64>,
        /// Run the right-additivity probe on x with this many random pairs.
        #[arg(long)]
        additivity: Option<usize>,
    },
    /// Canonical norming functional and smoothness of x.
    Duality {
        x: String,
        #[arg(long)]
        p: Option<Exponent>,
    },
    /// Semi-inner-product [y, x].
    Sip {
        y: String,
        x: String,
        #[arg(long)]
        p: Option<Exponent>,
    },
    /// Operator norm and maximizers of {entries, p, r}.
    OpNorm { t: String },
    /// Smoothness decision for a matrix operator.
    OpSmooth {
        t: String,
        #[arg(long, default_value_t = 3)]
        audits: usize,
    },
    /// Compares T _|_ A with T x0 _|_ A x0.
    Transfer {
        t: String,
        a: String,
        /// Use this maximizer instead of requiring a unique one.
        #[arg(long)]
        x0: Option<String>,
    },
    /// One-sided derivatives of ||T + h A|| at h = 0.
    Gateaux {
        t: String,
        a: String,
        #[arg(long, value_delimiter = ',')]
        h: Option<Vec<f64>>,
    },
    /// M_T(delta) membership and eps-localization.
    Mtdelta {
        t: String,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Point to test for membership in M_T(delta).
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Smoothness of a diagonal operator given by a symbol.
    DiagSmooth {
        symbol: String,
        #[arg(long, default_value = "2")]
        p: Exponent,
    },
    /// Re-derives both worked examples and their truncations.
    ReproduceExamples,
    /// Compares a fast path with a brute-force grid.
    Oracle {
        /// bj_orthogonal, op_norm or is_smooth_point.
        target: String,
        inputs: Option<String>,
    },
}

enum Failure {
    Input(String),
    Report(Report, ExitStatus),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<(Report, ExitStatus), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ExitStatus::InputError.code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let start = Instant::now();
    let result = config(&cli).and_then(|cfg| run(&cli.command, &cfg));
    let (mut report, status) = match result {
        Ok(r) => r,
        Err(Failure::Report(r, s)) => (r, s),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(ExitStatus::InputError.code() as u8);
        }
    };
    if cli.timing {
        report.timing = Some(start.elapsed().as_secs_f64());
    }
    let text = report.to_json();
    match &cli.json_out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(ExitStatus::InputError.code() as u8);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(status.code() as u8)
}

fn config(cli: &Cli) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = RunConfig {
        seed: cli.seed,
        ..RunConfig::default()
    };
    if let Some(v) = cli.tol_formula {
        cfg.tolerances.formula = v;
    }
    if let Some(v) = cli.tol_opt {
        cfg.tolerances.optimizer = v;
    }
    if let Some(v) = cli.tol_cluster {
        cfg.tolerances.cluster = v;
    }
    if let Some(v) = cli.grid {
        cfg.grid_density = v;
    }
    if let Some(v) = &cli.p_values {
        cfg.p_values = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Inline JSON if it looks like JSON, otherwise a file path.
fn load_json(arg: &str) -> std::result::Result<Value, Failure> {
    let t = arg.trim_start();
    let text = if t.starts_with('{') || t.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(|e| Failure::Input(format!("cannot read '{arg}': {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("invalid JSON in '{arg}': {e}")))
}

/// A vector is a JSON array (exponent from `--p`, default 2) or `{coords, p}`.
fn load_vector(arg: &str, p: Option<Exponent>) -> std::result::Result<Vector, Failure> {
    let v = load_json(arg)?;
    let (coords, own_p) = match v {
        Value::Object(mut m) => {
            let coords = m.remove("coords").ok_or_else(|| Failure::Input("vector object needs 'coords'".into()))?;
            let own_p = match m.remove("p") {
                Some(p) => Some(serde_json::from_value::<Exponent>(p).map_err(|e| Failure::Input(e.to_string()))?),
                None => None,
            };
            (coords, own_p)
        }
        other => (other, None),
    };
    let coords: Vec<f64> =
        serde_json::from_value(coords).map_err(|e| Failure::Input(format!("vector must be an array of numbers: {e}")))?;
    let p = p.or(own_p).unwrap_or(Exponent::TWO);
    Ok(Vector::in_lp(coords, p)?)
}

fn load_matrix(arg: &str) -> std::result::Result<MatrixOperator, Failure> {
    let v = load_json(arg)?;
    serde_json::from_value(v).map_err(|e| Failure::Input(format!("invalid operator '{arg}': {e}")))
}

fn load_point(arg: &str) -> std::result::Result<Vec<f64>, Failure> {
    serde_json::from_value(load_json(arg)?).map_err(|e| Failure::Input(format!("invalid point '{arg}': {e}")))
}

fn ok<I: Serialize, V: Serialize>(
    command: &str,
    inputs: &I,
    verdicts: &V,
    citations: impl IntoIterator<Item = Citation>,
) -> Outcome {
    Ok((Report::new(command, inputs, verdicts, citations)?, ExitStatus::Success))
}

fn run(command: &Command, cfg: &RunConfig) -> Outcome {
    let tol = &cfg.tolerances;
    let seed = cfg.seed;
    let echo = |v: Value| {
        let mut v = v;
        v["seed"] = json!(seed);
        v["tolerances"] = json!(tol);
        v
    };
    match command {
        Command::CheckOrth {
            x,
            y,
            p,
            eps,
            additivity,
        } => {
            let x = load_vector(x, *p)?;
            let y = load_vector(y, *p)?;
            let verdict = bj_orthogonal(&x, &y, tol)?;
            let mut out = serde_json::to_value(&verdict).expect("serializable");
            if let Some(e) = eps {
                out["approx_bj"] = json!(approx_bj(&x, &y, *e, tol)?);
                out["directional_class"] = json!(directional_class(&x, &y, *e, tol)?);
            }
            if let Some(n) = additivity {
                out["right_additivity"] = json!(right_additivity_probe(&x, *n, seed, tol)?);
            }
            let mut cites = vec![Citation::Plumbing];
            if verdict.sip_value.is_some() {
                cites.push(Citation::SemiInnerProduct);
            }
            ok(
                "check-orth",
                &echo(json!({"x": x.coords(), "y": y.coords(), "p": x.p(), "eps": eps, "additivity": additivity})),
                &out,
                cites,
            )
        }
        Command::Duality { x, p } => {
            let x = load_vector(x, *p)?;
            let f = duality_map(&x, tol)?;
            let s = is_smooth_point(&x, tol)?;
            ok(
                "duality",
                &echo(json!({"x": x.coords(), "p": x.p()})),
                &json!({"norm": x.norm(), "functional": f, "smooth_point": s}),
                [Citation::SemiInnerProduct],
            )
        }
        Command::Sip { y, x, p } => {
            let y = load_vector(y, *p)?;
            let x = load_vector(x, *p)?;
            let value = sip(&y, &x, tol)?;
            ok(
                "sip",
                &echo(json!({"y": y.coords(), "x": x.coords(), "p": x.p()})),
                &json!({"value": value, "norm_x": x.norm(), "norm_y": y.norm()}),
                [Citation::SemiInnerProduct],
            )
        }
        Command::OpNorm { t } => {
            let t = load_matrix(t)?;
            let n = op_norm(&t, tol, seed);
            let mut out = serde_json::to_value(&n).expect("serializable");
            out["singleton_pair"] = json!(n.singleton_pair());
            ok("op-norm", &echo(json!({"t": t})), &out, [Citation::Plumbing])
        }
        Command::OpSmooth { t, audits } => {
            let t = load_matrix(t)?;
            let r = smoothness_decide_with(&t, tol, seed, *audits)?;
            let mut cites = r.citations.clone();
            let mut out = serde_json::to_value(&r).expect("serializable");
            if t.p() == Exponent::TWO && t.r() == Exponent::TWO {
                let h = hilbert_h0_test(&t, tol, seed);
                if let Ok(h) = &h {
                    cites.push(Citation::HilbertComplement);
                    out["hilbert_h0"] = json!(h);
                }
            }
            ok("op-smooth", &echo(json!({"t": t, "audits": audits})), &out, cites)
        }
        Command::Transfer { t, a, x0 } => {
            let t = load_matrix(t)?;
            let a = load_matrix(a)?;
            let outcome = match x0 {
                Some(x) => transfer_test_at(&t, &a, &load_point(x)?, tol, seed)?,
                None => orthogonality_transfer_test(&t, &a, tol, seed)?,
            };
            ok(
                "transfer",
                &echo(json!({"t": t, "a": a, "x0": x0.as_ref().map(|_| outcome.x0.clone())})),
                &outcome,
                [Citation::OrthogonalityTransfer],
            )
        }
        Command::Gateaux { t, a, h } => {
            let t = load_matrix(t)?;
            let a = load_matrix(a)?;
            let schedule = h.clone().unwrap_or_else(|| DEFAULT_H_SCHEDULE.to_vec());
            let g = gateaux_derivative(&t, &a, &schedule, tol, seed)?;
            let mut out = serde_json::to_value(&g).expect("serializable");
            let mut cites = vec![Citation::FrechetLocalization];
            let s = smoothness_decide_with(&t, tol, seed, 0)?;
            out["smooth"] = json!(s.verdict == Verdict::Smooth);
            if s.verdict == Verdict::Smooth {
                let tx = Vector::new(t.apply(&s.x0), t.codomain())?;
                let ax = Vector::new(a.apply(&s.x0), t.codomain())?;
                let predicted = sip(&ax, &tx, tol)? / s.norm_value;
                out["predicted"] = json!(predicted);
                out["x0"] = json!(s.x0);
                cites.push(Citation::SemiInnerProduct);
            }
            ok("gateaux", &echo(json!({"t": t, "a": a, "h": schedule})), &out, cites)
        }
        Command::Mtdelta {
            t,
            delta,
            eps,
            x,
            samples,
        } => {
            let t = load_matrix(t)?;
            if delta.is_none() && eps.is_none() {
                return Err(Failure::Input("mtdelta needs --delta, --eps or both".into()));
            }
            let mut out = json!({});
            if let Some(d) = delta {
                let m = m_t_delta(&t, *d, tol, seed)?;
                if let Some(xs) = x {
                    let point = load_point(xs)?;
                    if point.len() != t.cols() {
                        return Err(Error::DimensionMismatch {
                            expected: t.cols(),
                            found: point.len(),
                        }
                        .into());
                    }
                    out["contains"] = json!(m.contains(&t, &point));
                }
                out["m_t_delta"] = json!(m);
            }
            if let Some(e) = eps {
                let loc = match x {
                    Some(xs) if delta.is_none() => mt_delta_localization_at(&t, &load_point(xs)?, *e, *samples, tol, seed)?,
                    _ => mt_delta_localization(&t, *e, *samples, tol, seed)?,
                };
                out["localization"] = json!(loc);
            }
            ok(
                "mtdelta",
                &echo(json!({"t": t, "delta": delta, "eps": eps, "samples": samples})),
                &out,
                [Citation::FrechetLocalization],
            )
        }
        Command::DiagSmooth { symbol, p } => {
            let d = DiagonalOperator::parse(symbol, *p)?;
            let r = diag_smoothness(&d);
            let cites = r.citations.clone();
            ok(
                "diag-smooth",
                &echo(json!({"symbol": symbol, "p": p})),
                &r,
                cites,
            )
        }
        Command::ReproduceExamples => {
            let (report, outcome) = reproduce_examples(cfg)?;
            if outcome.passed {
                Ok((report, ExitStatus::Success))
            } else {
                for f in &outcome.failures {
                    eprintln!("assertion failed: {f}");
                }
                Err(Failure::Report(report, ExitStatus::AssertionFailure))
            }
        }
        Command::Oracle { target, inputs } => {
            let target: OracleTarget = target.parse()?;
            let inputs: OracleInputs = match inputs {
                Some(s) => serde_json::from_value(load_json(s)?)
                    .map_err(|e| Failure::Input(format!("invalid oracle inputs: {e}")))?,
                None => OracleInputs::default(),
            };
            let (report, outcome) = run_oracle(target, &inputs, cfg)?;
            if outcome.passed {
                Ok((report, ExitStatus::Success))
            } else {
                eprintln!(
                    "oracle discrepancy {} exceeds {}",
                    outcome.max_discrepancy, outcome.tolerance
                );
                Err(Failure::Report(report, ExitStatus::OracleDiscrepancy))
            }
        }
    }
}
