mod job;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mumford::curve::{
    canonical_embed_many, canonical_embed_many_at, fit_plane_quartic, period_matrix, period_matrix_at,
    period_matrix_uncertified, quartic_monomials,
};
use mumford::domain::{good_position, DomainError, GoodDomain, SchottkyVerdict, DEFAULT_MAX_M};
use mumford::padic::guard_digits;
use mumford::skeleton::{export_graph, tropical_curve, GraphFormat};
use mumford::whittaker::{
    involution_from_fixed_points, normal_form, ramification_points, ramification_to_whittaker, whittaker_group,
    WhittakerError,
};
use serde_json::{json, Value};

use job::{JobSpec, UsageError};

const EXIT_RELATION: u8 = 2;
const EXIT_NON_HYPERBOLIC: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;
const EXIT_NOT_VALID: u8 = 5;
const EXIT_USAGE: u8 = 64;
const DEFAULT_PRECISION: u32 = 10;

#[derive(Parser)]
#[command(name = "mumford", version, about = "Schottky groups and Mumford curves over Q_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Relative precision n (overrides the input file).
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Largest word length for the good-position search.
    #[arg(long, global = true)]
    max_m: Option<usize>,
    /// Truncation index for theta products, instead of the derived one.
    /// With 0 the period matrix is reported as valuations only.
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Use the input generators as they are, without a good fundamental
    /// domain. Needs --m; the digits carry no guarantee.
    #[arg(long, global = true)]
    unsafe_no_good_position: bool,
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Put generators into good position or find a witness against it.
    SchottkyTest { input: PathBuf },
    /// Approximate the period matrix of the Jacobian.
    PeriodMatrix { input: PathBuf },
    /// Minimal skeleton as a marked metric graph.
    Skeleton { input: PathBuf },
    /// Points of the canonical embedding, optionally with a fitted quartic.
    Canonical { input: PathBuf },
    /// Branch values from involutions, or fixed points from branch values.
    Whittaker { input: PathBuf },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Dot,
}

/// What a command produced: text for the output and an exit code.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn json(v: Value, code: u8) -> Outcome {
        let mut text = serde_json::to_string_pretty(&v).expect("serializable");
        text.push('\n');
        Outcome { text, code }
    }
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

fn run_err<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Run(e.to_string())
}

struct Settings {
    spec: JobSpec,
    n: u32,
    max_m: usize,
    cap: u32,
}

fn settings(cli: &Cli, input: &PathBuf) -> Result<Settings, Failure> {
    let spec = JobSpec::load(input)?;
    let n = cli.precision.or(spec.n).unwrap_or(DEFAULT_PRECISION);
    if n == 0 {
        return Err(Failure::Usage("precision must be at least 1".into()));
    }
    let max_m = cli.max_m.or(spec.max_m).unwrap_or(DEFAULT_MAX_M);
    Ok(Settings {
        spec,
        n,
        max_m,
        cap: n + guard_digits(),
    })
}

fn verdict_json(v: &SchottkyVerdict) -> Result<Value, Failure> {
    Ok(match v {
        SchottkyVerdict::GoodPosition { domain, m } => {
            let mut out = domain.to_json().map_err(run_err)?;
            out["verdict"] = json!(v.kind());
            out["m"] = json!(m);
            out
        }
        SchottkyVerdict::Relation(w) => json!({ "verdict": v.kind(), "word": w }),
        SchottkyVerdict::NonHyperbolic(w, mat) => json!({
            "verdict": v.kind(),
            "word": w,
            "matrix": [[mat.a.format_digits(), mat.b.format_digits()], [mat.c.format_digits(), mat.d.format_digits()]],
        }),
    })
}

fn verdict_code(v: &SchottkyVerdict) -> u8 {
    match v {
        SchottkyVerdict::GoodPosition { .. } => 0,
        SchottkyVerdict::Relation(_) => EXIT_RELATION,
        SchottkyVerdict::NonHyperbolic(..) => EXIT_NON_HYPERBOLIC,
    }
}

/// Run the Schottky test; anything but good position ends the command.
fn certify(s: &Settings) -> Result<Result<(GoodDomain, usize), Outcome>, Failure> {
    let gens = s.spec.generators(s.cap)?;
    match good_position(&gens, s.max_m) {
        Ok(SchottkyVerdict::GoodPosition { domain, m }) => Ok(Ok((domain, m))),
        Ok(v) => Ok(Err(Outcome::json(verdict_json(&v)?, verdict_code(&v)))),
        Err(DomainError::Inconclusive { max_m }) => Ok(Err(Outcome::json(
            json!({ "verdict": "Inconclusive", "max_m": max_m }),
            EXIT_INCONCLUSIVE,
        ))),
        Err(e) => Err(run_err(e)),
    }
}

fn schottky_test(cli: &Cli, input: &PathBuf) -> Result<Outcome, Failure> {
    let s = settings(cli, input)?;
    match certify(&s)? {
        Ok((domain, m)) => {
            let v = SchottkyVerdict::GoodPosition { domain, m };
            Ok(Outcome::json(verdict_json(&v)?, 0))
        }
        Err(out) => Ok(out),
    }
}

fn cmd_period_matrix(cli: &Cli, input: &PathBuf) -> Result<Outcome, Failure> {
    let s = settings(cli, input)?;
    if cli.unsafe_no_good_position {
        let m = cli.m.ok_or_else(|| Failure::Usage("--unsafe-no-good-position needs --m".into()))?;
        let gens = s.spec.generators(s.cap)?;
        let pm = period_matrix_uncertified(&gens, s.n, m).map_err(run_err)?;
        let mut out = pm.to_json(m == 0);
        out["c"] = Value::Null;
        out["log_p_d"] = Value::Null;
        out["certified"] = json!(false);
        return Ok(Outcome::json(out, 0));
    }
    let (dom, gp_m) = match certify(&s)? {
        Ok(x) => x,
        Err(out) => return Ok(out),
    };
    let pm = match cli.m {
        Some(m) => period_matrix_at(&dom, s.n, m),
        None => period_matrix(&dom, s.n),
    }
    .map_err(run_err)?;
    let mut out = pm.to_json(cli.m == Some(0));
    out["certified"] = json!(true);
    out["good_position_m"] = json!(gp_m);
    out["words"] = json!(dom.words);
    Ok(Outcome::json(out, 0))
}

fn no_unsafe(cli: &Cli, what: &str) -> Result<(), Failure> {
    if cli.unsafe_no_good_position {
        return Err(Failure::Usage(format!("--unsafe-no-good-position is not available for {what}")));
    }
    Ok(())
}

fn cmd_skeleton(cli: &Cli, input: &PathBuf) -> Result<Outcome, Failure> {
    no_unsafe(cli, "skeleton")?;
    let s = settings(cli, input)?;
    let (dom, gp_m) = match certify(&s)? {
        Ok(x) => x,
        Err(out) => return Ok(out),
    };
    let graph = tropical_curve(&dom).map_err(run_err)?;
    match cli.format {
        Format::Dot => Ok(Outcome {
            text: export_graph(&graph, GraphFormat::Dot),
            code: 0,
        }),
        Format::Json => {
            let mut out: Value = serde_json::from_str(&export_graph(&graph, GraphFormat::Json)).map_err(run_err)?;
            out["m"] = json!(gp_m);
            out["c"] = json!(dom.c().map_err(run_err)?.to_string());
            out["log_p_d"] = json!(dom.log_d().to_string());
            out["words"] = json!(dom.words);
            Ok(Outcome::json(out, 0))
        }
    }
}

fn cmd_canonical(cli: &Cli, input: &PathBuf) -> Result<Outcome, Failure> {
    no_unsafe(cli, "canonical")?;
    let s = settings(cli, input)?;
    let raw = s
        .spec
        .points
        .clone()
        .ok_or_else(|| Failure::Usage("missing \"points\"".into()))?;
    let zs = raw.iter().map(|v| s.spec.point(v, s.cap)).collect::<Result<Vec<_>, _>>()?;
    let (dom, gp_m) = match certify(&s)? {
        Ok(x) => x,
        Err(out) => return Ok(out),
    };
    let pts = match cli.m {
        Some(m) => canonical_embed_many_at(&dom, &zs, s.n, m),
        None => canonical_embed_many(&dom, &zs, s.n),
    }
    .map_err(run_err)?;
    let c = dom.c().map_err(run_err)?;
    let log_d = dom.log_d();
    let listed: Vec<Value> = raw
        .iter()
        .zip(&pts)
        .map(|(z, pt)| {
            let mut v = pt.to_json(c, log_d, s.cap);
            v["z"] = z.clone();
            v
        })
        .collect();
    let mut out = json!({
        "p": s.spec.p,
        "n": s.n,
        "good_position_m": gp_m,
        "points": listed,
    });
    if s.spec.fit_quartic == Some(true) {
        let q = fit_plane_quartic(&pts).map_err(run_err)?;
        let names: Vec<String> = quartic_monomials()
            .iter()
            .map(|e| format!("x^{} y^{} z^{}", e[0], e[1], e[2]))
            .collect();
        let coeffs: Vec<Value> = names
            .iter()
            .zip(&q.coeffs)
            .map(|(n, c)| json!({ "monomial": n, "coeff": c.format_digits() }))
            .collect();
        let residuals = pts
            .iter()
            .map(|pt| q.residual(pt).map(|r| r.val_bound()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(run_err)?;
        out["quartic"] = json!(coeffs);
        out["residual_valuations"] = json!(residuals);
    }
    Ok(Outcome::json(out, 0))
}

fn cmd_whittaker(cli: &Cli, input: &PathBuf) -> Result<Outcome, Failure> {
    no_unsafe(cli, "whittaker")?;
    let s = settings(cli, input)?;
    let spec = &s.spec;
    let mut out = json!({ "p": spec.p, "n": s.n, "N": s.cap });
    let mut inverse_input = None;
    if let Some(pairs) = &spec.involutions {
        let mut invs = Vec::with_capacity(pairs.len());
        for [a, b] in pairs {
            let (a, b) = (spec.point(a, s.cap)?, spec.point(b, s.cap)?);
            invs.push(involution_from_fixed_points(&a, &b).map_err(run_err)?);
        }
        if invs.len() < 2 {
            return Err(Failure::Usage("need at least two involutions".into()));
        }
        let pres = whittaker_group(invs).map_err(run_err)?;
        let rd = ramification_points(&pres, s.n).map_err(run_err)?;
        let nf = normal_form(&pres).map_err(run_err)?;
        out["ramification"] = rd.to_json();
        out["m"] = json!(rd.m);
        out["normal_form"] = json!(nf.xs.iter().map(|x| x.format_digits()).collect::<Vec<_>>());
        out["generators"] = json!(pres
            .gens
            .iter()
            .map(|m| vec![
                vec![m.a.format_digits(), m.b.format_digits()],
                vec![m.c.format_digits(), m.d.format_digits()]
            ])
            .collect::<Vec<_>>());
        if spec.d.is_some() {
            inverse_input = Some(rd.normalized.clone());
        }
    } else if let Some(r) = &spec.ramification {
        let vals = r.iter().map(|v| spec.scalar(v, s.cap)).collect::<Result<Vec<_>, _>>()?;
        inverse_input = Some(vals);
    } else {
        return Err(Failure::Usage("need \"involutions\" or \"ramification\"".into()));
    }
    if let Some(r) = inverse_input {
        let d = spec.d.unwrap_or(4);
        out["d"] = json!(d);
        match ramification_to_whittaker(&r, d) {
            Ok(inv) => {
                out["fixed_points"] = json!(inv
                    .xs
                    .iter()
                    .map(|x| x.residue(d as i64).map(|v| v.format_digits()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(run_err)?);
                out["seeds"] = json!(inv.seeds.iter().map(|x| x.format_digits()).collect::<Vec<_>>());
                out["seed_index"] = json!(inv.seed_index);
            }
            Err(WhittakerError::NotValid) => {
                out["verdict"] = json!("NOT VALID");
                return Ok(Outcome::json(out, EXIT_NOT_VALID));
            }
            Err(e) => return Err(run_err(e)),
        }
    }
    Ok(Outcome::json(out, 0))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("mumford: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match &cli.command {
        Command::SchottkyTest { input } => schottky_test(&cli, input),
        Command::PeriodMatrix { input } => cmd_period_matrix(&cli, input),
        Command::Skeleton { input } => cmd_skeleton(&cli, input),
        Command::Canonical { input } => cmd_canonical(&cli, input),
        Command::Whittaker { input } => cmd_whittaker(&cli, input),
    };
    match result {
        Ok(out) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &out.text),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("mumford: {e}");
                return ExitCode::FAILURE;
            }
            ExitCode::from(out.code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("mumford: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("mumford: {msg}");
            ExitCode::FAILURE
        }
    }
}
