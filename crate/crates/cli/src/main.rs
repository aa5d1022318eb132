//! `parisi-sphere`: solver, certificate, chaos checks and Monte Carlo for
//! spherical mixed p-spin glasses.
//!
//! Every command prints JSON on stdout. Exit codes: 0 success, 2 usage or
//! invalid input, 3 numerical non-convergence, 4 resource guard.

mod input;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use parisi_sphere::chaos::{frsb_coupling_demo, theorem1_check, theorem2_check};
use parisi_sphere::crisanti_sommers::{certify, cs_value, cs_value_measure, CertifyOptions};
use parisi_sphere::montecarlo::stats::Histogram;
use parisi_sphere::montecarlo::{
    chaos_experiment, covariance_selftest, overlay_predictions, McmcConfig, Perturbation, SimConfig,
};
use parisi_sphere::parisi_solver::{parisi_solve, SolveOptions};
use parisi_sphere::{Error, MixtureSpec, ParisiMeasure};

use manifest::OutputSet;

const SEED_ENV: &str = "PARISI_SPHERE_SEED";

const EXIT_USAGE: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "parisi-sphere",
    version,
    about = "Parisi measures and temperature chaos for spherical mixed p-spin glasses"
)]
struct Cli {
    /// Also write results and a run manifest into this directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Print compact single-line JSON instead of pretty-printed JSON.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the Parisi measure of a mixture at inverse temperature beta.
    Solve(SolveArgs),
    /// Run the optimality certificate on a user-supplied measure.
    Certify(CertifyArgs),
    /// Evaluate the Crisanti-Sommers functional at a measure.
    CsEval(CsEvalArgs),
    /// Temperature-chaos checks.
    #[command(subcommand)]
    Chaos(ChaosCommand),
    /// Monte Carlo overlap statistics at two temperatures.
    Simulate(SimulateArgs),
    /// Check E H(s1) H(s2) = N xi(R) on random sphere pairs.
    CovarianceSelftest(CovarianceArgs),
}

/// Mixture coefficients are gamma_p, so xi(x) = sum gamma_p^2 x^p.
#[derive(Args, Debug, Serialize)]
struct MixtureArg {
    /// Mixture as "p:gamma_p,..." (unsquared coefficients), e.g. "2:0.9644,4:0.2646".
    #[arg(long)]
    xi: String,
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    mixture: MixtureArg,
    #[arg(long)]
    beta: f64,
    /// Seed for k-RSB restarts (overridden by PARISI_SPHERE_SEED).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
}

#[derive(Args, Debug, Serialize)]
struct CertifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    mixture: MixtureArg,
    #[arg(long)]
    beta: f64,
    /// Measure as "q1:m1,q2:m2,...", inline JSON, or @file.json.
    #[arg(long)]
    measure: String,
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol_sup: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_supp: f64,
}

#[derive(Args, Debug, Serialize)]
struct CsEvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    mixture: MixtureArg,
    #[arg(long)]
    beta: f64,
    /// Measure as "q1:m1,q2:m2,...", inline JSON, or @file.json.
    #[arg(long)]
    measure: String,
    /// Upper limit of the middle integral (atomic measures only, default: top atom).
    #[arg(long)]
    shat: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum ChaosCommand {
    /// Hypotheses of the chaos theorem for the perturbed pure p0-spin model.
    Thm1(Thm1Args),
    /// Hypotheses of the chaos theorem for generic mixtures.
    Thm2(Thm2Args),
    /// Two-temperature FRSB example where the uncoupled condition fails.
    DemoFrsb(DemoArgs),
}

#[derive(Args, Debug, Serialize)]
struct Thm1Args {
    #[arg(long)]
    p0: u32,
    #[arg(long)]
    p: u32,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    beta1: f64,
    #[arg(long)]
    beta2: f64,
}

#[derive(Args, Debug, Serialize)]
struct Thm2Args {
    #[command(flatten)]
    #[serde(flatten)]
    mixture: MixtureArg,
    #[arg(long)]
    beta1: f64,
    #[arg(long)]
    beta2: f64,
    /// Treat the mixture as generic. Without it the theorem is never reported as applicable.
    #[arg(long)]
    assert_generic: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct DemoArgs {
    #[arg(long)]
    c: f64,
    #[arg(long)]
    p: u32,
    #[arg(long)]
    beta1: f64,
    #[arg(long)]
    beta2: f64,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    mixture: MixtureArg,
    /// Number of spins.
    #[arg(long = "N", alias = "n")]
    n: usize,
    #[arg(long)]
    beta1: f64,
    #[arg(long)]
    beta2: f64,
    /// Samples kept per chain.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Independent disorder realizations.
    #[arg(long, default_value_t = 10)]
    disorders: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 10)]
    thin: usize,
    /// Proposal step size in (0, 1].
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Tune the step toward acceptance 0.4 before burn-in.
    #[arg(long)]
    auto_tune: bool,
    /// Perturbed pure model "p0,p,a": H_{N,p0} + N^{-a} H_{N,p}; --xi must be "p0:1".
    #[arg(long)]
    perturb: Option<String>,
    /// Also dump raw overlap samples to raw_overlaps.csv.
    #[arg(long)]
    raw: bool,
}

#[derive(Args, Debug, Serialize)]
struct CovarianceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    mixture: MixtureArg,
    #[arg(long = "N", alias = "n", default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    pairs: usize,
    #[arg(long, default_value_t = 20_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A command's stdout payload plus the exit code it implies.
struct Outcome {
    value: Value,
    code: u8,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Outcome { value, code: 0 }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } => EXIT_BUDGET,
        Error::NonConvergence(_) | Error::NoInteriorSolution(_) | Error::Degenerate(_) => {
            EXIT_NONCONVERGENCE
        }
        _ => EXIT_USAGE,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::InvalidMixture(_) => "invalid_mixture",
        Error::InvalidMeasure(_) => "invalid_measure",
        Error::Degenerate(_) => "degenerate",
        Error::Parse(_) => "parse",
        Error::NoInteriorSolution(_) => "no_interior_solution",
        Error::PreconditionFailed(_) => "precondition_failed",
        Error::NotApplicable(_) => "not_applicable",
        Error::NonConvergence(_) => "non_convergence",
        Error::Budget { .. } => "budget",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize to JSON")
}

/// `PARISI_SPHERE_SEED`, when set, takes precedence over `--seed`.
fn effective_seed(flag: u64) -> Result<u64, Error> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{SEED_ENV}={s} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

fn mixture(arg: &MixtureArg) -> Result<MixtureSpec, Error> {
    arg.xi.parse()
}

fn cmd_solve(a: &SolveArgs, seed: u64) -> Result<Outcome, Error> {
    let spec = mixture(&a.mixture)?;
    let opts = SolveOptions {
        seed,
        restarts: a.restarts,
        ..Default::default()
    };
    let sol = parisi_solve(&spec, a.beta, &opts)?;
    let mut value = to_value(&sol);
    value["mixture"] = to_value(&spec);
    value["beta"] = json!(a.beta);
    let code = if sol.diagnostics.converged {
        0
    } else {
        EXIT_NONCONVERGENCE
    };
    Ok(Outcome { value, code })
}

fn cmd_certify(a: &CertifyArgs) -> Result<Outcome, Error> {
    let spec = mixture(&a.mixture)?;
    let measure = input::parse_measure(&a.measure)?;
    let opts = CertifyOptions {
        grid: a.grid,
        tol_sup: a.tol_sup,
        tol_supp: a.tol_supp,
        ..Default::default()
    };
    let cert = certify(&spec, a.beta, &measure, &opts)?;
    Ok(Outcome::ok(
        json!({ "measure": measure, "certificate": cert }),
    ))
}

fn cmd_cs_eval(a: &CsEvalArgs) -> Result<Outcome, Error> {
    let spec = mixture(&a.mixture)?;
    let measure = input::parse_measure(&a.measure)?;
    let v = match (&measure, a.shat) {
        (ParisiMeasure::Atomic(step), shat) => cs_value(&spec, a.beta, step, shat)?,
        (_, None) => cs_value_measure(&spec, a.beta, &measure)?,
        (_, Some(_)) => {
            return Err(Error::Domain(
                "--shat applies to atomic measures only".into(),
            ))
        }
    };
    Ok(Outcome::ok(
        json!({ "measure": measure, "beta": a.beta, "shat": a.shat, "cs_value": v }),
    ))
}

fn cmd_chaos(c: &ChaosCommand, seed_flag: u64) -> Result<Outcome, Error> {
    let report = match c {
        ChaosCommand::Thm1(a) => theorem1_check(a.p0, a.p, a.a, a.beta1, a.beta2),
        ChaosCommand::Thm2(a) => {
            let spec = mixture(&a.mixture)?;
            let opts = SolveOptions {
                seed: effective_seed(seed_flag)?,
                ..Default::default()
            };
            theorem2_check(&spec, a.beta1, a.beta2, a.assert_generic, &opts)?
        }
        ChaosCommand::DemoFrsb(a) => frsb_coupling_demo(a.c, a.p, a.beta1, a.beta2)?,
    };
    Ok(Outcome::ok(to_value(&report)))
}

fn histogram_rows(h: &Histogram) -> Vec<String> {
    h.rows()
        .into_iter()
        .map(|(l, r, c)| format!("{l},{r},{c}"))
        .collect()
}

fn cmd_simulate(a: &SimulateArgs, seed: u64, out: &mut OutputSet) -> Result<Outcome, Error> {
    let spec = mixture(&a.mixture)?;
    let perturbation = match &a.perturb {
        Some(s) => {
            let (p0, p, pa) = input::parse_perturbation(s)?;
            Some(Perturbation { p0, p, a: pa })
        }
        None => None,
    };
    let config = SimConfig {
        spec: spec.clone(),
        n: a.n,
        betas: (a.beta1, a.beta2),
        perturbation,
        mcmc: McmcConfig {
            burn_in: a.burn_in,
            thin: a.thin,
            n_samples: a.samples,
            step: a.step,
            auto_tune: a.auto_tune,
        },
        n_disorder: a.disorders,
        master_seed: seed,
        keep_raw: a.raw,
    };
    let mut stats = chaos_experiment(&config)?;
    let overlay = overlay_predictions(
        &spec,
        config.betas,
        &SolveOptions {
            seed,
            ..Default::default()
        },
    );
    let mut notes = Vec::new();
    match overlay {
        Ok(o) => stats.overlay = Some(o),
        Err(e) => notes.push(format!("no overlay: {e}")),
    }

    let header = "bin_left,bin_right,count";
    out.csv("hist_same1.csv", header, histogram_rows(&stats.same1));
    out.csv("hist_same2.csv", header, histogram_rows(&stats.same2));
    out.csv("hist_cross.csv", header, histogram_rows(&stats.cross));
    if let Some(raw) = stats.raw.take() {
        let mut rows = Vec::new();
        for (kind, xs) in [
            ("same1", &raw.same1),
            ("same2", &raw.same2),
            ("cross", &raw.cross),
        ] {
            rows.extend(xs.iter().map(|x| format!("{kind},{x}")));
        }
        out.csv("raw_overlaps.csv", "pair,overlap", rows);
    }
    let mut summary = to_value(&stats);
    summary["config"] = to_value(&config);
    if !notes.is_empty() {
        summary["notes"] = json!(notes);
    }
    out.json("summary.json", summary.clone());
    Ok(Outcome::ok(json!({
        "summary": out.path("summary.json").display().to_string(),
        "mean_abs_cross": stats.mean_abs_cross,
        "se_abs_cross": stats.se_abs_cross,
        "asymptotic_claims_reproducible": stats.asymptotic_claims_reproducible,
    })))
}

fn cmd_covariance(a: &CovarianceArgs, seed: u64) -> Result<Outcome, Error> {
    let spec = mixture(&a.mixture)?;
    let report = covariance_selftest(&spec, a.n, a.pairs, a.draws, seed)?;
    Ok(Outcome::ok(to_value(&report)))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Solve(_) => "solve",
        Command::Certify(_) => "certify",
        Command::CsEval(_) => "cs-eval",
        Command::Chaos(ChaosCommand::Thm1(_)) => "chaos-thm1",
        Command::Chaos(ChaosCommand::Thm2(_)) => "chaos-thm2",
        Command::Chaos(ChaosCommand::DemoFrsb(_)) => "chaos-demo-frsb",
        Command::Simulate(_) => "simulate",
        Command::CovarianceSelftest(_) => "covariance-selftest",
    }
}

/// Parameters recorded in the manifest, with the effective seed.
fn parameters(c: &Command, seed: Option<u64>) -> Value {
    let mut v = match c {
        Command::Solve(a) => to_value(a),
        Command::Certify(a) => to_value(a),
        Command::CsEval(a) => to_value(a),
        Command::Chaos(ChaosCommand::Thm1(a)) => to_value(a),
        Command::Chaos(ChaosCommand::Thm2(a)) => to_value(a),
        Command::Chaos(ChaosCommand::DemoFrsb(a)) => to_value(a),
        Command::Simulate(a) => to_value(a),
        Command::CovarianceSelftest(a) => to_value(a),
    };
    if let (Some(s), Value::Object(map)) = (seed, &mut v) {
        if map.contains_key("seed") {
            map.insert("seed".into(), json!(s));
        }
    }
    v
}

fn seed_flag(c: &Command) -> Option<u64> {
    match c {
        Command::Solve(a) => Some(a.seed),
        Command::Chaos(ChaosCommand::Thm2(a)) => Some(a.seed),
        Command::Simulate(a) => Some(a.seed),
        Command::CovarianceSelftest(a) => Some(a.seed),
        _ => None,
    }
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let seed = seed_flag(&cli.command).map(effective_seed).transpose()?;
    let name = command_name(&cli.command);
    let dir = cli.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut out = OutputSet::new(&dir, name, parameters(&cli.command, seed), seed, cli.jobs);
    let s = seed.unwrap_or(0);
    let outcome = match &cli.command {
        Command::Solve(a) => cmd_solve(a, s)?,
        Command::Certify(a) => cmd_certify(a)?,
        Command::CsEval(a) => cmd_cs_eval(a)?,
        Command::Chaos(c) => cmd_chaos(c, s)?,
        Command::Simulate(a) => cmd_simulate(a, s, &mut out)?,
        Command::CovarianceSelftest(a) => cmd_covariance(a, s)?,
    };
    let simulate = matches!(cli.command, Command::Simulate(_));
    if simulate || cli.output_dir.is_some() {
        if !simulate {
            out.json(&format!("{name}.json"), outcome.value.clone());
        }
        let manifest = write_outputs(out, &dir)?;
        let mut value = outcome.value;
        if let Value::Object(map) = &mut value {
            map.insert(
                "manifest".into(),
                json!(dir.join("manifest.json").display().to_string()),
            );
            map.insert("manifest_hash".into(), json!(manifest.manifest_hash));
        }
        return Ok(Outcome {
            value,
            code: outcome.code,
        });
    }
    Ok(outcome)
}

fn write_outputs(out: OutputSet, dir: &Path) -> Result<manifest::RunManifest, Error> {
    out.write()
        .map_err(|e| Error::Domain(format!("cannot write outputs to {}: {e}", dir.display())))
}

fn print(value: &Value, compact: bool) {
    let text = if compact {
        serde_json::to_string(value)
    } else {
        serde_json::to_string_pretty(value)
    };
    println!("{}", text.expect("JSON values serialize"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let compact = std::env::args().any(|a| a == "--json");
            print(
                &json!({ "error": "usage", "message": e.kind().to_string() }),
                compact,
            );
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
        {
            eprintln!("warning: --jobs ignored: {e}");
        }
    }
    match run(&cli) {
        Ok(outcome) => {
            print(&outcome.value, cli.json);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            print(
                &json!({ "error": error_kind(&e), "message": e.to_string() }),
                cli.json,
            );
            ExitCode::from(exit_code(&e))
        }
    }
}
