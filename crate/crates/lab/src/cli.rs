//! The `moi` command line: `eval`, `verify` and `sweep`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad input or
//! configuration, 3 resource cap.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use moi_core::bounds::{check_haagerup_like, check_haagerup_main, check_projective, BoundReport, DEFAULT_TOL};
use moi_core::integrand::Integrand;
use moi_core::moi::{eval_oracle_with_cap, evaluate, MoiInstance, DEFAULT_TUPLE_CAP};
use moi_core::sharpness::{Regime, SweepTemplate};
use moi_core::SchattenExponent;

use crate::campaign::{run_campaign, summary_table, CampaignConfig};
use crate::json::{to_pretty, EvalOutput, Exponents, InstanceFile, ReportJson, SchattenSummary};
use crate::sweep::{sweep_csv, SValue};

/// Environment variable overriding the oracle's atom-tuple cap.
pub const MAX_TUPLES_ENV: &str = "MOI_MAX_TUPLES";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    VerificationFailed = 1,
    InvalidInput = 2,
    CapExceeded = 3,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

/// Cap refusals anywhere in the chain map to 3, everything else to 2.
pub fn status_for(err: &anyhow::Error) -> Status {
    let cap = err.chain().any(|e| e.downcast_ref::<moi_core::Error>().is_some_and(moi_core::Error::is_cap));
    if cap {
        Status::CapExceeded
    } else {
        Status::InvalidInput
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "moi",
    version,
    about = "Multiple operator integrals: evaluation, verification campaigns, sharpness sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the operator integral of a JSON instance.
    Eval(EvalArgs),
    /// Run the seeded verification suites.
    Verify(VerifyArgs),
    /// Sweep a sharpness construction over truncations and write CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use the brute-force atomwise sum (subject to the tuple cap).
    #[arg(long)]
    pub oracle: bool,
    /// Slack for the bound check when the instance lists exponents.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Dimension range `lo..hi` (inclusive) or a maximum.
    #[arg(long, default_value = "1..4")]
    pub dims: String,
    /// Chain width range `lo..hi` (inclusive) or a maximum.
    #[arg(long, default_value = "1..3")]
    pub widths: String,
    /// Exponent pool for the projective and Haagerup-like bounds.
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,3,4,inf")]
    pub exponents: Vec<String>,
    /// Exponents for the Haagerup chain bound and the row lemma (all >= 2).
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,inf")]
    pub main_exponents: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Relative tolerance of the evaluator-agreement and duality suites.
    #[arg(long, default_value_t = 1e-9)]
    pub equiv_tol: f64,
    /// Summary table destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where a failing trial's reproduction instance is written.
    #[arg(long, default_value = "moi-repro.json")]
    pub repro: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub regime: String,
    #[arg(long)]
    pub p1: String,
    #[arg(long)]
    pub pm1: String,
    /// Target exponents: numbers, `inf`, or multiples of r (`r`, `r/2`, `0.8r`).
    #[arg(long, value_delimiter = ',', default_value = "r")]
    pub s: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub dims: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub arity: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// its status. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> Status
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::InvalidInput } else { Status::Success };
        }
    };
    let outcome = match cli.command {
        Command::Eval(a) => cmd_eval(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    };
    outcome.unwrap_or_else(|err| {
        eprintln!("error: {err:#}");
        status_for(&err)
    })
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn tuple_cap_from_env() -> Result<u128> {
    match std::env::var(MAX_TUPLES_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| anyhow!("{MAX_TUPLES_ENV} = {v:?} is not a non-negative integer")),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_TUPLE_CAP),
        Err(e) => Err(anyhow!("{MAX_TUPLES_ENV}: {e}")),
    }
}

pub fn load_instance(path: &Path) -> Result<(MoiInstance, Option<Exponents>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: InstanceFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.parse().with_context(|| format!("invalid instance in {}", path.display()))
}

/// The theorem matching the integrand class, with the file's exponents.
fn bound_for(inst: &MoiInstance, e: Exponents, tol: f64) -> Result<BoundReport> {
    let inf = SchattenExponent::INFINITY;
    let m = inst.arity();
    let need_q = || e.q.ok_or_else(|| anyhow!("this integrand class needs both exponents p and q"));
    let report = match inst.integrand() {
        Integrand::Projective(_) => {
            let mut exps = vec![e.p];
            if m > 2 {
                exps.extend(std::iter::repeat_n(inf, m - 3));
                exps.push(e.q.unwrap_or(inf));
            }
            check_projective(inst, &exps, tol)?
        }
        Integrand::Haagerup(_) => {
            if m < 3 {
                bail!("no Schatten bound is checked for two-factor chains");
            }
            check_haagerup_main(inst, e.p, need_q()?, tol)?
        }
        Integrand::HaagerupLike(_) => check_haagerup_like(inst, e.p, need_q()?, tol)?,
    };
    Ok(report)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<Status> {
    let (inst, exponents) = load_instance(&args.instance)?;
    let (w, evaluator) = if args.oracle {
        (eval_oracle_with_cap(&inst, tuple_cap_from_env()?)?, "oracle")
    } else {
        (evaluate(&inst)?, inst.integrand().class_name())
    };
    let bound = exponents.map(|e| bound_for(&inst, e, args.tol)).transpose()?;
    let output = EvalOutput {
        result: crate::json::matrix_to_json(&w),
        schatten: SchattenSummary::of(&w)?,
        rep_norm_bound: inst.integrand().rep_norm_bound(),
        evaluator,
        bound: bound.as_ref().map(ReportJson::from),
    };
    write_output(args.out.as_deref(), &to_pretty(&output)?)?;
    Ok(Status::Success)
}

/// `lo..hi`, `lo..=hi` or just `hi` (meaning `1..=hi`).
pub fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || moi_core::Error::InvalidInput(format!("cannot parse range {s:?}"));
    let s = s.trim();
    match s.split_once("..") {
        Some((lo, hi)) => {
            let lo = lo.trim().parse().map_err(|_| bad())?;
            let hi = hi.trim().trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            Ok((lo, hi))
        }
        None => Ok((1, s.parse().map_err(|_| bad())?)),
    }
}

fn parse_exponents(name: &str, values: &[String]) -> Result<Vec<SchattenExponent>> {
    values.iter().map(|v| v.parse::<SchattenExponent>().with_context(|| format!("--{name}"))).collect()
}

pub fn campaign_config(args: &VerifyArgs) -> Result<CampaignConfig> {
    let mut cfg = CampaignConfig::new(args.seed, args.trials);
    cfg.dims = parse_range(&args.dims).context("--dims")?;
    cfg.widths = parse_range(&args.widths).context("--widths")?;
    cfg.exponents = parse_exponents("exponents", &args.exponents)?;
    cfg.main_exponents = parse_exponents("main-exponents", &args.main_exponents)?;
    cfg.tol = args.tol;
    cfg.equiv_tol = args.equiv_tol;
    cfg.tuple_cap = tuple_cap_from_env()?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Status> {
    let cfg = campaign_config(args)?;
    let summaries = run_campaign(&cfg)?;
    write_output(args.out.as_deref(), &summary_table(&summaries))?;
    let failures: Vec<_> = summaries.iter().filter_map(|s| s.failure.as_ref()).collect();
    let Some(first) = failures.first() else {
        return Ok(Status::Success);
    };
    fs::write(&args.repro, to_pretty(first)?).with_context(|| format!("writing {}", args.repro.display()))?;
    for f in &failures {
        eprintln!("{} failed at trial {} (seed {}): {}", f.suite, f.trial, f.seed, f.detail);
    }
    eprintln!("reproduction for {} written to {}", first.suite, args.repro.display());
    Ok(Status::VerificationFailed)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Status> {
    let regime: Regime = args.regime.parse().context("--regime")?;
    let p1: SchattenExponent = args.p1.parse().context("--p1")?;
    let pm1: SchattenExponent = args.pm1.parse().context("--pm1")?;
    let dims = args
        .dims
        .iter()
        .filter(|d| !d.trim().is_empty())
        .map(|d| d.trim().parse::<usize>().map_err(|_| moi_core::Error::InvalidInput(format!("bad dimension {d:?}"))))
        .collect::<std::result::Result<Vec<_>, _>>()
        .context("--dims")?;
    let s_values = args.s.iter().map(|s| s.parse::<SValue>()).collect::<Result<Vec<_>>>().context("--s")?;
    let template = SweepTemplate::new(args.arity, regime, p1, pm1)?;
    let csv = sweep_csv(&template, &dims, &s_values)?;
    write_output(args.out.as_deref(), &csv)?;
    Ok(Status::Success)
}
