//! Seeded verification campaigns: evaluator agreement, duality and every
//! Schatten bound, each on independently seeded random instances.

use std::fmt::Write as _;
use std::thread;

use anyhow::{bail, Result};
use moi_core::bounds::{
    check_haagerup_like, check_haagerup_main, check_lemma_row, check_projective, haagerup_like_hypotheses, BoundReport,
};
use moi_core::integrand::{HaagerupChainRep, HaagerupLikeKind, Integrand};
use moi_core::linalg::schatten_norm;
use moi_core::moi::{
    duality_functional, eval_haagerup, eval_haagerup_block, eval_haagerup_like, eval_oracle_with_cap, eval_projective,
    eval_projective_via_haagerup, MoiInstance,
};
use moi_core::random::{
    blocks_from_family, pick, random_instance, random_matrix, random_normalized_family, random_operator,
    InstanceLimits, RepClass,
};
use moi_core::spectral::{FiniteSpectralMeasure, VectorTable};
use moi_core::{Complex64, ComplexMatrix, Error, SchattenExponent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::json::{Exponents, InstanceFile, ReportJson};

/// Random matrices `Q` probed per duality trial.
const DUALITY_PROBES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    OracleEquivalence,
    Duality,
    ProjectiveBounds,
    HaagerupMain,
    LemmaRow,
    HaagerupLikeBounds,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::OracleEquivalence,
        Suite::Duality,
        Suite::ProjectiveBounds,
        Suite::HaagerupMain,
        Suite::LemmaRow,
        Suite::HaagerupLikeBounds,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::OracleEquivalence => "oracle-equivalence",
            Suite::Duality => "duality",
            Suite::ProjectiveBounds => "proj-bounds",
            Suite::HaagerupMain => "haagerup-main",
            Suite::LemmaRow => "lemma-row",
            Suite::HaagerupLikeBounds => "hlike-bounds",
        }
    }

    /// Agreement suites report relative deviations, bound suites report
    /// `lhs / rhs`.
    fn is_agreement(self) -> bool {
        matches!(self, Suite::OracleEquivalence | Suite::Duality)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub seed: u64,
    pub trials: usize,
    /// Inclusive range of Hilbert-space dimensions.
    pub dims: (usize, usize),
    /// Inclusive range of chain widths (and block counts for the row lemma).
    pub widths: (usize, usize),
    /// Pool for the projective and Haagerup-like bounds; each trial draws
    /// exponents satisfying the theorem it checks.
    pub exponents: Vec<SchattenExponent>,
    /// Exponents for the Haagerup chain bound and the row lemma; all must be
    /// at least 2.
    pub main_exponents: Vec<SchattenExponent>,
    /// Slack for the bound suites.
    pub tol: f64,
    /// Relative tolerance for the agreement suites.
    pub equiv_tol: f64,
    pub tuple_cap: u128,
}

impl CampaignConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        let e = |p: f64| SchattenExponent::finite(p).expect("positive");
        let inf = SchattenExponent::INFINITY;
        CampaignConfig {
            seed,
            trials,
            dims: (1, 4),
            widths: (1, 3),
            exponents: vec![e(1.0), e(1.5), e(2.0), e(3.0), e(4.0), inf],
            main_exponents: vec![e(2.0), e(3.0), e(4.0), inf],
            tol: moi_core::bounds::DEFAULT_TOL,
            equiv_tol: 1e-9,
            tuple_cap: moi_core::moi::DEFAULT_TUPLE_CAP,
        }
    }

    /// Rejects configurations that cannot run as asked. Exponent problems
    /// surface as [`Error::ExponentRange`], an oracle that would exceed its
    /// cap as [`Error::TupleCapExceeded`].
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!(Error::InvalidInput(String::from("trials must be at least 1")));
        }
        for (name, (lo, hi)) in [("dims", self.dims), ("widths", self.widths)] {
            if lo == 0 || lo > hi {
                bail!(Error::InvalidInput(format!("{name} range {lo}..{hi} must satisfy 1 <= lo <= hi")));
            }
        }
        if self.exponents.is_empty() || self.main_exponents.is_empty() {
            bail!(Error::InvalidInput(String::from("exponent sets must be non-empty")));
        }
        for &p in &self.main_exponents {
            if !p.at_least(2.0) {
                bail!(Error::ExponentRange(format!("haagerup-main: p = {p} violates p >= 2")));
            }
        }
        for kind in HaagerupLikeKind::ALL {
            if admissible_pairs(&self.exponents, kind).is_empty() {
                bail!(Error::ExponentRange(format!(
                    "hlike-bounds: no exponent pair in the set satisfies the hypotheses for {kind:?}"
                )));
            }
        }
        for (name, t) in [("tol", self.tol), ("equiv-tol", self.equiv_tol)] {
            if !(t.is_finite() && t >= 0.0) {
                bail!(Error::InvalidInput(format!("{name} must be finite and >= 0, got {t}")));
            }
        }
        let tuples = (self.dims.1 as u128).pow(4);
        if tuples > self.tuple_cap {
            bail!(Error::TupleCapExceeded { tuples, cap: self.tuple_cap });
        }
        Ok(())
    }

    fn limits(&self) -> InstanceLimits {
        InstanceLimits {
            min_dim: self.dims.0,
            max_dim: self.dims.1,
            min_width: self.widths.0,
            max_width: self.widths.1,
            max_terms: self.widths.1,
        }
    }
}

fn admissible_pairs(pool: &[SchattenExponent], kind: HaagerupLikeKind) -> Vec<(SchattenExponent, SchattenExponent)> {
    let mut pairs = Vec::new();
    for &p in pool {
        for &q in pool {
            if haagerup_like_hypotheses(kind, p, q).is_ok() {
                pairs.push((p, q));
            }
        }
    }
    pairs
}

/// The generator for one trial of one suite: a fixed stream per
/// `(suite, trial)` so suites neither share nor shift each other's draws.
pub fn trial_rng(seed: u64, suite: Suite, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = Suite::ALL.iter().position(|&s| s == suite).expect("listed suite") as u64;
    rng.set_stream((index << 32) | trial as u64);
    rng
}

/// Everything needed to rerun a failing trial with `moi eval`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproFile {
    pub suite: &'static str,
    pub seed: u64,
    pub trial: usize,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportJson>,
    #[serde(flatten)]
    pub instance: InstanceFile,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub trials: usize,
    pub worst: f64,
    pub limit: f64,
    pub passed: bool,
    pub failure: Option<ReproFile>,
}

struct Trial {
    instance: MoiInstance,
    exponents: Option<Exponents>,
    note: Option<&'static str>,
    outcome: std::result::Result<Measured, Error>,
}

struct Measured {
    metric: f64,
    report: Option<BoundReport>,
}

impl Trial {
    fn new(instance: MoiInstance, outcome: moi_core::Result<Measured>) -> Self {
        Trial { instance, exponents: None, note: None, outcome }
    }

    fn with_exponents(mut self, p: SchattenExponent, q: Option<SchattenExponent>) -> Self {
        self.exponents = Some(Exponents { p, q });
        self
    }
}

fn bound(report: moi_core::Result<BoundReport>) -> moi_core::Result<Measured> {
    report.map(|r| Measured { metric: r.ratio, report: Some(r) })
}

const CLASSES: [RepClass; 6] = [
    RepClass::Projective,
    RepClass::Haagerup,
    RepClass::HaagerupLike(HaagerupLikeKind::FirstKindTriple),
    RepClass::HaagerupLike(HaagerupLikeKind::SecondKindTriple),
    RepClass::HaagerupLike(HaagerupLikeKind::FirstKindQuadruple),
    RepClass::HaagerupLike(HaagerupLikeKind::SecondKindQuadruple),
];

fn oracle_trial(cfg: &CampaignConfig, rng: &mut ChaCha8Rng, trial: usize) -> Trial {
    let arity = rng.gen_range(2..=4);
    let inst = random_instance(rng, CLASSES[trial % CLASSES.len()], arity, cfg.limits());
    let outcome = (|| {
        let reference = eval_oracle_with_cap(&inst, cfg.tuple_cap)?;
        let paths = match inst.integrand() {
            Integrand::Projective(_) => vec![eval_projective(&inst)?, eval_projective_via_haagerup(&inst)?],
            Integrand::Haagerup(_) => vec![eval_haagerup(&inst)?, eval_haagerup_block(&inst)?],
            Integrand::HaagerupLike(_) => vec![eval_haagerup_like(&inst)?],
        };
        let scale = inst.scale();
        let metric = paths.iter().map(|w| w.distance(&reference) / scale).fold(0.0, f64::max);
        Ok(Measured { metric, report: None })
    })();
    Trial::new(inst, outcome)
}

fn duality_trial(cfg: &CampaignConfig, rng: &mut ChaCha8Rng, trial: usize) -> Trial {
    let kind = HaagerupLikeKind::ALL[trial % 4];
    let inst = random_instance(rng, RepClass::HaagerupLike(kind), kind.arity(), cfg.limits());
    let probes: Vec<ComplexMatrix> = (0..DUALITY_PROBES).map(|_| random_matrix(rng, inst.dim(), inst.dim())).collect();
    let outcome = (|| {
        let w = eval_haagerup_like(&inst)?;
        let size = inst.scale().max(w.op_norm());
        let mut metric: f64 = 0.0;
        for q in &probes {
            let direct = (&w * q).trace();
            let dual = duality_functional(&inst, q)?;
            let denom = size * schatten_norm(q, SchattenExponent::ONE)?;
            metric = metric.max((direct - dual).norm() / denom.max(f64::MIN_POSITIVE));
        }
        Ok(Measured { metric, report: None })
    })();
    Trial::new(inst, outcome)
}

/// Draws one exponent per operator with `Σ 1/p_i ≤ 1`; falls back to `∞`
/// (operator norm) once the budget is spent.
fn projective_exponents(rng: &mut ChaCha8Rng, pool: &[SchattenExponent], count: usize) -> Vec<SchattenExponent> {
    let mut budget = 1.0;
    (0..count)
        .map(|_| {
            let fits: Vec<SchattenExponent> =
                pool.iter().copied().filter(|p| p.reciprocal() <= budget + 1e-12).collect();
            let p = if fits.is_empty() { SchattenExponent::INFINITY } else { *pick(rng, &fits) };
            budget -= p.reciprocal();
            p
        })
        .collect()
}

fn projective_trial(cfg: &CampaignConfig, rng: &mut ChaCha8Rng, _trial: usize) -> Trial {
    let arity = rng.gen_range(2..=4);
    let inst = random_instance(rng, RepClass::Projective, arity, cfg.limits());
    let exps = projective_exponents(rng, &cfg.exponents, arity - 1);
    let outcome = bound(check_projective(&inst, &exps, cfg.tol));
    let q = (exps.len() > 1).then(|| exps[exps.len() - 1]);
    Trial::new(inst, outcome).with_exponents(exps[0], q)
}

fn haagerup_main_trial(cfg: &CampaignConfig, rng: &mut ChaCha8Rng, _trial: usize) -> Trial {
    let arity = rng.gen_range(3..=4);
    let inst = random_instance(rng, RepClass::Haagerup, arity, cfg.limits());
    let p = *pick(rng, &cfg.main_exponents);
    let q = *pick(rng, &cfg.main_exponents);
    Trial::new(inst.clone(), bound(check_haagerup_main(&inst, p, q, cfg.tol))).with_exponents(p, Some(q))
}

/// The row lemma is not itself an operator integral. The reproduction file
/// carries its data as the two-factor chain `Σ_j A_j T`, whose head holds the
/// block symbols `α_j`.
fn lemma_row_trial(cfg: &CampaignConfig, rng: &mut ChaCha8Rng, _trial: usize) -> Trial {
    let dim = rng.gen_range(cfg.dims.0..=cfg.dims.1);
    let count = rng.gen_range(cfg.widths.0..=cfg.widths.1);
    let (e, alpha) = random_normalized_family(rng, dim, count);
    let t = random_operator(rng, dim);
    let p = *pick(rng, &cfg.main_exponents);
    let blocks = blocks_from_family(&e, &alpha);
    let ones = VectorTable::from_fn(1, count, |_, _| Complex64::new(1.0, 0.0)).expect("width >= 1");
    let chain = HaagerupChainRep::new(alpha, Vec::new(), ones).expect("matching widths");
    let inst = MoiInstance::new(vec![e, FiniteSpectralMeasure::trivial(dim)], vec![t.clone()], chain.into())
        .expect("consistent instance");
    let mut trial = Trial::new(inst, bound(check_lemma_row(&blocks, &t, p, cfg.tol))).with_exponents(p, None);
    trial.note = Some("row lemma data: blocks A_j = ∫ head_j dE_1 applied to the single operator T");
    trial
}

fn haagerup_like_trial(cfg: &CampaignConfig, rng: &mut ChaCha8Rng, trial: usize) -> Trial {
    let kind = HaagerupLikeKind::ALL[trial % 4];
    let inst = random_instance(rng, RepClass::HaagerupLike(kind), kind.arity(), cfg.limits());
    let pairs = admissible_pairs(&cfg.exponents, kind);
    let (p, q) = *pick(rng, &pairs);
    Trial::new(inst.clone(), bound(check_haagerup_like(&inst, p, q, cfg.tol))).with_exponents(p, Some(q))
}

fn run_suite(cfg: &CampaignConfig, suite: Suite) -> Result<SuiteSummary> {
    let run: fn(&CampaignConfig, &mut ChaCha8Rng, usize) -> Trial = match suite {
        Suite::OracleEquivalence => oracle_trial,
        Suite::Duality => duality_trial,
        Suite::ProjectiveBounds => projective_trial,
        Suite::HaagerupMain => haagerup_main_trial,
        Suite::LemmaRow => lemma_row_trial,
        Suite::HaagerupLikeBounds => haagerup_like_trial,
    };
    let limit = if suite.is_agreement() { cfg.equiv_tol } else { 1.0 + cfg.tol };
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, suite, trial);
        let t = run(cfg, &mut rng, trial);
        let (passed, detail, report) = match t.outcome {
            Ok(m) => {
                worst = worst.max(m.metric);
                let passed = match &m.report {
                    Some(r) => r.holds,
                    None => m.metric <= limit,
                };
                (passed, format!("measured {:e} against limit {limit:e}", m.metric), m.report)
            }
            Err(e) if e.is_cap() => return Err(e.into()),
            Err(e) => {
                worst = f64::INFINITY;
                (false, e.to_string(), None)
            }
        };
        if !passed && failure.is_none() {
            let detail = match t.note {
                Some(note) => format!("{detail}; {note}"),
                None => detail,
            };
            failure = Some(ReproFile {
                suite: suite.as_str(),
                seed: cfg.seed,
                trial,
                detail,
                report: report.as_ref().map(ReportJson::from),
                instance: InstanceFile::from_instance(&t.instance, t.exponents),
            });
        }
    }
    Ok(SuiteSummary { suite, trials: cfg.trials, worst, limit, passed: failure.is_none(), failure })
}

/// Runs every suite, one worker per suite, and returns the summaries in
/// [`Suite::ALL`] order.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Vec<SuiteSummary>> {
    cfg.validate()?;
    thread::scope(|scope| {
        let workers: Vec<_> = Suite::ALL.iter().map(|&suite| scope.spawn(move || run_suite(cfg, suite))).collect();
        workers.into_iter().map(|w| w.join().expect("suite worker panicked")).collect()
    })
}

/// Fixed-width summary table, one row per suite.
pub fn summary_table(summaries: &[SuiteSummary]) -> String {
    let mut out = format!("{:<20}{:>8}  {:>18}  {:>18}  {}\n", "suite", "trials", "worst", "limit", "pass");
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<20}{:>8}  {:>18.9e}  {:>18.9e}  {}",
            s.suite.as_str(),
            s.trials,
            s.worst,
            s.limit,
            if s.passed { "yes" } else { "NO" }
        );
    }
    out
}
