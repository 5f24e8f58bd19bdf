//! Both sides of the Schatten-class inequalities on concrete instances.
//!
//! Right-hand sides use the norm of the given representation, which is an
//! upper bound for the (infimal) tensor norm. A report that holds is therefore
//! a sound witness of the inequality. Exponents outside a theorem's hypotheses
//! are rejected with [`Error::ExponentRange`] instead of producing a report.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::integrand::{HaagerupLikeKind, Integrand};
use crate::linalg::{schatten_norm, ComplexMatrix, SchattenExponent};
use crate::moi::{eval_haagerup, eval_haagerup_like, eval_projective, lemma_row_matrix, MoiInstance};

/// Default relative slack for `holds`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Slack for the `Σ A_j*A_j ≤ I` normalization re-check.
const NORMALIZATION_SLACK: f64 = 1e-10;

// rounding slack when comparing sums of reciprocals against 1/2 and 1
const RECIPROCAL_SLACK: f64 = 4.0 * f64::EPSILON;

/// Which inequality a report checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TheoremTag {
    /// Projective integrand, all operators bounded.
    ProjOpNorm,
    /// Projective integrand, one operator in `S_p`, the rest bounded.
    ProjSp,
    /// Projective integrand, operators in `S_{p_i}` with `Σ 1/p_i ≤ 1`.
    ProjPq,
    HaagerupMain,
    LemmaRow,
    HlikeFirst,
    HlikeSecond,
    HlikeQuad1,
    HlikeQuad2,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 9] = [
        TheoremTag::ProjOpNorm,
        TheoremTag::ProjSp,
        TheoremTag::ProjPq,
        TheoremTag::HaagerupMain,
        TheoremTag::LemmaRow,
        TheoremTag::HlikeFirst,
        TheoremTag::HlikeSecond,
        TheoremTag::HlikeQuad1,
        TheoremTag::HlikeQuad2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremTag::ProjOpNorm => "proj-op-norm",
            TheoremTag::ProjSp => "proj-sp",
            TheoremTag::ProjPq => "proj-pq",
            TheoremTag::HaagerupMain => "haagerup-main",
            TheoremTag::LemmaRow => "lemma-row",
            TheoremTag::HlikeFirst => "hlike-first",
            TheoremTag::HlikeSecond => "hlike-second",
            TheoremTag::HlikeQuad1 => "hlike-quad-1",
            TheoremTag::HlikeQuad2 => "hlike-quad-2",
        }
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub tag: TheoremTag,
    /// The exponents the hypotheses were checked against, in operator order.
    pub exponents: Vec<SchattenExponent>,
    /// Exponent of the Schatten class the left-hand side is measured in.
    pub r: SchattenExponent,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, with `0/0 = 0`.
    pub ratio: f64,
    pub holds: bool,
    pub tol: f64,
}

impl BoundReport {
    pub fn new(
        tag: TheoremTag,
        exponents: Vec<SchattenExponent>,
        r: SchattenExponent,
        lhs: f64,
        rhs: f64,
        tol: f64,
    ) -> Self {
        let ratio = bound_ratio(lhs, rhs);
        BoundReport { tag, exponents, r, lhs, rhs, ratio, holds: ratio <= 1.0 + tol, tol }
    }
}

/// `lhs / rhs` with `0/0 = 0` and `x/0 = ∞` for `x > 0`.
pub fn bound_ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn require_at_least_two(name: &str, p: SchattenExponent) -> Result<()> {
    if p.at_least(2.0) {
        Ok(())
    } else {
        Err(Error::ExponentRange(format!("{name} = {p} violates {name} >= 2")))
    }
}

fn require_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("tolerance must be finite and >= 0, got {tol}")))
    }
}

/// `1/r = 1/p + 1/q` with `r ∈ [1, 2]`.
fn r_in_one_two(p: SchattenExponent, q: SchattenExponent) -> Result<SchattenExponent> {
    let s = p.reciprocal() + q.reciprocal();
    if s < 0.5 - RECIPROCAL_SLACK {
        return Err(Error::ExponentRange(format!("1/p + 1/q = {s} < 1/2 (p = {p}, q = {q})")));
    }
    if s > 1.0 + RECIPROCAL_SLACK {
        return Err(Error::ExponentRange(format!("1/p + 1/q = {s} > 1 (p = {p}, q = {q})")));
    }
    SchattenExponent::harmonic_sum(&[p, q])
}

fn norm(m: &ComplexMatrix, p: SchattenExponent) -> Result<f64> {
    schatten_norm(m, p)
}

/// Projective integrand with `T_i ∈ S_{p_i}` and `Σ 1/p_i ≤ 1`:
/// `‖W‖_{S_r} ≤ ‖Ψ‖ Π ‖T_i‖_{S_{p_i}}`, `1/r = Σ 1/p_i`.
pub fn check_projective(inst: &MoiInstance, exponents: &[SchattenExponent], tol: f64) -> Result<BoundReport> {
    require_tol(tol)?;
    if !matches!(inst.integrand(), Integrand::Projective(_)) {
        return Err(Error::InvalidInput(String::from("check_projective needs a projective integrand")));
    }
    if exponents.len() != inst.operators().len() {
        return Err(Error::ShapeMismatch(format!(
            "{} exponents for {} operators",
            exponents.len(),
            inst.operators().len()
        )));
    }
    let s: f64 = exponents.iter().map(|p| p.reciprocal()).sum();
    if s > 1.0 + RECIPROCAL_SLACK {
        return Err(Error::ExponentRange(format!("sum of reciprocal exponents {s} exceeds 1")));
    }
    let r = SchattenExponent::harmonic_sum(exponents)?;
    let finite = exponents.iter().filter(|p| !p.is_infinite()).count();
    let tag = match finite {
        0 => TheoremTag::ProjOpNorm,
        1 => TheoremTag::ProjSp,
        _ => TheoremTag::ProjPq,
    };
    let w = eval_projective(inst)?;
    let lhs = norm(&w, r)?;
    let mut rhs = inst.integrand().rep_norm_bound();
    for (t, &p) in inst.operators().iter().zip(exponents) {
        rhs *= norm(t, p)?;
    }
    Ok(BoundReport::new(tag, exponents.to_vec(), r, lhs, rhs, tol))
}

/// Haagerup chain with `T_1 ∈ S_p`, `T_{m−1} ∈ S_q`, `p, q ≥ 2`, the middle
/// operators bounded: `‖W‖_{S_r} ≤ ‖Ψ‖ ‖T_1‖_{S_p} Π‖T_i‖ ‖T_{m−1}‖_{S_q}`.
pub fn check_haagerup_main(
    inst: &MoiInstance,
    p: SchattenExponent,
    q: SchattenExponent,
    tol: f64,
) -> Result<BoundReport> {
    require_tol(tol)?;
    if !matches!(inst.integrand(), Integrand::Haagerup(_)) {
        return Err(Error::InvalidInput(String::from("check_haagerup_main needs a haagerup integrand")));
    }
    let m = inst.arity();
    if m < 3 {
        return Err(Error::InvalidInput(format!("check_haagerup_main needs arity >= 3, got {m}")));
    }
    require_at_least_two("p", p)?;
    require_at_least_two("q", q)?;
    let r = SchattenExponent::harmonic_sum(&[p, q])?;
    let ops = inst.operators();
    let w = eval_haagerup(inst)?;
    let lhs = norm(&w, r)?;
    let middle: f64 = ops[1..m - 2].iter().map(ComplexMatrix::op_norm).product();
    let rhs = inst.integrand().rep_norm_bound() * norm(&ops[0], p)? * middle * norm(&ops[m - 2], q)?;
    let mut exponents = vec![p];
    exponents.extend(core::iter::repeat_n(SchattenExponent::INFINITY, m - 3));
    exponents.push(q);
    Ok(BoundReport::new(TheoremTag::HaagerupMain, exponents, r, lhs, rhs, tol))
}

/// `‖(A_0T, A_1T, …)‖_{S_p} ≤ ‖T‖_{S_p}` for `p ∈ [2, ∞]`.
///
/// The blocks must satisfy `‖Σ A_j*A_j‖ ≤ 1` and `‖Σ A_jA_j*‖ ≤ 1`; the
/// second condition is what the `p = ∞` endpoint actually uses and coincides
/// with the first for normal blocks such as spectral integrals.
pub fn check_lemma_row(
    blocks: &[ComplexMatrix],
    t: &ComplexMatrix,
    p: SchattenExponent,
    tol: f64,
) -> Result<BoundReport> {
    require_tol(tol)?;
    require_at_least_two("p", p)?;
    if blocks.is_empty() {
        return Err(Error::InvalidInput(String::from("lemma row needs at least one block")));
    }
    let n = blocks[0].rows();
    if blocks.iter().any(|a| a.rows() != n || a.cols() != n) {
        return Err(Error::ShapeMismatch(String::from("blocks must be square of a common size")));
    }
    let mut left = ComplexMatrix::zeros(n, n);
    let mut right = ComplexMatrix::zeros(n, n);
    for a in blocks {
        left = &left + &(&a.adjoint() * a);
        right = &right + &(a * &a.adjoint());
    }
    let (l, r) = (left.op_norm(), right.op_norm());
    if l > 1.0 + NORMALIZATION_SLACK {
        return Err(Error::Precondition(format!("‖Σ A_j*A_j‖ = {l} exceeds 1")));
    }
    if r > 1.0 + NORMALIZATION_SLACK {
        return Err(Error::Precondition(format!("‖Σ A_jA_j*‖ = {r} exceeds 1")));
    }
    let row = lemma_row_matrix(blocks, t)?;
    let lhs = norm(&row, p)?;
    let rhs = norm(t, p)?;
    Ok(BoundReport::new(TheoremTag::LemmaRow, vec![p], p, lhs, rhs, tol))
}

/// Exponent gate for [`check_haagerup_like`]: the report tag, the exponent
/// of each operator in order, and `r`.
pub fn haagerup_like_hypotheses(
    kind: HaagerupLikeKind,
    p: SchattenExponent,
    q: SchattenExponent,
) -> Result<(TheoremTag, Vec<SchattenExponent>, SchattenExponent)> {
    let inf = SchattenExponent::INFINITY;
    let (tag, exponents) = match kind {
        HaagerupLikeKind::FirstKindTriple => {
            require_at_least_two("q", q)?;
            (TheoremTag::HlikeFirst, vec![p, q])
        }
        HaagerupLikeKind::SecondKindTriple => {
            require_at_least_two("p", p)?;
            (TheoremTag::HlikeSecond, vec![p, q])
        }
        HaagerupLikeKind::FirstKindQuadruple => {
            require_at_least_two("q", q)?;
            (TheoremTag::HlikeQuad1, vec![p, q, inf])
        }
        HaagerupLikeKind::SecondKindQuadruple => {
            require_at_least_two("p", p)?;
            (TheoremTag::HlikeQuad2, vec![inf, p, q])
        }
    };
    let r = r_in_one_two(p, q)?;
    Ok((tag, exponents, r))
}

/// Haagerup-like integrands. The roles of `p` and `q` depend on the kind:
///
/// * first kind, three factors: `T ∈ S_p`, `R ∈ S_q`, `q ≥ 2`
/// * second kind, three factors: `T ∈ S_p`, `R ∈ S_q`, `p ≥ 2`
/// * first kind, four factors: `T_1 ∈ S_p`, `T_2 ∈ S_q`, `q ≥ 2`, `T_3` bounded
/// * second kind, four factors: `T_1` bounded, `T_2 ∈ S_p`, `p ≥ 2`, `T_3 ∈ S_q`
///
/// and always `1/r = 1/p + 1/q ∈ [1/2, 1]`. Bounded operators enter the
/// right-hand side through their operator norm.
pub fn check_haagerup_like(
    inst: &MoiInstance,
    p: SchattenExponent,
    q: SchattenExponent,
    tol: f64,
) -> Result<BoundReport> {
    require_tol(tol)?;
    let kind = match inst.integrand() {
        Integrand::HaagerupLike(rep) => rep.kind(),
        _ => return Err(Error::InvalidInput(String::from("check_haagerup_like needs a haagerup_like integrand"))),
    };
    let ops = inst.operators();
    let (tag, exponents, r) = haagerup_like_hypotheses(kind, p, q)?;
    let w = eval_haagerup_like(inst)?;
    let lhs = norm(&w, r)?;
    let mut rhs = inst.integrand().rep_norm_bound();
    for (t, &e) in ops.iter().zip(&exponents) {
        rhs *= norm(t, e)?;
    }
    Ok(BoundReport::new(tag, exponents, r, lhs, rhs, tol))
}
