//! Multiple operator integrals
//! `W = ∫⋯∫ Ψ dE_1 T_1 dE_2 ⋯ T_{m−1} dE_m` on finite spectral measures.
//!
//! Every representation class has its own evaluator. All of them must agree
//! with [`eval_oracle`], the exhaustive atomwise sum
//! `Σ Ψ(x_{i_1},…,x_{i_m}) P_{i_1} T_1 P_{i_2} ⋯ T_{m−1} P_{i_m}`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrand::{
    embed_projective_in_haagerup, AtomTuples, HaagerupChainRep, HaagerupLikeRep, Integrand, ProjectiveRep,
};
use crate::linalg::ComplexMatrix;
use crate::spectral::{FiniteSpectralMeasure, MatrixTable, VectorTable};

/// Default refusal threshold for [`eval_oracle`].
pub const DEFAULT_TUPLE_CAP: u128 = 1_000_000;

/// Default bound on the side of any block matrix built by
/// [`eval_haagerup_block`].
pub const DEFAULT_BLOCK_CAP: usize = 4096;

/// Absolute floor of [`MoiInstance::scale`].
pub const SCALE_FLOOR: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

type Mat = DMatrix<Complex64>;

/// Measures, operators and integrand of one multiple operator integral.
#[derive(Clone, Debug, PartialEq)]
pub struct MoiInstance {
    measures: Vec<FiniteSpectralMeasure>,
    operators: Vec<ComplexMatrix>,
    integrand: Integrand,
}

impl MoiInstance {
    pub fn new(
        measures: Vec<FiniteSpectralMeasure>,
        operators: Vec<ComplexMatrix>,
        integrand: Integrand,
    ) -> Result<Self> {
        let m = integrand.arity();
        if measures.len() != m {
            return Err(Error::ShapeMismatch(format!("{} measures for an integrand of arity {m}", measures.len())));
        }
        if operators.len() + 1 != m {
            return Err(Error::ShapeMismatch(format!(
                "{} operators for an integrand of arity {m}, expected {}",
                operators.len(),
                m - 1
            )));
        }
        let dim = measures[0].dim();
        if measures.iter().any(|e| e.dim() != dim) {
            return Err(Error::ShapeMismatch(String::from("measures act on different dimensions")));
        }
        for (i, t) in operators.iter().enumerate() {
            if t.rows() != dim || t.cols() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "operator {i} is {}x{}, expected {dim}x{dim}",
                    t.rows(),
                    t.cols()
                )));
            }
        }
        let counts = integrand.atom_counts();
        for (i, (e, &c)) in measures.iter().zip(&counts).enumerate() {
            if e.atom_count() != c {
                return Err(Error::ShapeMismatch(format!(
                    "factor {i}: integrand has {c} atoms, measure has {}",
                    e.atom_count()
                )));
            }
        }
        Ok(MoiInstance { measures, operators, integrand })
    }

    pub fn arity(&self) -> usize {
        self.measures.len()
    }

    pub fn dim(&self) -> usize {
        self.measures[0].dim()
    }

    pub fn measures(&self) -> &[FiniteSpectralMeasure] {
        &self.measures
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn integrand(&self) -> &Integrand {
        &self.integrand
    }

    /// Same measures and operators, different integrand.
    pub fn with_integrand(&self, integrand: Integrand) -> Result<Self> {
        Self::new(self.measures.clone(), self.operators.clone(), integrand)
    }

    /// Same measures and integrand, different operators.
    pub fn with_operators(&self, operators: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(self.measures.clone(), operators, self.integrand.clone())
    }

    /// `rep_norm_bound · Π‖T_i‖_{S_∞}`, at least [`SCALE_FLOOR`]. Relative
    /// tolerances are measured against this.
    pub fn scale(&self) -> f64 {
        let ops: f64 = self.operators.iter().map(ComplexMatrix::op_norm).product();
        (self.integrand.rep_norm_bound() * ops).max(SCALE_FLOOR)
    }
}

/// The evaluator appropriate to the integrand's representation class.
pub fn evaluate(inst: &MoiInstance) -> Result<ComplexMatrix> {
    match inst.integrand() {
        Integrand::Projective(_) => eval_projective(inst),
        Integrand::Haagerup(_) => eval_haagerup(inst),
        Integrand::HaagerupLike(_) => eval_haagerup_like(inst),
    }
}

/// Exhaustive atomwise sum with the default cap.
pub fn eval_oracle(inst: &MoiInstance) -> Result<ComplexMatrix> {
    eval_oracle_with_cap(inst, DEFAULT_TUPLE_CAP)
}

/// Exhaustive atomwise sum; refuses when the number of atom tuples exceeds
/// `cap`.
pub fn eval_oracle_with_cap(inst: &MoiInstance, cap: u128) -> Result<ComplexMatrix> {
    let counts = inst.integrand().atom_counts();
    let tuples = AtomTuples::total(&counts);
    if tuples > cap {
        return Err(Error::TupleCapExceeded { tuples, cap });
    }
    let n = inst.dim();
    let mut acc = Mat::zeros(n, n);
    let mut tuple = vec![0; counts.len()];
    let first = inst.measures()[0].atoms();
    for (i, a) in first.iter().enumerate() {
        tuple[0] = i;
        oracle_step(inst, 1, a.projection.as_dmatrix(), &mut tuple, &mut acc);
    }
    Ok(ComplexMatrix::wrap(acc))
}

// depth-first over tuples, carrying the prefix P_{i_1} T_1 ⋯ P_{i_level}
fn oracle_step(inst: &MoiInstance, level: usize, prefix: &Mat, tuple: &mut Vec<usize>, acc: &mut Mat) {
    if level == inst.arity() {
        let psi = inst.integrand().eval_unchecked(tuple);
        if psi != ZERO {
            *acc += prefix * psi;
        }
        return;
    }
    let pt = prefix * inst.operators()[level - 1].as_dmatrix();
    for (i, a) in inst.measures()[level].atoms().iter().enumerate() {
        tuple[level] = i;
        let next = &pt * a.projection.as_dmatrix();
        oracle_step(inst, level + 1, &next, tuple, acc);
    }
}

fn integrate(e: &FiniteSpectralMeasure, values: &[Complex64]) -> Mat {
    e.integrate(values).expect("atom counts checked by the instance").into_dmatrix()
}

fn vector_integrals(e: &FiniteSpectralMeasure, t: &VectorTable) -> Vec<Mat> {
    (0..t.width()).map(|j| integrate(e, &t.component(j))).collect()
}

/// `B_{jk} = ∫β_{jk} dE`, `None` where `β_{jk}` vanishes identically.
fn matrix_integrals(e: &FiniteSpectralMeasure, t: &MatrixTable) -> Vec<Vec<Option<Mat>>> {
    (0..t.rows())
        .map(|j| {
            (0..t.cols())
                .map(|k| if t.entry_vanishes(j, k) { None } else { Some(integrate(e, &t.entry(j, k))) })
                .collect()
        })
        .collect()
}

/// `Σ_n (∫φ_{n,1} dE_1) T_1 (∫φ_{n,2} dE_2) ⋯ T_{m−1} (∫φ_{n,m} dE_m)`.
pub fn eval_projective(inst: &MoiInstance) -> Result<ComplexMatrix> {
    let rep = match inst.integrand() {
        Integrand::Projective(r) => r,
        other => return Err(wrong_class("projective", other)),
    };
    Ok(ComplexMatrix::wrap(projective_sum(inst, rep)))
}

fn projective_sum(inst: &MoiInstance, rep: &ProjectiveRep) -> Mat {
    let n = inst.dim();
    let mut acc = Mat::zeros(n, n);
    for term in rep.terms() {
        let mut w = integrate(&inst.measures()[0], term[0].values());
        for (i, f) in term.iter().enumerate().skip(1) {
            w = w * inst.operators()[i - 1].as_dmatrix() * integrate(&inst.measures()[i], f.values());
        }
        acc += w;
    }
    acc
}

fn wrong_class(expected: &str, got: &Integrand) -> Error {
    Error::InvalidInput(format!("expected a {expected} integrand, got {}", got.class_name()))
}

fn chain_of(inst: &MoiInstance) -> Result<&HaagerupChainRep> {
    match inst.integrand() {
        Integrand::Haagerup(r) => Ok(r),
        other => Err(wrong_class("haagerup", other)),
    }
}

/// `Σ A_{j_1} T_1 B_{j_1 j_2} T_2 ⋯ T_{m−1} Δ_{j_{m−1}}`, contracted left to
/// right.
pub fn eval_haagerup(inst: &MoiInstance) -> Result<ComplexMatrix> {
    let rep = chain_of(inst)?;
    Ok(ComplexMatrix::wrap(chain_sum(inst.measures(), inst.operators(), rep)))
}

fn chain_sum(measures: &[FiniteSpectralMeasure], ops: &[ComplexMatrix], rep: &HaagerupChainRep) -> Mat {
    let n = measures[0].dim();
    let m = measures.len();
    let t1 = ops[0].as_dmatrix();
    // row_j = Σ_{earlier indices} A T B ⋯ T, ending with an operator
    let mut row: Vec<Mat> = vector_integrals(&measures[0], rep.head()).into_iter().map(|a| a * t1).collect();
    for (i, mid) in rep.middles().iter().enumerate() {
        let b = matrix_integrals(&measures[i + 1], mid);
        let t = ops[i + 1].as_dmatrix();
        row = (0..mid.cols())
            .map(|k| {
                let mut s = Mat::zeros(n, n);
                for (j, r) in row.iter().enumerate() {
                    if let Some(bjk) = &b[j][k] {
                        s += r * bjk;
                    }
                }
                s * t
            })
            .collect();
    }
    let tail = vector_integrals(&measures[m - 1], rep.tail());
    let mut acc = Mat::zeros(n, n);
    for (r, d) in row.iter().zip(&tail) {
        acc += r * d;
    }
    acc
}

/// Block-matrix path `A(T_1) · B_2 · diag(T_2) ⋯ B_{m−1} · Δ(T_{m−1})` with
/// the default block cap.
pub fn eval_haagerup_block(inst: &MoiInstance) -> Result<ComplexMatrix> {
    eval_haagerup_block_with_cap(inst, DEFAULT_BLOCK_CAP)
}

/// Materializes the row `A(T_1) = (A_0T_1, A_1T_1, …)`, the block matrices
/// `{B_{jk}}` interleaved with block diagonals `diag(T_i, T_i, …)`, and the
/// column `(T_{m−1}Δ_0; T_{m−1}Δ_1; …)`, then multiplies them.
pub fn eval_haagerup_block_with_cap(inst: &MoiInstance, cap: usize) -> Result<ComplexMatrix> {
    let rep = chain_of(inst)?;
    let n = inst.dim();
    let m = inst.arity();
    let widths = rep.widths();
    if let Some(&w) = widths.iter().max() {
        let side = w.saturating_mul(n);
        if side > cap {
            return Err(Error::BlockCapExceeded { dim: side, cap });
        }
    }
    if widths.contains(&0) {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let ms = inst.measures();
    let ops = inst.operators();
    let blocks: Vec<ComplexMatrix> = vector_integrals(&ms[0], rep.head())
        .into_iter()
        .map(|a| ComplexMatrix::wrap(a * ops[0].as_dmatrix()))
        .collect();
    let mut w = ComplexMatrix::hstack(&blocks)?.into_dmatrix();
    for (i, mid) in rep.middles().iter().enumerate() {
        w *= block_matrix(&ms[i + 1], mid, n);
        if i + 2 < m - 1 {
            w *= block_diagonal(ops[i + 1].as_dmatrix(), mid.cols());
        }
    }
    let last = if m == 2 { None } else { Some(ops[m - 2].as_dmatrix()) };
    let column: Vec<ComplexMatrix> = vector_integrals(&ms[m - 1], rep.tail())
        .into_iter()
        .map(|d| {
            ComplexMatrix::wrap(match last {
                Some(t) => t * d,
                None => d,
            })
        })
        .collect();
    let column = ComplexMatrix::vstack(&column)?.into_dmatrix();
    Ok(ComplexMatrix::wrap(w * column))
}

fn block_matrix(e: &FiniteSpectralMeasure, table: &MatrixTable, n: usize) -> Mat {
    let mut out = Mat::zeros(table.rows() * n, table.cols() * n);
    let b = matrix_integrals(e, table);
    for (j, row) in b.iter().enumerate() {
        for (k, bjk) in row.iter().enumerate() {
            if let Some(bjk) = bjk {
                out.view_mut((j * n, k * n), (n, n)).copy_from(bjk);
            }
        }
    }
    out
}

fn block_diagonal(t: &Mat, copies: usize) -> Mat {
    let n = t.nrows();
    let mut out = Mat::zeros(copies * n, copies * n);
    for c in 0..copies {
        out.view_mut((c * n, c * n), (n, n)).copy_from(t);
    }
    out
}

/// The row matrix `(A_0T, A_1T, …)` as a `dim × (count·dim)` matrix.
pub fn lemma_row_matrix(blocks: &[ComplexMatrix], t: &ComplexMatrix) -> Result<ComplexMatrix> {
    if blocks.is_empty() {
        return Err(Error::InvalidInput(String::from("row matrix needs at least one block")));
    }
    let parts: Vec<ComplexMatrix> = blocks
        .iter()
        .map(|a| {
            if a.cols() != t.rows() {
                return Err(Error::ShapeMismatch(String::from("block and operator do not compose")));
            }
            Ok(a * t)
        })
        .collect::<Result<_>>()?;
    ComplexMatrix::hstack(&parts)
}

/// `Σ_{i,j} Ψ(x_i, y_j) P_i T Q_j` for a dense table `Ψ` of shape
/// `atoms(E_1) × atoms(E_2)`.
pub fn eval_double_schur(
    table: &DMatrix<Complex64>,
    e1: &FiniteSpectralMeasure,
    e2: &FiniteSpectralMeasure,
    t: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if table.nrows() != e1.atom_count() || table.ncols() != e2.atom_count() {
        return Err(Error::ShapeMismatch(format!(
            "table is {}x{}, measures have {} and {} atoms",
            table.nrows(),
            table.ncols(),
            e1.atom_count(),
            e2.atom_count()
        )));
    }
    if e1.dim() != e2.dim() || t.rows() != e1.dim() || t.cols() != e1.dim() {
        return Err(Error::ShapeMismatch(String::from("measures and operator act on different spaces")));
    }
    let n = e1.dim();
    let mut acc = Mat::zeros(n, n);
    for (i, a) in e1.atoms().iter().enumerate() {
        let pt = a.projection.as_dmatrix() * t.as_dmatrix();
        for (j, b) in e2.atoms().iter().enumerate() {
            let psi = table[(i, j)];
            if psi != ZERO {
                acc += &pt * b.projection.as_dmatrix() * psi;
            }
        }
    }
    Ok(ComplexMatrix::wrap(acc))
}

fn like_of(inst: &MoiInstance) -> Result<&HaagerupLikeRep> {
    match inst.integrand() {
        Integrand::HaagerupLike(r) => Ok(r),
        other => Err(wrong_class("haagerup_like", other)),
    }
}

fn sum_nonzero(parts: impl Iterator<Item = Mat>, n: usize) -> Mat {
    parts.fold(Mat::zeros(n, n), |acc, x| acc + x)
}

/// Haagerup-like integrals as the finite sums their duality definition
/// determines:
///
/// * first kind, three factors: `Σ A_j T B_k R Γ_{jk}`
/// * second kind, three factors: `Σ A_{jk} T B_j R Γ_k`
/// * first kind, four factors: `Σ A_l T_1 B_j T_2 Γ_{jk} T_3 Δ_{kl}`
/// * second kind, four factors: `Σ A_{jk} T_1 B_{kl} T_2 Γ_l T_3 Δ_j`
pub fn eval_haagerup_like(inst: &MoiInstance) -> Result<ComplexMatrix> {
    let rep = like_of(inst)?;
    let n = inst.dim();
    let ms = inst.measures();
    let t: Vec<&Mat> = inst.operators().iter().map(ComplexMatrix::as_dmatrix).collect();
    let w = match rep {
        HaagerupLikeRep::FirstKindTriple { alpha, beta, gamma } => {
            let a = vector_integrals(&ms[0], alpha);
            let b = vector_integrals(&ms[1], beta);
            let g = matrix_integrals(&ms[2], gamma);
            let tbr: Vec<Mat> = b.iter().map(|bk| t[0] * bk * t[1]).collect();
            sum_nonzero(
                a.iter().enumerate().map(|(j, aj)| {
                    let inner =
                        sum_nonzero(tbr.iter().enumerate().filter_map(|(k, x)| g[j][k].as_ref().map(|gjk| x * gjk)), n);
                    aj * inner
                }),
                n,
            )
        }
        HaagerupLikeRep::SecondKindTriple { alpha, beta, gamma } => {
            let a = matrix_integrals(&ms[0], alpha);
            let b = vector_integrals(&ms[1], beta);
            let g = vector_integrals(&ms[2], gamma);
            let tbr: Vec<Mat> = b.iter().map(|bj| t[0] * bj * t[1]).collect();
            sum_nonzero(
                (0..alpha.rows())
                    .flat_map(|j| (0..alpha.cols()).map(move |k| (j, k)))
                    .filter_map(|(j, k)| a[j][k].as_ref().map(|ajk| ajk * &tbr[j] * &g[k])),
                n,
            )
        }
        HaagerupLikeRep::FirstKindQuadruple { alpha, beta, gamma, delta } => {
            let a = vector_integrals(&ms[0], alpha);
            let b = vector_integrals(&ms[1], beta);
            let g = matrix_integrals(&ms[2], gamma);
            let d = matrix_integrals(&ms[3], delta);
            // right_l = Σ_{j,k} T_1 B_j T_2 Γ_{jk} T_3 Δ_{kl}
            let tb: Vec<Mat> = b.iter().map(|bj| t[0] * bj * t[1]).collect();
            let mid: Vec<Mat> = (0..gamma.cols())
                .map(|k| {
                    sum_nonzero(tb.iter().enumerate().filter_map(|(j, x)| g[j][k].as_ref().map(|gjk| x * gjk)), n)
                        * t[2]
                })
                .collect();
            sum_nonzero(
                a.iter().enumerate().map(|(l, al)| {
                    let right =
                        sum_nonzero(mid.iter().enumerate().filter_map(|(k, x)| d[k][l].as_ref().map(|dkl| x * dkl)), n);
                    al * right
                }),
                n,
            )
        }
        HaagerupLikeRep::SecondKindQuadruple { alpha, beta, gamma, delta } => {
            let a = matrix_integrals(&ms[0], alpha);
            let b = matrix_integrals(&ms[1], beta);
            let g = vector_integrals(&ms[2], gamma);
            let d = vector_integrals(&ms[3], delta);
            // tail_k = Σ_l T_1 B_{kl} T_2 Γ_l T_3
            let tg: Vec<Mat> = g.iter().map(|gl| t[1] * gl * t[2]).collect();
            let tail: Vec<Mat> = (0..beta.rows())
                .map(|k| {
                    t[0] * sum_nonzero(
                        tg.iter().enumerate().filter_map(|(l, x)| b[k][l].as_ref().map(|bkl| bkl * x)),
                        n,
                    )
                })
                .collect();
            sum_nonzero(
                (0..alpha.rows()).map(|j| {
                    sum_nonzero((0..alpha.cols()).filter_map(|k| a[j][k].as_ref().map(|ajk| ajk * &tail[k])), n) * &d[j]
                }),
                n,
            )
        }
    };
    Ok(ComplexMatrix::wrap(w))
}

/// The functional `Q ↦ trace(W Q)` evaluated through its defining formula:
/// the cyclically permuted integrand is a Haagerup chain, integrated with `Q`
/// inserted between the last and the first factor, then traced against the
/// remaining operator.
pub fn duality_functional(inst: &MoiInstance, q: &ComplexMatrix) -> Result<Complex64> {
    let rep = like_of(inst)?;
    let n = inst.dim();
    if q.rows() != n || q.cols() != n {
        return Err(Error::ShapeMismatch(format!("Q is {}x{}, expected {n}x{n}", q.rows(), q.cols())));
    }
    let (chain, order) = rep.cycled_chain();
    let measures: Vec<FiniteSpectralMeasure> = order.iter().map(|&i| inst.measures()[i].clone()).collect();
    let t = inst.operators();
    let (ops, traced) = match rep {
        HaagerupLikeRep::FirstKindTriple { .. } => (vec![t[1].clone(), q.clone()], &t[0]),
        HaagerupLikeRep::SecondKindTriple { .. } => (vec![q.clone(), t[0].clone()], &t[1]),
        HaagerupLikeRep::FirstKindQuadruple { .. } => (vec![t[1].clone(), t[2].clone(), q.clone()], &t[0]),
        HaagerupLikeRep::SecondKindQuadruple { .. } => (vec![q.clone(), t[0].clone(), t[1].clone()], &t[2]),
    };
    let cycled = MoiInstance::new(measures, ops, Integrand::Haagerup(chain))?;
    Ok((&eval_haagerup(&cycled)? * traced).trace())
}

/// The instance computing `W*`: reversed measures, adjoint operators in
/// reverse order, and the adjoint representation (which has the other kind).
pub fn adjoint_instance(inst: &MoiInstance) -> Result<MoiInstance> {
    let rep = like_of(inst)?;
    let measures = inst.measures().iter().rev().cloned().collect();
    let ops = inst.operators().iter().rev().map(ComplexMatrix::adjoint).collect();
    MoiInstance::new(measures, ops, Integrand::HaagerupLike(rep.adjoint()))
}

/// Evaluates a projective instance through its Haagerup embedding.
pub fn eval_projective_via_haagerup(inst: &MoiInstance) -> Result<ComplexMatrix> {
    let rep = match inst.integrand() {
        Integrand::Projective(r) => r,
        other => return Err(wrong_class("projective", other)),
    };
    let chain = embed_projective_in_haagerup(rep);
    Ok(ComplexMatrix::wrap(chain_sum(inst.measures(), inst.operators(), &chain)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::HaagerupLikeKind;
    use crate::random::{
        random_instance, random_matrix, random_normalized_blocks, random_spectral_measure, InstanceLimits, RepClass,
    };
    use crate::spectral::{CyclicModel, ScalarTable, DEFAULT_MERGE_TOL};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    const ALL_CLASSES: [RepClass; 6] = [
        RepClass::Projective,
        RepClass::Haagerup,
        RepClass::HaagerupLike(HaagerupLikeKind::FirstKindTriple),
        RepClass::HaagerupLike(HaagerupLikeKind::SecondKindTriple),
        RepClass::HaagerupLike(HaagerupLikeKind::FirstKindQuadruple),
        RepClass::HaagerupLike(HaagerupLikeKind::SecondKindQuadruple),
    ];

    fn small() -> InstanceLimits {
        InstanceLimits { max_dim: 5, ..InstanceLimits::default() }
    }

    #[test]
    fn oracle_resolution_of_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ms: Vec<_> = (0..3).map(|_| random_spectral_measure(&mut rng, 4, 3)).collect();
        let (t, r) = (random_matrix(&mut rng, 4, 4), random_matrix(&mut rng, 4, 4));
        let one = ProjectiveRep::one(vec![3, 3, 3]).unwrap();
        let inst = MoiInstance::new(ms, vec![t.clone(), r.clone()], one.into()).unwrap();
        let tr = &t * &r;
        assert!(eval_oracle(&inst).unwrap().distance(&tr) < 1e-12);
        assert!(eval_projective(&inst).unwrap().distance(&tr) < 1e-12);
    }

    #[test]
    fn oracle_single_atoms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_matrix(&mut rng, 3, 3);
        let psi = ProjectiveRep::new(
            vec![1, 1],
            vec![vec![ScalarTable::constant(1, c(2.0)), ScalarTable::constant(1, Complex64::new(0.0, 3.0))]],
        )
        .unwrap();
        let inst = MoiInstance::new(
            vec![FiniteSpectralMeasure::trivial(3), FiniteSpectralMeasure::trivial(3)],
            vec![t.clone()],
            psi.into(),
        )
        .unwrap();
        let expected = t.scale(Complex64::new(0.0, 6.0));
        assert!(eval_oracle(&inst).unwrap().distance(&expected) < 1e-12);
    }

    #[test]
    fn oracle_cap_refuses() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = random_instance(&mut rng, RepClass::Haagerup, 3, small());
        let tuples = AtomTuples::total(&inst.integrand().atom_counts());
        let err = eval_oracle_with_cap(&inst, tuples - 1).unwrap_err();
        assert!(err.is_cap());
        assert!(eval_oracle_with_cap(&inst, tuples).is_ok());
    }

    #[test]
    fn projective_one_four_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ms: Vec<_> = (0..4).map(|_| random_spectral_measure(&mut rng, 3, 2)).collect();
        let ts: Vec<_> = (0..3).map(|_| random_matrix(&mut rng, 3, 3)).collect();
        let expected = &(&ts[0] * &ts[1]) * &ts[2];
        let inst = MoiInstance::new(ms, ts, ProjectiveRep::one(vec![2; 4]).unwrap().into()).unwrap();
        assert!(eval_projective(&inst).unwrap().distance(&expected) < 1e-12);
    }

    #[test]
    fn instance_shape_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = random_spectral_measure(&mut rng, 3, 2);
        let one = ProjectiveRep::one(vec![2, 2, 2]).unwrap();
        let t = random_matrix(&mut rng, 3, 3);
        assert!(MoiInstance::new(vec![e.clone(); 3], vec![t.clone()], one.clone().into()).is_err());
        assert!(MoiInstance::new(vec![e.clone(); 2], vec![t.clone()], one.clone().into()).is_err());
        let bad = random_matrix(&mut rng, 2, 2);
        assert!(MoiInstance::new(vec![e.clone(); 3], vec![t.clone(), bad], one.clone().into()).is_err());
        let one3 = ProjectiveRep::one(vec![3, 2, 2]).unwrap();
        assert!(MoiInstance::new(vec![e; 3], vec![t.clone(), t], one3.into()).is_err());
    }

    #[test]
    fn all_paths_match_the_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for trial in 0..60 {
            for class in ALL_CLASSES {
                let m = rng.gen_range(2..=4);
                let inst = random_instance(&mut rng, class, m, small());
                let oracle = eval_oracle(&inst).unwrap();
                let tol = 1e-10 * inst.scale();
                let direct = evaluate(&inst).unwrap();
                assert!(direct.distance(&oracle) <= tol, "trial {trial} {class:?}");
                match inst.integrand() {
                    Integrand::Projective(_) => {
                        assert!(eval_projective_via_haagerup(&inst).unwrap().distance(&oracle) <= tol);
                    }
                    Integrand::Haagerup(_) => {
                        assert!(eval_haagerup_block(&inst).unwrap().distance(&oracle) <= tol);
                    }
                    Integrand::HaagerupLike(_) => {}
                }
            }
        }
    }

    #[test]
    fn width_one_chain_is_a_triple_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let inst = random_instance(&mut rng, RepClass::Haagerup, 3, InstanceLimits { max_width: 1, ..small() });
        let rep = chain_of(&inst).unwrap();
        let ms = inst.measures();
        let a = ms[0].integrate(&rep.head().component(0)).unwrap();
        let b = ms[1].integrate(&rep.middles()[0].entry(0, 0)).unwrap();
        let g = ms[2].integrate(&rep.tail().component(0)).unwrap();
        let ops = inst.operators();
        let expected = &(&(&(&a * &ops[0]) * &b) * &ops[1]) * &g;
        assert!(eval_haagerup(&inst).unwrap().distance(&expected) < 1e-10 * inst.scale());
        assert!(eval_haagerup_block(&inst).unwrap().distance(&expected) < 1e-10 * inst.scale());
    }

    #[test]
    fn block_cap_refuses() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let inst = random_instance(&mut rng, RepClass::Haagerup, 3, small());
        let side = inst.dim() * chain_of(&inst).unwrap().widths().iter().max().unwrap();
        assert!(eval_haagerup_block_with_cap(&inst, side - 1).unwrap_err().is_cap());
    }

    #[test]
    fn cyclic_construction_identity() {
        // δ-system head and tail, characters in the middle: Σ_j P_j T B_j R P_j
        let n = 4;
        let model = CyclicModel::new(n).unwrap();
        let middle = MatrixTable::diagonal(n, n, |m, j| model.characters[j].values()[m]).unwrap();
        let rep =
            HaagerupChainRep::new(VectorTable::delta_system(n), vec![middle], VectorTable::delta_system(n)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (t, r) = (random_matrix(&mut rng, n, n), random_matrix(&mut rng, n, n));
        let inst = MoiInstance::new(
            vec![model.fourier.clone(), model.position.clone(), model.fourier.clone()],
            vec![t.clone(), r.clone()],
            rep.into(),
        )
        .unwrap();
        let mut expected = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let p = model.fourier.projection(j);
            expected = &expected + &(&(&(&(p * &t) * &model.shift(j as i64)) * &r) * p);
        }
        assert!(eval_haagerup(&inst).unwrap().distance(&expected) < 1e-12);
    }

    #[test]
    fn double_schur_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.5, -1.0]);
        let u = crate::random::random_unitary(&mut rng, 3);
        let a = &(&u * &a) * &u.adjoint();
        let e = FiniteSpectralMeasure::from_hermitian(&a, DEFAULT_MERGE_TOL).unwrap();
        let t = random_matrix(&mut rng, 3, 3);
        let k = e.atom_count();
        let ones = DMatrix::from_element(k, k, c(1.0));
        assert!(eval_double_schur(&ones, &e, &e, &t).unwrap().distance(&t) < 1e-12);

        let x: Vec<Complex64> = e.atoms().iter().map(|a| a.point.as_complex()).collect();
        let sum = DMatrix::from_fn(k, k, |i, j| x[i] + x[j]);
        let expected = &(&a * &t) + &(&t * &a);
        assert!(eval_double_schur(&sum, &e, &e, &t).unwrap().distance(&expected) < 1e-10);

        // divided difference of t², derivative on the diagonal
        let dd = DMatrix::from_fn(
            k,
            k,
            |i, j| {
                if i == j {
                    x[i] * 2.0
                } else {
                    (x[i] * x[i] - x[j] * x[j]) / (x[i] - x[j])
                }
            },
        );
        assert!(eval_double_schur(&dd, &e, &e, &t).unwrap().distance(&expected) < 1e-10);

        let wrong = DMatrix::from_element(k, k + 1, c(1.0));
        assert!(eval_double_schur(&wrong, &e, &e, &t).is_err());
    }

    #[test]
    fn two_factor_chain_matches_schur() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let inst = random_instance(&mut rng, RepClass::Haagerup, 2, small());
            let counts = inst.integrand().atom_counts();
            let table =
                DMatrix::from_fn(counts[0], counts[1], |i, j| inst.integrand().eval_pointwise(&[i, j]).unwrap());
            let schur =
                eval_double_schur(&table, &inst.measures()[0], &inst.measures()[1], &inst.operators()[0]).unwrap();
            assert!(eval_haagerup(&inst).unwrap().distance(&schur) < 1e-10 * inst.scale());
        }
    }

    #[test]
    fn haagerup_like_single_index_is_projective() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let limits = InstanceLimits { max_width: 1, ..small() };
        for kind in HaagerupLikeKind::ALL {
            let inst = random_instance(&mut rng, RepClass::HaagerupLike(kind), 0, limits);
            let counts = inst.integrand().atom_counts();
            // rebuild the same Ψ as a one-term projective rep
            let rep = like_of(&inst).unwrap();
            let factor = |i: usize| -> ScalarTable {
                let vals = (0..counts[i])
                    .map(|a| {
                        let mut t = vec![0; counts.len()];
                        t[i] = a;
                        match (rep, i) {
                            (HaagerupLikeRep::FirstKindTriple { alpha, .. }, 0) => alpha.at(a)[0],
                            (HaagerupLikeRep::FirstKindTriple { beta, .. }, 1) => beta.at(a)[0],
                            (HaagerupLikeRep::FirstKindTriple { gamma, .. }, _) => gamma.at(a)[(0, 0)],
                            (HaagerupLikeRep::SecondKindTriple { alpha, .. }, 0) => alpha.at(a)[(0, 0)],
                            (HaagerupLikeRep::SecondKindTriple { beta, .. }, 1) => beta.at(a)[0],
                            (HaagerupLikeRep::SecondKindTriple { gamma, .. }, _) => gamma.at(a)[0],
                            (HaagerupLikeRep::FirstKindQuadruple { alpha, .. }, 0) => alpha.at(a)[0],
                            (HaagerupLikeRep::FirstKindQuadruple { beta, .. }, 1) => beta.at(a)[0],
                            (HaagerupLikeRep::FirstKindQuadruple { gamma, .. }, 2) => gamma.at(a)[(0, 0)],
                            (HaagerupLikeRep::FirstKindQuadruple { delta, .. }, _) => delta.at(a)[(0, 0)],
                            (HaagerupLikeRep::SecondKindQuadruple { alpha, .. }, 0) => alpha.at(a)[(0, 0)],
                            (HaagerupLikeRep::SecondKindQuadruple { beta, .. }, 1) => beta.at(a)[(0, 0)],
                            (HaagerupLikeRep::SecondKindQuadruple { gamma, .. }, 2) => gamma.at(a)[0],
                            (HaagerupLikeRep::SecondKindQuadruple { delta, .. }, _) => delta.at(a)[0],
                        }
                    })
                    .collect();
                ScalarTable::new(vals).unwrap()
            };
            let proj = ProjectiveRep::new(counts.clone(), vec![(0..counts.len()).map(factor).collect()]).unwrap();
            let pinst = inst.with_integrand(proj.into()).unwrap();
            let a = eval_haagerup_like(&inst).unwrap();
            let b = eval_projective(&pinst).unwrap();
            assert!(a.distance(&b) < 1e-10 * inst.scale(), "{kind:?}");
        }
    }

    #[test]
    fn haagerup_like_one_gives_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let e = random_spectral_measure(&mut rng, 3, 2);
        let ones = |w| VectorTable::from_fn(2, w, |_, _| c(1.0)).unwrap();
        let rep = HaagerupLikeRep::FirstKindTriple {
            alpha: ones(1),
            beta: ones(1),
            gamma: MatrixTable::from_fn(2, 1, 1, |_, _, _| c(1.0)).unwrap(),
        };
        let (t, r) = (random_matrix(&mut rng, 3, 3), random_matrix(&mut rng, 3, 3));
        let inst = MoiInstance::new(vec![e; 3], vec![t.clone(), r.clone()], rep.into()).unwrap();
        let tr = &t * &r;
        assert!(eval_haagerup_like(&inst).unwrap().distance(&tr) < 1e-12);
        let id = ComplexMatrix::identity(3);
        assert!((duality_functional(&inst, &id).unwrap() - tr.trace()).norm() < 1e-12);
        let zero = ComplexMatrix::zeros(3, 3);
        assert_eq!(duality_functional(&inst, &zero).unwrap(), ZERO);
    }

    #[test]
    fn duality_matches_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for kind in HaagerupLikeKind::ALL {
            for _ in 0..10 {
                let inst = random_instance(&mut rng, RepClass::HaagerupLike(kind), 0, small());
                let w = eval_haagerup_like(&inst).unwrap();
                for _ in 0..5 {
                    let q = random_matrix(&mut rng, inst.dim(), inst.dim());
                    let lhs = (&w * &q).trace();
                    let rhs = duality_functional(&inst, &q).unwrap();
                    let scale = inst.scale() * crate::linalg::schatten_norm(&q, crate::SchattenExponent::ONE).unwrap();
                    assert!((lhs - rhs).norm() <= 1e-9 * scale.max(1e-12), "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn adjoint_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for kind in HaagerupLikeKind::ALL {
            for _ in 0..5 {
                let inst = random_instance(&mut rng, RepClass::HaagerupLike(kind), 0, small());
                let w = eval_haagerup_like(&inst).unwrap();
                let adj = eval_haagerup_like(&adjoint_instance(&inst).unwrap()).unwrap();
                assert!(adj.distance(&w.adjoint()) < 1e-10 * inst.scale());
            }
        }
    }

    #[test]
    fn lemma_row_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let blocks = random_normalized_blocks(&mut rng, 3, 2);
        let t = random_matrix(&mut rng, 3, 3);
        let row = lemma_row_matrix(&blocks, &t).unwrap();
        assert_eq!((row.rows(), row.cols()), (3, 6));
        assert!(lemma_row_matrix(&[], &t).is_err());
    }

    #[test]
    fn wrong_class_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let inst = random_instance(&mut rng, RepClass::Projective, 3, small());
        assert!(eval_haagerup(&inst).is_err());
        assert!(eval_haagerup_like(&inst).is_err());
        assert!(duality_functional(&inst, &ComplexMatrix::identity(inst.dim())).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn evaluators_are_linear_in_each_operator(seed in any::<u64>(), class_ix in 0usize..6, s in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(2..=4);
            let inst = random_instance(&mut rng, ALL_CLASSES[class_ix], m, small());
            let slot = rng.gen_range(0..inst.arity() - 1);
            let n = inst.dim();
            let x = random_matrix(&mut rng, n, n);
            let y = random_matrix(&mut rng, n, n);
            let with = |op: ComplexMatrix| {
                let mut ops = inst.operators().to_vec();
                ops[slot] = op;
                evaluate(&inst.with_operators(ops).unwrap()).unwrap()
            };
            let mix = &x + &y.scale(c(s));
            let lhs = with(mix);
            let rhs = &with(x) + &with(y).scale(c(s));
            let scale = inst.integrand().rep_norm_bound()
                * inst.operators().iter().enumerate().filter(|(i, _)| *i != slot).map(|(_, t)| t.op_norm()).product::<f64>()
                * 6.0;
            prop_assert!(lhs.distance(&rhs) <= 1e-10 * scale.max(1e-12));
        }

        #[test]
        fn operator_norm_bound(seed in any::<u64>(), class_ix in 0usize..2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(2..=4);
            let inst = random_instance(&mut rng, ALL_CLASSES[class_ix], m, small());
            let w = evaluate(&inst).unwrap();
            prop_assert!(w.op_norm() <= inst.scale() * (1.0 + 1e-9));
        }
    }
}
