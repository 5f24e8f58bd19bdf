//! Integrands given by explicit tensor representations.
//!
//! Every representation knows the norm of itself (an upper bound for the
//! infimum defining the tensor norm) and can be evaluated on a tuple of atoms.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{MatrixTable, ScalarTable, VectorTable};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `Ψ = Σ_n φ_{n,1} ⊗ ⋯ ⊗ φ_{n,m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveRep {
    atom_counts: Vec<usize>,
    terms: Vec<Vec<ScalarTable>>,
}

impl ProjectiveRep {
    /// `atom_counts[i]` is the number of atoms of the `i`-th measure. An empty
    /// term list is the zero integrand.
    pub fn new(atom_counts: Vec<usize>, terms: Vec<Vec<ScalarTable>>) -> Result<Self> {
        if atom_counts.len() < 2 {
            return Err(Error::InvalidInput(String::from("projective integrand needs arity >= 2")));
        }
        for (n, term) in terms.iter().enumerate() {
            if term.len() != atom_counts.len() {
                return Err(Error::ShapeMismatch(format!(
                    "term {n} has {} factors, expected {}",
                    term.len(),
                    atom_counts.len()
                )));
            }
            for (i, (t, &a)) in term.iter().zip(&atom_counts).enumerate() {
                if t.len() != a {
                    return Err(Error::ShapeMismatch(format!(
                        "term {n} factor {i} has {} values for {a} atoms",
                        t.len()
                    )));
                }
            }
        }
        Ok(ProjectiveRep { atom_counts, terms })
    }

    /// `Ψ ≡ 1` as a single all-ones term.
    pub fn one(atom_counts: Vec<usize>) -> Result<Self> {
        let term = atom_counts.iter().map(|&a| ScalarTable::constant(a, ONE)).collect();
        Self::new(atom_counts, vec![term])
    }

    pub fn arity(&self) -> usize {
        self.atom_counts.len()
    }

    pub fn atom_counts(&self) -> &[usize] {
        &self.atom_counts
    }

    pub fn terms(&self) -> &[Vec<ScalarTable>] {
        &self.terms
    }

    /// `Σ_n Π_i ‖φ_{n,i}‖_∞`.
    pub fn rep_norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.iter().map(ScalarTable::sup_norm).product::<f64>()).sum()
    }

    fn eval_unchecked(&self, atoms: &[usize]) -> Complex64 {
        self.terms.iter().map(|t| t.iter().zip(atoms).map(|(f, &a)| f.values()[a]).product::<Complex64>()).sum()
    }
}

/// `Ψ(x_1,…,x_m) = head(x_1) · middle_2(x_2) ⋯ middle_{m−1}(x_{m−1}) · tail(x_m)`,
/// a row vector times matrices times a column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct HaagerupChainRep {
    head: VectorTable,
    middles: Vec<MatrixTable>,
    tail: VectorTable,
}

impl HaagerupChainRep {
    pub fn new(head: VectorTable, middles: Vec<MatrixTable>, tail: VectorTable) -> Result<Self> {
        let mut width = head.width();
        for (i, m) in middles.iter().enumerate() {
            if m.rows() != width {
                return Err(Error::ShapeMismatch(format!(
                    "middle {i} has {} rows but the incoming link has width {width}",
                    m.rows()
                )));
            }
            width = m.cols();
        }
        if tail.width() != width {
            return Err(Error::ShapeMismatch(format!(
                "tail has width {} but the incoming link has width {width}",
                tail.width()
            )));
        }
        Ok(HaagerupChainRep { head, middles, tail })
    }

    pub fn arity(&self) -> usize {
        self.middles.len() + 2
    }

    pub fn head(&self) -> &VectorTable {
        &self.head
    }

    pub fn middles(&self) -> &[MatrixTable] {
        &self.middles
    }

    pub fn tail(&self) -> &VectorTable {
        &self.tail
    }

    /// Link widths `L_1, …, L_{m−1}`.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.head.width()];
        w.extend(self.middles.iter().map(MatrixTable::cols));
        w
    }

    pub fn atom_counts(&self) -> Vec<usize> {
        let mut a = vec![self.head.atoms()];
        a.extend(self.middles.iter().map(MatrixTable::atoms));
        a.push(self.tail.atoms());
        a
    }

    pub fn rep_norm_bound(&self) -> f64 {
        self.head.sup_norm() * self.middles.iter().map(MatrixTable::sup_norm).product::<f64>() * self.tail.sup_norm()
    }

    fn eval_unchecked(&self, atoms: &[usize]) -> Complex64 {
        let mut row: Vec<Complex64> = self.head.at(atoms[0]).to_vec();
        for (m, &a) in self.middles.iter().zip(&atoms[1..]) {
            let b = m.at(a);
            row = (0..b.ncols()).map(|k| (0..b.nrows()).map(|j| row[j] * b[(j, k)]).sum()).collect();
        }
        row.iter().zip(self.tail.at(atoms[atoms.len() - 1])).map(|(x, y)| x * y).sum()
    }
}

/// Which of the four Haagerup-like shapes a representation has.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HaagerupLikeKind {
    FirstKindTriple,
    SecondKindTriple,
    FirstKindQuadruple,
    SecondKindQuadruple,
}

impl HaagerupLikeKind {
    pub const ALL: [HaagerupLikeKind; 4] = [
        HaagerupLikeKind::FirstKindTriple,
        HaagerupLikeKind::SecondKindTriple,
        HaagerupLikeKind::FirstKindQuadruple,
        HaagerupLikeKind::SecondKindQuadruple,
    ];

    pub fn arity(self) -> usize {
        match self {
            HaagerupLikeKind::FirstKindTriple | HaagerupLikeKind::SecondKindTriple => 3,
            _ => 4,
        }
    }

    pub fn is_first(self) -> bool {
        matches!(self, HaagerupLikeKind::FirstKindTriple | HaagerupLikeKind::FirstKindQuadruple)
    }

    /// The kind obtained by reversing the factors.
    pub fn reversed(self) -> Self {
        match self {
            HaagerupLikeKind::FirstKindTriple => HaagerupLikeKind::SecondKindTriple,
            HaagerupLikeKind::SecondKindTriple => HaagerupLikeKind::FirstKindTriple,
            HaagerupLikeKind::FirstKindQuadruple => HaagerupLikeKind::SecondKindQuadruple,
            HaagerupLikeKind::SecondKindQuadruple => HaagerupLikeKind::FirstKindQuadruple,
        }
    }
}

/// Haagerup-like representations. Index conventions:
///
/// * first kind, three factors: `Σ_{j,k} α_j(x_1) β_k(x_2) γ_{jk}(x_3)`
/// * second kind, three factors: `Σ_{j,k} α_{jk}(x_1) β_j(x_2) γ_k(x_3)`
/// * first kind, four factors: `Σ_{j,k,l} α_l(x_1) β_j(x_2) γ_{jk}(x_3) δ_{kl}(x_4)`
/// * second kind, four factors: `Σ_{j,k,l} α_{jk}(x_1) β_{kl}(x_2) γ_l(x_3) δ_j(x_4)`
#[derive(Clone, Debug, PartialEq)]
pub enum HaagerupLikeRep {
    FirstKindTriple { alpha: VectorTable, beta: VectorTable, gamma: MatrixTable },
    SecondKindTriple { alpha: MatrixTable, beta: VectorTable, gamma: VectorTable },
    FirstKindQuadruple { alpha: VectorTable, beta: VectorTable, gamma: MatrixTable, delta: MatrixTable },
    SecondKindQuadruple { alpha: MatrixTable, beta: MatrixTable, gamma: VectorTable, delta: VectorTable },
}

fn width_check(what: &str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!("{what}: width {got}, expected {expected}")))
    }
}

/// `uᵀ M v`.
fn bilinear(u: &[Complex64], m: &DMatrix<Complex64>, v: &[Complex64]) -> Complex64 {
    let mut acc = ZERO;
    for j in 0..m.nrows() {
        if u[j] == ZERO {
            continue;
        }
        let row: Complex64 = (0..m.ncols()).map(|k| m[(j, k)] * v[k]).sum();
        acc += u[j] * row;
    }
    acc
}

impl HaagerupLikeRep {
    /// Validates index widths.
    pub fn validated(self) -> Result<Self> {
        match &self {
            HaagerupLikeRep::FirstKindTriple { alpha, beta, gamma } => {
                width_check("γ rows vs α", gamma.rows(), alpha.width())?;
                width_check("γ cols vs β", gamma.cols(), beta.width())?;
            }
            HaagerupLikeRep::SecondKindTriple { alpha, beta, gamma } => {
                width_check("α rows vs β", alpha.rows(), beta.width())?;
                width_check("α cols vs γ", alpha.cols(), gamma.width())?;
            }
            HaagerupLikeRep::FirstKindQuadruple { alpha, beta, gamma, delta } => {
                width_check("γ rows vs β", gamma.rows(), beta.width())?;
                width_check("δ rows vs γ cols", delta.rows(), gamma.cols())?;
                width_check("δ cols vs α", delta.cols(), alpha.width())?;
            }
            HaagerupLikeRep::SecondKindQuadruple { alpha, beta, gamma, delta } => {
                width_check("α rows vs δ", alpha.rows(), delta.width())?;
                width_check("β rows vs α cols", beta.rows(), alpha.cols())?;
                width_check("β cols vs γ", beta.cols(), gamma.width())?;
            }
        }
        Ok(self)
    }

    pub fn kind(&self) -> HaagerupLikeKind {
        match self {
            HaagerupLikeRep::FirstKindTriple { .. } => HaagerupLikeKind::FirstKindTriple,
            HaagerupLikeRep::SecondKindTriple { .. } => HaagerupLikeKind::SecondKindTriple,
            HaagerupLikeRep::FirstKindQuadruple { .. } => HaagerupLikeKind::FirstKindQuadruple,
            HaagerupLikeRep::SecondKindQuadruple { .. } => HaagerupLikeKind::SecondKindQuadruple,
        }
    }

    pub fn arity(&self) -> usize {
        self.kind().arity()
    }

    pub fn atom_counts(&self) -> Vec<usize> {
        match self {
            HaagerupLikeRep::FirstKindTriple { alpha, beta, gamma } => {
                vec![alpha.atoms(), beta.atoms(), gamma.atoms()]
            }
            HaagerupLikeRep::SecondKindTriple { alpha, beta, gamma } => {
                vec![alpha.atoms(), beta.atoms(), gamma.atoms()]
            }
            HaagerupLikeRep::FirstKindQuadruple { alpha, beta, gamma, delta } => {
                vec![alpha.atoms(), beta.atoms(), gamma.atoms(), delta.atoms()]
            }
            HaagerupLikeRep::SecondKindQuadruple { alpha, beta, gamma, delta } => {
                vec![alpha.atoms(), beta.atoms(), gamma.atoms(), delta.atoms()]
            }
        }
    }

    /// Product of the component sup-norms.
    pub fn rep_norm_bound(&self) -> f64 {
        match self {
            HaagerupLikeRep::FirstKindTriple { alpha, beta, gamma } => {
                alpha.sup_norm() * beta.sup_norm() * gamma.sup_norm()
            }
            HaagerupLikeRep::SecondKindTriple { alpha, beta, gamma } => {
                alpha.sup_norm() * beta.sup_norm() * gamma.sup_norm()
            }
            HaagerupLikeRep::FirstKindQuadruple { alpha, beta, gamma, delta } => {
                alpha.sup_norm() * beta.sup_norm() * gamma.sup_norm() * delta.sup_norm()
            }
            HaagerupLikeRep::SecondKindQuadruple { alpha, beta, gamma, delta } => {
                alpha.sup_norm() * beta.sup_norm() * gamma.sup_norm() * delta.sup_norm()
            }
        }
    }

    fn eval_unchecked(&self, x: &[usize]) -> Complex64 {
        match self {
            HaagerupLikeRep::FirstKindTriple { alpha, beta, gamma } => {
                bilinear(alpha.at(x[0]), gamma.at(x[2]), beta.at(x[1]))
            }
            HaagerupLikeRep::SecondKindTriple { alpha, beta, gamma } => {
                bilinear(beta.at(x[1]), alpha.at(x[0]), gamma.at(x[2]))
            }
            HaagerupLikeRep::FirstKindQuadruple { alpha, beta, gamma, delta } => {
                let ga = gamma.at(x[2]) * delta.at(x[3]);
                bilinear(beta.at(x[1]), &ga, alpha.at(x[0]))
            }
            HaagerupLikeRep::SecondKindQuadruple { alpha, beta, gamma, delta } => {
                let ab = alpha.at(x[0]) * beta.at(x[1]);
                bilinear(delta.at(x[3]), &ab, gamma.at(x[2]))
            }
        }
    }

    /// Representation of `(y_1,…,y_m) ↦ conj Ψ(y_m,…,y_1)`, which has the other
    /// kind. Integrating it against the reversed measures and the adjoint
    /// operators in reverse order yields `W*`.
    pub fn adjoint(&self) -> Self {
        match self {
            HaagerupLikeRep::FirstKindTriple { alpha, beta, gamma } => {
                HaagerupLikeRep::SecondKindTriple { alpha: gamma.adjoint(), beta: beta.conj(), gamma: alpha.conj() }
            }
            HaagerupLikeRep::SecondKindTriple { alpha, beta, gamma } => {
                HaagerupLikeRep::FirstKindTriple { alpha: gamma.conj(), beta: beta.conj(), gamma: alpha.adjoint() }
            }
            HaagerupLikeRep::FirstKindQuadruple { alpha, beta, gamma, delta } => HaagerupLikeRep::SecondKindQuadruple {
                alpha: delta.adjoint(),
                beta: gamma.adjoint(),
                gamma: beta.conj(),
                delta: alpha.conj(),
            },
            HaagerupLikeRep::SecondKindQuadruple { alpha, beta, gamma, delta } => HaagerupLikeRep::FirstKindQuadruple {
                alpha: delta.conj(),
                beta: gamma.conj(),
                gamma: beta.adjoint(),
                delta: alpha.adjoint(),
            },
        }
    }

    /// The Haagerup chain of the cyclically permuted integrand used by the
    /// duality definition, together with the permutation: factor `i` of the
    /// chain is factor `order[i]` of `Ψ`.
    pub fn cycled_chain(&self) -> (HaagerupChainRep, Vec<usize>) {
        let built = match self {
            HaagerupLikeRep::FirstKindTriple { alpha, beta, gamma } => {
                (HaagerupChainRep::new(beta.clone(), vec![gamma.transpose()], alpha.clone()), vec![1, 2, 0])
            }
            HaagerupLikeRep::SecondKindTriple { alpha, beta, gamma } => {
                (HaagerupChainRep::new(gamma.clone(), vec![alpha.transpose()], beta.clone()), vec![2, 0, 1])
            }
            HaagerupLikeRep::FirstKindQuadruple { alpha, beta, gamma, delta } => (
                HaagerupChainRep::new(beta.clone(), vec![gamma.clone(), delta.clone()], alpha.clone()),
                vec![1, 2, 3, 0],
            ),
            HaagerupLikeRep::SecondKindQuadruple { alpha, beta, gamma, delta } => (
                HaagerupChainRep::new(delta.clone(), vec![alpha.clone(), beta.clone()], gamma.clone()),
                vec![3, 0, 1, 2],
            ),
        };
        (built.0.expect("widths validated at construction"), built.1)
    }
}

/// An integrand together with the representation that carries it.
#[derive(Clone, Debug, PartialEq)]
pub enum Integrand {
    Projective(ProjectiveRep),
    Haagerup(HaagerupChainRep),
    HaagerupLike(HaagerupLikeRep),
}

impl Integrand {
    pub fn arity(&self) -> usize {
        match self {
            Integrand::Projective(r) => r.arity(),
            Integrand::Haagerup(r) => r.arity(),
            Integrand::HaagerupLike(r) => r.arity(),
        }
    }

    pub fn atom_counts(&self) -> Vec<usize> {
        match self {
            Integrand::Projective(r) => r.atom_counts().to_vec(),
            Integrand::Haagerup(r) => r.atom_counts(),
            Integrand::HaagerupLike(r) => r.atom_counts(),
        }
    }

    /// Norm of this particular representation.
    pub fn rep_norm_bound(&self) -> f64 {
        match self {
            Integrand::Projective(r) => r.rep_norm_bound(),
            Integrand::Haagerup(r) => r.rep_norm_bound(),
            Integrand::HaagerupLike(r) => r.rep_norm_bound(),
        }
    }

    /// Short name of the representation class.
    pub fn class_name(&self) -> &'static str {
        match self {
            Integrand::Projective(_) => "projective",
            Integrand::Haagerup(_) => "haagerup",
            Integrand::HaagerupLike(_) => "haagerup_like",
        }
    }

    /// `Ψ(x_{atoms[0]}, …)`, contracting head to tail.
    pub fn eval_pointwise(&self, atoms: &[usize]) -> Result<Complex64> {
        let counts = self.atom_counts();
        if atoms.len() != counts.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} atom indices for an integrand of arity {}",
                atoms.len(),
                counts.len()
            )));
        }
        if let Some(i) = atoms.iter().zip(&counts).position(|(&a, &c)| a >= c) {
            return Err(Error::InvalidInput(format!(
                "atom index {} out of range for factor {i} with {} atoms",
                atoms[i], counts[i]
            )));
        }
        Ok(self.eval_unchecked(atoms))
    }

    pub(crate) fn eval_unchecked(&self, atoms: &[usize]) -> Complex64 {
        match self {
            Integrand::Projective(r) => r.eval_unchecked(atoms),
            Integrand::Haagerup(r) => r.eval_unchecked(atoms),
            Integrand::HaagerupLike(r) => r.eval_unchecked(atoms),
        }
    }
}

impl From<ProjectiveRep> for Integrand {
    fn from(r: ProjectiveRep) -> Self {
        Integrand::Projective(r)
    }
}

impl From<HaagerupChainRep> for Integrand {
    fn from(r: HaagerupChainRep) -> Self {
        Integrand::Haagerup(r)
    }
}

impl From<HaagerupLikeRep> for Integrand {
    fn from(r: HaagerupLikeRep) -> Self {
        Integrand::HaagerupLike(r)
    }
}

/// Odometer over all atom tuples `(i_1,…,i_m)` with `i_k < counts[k]`, last
/// index fastest.
#[derive(Clone, Debug)]
pub struct AtomTuples {
    counts: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl AtomTuples {
    pub fn new(counts: &[usize]) -> Self {
        let next = if counts.iter().all(|&c| c > 0) { Some(vec![0; counts.len()]) } else { None };
        AtomTuples { counts: counts.to_vec(), next }
    }

    /// Number of tuples, saturating.
    pub fn total(counts: &[usize]) -> u128 {
        counts.iter().fold(1u128, |acc, &c| acc.saturating_mul(c as u128))
    }
}

impl Iterator for AtomTuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < self.counts[i] {
                self.next = Some(succ);
                return Some(current);
            }
            succ[i] = 0;
        }
        Some(current)
    }
}

/// Rewrites a projective representation as a Haagerup chain of width `n`
/// (the number of terms) with diagonal middles.
///
/// Term `n` with weight `w_n = Π_i ‖φ_{n,i}‖_∞` puts `√w_n` on the head and on
/// the tail and normalizes every factor, so the chain norm is at most
/// `(Σ w_n)^{1/2} · 1 ⋯ 1 · (Σ w_n)^{1/2} = Σ w_n`.
pub fn embed_projective_in_haagerup(rep: &ProjectiveRep) -> HaagerupChainRep {
    let counts = rep.atom_counts();
    let m = counts.len();
    let width = rep.terms().len();
    // per term: scale factor for each factor table
    let factors: Vec<Vec<f64>> = rep
        .terms()
        .iter()
        .map(|term| {
            let norms: Vec<f64> = term.iter().map(ScalarTable::sup_norm).collect();
            if norms.contains(&0.0) {
                return vec![0.0; m];
            }
            let root = libm::sqrt(norms.iter().product::<f64>());
            norms
                .iter()
                .enumerate()
                .map(|(i, &nrm)| if i == 0 || i == m - 1 { root / nrm } else { 1.0 / nrm })
                .collect()
        })
        .collect();
    let value = |n: usize, i: usize, a: usize| rep.terms()[n][i].values()[a] * factors[n][i];
    let head = VectorTable::from_fn(counts[0], width, |a, n| value(n, 0, a)).expect("finite");
    let middles =
        (1..m - 1).map(|i| MatrixTable::diagonal(counts[i], width, |a, n| value(n, i, a)).expect("finite")).collect();
    let tail = VectorTable::from_fn(counts[m - 1], width, |a, n| value(n, m - 1, a)).expect("finite");
    HaagerupChainRep::new(head, middles, tail).expect("uniform width")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_chain, random_haagerup_like, random_projective, random_scalar_table};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn projective_norm_examples() {
        let rep = ProjectiveRep::new(
            vec![1, 1, 1],
            vec![vec![
                ScalarTable::constant(1, c(2.0)),
                ScalarTable::constant(1, c(-3.0)),
                ScalarTable::constant(1, Complex64::new(0.0, 5.0)),
            ]],
        )
        .unwrap();
        assert!((rep.rep_norm_bound() - 30.0).abs() < 1e-14);
        let zero = ProjectiveRep::new(vec![2, 3], vec![]).unwrap();
        assert_eq!(zero.rep_norm_bound(), 0.0);
        assert_eq!(Integrand::from(zero).eval_pointwise(&[1, 2]).unwrap(), ZERO);
    }

    #[test]
    fn one_evaluates_to_one() {
        let one = Integrand::from(ProjectiveRep::one(vec![2, 3, 2]).unwrap());
        for t in AtomTuples::new(&[2, 3, 2]) {
            assert_eq!(one.eval_pointwise(&t).unwrap(), c(1.0));
        }
        assert!(one.eval_pointwise(&[0, 3, 0]).is_err());
        assert!(one.eval_pointwise(&[0, 0]).is_err());
    }

    #[test]
    fn width_one_chain_is_a_product() {
        let a = VectorTable::new(1, vec![vec![c(2.0)], vec![c(3.0)]]).unwrap();
        let b = MatrixTable::diagonal(2, 1, |x, _| c(5.0 + x as f64)).unwrap();
        let g = VectorTable::new(1, vec![vec![c(7.0)], vec![c(-1.0)]]).unwrap();
        let rep = Integrand::from(HaagerupChainRep::new(a, vec![b], g).unwrap());
        assert_eq!(rep.eval_pointwise(&[1, 1, 0]).unwrap(), c(3.0 * 6.0 * 7.0));
    }

    #[test]
    fn delta_chain_has_norm_one() {
        let n = 4;
        let model = crate::spectral::CyclicModel::new(n).unwrap();
        let middle = MatrixTable::diagonal(n, n, |m, j| model.characters[j].values()[m]).unwrap();
        let rep =
            HaagerupChainRep::new(VectorTable::delta_system(n), vec![middle], VectorTable::delta_system(n)).unwrap();
        assert!((rep.rep_norm_bound() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn chain_width_mismatch_rejected() {
        let head = VectorTable::delta_system(2);
        let tail = VectorTable::delta_system(3);
        assert!(HaagerupChainRep::new(head.clone(), vec![], tail.clone()).is_err());
        let mid = MatrixTable::from_fn(2, 3, 2, |_, _, _| ONE).unwrap();
        assert!(HaagerupChainRep::new(head, vec![mid], tail).is_err());
    }

    #[test]
    fn haagerup_like_width_mismatch_rejected() {
        let rep = HaagerupLikeRep::FirstKindTriple {
            alpha: VectorTable::delta_system(2),
            beta: VectorTable::delta_system(3),
            gamma: MatrixTable::from_fn(2, 3, 2, |_, _, _| ONE).unwrap(),
        };
        assert!(rep.validated().is_err());
    }

    fn reversed_sum(rep: &Integrand, x: &[usize]) -> Complex64 {
        // contract tail to head, with every index loop running backwards
        match rep {
            Integrand::Projective(r) => r
                .terms()
                .iter()
                .rev()
                .map(|t| t.iter().zip(x).rev().map(|(f, &a)| f.values()[a]).product::<Complex64>())
                .sum(),
            Integrand::Haagerup(r) => {
                let mut col: Vec<Complex64> = r.tail().at(x[x.len() - 1]).to_vec();
                for (m, &a) in r.middles().iter().zip(&x[1..]).rev() {
                    let b = m.at(a);
                    col = (0..b.nrows()).map(|j| (0..b.ncols()).rev().map(|k| b[(j, k)] * col[k]).sum()).collect();
                }
                r.head().at(x[0]).iter().zip(&col).rev().map(|(u, v)| u * v).sum()
            }
            Integrand::HaagerupLike(h) => {
                let mut acc = ZERO;
                match h {
                    HaagerupLikeRep::FirstKindTriple { alpha, beta, gamma } => {
                        for k in (0..beta.width()).rev() {
                            for j in (0..alpha.width()).rev() {
                                acc += gamma.at(x[2])[(j, k)] * beta.at(x[1])[k] * alpha.at(x[0])[j];
                            }
                        }
                    }
                    HaagerupLikeRep::SecondKindTriple { alpha, beta, gamma } => {
                        for k in (0..gamma.width()).rev() {
                            for j in (0..beta.width()).rev() {
                                acc += gamma.at(x[2])[k] * beta.at(x[1])[j] * alpha.at(x[0])[(j, k)];
                            }
                        }
                    }
                    HaagerupLikeRep::FirstKindQuadruple { alpha, beta, gamma, delta } => {
                        for l in (0..alpha.width()).rev() {
                            for k in (0..gamma.cols()).rev() {
                                for j in (0..beta.width()).rev() {
                                    acc += delta.at(x[3])[(k, l)]
                                        * gamma.at(x[2])[(j, k)]
                                        * beta.at(x[1])[j]
                                        * alpha.at(x[0])[l];
                                }
                            }
                        }
                    }
                    HaagerupLikeRep::SecondKindQuadruple { alpha, beta, gamma, delta } => {
                        for l in (0..gamma.width()).rev() {
                            for k in (0..alpha.cols()).rev() {
                                for j in (0..delta.width()).rev() {
                                    acc += delta.at(x[3])[j]
                                        * gamma.at(x[2])[l]
                                        * beta.at(x[1])[(k, l)]
                                        * alpha.at(x[0])[(j, k)];
                                }
                            }
                        }
                    }
                }
                acc
            }
        }
    }

    fn random_integrands(rng: &mut ChaCha8Rng) -> Vec<Integrand> {
        let m = rng.gen_range(2..=4);
        let counts: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=4)).collect();
        let widths: Vec<usize> = (0..m - 1).map(|_| rng.gen_range(1..=3)).collect();
        let terms = rng.gen_range(1..=3);
        let mut out = vec![
            Integrand::from(random_projective(rng, &counts, terms)),
            Integrand::from(random_chain(rng, &counts, &widths)),
        ];
        for kind in HaagerupLikeKind::ALL {
            let counts: Vec<usize> = (0..kind.arity()).map(|_| rng.gen_range(1..=3)).collect();
            let widths: Vec<usize> = (0..kind.arity() - 1).map(|_| rng.gen_range(1..=3)).collect();
            out.push(Integrand::from(random_haagerup_like(rng, kind, &counts, &widths)));
        }
        out
    }

    #[test]
    fn summation_order_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            for rep in random_integrands(&mut rng) {
                for t in AtomTuples::new(&rep.atom_counts()) {
                    let a = rep.eval_pointwise(&t).unwrap();
                    let b = reversed_sum(&rep, &t);
                    assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn pointwise_bounded_by_rep_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            for rep in random_integrands(&mut rng) {
                let bound = rep.rep_norm_bound();
                for t in AtomTuples::new(&rep.atom_counts()) {
                    assert!(rep.eval_pointwise(&t).unwrap().norm() <= bound * (1.0 + 1e-10) + 1e-14);
                }
            }
        }
    }

    #[test]
    fn adjoint_rep_conjugates_reversed_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for kind in HaagerupLikeKind::ALL {
            let counts: Vec<usize> = (0..kind.arity()).map(|_| rng.gen_range(1..=3)).collect();
            let widths: Vec<usize> = (0..kind.arity() - 1).map(|_| rng.gen_range(1..=3)).collect();
            let rep = random_haagerup_like(&mut rng, kind, &counts, &widths);
            let adj = rep.adjoint().validated().unwrap();
            assert_eq!(adj.kind(), kind.reversed());
            assert!((adj.rep_norm_bound() - rep.rep_norm_bound()).abs() < 1e-12);
            let (rep, adj) = (Integrand::from(rep), Integrand::from(adj));
            for t in AtomTuples::new(&counts) {
                let rev: Vec<usize> = t.iter().rev().copied().collect();
                let a = rep.eval_pointwise(&t).unwrap().conj();
                let b = adj.eval_pointwise(&rev).unwrap();
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cycled_chain_matches_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for kind in HaagerupLikeKind::ALL {
            let counts: Vec<usize> = (0..kind.arity()).map(|_| rng.gen_range(1..=3)).collect();
            let widths: Vec<usize> = (0..kind.arity() - 1).map(|_| rng.gen_range(1..=3)).collect();
            let rep = random_haagerup_like(&mut rng, kind, &counts, &widths);
            let (chain, order) = rep.cycled_chain();
            assert!((chain.rep_norm_bound() - rep.rep_norm_bound()).abs() < 1e-12);
            let (rep, chain) = (Integrand::from(rep), Integrand::from(chain));
            for t in AtomTuples::new(&counts) {
                let cycled: Vec<usize> = order.iter().map(|&i| t[i]).collect();
                let a = rep.eval_pointwise(&t).unwrap();
                let b = chain.eval_pointwise(&cycled).unwrap();
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn embedding_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let single = random_projective(&mut rng, &[2, 3, 2], 1);
        let chain = embed_projective_in_haagerup(&single);
        assert_eq!(chain.widths(), vec![1, 1]);

        let zero = ProjectiveRep::new(vec![2, 2, 2], vec![]).unwrap();
        let chain = embed_projective_in_haagerup(&zero);
        assert_eq!(chain.widths(), vec![0, 0]);
        assert_eq!(chain.rep_norm_bound(), 0.0);
        let chain = Integrand::from(chain);
        for t in AtomTuples::new(&[2, 2, 2]) {
            assert_eq!(chain.eval_pointwise(&t).unwrap(), ZERO);
        }
    }

    #[test]
    fn embedding_with_a_vanishing_factor() {
        let counts = [2, 2, 2];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut terms = random_projective(&mut rng, &counts, 2).terms().to_vec();
        terms[1][1] = ScalarTable::constant(2, ZERO);
        let rep = ProjectiveRep::new(counts.to_vec(), terms).unwrap();
        let chain = Integrand::from(embed_projective_in_haagerup(&rep));
        let rep = Integrand::from(rep);
        for t in AtomTuples::new(&counts) {
            assert!((rep.eval_pointwise(&t).unwrap() - chain.eval_pointwise(&t).unwrap()).norm() < 1e-12);
        }
        assert!(chain.rep_norm_bound() <= rep.rep_norm_bound() * (1.0 + 1e-12));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn embedding_preserves_values_and_norm(seed in any::<u64>(), m in 2usize..=4, terms in 0usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let counts: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=6)).collect();
            let rep = random_projective(&mut rng, &counts, terms);
            let chain = embed_projective_in_haagerup(&rep);
            prop_assert!(chain.rep_norm_bound() <= rep.rep_norm_bound() * (1.0 + 1e-12) + 1e-300);
            let (rep, chain) = (Integrand::from(rep), Integrand::from(chain));
            for t in AtomTuples::new(&counts) {
                let a = rep.eval_pointwise(&t).unwrap();
                let b = chain.eval_pointwise(&t).unwrap();
                prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
            }
        }

        #[test]
        fn rep_norm_is_homogeneous(seed in any::<u64>(), t in 0.0f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let counts = [3, 2, 3];
            let chain = random_chain(&mut rng, &counts, &[2, 3]);
            let scaled = HaagerupChainRep::new(
                chain.head().clone(),
                vec![chain.middles()[0].scale(c(t))],
                chain.tail().clone(),
            ).unwrap();
            prop_assert!((scaled.rep_norm_bound() - t * chain.rep_norm_bound()).abs()
                <= 1e-12 * (1.0 + t * chain.rep_norm_bound()));

            let proj = random_projective(&mut rng, &counts, 1);
            let mut term = proj.terms()[0].clone();
            term[2] = term[2].scale(c(t));
            let scaled = ProjectiveRep::new(counts.to_vec(), vec![term]).unwrap();
            prop_assert!((scaled.rep_norm_bound() - t * proj.rep_norm_bound()).abs()
                <= 1e-12 * (1.0 + t * proj.rep_norm_bound()));
        }

        #[test]
        fn pointwise_is_linear_in_each_factor(seed in any::<u64>(), s in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let counts = [2, 3, 2];
            let base = random_projective(&mut rng, &counts, 1).terms()[0].clone();
            let f = random_scalar_table(&mut rng, 3);
            let g = random_scalar_table(&mut rng, 3);
            let mix = ScalarTable::new(
                f.values().iter().zip(g.values()).map(|(a, b)| a + b * s).collect(),
            ).unwrap();
            let with = |mid: ScalarTable| {
                let mut t = base.clone();
                t[1] = mid;
                Integrand::from(ProjectiveRep::new(counts.to_vec(), vec![t]).unwrap())
            };
            let (rf, rg, rmix) = (with(f), with(g), with(mix));
            for t in AtomTuples::new(&counts) {
                let lhs = rmix.eval_pointwise(&t).unwrap();
                let rhs = rf.eval_pointwise(&t).unwrap() + rg.eval_pointwise(&t).unwrap() * s;
                prop_assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }
}
