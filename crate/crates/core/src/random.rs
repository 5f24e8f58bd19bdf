//! Seeded generators for matrices, spectral measures, representations and
//! whole instances. Every function takes the generator explicitly; nothing here
//! holds global state.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::integrand::{HaagerupChainRep, HaagerupLikeKind, HaagerupLikeRep, Integrand, ProjectiveRep};
use crate::linalg::ComplexMatrix;
use crate::moi::MoiInstance;
use crate::spectral::{Atom, AtomPoint, FiniteSpectralMeasure, MatrixTable, ScalarTable, VectorTable};

/// Real and imaginary parts uniform in `[−1, 1]`.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

fn random_dmatrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::wrap(random_dmatrix(rng, rows, cols))
}

/// `(X + X*) / 2` for a random `X`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let x = random_dmatrix(rng, n, n);
    ComplexMatrix::wrap((&x + x.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Unitary factor of the QR decomposition of a random matrix, with the phases
/// of `R`'s diagonal absorbed.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let qr = random_dmatrix(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::wrap(q)
}

/// Random operator of random rank, sometimes rescaled, so that Schatten norms
/// of different orders separate.
pub fn random_operator<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let rank = rng.gen_range(1..=n);
    let left = random_dmatrix(rng, n, rank);
    let right = random_dmatrix(rng, rank, n);
    let scale = libm::pow(10.0, rng.gen_range(-1.0..=1.0));
    ComplexMatrix::wrap(left * right * Complex64::new(scale, 0.0))
}

/// Spectral measure with `atoms` rank-≥1 projections spanned by the columns of
/// a random unitary and ascending real labels. Requires `1 ≤ atoms ≤ dim`.
pub fn random_spectral_measure<R: Rng + ?Sized>(rng: &mut R, dim: usize, atoms: usize) -> FiniteSpectralMeasure {
    assert!(atoms >= 1 && atoms <= dim, "need 1 <= atoms <= dim");
    let u = random_unitary(rng, dim);
    let mut cuts: Vec<usize> = (1..dim).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(atoms - 1).collect();
    cuts.sort_unstable();
    cuts.push(dim);
    let mut point = rng.gen_range(-2.0..0.0);
    let mut start = 0;
    let atoms = cuts
        .into_iter()
        .map(|end| {
            let block = u.as_dmatrix().columns(start, end - start).into_owned();
            start = end;
            point += rng.gen_range(0.1..1.0);
            Atom { point: AtomPoint::Real(point), projection: ComplexMatrix::wrap(&block * block.adjoint()) }
        })
        .collect();
    FiniteSpectralMeasure::new(dim, atoms).expect("shapes agree")
}

pub fn random_scalar_table<R: Rng + ?Sized>(rng: &mut R, atoms: usize) -> ScalarTable {
    ScalarTable::new((0..atoms).map(|_| random_complex(rng)).collect()).expect("finite")
}

pub fn random_vector_table<R: Rng + ?Sized>(rng: &mut R, atoms: usize, width: usize) -> VectorTable {
    VectorTable::new(width, (0..atoms).map(|_| (0..width).map(|_| random_complex(rng)).collect()).collect())
        .expect("finite")
}

pub fn random_matrix_table<R: Rng + ?Sized>(rng: &mut R, atoms: usize, rows: usize, cols: usize) -> MatrixTable {
    MatrixTable::new(rows, cols, (0..atoms).map(|_| random_dmatrix(rng, rows, cols)).collect()).expect("finite")
}

pub fn random_projective<R: Rng + ?Sized>(rng: &mut R, atom_counts: &[usize], terms: usize) -> ProjectiveRep {
    let terms = (0..terms).map(|_| atom_counts.iter().map(|&a| random_scalar_table(rng, a)).collect()).collect();
    ProjectiveRep::new(atom_counts.to_vec(), terms).expect("consistent shapes")
}

/// `widths` holds the `m − 1` link widths.
pub fn random_chain<R: Rng + ?Sized>(rng: &mut R, atom_counts: &[usize], widths: &[usize]) -> HaagerupChainRep {
    let m = atom_counts.len();
    assert!(m >= 2 && widths.len() == m - 1, "need m >= 2 and m - 1 widths");
    let head = random_vector_table(rng, atom_counts[0], widths[0]);
    let middles = (1..m - 1).map(|i| random_matrix_table(rng, atom_counts[i], widths[i - 1], widths[i])).collect();
    let tail = random_vector_table(rng, atom_counts[m - 1], widths[m - 2]);
    HaagerupChainRep::new(head, middles, tail).expect("consistent widths")
}

/// `widths` holds the index ranges `(J, K)` for three factors and `(J, K, L)`
/// for four, in the naming of [`HaagerupLikeRep`].
pub fn random_haagerup_like<R: Rng + ?Sized>(
    rng: &mut R,
    kind: HaagerupLikeKind,
    atom_counts: &[usize],
    widths: &[usize],
) -> HaagerupLikeRep {
    assert_eq!(atom_counts.len(), kind.arity());
    assert_eq!(widths.len(), kind.arity() - 1);
    let a = atom_counts;
    let rep = match kind {
        HaagerupLikeKind::FirstKindTriple => {
            let (j, k) = (widths[0], widths[1]);
            HaagerupLikeRep::FirstKindTriple {
                alpha: random_vector_table(rng, a[0], j),
                beta: random_vector_table(rng, a[1], k),
                gamma: random_matrix_table(rng, a[2], j, k),
            }
        }
        HaagerupLikeKind::SecondKindTriple => {
            let (j, k) = (widths[0], widths[1]);
            HaagerupLikeRep::SecondKindTriple {
                alpha: random_matrix_table(rng, a[0], j, k),
                beta: random_vector_table(rng, a[1], j),
                gamma: random_vector_table(rng, a[2], k),
            }
        }
        HaagerupLikeKind::FirstKindQuadruple => {
            let (j, k, l) = (widths[0], widths[1], widths[2]);
            HaagerupLikeRep::FirstKindQuadruple {
                alpha: random_vector_table(rng, a[0], l),
                beta: random_vector_table(rng, a[1], j),
                gamma: random_matrix_table(rng, a[2], j, k),
                delta: random_matrix_table(rng, a[3], k, l),
            }
        }
        HaagerupLikeKind::SecondKindQuadruple => {
            let (j, k, l) = (widths[0], widths[1], widths[2]);
            HaagerupLikeRep::SecondKindQuadruple {
                alpha: random_matrix_table(rng, a[0], j, k),
                beta: random_matrix_table(rng, a[1], k, l),
                gamma: random_vector_table(rng, a[2], l),
                delta: random_vector_table(rng, a[3], j),
            }
        }
    };
    rep.validated().expect("consistent widths")
}

/// Which representation class [`random_instance`] should produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepClass {
    Projective,
    Haagerup,
    HaagerupLike(HaagerupLikeKind),
}

/// Shape limits for random instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceLimits {
    pub min_dim: usize,
    pub max_dim: usize,
    pub min_width: usize,
    pub max_width: usize,
    pub max_terms: usize,
}

impl Default for InstanceLimits {
    fn default() -> Self {
        InstanceLimits { min_dim: 1, max_dim: 6, min_width: 1, max_width: 3, max_terms: 3 }
    }
}

/// Random measures and operators of a common dimension.
pub fn random_measures<R: Rng + ?Sized>(rng: &mut R, arity: usize, dim: usize) -> Vec<FiniteSpectralMeasure> {
    (0..arity)
        .map(|_| {
            let atoms = rng.gen_range(1..=dim);
            random_spectral_measure(rng, dim, atoms)
        })
        .collect()
}

/// Random instance of the given class. `arity` is ignored for Haagerup-like
/// classes, whose kind fixes it.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    class: RepClass,
    arity: usize,
    limits: InstanceLimits,
) -> MoiInstance {
    let arity = match class {
        RepClass::HaagerupLike(kind) => kind.arity(),
        _ => arity,
    };
    let dim = rng.gen_range(limits.min_dim.max(1)..=limits.max_dim);
    let measures = random_measures(rng, arity, dim);
    let counts: Vec<usize> = measures.iter().map(FiniteSpectralMeasure::atom_count).collect();
    let operators = (0..arity - 1).map(|_| random_operator(rng, dim)).collect();
    let widths: Vec<usize> =
        (0..arity - 1).map(|_| rng.gen_range(limits.min_width.max(1)..=limits.max_width)).collect();
    let integrand = match class {
        RepClass::Projective => {
            let terms = rng.gen_range(1..=limits.max_terms);
            Integrand::from(random_projective(rng, &counts, terms))
        }
        RepClass::Haagerup => Integrand::from(random_chain(rng, &counts, &widths)),
        RepClass::HaagerupLike(kind) => Integrand::from(random_haagerup_like(rng, kind, &counts, &widths)),
    };
    MoiInstance::new(measures, operators, integrand).expect("consistent instance")
}

/// Blocks `A_j = ∫α_j dE` with `Σ_j |α_j|² ≤ 1` pointwise, hence
/// `Σ_j A_j*A_j ≤ I` and `Σ_j A_j A_j* ≤ I`.
pub fn random_normalized_blocks<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Vec<ComplexMatrix> {
    let (e, table) = random_normalized_family(rng, dim, count);
    blocks_from_family(&e, &table)
}

/// The measure and the table `{α_j}` (with `Σ_j |α_j|² ≤ 1`) behind
/// [`random_normalized_blocks`].
pub fn random_normalized_family<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    count: usize,
) -> (FiniteSpectralMeasure, VectorTable) {
    let atoms = rng.gen_range(1..=dim);
    let e = random_spectral_measure(rng, dim, atoms);
    let table = random_vector_table(rng, atoms, count);
    let scale = rng.gen_range(0.5..=1.0) / table.sup_norm().max(f64::MIN_POSITIVE);
    (e, table.scale(Complex64::new(scale, 0.0)))
}

/// `A_j = ∫α_j dE` for every component of `table`.
pub fn blocks_from_family(e: &FiniteSpectralMeasure, table: &VectorTable) -> Vec<ComplexMatrix> {
    (0..table.width()).map(|j| e.integrate(&table.component(j)).expect("one value per atom")).collect()
}

/// Uniformly random element of a slice.
pub fn pick<'a, R: Rng + ?Sized, T>(rng: &mut R, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("non-empty slice")
}

/// Width-1 random chain, handy as a scalar-valued baseline.
pub fn random_product_chain<R: Rng + ?Sized>(rng: &mut R, atom_counts: &[usize]) -> HaagerupChainRep {
    random_chain(rng, atom_counts, &vec![1; atom_counts.len() - 1])
}
