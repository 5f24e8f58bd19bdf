//! Dense complex matrices, singular values, Schatten (quasi)norms and the
//! Hermitian eigendecomposition.
//!
//! Decompositions are delegated to `nalgebra`; this module owns the
//! invariants (finite entries, non-empty shapes), the exponent type and the
//! clamping rule for tiny singular values.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative gate on `‖M − M*‖_∞ / ‖M‖_∞` for Hermitian inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Singular values below this fraction of the largest one are treated as zero.
pub const SINGULAR_CLAMP: f64 = 1e-13;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix with at least one row and one column and finite
/// entries at construction time.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Wraps an `nalgebra` matrix after checking shape and finiteness.
    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidInput(format!("matrix must be non-empty, got {}x{}", m.nrows(), m.ncols())));
        }
        if !is_finite(&m) {
            return Err(Error::InvalidInput(String::from("matrix has non-finite entries")));
        }
        Ok(ComplexMatrix(m))
    }

    /// Builds a matrix from entries listed in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} entries given for a {rows}x{cols} matrix", entries.len())));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Row-major real entries, mostly for tests and fixtures.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let entries: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_row_major(rows, cols, &entries)
    }

    pub(crate) fn wrap(m: DMatrix<Complex64>) -> Self {
        debug_assert!(m.nrows() > 0 && m.ncols() > 0);
        ComplexMatrix(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "empty matrix");
        ComplexMatrix(DMatrix::identity(n, n))
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        assert!(n > 0, "empty matrix");
        ComplexMatrix(DMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO }))
    }

    pub fn real_diagonal(entries: &[f64]) -> Self {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&c)
    }

    /// The rank-one operator `f ↦ (f, v) u`, i.e. `u v*`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert!(!u.is_empty() && !v.is_empty(), "empty matrix");
        ComplexMatrix(DMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj()))
    }

    /// Standard basis vector `e_k` of length `n`.
    pub fn basis_vector(n: usize, k: usize) -> Vec<Complex64> {
        let mut e = alloc::vec![ZERO; n];
        e[k] = ONE;
        e
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexMatrix(&self.0 * c)
    }

    pub fn diagonal_entries(&self) -> Vec<Complex64> {
        self.0.diagonal().iter().copied().collect()
    }

    /// Matrix–vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols(), "vector length mismatch");
        (0..self.rows()).map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * v[j]).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        is_finite(&self.0)
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        sorted_singular_values(&self.0).first().copied().unwrap_or(0.0)
    }

    /// Operator-norm distance, the yardstick for every residual in the crate.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()), "shape mismatch");
        ComplexMatrix(&self.0 - &other.0).op_norm()
    }

    /// `[M_0 M_1 ⋯]`; all blocks must share the row count.
    pub fn hstack(blocks: &[ComplexMatrix]) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::InvalidInput(String::from("no blocks to stack")))?;
        let rows = first.rows();
        if blocks.iter().any(|b| b.rows() != rows) {
            return Err(Error::ShapeMismatch(String::from("row counts differ in hstack")));
        }
        let cols: usize = blocks.iter().map(|b| b.cols()).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            out.view_mut((0, offset), (rows, b.cols())).copy_from(&b.0);
            offset += b.cols();
        }
        Ok(ComplexMatrix(out))
    }

    /// `[M_0; M_1; ⋯]`; all blocks must share the column count.
    pub fn vstack(blocks: &[ComplexMatrix]) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::InvalidInput(String::from("no blocks to stack")))?;
        let cols = first.cols();
        if blocks.iter().any(|b| b.cols() != cols) {
            return Err(Error::ShapeMismatch(String::from("column counts differ in vstack")));
        }
        let rows: usize = blocks.iter().map(|b| b.rows()).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            out.view_mut((offset, 0), (b.rows(), cols)).copy_from(&b.0);
            offset += b.rows();
        }
        Ok(ComplexMatrix(out))
    }
}

fn is_finite(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

/// Exponent `p ∈ (0, ∞]` of a Schatten–von Neumann class. Infinity is its own
/// state, never a large float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchattenExponent(Repr);

#[derive(Clone, Copy, Debug, PartialEq)]
enum Repr {
    Finite(f64),
    Infinite,
}

impl SchattenExponent {
    pub const INFINITY: SchattenExponent = SchattenExponent(Repr::Infinite);
    pub const ONE: SchattenExponent = SchattenExponent(Repr::Finite(1.0));
    pub const TWO: SchattenExponent = SchattenExponent(Repr::Finite(2.0));

    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p > 0.0 {
            Ok(SchattenExponent(Repr::Finite(p)))
        } else {
            Err(Error::InvalidInput(format!("Schatten exponent must lie in (0, inf), got {p}")))
        }
    }

    /// The exponent with the given reciprocal; `0` maps to infinity.
    pub fn from_reciprocal(x: f64) -> Result<Self> {
        if x == 0.0 {
            Ok(Self::INFINITY)
        } else if x.is_finite() && x > 0.0 {
            Self::finite(1.0 / x)
        } else {
            Err(Error::InvalidInput(format!("reciprocal exponent must be >= 0, got {x}")))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self.0, Repr::Infinite)
    }

    pub fn as_finite(self) -> Option<f64> {
        match self.0 {
            Repr::Finite(p) => Some(p),
            Repr::Infinite => None,
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self.0 {
            Repr::Finite(p) => 1.0 / p,
            Repr::Infinite => 0.0,
        }
    }

    /// `p` as a float, `f64::INFINITY` for the infinite exponent.
    pub fn value(self) -> f64 {
        match self.0 {
            Repr::Finite(p) => p,
            Repr::Infinite => f64::INFINITY,
        }
    }

    /// `p♯ = max{p, 2}`.
    pub fn sharp(self) -> Self {
        match self.0 {
            Repr::Finite(p) if p < 2.0 => Self::TWO,
            _ => self,
        }
    }

    /// `p ≥ x`, exact comparison (infinity dominates everything).
    pub fn at_least(self, x: f64) -> bool {
        match self.0 {
            Repr::Finite(p) => p >= x,
            Repr::Infinite => true,
        }
    }

    /// `p ≤ x`, exact comparison.
    pub fn at_most(self, x: f64) -> bool {
        match self.0 {
            Repr::Finite(p) => p <= x,
            Repr::Infinite => x == f64::INFINITY,
        }
    }

    /// Conjugate exponent `p′` with `1/p + 1/p′ = 1`; needs `p ≥ 1`.
    pub fn conjugate(self) -> Result<Self> {
        let x = self.reciprocal();
        if x > 1.0 {
            return Err(Error::InvalidInput(format!("exponent {self} has no conjugate (needs p >= 1)")));
        }
        Self::from_reciprocal(1.0 - x)
    }

    /// `r` with `1/r = Σ 1/p_i`.
    pub fn harmonic_sum(exps: &[SchattenExponent]) -> Result<Self> {
        Self::from_reciprocal(exps.iter().map(|p| p.reciprocal()).sum())
    }

    /// `t·p` for `t > 0`.
    pub fn scaled(self, t: f64) -> Result<Self> {
        match self.0 {
            Repr::Finite(p) => Self::finite(p * t),
            Repr::Infinite if t > 0.0 => Ok(self),
            Repr::Infinite => Err(Error::InvalidInput(format!("cannot scale an exponent by {t}"))),
        }
    }
}

impl fmt::Display for SchattenExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Finite(p) => write!(f, "{p}"),
            Repr::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for SchattenExponent {
    type Err = Error;

    /// Accepts `inf`, decimals and simple fractions such as `4/3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "inf" | "infinity" | "Inf" | "INF" | "∞" => return Ok(Self::INFINITY),
            _ => {}
        }
        let bad = || Error::InvalidInput(format!("cannot parse exponent {s:?}"));
        let value = match s.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| bad())?;
                let den: f64 = den.trim().parse().map_err(|_| bad())?;
                num / den
            }
            None => s.parse().map_err(|_| bad())?,
        };
        Self::finite(value)
    }
}

pub(crate) fn sorted_singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular values in non-increasing order; `min(rows, cols)` of them.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::InvalidInput(String::from("matrix has non-finite entries")));
    }
    Ok(sorted_singular_values(&m.0))
}

/// `(Σ |x_i|^p)^{1/p}` (max for `p = ∞`) after zeroing entries below
/// `SINGULAR_CLAMP · max`. Quasinorm for `p < 1`.
pub fn lp_norm(values: &[f64], p: SchattenExponent) -> f64 {
    let max = values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return 0.0;
    }
    match p.as_finite() {
        None => max,
        Some(p) => {
            let cut = SINGULAR_CLAMP * max;
            let sum: f64 = values.iter().map(|x| x.abs()).filter(|&x| x >= cut).map(|x| libm::pow(x / max, p)).sum();
            max * libm::pow(sum, 1.0 / p)
        }
    }
}

/// Schatten (quasi)norm `‖M‖_{S_p}`.
pub fn schatten_norm(m: &ComplexMatrix, p: SchattenExponent) -> Result<f64> {
    Ok(lp_norm(&singular_values(m)?, p))
}

/// Spectral data of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

/// Checks `‖M − M*‖_∞ ≤ HERMITIAN_TOL·‖M‖_∞`.
pub fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput(String::from("matrix has non-finite entries")));
    }
    let skew = m.distance(&m.adjoint());
    let scale = m.op_norm();
    if skew > HERMITIAN_TOL * scale {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian: ‖M − M*‖ = {skew:e} against ‖M‖ = {scale:e}"
        )));
    }
    Ok(())
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    let sym = (&m.0 + m.0.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { eigenvalues, eigenvectors: ComplexMatrix(vectors) })
}

/// Splits `T ∈ S_r`, `1/r = 1/p + 1/q`, as `T = X·Y` with
/// `‖X‖_{S_p}·‖Y‖_{S_q} = ‖T‖_{S_r}`.
///
/// With `T = UΣV*` this is `X = UΣ^{r/p}`, `Y = Σ^{r/q}V*`; zero singular
/// values stay zero on both sides. For `p = q = ∞` the split is `(T, I)`.
pub fn factorize_schatten(
    t: &ComplexMatrix,
    p: SchattenExponent,
    q: SchattenExponent,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !t.is_finite() {
        return Err(Error::InvalidInput(String::from("matrix has non-finite entries")));
    }
    let total = p.reciprocal() + q.reciprocal();
    if total == 0.0 {
        return Ok((t.clone(), ComplexMatrix::identity(t.cols())));
    }
    let (a, b) = (p.reciprocal() / total, q.reciprocal() / total);
    let svd = t.0.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V*");
    let s = &svd.singular_values;
    let smax = s.iter().fold(0.0_f64, |m, &x| m.max(x));
    let power = |x: f64, e: f64| {
        if x <= SINGULAR_CLAMP * smax || x == 0.0 {
            0.0
        } else {
            libm::pow(x, e)
        }
    };
    let k = s.len();
    let x = DMatrix::from_fn(u.nrows(), k, |i, j| u[(i, j)] * power(s[j], a));
    let y = DMatrix::from_fn(k, v_t.ncols(), |i, j| v_t[(i, j)] * power(s[i], b));
    Ok((ComplexMatrix(x), ComplexMatrix(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, random_unitary};
    use alloc::vec;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diagonal_singular_values_sorted() {
        let m = ComplexMatrix::real_diagonal(&[3.0, 0.0, 4.0]);
        assert_eq!(singular_values(&m).unwrap(), vec![4.0, 3.0, 0.0]);
    }

    #[test]
    fn rank_one_singular_value() {
        let u = [c(2.0), c(0.0), c(0.0)];
        let v = [c(0.0), Complex64::new(0.0, 3.0)];
        let s = singular_values(&ComplexMatrix::outer(&u, &v)).unwrap();
        assert_eq!(s.len(), 2);
        assert_relative_eq!(s[0], 6.0, epsilon = 1e-12);
        assert!(s[1].abs() < 1e-12);
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 4, 4);
            let s = singular_values(&m).unwrap();
            let gram = &m.adjoint() * &m;
            let mut oracle: Vec<f64> =
                hermitian_eig(&gram).unwrap().eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
            oracle.reverse();
            let scale = s[0];
            for (a, b) in s.iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn non_finite_rejected() {
        let bad = DMatrix::from_element(2, 2, Complex64::new(f64::NAN, 0.0));
        assert!(ComplexMatrix::from_dmatrix(bad).is_err());
        let mut m = ComplexMatrix::identity(2);
        m.0[(0, 1)] = Complex64::new(f64::INFINITY, 0.0);
        assert!(matches!(singular_values(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn schatten_examples() {
        let m = ComplexMatrix::real_diagonal(&[3.0, 4.0]);
        assert_relative_eq!(schatten_norm(&m, SchattenExponent::ONE).unwrap(), 7.0, epsilon = 1e-12);
        assert_relative_eq!(schatten_norm(&m, SchattenExponent::INFINITY).unwrap(), 4.0, epsilon = 1e-12);
        let half = SchattenExponent::finite(0.5).unwrap();
        // (√3 + √4)²
        let expected = (3f64.sqrt() + 2.0).powi(2);
        assert_relative_eq!(schatten_norm(&m, half).unwrap(), expected, epsilon = 1e-12);
        assert_relative_eq!(expected, 13.928203230275509, epsilon = 1e-12);
    }

    #[test]
    fn hermitian_eig_examples() {
        let id = hermitian_eig(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(id.eigenvalues.len(), 3);
        assert!(id.eigenvalues.iter().all(|&x| (x - 1.0).abs() < 1e-14));

        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = hermitian_eig(&x).unwrap();
        assert_relative_eq!(e.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hermitian_eig_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 5, 5);
            let h = &a + &a.adjoint();
            let e = hermitian_eig(&h).unwrap();
            let lambda = ComplexMatrix::real_diagonal(&e.eigenvalues);
            let v = &e.eigenvectors;
            let rebuilt = &(v * &lambda) * &v.adjoint();
            assert!(rebuilt.distance(&h) <= 1e-10 * h.op_norm());
            let gram = &v.adjoint() * v;
            assert!(gram.distance(&ComplexMatrix::identity(5)) <= 1e-10);
        }
    }

    #[test]
    fn hermitian_eig_rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(hermitian_eig(&rect).is_err());
        let skew = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(hermitian_eig(&skew).is_err());
    }

    #[test]
    fn factorize_examples() {
        let t = ComplexMatrix::real_diagonal(&[4.0]);
        let (x, y) = factorize_schatten(&t, SchattenExponent::TWO, SchattenExponent::TWO).unwrap();
        assert_relative_eq!(x.get(0, 0).norm(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(y.get(0, 0).norm(), 2.0, epsilon = 1e-12);
        assert!((&x * &y).distance(&t) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(&mut rng, 3);
        let inf = SchattenExponent::INFINITY;
        let (x, y) = factorize_schatten(&u, inf, inf).unwrap();
        assert_eq!(x, u);
        assert_eq!(y, ComplexMatrix::identity(3));
    }

    #[test]
    fn factorize_norm_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let p = SchattenExponent::finite(4.0).unwrap();
        let t = random_matrix(&mut rng, 4, 4);
        let (x, y) = factorize_schatten(&t, p, p).unwrap();
        assert!((&x * &y).distance(&t) <= 1e-10 * t.op_norm());
        let lhs = schatten_norm(&x, p).unwrap() * schatten_norm(&y, p).unwrap();
        let rhs = schatten_norm(&t, SchattenExponent::TWO).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-9);
    }

    #[test]
    fn exponent_accessors() {
        let three = SchattenExponent::finite(3.0).unwrap();
        assert_eq!(three.sharp(), three);
        assert_eq!(SchattenExponent::finite(1.5).unwrap().sharp(), SchattenExponent::TWO);
        assert_eq!(SchattenExponent::INFINITY.sharp(), SchattenExponent::INFINITY);
        assert_eq!(SchattenExponent::ONE.conjugate().unwrap(), SchattenExponent::INFINITY);
        assert_eq!(SchattenExponent::INFINITY.conjugate().unwrap(), SchattenExponent::ONE);
        assert!(SchattenExponent::finite(0.5).unwrap().conjugate().is_err());
        assert!(SchattenExponent::finite(0.0).is_err());
        assert!(SchattenExponent::finite(f64::INFINITY).is_err());
        assert_eq!("inf".parse::<SchattenExponent>().unwrap(), SchattenExponent::INFINITY);
        assert_relative_eq!("4/3".parse::<SchattenExponent>().unwrap().value(), 4.0 / 3.0);
        let r = SchattenExponent::harmonic_sum(&[SchattenExponent::TWO, SchattenExponent::TWO]).unwrap();
        assert_eq!(r, SchattenExponent::ONE);
        assert!(SchattenExponent::harmonic_sum(&[SchattenExponent::INFINITY; 2]).unwrap().is_infinite());
    }

    #[test]
    fn stacking() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::zeros(2, 1);
        let h = ComplexMatrix::hstack(&[a.clone(), b]).unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 3));
        let v = ComplexMatrix::vstack(&[a.clone(), a]).unwrap();
        assert_eq!((v.rows(), v.cols()), (4, 2));
        assert!(ComplexMatrix::hstack(&[ComplexMatrix::zeros(1, 1), ComplexMatrix::zeros(2, 1)]).is_err());
    }
}
