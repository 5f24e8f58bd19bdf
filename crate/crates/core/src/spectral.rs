//! Finite spectral measures and the function tables that live on their atoms.
//!
//! A measure is a list of mutually orthogonal projections summing to the
//! identity, one per spectral point. Integrating a table of values against it
//! gives `Σ φ(x_i) P_i`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, sorted_singular_values, ComplexMatrix};

/// Residual tolerance for projection identities.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Default clustering tolerance for [`FiniteSpectralMeasure::from_hermitian`].
pub const DEFAULT_MERGE_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `exp(2πik/n)`, computed from the reduced residue so that equal roots are
/// bit-identical.
pub fn root_of_unity(k: i64, n: usize) -> Complex64 {
    let n_i = n as i64;
    let k = k.rem_euclid(n_i);
    let theta = 2.0 * PI * (k as f64) / (n as f64);
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

/// Label of an atom. Only used for reporting and for tabulating functions of
/// the spectral variable; evaluation depends on atom order alone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AtomPoint {
    Real(f64),
    Index(i64),
    /// `exp(2πik/n)`.
    RootOfUnity {
        k: usize,
        n: usize,
    },
}

impl AtomPoint {
    pub fn as_complex(&self) -> Complex64 {
        match *self {
            AtomPoint::Real(x) => Complex64::new(x, 0.0),
            AtomPoint::Index(j) => Complex64::new(j as f64, 0.0),
            AtomPoint::RootOfUnity { k, n } => root_of_unity(k as i64, n),
        }
    }

    fn same_as(&self, other: &AtomPoint) -> bool {
        match (self, other) {
            (AtomPoint::RootOfUnity { k: a, n: na }, AtomPoint::RootOfUnity { k: b, n: nb }) => {
                na == nb && a % na == b % nb
            }
            _ => self == other,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: AtomPoint,
    pub projection: ComplexMatrix,
}

/// Projection-valued measure with finitely many atoms on `C^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpectralMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

/// Outcome of [`FiniteSpectralMeasure::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub passed: bool,
    /// Worst of `‖P² − P‖` and `‖P − P*‖` over atoms.
    pub idempotency: f64,
    /// Worst `‖P_i P_j‖`, `i ≠ j`.
    pub orthogonality: f64,
    /// `‖Σ P_i − I‖`.
    pub completeness: f64,
    pub distinct_points: bool,
}

impl FiniteSpectralMeasure {
    /// Checks shapes only; use [`validate`](Self::validate) for the projection
    /// identities.
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(String::from("spectral measure needs dim >= 1")));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidInput(String::from("spectral measure needs at least one atom")));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.projection.rows() != dim || a.projection.cols() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "atom {i} projection is {}x{}, expected {dim}x{dim}",
                    a.projection.rows(),
                    a.projection.cols()
                )));
            }
        }
        Ok(FiniteSpectralMeasure { dim, atoms })
    }

    /// Like [`new`](Self::new) but also rejects measures failing validation.
    pub fn new_validated(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        let m = Self::new(dim, atoms)?;
        let report = m.validate();
        if !report.passed {
            return Err(Error::InvalidInput(format!("not a spectral measure: {report:?}")));
        }
        Ok(m)
    }

    /// Single atom carrying the identity; collapses integrals to products.
    pub fn trivial(dim: usize) -> Self {
        FiniteSpectralMeasure {
            dim,
            atoms: vec![Atom { point: AtomPoint::Real(0.0), projection: ComplexMatrix::identity(dim) }],
        }
    }

    /// Rank-one atoms onto the columns of a unitary matrix.
    pub fn from_orthonormal_basis(basis: &ComplexMatrix, points: Vec<AtomPoint>) -> Result<Self> {
        let n = basis.rows();
        if basis.cols() != n || points.len() != n {
            return Err(Error::ShapeMismatch(String::from("basis must be square with one point per column")));
        }
        let atoms = points
            .into_iter()
            .enumerate()
            .map(|(j, point)| {
                let col: Vec<Complex64> = (0..n).map(|i| basis.get(i, j)).collect();
                Atom { point, projection: ComplexMatrix::outer(&col, &col) }
            })
            .collect();
        Self::new(n, atoms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn projection(&self, i: usize) -> &ComplexMatrix {
        &self.atoms[i].projection
    }

    pub fn point(&self, i: usize) -> AtomPoint {
        self.atoms[i].point
    }

    pub fn validate(&self) -> ValidationReport {
        let id = ComplexMatrix::identity(self.dim);
        let mut idempotency = 0.0_f64;
        let mut orthogonality = 0.0_f64;
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for (i, a) in self.atoms.iter().enumerate() {
            let p = &a.projection;
            idempotency = idempotency.max((p * p).distance(p)).max(p.distance(&p.adjoint()));
            for b in &self.atoms[i + 1..] {
                orthogonality = orthogonality.max((p * &b.projection).op_norm());
            }
            sum = &sum + p;
        }
        let completeness = sum.distance(&id);
        let distinct_points =
            self.atoms.iter().enumerate().all(|(i, a)| self.atoms[i + 1..].iter().all(|b| !a.point.same_as(&b.point)));
        let passed = idempotency <= VALIDATION_TOL
            && orthogonality <= VALIDATION_TOL
            && completeness <= VALIDATION_TOL
            && distinct_points;
        ValidationReport { passed, idempotency, orthogonality, completeness, distinct_points }
    }

    /// `Σ_i v_i P_i`.
    pub fn integrate(&self, values: &[Complex64]) -> Result<ComplexMatrix> {
        if values.len() != self.atoms.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a measure with {} atoms",
                values.len(),
                self.atoms.len()
            )));
        }
        let mut acc = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for (v, a) in values.iter().zip(&self.atoms) {
            if *v != ZERO {
                acc += a.projection.as_dmatrix() * *v;
            }
        }
        Ok(ComplexMatrix::wrap(acc))
    }

    /// `Σ x_i P_i` with the atom labels as values.
    pub fn barycenter(&self) -> ComplexMatrix {
        let values: Vec<Complex64> = self.atoms.iter().map(|a| a.point.as_complex()).collect();
        self.integrate(&values).expect("one value per atom")
    }

    /// Spectral measure of a Hermitian matrix. Eigenvalues closer than
    /// `merge_tol` (absolute) to their neighbour share an atom whose label is
    /// the cluster mean.
    pub fn from_hermitian(m: &ComplexMatrix, merge_tol: f64) -> Result<Self> {
        if merge_tol.is_nan() || merge_tol < 0.0 {
            return Err(Error::InvalidInput(format!("merge_tol must be >= 0, got {merge_tol}")));
        }
        let eig = hermitian_eig(m)?;
        let n = m.rows();
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (i, &x) in eig.eigenvalues.iter().enumerate() {
            match clusters.last_mut() {
                Some(c) if x - eig.eigenvalues[*c.last().unwrap()] <= merge_tol => c.push(i),
                _ => clusters.push(vec![i]),
            }
        }
        let v = eig.eigenvectors.as_dmatrix();
        let atoms = clusters
            .iter()
            .map(|c| {
                let block = DMatrix::from_fn(n, c.len(), |i, j| v[(i, c[j])]);
                let mean = c.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / c.len() as f64;
                Atom { point: AtomPoint::Real(mean), projection: ComplexMatrix::wrap(&block * block.adjoint()) }
            })
            .collect();
        Self::new(n, atoms)
    }
}

/// `Σ φ(x_i) P_i`.
pub fn integrate_scalar(phi: &ScalarTable, measure: &FiniteSpectralMeasure) -> Result<ComplexMatrix> {
    measure.integrate(phi.values())
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(String::from("table has non-finite entries")))
    }
}

/// One complex number per atom.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarTable(Vec<Complex64>);

impl ScalarTable {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        check_finite(&values)?;
        Ok(ScalarTable(values))
    }

    pub fn constant(atoms: usize, value: Complex64) -> Self {
        ScalarTable(vec![value; atoms])
    }

    pub fn indicator(atoms: usize, k: usize) -> Self {
        let mut v = vec![ZERO; atoms];
        v[k] = Complex64::new(1.0, 0.0);
        ScalarTable(v)
    }

    /// Tabulates `f` on the labels of `measure`.
    pub fn from_fn(measure: &FiniteSpectralMeasure, f: impl Fn(&AtomPoint) -> Complex64) -> Result<Self> {
        Self::new(measure.atoms().iter().map(|a| f(&a.point)).collect())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ScalarTable(self.0.iter().map(|z| z * c).collect())
    }

    pub fn conj(&self) -> Self {
        ScalarTable(self.0.iter().map(|z| z.conj()).collect())
    }

    /// Pointwise product.
    pub fn product(&self, other: &ScalarTable) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch(String::from("tables of different lengths")));
        }
        Ok(ScalarTable(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect()))
    }
}

/// One complex `width`-vector per atom: a family `{α_j}` in `L^∞(ℓ²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorTable {
    atoms: usize,
    width: usize,
    // atoms × width, row-major
    values: Vec<Complex64>,
}

impl VectorTable {
    pub fn new(width: usize, per_atom: Vec<Vec<Complex64>>) -> Result<Self> {
        if per_atom.is_empty() {
            return Err(Error::InvalidInput(String::from("vector table needs at least one atom")));
        }
        let mut values = Vec::with_capacity(per_atom.len() * width);
        for (i, v) in per_atom.iter().enumerate() {
            if v.len() != width {
                return Err(Error::ShapeMismatch(format!(
                    "atom {i} carries a vector of length {}, expected {width}",
                    v.len()
                )));
            }
            values.extend_from_slice(v);
        }
        check_finite(&values)?;
        Ok(VectorTable { atoms: per_atom.len(), width, values })
    }

    pub fn from_fn(atoms: usize, width: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let per_atom = (0..atoms).map(|a| (0..width).map(|j| f(a, j)).collect()).collect();
        Self::new(width, per_atom)
    }

    /// `α_j(x_m) = δ_{jm}`: width equals the atom count, sup-norm 1.
    pub fn delta_system(atoms: usize) -> Self {
        Self::from_fn(atoms, atoms, |a, j| if a == j { Complex64::new(1.0, 0.0) } else { ZERO })
            .expect("finite by construction")
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn at(&self, atom: usize) -> &[Complex64] {
        &self.values[atom * self.width..(atom + 1) * self.width]
    }

    /// `j ↦ (α_j(x_0), α_j(x_1), …)`.
    pub fn component(&self, j: usize) -> Vec<Complex64> {
        (0..self.atoms).map(|a| self.values[a * self.width + j]).collect()
    }

    /// `ess sup_x (Σ_j |α_j(x)|²)^{1/2}`.
    pub fn sup_norm(&self) -> f64 {
        if self.width == 0 {
            return 0.0;
        }
        self.values.chunks(self.width).map(|v| libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum())).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        VectorTable { atoms: self.atoms, width: self.width, values: self.values.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        VectorTable { atoms: self.atoms, width: self.width, values: self.values.iter().map(|z| z * c).collect() }
    }

    /// Right-multiplies every atom's row vector by `g` (`width × new_width`).
    pub fn map_right(&self, g: &DMatrix<Complex64>) -> Result<Self> {
        if g.nrows() != self.width {
            return Err(Error::ShapeMismatch(String::from("gauge matrix has the wrong row count")));
        }
        let per_atom = (0..self.atoms)
            .map(|a| {
                let v = self.at(a);
                (0..g.ncols()).map(|k| (0..self.width).map(|j| v[j] * g[(j, k)]).sum()).collect()
            })
            .collect();
        Self::new(g.ncols(), per_atom)
    }
}

/// One complex `rows × cols` matrix per atom: a family `{β_{jk}}` in `L^∞(𝓑)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTable {
    rows: usize,
    cols: usize,
    values: Vec<DMatrix<Complex64>>,
}

impl MatrixTable {
    pub fn new(rows: usize, cols: usize, per_atom: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if per_atom.is_empty() {
            return Err(Error::InvalidInput(String::from("matrix table needs at least one atom")));
        }
        for (i, m) in per_atom.iter().enumerate() {
            if m.nrows() != rows || m.ncols() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "atom {i} carries a {}x{} matrix, expected {rows}x{cols}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            check_finite(m.as_slice())?;
        }
        Ok(MatrixTable { rows, cols, values: per_atom })
    }

    pub fn from_fn(
        atoms: usize,
        rows: usize,
        cols: usize,
        f: impl Fn(usize, usize, usize) -> Complex64,
    ) -> Result<Self> {
        let per_atom = (0..atoms).map(|a| DMatrix::from_fn(rows, cols, |j, k| f(a, j, k))).collect();
        Self::new(rows, cols, per_atom)
    }

    /// Diagonal matrices `diag(f(x, 0), …, f(x, width − 1))`.
    pub fn diagonal(atoms: usize, width: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        Self::from_fn(atoms, width, width, |a, j, k| if j == k { f(a, j) } else { ZERO })
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, atom: usize) -> &DMatrix<Complex64> {
        &self.values[atom]
    }

    /// `(β_{jk}(x_0), β_{jk}(x_1), …)`.
    pub fn entry(&self, j: usize, k: usize) -> Vec<Complex64> {
        self.values.iter().map(|m| m[(j, k)]).collect()
    }

    /// True when `β_{jk}` vanishes at every atom.
    pub fn entry_vanishes(&self, j: usize, k: usize) -> bool {
        self.values.iter().all(|m| m[(j, k)] == ZERO)
    }

    /// `ess sup_x ‖{β_{jk}(x)}‖_{𝓑}`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|m| sorted_singular_values(m).first().copied().unwrap_or(0.0)).fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        MatrixTable { rows: self.cols, cols: self.rows, values: self.values.iter().map(|m| m.transpose()).collect() }
    }

    pub fn adjoint(&self) -> Self {
        MatrixTable { rows: self.cols, cols: self.rows, values: self.values.iter().map(|m| m.adjoint()).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        MatrixTable { rows: self.rows, cols: self.cols, values: self.values.iter().map(|m| m * c).collect() }
    }

    /// `x ↦ left · β(x)`.
    pub fn map_left(&self, left: &DMatrix<Complex64>) -> Result<Self> {
        if left.ncols() != self.rows {
            return Err(Error::ShapeMismatch(String::from("gauge matrix has the wrong column count")));
        }
        Self::new(left.nrows(), self.cols, self.values.iter().map(|m| left * m).collect())
    }

    /// `x ↦ β(x) · right`.
    pub fn map_right(&self, right: &DMatrix<Complex64>) -> Result<Self> {
        if right.nrows() != self.cols {
            return Err(Error::ShapeMismatch(String::from("gauge matrix has the wrong row count")));
        }
        Self::new(self.rows, right.ncols(), self.values.iter().map(|m| m * right).collect())
    }
}

/// Finite surrogate for `L²(𝕋)` on `ℤ_N`, expressed in the Fourier basis
/// `e_0, …, e_{N−1}` (the standard basis of `C^N`).
#[derive(Clone, Debug)]
pub struct CyclicModel {
    /// Rank-one atoms `P_j f = (f, e_j) e_j`, labelled `j`.
    pub fourier: FiniteSpectralMeasure,
    /// Rank-one atoms onto the point evaluations, labelled `ζ_m = exp(2πim/N)`.
    pub position: FiniteSpectralMeasure,
    /// `characters[j]` is `ζ ↦ ζ^j` on `position`.
    pub characters: Vec<ScalarTable>,
}

impl CyclicModel {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput(String::from("cyclic model needs N >= 1")));
        }
        let fourier_atoms = (0..n)
            .map(|j| {
                let e = ComplexMatrix::basis_vector(n, j);
                Atom { point: AtomPoint::Index(j as i64), projection: ComplexMatrix::outer(&e, &e) }
            })
            .collect();
        let fourier = FiniteSpectralMeasure::new(n, fourier_atoms)?;
        // δ_m has Fourier coefficients (δ_m, e_k) = ζ_m^{-k} / √N
        let norm = 1.0 / libm::sqrt(n as f64);
        let position_atoms = (0..n)
            .map(|m| {
                let u: Vec<Complex64> = (0..n).map(|k| root_of_unity(-((m * k) as i64), n) * norm).collect();
                Atom { point: AtomPoint::RootOfUnity { k: m, n }, projection: ComplexMatrix::outer(&u, &u) }
            })
            .collect();
        let position = FiniteSpectralMeasure::new(n, position_atoms)?;
        let characters =
            (0..n).map(|j| ScalarTable((0..n).map(|m| root_of_unity((j * m) as i64, n)).collect())).collect();
        Ok(CyclicModel { fourier, position, characters })
    }

    pub fn n(&self) -> usize {
        self.fourier.dim()
    }

    /// `B_j = ∫ζ^j dE`, acting as `e_k ↦ e_{(j+k) mod N}`.
    pub fn shift(&self, j: i64) -> ComplexMatrix {
        let n = self.n();
        let values: Vec<Complex64> = (0..n).map(|m| root_of_unity(j * m as i64, n)).collect();
        self.position.integrate(&values).expect("one value per atom")
    }
}
