//! JSON instance, report and output formats.
//!
//! Complex scalars are `[re, im]` pairs, matrices are arrays of rows, and
//! exponents are numbers or the string `"inf"`.

use anyhow::{anyhow, bail, Context, Result};
use moi_core::bounds::BoundReport;
use moi_core::integrand::{HaagerupChainRep, HaagerupLikeRep, Integrand, ProjectiveRep};
use moi_core::linalg::schatten_norm;
use moi_core::moi::MoiInstance;
use moi_core::nalgebra::DMatrix;
use moi_core::spectral::{Atom, AtomPoint, FiniteSpectralMeasure, MatrixTable, ScalarTable, VectorTable};
use moi_core::{Complex64, ComplexMatrix, SchattenExponent};
use serde::{Deserialize, Serialize};

pub type ComplexJson = [f64; 2];
pub type MatrixJson = Vec<Vec<ComplexJson>>;
/// One vector per atom.
pub type VectorTableJson = Vec<Vec<ComplexJson>>;
/// One matrix per atom.
pub type MatrixTableJson = Vec<MatrixJson>;

/// Default merge tolerance for measures given as a Hermitian matrix.
pub const DEFAULT_MERGE_TOL: f64 = moi_core::spectral::DEFAULT_MERGE_TOL;

fn complex(z: ComplexJson) -> Complex64 {
    Complex64::new(z[0], z[1])
}

fn complex_json(z: Complex64) -> ComplexJson {
    [z.re, z.im]
}

pub fn matrix_from_json(m: &MatrixJson) -> Result<ComplexMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        bail!("matrix must be non-empty");
    }
    if m.iter().any(|row| row.len() != cols) {
        bail!("matrix rows have different lengths");
    }
    let entries: Vec<Complex64> = m.iter().flatten().copied().map(complex).collect();
    Ok(ComplexMatrix::from_row_major(rows, cols, &entries)?)
}

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| complex_json(m.get(i, j))).collect()).collect()
}

fn dmatrix_from_json(m: &MatrixJson) -> Result<DMatrix<Complex64>> {
    Ok(matrix_from_json(m)?.into_dmatrix())
}

fn dmatrix_to_json(m: &DMatrix<Complex64>) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()).collect()
}

/// An exponent: a positive number or `"inf"` (fractions such as `"4/3"` are
/// accepted as strings too).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentJson {
    Number(f64),
    Text(String),
}

impl ExponentJson {
    pub fn parse(&self) -> Result<SchattenExponent> {
        match self {
            ExponentJson::Number(p) => Ok(SchattenExponent::finite(*p)?),
            ExponentJson::Text(s) => Ok(s.parse()?),
        }
    }
}

impl From<SchattenExponent> for ExponentJson {
    fn from(p: SchattenExponent) -> Self {
        match p.as_finite() {
            Some(v) => ExponentJson::Number(v),
            None => ExponentJson::Text(String::from("inf")),
        }
    }
}

/// A real number that may be infinite (JSON has no literal for it).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RealJson {
    Number(f64),
    Text(&'static str),
}

impl From<f64> for RealJson {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            RealJson::Number(x)
        } else if x.is_nan() {
            RealJson::Text("nan")
        } else if x > 0.0 {
            RealJson::Text("inf")
        } else {
            RealJson::Text("-inf")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointJson {
    Real(f64),
    Index { index: i64 },
    Root { root: [usize; 2] },
}

impl PointJson {
    fn parse(&self) -> Result<AtomPoint> {
        match *self {
            PointJson::Real(x) => Ok(AtomPoint::Real(x)),
            PointJson::Index { index } => Ok(AtomPoint::Index(index)),
            PointJson::Root { root: [k, n] } => {
                if n == 0 {
                    bail!("root of unity needs n >= 1");
                }
                Ok(AtomPoint::RootOfUnity { k, n })
            }
        }
    }
}

impl From<AtomPoint> for PointJson {
    fn from(p: AtomPoint) -> Self {
        match p {
            AtomPoint::Real(x) => PointJson::Real(x),
            AtomPoint::Index(index) => PointJson::Index { index },
            AtomPoint::RootOfUnity { k, n } => PointJson::Root { root: [k, n] },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomJson {
    pub point: PointJson,
    pub projection: MatrixJson,
}

/// A spectral measure, either as explicit atoms or as the spectral
/// decomposition of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureJson {
    Explicit {
        dim: usize,
        atoms: Vec<AtomJson>,
    },
    Hermitian {
        hermitian: MatrixJson,
        #[serde(default = "default_merge_tol")]
        merge_tol: f64,
    },
}

fn default_merge_tol() -> f64 {
    DEFAULT_MERGE_TOL
}

impl MeasureJson {
    pub fn parse(&self) -> Result<FiniteSpectralMeasure> {
        match self {
            MeasureJson::Explicit { dim, atoms } => {
                let atoms = atoms
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        Ok(Atom {
                            point: a.point.parse().with_context(|| format!("atom {i}"))?,
                            projection: matrix_from_json(&a.projection).with_context(|| format!("atom {i}"))?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(FiniteSpectralMeasure::new_validated(*dim, atoms)?)
            }
            MeasureJson::Hermitian { hermitian, merge_tol } => {
                Ok(FiniteSpectralMeasure::from_hermitian(&matrix_from_json(hermitian)?, *merge_tol)?)
            }
        }
    }
}

impl From<&FiniteSpectralMeasure> for MeasureJson {
    fn from(e: &FiniteSpectralMeasure) -> Self {
        MeasureJson::Explicit {
            dim: e.dim(),
            atoms: e
                .atoms()
                .iter()
                .map(|a| AtomJson { point: a.point.into(), projection: matrix_to_json(&a.projection) })
                .collect(),
        }
    }
}

/// A Haagerup-like table: vector-valued (one vector per atom) or
/// matrix-valued (one matrix per atom).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableJson {
    Vector(VectorTableJson),
    Matrix(MatrixTableJson),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindJson {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrandJson {
    /// `terms[n][i]` lists the values of the `i`-th factor of term `n`, one per
    /// atom.
    Projective {
        terms: Vec<Vec<Vec<ComplexJson>>>,
    },
    Haagerup {
        head: VectorTableJson,
        middles: Vec<MatrixTableJson>,
        tail: VectorTableJson,
    },
    HaagerupLike {
        kind: KindJson,
        alpha: TableJson,
        beta: TableJson,
        gamma: TableJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<TableJson>,
    },
}

fn vector_table(t: &VectorTableJson) -> Result<VectorTable> {
    let width = t.first().map_or(0, Vec::len);
    Ok(VectorTable::new(width, t.iter().map(|v| v.iter().copied().map(complex).collect()).collect())?)
}

fn vector_table_json(t: &VectorTable) -> VectorTableJson {
    (0..t.atoms()).map(|a| t.at(a).iter().copied().map(complex_json).collect()).collect()
}

fn matrix_table(t: &MatrixTableJson) -> Result<MatrixTable> {
    let per_atom = t.iter().map(dmatrix_from_json).collect::<Result<Vec<_>>>()?;
    let (rows, cols) = per_atom.first().map_or((0, 0), |m| (m.nrows(), m.ncols()));
    Ok(MatrixTable::new(rows, cols, per_atom)?)
}

fn matrix_table_json(t: &MatrixTable) -> MatrixTableJson {
    (0..t.atoms()).map(|a| dmatrix_to_json(t.at(a))).collect()
}

fn expect_vector(name: &str, t: &TableJson) -> Result<VectorTable> {
    match t {
        TableJson::Vector(v) => vector_table(v).with_context(|| format!("table {name}")),
        TableJson::Matrix(_) => bail!("table {name} must be vector-valued"),
    }
}

fn expect_matrix(name: &str, t: &TableJson) -> Result<MatrixTable> {
    match t {
        TableJson::Matrix(m) => matrix_table(m).with_context(|| format!("table {name}")),
        TableJson::Vector(_) => bail!("table {name} must be matrix-valued"),
    }
}

impl IntegrandJson {
    pub fn parse(&self) -> Result<Integrand> {
        match self {
            IntegrandJson::Projective { terms } => {
                let counts: Vec<usize> = terms
                    .first()
                    .ok_or_else(|| anyhow!("projective integrand needs at least one term"))?
                    .iter()
                    .map(Vec::len)
                    .collect();
                let terms = terms
                    .iter()
                    .map(|factors| {
                        factors
                            .iter()
                            .map(|values| Ok(ScalarTable::new(values.iter().copied().map(complex).collect())?))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ProjectiveRep::new(counts, terms)?.into())
            }
            IntegrandJson::Haagerup { head, middles, tail } => {
                let middles = middles
                    .iter()
                    .enumerate()
                    .map(|(i, m)| matrix_table(m).with_context(|| format!("middle {i}")))
                    .collect::<Result<Vec<_>>>()?;
                let head = vector_table(head).context("head")?;
                let tail = vector_table(tail).context("tail")?;
                Ok(HaagerupChainRep::new(head, middles, tail)?.into())
            }
            IntegrandJson::HaagerupLike { kind, alpha, beta, gamma, delta } => {
                let rep = match (kind, delta) {
                    (KindJson::First, None) => HaagerupLikeRep::FirstKindTriple {
                        alpha: expect_vector("alpha", alpha)?,
                        beta: expect_vector("beta", beta)?,
                        gamma: expect_matrix("gamma", gamma)?,
                    },
                    (KindJson::Second, None) => HaagerupLikeRep::SecondKindTriple {
                        alpha: expect_matrix("alpha", alpha)?,
                        beta: expect_vector("beta", beta)?,
                        gamma: expect_vector("gamma", gamma)?,
                    },
                    (KindJson::First, Some(delta)) => HaagerupLikeRep::FirstKindQuadruple {
                        alpha: expect_vector("alpha", alpha)?,
                        beta: expect_vector("beta", beta)?,
                        gamma: expect_matrix("gamma", gamma)?,
                        delta: expect_matrix("delta", delta)?,
                    },
                    (KindJson::Second, Some(delta)) => HaagerupLikeRep::SecondKindQuadruple {
                        alpha: expect_matrix("alpha", alpha)?,
                        beta: expect_matrix("beta", beta)?,
                        gamma: expect_vector("gamma", gamma)?,
                        delta: expect_vector("delta", delta)?,
                    },
                };
                Ok(rep.validated()?.into())
            }
        }
    }
}

impl From<&Integrand> for IntegrandJson {
    fn from(integrand: &Integrand) -> Self {
        let v = |t: &VectorTable| TableJson::Vector(vector_table_json(t));
        let m = |t: &MatrixTable| TableJson::Matrix(matrix_table_json(t));
        match integrand {
            Integrand::Projective(rep) => IntegrandJson::Projective {
                terms: rep
                    .terms()
                    .iter()
                    .map(|factors| {
                        factors.iter().map(|s| s.values().iter().copied().map(complex_json).collect()).collect()
                    })
                    .collect(),
            },
            Integrand::Haagerup(rep) => IntegrandJson::Haagerup {
                head: vector_table_json(rep.head()),
                middles: rep.middles().iter().map(matrix_table_json).collect(),
                tail: vector_table_json(rep.tail()),
            },
            Integrand::HaagerupLike(rep) => match rep {
                HaagerupLikeRep::FirstKindTriple { alpha, beta, gamma } => IntegrandJson::HaagerupLike {
                    kind: KindJson::First,
                    alpha: v(alpha),
                    beta: v(beta),
                    gamma: m(gamma),
                    delta: None,
                },
                HaagerupLikeRep::SecondKindTriple { alpha, beta, gamma } => IntegrandJson::HaagerupLike {
                    kind: KindJson::Second,
                    alpha: m(alpha),
                    beta: v(beta),
                    gamma: v(gamma),
                    delta: None,
                },
                HaagerupLikeRep::FirstKindQuadruple { alpha, beta, gamma, delta } => IntegrandJson::HaagerupLike {
                    kind: KindJson::First,
                    alpha: v(alpha),
                    beta: v(beta),
                    gamma: m(gamma),
                    delta: Some(m(delta)),
                },
                HaagerupLikeRep::SecondKindQuadruple { alpha, beta, gamma, delta } => IntegrandJson::HaagerupLike {
                    kind: KindJson::Second,
                    alpha: m(alpha),
                    beta: m(beta),
                    gamma: v(gamma),
                    delta: Some(v(delta)),
                },
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentsJson {
    pub p: ExponentJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<ExponentJson>,
}

/// Parsed exponents of an instance file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponents {
    pub p: SchattenExponent,
    pub q: Option<SchattenExponent>,
}

/// The on-disk instance format read by `moi eval`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub measures: Vec<MeasureJson>,
    pub operators: Vec<MatrixJson>,
    pub integrand: IntegrandJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<ExponentsJson>,
}

impl InstanceFile {
    pub fn from_instance(inst: &MoiInstance, exponents: Option<Exponents>) -> Self {
        InstanceFile {
            measures: inst.measures().iter().map(MeasureJson::from).collect(),
            operators: inst.operators().iter().map(matrix_to_json).collect(),
            integrand: inst.integrand().into(),
            exponents: exponents.map(|e| ExponentsJson { p: e.p.into(), q: e.q.map(Into::into) }),
        }
    }

    pub fn parse(&self) -> Result<(MoiInstance, Option<Exponents>)> {
        let measures = self
            .measures
            .iter()
            .enumerate()
            .map(|(i, m)| m.parse().with_context(|| format!("measure {i}")))
            .collect::<Result<Vec<_>>>()?;
        let operators = self
            .operators
            .iter()
            .enumerate()
            .map(|(i, m)| matrix_from_json(m).with_context(|| format!("operator {i}")))
            .collect::<Result<Vec<_>>>()?;
        let integrand = self.integrand.parse().context("integrand")?;
        let inst = MoiInstance::new(measures, operators, integrand)?;
        let exponents = match &self.exponents {
            None => None,
            Some(e) => Some(Exponents {
                p: e.p.parse().context("exponent p")?,
                q: e.q.as_ref().map(ExponentJson::parse).transpose().context("exponent q")?,
            }),
        };
        Ok((inst, exponents))
    }
}

/// `{"1": …, "2": …, "inf": …}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchattenSummary {
    #[serde(rename = "1")]
    pub one: f64,
    #[serde(rename = "2")]
    pub two: f64,
    #[serde(rename = "inf")]
    pub inf: f64,
}

impl SchattenSummary {
    pub fn of(m: &ComplexMatrix) -> Result<Self> {
        Ok(SchattenSummary {
            one: schatten_norm(m, SchattenExponent::ONE)?,
            two: schatten_norm(m, SchattenExponent::TWO)?,
            inf: schatten_norm(m, SchattenExponent::INFINITY)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportJson {
    pub tag: &'static str,
    pub p: ExponentJson,
    pub q: ExponentJson,
    pub exponents: Vec<ExponentJson>,
    pub r: ExponentJson,
    pub lhs: RealJson,
    pub rhs: RealJson,
    pub ratio: RealJson,
    pub holds: bool,
    pub tol: f64,
}

impl From<&BoundReport> for ReportJson {
    fn from(report: &BoundReport) -> Self {
        let first = report.exponents.first().copied().unwrap_or(report.r);
        let last = report.exponents.last().copied().unwrap_or(report.r);
        ReportJson {
            tag: report.tag.as_str(),
            p: first.into(),
            q: last.into(),
            exponents: report.exponents.iter().map(|&p| p.into()).collect(),
            r: report.r.into(),
            lhs: report.lhs.into(),
            rhs: report.rhs.into(),
            ratio: report.ratio.into(),
            holds: report.holds,
            tol: report.tol,
        }
    }
}

/// What `moi eval` writes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalOutput {
    pub result: MatrixJson,
    pub schatten: SchattenSummary,
    pub rep_norm_bound: f64,
    pub evaluator: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<ReportJson>,
}

/// Pretty-printed JSON followed by a newline.
pub fn to_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
