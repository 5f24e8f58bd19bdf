//! Extremal constructions on the cyclic group `ℤ_n` showing that the class
//! `S_r`, `1/r = 1/p_1♯ + 1/p_{m−1}♯`, cannot be improved.
//!
//! Every construction has an integrand of representation norm 1 and evaluates
//! to a diagonal operator in the Fourier basis, either `Σ c_j d_j P_j` or
//! `Σ d_j² P_j`. Sweeping `n` with sequences that sit on the boundary of the
//! relevant `ℓ^p` spaces shows `‖W‖_{S_s} / RHS` growing without bound for
//! `s < r` and staying bounded for `s = r`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrand::{HaagerupChainRep, Integrand};
use crate::linalg::{lp_norm, ComplexMatrix, SchattenExponent};
use crate::moi::{eval_haagerup, MoiInstance};
use crate::spectral::{root_of_unity, CyclicModel, MatrixTable, VectorTable};

/// Largest truncation a sweep accepts.
pub const MAX_SWEEP_N: usize = 8192;

/// Largest `n` at which a sweep materializes the full instance to cross-check
/// the closed form.
pub const CROSS_CHECK_MAX_N: usize = 64;

const CROSS_CHECK_TOL: f64 = 1e-10;

/// Position of `p_1` and `p_{m−1}` relative to 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `p_1, p_{m−1} ≥ 2`.
    BothLarge,
    /// `p_1, p_{m−1} ≤ 2`.
    BothSmall,
    /// `p_1 ≥ 2 ≥ p_{m−1}`.
    MixedLargeSmall,
    /// `p_1 ≤ 2 ≤ p_{m−1}`.
    MixedSmallLarge,
}

impl Regime {
    pub const ALL: [Regime; 4] =
        [Regime::BothLarge, Regime::BothSmall, Regime::MixedLargeSmall, Regime::MixedSmallLarge];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::BothLarge => "both-large",
            Regime::BothSmall => "both-small",
            Regime::MixedLargeSmall => "mixed-large-small",
            Regime::MixedSmallLarge => "mixed-small-large",
        }
    }

    /// Whether `(p1, pm1)` lies in this regime.
    pub fn admits(self, p1: SchattenExponent, pm1: SchattenExponent) -> bool {
        let large = |p: SchattenExponent| p.at_least(2.0);
        let small = |p: SchattenExponent| p.at_most(2.0);
        match self {
            Regime::BothLarge => large(p1) && large(pm1),
            Regime::BothSmall => small(p1) && small(pm1),
            Regime::MixedLargeSmall => large(p1) && small(pm1),
            Regime::MixedSmallLarge => small(p1) && large(pm1),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    /// Accepts the hyphenated names; `mixed` means `mixed-large-small`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "both-large" => Ok(Regime::BothLarge),
            "both-small" => Ok(Regime::BothSmall),
            "mixed" | "mixed-large-small" => Ok(Regime::MixedLargeSmall),
            "mixed-small-large" => Ok(Regime::MixedSmallLarge),
            other => Err(Error::InvalidInput(format!("unknown regime '{other}'"))),
        }
    }
}

/// `1/r = 1/p_1♯ + 1/p_{m−1}♯`.
pub fn sharp_exponent(p1: SchattenExponent, pm1: SchattenExponent) -> SchattenExponent {
    SchattenExponent::harmonic_sum(&[p1.sharp(), pm1.sharp()]).expect("p♯ >= 2 keeps the sum in range")
}

/// Everything except the sequences: arity, regime and the two exponents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepTemplate {
    pub arity: usize,
    pub regime: Regime,
    pub p1: SchattenExponent,
    pub pm1: SchattenExponent,
}

impl SweepTemplate {
    pub fn new(arity: usize, regime: Regime, p1: SchattenExponent, pm1: SchattenExponent) -> Result<Self> {
        if arity != 3 && arity != 4 {
            return Err(Error::InvalidInput(format!("constructions exist for arity 3 and 4, got {arity}")));
        }
        if !regime.admits(p1, pm1) {
            return Err(Error::ExponentRange(format!("(p1, pm1) = ({p1}, {pm1}) is not in regime {regime}")));
        }
        Ok(SweepTemplate { arity, regime, p1, pm1 })
    }

    pub fn r(&self) -> SchattenExponent {
        sharp_exponent(self.p1, self.pm1)
    }

    /// The case at truncation `n` with [`default_sequences`].
    pub fn case(&self, n: usize) -> Result<ConstructionCase> {
        let (c, d) = default_sequences(self.regime, self.p1, self.pm1, n);
        ConstructionCase::new(*self, c, d)
    }
}

/// A template together with the sequences `c` and `d` of length `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionCase {
    pub template: SweepTemplate,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

impl ConstructionCase {
    pub fn new(template: SweepTemplate, c: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        let template = SweepTemplate::new(template.arity, template.regime, template.p1, template.pm1)?;
        if d.is_empty() {
            return Err(Error::InvalidInput(String::from("truncation n must be >= 1")));
        }
        if c.len() != d.len() {
            return Err(Error::ShapeMismatch(format!("c has length {}, d has length {}", c.len(), d.len())));
        }
        if !c.iter().chain(&d).all(|x| x.is_finite()) {
            return Err(Error::InvalidInput(String::from("sequences must be finite")));
        }
        Ok(ConstructionCase { template, c, d })
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }
}

/// Boundary witnesses `x_j = (j+1)^{−1/a} · ln(j+2)^{−2/a}`: bounded in `ℓ^a`
/// uniformly in `n`, not in any smaller `ℓ^s`. `c` uses `a = p_1♯`, `d` uses
/// `a = p_{m−1}♯`; in the both-small regime only `d` enters and `c ≡ 1`.
pub fn default_sequences(
    regime: Regime,
    p1: SchattenExponent,
    pm1: SchattenExponent,
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let witness = |a: SchattenExponent| -> Vec<f64> {
        let inv = a.reciprocal();
        (0..n).map(|j| libm::pow((j + 1) as f64, -inv) * libm::pow(libm::log((j + 2) as f64), -2.0 * inv)).collect()
    };
    let d = witness(pm1.sharp());
    let c = match regime {
        Regime::BothSmall => vec![1.0; n],
        _ => witness(p1.sharp()),
    };
    (c, d)
}

/// Diagonal of the closed-form output in the Fourier basis.
pub fn expected_diagonal(case: &ConstructionCase) -> Vec<f64> {
    match case.template.regime {
        Regime::BothSmall => case.d.iter().map(|x| x * x).collect(),
        _ => case.c.iter().zip(&case.d).map(|(x, y)| x * y).collect(),
    }
}

/// `Σ c_j d_j P_j`, or `Σ d_j² P_j` in the both-small regime.
pub fn expected_output(case: &ConstructionCase) -> ComplexMatrix {
    ComplexMatrix::real_diagonal(&expected_diagonal(case))
}

/// How `T_1` and `T_{m−1}` are built from the sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum OperatorShape {
    /// `Σ x_j P_j`.
    Diagonal,
    /// `f ↦ (f, e_0) x`.
    ColumnAtZero,
    /// `f ↦ (f, x) e_0`, i.e. `e_j ↦ x_j e_0`.
    RowAtZero,
}

fn shapes(regime: Regime) -> (OperatorShape, OperatorShape) {
    use OperatorShape::*;
    match regime {
        Regime::BothLarge => (Diagonal, Diagonal),
        Regime::MixedLargeSmall => (Diagonal, RowAtZero),
        Regime::MixedSmallLarge => (ColumnAtZero, Diagonal),
        Regime::BothSmall => (ColumnAtZero, RowAtZero),
    }
}

fn build_operator(shape: OperatorShape, x: &[f64]) -> ComplexMatrix {
    let n = x.len();
    let v: Vec<Complex64> = x.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    let e0 = ComplexMatrix::basis_vector(n, 0);
    match shape {
        OperatorShape::Diagonal => ComplexMatrix::real_diagonal(x),
        OperatorShape::ColumnAtZero => ComplexMatrix::outer(&v, &e0),
        OperatorShape::RowAtZero => ComplexMatrix::outer(&e0, &v),
    }
}

/// `‖T‖_{S_p}` of a constructed operator from its sequence alone.
fn operator_norm(shape: OperatorShape, x: &[f64], p: SchattenExponent) -> f64 {
    match shape {
        OperatorShape::Diagonal => lp_norm(&abs_all(x), p),
        _ => lp_norm(&abs_all(x), SchattenExponent::TWO),
    }
}

fn abs_all(x: &[f64]) -> Vec<f64> {
    x.iter().map(|t| t.abs()).collect()
}

/// Sequences feeding `T_1` and `T_{m−1}`.
fn operator_sequences(case: &ConstructionCase) -> (&[f64], &[f64]) {
    match case.template.regime {
        Regime::BothSmall => (&case.d, &case.d),
        _ => (&case.c, &case.d),
    }
}

/// `‖T_1‖_{S_{p_1}}` and `‖T_{m−1}‖_{S_{p_{m−1}}}` for the built operators.
pub fn operator_norms(case: &ConstructionCase) -> (f64, f64) {
    let (s1, s2) = shapes(case.template.regime);
    let (x1, x2) = operator_sequences(case);
    (operator_norm(s1, x1, case.template.p1), operator_norm(s2, x2, case.template.pm1))
}

/// Built instance with its closed-form value.
#[derive(Clone, Debug)]
pub struct SharpnessInstance {
    pub instance: MoiInstance,
    pub expected: ComplexMatrix,
    pub case: ConstructionCase,
}

/// Builds the construction on `ℤ_n`.
///
/// Head and tail are δ-systems on the Fourier measure; the middle factors live
/// on the position measure and carry `ζ^j`, `ζ̄^j` or `1`, so that
/// `B_j = ∫ζ^j dE` maps `e_0` to `e_j`. The four-factor constructions put
/// `T_2 = P_0` between the two middle factors. The three-factor both-large
/// case is the product `T_1T_2` with the width-one chain `Ψ ≡ 1`.
pub fn build_construction(case: &ConstructionCase) -> Result<SharpnessInstance> {
    let case = ConstructionCase::new(case.template, case.c.clone(), case.d.clone())?;
    let n = case.n();
    let model = CyclicModel::new(n)?;
    let (s1, s2) = shapes(case.template.regime);
    let (x1, x2) = operator_sequences(&case);
    let t1 = build_operator(s1, x1);
    let tm = build_operator(s2, x2);
    let one = Complex64::new(1.0, 0.0);
    let characters =
        |sign: i64| MatrixTable::diagonal(n, n, move |m, j| root_of_unity(sign * (j as i64) * (m as i64), n));
    let constant = || MatrixTable::diagonal(n, n, move |_, _| one);
    let delta = VectorTable::delta_system(n);
    let (integrand, measures, operators) = match (case.template.arity, case.template.regime) {
        (3, Regime::BothLarge) => {
            let ones = VectorTable::from_fn(n, 1, |_, _| one)?;
            let mid = MatrixTable::from_fn(n, 1, 1, |_, _, _| one)?;
            (
                HaagerupChainRep::new(ones.clone(), vec![mid], ones)?,
                vec![model.fourier.clone(), model.position.clone(), model.fourier.clone()],
                vec![t1, tm],
            )
        }
        (3, regime) => {
            let mid = match regime {
                Regime::MixedLargeSmall => characters(1)?,
                Regime::MixedSmallLarge => characters(-1)?,
                _ => constant()?,
            };
            (
                HaagerupChainRep::new(delta.clone(), vec![mid], delta)?,
                vec![model.fourier.clone(), model.position.clone(), model.fourier.clone()],
                vec![t1, tm],
            )
        }
        (_, regime) => {
            let (beta, gamma) = match regime {
                Regime::BothLarge => (characters(1)?, characters(-1)?),
                Regime::MixedLargeSmall => (characters(1)?, constant()?),
                Regime::MixedSmallLarge => (constant()?, characters(-1)?),
                Regime::BothSmall => (constant()?, constant()?),
            };
            let e0 = ComplexMatrix::basis_vector(n, 0);
            (
                HaagerupChainRep::new(delta.clone(), vec![beta, gamma], delta)?,
                vec![model.fourier.clone(), model.position.clone(), model.position.clone(), model.fourier.clone()],
                vec![t1, ComplexMatrix::outer(&e0, &e0), tm],
            )
        }
    };
    let instance = MoiInstance::new(measures, operators, Integrand::Haagerup(integrand))?;
    let expected = expected_output(&case);
    Ok(SharpnessInstance { instance, expected, case })
}

/// One row of a growth sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub s: SchattenExponent,
    pub p1: SchattenExponent,
    pub pm1: SchattenExponent,
    /// `‖W‖_{S_s}`.
    pub lhs: f64,
    /// `‖T_1‖_{S_{p_1}} · ‖T_{m−1}‖_{S_{p_{m−1}}}` (middle operators and the
    /// integrand have norm 1).
    pub rhs: f64,
    pub ratio: f64,
}

/// `‖W‖_{S_s} / RHS` over the truncations `dims` (strictly ascending) with the
/// default sequences. Norms come from the diagonal closed form; the full
/// instance is evaluated once, at `min(dims[0], 64)`, as a cross-check.
pub fn growth_sweep(template: &SweepTemplate, dims: &[usize], s: SchattenExponent) -> Result<Vec<SweepRow>> {
    let template = SweepTemplate::new(template.arity, template.regime, template.p1, template.pm1)?;
    if dims.is_empty() {
        return Err(Error::InvalidInput(String::from("sweep needs at least one dimension")));
    }
    if dims[0] == 0 || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(String::from("dimensions must be positive and strictly ascending")));
    }
    let largest = dims[dims.len() - 1];
    if largest > MAX_SWEEP_N {
        return Err(Error::BlockCapExceeded { dim: largest, cap: MAX_SWEEP_N });
    }
    cross_check(&template.case(dims[0].min(CROSS_CHECK_MAX_N))?)?;
    dims.iter()
        .map(|&n| {
            let case = template.case(n)?;
            let lhs = lp_norm(&abs_all(&expected_diagonal(&case)), s);
            let (a, b) = operator_norms(&case);
            let rhs = a * b;
            Ok(SweepRow {
                n,
                s,
                p1: template.p1,
                pm1: template.pm1,
                lhs,
                rhs,
                ratio: crate::bounds::bound_ratio(lhs, rhs),
            })
        })
        .collect()
}

fn cross_check(case: &ConstructionCase) -> Result<()> {
    let built = build_construction(case)?;
    let w = eval_haagerup(&built.instance)?;
    let err = w.distance(&built.expected);
    let scale = built.instance.scale();
    if err > CROSS_CHECK_TOL * scale {
        return Err(Error::Precondition(format!(
            "construction at n = {} deviates from its closed form by {err:e}",
            case.n()
        )));
    }
    Ok(())
}
