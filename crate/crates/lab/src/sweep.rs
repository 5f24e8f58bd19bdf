//! Growth sweeps of the extremal constructions, written as CSV.

use std::fmt::Write as _;
use std::str::FromStr;

use anyhow::{anyhow, bail, Result};
use moi_core::sharpness::{growth_sweep, SweepRow, SweepTemplate};
use moi_core::SchattenExponent;

pub const CSV_HEADER: &str = "n,s,p1,pm1,lhs,rhs,ratio";

/// A target exponent `s`, either absolute or a multiple of the sharp
/// exponent `r` of the case (`r`, `r/2`, `0.8r`, `0.8*r`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SValue {
    Absolute(SchattenExponent),
    TimesR(f64),
}

impl SValue {
    pub fn resolve(self, template: &SweepTemplate) -> Result<SchattenExponent> {
        match self {
            SValue::Absolute(s) => Ok(s),
            SValue::TimesR(t) => Ok(template.r().scaled(t)?),
        }
    }
}

impl FromStr for SValue {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "r" {
            return Ok(SValue::TimesR(1.0));
        }
        if let Some(den) = s.strip_prefix("r/") {
            let den: f64 = den.parse().map_err(|_| anyhow!("cannot parse s = {s:?}"))?;
            if !(den.is_finite() && den > 0.0) {
                bail!("s = {s:?} needs a positive divisor");
            }
            return Ok(SValue::TimesR(1.0 / den));
        }
        if let Some(factor) = s.strip_suffix('r') {
            let factor: f64 = factor.trim_end_matches('*').parse().map_err(|_| anyhow!("cannot parse s = {s:?}"))?;
            if !(factor.is_finite() && factor > 0.0) {
                bail!("s = {s:?} needs a positive factor");
            }
            return Ok(SValue::TimesR(factor));
        }
        Ok(SValue::Absolute(s.parse()?))
    }
}

/// Twelve significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        String::from("nan")
    } else if x > 0.0 {
        String::from("inf")
    } else {
        String::from("-inf")
    }
}

pub fn format_exponent(p: SchattenExponent) -> String {
    match p.as_finite() {
        Some(v) => format_real(v),
        None => String::from("inf"),
    }
}

pub fn csv_row(row: &SweepRow) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        row.n,
        format_exponent(row.s),
        format_exponent(row.p1),
        format_exponent(row.pm1),
        format_real(row.lhs),
        format_real(row.rhs),
        format_real(row.ratio)
    )
}

/// The header and one block of rows per entry of `s_values`, in order.
pub fn sweep_csv(template: &SweepTemplate, dims: &[usize], s_values: &[SValue]) -> Result<String> {
    if s_values.is_empty() {
        bail!(moi_core::Error::InvalidInput(String::from("at least one s is needed")));
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for &s in s_values {
        for row in growth_sweep(template, dims, s.resolve(template)?)? {
            let _ = writeln!(out, "{}", csv_row(&row));
        }
    }
    Ok(out)
}
