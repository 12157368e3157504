//! Family-spec files: JSON in, a validated symbolic family plus analysis
//! options out.
//!
//! A spec names the degree, the d + 1 numerator and denominator
//! coefficients as growth-grammar strings (constants, `exp(r*n)`, `n`,
//! `n^r`, products and sums thereof), an optional exact Möbius
//! pre-conjugation, and the analysis options. Everything is validated
//! here so the library layers below can assume well-formed input.

use super::CliError;
use crate::family::{parse_growth_expr, FamilyMap, GaussRat, GrowthExpr, MobiusExact};
use serde::Deserialize;
use std::path::Path;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default)]
    pub name: Option<String>,
    pub degree: usize,
    pub numerator: Vec<String>,
    pub denominator: Vec<String>,
    #[serde(default)]
    pub conjugation: Option<MobiusSpec>,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

/// An exact Möbius change of coordinates z -> (az + b)/(cz + d); entries
/// are grammar constants (Gaussian rationals).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobiusSpec {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Parameter grid for resultant profiles and periodic-point tracking.
    pub n_grid: Vec<u64>,
    /// Track periods 1..=l_max.
    pub l_max: u32,
    /// Working float precision in bits.
    pub precision: u32,
    /// Seed for the Lyapunov sampler.
    pub seed: u64,
    /// Grid for the non-archimedean Lyapunov estimate.
    pub lyapunov_grid: Vec<u64>,
    pub lyapunov_depth: u32,
    pub lyapunov_samples: u32,
    /// Dichotomy threshold fraction in (0, 1/2).
    pub alpha_fraction: f64,
    /// Scale-classification tolerance on the linear rate a.
    pub tol_a: f64,
    /// Scale-classification tolerance on the logarithmic rate b.
    pub tol_b: f64,
    /// Maximum rms residual before a growth fit is rejected.
    pub fit_gate: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            n_grid: vec![20, 30, 46, 70, 107, 163, 248, 377, 574, 873, 1328, 2000],
            l_max: 2,
            precision: 256,
            seed: 7,
            lyapunov_grid: vec![50, 100, 200, 400],
            lyapunov_depth: 14,
            lyapunov_samples: 128,
            alpha_fraction: 0.4,
            tol_a: 0.05,
            tol_b: 0.1,
            fit_gate: 1.0,
        }
    }
}

pub fn load_spec(path: &Path) -> Result<FamilySpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| CliError::Io { path: path.display().to_string(), err })?;
    Ok(serde_json::from_str(&text)?)
}

impl FamilySpec {
    /// Parse the coefficient grammar, apply any pre-conjugation, and hand
    /// back the family with validated options.
    pub fn build(&self) -> Result<(FamilyMap, AnalysisOptions), CliError> {
        let p = parse_side("numerator", &self.numerator)?;
        let q = parse_side("denominator", &self.denominator)?;
        let mut family = FamilyMap::new(self.degree, p, q)?;
        if let Some(m) = &self.conjugation {
            family = family.conjugate(&m.to_mobius()?)?;
        }
        self.analysis.validate()?;
        Ok((family, self.analysis.clone()))
    }
}

fn parse_side(which: &'static str, texts: &[String]) -> Result<Vec<GrowthExpr>, CliError> {
    texts
        .iter()
        .enumerate()
        .map(|(index, text)| {
            parse_growth_expr(text)
                .map_err(|err| CliError::BadCoefficient { which, index, err })
        })
        .collect()
}

impl MobiusSpec {
    fn to_mobius(&self) -> Result<MobiusExact, CliError> {
        Ok(MobiusExact {
            a: constant_entry(&self.a)?,
            b: constant_entry(&self.b)?,
            c: constant_entry(&self.c)?,
            d: constant_entry(&self.d)?,
        })
    }
}

fn constant_entry(text: &str) -> Result<GaussRat, CliError> {
    let expr = parse_growth_expr(text).map_err(|_| CliError::BadConjugation)?;
    match expr.terms() {
        [] => Ok(GaussRat::zero()),
        [t] if t.alpha.cmp0() == std::cmp::Ordering::Equal
            && t.beta.cmp0() == std::cmp::Ordering::Equal =>
        {
            Ok(t.a.clone())
        }
        _ => Err(CliError::BadConjugation),
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_grid.len() < 6
            || self.n_grid.first().is_none_or(|&n| n < 2)
            || !self.n_grid.windows(2).all(|w| w[0] < w[1])
        {
            return Err(CliError::BadGrid);
        }
        if !(1..=6).contains(&self.l_max) {
            return Err(CliError::BadOption("l_max must lie in 1..=6"));
        }
        if !(64..=16384).contains(&self.precision) {
            return Err(CliError::BadOption("precision must lie in 64..=16384 bits"));
        }
        if !(self.alpha_fraction > 0.0 && self.alpha_fraction < 0.5) {
            return Err(CliError::BadOption("alpha_fraction must lie in (0, 1/2)"));
        }
        if self.lyapunov_grid.len() < 4 || self.lyapunov_grid.iter().any(|&n| n < 3) {
            return Err(CliError::BadOption(
                "lyapunov_grid needs at least four parameters, all >= 3",
            ));
        }
        if self.lyapunov_depth < 8 || self.lyapunov_samples < 1 {
            return Err(CliError::BadOption(
                "lyapunov_depth must be >= 8 and lyapunov_samples >= 1",
            ));
        }
        if !(self.tol_a > 0.0 && self.tol_b > 0.0 && self.fit_gate > 0.0) {
            return Err(CliError::BadOption("fit tolerances must be positive"));
        }
        Ok(())
    }
}
