//! Spectral data on the punctured Riemann sphere and the sheets of its
//! spectral curve `ζ^K − Σ φ_i(z) ζ^{K−i} = 0`.

mod branch;
mod continuation;
mod gmn;

pub use branch::{branch_points, discriminant, TurningPoint};
pub use continuation::{continue_sheets, match_labels, track};
pub use gmn::{gmn_check, GmnReport, PairPole, PunctureLocation, PunctureReport};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{self, RootError, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("invalid spectral data: {0}")]
    InvalidData(String),
    #[error("root finding failed at z = {z}: {source}")]
    RootFailure { z: C64, source: RootError },
    #[error("root residual {residual:e} above tolerance at z = {z}")]
    ResidualTooLarge { z: C64, residual: f64 },
    #[error("ambiguous continuation near z = {z}: step fell below the minimum")]
    AmbiguousContinuation { z: C64 },
    #[error("degenerate branch point at z = {position} (discriminant multiplicity {multiplicity})")]
    DegenerateBranch { position: C64, multiplicity: usize },
    #[error("point z = {z} is within clearance of a puncture")]
    NearPuncture { z: C64 },
    #[error("point z = {z} lies outside the domain disk")]
    OutsideDomain { z: C64 },
}

/// Numerical tolerances for sheet evaluation and continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CurveConfig {
    pub residual_tol: f64,
    pub sheet_match_tol: f64,
    pub clearance_tol: f64,
    /// Smallest step (in |z|) continuation may bisect down to.
    pub min_step: f64,
    /// Reject non-simple branch points instead of reporting them.
    pub strict: bool,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            sheet_match_tol: 1e-7,
            clearance_tol: 1e-6,
            min_step: 1e-11,
            strict: false,
        }
    }
}

/// A ratio of complex polynomials, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    numerator: Vec<C64>,
    denominator: Vec<C64>,
}

impl RationalFunction {
    pub fn new(numerator: Vec<C64>, denominator: Vec<C64>) -> Result<Self, CurveError> {
        let numerator = poly::trim(&numerator, 0.0);
        let denominator = poly::trim(&denominator, 0.0);
        if denominator.is_empty() {
            return Err(CurveError::InvalidData("denominator is identically zero".into()));
        }
        if numerator.iter().chain(&denominator).any(|c| !c.is_finite()) {
            return Err(CurveError::InvalidData("non-finite coefficient".into()));
        }
        Ok(Self { numerator, denominator })
    }

    pub fn polynomial(coeffs: Vec<C64>) -> Self {
        Self::new(coeffs, vec![C64::new(1.0, 0.0)]).expect("unit denominator")
    }

    pub fn zero() -> Self {
        Self::polynomial(Vec::new())
    }

    pub fn numerator(&self) -> &[C64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[C64] {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_empty()
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator.len() == 1
    }

    pub fn eval(&self, z: C64) -> C64 {
        if self.is_zero() {
            return C64::new(0.0, 0.0);
        }
        poly::eval(&self.numerator, z) / poly::eval(&self.denominator, z)
    }

    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        if self.is_zero() {
            return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        }
        let (n, dn) = poly::eval_with_derivative(&self.numerator, z);
        let (d, dd) = poly::eval_with_derivative(&self.denominator, z);
        (n / d, (dn * d - n * dd) / (d * d))
    }

    /// Finite poles: denominator roots at which the numerator does not vanish
    /// to at least the same order.
    pub fn poles(&self) -> Vec<C64> {
        if self.is_zero() || self.is_polynomial() {
            return Vec::new();
        }
        let Ok(roots) = poly::roots(&self.denominator) else {
            return Vec::new();
        };
        poly::cluster_roots(&roots, 1e-7)
            .into_iter()
            .filter(|&(p, _)| matches!(self.valuation_at(p), Some((v, _)) if v < 0))
            .map(|(p, _)| p)
            .collect()
    }

    /// Order of vanishing at a finite point and the leading Laurent
    /// coefficient. `None` for the zero function.
    pub fn valuation_at(&self, p: C64) -> Option<(i64, C64)> {
        if self.is_zero() {
            return None;
        }
        let (vn, ln) = leading_term(&poly::taylor_shift(&self.numerator, p));
        let (vd, ld) = leading_term(&poly::taylor_shift(&self.denominator, p));
        Some((vn as i64 - vd as i64, ln / ld))
    }

    /// Valuation in the coordinate `w = 1/z` at the point at infinity.
    pub fn valuation_at_infinity(&self) -> Option<(i64, C64)> {
        if self.is_zero() {
            return None;
        }
        let dn = self.numerator.len() - 1;
        let dd = self.denominator.len() - 1;
        Some((dd as i64 - dn as i64, self.numerator[dn] / self.denominator[dd]))
    }
}

fn leading_term(shifted: &[C64]) -> (usize, C64) {
    let scale = shifted.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let idx = shifted.iter().position(|c| c.norm() > 1e-11 * scale).unwrap_or(0);
    (idx, shifted[idx])
}

/// The puncture set `D`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Punctures {
    pub finite: Vec<C64>,
    pub infinity: bool,
}

impl Punctures {
    pub fn is_empty(&self) -> bool {
        self.finite.is_empty() && !self.infinity
    }
}

/// The input `Φ`: `K` rational coefficients `φ_1..φ_K`, the puncture set and
/// the radius of the working disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    coefficients: Vec<RationalFunction>,
    punctures: Punctures,
    domain_radius: f64,
}

impl SpectralData {
    pub fn new(
        coefficients: Vec<RationalFunction>,
        punctures: Punctures,
        domain_radius: f64,
    ) -> Result<Self, CurveError> {
        if coefficients.is_empty() {
            return Err(CurveError::InvalidData("K must be at least 1".into()));
        }
        if punctures.is_empty() {
            return Err(CurveError::InvalidData("puncture set must be nonempty".into()));
        }
        if !(domain_radius.is_finite() && domain_radius > 0.0) {
            return Err(CurveError::InvalidData("domain radius must be positive".into()));
        }
        for (i, phi) in coefficients.iter().enumerate() {
            for pole in phi.poles() {
                let listed = punctures
                    .finite
                    .iter()
                    .any(|p| (p - pole).norm() <= 1e-6 * (1.0 + pole.norm()));
                if !listed {
                    return Err(CurveError::InvalidData(format!(
                        "pole of phi_{} at {} is not a listed puncture",
                        i + 1,
                        pole
                    )));
                }
            }
        }
        Ok(Self {
            coefficients,
            punctures,
            domain_radius,
        })
    }

    /// Convenience constructor for polynomial coefficients with the single
    /// puncture at infinity.
    pub fn polynomial(coeffs: Vec<Vec<C64>>, domain_radius: f64) -> Result<Self, CurveError> {
        Self::new(
            coeffs.into_iter().map(RationalFunction::polynomial).collect(),
            Punctures {
                finite: Vec::new(),
                infinity: true,
            },
            domain_radius,
        )
    }

    /// Number of sheets `K`.
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[RationalFunction] {
        &self.coefficients
    }

    pub fn punctures(&self) -> &Punctures {
        &self.punctures
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn with_domain_radius(mut self, r: f64) -> Self {
        self.domain_radius = r;
        self
    }

    /// Coefficients of `σ(z, ·)` in ascending powers of `ζ` (length `K + 1`).
    pub fn symbol_coeffs(&self, z: C64) -> Vec<C64> {
        let k = self.rank();
        let mut out = vec![C64::new(0.0, 0.0); k + 1];
        out[k] = C64::new(1.0, 0.0);
        for (i, phi) in self.coefficients.iter().enumerate() {
            out[k - (i + 1)] = -phi.eval(z);
        }
        out
    }

    pub fn symbol(&self, z: C64, zeta: C64) -> C64 {
        poly::eval(&self.symbol_coeffs(z), zeta)
    }

    /// `(∂σ/∂ζ, ∂σ/∂z)` at `(z, ζ)`.
    pub fn symbol_partials(&self, z: C64, zeta: C64) -> (C64, C64) {
        let k = self.rank();
        let mut d_zeta = C64::new(k as f64, 0.0) * zeta.powu(k as u32 - 1);
        let mut d_z = C64::new(0.0, 0.0);
        for (i, phi) in self.coefficients.iter().enumerate() {
            let e = k - (i + 1);
            let (v, dv) = phi.eval_with_derivative(z);
            if e > 0 {
                d_zeta -= v * (e as f64) * zeta.powu(e as u32 - 1);
            }
            d_z -= dv * zeta.powu(e as u32);
        }
        (d_zeta, d_z)
    }

    /// `dζ/dz` along the sheet through `(z, ζ)`.
    pub fn sheet_derivative(&self, z: C64, zeta: C64) -> C64 {
        let (d_zeta, d_z) = self.symbol_partials(z, zeta);
        -d_z / d_zeta
    }

    pub fn near_finite_puncture(&self, z: C64, tol: f64) -> Option<C64> {
        self.punctures.finite.iter().copied().find(|p| (p - z).norm() < tol)
    }
}

/// The `K` roots of `σ(z, ·)` at a basepoint, in a fixed labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetSet {
    pub z: C64,
    pub values: Vec<C64>,
}

impl SheetSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest distance between two sheets.
    pub fn min_gap(&self) -> f64 {
        min_gap(&self.values)
    }
}

pub(crate) fn min_gap(values: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in 0..i {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

/// Deterministic sheet order: by real part, then imaginary part.
pub fn sheet_order(a: &C64, b: &C64) -> Ordering {
    let tol = 1e-12 * (1.0 + a.norm().max(b.norm()));
    if (a.re - b.re).abs() > tol {
        a.re.total_cmp(&b.re)
    } else {
        a.im.total_cmp(&b.im)
    }
}

/// Roots of the symbol at `z`, unsorted, polished and residual-checked.
pub(crate) fn raw_sheets(
    data: &SpectralData,
    z: C64,
    guess: Option<&[C64]>,
    cfg: &CurveConfig,
) -> Result<Vec<C64>, CurveError> {
    let coeffs = data.symbol_coeffs(z);
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(CurveError::NearPuncture { z });
    }
    let mut roots = poly::roots_with_guess(&coeffs, guess).map_err(|source| CurveError::RootFailure { z, source })?;
    for r in roots.iter_mut() {
        let (p, dp) = poly::eval_with_derivative(&coeffs, *r);
        if dp.norm() > 0.0 {
            let step = p / dp;
            if step.is_finite() && step.norm() < 1e-6 * (1.0 + r.norm()) {
                *r -= step;
            }
        }
        let scale: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm() * r.norm().powi(k as i32))
            .sum();
        let residual = poly::eval(&coeffs, *r).norm();
        if residual > cfg.residual_tol * scale.max(1.0) {
            return Err(CurveError::ResidualTooLarge { z, residual });
        }
    }
    Ok(roots)
}

/// The sheets of the spectral curve over `z`, sorted by real then imaginary
/// part.
pub fn eval_sheets(data: &SpectralData, z: C64, cfg: &CurveConfig) -> Result<SheetSet, CurveError> {
    if z.norm() > data.domain_radius() * (1.0 + 1e-12) {
        return Err(CurveError::OutsideDomain { z });
    }
    if data.near_finite_puncture(z, cfg.clearance_tol).is_some() {
        return Err(CurveError::NearPuncture { z });
    }
    let mut values = raw_sheets(data, z, None, cfg)?;
    values.sort_by(sheet_order);
    Ok(SheetSet { z, values })
}

/// Sheets at `z` without the domain-disk check; used where curves are
/// followed slightly beyond the working disk.
pub(crate) fn sheets_anywhere(data: &SpectralData, z: C64, cfg: &CurveConfig) -> Result<Vec<C64>, CurveError> {
    let mut values = raw_sheets(data, z, None, cfg)?;
    values.sort_by(sheet_order);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn airy() -> SpectralData {
        SpectralData::polynomial(vec![vec![], vec![c(0.0, 0.0), c(1.0, 0.0)]], 10.0).unwrap()
    }

    #[test]
    fn airy_sheets_at_one() {
        let s = eval_sheets(&airy(), c(1.0, 0.0), &CurveConfig::default()).unwrap();
        assert!((s.values[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((s.values[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn degree_one_identity() {
        let phi = RationalFunction::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let data = SpectralData::new(
            vec![phi],
            Punctures {
                finite: vec![c(0.0, 0.0)],
                infinity: true,
            },
            10.0,
        )
        .unwrap();
        let s = eval_sheets(&data, c(2.0, 0.0), &CurveConfig::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.values[0] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cubic_sheets_at_origin() {
        let data =
            SpectralData::polynomial(vec![vec![], vec![c(3.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]], 10.0).unwrap();
        let s = eval_sheets(&data, c(0.0, 0.0), &CurveConfig::default()).unwrap();
        let r3 = 3f64.sqrt();
        assert!((s.values[0] - c(-r3, 0.0)).norm() < 1e-13);
        assert!(s.values[1].norm() < 1e-13);
        assert!((s.values[2] - c(r3, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn unlisted_pole_is_rejected() {
        let phi = RationalFunction::new(vec![c(1.0, 0.0)], vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let err = SpectralData::new(
            vec![phi],
            Punctures {
                finite: vec![],
                infinity: true,
            },
            5.0,
        );
        assert!(matches!(err, Err(CurveError::InvalidData(_))));
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert!(RationalFunction::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn empty_punctures_rejected() {
        let err = SpectralData::new(vec![RationalFunction::zero()], Punctures::default(), 5.0);
        assert!(err.is_err());
    }

    #[test]
    fn valuations() {
        // (z - 1)^2 / (z (z + 2))
        let num = poly::mul(&[c(-1.0, 0.0), c(1.0, 0.0)], &[c(-1.0, 0.0), c(1.0, 0.0)]);
        let den = poly::mul(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(2.0, 0.0), c(1.0, 0.0)]);
        let f = RationalFunction::new(num, den).unwrap();
        assert_eq!(f.valuation_at(c(1.0, 0.0)).unwrap().0, 2);
        let (v0, l0) = f.valuation_at(c(0.0, 0.0)).unwrap();
        assert_eq!(v0, -1);
        assert!((l0 - c(0.5, 0.0)).norm() < 1e-12);
        assert_eq!(f.valuation_at_infinity().unwrap().0, 0);
        let mut poles = f.poles();
        poles.sort_by(sheet_order);
        assert_eq!(poles.len(), 2);
    }

    #[test]
    fn sheet_derivative_matches_closed_form() {
        // ζ = ±sqrt(z), dζ/dz = 1/(2ζ)
        let data = airy();
        let z = c(0.3, 0.8);
        let s = eval_sheets(&data, z, &CurveConfig::default()).unwrap();
        for v in s.values {
            let d = data.sheet_derivative(z, v);
            assert!((d - 0.5 / v).norm() < 1e-12);
        }
    }
}
