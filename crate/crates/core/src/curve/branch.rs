//! Turning points: the zeros of the ζ-discriminant away from the punctures.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{sheet_order, sheets_anywhere, CurveConfig, CurveError, SpectralData};
use crate::poly::{self, C64};

/// A branch point of the spectral cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TurningPoint {
    pub id: usize,
    pub position: C64,
    /// Sorted sheet indices of the colliding pair at the probe point
    /// `position + probe_radius`.
    pub pair: (usize, usize),
    pub double_root: C64,
    /// `c` in `Δζ ≈ c (z − z0)^{1/2}` for the colliding pair.
    pub local_coefficient: C64,
    pub probe_radius: f64,
    pub multiplicity: usize,
    pub simple: bool,
}

/// Polynomial (in `z`) coefficients of `Q σ`, where `Q` clears all
/// denominators. Index `k` holds the coefficient of `ζ^k`.
fn cleared_coefficients(data: &SpectralData) -> Vec<Vec<C64>> {
    let k = data.rank();
    let phis = data.coefficients();
    let one = vec![C64::new(1.0, 0.0)];
    let mut out = vec![Vec::new(); k + 1];
    let q = phis.iter().fold(one.clone(), |acc, f| poly::mul(&acc, f.denominator()));
    out[k] = q;
    for (i, f) in phis.iter().enumerate() {
        let mut term = poly::scale(f.numerator(), C64::new(-1.0, 0.0));
        for (j, g) in phis.iter().enumerate() {
            if j != i {
                term = poly::mul(&term, g.denominator());
            }
        }
        out[k - (i + 1)] = term;
    }
    out
}

fn sylvester_det(p: &[C64], dp: &[C64]) -> C64 {
    // p has degree k, dp degree k-1 (both ascending; lead coefficients last)
    let k = p.len() - 1;
    let n = 2 * k - 1;
    if n == 1 {
        return dp[0];
    }
    let mut m = DMatrix::<C64>::zeros(n, n);
    for r in 0..k - 1 {
        for (j, &c) in p.iter().rev().enumerate() {
            m[(r, r + j)] = c;
        }
    }
    for r in 0..k {
        for (j, &c) in dp.iter().rev().enumerate() {
            m[(k - 1 + r, r + j)] = c;
        }
    }
    m.lu().determinant()
}

/// The ζ-discriminant (resultant of `Qσ` and `∂_ζ(Qσ)`) as a polynomial in
/// `z`, recovered by interpolation on the unit circle.
pub fn discriminant(data: &SpectralData) -> Vec<C64> {
    let cleared = cleared_coefficients(data);
    let k = data.rank();
    let max_deg = cleared.iter().map(|c| c.len().saturating_sub(1)).max().unwrap_or(0);
    let n = (2 * k - 1) * max_deg + 1;
    let samples: Vec<C64> = (0..n)
        .map(|j| {
            let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
            let p: Vec<C64> = cleared.iter().map(|c| poly::eval(c, z)).collect();
            let dp = poly::derivative(&p);
            sylvester_det(&p, &dp)
        })
        .collect();
    let mut coeffs: Vec<C64> = (0..n)
        .map(|m| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, s) in samples.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * ((j * m) % n) as f64 / n as f64;
                acc += s * C64::from_polar(1.0, ang);
            }
            acc / n as f64
        })
        .collect();
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for c in coeffs.iter_mut() {
        if c.norm() < 1e-13 * scale {
            *c = C64::new(0.0, 0.0);
        }
    }
    poly::trim(&coeffs, 0.0)
}

/// All turning points inside the domain disk, sorted by position.
pub fn branch_points(data: &SpectralData, cfg: &CurveConfig) -> Result<Vec<TurningPoint>, CurveError> {
    if data.rank() < 2 {
        return Ok(Vec::new());
    }
    let disc = discriminant(data);
    if disc.len() <= 1 {
        return Ok(Vec::new());
    }
    let roots = poly::roots(&disc).map_err(|source| CurveError::RootFailure {
        z: C64::new(0.0, 0.0),
        source,
    })?;
    let clusters = poly::cluster_roots(&roots, 1e-5);
    let finite = &data.punctures().finite;
    let mut candidates: Vec<(C64, usize)> = clusters
        .into_iter()
        .map(|(z, m)| if m == 1 { (newton_polish(&disc, z), m) } else { (z, m) })
        .filter(|(z, _)| {
            !finite.iter().any(|p| (p - z).norm() <= 1e-5 * (1.0 + p.norm())) && z.norm() < data.domain_radius()
        })
        .collect();
    candidates.sort_by(|a, b| sheet_order(&a.0, &b.0));

    let mut out = Vec::with_capacity(candidates.len());
    for (id, &(z0, multiplicity)) in candidates.iter().enumerate() {
        let nearest = candidates
            .iter()
            .map(|(w, _)| (w - z0).norm())
            .filter(|&d| d > 0.0)
            .chain(finite.iter().map(|p| (p - z0).norm()))
            .fold(f64::INFINITY, f64::min);
        let probe = if nearest.is_finite() {
            1e-3 * nearest.min(1.0)
        } else {
            1e-3
        };
        let (pair, double_root, c) = local_fit(data, z0, probe, cfg)?;
        let simple = multiplicity == 1;
        if !simple && cfg.strict {
            return Err(CurveError::DegenerateBranch {
                position: z0,
                multiplicity,
            });
        }
        out.push(TurningPoint {
            id,
            position: z0,
            pair,
            double_root,
            local_coefficient: c,
            probe_radius: probe,
            multiplicity,
            simple,
        });
    }
    Ok(out)
}

fn newton_polish(p: &[C64], mut z: C64) -> C64 {
    for _ in 0..4 {
        let (v, dv) = poly::eval_with_derivative(p, z);
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        if !step.is_finite() || step.norm() > 1e-4 * (1.0 + z.norm()) {
            break;
        }
        z -= step;
    }
    z
}

fn closest_pair(values: &[C64]) -> (usize, usize) {
    let mut best = (f64::INFINITY, 0, 1);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = (values[i] - values[j]).norm();
            if d < best.0 {
                best = (d, i, j);
            }
        }
    }
    (best.1, best.2)
}

/// Least-squares fit of `Δζ² ≈ c² (z − z0)` on a small probe circle.
fn local_fit(
    data: &SpectralData,
    z0: C64,
    probe: f64,
    cfg: &CurveConfig,
) -> Result<((usize, usize), C64, C64), CurveError> {
    let n = 16;
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    let mut pair = (0, 1);
    let mut double_root = C64::new(0.0, 0.0);
    for k in 0..n {
        let w = C64::from_polar(probe, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
        let values = sheets_anywhere(data, z0 + w, cfg)?;
        let (i, j) = closest_pair(&values);
        let d = values[i] - values[j];
        num += w.conj() * d * d;
        den += w.norm_sqr();
        if k == 0 {
            pair = (i, j);
            double_root = 0.5 * (values[i] + values[j]);
        }
    }
    let c2 = num / den;
    Ok((pair, double_root, c2.sqrt()))
}
