//! Walls: preStokes curves traced in the mass parameter.

mod integrate;

pub use integrate::trace_wall;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{eval_sheets, match_labels, CurveConfig, CurveError, SpectralData, TurningPoint};
use crate::poly::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TracerError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("turning point {0} is not simple")]
    NotSimple(usize),
    #[error("preStokes violation at point {index}: imaginary part {imag:e} against mass {real}")]
    PrestokesViolation { index: usize, imag: f64, real: f64 },
    #[error("point index {index} out of range for wall with {len} points")]
    IndexOutOfRange { index: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceConfig {
    pub theta: f64,
    pub mass_cutoff: f64,
    pub seed_radius: f64,
    pub puncture_radius: f64,
    pub step_init: f64,
    pub step_min: f64,
    pub step_max: f64,
    /// Longest chord allowed between consecutive wall points.
    pub max_segment: f64,
    pub pres_tol: f64,
    pub ode_tol: f64,
    pub max_steps: usize,
    pub curve: CurveConfig,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            theta: 0.0,
            mass_cutoff: 10.0,
            seed_radius: 1e-4,
            puncture_radius: 1e-2,
            step_init: 1e-3,
            step_min: 1e-14,
            step_max: 0.02,
            max_segment: 0.02,
            pres_tol: 1e-6,
            ode_tol: 1e-10,
            max_steps: 50_000,
            curve: CurveConfig::default(),
        }
    }
}

impl TraceConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..1.0).contains(&self.theta) {
            return Err(format!("theta must lie in [0, 1), got {}", self.theta));
        }
        let positive = [
            ("massCutoff", self.mass_cutoff),
            ("seedRadius", self.seed_radius),
            ("punctureRadius", self.puncture_radius),
            ("stepInit", self.step_init),
            ("stepMin", self.step_min),
            ("stepMax", self.step_max),
            ("maxSegment", self.max_segment),
            ("presTol", self.pres_tol),
            ("odeTol", self.ode_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) && !(name == "massCutoff" && v == 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.step_min <= self.step_init && self.step_init <= self.step_max) {
            return Err("stepMin <= stepInit <= stepMax is required".into());
        }
        if self.max_steps == 0 {
            return Err("maxSteps must be positive".into());
        }
        Ok(())
    }

    /// `e^{2πiθ}`.
    pub fn rotation(&self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * self.theta)
    }

    pub fn capture_radius(&self) -> f64 {
        3.0 * self.seed_radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum WallSource {
    #[serde(rename_all = "camelCase")]
    TurningPointRay { turning_point: usize, ray: usize },
    #[serde(rename_all = "camelCase")]
    ScatteredAt { collision: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Termination {
    MassCutoff,
    #[serde(rename_all = "camelCase")]
    EnteredPunctureNeighborhood {
        puncture: usize,
    },
    LeftDomain,
    #[serde(rename_all = "camelCase")]
    HitTurningPoint {
        turning_point: usize,
    },
    StepFailure,
}

/// Starting data for a wall: all sheets at the start point in sorted order,
/// and the ordered pair of slots it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub position: C64,
    pub values: Vec<C64>,
    pub pair: (usize, usize),
    pub mass: f64,
    pub source: WallSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Wall {
    pub id: usize,
    /// Slots of the carried pair in the sorted sheet order at the first point.
    pub sheets: (usize, usize),
    pub points: Vec<C64>,
    pub sheet_values: Vec<(C64, C64)>,
    pub mass_profile: Vec<f64>,
    pub source: WallSource,
    pub termination: Termination,
    pub theta: f64,
}

impl Wall {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start_mass(&self) -> f64 {
        self.mass_profile[0]
    }

    pub fn final_mass(&self) -> f64 {
        *self.mass_profile.last().unwrap_or(&0.0)
    }

    fn rotation(&self) -> C64 {
        C64::from_polar(1.0, -2.0 * PI * self.theta)
    }

    /// `e^{−2πiθ}(ζ_i − ζ_j)` at point `n`.
    pub fn integrand(&self, n: usize) -> C64 {
        let (a, b) = self.sheet_values[n];
        self.rotation() * (a - b)
    }

    /// The tracked pair at an arbitrary point `p` near segment `n`, by
    /// matching fresh roots against a first-order prediction.
    pub fn pair_values_at(
        &self,
        data: &SpectralData,
        n: usize,
        p: C64,
        cfg: &CurveConfig,
    ) -> Result<(C64, C64), CurveError> {
        let z = self.points[n];
        let (a, b) = self.sheet_values[n];
        let pa = a + data.sheet_derivative(z, a) * (p - z);
        let pb = b + data.sheet_derivative(z, b) * (p - z);
        let roots = crate::curve::sheets_anywhere(data, p, cfg)?;
        let perm = match_labels(&[pa, pb], &roots);
        Ok((roots[perm[0]], roots[perm[1]]))
    }

    /// Mass at a point `p` on segment `n` (between points `n` and `n+1`).
    pub fn mass_at(&self, data: &SpectralData, n: usize, p: C64, cfg: &CurveConfig) -> Result<f64, CurveError> {
        let (a, b) = self.pair_values_at(data, n, p, cfg)?;
        let z0 = self.points[n];
        let (a0, b0) = self.sheet_values[n];
        let inc = segment_integral(data, self.rotation(), z0, (a0, b0), p, (a, b));
        Ok(self.mass_profile[n] + inc.re)
    }

    /// Per-segment preStokes residual `|Im ∫ e^{−2πiθ}Δζ dz| / (|Δz||Δζ|)`.
    pub fn prestokes_residuals(&self, data: &SpectralData) -> Vec<f64> {
        let rot = self.rotation();
        (0..self.points.len().saturating_sub(1))
            .map(|n| {
                let z0 = self.points[n];
                let z1 = self.points[n + 1];
                let inc = segment_integral(data, rot, z0, self.sheet_values[n], z1, self.sheet_values[n + 1]);
                let (a0, b0) = self.sheet_values[n];
                let (a1, b1) = self.sheet_values[n + 1];
                let scale = (z1 - z0).norm() * 0.5 * ((a0 - b0).norm() + (a1 - b1).norm());
                if scale > 0.0 {
                    inc.im.abs() / scale
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// `∫ e^{−2πiθ}(ζ_a − ζ_b) dz` over the chord from `z0` to `z1` by the
/// endpoint-corrected trapezoid rule.
pub(crate) fn segment_integral(data: &SpectralData, rot: C64, z0: C64, v0: (C64, C64), z1: C64, v1: (C64, C64)) -> C64 {
    let h = z1 - z0;
    if h.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let g0 = rot * (v0.0 - v0.1);
    let g1 = rot * (v1.0 - v1.1);
    let d0 = rot * (data.sheet_derivative(z0, v0.0) - data.sheet_derivative(z0, v0.1));
    let d1 = rot * (data.sheet_derivative(z1, v1.0) - data.sheet_derivative(z1, v1.1));
    h * 0.5 * (g0 + g1) + h * h / 12.0 * (d0 - d1)
}

/// Three seeds at a simple turning point, one per ray.
pub fn seed_rays(data: &SpectralData, tp: &TurningPoint, cfg: &TraceConfig) -> Result<Vec<Seed>, TracerError> {
    if !tp.simple {
        return Err(TracerError::NotSimple(tp.id));
    }
    let c = tp.local_coefficient;
    let r0 = cfg.seed_radius;
    let offset = (2.0 / 3.0) * c.norm() * r0.powf(1.5);
    let rot = cfg.rotation();
    ray_angles(c, cfg.theta)
        .into_iter()
        .enumerate()
        .map(|(k, phi)| {
            let dir = C64::from_polar(1.0, phi);
            let position = tp.position + dir * r0;
            let sheets = eval_sheets(data, position, &cfg.curve)?;
            let values = sheets.values;
            let mut near: Vec<usize> = (0..values.len()).collect();
            near.sort_by(|&i, &j| {
                (values[i] - tp.double_root)
                    .norm()
                    .total_cmp(&(values[j] - tp.double_root).norm())
            });
            let (i, j) = (near[0], near[1]);
            let pair = if (rot.conj() * (values[i] - values[j]) * dir).re > 0.0 {
                (i, j)
            } else {
                (j, i)
            };
            Ok(Seed {
                position,
                values,
                pair,
                mass: offset,
                source: WallSource::TurningPointRay {
                    turning_point: tp.id,
                    ray: k,
                },
            })
        })
        .collect()
}

/// Directions of the three rays, in `[0, 2π)`.
pub fn ray_angles(c: C64, theta: f64) -> [f64; 3] {
    let base = 2.0 * PI * theta - (2.0 * c / 3.0).arg();
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = ((2.0 / 3.0) * (base + 2.0 * PI * k as f64)).rem_euclid(2.0 * PI);
    }
    out
}

/// Cumulative mass by corrected-trapezoid quadrature, starting from the
/// wall's initial mass. Fails if the imaginary part drifts.
pub fn mass_profile_quadrature(data: &SpectralData, wall: &Wall, pres_tol: f64) -> Result<Vec<f64>, TracerError> {
    let rot = wall.rotation();
    let mut acc = C64::new(wall.start_mass(), 0.0);
    let mut out = Vec::with_capacity(wall.len());
    out.push(acc.re);
    for n in 1..wall.len() {
        acc += segment_integral(
            data,
            rot,
            wall.points[n - 1],
            wall.sheet_values[n - 1],
            wall.points[n],
            wall.sheet_values[n],
        );
        if acc.im.abs() >= pres_tol * (acc.re.abs() + 1.0) {
            return Err(TracerError::PrestokesViolation {
                index: n,
                imag: acc.im,
                real: acc.re,
            });
        }
        out.push(acc.re);
    }
    Ok(out)
}

/// Mass at point `index` by quadrature along the polyline.
pub fn mass_along(data: &SpectralData, wall: &Wall, index: usize, pres_tol: f64) -> Result<f64, TracerError> {
    if index >= wall.len() {
        return Err(TracerError::IndexOutOfRange { index, len: wall.len() });
    }
    let truncated = Wall {
        points: wall.points[..=index].to_vec(),
        sheet_values: wall.sheet_values[..=index].to_vec(),
        mass_profile: wall.mass_profile[..=index].to_vec(),
        ..wall.clone()
    };
    Ok(*mass_profile_quadrature(data, &truncated, pres_tol)?.last().unwrap())
}

/// Remaining mass from `z` into a turning point along a wall of its type.
pub fn puiseux_mass(tp: &TurningPoint, z: C64) -> f64 {
    (2.0 / 3.0) * tp.local_coefficient.norm() * (z - tp.position).norm().powf(1.5)
}

pub(crate) fn closest_pair(values: &[C64]) -> (usize, usize) {
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
