//! Run configuration read from JSON.

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::curve::{CurveConfig, Punctures, RationalFunction, SpectralData};
use crate::network::NetworkConfig;
use crate::novikov::{parse_loops, LoopSpec};
use crate::poly::C64;
use crate::tracer::TraceConfig;

/// A real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl Number {
    pub fn value(self) -> C64 {
        match self {
            Number::Real(x) => C64::new(x, 0.0),
            Number::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalSpec {
    pub numerator: Vec<Number>,
    pub denominator: Vec<Number>,
}

/// Ascending coefficients of a polynomial, or a quotient of two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Polynomial(Vec<Number>),
    Rational(RationalSpec),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuncturesSpec {
    #[serde(default)]
    pub infinity: bool,
    #[serde(default)]
    pub finite: Vec<Number>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    #[default]
    Rational,
    Complex,
}

fn d_mass_cutoff() -> f64 {
    TraceConfig::default().mass_cutoff
}
fn d_domain_radius() -> f64 {
    6.0
}
fn d_puncture_radius() -> f64 {
    TraceConfig::default().puncture_radius
}
fn d_seed_radius() -> f64 {
    TraceConfig::default().seed_radius
}
fn d_step_init() -> f64 {
    TraceConfig::default().step_init
}
fn d_step_min() -> f64 {
    TraceConfig::default().step_min
}
fn d_step_max() -> f64 {
    TraceConfig::default().step_max
}
fn d_max_segment() -> f64 {
    TraceConfig::default().max_segment
}
fn d_pres_tol() -> f64 {
    TraceConfig::default().pres_tol
}
fn d_ode_tol() -> f64 {
    TraceConfig::default().ode_tol
}
fn d_max_steps() -> usize {
    TraceConfig::default().max_steps
}
fn d_residual_tol() -> f64 {
    CurveConfig::default().residual_tol
}
fn d_sheet_match_tol() -> f64 {
    CurveConfig::default().sheet_match_tol
}
fn d_clearance_tol() -> f64 {
    CurveConfig::default().clearance_tol
}
fn d_min_step() -> f64 {
    CurveConfig::default().min_step
}
fn d_max_collisions() -> usize {
    NetworkConfig::default().max_collisions
}

/// Everything a run needs. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "K")]
    pub k: usize,
    pub phi: Vec<CoefficientSpec>,
    pub punctures: PuncturesSpec,
    pub theta: f64,
    #[serde(default = "d_mass_cutoff")]
    pub mass_cutoff: f64,
    /// Defaults to `massCutoff`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
    #[serde(default = "d_domain_radius")]
    pub domain_radius: f64,
    #[serde(default = "d_puncture_radius")]
    pub puncture_radius: f64,
    #[serde(default = "d_seed_radius")]
    pub seed_radius: f64,
    #[serde(default = "d_step_init")]
    pub step_init: f64,
    #[serde(default = "d_step_min")]
    pub step_min: f64,
    #[serde(default = "d_step_max")]
    pub step_max: f64,
    #[serde(default = "d_max_segment")]
    pub max_segment: f64,
    #[serde(default = "d_pres_tol")]
    pub pres_tol: f64,
    #[serde(default = "d_ode_tol")]
    pub ode_tol: f64,
    #[serde(default = "d_max_steps")]
    pub max_steps: usize,
    #[serde(default = "d_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "d_sheet_match_tol")]
    pub sheet_match_tol: f64,
    #[serde(default = "d_clearance_tol")]
    pub clearance_tol: f64,
    #[serde(default = "d_min_step")]
    pub min_step: f64,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "d_max_collisions")]
    pub max_collisions: usize,
    /// Build even when the GMN check fails.
    #[serde(default)]
    pub force: bool,
    #[serde(default)]
    pub solver: SolverMode,
    /// Loop descriptors for `nonabelianize`, `circle:cx,cy,r` or
    /// `poly:x,y;...`, separated by `|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loops: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_json: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_svg: Option<String>,
}

fn invalid(path: &str, message: impl Into<String>) -> IoError {
    IoError::Validation {
        path: path.into(),
        message: message.into(),
    }
}

fn values(v: &[Number]) -> Vec<C64> {
    v.iter().map(|x| x.value()).collect()
}

fn finite(x: C64) -> bool {
    x.re.is_finite() && x.im.is_finite()
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        IoError::Parse {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), IoError> {
        if self.k == 0 {
            return Err(invalid("K", "must be at least 1"));
        }
        if self.phi.len() != self.k {
            return Err(invalid(
                "phi",
                format!("expected {} coefficients, got {}", self.k, self.phi.len()),
            ));
        }
        for (i, spec) in self.phi.iter().enumerate() {
            let ok = match spec {
                CoefficientSpec::Polynomial(p) => p.iter().all(|x| finite(x.value())),
                CoefficientSpec::Rational(r) => {
                    r.numerator.iter().chain(&r.denominator).all(|x| finite(x.value()))
                        && r.denominator.iter().any(|x| x.value().norm() > 0.0)
                }
            };
            if !ok {
                return Err(invalid(
                    &format!("phi[{i}]"),
                    "coefficients must be finite with a nonzero denominator",
                ));
            }
        }
        if !self.punctures.finite.iter().all(|x| finite(x.value())) {
            return Err(invalid("punctures.finite", "points must be finite"));
        }
        if !(0.0..1.0).contains(&self.theta) {
            return Err(invalid("theta", format!("must lie in [0, 1), got {}", self.theta)));
        }
        if !(self.mass_cutoff.is_finite() && self.mass_cutoff >= 0.0) {
            return Err(invalid(
                "massCutoff",
                format!("must be finite and nonnegative, got {}", self.mass_cutoff),
            ));
        }
        if let Some(t) = self.truncation {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid("truncation", format!("must be finite and positive, got {t}")));
            }
        }
        if !(self.domain_radius.is_finite() && self.domain_radius > 0.0) {
            return Err(invalid(
                "domainRadius",
                format!("must be positive, got {}", self.domain_radius),
            ));
        }
        let positive = [
            ("residualTol", self.residual_tol),
            ("sheetMatchTol", self.sheet_match_tol),
            ("clearanceTol", self.clearance_tol),
            ("minStep", self.min_step),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.max_collisions == 0 {
            return Err(invalid("maxCollisions", "must be positive"));
        }
        self.trace_config().validate().map_err(|m| {
            let key = m.split_whitespace().next().unwrap_or("").to_string();
            invalid(&key, m)
        })?;
        if let Some(l) = &self.loops {
            parse_loops(l).map_err(|e| invalid("loops", e.to_string()))?;
        }
        self.spectral_data()?;
        Ok(())
    }

    pub fn spectral_data(&self) -> Result<SpectralData, IoError> {
        let mut coeffs = Vec::with_capacity(self.phi.len());
        for (i, spec) in self.phi.iter().enumerate() {
            let f = match spec {
                CoefficientSpec::Polynomial(p) => Ok(RationalFunction::polynomial(values(p))),
                CoefficientSpec::Rational(r) => RationalFunction::new(values(&r.numerator), values(&r.denominator)),
            }
            .map_err(|e| invalid(&format!("phi[{i}]"), e.to_string()))?;
            coeffs.push(f);
        }
        let punctures = Punctures {
            finite: values(&self.punctures.finite),
            infinity: self.punctures.infinity,
        };
        SpectralData::new(coeffs, punctures, self.domain_radius).map_err(|e| invalid("phi", e.to_string()))
    }

    pub fn curve_config(&self) -> CurveConfig {
        CurveConfig {
            residual_tol: self.residual_tol,
            sheet_match_tol: self.sheet_match_tol,
            clearance_tol: self.clearance_tol,
            min_step: self.min_step,
            strict: self.strict,
        }
    }

    pub fn trace_config(&self) -> TraceConfig {
        TraceConfig {
            theta: self.theta,
            mass_cutoff: self.mass_cutoff,
            seed_radius: self.seed_radius,
            puncture_radius: self.puncture_radius,
            step_init: self.step_init,
            step_min: self.step_min,
            step_max: self.step_max,
            max_segment: self.max_segment,
            pres_tol: self.pres_tol,
            ode_tol: self.ode_tol,
            max_steps: self.max_steps,
            curve: self.curve_config(),
        }
    }

    pub fn network_config(&self) -> NetworkConfig {
        NetworkConfig {
            trace: self.trace_config(),
            max_collisions: self.max_collisions,
            force: self.force,
            ..NetworkConfig::default()
        }
    }

    pub fn truncation(&self) -> f64 {
        self.truncation.unwrap_or(self.mass_cutoff)
    }

    pub fn loop_specs(&self) -> Result<Vec<LoopSpec>, IoError> {
        match &self.loops {
            Some(l) => parse_loops(l).map_err(|e| invalid("loops", e.to_string())),
            None => Ok(Vec::new()),
        }
    }
}
