//! Novikov-valued wall-crossing factors and non-abelianized transport.

mod frame;
mod matrix;
mod series;
mod transport;

pub use frame::{BranchCut, SpinFrame, WallSign};
pub use matrix::{wall_matrix, Crossing, NovikovMatrix};
pub use series::{parse_rational, rational_to_f64, Coeff, CoeffRepr, NovikovElement, EXPONENT_TOL};
pub use transport::{
    monodromy_at, nonabelianize, parse_loops, solve_factors, transport, verify_factors, LocalSystemSpec, LoopSpec,
    SpecialPoint, TransportConfig, WallFactorAssignment,
};

use thiserror::Error;

use crate::curve::CurveError;
use crate::poly::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NovikovError {
    #[error("truncation levels differ: {left} and {right}")]
    TruncationMismatch { left: f64, right: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("path passes within clearance of {what} at {point}")]
    PathTooClose { point: C64, what: String },
    #[error("no admissible loop radius at {0}")]
    RadiusFailure(SpecialPoint),
    #[error("monodromy at {point} is not the identity: {defect}")]
    Inconsistent { point: SpecialPoint, defect: String },
    #[error("branch cut: {0}")]
    Cut(String),
    #[error("unknown special point {0}")]
    UnknownPoint(SpecialPoint),
    #[error("loop specification: {0}")]
    LoopSpec(String),
}
