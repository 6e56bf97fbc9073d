//! Spectral networks for rational spectral data on the Riemann sphere.
//!
//! The crate builds the network of walls attached to a spectral curve at a
//! phase θ, attaches wall-crossing factors, and computes non-abelianized
//! parallel transport with values in Novikov-completed matrices.

pub mod curve;
pub mod io;
pub mod network;
pub mod novikov;
pub mod poly;
pub mod tracer;

pub use curve::{
    branch_points, continue_sheets, eval_sheets, gmn_check, CurveConfig, CurveError, GmnReport, Punctures,
    RationalFunction, SheetSet, SpectralData, TurningPoint,
};
pub use network::{
    build_network, count_closed_trees, detect_obstructions, find_unobstructed_theta, initial_graph, Collision,
    NetworkConfig, NetworkError, NetworkState, ObstructionReport, StokesTree,
};
pub use novikov::{
    monodromy_at, nonabelianize, solve_factors, transport, wall_matrix, Coeff, NovikovElement, NovikovError,
    NovikovMatrix, SpecialPoint, SpinFrame, TransportConfig, WallFactorAssignment,
};
pub use poly::C64;
pub use tracer::{
    mass_along, puiseux_mass, seed_rays, trace_wall, Seed, Termination, TraceConfig, TracerError, Wall, WallSource,
};
