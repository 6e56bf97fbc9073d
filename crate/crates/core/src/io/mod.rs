//! Run configuration, network documents and SVG output.

mod config;
mod document;
mod svg;

pub use config::{parse_config, CoefficientSpec, Number, PuncturesSpec, RationalSpec, RunConfig, SolverMode};
pub use document::{
    canonical_json, emit_network, parse_network, CollisionRecord, MonodromyRecord, NetworkDocument, ParticipantRecord,
    PunctureRecord, TreeRecord, TurningPointRecord, WallRecord, SCHEMA_VERSION,
};
pub use svg::render_svg;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("PARSE_ERROR at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("VALIDATION_ERROR at {path}: {message}")]
    Validation { path: String, message: String },
}
