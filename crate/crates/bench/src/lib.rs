//! Shared fixtures for the benchmarks.

use specnet_core::{NetworkConfig, SpectralData, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// ζ² − z on the disk of radius 6.
pub fn airy() -> SpectralData {
    SpectralData::polynomial(vec![vec![], vec![c(0.0), c(1.0)]], 6.0).expect("valid curve")
}

/// ζ³ − 3ζ − z on the disk of radius 6.
pub fn cubic() -> SpectralData {
    SpectralData::polynomial(vec![vec![], vec![c(3.0)], vec![c(0.0), c(1.0)]], 6.0).expect("valid curve")
}

/// Airy at θ = 0.1, cutoff 6.
pub fn airy_config() -> NetworkConfig {
    NetworkConfig::default().with_theta(0.1).with_cutoff(6.0)
}

/// The cubic at θ = 0.07, cutoff 10 (two scattered collisions).
pub fn cubic_config() -> NetworkConfig {
    NetworkConfig::default().with_theta(0.07).with_cutoff(10.0)
}
