//! Obstructions, phase perturbation and closed-tree counting.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use log::info;
use serde::{Deserialize, Serialize};

use super::{build_network, NetworkConfig, NetworkError, NetworkState, TreeNode};
use crate::curve::SpectralData;
use crate::tracer::{puiseux_mass, Termination};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClosedTree {
    pub tree: usize,
    pub mass: f64,
    /// Turning points at the extremities of the tree.
    pub turning_points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CyclicObstruction {
    pub collision: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObstructionReport {
    pub closed_trees: Vec<ClosedTree>,
    pub cyclic_collisions: Vec<CyclicObstruction>,
    pub suggested_theta_step: f64,
}

impl ObstructionReport {
    pub fn is_empty(&self) -> bool {
        self.closed_trees.is_empty() && self.cyclic_collisions.is_empty()
    }
}

fn tree_endpoints(state: &NetworkState, tree: usize, hit: usize) -> Vec<usize> {
    let mut tps: BTreeSet<usize> = state.trees[tree]
        .nodes
        .iter()
        .filter_map(|n| match n {
            TreeNode::Leaf { turning_point } => Some(*turning_point),
            _ => None,
        })
        .collect();
    tps.insert(hit);
    tps.into_iter().collect()
}

pub fn detect_obstructions(state: &NetworkState) -> ObstructionReport {
    let mut closed: Vec<ClosedTree> = Vec::new();
    for w in &state.walls {
        let Termination::HitTurningPoint { turning_point } = w.termination else {
            continue;
        };
        let tp = &state.turning_points[turning_point];
        let mass = w.final_mass() + puiseux_mass(tp, *w.points.last().expect("nonempty wall"));
        let turning_points = tree_endpoints(state, w.id, turning_point);
        // the same saddle is traced from both of its ends
        let duplicate = closed
            .iter()
            .any(|c| c.turning_points == turning_points && (c.mass - mass).abs() < 1e-4 * (1.0 + mass));
        if !duplicate && mass < state.cutoff {
            closed.push(ClosedTree {
                tree: w.id,
                mass,
                turning_points,
            });
        }
    }
    let cyclic: Vec<CyclicObstruction> = state
        .collisions
        .iter()
        .filter(|c| c.cyclic && c.mass < state.cutoff)
        .map(|c| CyclicObstruction {
            collision: c.id,
            mass: c.mass,
        })
        .collect();
    let resolution = closed
        .iter()
        .map(|c| {
            let tp = &state.turning_points[*c.turning_points.last().unwrap()];
            let r = state.config.trace.capture_radius();
            puiseux_mass(tp, tp.position + r) / (2.0 * PI * c.mass.max(1e-12))
        })
        .fold(0.0, f64::max);
    let suggested = if closed.is_empty() && cyclic.is_empty() {
        0.0
    } else {
        (10.0 * resolution).max(1e-4)
    };
    ObstructionReport {
        closed_trees: closed,
        cyclic_collisions: cyclic,
        suggested_theta_step: suggested,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanConfig {
    pub max_probes: usize,
    /// Minimum distance from any obstructed probe.
    pub margin: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            max_probes: 16,
            margin: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Probe {
    pub theta: f64,
    pub obstructed: bool,
    pub error: Option<String>,
}

fn probe_thetas(theta0: f64, eps: f64, max: usize) -> Vec<f64> {
    let mut out = vec![theta0];
    let mut step = eps;
    while out.len() < max && step > 0.0 {
        for t in [theta0 + step, theta0 - step] {
            let t = t.rem_euclid(1.0);
            if out.len() < max && !out.iter().any(|u| (u - t).abs() < 1e-15) {
                out.push(t);
            }
        }
        step *= 0.5;
        if step < 1e-12 {
            break;
        }
    }
    out
}

/// Searches `θ₀, θ₀ ± ε, θ₀ ± ε/2, …` for an unobstructed phase.
pub fn find_unobstructed_theta(
    data: &SpectralData,
    theta0: f64,
    eps: f64,
    config: NetworkConfig,
    scan: ScanConfig,
) -> Result<(f64, Vec<Probe>), NetworkError> {
    let mut probes: Vec<Probe> = Vec::new();
    for theta in probe_thetas(theta0, eps, scan.max_probes) {
        let result = build_network(data, config.with_theta(theta));
        let (obstructed, error) = match &result {
            Ok(state) => (!state.obstructions.is_empty(), None),
            Err(NetworkError::Nontermination { .. }) => (true, Some("nontermination".to_string())),
            Err(e) => (true, Some(e.to_string())),
        };
        info!("probe theta {theta}: obstructed = {obstructed}");
        probes.push(Probe {
            theta,
            obstructed,
            error,
        });
        if let Err(e @ (NetworkError::NotGmn(_) | NetworkError::InvalidConfig(_))) = result {
            return Err(e);
        }
        if !obstructed {
            let clear = probes
                .iter()
                .filter(|p| p.obstructed)
                .all(|p| circular_distance(p.theta, theta) >= scan.margin);
            if clear {
                return Ok((theta, probes));
            }
        }
    }
    Err(NetworkError::NotFound { probes })
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Number of distinct closed trees with mass below `m`.
pub fn count_closed_trees(
    data: &SpectralData,
    theta: f64,
    m: f64,
    config: NetworkConfig,
) -> Result<usize, NetworkError> {
    let state = build_network(data, config.with_theta(theta).with_cutoff(m))?;
    Ok(state.obstructions.closed_trees.iter().filter(|c| c.mass < m).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_sequence() {
        let p = probe_thetas(0.25, 0.05, 5);
        let expected = [0.25, 0.30, 0.20, 0.275, 0.225];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_epsilon_probes_once() {
        assert_eq!(probe_thetas(0.25, 0.0, 10), vec![0.25]);
    }

    #[test]
    fn wraps_around() {
        let p = probe_thetas(0.99, 0.05, 3);
        assert!((p[1] - 0.04).abs() < 1e-12);
        assert!(circular_distance(0.99, 0.01) < 0.0200001);
    }
}
