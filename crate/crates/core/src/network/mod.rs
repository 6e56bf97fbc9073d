//! The Stokes graph: inductive construction by mass-ordered scattering.

mod collide;
mod obstruct;
mod scatter;

pub use collide::{chain_order, segment_intersection, Collision, Participant, SegmentIndex};
pub use obstruct::{
    count_closed_trees, detect_obstructions, find_unobstructed_theta, ClosedTree, CyclicObstruction, ObstructionReport,
    Probe, ScanConfig,
};
pub use scatter::{scatter_plan, ScatterPlan, ScatterSeed};

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{branch_points, gmn_check, CurveError, GmnReport, SpectralData, TurningPoint};
use crate::poly::C64;
use crate::tracer::{seed_rays, trace_wall, Seed, Termination, TraceConfig, TracerError, Wall, WallSource};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Tracer(#[from] TracerError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("spectral data fails the GMN check")]
    NotGmn(Box<GmnReport>),
    #[error("initial walls run into turning points at this phase")]
    ObstructedAtStart(Box<NetworkState>),
    #[error("more than {limit} collisions processed")]
    Nontermination { limit: usize, state: Box<NetworkState> },
    #[error("collision {0} is cyclic and cannot be scattered")]
    CyclicCollision(usize),
    #[error("collision {0} was already scattered")]
    AlreadyScattered(usize),
    #[error("no collision with id {0}")]
    UnknownCollision(usize),
    #[error("no unobstructed phase found after {} probes", probes.len())]
    NotFound { probes: Vec<Probe> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NetworkConfig {
    pub trace: TraceConfig,
    pub max_collisions: usize,
    /// Build even if the GMN check fails.
    pub force: bool,
    pub overlap_tol: f64,
    pub overlap_count: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            trace: TraceConfig::default(),
            max_collisions: 500,
            force: false,
            overlap_tol: 1e-6,
            overlap_count: 8,
        }
    }
}

impl NetworkConfig {
    pub fn with_theta(mut self, theta: f64) -> Self {
        self.trace.theta = theta;
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.trace.mass_cutoff = cutoff;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum TreeNode {
    #[serde(rename_all = "camelCase")]
    Leaf { turning_point: usize },
    #[serde(rename_all = "camelCase")]
    Interior { collision: usize },
    #[serde(rename_all = "camelCase")]
    RootEnd { termination: Termination },
}

/// An edge of a tree; `feeds` is the wall it joins toward the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TreeEdge {
    pub wall: usize,
    pub feeds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StokesTree {
    pub id: usize,
    pub root_edge: usize,
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<TreeEdge>,
    /// Trees merged at the interior vertex at the start of the root edge.
    pub parents: Vec<usize>,
    /// Sum of the masses of the non-root edges.
    pub mass: f64,
    /// `(−1)^{s+1}` of the scattering that created the tree; `1` for
    /// initial trees.
    pub sign: i32,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Diagnostic {
    NearTurningPoint {
        point: C64,
        turning_point: usize,
        walls: Vec<usize>,
    },
    Unordered {
        point: C64,
        walls: Vec<usize>,
        reason: String,
    },
    Overlap {
        walls: (usize, usize),
        points: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    mass: f64,
    id: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (mass, id)
        other.mass.total_cmp(&self.mass).then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct NetworkState {
    pub theta: f64,
    pub data: SpectralData,
    pub config: NetworkConfig,
    pub turning_points: Vec<TurningPoint>,
    /// Indexed by wall id.
    pub walls: Vec<Wall>,
    /// Indexed by tree id; tree `i` has root edge wall `i`.
    pub trees: Vec<StokesTree>,
    /// Indexed by collision id.
    pub collisions: Vec<Collision>,
    pub cutoff: f64,
    pub open_trees: BTreeSet<usize>,
    pub closed_trees: BTreeSet<usize>,
    /// Collision ids in the order they were scattered.
    pub processed: Vec<usize>,
    pub watermark: f64,
    pub obstructions: ObstructionReport,
    pub diagnostics: Vec<Diagnostic>,
    pending: BinaryHeap<Pending>,
    index: SegmentIndex,
}

impl NetworkState {
    fn empty(data: &SpectralData, config: NetworkConfig, turning_points: Vec<TurningPoint>) -> Self {
        Self {
            theta: config.trace.theta,
            data: data.clone(),
            config,
            turning_points,
            walls: Vec::new(),
            trees: Vec::new(),
            collisions: Vec::new(),
            cutoff: config.trace.mass_cutoff,
            open_trees: BTreeSet::new(),
            closed_trees: BTreeSet::new(),
            processed: Vec::new(),
            watermark: 0.0,
            obstructions: ObstructionReport::default(),
            diagnostics: Vec::new(),
            pending: BinaryHeap::new(),
            index: SegmentIndex::new(0.05),
        }
    }

    pub(crate) fn push_pending(&mut self, id: usize, mass: f64) {
        self.pending.push(Pending { mass, id });
    }

    /// Unscattered non-cyclic collisions below the cutoff, by mass.
    pub fn pending(&self) -> Vec<usize> {
        let mut v: Vec<Pending> = self.pending.iter().copied().collect();
        v.sort_by(|a, b| b.cmp(a));
        v.into_iter().map(|p| p.id).collect()
    }

    pub fn segment_index(&self) -> &SegmentIndex {
        &self.index
    }

    pub fn wall(&self, id: usize) -> &Wall {
        &self.walls[id]
    }

    pub fn scattered_walls(&self) -> impl Iterator<Item = &Wall> {
        self.walls
            .iter()
            .filter(|w| matches!(w.source, WallSource::ScatteredAt { .. }))
    }

    /// Traces seeds in parallel and registers the walls as single-edge trees
    /// (initial) or as children of their collision. Returns the new ids.
    fn add_walls(&mut self, seeds: Vec<(Seed, i32, Vec<usize>)>) -> Vec<usize> {
        let first = self.walls.len();
        let cfg = self.config.trace;
        let data = &self.data;
        let tps = &self.turning_points;
        let traced: Vec<Wall> = seeds
            .par_iter()
            .enumerate()
            .map(|(k, (seed, _, _))| trace_wall(data, seed, &cfg, tps, first + k))
            .collect();
        let mut ids = Vec::with_capacity(traced.len());
        for (wall, (_, sign, parents)) in traced.into_iter().zip(seeds) {
            let id = wall.id;
            let tree = self.make_tree(&wall, sign, parents);
            if let WallSource::ScatteredAt { collision } = wall.source {
                self.collisions[collision].children.push(id);
            }
            if tree.closed {
                self.closed_trees.insert(id);
            } else {
                self.open_trees.insert(id);
            }
            self.index.insert(&wall);
            self.walls.push(wall);
            self.trees.push(tree);
            ids.push(id);
        }
        ids
    }

    fn make_tree(&self, wall: &Wall, sign: i32, parents: Vec<usize>) -> StokesTree {
        let mut nodes = Vec::new();
        let mut edges = vec![TreeEdge {
            wall: wall.id,
            feeds: None,
        }];
        let mass = match wall.source {
            WallSource::TurningPointRay { turning_point, .. } => {
                nodes.push(TreeNode::Leaf { turning_point });
                0.0
            }
            WallSource::ScatteredAt { collision } => {
                nodes.push(TreeNode::Interior { collision });
                for &p in &parents {
                    let pt = &self.trees[p];
                    nodes.extend(
                        pt.nodes
                            .iter()
                            .filter(|n| !matches!(n, TreeNode::RootEnd { .. }))
                            .copied(),
                    );
                    for e in &pt.edges {
                        let feeds = e.feeds.or(Some(wall.id));
                        edges.push(TreeEdge { wall: e.wall, feeds });
                    }
                }
                wall.start_mass()
            }
        };
        nodes.push(TreeNode::RootEnd {
            termination: wall.termination,
        });
        StokesTree {
            id: wall.id,
            root_edge: wall.id,
            nodes,
            edges,
            parents,
            mass,
            sign,
            closed: matches!(wall.termination, Termination::HitTurningPoint { .. }),
        }
    }

    /// Walls that run into a turning point of their own type.
    pub fn saddle_walls(&self) -> Vec<usize> {
        self.walls
            .iter()
            .filter(|w| matches!(w.termination, Termination::HitTurningPoint { .. }))
            .map(|w| w.id)
            .collect()
    }

    /// Records pairs of walls that run along each other over many points.
    fn check_overlaps(&mut self, new_walls: &[usize]) {
        let tol = self.config.overlap_tol;
        let need = self.config.overlap_count;
        for &wa in new_walls {
            let a = &self.walls[wa];
            let mut run: std::collections::BTreeMap<usize, usize> = Default::default();
            let mut best: std::collections::BTreeMap<usize, usize> = Default::default();
            for z in &a.points {
                let near: BTreeSet<usize> = self
                    .index
                    .candidates(*z - C64::new(tol, tol), *z + C64::new(tol, tol))
                    .into_iter()
                    .filter(|&(wb, sb)| {
                        wb != wa && {
                            let b = &self.walls[wb];
                            point_segment_distance(*z, b.points[sb], b.points[sb + 1]) < tol
                        }
                    })
                    .map(|(wb, _)| wb)
                    .collect();
                run.retain(|w, _| near.contains(w));
                for w in near {
                    let r = run.entry(w).or_insert(0);
                    *r += 1;
                    let b = best.entry(w).or_insert(0);
                    *b = (*b).max(*r);
                }
            }
            for (wb, n) in best {
                if n > need {
                    self.diagnostics.push(Diagnostic::Overlap {
                        walls: (wa, wb),
                        points: n,
                    });
                }
            }
        }
    }
}

fn point_segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let t = if d.norm_sqr() > 0.0 {
        ((p - a) * d.conj()).re / d.norm_sqr()
    } else {
        0.0
    };
    (p - (a + d * t.clamp(0.0, 1.0))).norm()
}

fn check_gate(data: &SpectralData, config: &NetworkConfig) -> Result<Vec<TurningPoint>, NetworkError> {
    config.trace.validate().map_err(NetworkError::InvalidConfig)?;
    if !config.force {
        let report = gmn_check(data);
        if !report.verdict {
            return Err(NetworkError::NotGmn(Box::new(report)));
        }
    }
    let mut curve = config.trace.curve;
    curve.strict = false;
    let tps = branch_points(data, &curve)?;
    if let Some(t) = tps.iter().find(|t| !t.simple) {
        return Err(TracerError::NotSimple(t.id).into());
    }
    Ok(tps)
}

fn initial_state(data: &SpectralData, config: NetworkConfig) -> Result<NetworkState, NetworkError> {
    let tps = check_gate(data, &config)?;
    let mut state = NetworkState::empty(data, config, tps);
    let mut seeds = Vec::new();
    for tp in &state.turning_points {
        for s in seed_rays(data, tp, &config.trace)? {
            seeds.push((s, 1, Vec::new()));
        }
    }
    if config.trace.mass_cutoff <= 0.0 {
        // nothing to trace below a zero cutoff
        return Ok(state);
    }
    let ids = state.add_walls(seeds);
    state.index = SegmentIndex::for_walls(&state.walls);
    for w in &state.walls {
        state.index.insert(w);
    }
    state.find_collisions(&ids);
    state.check_overlaps(&ids);
    Ok(state)
}

/// Seeds three walls per turning point and collects their collisions.
pub fn initial_graph(data: &SpectralData, config: NetworkConfig) -> Result<NetworkState, NetworkError> {
    let mut state = initial_state(data, config)?;
    if !state.saddle_walls().is_empty() {
        state.obstructions = detect_obstructions(&state);
        return Err(NetworkError::ObstructedAtStart(Box::new(state)));
    }
    Ok(state)
}

/// Builds the network modulo the mass cutoff in `config`. Obstructions do
/// not stop the build; they are reported in `state.obstructions`.
pub fn build_network(data: &SpectralData, config: NetworkConfig) -> Result<NetworkState, NetworkError> {
    let mut state = initial_state(data, config)?;
    while let Some(Pending { mass, id }) = state.pending.pop() {
        if state.collisions[id].scattered || mass >= state.cutoff {
            continue;
        }
        if state.processed.len() >= config.max_collisions {
            state.obstructions = detect_obstructions(&state);
            return Err(NetworkError::Nontermination {
                limit: config.max_collisions,
                state: Box::new(state),
            });
        }
        state.watermark = state.watermark.max(mass);
        let seeds = state.scatter(id)?;
        state.processed.push(id);
        let seeds = seeds.into_iter().map(|s| (s.seed, s.sign, s.parents)).collect();
        let ids = state.add_walls(seeds);
        state.find_collisions(&ids);
        state.check_overlaps(&ids);
    }
    state.obstructions = detect_obstructions(&state);
    info!(
        "network at theta {}: {} walls, {} collisions, {} scattered",
        state.theta,
        state.walls.len(),
        state.collisions.len(),
        state.processed.len()
    );
    Ok(state)
}
