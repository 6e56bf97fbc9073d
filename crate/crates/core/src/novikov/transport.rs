//! Non-abelianized parallel transport along paths.
//!
//! Transport is accumulated in the gauge of the start point: the abelian
//! part along each sheet is pulled back to the start, so a wall crossed at
//! `q` contributes `T^{m(q) − W_i(q) + W_j(q)}` where `W_k(q)` is the
//! rotated action of sheet `k` from the start to `q`. The diagonal
//! `diag(σ_k T^{W_k})` at the end closes the product. Nothing is truncated
//! until the end.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::frame::{BranchCut, SpinFrame};
use super::matrix::{Crossing, NovikovMatrix};
use super::series::{Coeff, NovikovElement};
use super::NovikovError;
use crate::curve::{eval_sheets, match_labels, sheet_order, track, SpectralData};
use crate::network::{segment_intersection, NetworkState};
use crate::poly::C64;
use crate::tracer::{Termination, WallSource};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TransportConfig {
    /// Minimum distance from a path to turning points, collisions,
    /// punctures and interior wall ends.
    pub clearance: f64,
    pub max_substep: f64,
    /// Vertices on a circular loop.
    pub circle_points: usize,
    /// Largest radius of the small loop around a collision.
    pub limit_radius: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            clearance: 1e-3,
            max_substep: 1e-2,
            circle_points: 96,
            limit_radius: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "camelCase")]
pub enum SpecialPoint {
    TurningPoint(usize),
    Collision(usize),
}

impl fmt::Display for SpecialPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecialPoint::TurningPoint(t) => write!(f, "turning point {t}"),
            SpecialPoint::Collision(c) => write!(f, "collision {c}"),
        }
    }
}

/// Factor `α` attached to each tree, indexed by tree id.
#[derive(Debug, Clone, PartialEq)]
pub struct WallFactorAssignment<K: Coeff> {
    pub factors: Vec<K>,
}

impl<K: Coeff> WallFactorAssignment<K> {
    pub fn get(&self, tree: usize) -> &K {
        &self.factors[tree]
    }
}

/// Per-sheet holonomies of an abelian local system, one row per loop in
/// the basepoint's sheet order. Empty means trivial.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSystemSpec<K: Coeff> {
    pub holonomy: Vec<Vec<K>>,
}

impl<K: Coeff> Default for LocalSystemSpec<K> {
    fn default() -> Self {
        Self { holonomy: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum LoopSpec {
    /// Counterclockwise circle, entered from the basepoint radially.
    Circle { center: C64, radius: f64 },
    /// Closed polygon through the basepoint and the given vertices.
    Polygon { points: Vec<C64> },
}

fn parse_pair(s: &str) -> Result<C64, NovikovError> {
    let v: Vec<&str> = s.split(',').map(str::trim).collect();
    match v.as_slice() {
        [x, y] => {
            let x: f64 = x
                .parse()
                .map_err(|_| NovikovError::LoopSpec(format!("bad number {x:?}")))?;
            let y: f64 = y
                .parse()
                .map_err(|_| NovikovError::LoopSpec(format!("bad number {y:?}")))?;
            Ok(C64::new(x, y))
        }
        _ => Err(NovikovError::LoopSpec(format!("expected x,y in {s:?}"))),
    }
}

impl FromStr for LoopSpec {
    type Err = NovikovError;

    /// `circle:cx,cy,r` or `poly:x,y;x,y;...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| NovikovError::LoopSpec(format!("missing kind in {s:?}")))?;
        match kind.trim() {
            "circle" => {
                let v: Vec<f64> = rest
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| NovikovError::LoopSpec(format!("bad circle {rest:?}")))?;
                match v.as_slice() {
                    &[cx, cy, r] if r > 0.0 => Ok(LoopSpec::Circle {
                        center: C64::new(cx, cy),
                        radius: r,
                    }),
                    _ => Err(NovikovError::LoopSpec(format!(
                        "circle needs cx,cy,r with r > 0: {rest:?}"
                    ))),
                }
            }
            "poly" => {
                let points = rest
                    .split(';')
                    .filter(|p| !p.trim().is_empty())
                    .map(parse_pair)
                    .collect::<Result<Vec<_>, _>>()?;
                if points.is_empty() {
                    return Err(NovikovError::LoopSpec("empty polygon".into()));
                }
                Ok(LoopSpec::Polygon { points })
            }
            other => Err(NovikovError::LoopSpec(format!("unknown loop kind {other:?}"))),
        }
    }
}

impl fmt::Display for LoopSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoopSpec::Circle { center, radius } => write!(f, "circle:{},{},{}", center.re, center.im, radius),
            LoopSpec::Polygon { points } => {
                let pts: Vec<String> = points.iter().map(|p| format!("{},{}", p.re, p.im)).collect();
                write!(f, "poly:{}", pts.join(";"))
            }
        }
    }
}

/// Parses `spec|spec|...`.
pub fn parse_loops(s: &str) -> Result<Vec<LoopSpec>, NovikovError> {
    s.split('|').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

impl LoopSpec {
    /// A point on the loop: the rightmost point of a circle, the first
    /// vertex of a polygon.
    pub fn start(&self) -> C64 {
        match self {
            LoopSpec::Circle { center, radius } => center + radius,
            LoopSpec::Polygon { points } => points[0],
        }
    }

    /// The closed polyline based at `basepoint`.
    pub fn path(&self, basepoint: C64, circle_points: usize) -> Vec<C64> {
        match self {
            LoopSpec::Circle { center, radius } => {
                let d = basepoint - center;
                let phi0 = if d.norm() > 0.0 { d.arg() } else { 0.0 };
                let n = circle_points.max(8);
                let mut path = vec![basepoint];
                for k in 0..=n {
                    let phi = phi0 + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    path.push(center + C64::from_polar(*radius, phi));
                }
                path.push(basepoint);
                path.dedup_by(|a, b| (*a - *b).norm() < 1e-15);
                path
            }
            LoopSpec::Polygon { points } => {
                let mut path = vec![basepoint];
                path.extend(points.iter().copied());
                path.push(basepoint);
                path.dedup_by(|a, b| (*a - *b).norm() < 1e-15);
                path
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct WallEvent {
    pub wall: usize,
    pub segment: usize,
    pub t_wall: f64,
    /// Labels carrying the wall's ordered pair.
    pub pair: (usize, usize),
    pub crossing: Crossing,
    pub mass: f64,
    /// `W_j(q) − W_i(q)`.
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Event {
    Wall(WallEvent),
    Cut { label: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Walk {
    pub events: Vec<Event>,
    /// `W_k` at the end, by label.
    pub weights: Vec<f64>,
    /// Sorted slot at the end of each label.
    pub perm: Vec<usize>,
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// `Re ∫ e^{−2πiθ} ζ dz` along a chord, corrected trapezoid.
fn action(data: &SpectralData, rot: C64, z0: C64, v0: C64, z1: C64, v1: C64) -> f64 {
    let h = z1 - z0;
    let f0 = rot * v0;
    let f1 = rot * v1;
    let d0 = rot * data.sheet_derivative(z0, v0);
    let d1 = rot * data.sheet_derivative(z1, v1);
    (h * 0.5 * (f0 + f1) + h * h / 12.0 * (d0 - d1)).re
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

/// Points a path must keep away from, with a description.
fn obstacles(state: &NetworkState) -> Vec<(C64, String)> {
    let mut out: Vec<(C64, String)> = state
        .turning_points
        .iter()
        .map(|t| (t.position, format!("turning point {}", t.id)))
        .collect();
    out.extend(
        state
            .collisions
            .iter()
            .map(|c| (c.point, format!("collision {}", c.id))),
    );
    out.extend(
        state
            .data
            .punctures()
            .finite
            .iter()
            .map(|p| (*p, "puncture".to_string())),
    );
    for w in &state.walls {
        if matches!(w.termination, Termination::MassCutoff | Termination::StepFailure) {
            if let Some(p) = w.points.last() {
                out.push((*p, format!("end of wall {}", w.id)));
            }
        }
    }
    out
}

struct Hit {
    t: f64,
    q: C64,
    kind: HitKind,
}

enum HitKind {
    Wall { wall: usize, segment: usize, t_wall: f64 },
    Cut { cut: usize },
}

/// Follows `path`, recording wall and cut crossings. Only walls accepted
/// by `incident` are seen.
pub(crate) fn walk(
    state: &NetworkState,
    cuts: &[BranchCut],
    path: &[C64],
    cfg: &TransportConfig,
    incident: Option<&dyn Fn(usize) -> bool>,
    check_clearance: bool,
) -> Result<Walk, NovikovError> {
    let data = &state.data;
    let ccfg = &state.config.trace.curve;
    let rot = state.config.trace.rotation().conj();
    if path.is_empty() {
        return Err(NovikovError::LoopSpec("empty path".into()));
    }
    let r = data.domain_radius();
    if let Some(p) = path.iter().find(|p| p.norm() > r) {
        return Err(NovikovError::PathTooClose {
            point: *p,
            what: "domain boundary".into(),
        });
    }
    if check_clearance {
        let obs = obstacles(state);
        for s in path.windows(2) {
            for (o, what) in &obs {
                if point_segment_distance(*o, s[0], s[1]) < cfg.clearance {
                    return Err(NovikovError::PathTooClose {
                        point: *o,
                        what: what.clone(),
                    });
                }
            }
        }
    }
    let start = eval_sheets(data, path[0], ccfg)?;
    let k = start.len();
    let mut labels = start.values;
    let mut weights = vec![0.0; k];
    let mut events = Vec::new();
    let index = state.segment_index();
    for s in path.windows(2) {
        let mut u0 = s[0];
        while (s[1] - u0).norm() > 0.0 {
            let remaining = s[1] - u0;
            let dist = state
                .turning_points
                .iter()
                .map(|t| (t.position - u0).norm())
                .fold(f64::INFINITY, f64::min);
            let h = cfg.max_substep.min(0.1 * dist).max(1e-9);
            let u1 = if remaining.norm() <= h {
                s[1]
            } else {
                u0 + remaining / remaining.norm() * h
            };
            let next = track(data, u0, &labels, u1, ccfg)?;
            let mut hits: Vec<Hit> = Vec::new();
            let lo = C64::new(u0.re.min(u1.re), u0.im.min(u1.im));
            let hi = C64::new(u0.re.max(u1.re), u0.im.max(u1.im));
            for (w, n) in index.candidates(lo, hi) {
                if w >= state.walls.len() || incident.is_some_and(|f| !f(w)) {
                    continue;
                }
                let wall = &state.walls[w];
                if let Some((q, t, tw)) = segment_intersection(u0, u1, wall.points[n], wall.points[n + 1]) {
                    let dup = hits
                        .iter()
                        .any(|h| matches!(h.kind, HitKind::Wall { wall, .. } if wall == w) && (h.q - q).norm() < 1e-12);
                    if !dup {
                        hits.push(Hit {
                            t,
                            q,
                            kind: HitKind::Wall {
                                wall: w,
                                segment: n,
                                t_wall: tw,
                            },
                        });
                    }
                }
            }
            for (ci, cut) in cuts.iter().enumerate() {
                if let Some((q, t, _)) = segment_intersection(u0, u1, cut.origin, cut.end()) {
                    hits.push(Hit {
                        t,
                        q,
                        kind: HitKind::Cut { cut: ci },
                    });
                }
            }
            hits.sort_by(|a, b| a.t.total_cmp(&b.t));
            for hit in hits {
                let vq = track(data, u0, &labels, hit.q, ccfg)?;
                match hit.kind {
                    HitKind::Wall { wall, segment, t_wall } => {
                        let wl = &state.walls[wall];
                        let (zi, zj) = wl.pair_values_at(data, segment, hit.q, ccfg)?;
                        let perm = match_labels(&[zi, zj], &vq);
                        let (i, j) = (perm[0], perm[1]);
                        let wi = weights[i] + action(data, rot, u0, labels[i], hit.q, vq[i]);
                        let wj = weights[j] + action(data, rot, u0, labels[j], hit.q, vq[j]);
                        let tangent = wl.points[segment + 1] - wl.points[segment];
                        let crossing = if cross(tangent, u1 - u0) > 0.0 {
                            Crossing::Positive
                        } else {
                            Crossing::Negative
                        };
                        events.push(Event::Wall(WallEvent {
                            wall,
                            segment,
                            t_wall,
                            pair: (i, j),
                            crossing,
                            mass: wl.mass_at(data, segment, hit.q, ccfg)?,
                            shift: wj - wi,
                        }));
                    }
                    HitKind::Cut { cut } => {
                        let b = cuts[cut].slot_b(data, hit.q, ccfg)?;
                        let label = match_labels(&[b], &vq)[0];
                        events.push(Event::Cut { label });
                    }
                }
            }
            for l in 0..k {
                weights[l] += action(data, rot, u0, labels[l], u1, next[l]);
            }
            labels = next;
            u0 = u1;
        }
    }
    let mut sorted = labels.clone();
    sorted.sort_by(sheet_order);
    let perm = match_labels(&labels, &sorted);
    Ok(Walk { events, weights, perm })
}

/// Multiplies out a walk. With `limit`, wall exponents come from `limit`
/// and the abelian weights are dropped.
pub(crate) fn evaluate<K: Coeff>(
    k: usize,
    walk: &Walk,
    alpha: impl Fn(usize) -> K,
    eps: impl Fn(usize, usize, f64) -> i64,
    limit: Option<&dyn Fn(usize) -> f64>,
    c: f64,
) -> Result<NovikovMatrix<K>, NovikovError> {
    let inf = f64::INFINITY;
    let mut m = NovikovMatrix::<K>::identity(k, inf);
    let mut sigma = vec![1i64; k];
    for e in &walk.events {
        match e {
            Event::Wall(w) => {
                let local = match limit {
                    Some(f) => f(w.wall),
                    None => w.mass,
                };
                if local >= c {
                    continue;
                }
                let exponent = match limit {
                    Some(_) => local,
                    None => w.mass + w.shift,
                };
                let (i, j) = w.pair;
                let s = w.crossing.sign() * eps(w.wall, w.segment, w.t_wall) * sigma[i] * sigma[j];
                let coeff = alpha(w.wall).mul(&K::from_i64(s));
                m.add_row_multiple(i, j, &NovikovElement::monomial(exponent, coeff, inf))?;
            }
            Event::Cut { label } => sigma[*label] = -sigma[*label],
        }
    }
    let diag = (0..k)
        .map(|l| {
            let w = if limit.is_some() { 0.0 } else { walk.weights[l] };
            NovikovElement::monomial(w, K::from_i64(sigma[l]), inf)
        })
        .collect();
    let d = NovikovMatrix::diagonal(diag, inf);
    let p = NovikovMatrix::permutation(&walk.perm, inf);
    p.mul(&d)?.mul(&m)?.truncate(c)
}

/// Transport along `path` in the sorted sheet frames at its ends, modulo `T^c`.
pub fn transport<K: Coeff>(
    state: &NetworkState,
    frame: &SpinFrame,
    factors: &WallFactorAssignment<K>,
    path: &[C64],
    c: f64,
    cfg: &TransportConfig,
) -> Result<NovikovMatrix<K>, NovikovError> {
    let w = walk(state, &frame.cuts, path, cfg, None, true)?;
    evaluate(
        state.data.rank(),
        &w,
        |wall| factors.get(wall).clone(),
        |wall, n, u| frame.signs[wall].at(n, u),
        None,
        c,
    )
}

/// Small clockwise loop around a special point, seeing only its own walls.
pub(crate) fn limit_walk(
    state: &NetworkState,
    cuts: &[BranchCut],
    point: SpecialPoint,
    cfg: &TransportConfig,
) -> Result<Walk, NovikovError> {
    let (center, radius, incident) = limit_setup(state, point, cfg)?;
    let n = cfg.circle_points.max(16);
    let phi0 = 0.1234;
    let path: Vec<C64> = (0..=n)
        .map(|j| center + C64::from_polar(radius, phi0 - 2.0 * std::f64::consts::PI * j as f64 / n as f64))
        .collect();
    walk(state, cuts, &path, cfg, Some(&|w| incident.contains(&w)), false)
}

fn limit_setup(
    state: &NetworkState,
    point: SpecialPoint,
    cfg: &TransportConfig,
) -> Result<(C64, f64, BTreeSet<usize>), NovikovError> {
    let (center, incident, radius) = match point {
        SpecialPoint::TurningPoint(t) => {
            let tp = state.turning_points.get(t).ok_or(NovikovError::UnknownPoint(point))?;
            let incident: BTreeSet<usize> = state
                .walls
                .iter()
                .filter(|w| matches!(w.source, WallSource::TurningPointRay { turning_point, .. } if turning_point == t))
                .map(|w| w.id)
                .collect();
            (tp.position, incident, 4.0 * state.config.trace.seed_radius)
        }
        SpecialPoint::Collision(id) => {
            let c = state.collisions.get(id).ok_or(NovikovError::UnknownPoint(point))?;
            let incident: BTreeSet<usize> = c
                .participants
                .iter()
                .map(|p| p.wall)
                .chain(c.children.iter().copied())
                .collect();
            let others = state
                .turning_points
                .iter()
                .map(|t| t.position)
                .chain(state.collisions.iter().filter(|o| o.id != id).map(|o| o.point))
                .chain(state.data.punctures().finite.iter().copied())
                .map(|p| (p - c.point).norm())
                .fold(f64::INFINITY, f64::min);
            (c.point, incident, cfg.limit_radius.min(0.3 * others))
        }
    };
    let reach = C64::new(4.0 * radius, 4.0 * radius);
    let foreign = state
        .segment_index()
        .candidates(center - reach, center + reach)
        .into_iter()
        .filter(|(w, _)| *w < state.walls.len() && !incident.contains(w))
        .map(|(w, n)| {
            let wall = &state.walls[w];
            point_segment_distance(center, wall.points[n], wall.points[n + 1])
        })
        .fold(f64::INFINITY, f64::min);
    let radius = match point {
        SpecialPoint::TurningPoint(_) if foreign < 2.0 * radius => return Err(NovikovError::RadiusFailure(point)),
        SpecialPoint::TurningPoint(_) => radius,
        SpecialPoint::Collision(_) => radius.min(0.3 * foreign),
    };
    if radius.is_nan() || radius <= 1e-9 {
        return Err(NovikovError::RadiusFailure(point));
    }
    Ok((center, radius, incident))
}

/// Limit of the transport around a shrinking clockwise loop at `point`.
pub fn monodromy_at<K: Coeff>(
    state: &NetworkState,
    frame: &SpinFrame,
    factors: &WallFactorAssignment<K>,
    point: SpecialPoint,
    c: f64,
    cfg: &TransportConfig,
) -> Result<NovikovMatrix<K>, NovikovError> {
    let w = limit_walk(state, &frame.cuts, point, cfg)?;
    let exponent = |wall: usize| -> f64 {
        match point {
            SpecialPoint::TurningPoint(_) => 0.0,
            SpecialPoint::Collision(id) => {
                let col = &state.collisions[id];
                match col.participants.iter().find(|p| p.wall == wall) {
                    Some(p) => p.mass,
                    None => state.walls[wall].start_mass(),
                }
            }
        }
    };
    evaluate(
        state.data.rank(),
        &w,
        |wall| factors.get(wall).clone(),
        |wall, n, u| frame.signs[wall].at(n, u),
        Some(&exponent),
        c,
    )
}

/// Factors `α` for every tree: `1` on initial trees and the scattering
/// sign times the product of the parents' factors otherwise. Checks that
/// the loop around every turning point and every ordered collision below
/// `c` is trivial modulo `T^c`.
pub fn solve_factors<K: Coeff>(
    state: &NetworkState,
    frame: &SpinFrame,
    c: f64,
    cfg: &TransportConfig,
) -> Result<WallFactorAssignment<K>, NovikovError> {
    let mut factors: Vec<K> = Vec::with_capacity(state.trees.len());
    for tree in &state.trees {
        let mut a = K::from_i64(tree.sign as i64);
        for &p in &tree.parents {
            a = a.mul(&factors[p]);
        }
        factors.push(a);
    }
    let assignment = WallFactorAssignment { factors };
    verify_factors(state, frame, &assignment, c, cfg)?;
    Ok(assignment)
}

/// The consistency check of [`solve_factors`] for a given assignment.
pub fn verify_factors<K: Coeff>(
    state: &NetworkState,
    frame: &SpinFrame,
    factors: &WallFactorAssignment<K>,
    c: f64,
    cfg: &TransportConfig,
) -> Result<(), NovikovError> {
    let points = (0..state.turning_points.len()).map(SpecialPoint::TurningPoint).chain(
        state
            .collisions
            .iter()
            .filter(|col| !col.cyclic && col.mass < c)
            .map(|col| SpecialPoint::Collision(col.id)),
    );
    for point in points {
        let m = monodromy_at(state, frame, factors, point, c, cfg)?;
        if !m.is_identity() {
            let defect = m
                .defect()
                .into_iter()
                .map(|(i, j, e)| format!("({i},{j}): {e}"))
                .collect::<Vec<_>>()
                .join("; ");
            return Err(NovikovError::Inconsistent { point, defect });
        }
    }
    Ok(())
}

/// Holonomy of the non-abelianized local system around each loop based at
/// `basepoint`, modulo `T^c`, in the sorted sheet order at the basepoint.
#[allow(clippy::too_many_arguments)]
pub fn nonabelianize<K: Coeff>(
    state: &NetworkState,
    frame: &SpinFrame,
    factors: &WallFactorAssignment<K>,
    local: &LocalSystemSpec<K>,
    basepoint: C64,
    loops: &[LoopSpec],
    c: f64,
    cfg: &TransportConfig,
) -> Result<Vec<NovikovMatrix<K>>, NovikovError> {
    let k = state.data.rank();
    loops
        .iter()
        .enumerate()
        .map(|(n, l)| {
            let path = l.path(basepoint, cfg.circle_points);
            let m = transport(state, frame, factors, &path, f64::INFINITY, cfg)?;
            let m = match local.holonomy.get(n) {
                Some(h) if h.len() == k => {
                    let d = h
                        .iter()
                        .map(|x| NovikovElement::monomial(0.0, x.clone(), f64::INFINITY))
                        .collect();
                    m.mul(&NovikovMatrix::diagonal(d, f64::INFINITY))?
                }
                Some(h) => {
                    return Err(NovikovError::Shape(format!(
                        "loop {n}: {} holonomies for rank {k}",
                        h.len()
                    )));
                }
                None => m,
            };
            m.truncate(c)
        })
        .collect()
}
