//! Branch cuts and the sign carried by each wall.
//!
//! Every turning point gets a straight cut running out of the domain.
//! Crossing a cut in either direction negates the coordinate of the sheet
//! sitting in the second slot of the colliding pair there. A wall that
//! crosses a cut on that sheet flips its own sign.

use serde::{Deserialize, Serialize};

use super::transport::{evaluate, limit_walk, SpecialPoint, TransportConfig};
use super::NovikovError;
use crate::curve::{match_labels, sheet_order, sheets_anywhere, track, CurveConfig, CurveError, SpectralData};
use crate::network::{segment_intersection, NetworkState};
use crate::poly::C64;
use crate::tracer::{ray_angles, WallSource};
use num_rational::BigRational;

const MIN_SEPARATION: f64 = std::f64::consts::PI / 12.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BranchCut {
    pub turning_point: usize,
    pub origin: C64,
    pub direction: C64,
    pub length: f64,
    /// Distances from the origin where the pair is sampled.
    pub stations: Vec<f64>,
    /// The colliding pair `(a, b)` at each station, `a` first in sheet
    /// order at the innermost station.
    pub pair: Vec<(C64, C64)>,
}

impl BranchCut {
    pub fn end(&self) -> C64 {
        self.origin + self.direction * self.length
    }

    fn point(&self, s: f64) -> C64 {
        self.origin + self.direction * s
    }

    /// Value of the second-slot sheet at a point `q` of the cut.
    pub fn slot_b(&self, data: &SpectralData, q: C64, cfg: &CurveConfig) -> Result<C64, CurveError> {
        let s = ((q - self.origin) * self.direction.conj()).re;
        let k = self.stations.partition_point(|&x| x <= s).saturating_sub(1);
        let (a, b) = self.pair[k];
        let v = track(data, self.point(self.stations[k]), &[a, b], q, cfg)?;
        Ok(v[1])
    }
}

/// Sign of a wall as a function of position along it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WallSign {
    pub start: i64,
    /// `(segment, parameter)` of the cut crossings that flip the sign.
    pub flips: Vec<(usize, f64)>,
}

impl WallSign {
    pub fn at(&self, segment: usize, t: f64) -> i64 {
        let n = self.flips.iter().filter(|&&(s, u)| (s, u) < (segment, t)).count();
        if n % 2 == 0 {
            self.start
        } else {
            -self.start
        }
    }
}

/// Cuts and wall signs for one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpinFrame {
    pub cuts: Vec<BranchCut>,
    /// Indexed by wall id.
    pub signs: Vec<WallSign>,
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

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    d.min(2.0 * std::f64::consts::PI - d)
}

fn exit_length(origin: C64, dir: C64, radius: f64) -> f64 {
    let b = (origin * dir.conj()).re;
    let disc = b * b - origin.norm_sqr() + radius * radius;
    -b + disc.max(0.0).sqrt()
}

fn build_cut(state: &NetworkState, t: usize, dir: C64, length: f64) -> Result<BranchCut, NovikovError> {
    let data = &state.data;
    let cfg = &state.config.trace.curve;
    let tp = &state.turning_points[t];
    let r0 = state.config.trace.seed_radius;
    let mut stations = vec![r0];
    let mut s = r0;
    while s < length {
        s = if s < 0.02 { (s * 1.5).min(0.02) } else { s + 0.02 };
        stations.push(s.min(length));
    }
    let z0 = tp.position + dir * r0;
    let mut roots = sheets_anywhere(data, z0, cfg)?;
    roots.sort_by(|x, y| (x - tp.double_root).norm().total_cmp(&(y - tp.double_root).norm()));
    let mut pair = [roots[0], roots[1]];
    pair.sort_by(sheet_order);
    let mut values = vec![(pair[0], pair[1])];
    let mut cur = pair.to_vec();
    for w in stations.windows(2) {
        cur = track(data, tp.position + dir * w[0], &cur, tp.position + dir * w[1], cfg)?;
        values.push((cur[0], cur[1]));
    }
    Ok(BranchCut {
        turning_point: t,
        origin: tp.position,
        direction: dir,
        length,
        stations,
        pair: values,
    })
}

fn choose_cuts(state: &NetworkState) -> Result<Vec<BranchCut>, NovikovError> {
    let tps = &state.turning_points;
    let r = state.data.domain_radius() * 1.001;
    let n = tps.len().max(1) as f64;
    let centroid = tps.iter().fold(C64::new(0.0, 0.0), |acc, t| acc + t.position) / n;
    let scale = tps.iter().map(|t| t.position.norm()).fold(1.0, f64::max);
    let center = centroid + C64::new(0.1234, 0.0567) * scale;
    let finite = state.data.punctures().finite.clone();
    let mut cuts: Vec<BranchCut> = Vec::new();
    for (t, tp) in tps.iter().enumerate() {
        let others: Vec<C64> = tps
            .iter()
            .filter(|u| u.id != t)
            .map(|u| u.position)
            .chain(finite.iter().copied())
            .collect();
        let nearest = others
            .iter()
            .map(|o| (o - tp.position).norm())
            .fold(f64::INFINITY, f64::min);
        let clearance = (0.1 * nearest).min(0.05);
        let rays = ray_angles(tp.local_coefficient, state.theta);
        let base = (tp.position - center).arg();
        let step = std::f64::consts::PI / 24.0;
        let candidates: Vec<f64> = (0..48)
            .map(|k| {
                let j = (k + 1) / 2;
                let s = if k % 2 == 1 { 1.0 } else { -1.0 };
                base + s * j as f64 * step
            })
            .collect();
        let mut chosen = None;
        for strict in [true, false] {
            for &phi in &candidates {
                if rays.iter().any(|&a| angle_gap(a, phi) < MIN_SEPARATION) {
                    continue;
                }
                let dir = C64::from_polar(1.0, phi);
                let length = exit_length(tp.position, dir, r);
                let end = tp.position + dir * length;
                if others
                    .iter()
                    .any(|&o| point_segment_distance(o, tp.position, end) < clearance)
                {
                    continue;
                }
                if strict
                    && cuts
                        .iter()
                        .any(|c| segment_intersection(tp.position, end, c.origin, c.end()).is_some())
                {
                    continue;
                }
                chosen = Some((dir, length));
                break;
            }
            if chosen.is_some() {
                break;
            }
        }
        let (dir, length) =
            chosen.ok_or_else(|| NovikovError::Cut(format!("no admissible cut at turning point {t}")))?;
        cuts.push(build_cut(state, t, dir, length)?);
    }
    Ok(cuts)
}

fn nearest(values: &[C64], v: C64) -> usize {
    match_labels(&[v], values)[0]
}

fn wall_flips(state: &NetworkState, cuts: &[BranchCut]) -> Result<Vec<Vec<(usize, f64)>>, NovikovError> {
    let data = &state.data;
    let cfg = &state.config.trace.curve;
    let mut out = Vec::with_capacity(state.walls.len());
    for wall in &state.walls {
        let mut flips = Vec::new();
        for cut in cuts {
            let (a, b) = (cut.origin, cut.end());
            for (n, s) in wall.points.windows(2).enumerate() {
                let Some((q, tw, _)) = segment_intersection(s[0], s[1], a, b) else {
                    continue;
                };
                if flips.iter().any(|&(m, u): &(usize, f64)| {
                    let p = wall.points[m] + (wall.points[m + 1] - wall.points[m]) * u;
                    (p - q).norm() < 1e-12
                }) {
                    continue;
                }
                let roots = sheets_anywhere(data, q, cfg)?;
                let sb = nearest(&roots, cut.slot_b(data, q, cfg)?);
                let (zi, zj) = wall.pair_values_at(data, n, q, cfg)?;
                if sb == nearest(&roots, zi) || sb == nearest(&roots, zj) {
                    flips.push((n, tw));
                }
            }
        }
        flips.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        out.push(flips);
    }
    Ok(out)
}

/// `+1` when the mass density of the later wall in a chain is a
/// counterclockwise turn (less than π) from that of the earlier one.
fn orientation(earlier: C64, later: C64) -> i64 {
    let turn = (later.arg() - earlier.arg()).rem_euclid(2.0 * std::f64::consts::PI);
    if turn < std::f64::consts::PI {
        1
    } else {
        -1
    }
}

impl SpinFrame {
    /// Chooses cuts, then fixes the sign of each initial wall so that the
    /// small loop around its turning point is trivial. A scattered wall
    /// takes the product of its parents' signs at the collision times the
    /// orientation of each consecutive pair of parents.
    pub fn new(state: &NetworkState, cfg: &TransportConfig) -> Result<Self, NovikovError> {
        let cuts = choose_cuts(state)?;
        let flips = wall_flips(state, &cuts)?;
        let mut signs: Vec<WallSign> = flips.into_iter().map(|flips| WallSign { start: 1, flips }).collect();
        let k = state.data.rank();
        for t in 0..state.turning_points.len() {
            let own: Vec<usize> = state
                .walls
                .iter()
                .filter(|w| matches!(w.source, WallSource::TurningPointRay { turning_point, .. } if turning_point == t))
                .map(|w| w.id)
                .collect();
            if own.is_empty() {
                continue;
            }
            let walk = limit_walk(state, &cuts, SpecialPoint::TurningPoint(t), cfg)?;
            let mut found = false;
            for mask in 0..(1usize << own.len()) {
                for (bit, &w) in own.iter().enumerate() {
                    signs[w].start = if mask >> bit & 1 == 1 { -1 } else { 1 };
                }
                let m = evaluate::<BigRational>(
                    k,
                    &walk,
                    |_| <BigRational as super::Coeff>::one(),
                    |w, n, u| signs[w].at(n, u),
                    Some(&|_| 0.0),
                    f64::INFINITY,
                )?;
                if m.is_identity() {
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(NovikovError::Inconsistent {
                    point: SpecialPoint::TurningPoint(t),
                    defect: "no sign choice trivializes the loop".into(),
                });
            }
        }
        for w in 0..state.walls.len() {
            let WallSource::ScatteredAt { collision } = state.walls[w].source else {
                continue;
            };
            let c = &state.collisions[collision];
            let mut s = 1;
            let mut prev: Option<C64> = None;
            let values = sheets_anywhere(&state.data, c.point, &state.config.trace.curve)?;
            let rot = state.config.trace.rotation().conj();
            for &parent in &state.trees[w].parents {
                let p =
                    c.participants.iter().find(|p| p.tree == parent).ok_or_else(|| {
                        NovikovError::Cut(format!("parent {parent} missing from collision {collision}"))
                    })?;
                let pw = &state.walls[p.wall];
                let (a, b) = (pw.points[p.segment], pw.points[p.segment + 1]);
                let d = b - a;
                let u = if d.norm_sqr() > 0.0 {
                    ((c.point - a) * d.conj()).re / d.norm_sqr()
                } else {
                    0.0
                };
                s *= signs[p.wall].at(p.segment, u);
                let density = rot * (values[p.sheets.0] - values[p.sheets.1]);
                if let Some(before) = prev {
                    s *= orientation(before, density);
                }
                prev = Some(density);
            }
            signs[w].start = s;
        }
        Ok(Self { cuts, signs })
    }
}
