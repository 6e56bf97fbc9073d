//! Wall crossings: a uniform-grid segment index and collision classification.

use std::collections::{BTreeSet, HashMap};

use log::debug;
use serde::{Deserialize, Serialize};

use super::{Diagnostic, NetworkState};
use crate::curve::sheets_anywhere;
use crate::poly::C64;
use crate::tracer::{Wall, WallSource};

/// Segments bucketed by the grid cells their bounding boxes cover.
#[derive(Debug, Clone, Default)]
pub struct SegmentIndex {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<(usize, usize)>>,
}

impl SegmentIndex {
    pub fn new(cell: f64) -> Self {
        Self {
            cell: cell.max(1e-9),
            cells: HashMap::new(),
        }
    }

    /// Cell size equal to the median segment length of the given walls.
    pub fn for_walls<'a>(walls: impl IntoIterator<Item = &'a Wall>) -> Self {
        let mut lens: Vec<f64> = walls
            .into_iter()
            .flat_map(|w| w.points.windows(2).map(|s| (s[1] - s[0]).norm()))
            .filter(|l| *l > 0.0)
            .collect();
        lens.sort_by(f64::total_cmp);
        let cell = lens.get(lens.len() / 2).copied().unwrap_or(0.05);
        Self::new(cell)
    }

    fn key(&self, x: f64, y: f64) -> (i64, i64) {
        ((x / self.cell).floor() as i64, (y / self.cell).floor() as i64)
    }

    fn cover(&self, a: C64, b: C64) -> impl Iterator<Item = (i64, i64)> {
        let (x0, y0) = self.key(a.re.min(b.re), a.im.min(b.im));
        let (x1, y1) = self.key(a.re.max(b.re), a.im.max(b.im));
        (x0..=x1).flat_map(move |x| (y0..=y1).map(move |y| (x, y)))
    }

    pub fn insert(&mut self, wall: &Wall) {
        for (n, s) in wall.points.windows(2).enumerate() {
            let keys: Vec<_> = self.cover(s[0], s[1]).collect();
            for k in keys {
                self.cells.entry(k).or_default().push((wall.id, n));
            }
        }
    }

    /// Candidate `(wall, segment)` pairs whose cells meet the segment's box.
    pub fn candidates(&self, a: C64, b: C64) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for k in self.cover(a, b) {
            if let Some(v) = self.cells.get(&k) {
                out.extend(v.iter().copied());
            }
        }
        out
    }
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Intersection of closed segments `[a0,a1]` and `[b0,b1]`, with parameters.
pub fn segment_intersection(a0: C64, a1: C64, b0: C64, b1: C64) -> Option<(C64, f64, f64)> {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let denom = cross(d1, d2);
    if denom.abs() <= 1e-14 * d1.norm() * d2.norm() {
        return None;
    }
    let w = b0 - a0;
    let t = cross(w, d2) / denom;
    let u = cross(w, d1) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some((a0 + d1 * t, t, u))
    } else {
        None
    }
}

/// One entry of a collision: a tree root edge passing through the point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Participant {
    pub tree: usize,
    pub wall: usize,
    /// Segment of the wall containing the point.
    pub segment: usize,
    /// `m(T, p)`.
    pub mass: f64,
    /// Sorted-sheet slots of the wall's pair at the point.
    pub sheets: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Collision {
    pub id: usize,
    pub point: C64,
    /// Participants in chain order: `sheets.1` of each equals `sheets.0` of
    /// the next.
    pub participants: Vec<Participant>,
    pub cyclic: bool,
    pub mass: f64,
    pub scattered: bool,
    /// Walls emitted by scattering at this point.
    pub children: Vec<usize>,
}

impl Collision {
    pub fn types(&self) -> Vec<(usize, usize)> {
        self.participants.iter().map(|p| p.sheets).collect()
    }

    pub fn walls(&self) -> Vec<usize> {
        self.participants.iter().map(|p| p.wall).collect()
    }
}

/// Orders `types` into a chain `(s_1,s_2),(s_2,s_3),…`. Returns the order
/// and whether it closes up.
pub fn chain_order(types: &[(usize, usize)]) -> Option<(Vec<usize>, bool)> {
    let n = types.len();
    if n > 7 {
        return None;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut found: Option<(Vec<usize>, bool)> = None;
    permute(&mut idx, 0, &mut |p| {
        let chains = p.windows(2).all(|w| types[w[0]].1 == types[w[1]].0);
        if chains {
            let cyclic = types[p[n - 1]].1 == types[p[0]].0;
            // prefer the lexicographically first open chain
            let better = match &found {
                None => true,
                Some((q, qc)) => (*qc && !cyclic) || (qc == &cyclic && p < q.as_slice()),
            };
            if better {
                found = Some((p.to_vec(), cyclic));
            }
        }
    });
    found
}

fn permute(idx: &mut Vec<usize>, start: usize, f: &mut impl FnMut(&[usize])) {
    if start == idx.len() {
        f(idx);
        return;
    }
    for i in start..idx.len() {
        idx.swap(start, i);
        permute(idx, start + 1, f);
        idx.swap(start, i);
    }
}

#[derive(Debug, Clone)]
struct Hit {
    point: C64,
    a: (usize, usize),
    b: (usize, usize),
}

impl NetworkState {
    pub(crate) fn merge_tol(&self) -> f64 {
        1e-5 * self.data.domain_radius()
    }

    /// True when `p` is at the start of `wall` and that start is a scattering
    /// point involving `other` (as a parent or a sibling).
    fn is_birth_point(&self, wall: usize, other: usize, p: C64) -> bool {
        let w = &self.walls[wall];
        let WallSource::ScatteredAt { collision } = w.source else {
            return false;
        };
        if (p - w.points[0]).norm() > 10.0 * self.merge_tol() {
            return false;
        }
        let c = &self.collisions[collision];
        c.participants.iter().any(|q| q.wall == other) || c.children.contains(&other)
    }

    fn raw_hits(&self, new_walls: &[usize]) -> Vec<Hit> {
        let fresh: BTreeSet<usize> = new_walls.iter().copied().collect();
        let mut seen = BTreeSet::new();
        let mut hits = Vec::new();
        for &wa in new_walls {
            let a = &self.walls[wa];
            for (sa, s) in a.points.windows(2).enumerate() {
                for (wb, sb) in self.index.candidates(s[0], s[1]) {
                    if wb == wa || (fresh.contains(&wb) && wb < wa) {
                        continue;
                    }
                    if !seen.insert((wa, sa, wb, sb)) {
                        continue;
                    }
                    let b = &self.walls[wb];
                    let (b0, b1) = (b.points[sb], b.points[sb + 1]);
                    if let Some((p, _, _)) = segment_intersection(s[0], s[1], b0, b1) {
                        if self.is_birth_point(wa, wb, p) || self.is_birth_point(wb, wa, p) {
                            continue;
                        }
                        let (x, y) = if wa < wb {
                            ((wa, sa), (wb, sb))
                        } else {
                            ((wb, sb), (wa, sa))
                        };
                        hits.push(Hit { point: p, a: x, b: y });
                    }
                }
            }
        }
        hits.sort_by(|h, g| {
            (h.a, h.b)
                .cmp(&(g.a, g.b))
                .then(h.point.re.total_cmp(&g.point.re))
                .then(h.point.im.total_cmp(&g.point.im))
        });
        hits
    }

    /// Finds, classifies and records the collisions involving `new_walls`.
    /// Returns ids of the collisions created.
    pub fn find_collisions(&mut self, new_walls: &[usize]) -> Vec<usize> {
        let tol = self.merge_tol();
        let hits = self.raw_hits(new_walls);
        // cluster hits by point
        let mut clusters: Vec<(C64, Vec<(usize, usize)>)> = Vec::new();
        for h in hits {
            match clusters.iter_mut().find(|(p, _)| (*p - h.point).norm() < tol) {
                Some((_, members)) => {
                    for m in [h.a, h.b] {
                        if !members.iter().any(|x| x.0 == m.0) {
                            members.push(m);
                        }
                    }
                }
                None => clusters.push((h.point, vec![h.a, h.b])),
            }
        }
        let mut created: Vec<Collision> = Vec::new();
        for (point, mut members) in clusters {
            members.sort();
            let walls: BTreeSet<usize> = members.iter().map(|m| m.0).collect();
            let known = self.collisions.iter().any(|c| {
                (c.point - point).norm() < tol && walls.iter().all(|w| c.participants.iter().any(|q| q.wall == *w))
            });
            if known {
                continue;
            }
            if let Some(tp) = self
                .turning_points
                .iter()
                .find(|t| (t.position - point).norm() < self.config.trace.capture_radius())
            {
                debug!("crossing at {point} too close to turning point {}", tp.id);
                self.diagnostics.push(Diagnostic::NearTurningPoint {
                    point,
                    turning_point: tp.id,
                    walls: walls.iter().copied().collect(),
                });
                continue;
            }
            match self.classify(point, &members) {
                Ok(Some(c)) => created.push(c),
                Ok(None) => {}
                Err(reason) => {
                    debug!("discarding crossing at {point}: {reason}");
                    self.diagnostics.push(Diagnostic::Unordered {
                        point,
                        walls: walls.iter().copied().collect(),
                        reason,
                    });
                }
            }
        }
        created.sort_by(|a, b| {
            a.mass
                .total_cmp(&b.mass)
                .then(a.point.re.total_cmp(&b.point.re))
                .then(a.point.im.total_cmp(&b.point.im))
        });
        let mut ids = Vec::with_capacity(created.len());
        for mut c in created {
            c.id = self.collisions.len();
            ids.push(c.id);
            if !c.cyclic && c.mass < self.cutoff {
                self.push_pending(c.id, c.mass);
            }
            self.collisions.push(c);
        }
        ids
    }

    /// Participant data at `point`; `Ok(None)` for tangential crossings.
    fn classify(&self, point: C64, members: &[(usize, usize)]) -> Result<Option<Collision>, String> {
        let cfg = &self.config.trace.curve;
        let sorted = sheets_anywhere(&self.data, point, cfg).map_err(|e| e.to_string())?;
        let slot = |v: C64| -> Result<usize, String> {
            let (i, d) = sorted
                .iter()
                .enumerate()
                .map(|(i, s)| (i, (s - v).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty sheets");
            if d <= cfg.sheet_match_tol * (1.0 + v.norm()) {
                Ok(i)
            } else {
                Err(format!("sheet value {v} unmatched at distance {d:e}"))
            }
        };
        let mut parts = Vec::with_capacity(members.len());
        for &(w, seg) in members {
            let wall = &self.walls[w];
            let (a, b) = wall
                .pair_values_at(&self.data, seg, point, cfg)
                .map_err(|e| e.to_string())?;
            let mass = wall.mass_at(&self.data, seg, point, cfg).map_err(|e| e.to_string())?;
            parts.push(Participant {
                tree: w,
                wall: w,
                segment: seg,
                mass,
                sheets: (slot(a)?, slot(b)?),
            });
        }
        let types: Vec<(usize, usize)> = parts.iter().map(|p| p.sheets).collect();
        for i in 0..types.len() {
            for j in 0..i {
                if types[i] == types[j] {
                    return Ok(None);
                }
            }
        }
        let Some((order, cyclic)) = chain_order(&types) else {
            return Err(format!("types {types:?} do not chain"));
        };
        let participants: Vec<Participant> = order.into_iter().map(|i| parts[i].clone()).collect();
        let mass = participants.iter().map(|p| p.mass).sum();
        Ok(Some(Collision {
            id: usize::MAX,
            point,
            participants,
            cyclic,
            mass,
            scattered: false,
            children: Vec::new(),
        }))
    }
}
