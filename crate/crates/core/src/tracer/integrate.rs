//! Dormand–Prince 5(4) integration of `dz/ds = e^{2πiθ}/(ζ_i − ζ_j)`.

use log::{debug, warn};

use super::{closest_pair, Seed, Termination, TraceConfig, Wall};
use crate::curve::{match_labels, min_gap, raw_sheets, SpectralData, TurningPoint};
use crate::poly::C64;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

#[derive(Clone)]
struct Point {
    z: C64,
    roots: Vec<C64>,
    f: C64,
}

struct Tracer<'a> {
    data: &'a SpectralData,
    cfg: &'a TraceConfig,
    pair: (usize, usize),
    rot: C64,
}

enum Attempt {
    Ok { end: Point, err: f64 },
    Reject,
}

impl Tracer<'_> {
    fn rhs(&self, roots: &[C64]) -> C64 {
        self.rot / (roots[self.pair.0] - roots[self.pair.1])
    }

    /// Roots at `z` continued from `base`, or `None` if the continuation
    /// is not trustworthy at this step size.
    fn continue_roots(&self, base: &Point, z: C64) -> Option<Vec<C64>> {
        let found = raw_sheets(self.data, z, Some(&base.roots), &self.cfg.curve).ok()?;
        let perm = match_labels(&base.roots, &found);
        let next: Vec<C64> = perm.iter().map(|&j| found[j]).collect();
        let movement = base
            .roots
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        (min_gap(&next) > 10.0 * movement).then_some(next)
    }

    fn attempt(&self, start: &Point, h: f64) -> Attempt {
        let mut k = [C64::new(0.0, 0.0); 7];
        k[0] = start.f;
        let mut last = None;
        for s in 1..7 {
            let mut dz = C64::new(0.0, 0.0);
            for j in 0..s {
                dz += k[j] * A[s][j];
            }
            let z = start.z + dz * h;
            let Some(roots) = self.continue_roots(start, z) else {
                return Attempt::Reject;
            };
            k[s] = self.rhs(&roots);
            if !k[s].is_finite() {
                return Attempt::Reject;
            }
            if s == 6 {
                last = Some(Point { z, roots, f: k[s] });
            }
        }
        let end = last.expect("seventh stage");
        let mut err = C64::new(0.0, 0.0);
        for s in 0..7 {
            err += k[s] * E[s];
        }
        Attempt::Ok {
            end,
            err: (err * h).norm(),
        }
    }
}

/// Traces one wall from a seed until a terminal event.
pub fn trace_wall(
    data: &SpectralData,
    seed: &Seed,
    cfg: &TraceConfig,
    turning_points: &[TurningPoint],
    id: usize,
) -> Wall {
    let tracer = Tracer {
        data,
        cfg,
        pair: seed.pair,
        rot: cfg.rotation(),
    };
    let f0 = tracer.rhs(&seed.values);
    let mut cur = Point {
        z: seed.position,
        roots: seed.values.clone(),
        f: f0,
    };
    let (a, b) = seed.pair;
    let mut wall = Wall {
        id,
        sheets: seed.pair,
        points: vec![cur.z],
        sheet_values: vec![(cur.roots[a], cur.roots[b])],
        mass_profile: vec![seed.mass],
        source: seed.source,
        termination: Termination::StepFailure,
        theta: cfg.theta,
    };
    let capture = cfg.capture_radius();
    let mut armed: Vec<bool> = turning_points
        .iter()
        .map(|t| (t.position - cur.z).norm() > 2.0 * capture)
        .collect();
    let radius = data.domain_radius();
    let budget = cfg.mass_cutoff - seed.mass;
    if budget <= 0.0 {
        wall.termination = Termination::MassCutoff;
        return wall;
    }
    if let Some(t) = check_stop(data, cfg, turning_points, &mut armed, &cur, seed.pair) {
        wall.termination = t;
        return wall;
    }
    let mut s = 0.0;
    let mut h = cfg.step_init;
    let mut steps = 0usize;
    loop {
        steps += 1;
        if steps > cfg.max_steps {
            warn!("wall {id}: step budget exhausted at z = {}", cur.z);
            wall.termination = Termination::StepFailure;
            return wall;
        }
        h = h.min(cfg.step_max).min(cfg.max_segment / cur.f.norm());
        let mut last_step = false;
        if s + h >= budget {
            h = budget - s;
            last_step = true;
        }
        if h < cfg.step_min && !last_step {
            warn!("wall {id}: step size underflow at z = {}", cur.z);
            wall.termination = Termination::StepFailure;
            return wall;
        }
        let (end, err) = match tracer.attempt(&cur, h) {
            Attempt::Ok { end, err } => (end, err),
            Attempt::Reject => {
                h *= 0.5;
                if h < cfg.step_min {
                    warn!("wall {id}: sheet continuation failed at z = {}", cur.z);
                    wall.termination = Termination::StepFailure;
                    return wall;
                }
                continue;
            }
        };
        let tol = cfg.ode_tol * (1.0 + cur.z.norm());
        if err > tol || (end.z - cur.z).norm() > cfg.max_segment * 1.000001 {
            let factor = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 0.5 };
            h *= factor.clamp(0.1, 0.5);
            continue;
        }
        if end.z.norm() > radius {
            let (end, hs) = clip_to_radius(&tracer, &cur, h, radius);
            push(&mut wall, &end, seed.pair, seed.mass + s + hs);
            wall.termination = Termination::LeftDomain;
            return wall;
        }
        s += h;
        push(&mut wall, &end, seed.pair, seed.mass + s);
        cur = end;
        if last_step {
            wall.termination = Termination::MassCutoff;
            return wall;
        }
        if let Some(t) = check_stop(data, cfg, turning_points, &mut armed, &cur, seed.pair) {
            debug!("wall {id}: {:?} after {} steps", t, steps);
            wall.termination = t;
            return wall;
        }
        let grow = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 5.0 };
        h *= grow.clamp(0.2, 5.0);
    }
}

fn push(wall: &mut Wall, p: &Point, pair: (usize, usize), mass: f64) {
    wall.points.push(p.z);
    wall.sheet_values.push((p.roots[pair.0], p.roots[pair.1]));
    let prev = *wall.mass_profile.last().unwrap();
    wall.mass_profile.push(mass.max(prev));
}

/// Bisects the step length so the end point lands on `|z| = radius`.
fn clip_to_radius(tracer: &Tracer<'_>, start: &Point, h: f64, radius: f64) -> (Point, f64) {
    let mut lo = 0.0;
    let mut hi = h;
    let mut best = (start.clone(), 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match tracer.attempt(start, mid) {
            Attempt::Ok { end, .. } => {
                let r = end.z.norm();
                if r > radius {
                    hi = mid;
                } else {
                    lo = mid;
                    let done = radius - r < 1e-12 * radius;
                    best = (end, mid);
                    if done {
                        break;
                    }
                }
            }
            Attempt::Reject => hi = mid,
        }
    }
    best
}

fn check_stop(
    data: &SpectralData,
    cfg: &TraceConfig,
    turning_points: &[TurningPoint],
    armed: &mut [bool],
    p: &Point,
    pair: (usize, usize),
) -> Option<Termination> {
    if let Some(idx) = data
        .punctures()
        .finite
        .iter()
        .position(|q| (q - p.z).norm() < cfg.puncture_radius)
    {
        return Some(Termination::EnteredPunctureNeighborhood { puncture: idx });
    }
    let capture = cfg.capture_radius();
    for (t, tp) in turning_points.iter().enumerate() {
        let d = (tp.position - p.z).norm();
        if !armed[t] {
            armed[t] = d > 2.0 * capture;
            continue;
        }
        if d < capture {
            let (i, j) = closest_pair(&p.roots);
            let matches = (i, j) == pair || (j, i) == pair;
            if matches {
                return Some(Termination::HitTurningPoint { turning_point: tp.id });
            }
        }
    }
    None
}
