#![allow(dead_code)]

use specnet_core::{SpectralData, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// ζ² − z
pub fn airy(radius: f64) -> SpectralData {
    SpectralData::polynomial(vec![vec![], vec![c(0.0, 0.0), c(1.0, 0.0)]], radius).unwrap()
}

/// ζ² − (z² − 1)
pub fn two_point(radius: f64) -> SpectralData {
    SpectralData::polynomial(vec![vec![], vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]], radius).unwrap()
}

/// ζ² − zζ − 1
pub fn shifted(radius: f64) -> SpectralData {
    SpectralData::polynomial(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0)]], radius).unwrap()
}

/// ζ³ − 3ζ − z
pub fn cubic(radius: f64) -> SpectralData {
    SpectralData::polynomial(vec![vec![], vec![c(3.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]], radius).unwrap()
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}

/// Random circles that enclose no wall end and no unscattered collision and
/// keep away from every special point, with a basepoint on each.
pub fn contractible_circles(
    state: &specnet_core::NetworkState,
    n: usize,
    seed: u64,
) -> Vec<(specnet_core::novikov::LoopSpec, C64)> {
    use rand::{Rng, SeedableRng};
    use specnet_core::Termination;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let r_dom = state.data.domain_radius();
    let ends: Vec<C64> = state
        .walls
        .iter()
        .filter(|w| matches!(w.termination, Termination::MassCutoff | Termination::StepFailure))
        .filter_map(|w| w.points.last().copied())
        .collect();
    let open: Vec<C64> = state
        .collisions
        .iter()
        .filter(|c| !c.scattered)
        .map(|c| c.point)
        .collect();
    let mut avoid: Vec<C64> = ends.clone();
    avoid.extend(state.collisions.iter().map(|c| c.point));
    avoid.extend(state.turning_points.iter().map(|t| t.position));
    let mut out = Vec::new();
    for _ in 0..10_000 {
        if out.len() == n {
            break;
        }
        let center = c(rng.random_range(-0.7..0.7) * r_dom, rng.random_range(-0.7..0.7) * r_dom);
        let radius = rng.random_range(0.1..0.4) * r_dom;
        if center.norm() + radius > 0.95 * r_dom {
            continue;
        }
        if ends.iter().chain(&open).any(|p| (p - center).norm() < radius) {
            continue;
        }
        if avoid.iter().any(|p| ((p - center).norm() - radius).abs() < 0.01) {
            continue;
        }
        let base = center + C64::from_polar(radius, rng.random_range(0.0..std::f64::consts::TAU));
        out.push((specnet_core::novikov::LoopSpec::Circle { center, radius }, base));
    }
    out
}

pub fn seg_dist(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let t = if d.norm_sqr() > 0.0 {
        ((p - a) * d.conj()).re / d.norm_sqr()
    } else {
        0.0
    };
    (p - (a + d * t.clamp(0.0, 1.0))).norm()
}

pub fn polyline_dist(p: C64, line: &[C64]) -> f64 {
    if line.len() == 1 {
        return (p - line[0]).norm();
    }
    line.windows(2)
        .map(|s| seg_dist(p, s[0], s[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Roots of a monic-or-not polynomial (ascending coefficients) by
/// Durand–Kerner followed by Newton polishing.
pub fn dk_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let a: Vec<C64> = coeffs.iter().map(|x| x / lead).collect();
    let eval = |z: C64| a.iter().rev().fold(c(0.0, 0.0), |acc, &k| acc * z + k);
    let deriv = |z: C64| {
        a.iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(c(0.0, 0.0), |acc, (i, &k)| acc * z + k * i as f64)
    };
    let bound = 1.0 + a[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(bound, 0.4 + k as f64 * std::f64::consts::TAU / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut den = c(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let dz = eval(z[i]) / den;
            z[i] -= dz;
            moved = moved.max(dz.norm());
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let d = deriv(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }
    z
}

/// `Re ∫ e^{−2πiθ}(ζ_a − ζ_b) dz` along a wall from its turning point to the
/// point `p` of segment `n`, with roots solved afresh at every node.
/// `symbol(z)` gives ascending coefficients in ζ.
pub fn independent_mass(
    symbol: &dyn Fn(C64) -> Vec<C64>,
    theta: f64,
    origin: C64,
    wall: &specnet_core::Wall,
    n: usize,
    p: C64,
) -> f64 {
    let rot = C64::from_polar(1.0, -std::f64::consts::TAU * theta);
    let gl = gauss_legendre_unit(20);
    let pick = |z: C64, guess: (C64, C64)| -> (C64, C64) {
        let r = dk_roots(&symbol(z));
        let ia = (0..r.len())
            .min_by(|&i, &j| (r[i] - guess.0).norm().total_cmp(&(r[j] - guess.0).norm()))
            .unwrap();
        let ib = (0..r.len())
            .filter(|&i| i != ia)
            .min_by(|&i, &j| (r[i] - guess.1).norm().total_cmp(&(r[j] - guess.1).norm()))
            .unwrap();
        (r[ia], r[ib])
    };
    let mut total = c(0.0, 0.0);
    // from the turning point: z = origin + (z0 − origin)s², where ζ is smooth in s
    let z0 = wall.points[0];
    let (a0, b0) = wall.sheet_values[0];
    let mid = 0.5 * (a0 + b0);
    for &(s, w) in &gl {
        let z = origin + (z0 - origin) * s * s;
        let (a, b) = pick(z, (mid + (a0 - mid) * s, mid + (b0 - mid) * s));
        total += rot * (a - b) * (z0 - origin) * 2.0 * s * w;
    }
    let mut prev = (a0, b0);
    for k in 0..=n {
        let za = wall.points[k];
        let zb = if k == n { p } else { wall.points[k + 1] };
        let hb = if k == n { prev } else { wall.sheet_values[k + 1] };
        for &(s, w) in &gl {
            let z = za + (zb - za) * s;
            let g = (prev.0 + (hb.0 - prev.0) * s, prev.1 + (hb.1 - prev.1) * s);
            let (a, b) = pick(z, g);
            total += rot * (a - b) * (zb - za) * w;
        }
        if k < n {
            prev = wall.sheet_values[k + 1];
        }
    }
    total.re
}

/// Walls of `ζ² − φ₁ζ − φ₂` traced straight from the closed form
/// `ζ_a − ζ_b = √(φ₁² + 4φ₂)` by fixed-ratio RK4 in arclength.
pub fn closed_form_walls(
    disc: &dyn Fn(C64) -> C64,
    turning_points: &[C64],
    theta: f64,
    cutoff: f64,
    radius: f64,
) -> Vec<Vec<C64>> {
    let rot = C64::from_polar(1.0, -std::f64::consts::TAU * theta);
    let mut out = Vec::new();
    for (t, &tp) in turning_points.iter().enumerate() {
        // D(z) ≈ D'(tp)(z − tp)
        let h = 1e-7;
        let dprime = (disc(tp + c(h, 0.0)) - disc(tp - c(h, 0.0))) / (2.0 * h);
        let sq = dprime.sqrt();
        for k in 0..3 {
            let phi = (2.0 / 3.0) * (-(rot * sq).arg() + k as f64 * std::f64::consts::PI);
            let r0 = 1e-6;
            let mut z = tp + C64::from_polar(r0, phi);
            // branch of √D with rot·√D·dz positive along the ray
            let mut delta = disc(z).sqrt();
            if (rot * delta * C64::from_polar(1.0, phi)).re < 0.0 {
                delta = -delta;
            }
            let mut mass = (2.0 / 3.0) * sq.norm() * r0.powf(1.5);
            let mut pts = vec![z];
            let field = |z: C64, near: C64| -> (C64, f64, C64) {
                let mut d = disc(z).sqrt();
                if (d - near).norm() > (d + near).norm() {
                    d = -d;
                }
                let g = rot * d;
                (g.conj() / g.norm(), g.norm(), d)
            };
            for _ in 0..2_000_000 {
                let near_other = turning_points
                    .iter()
                    .enumerate()
                    .any(|(u, &q)| u != t && (z - q).norm() < 1e-3);
                if mass >= cutoff || z.norm() > radius || near_other {
                    break;
                }
                let step = (0.1 * (z - tp).norm()).min(2e-3);
                let (k1, m1, d1) = field(z, delta);
                let (k2, m2, _) = field(z + k1 * (step / 2.0), d1);
                let (k3, m3, _) = field(z + k2 * (step / 2.0), d1);
                let (k4, m4, d4) = field(z + k3 * step, d1);
                let dz = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0);
                let dm = (m1 + 2.0 * m2 + 2.0 * m3 + m4) * step / 6.0;
                if mass + dm > cutoff {
                    let f = (cutoff - mass) / dm;
                    z += dz * f;
                    pts.push(z);
                    break;
                }
                z += dz;
                mass += dm;
                delta = d4;
                pts.push(z);
            }
            out.push(pts);
        }
    }
    out
}

/// Ascending coefficients of ζ³ − 3ζ − z.
pub fn cubic_symbol(z: C64) -> Vec<C64> {
    vec![-z, c(-3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]
}

/// Largest `|Im ∫ e^{−2πiθ}Δζ dz| / (|Δz| |Δζ|)` over segments, with
/// Gauss–Legendre quadrature on freshly solved roots.
pub fn composite_residual(symbol: &dyn Fn(C64) -> Vec<C64>, theta: f64, w: &specnet_core::Wall) -> f64 {
    let rot = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * theta);
    let gl = gauss_legendre_unit(8);
    let mut worst = 0.0f64;
    for n in 0..w.len() - 1 {
        let (z0, z1) = (w.points[n], w.points[n + 1]);
        let (a0, b0) = w.sheet_values[n];
        let (a1, b1) = w.sheet_values[n + 1];
        let mut acc = c(0.0, 0.0);
        for &(s, wt) in &gl {
            let z = z0 + (z1 - z0) * s;
            let r = dk_roots(&symbol(z));
            let near = |g: C64| {
                *r.iter()
                    .min_by(|x, y| (*x - g).norm().total_cmp(&(*y - g).norm()))
                    .unwrap()
            };
            let a = near(a0 + (a1 - a0) * s);
            let b = near(b0 + (b1 - b0) * s);
            acc += rot * (a - b) * (z1 - z0) * wt;
        }
        let scale = (z1 - z0).norm() * 0.5 * ((a0 - b0).norm() + (a1 - b1).norm());
        if scale > 0.0 {
            worst = worst.max(acc.im.abs() / scale);
        }
    }
    worst
}

/// Symmetric Hausdorff distance between point sets, restricted to the disk
/// of radius `r` minus discs of radius `skip` around `tps`.
pub fn hausdorff_in_disk(a: &[Vec<C64>], b: &[Vec<C64>], r: f64, tps: &[C64], skip: f64) -> f64 {
    let one = |x: &[Vec<C64>], y: &[Vec<C64>]| {
        x.iter()
            .flatten()
            .filter(|p| p.norm() < r && tps.iter().all(|t| (*p - t).norm() > skip))
            .map(|&p| y.iter().map(|l| polyline_dist(p, l)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}
