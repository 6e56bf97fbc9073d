//! Analytic continuation of sheet labels along paths.

use super::{min_gap, raw_sheets, sheet_order, CurveConfig, CurveError, SheetSet, SpectralData};
use crate::poly::C64;

/// Assigns each of `old` to a distinct entry of `new` (`old.len() <=
/// new.len()`), minimizing the total displacement. Returns `perm` with
/// `new[perm[i]]` continuing `old[i]`.
pub fn match_labels(old: &[C64], new: &[C64]) -> Vec<usize> {
    let k = old.len();
    if k == new.len() && k <= 6 {
        let mut best = (f64::INFINITY, Vec::new());
        let mut idx: Vec<usize> = (0..k).collect();
        permute(&mut idx, 0, &mut |p| {
            let cost: f64 = p.iter().enumerate().map(|(i, &j)| (old[i] - new[j]).norm_sqr()).sum();
            if cost < best.0 {
                best = (cost, p.to_vec());
            }
        });
        return best.1;
    }
    // greedy on globally sorted pair distances
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(k * new.len());
    for (i, o) in old.iter().enumerate() {
        for (j, n) in new.iter().enumerate() {
            pairs.push(((o - n).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut perm = vec![usize::MAX; k];
    let mut used = vec![false; new.len()];
    for (_, i, j) in pairs {
        if perm[i] == usize::MAX && !used[j] {
            perm[i] = j;
            used[j] = true;
        }
    }
    perm
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

/// Continues the labeled root list `values` at `from` along the straight
/// segment to `to`, preserving labels.
pub fn track(
    data: &SpectralData,
    from: C64,
    values: &[C64],
    to: C64,
    cfg: &CurveConfig,
) -> Result<Vec<C64>, CurveError> {
    let delta = to - from;
    let len = delta.norm();
    let mut cur = values.to_vec();
    if len == 0.0 {
        return Ok(cur);
    }
    let mut t = 0.0;
    let mut dt = 1.0f64;
    while t < 1.0 {
        dt = dt.min(1.0 - t);
        let z1 = from + delta * (t + dt);
        if let Some(_p) = data.near_finite_puncture(z1, cfg.clearance_tol) {
            return Err(CurveError::NearPuncture { z: z1 });
        }
        let accepted = match raw_sheets(data, z1, Some(&cur), cfg) {
            Ok(roots) => {
                let perm = match_labels(&cur, &roots);
                let next: Vec<C64> = perm.iter().map(|&j| roots[j]).collect();
                let movement = cur.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                let gap = min_gap(&next).min(min_gap(&cur));
                (gap > 3.0 * movement).then_some(next)
            }
            Err(e) if dt * len < cfg.min_step => return Err(e),
            Err(_) => None,
        };
        match accepted {
            Some(next) => {
                cur = next;
                t += dt;
                dt *= 2.0;
            }
            None => {
                dt *= 0.5;
                if dt * len < cfg.min_step {
                    return Err(CurveError::AmbiguousContinuation { z: from + delta * t });
                }
            }
        }
    }
    Ok(cur)
}

/// Continues the sorted sheet set `start` along a polyline beginning at
/// `start.z`. Returns the sorted sheets at the end point and `perm`, where
/// `perm[i]` is the sorted index at the end of the continuation of start
/// sheet `i`.
pub fn continue_sheets(
    data: &SpectralData,
    path: &[C64],
    start: &SheetSet,
    cfg: &CurveConfig,
) -> Result<(SheetSet, Vec<usize>), CurveError> {
    let mut cur = start.values.clone();
    let mut z = start.z;
    for &p in path {
        if p == z {
            continue;
        }
        cur = track(data, z, &cur, p, cfg)?;
        z = p;
    }
    let mut sorted = cur.clone();
    sorted.sort_by(sheet_order);
    let perm = match_labels(&cur, &sorted);
    Ok((SheetSet { z, values: sorted }, perm))
}
