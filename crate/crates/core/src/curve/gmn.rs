//! Sufficient check for the GMN condition from leading Puiseux exponents.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{branch_points, CurveConfig, SpectralData};
use crate::poly::{self, C64};

pub type Exponent = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PunctureLocation {
    Finite(C64),
    Infinity,
}

/// Pole order of `(ζ_i − ζ_j)² dz²` for one sheet pair at a puncture.
/// `None` when the leading terms of the two sheets coincide and the order
/// cannot be read off the Newton polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairPole {
    pub pair: (usize, usize),
    pub pole_order: Option<Exponent>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PunctureReport {
    pub location: PunctureLocation,
    /// Leading exponents of the sheets in the local coordinate; `None` for a
    /// sheet that vanishes identically.
    pub sheet_exponents: Vec<Option<Exponent>>,
    pub pairs: Vec<PairPole>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GmnReport {
    pub branch_points_simple: bool,
    pub has_branch_point: bool,
    pub turning_point_count: usize,
    pub punctures: Vec<PunctureReport>,
    pub verdict: bool,
    /// Set when branch points could not be computed.
    pub error: Option<String>,
}

pub fn gmn_check(data: &SpectralData) -> GmnReport {
    let cfg = CurveConfig::default();
    let (simple, has, count, error) = match branch_points(data, &cfg) {
        Ok(tps) => (tps.iter().all(|t| t.simple), !tps.is_empty(), tps.len(), None),
        Err(e) => (false, false, 0, Some(e.to_string())),
    };
    let mut punctures = Vec::new();
    for &p in &data.punctures().finite {
        punctures.push(puncture_report(data, PunctureLocation::Finite(p)));
    }
    if data.punctures().infinity {
        punctures.push(puncture_report(data, PunctureLocation::Infinity));
    }
    let verdict = simple && has && punctures.iter().all(|p| p.ok);
    GmnReport {
        branch_points_simple: simple,
        has_branch_point: has,
        turning_point_count: count,
        punctures,
        verdict,
        error,
    }
}

/// Valuation and leading coefficient of each coefficient `a_k` of σ
/// (ascending in ζ) in the local coordinate.
fn local_valuations(data: &SpectralData, loc: &PunctureLocation) -> Vec<Option<(i64, C64)>> {
    let k = data.rank();
    let mut out = vec![None; k + 1];
    out[k] = Some((0, C64::new(1.0, 0.0)));
    for (i, phi) in data.coefficients().iter().enumerate() {
        let v = match loc {
            PunctureLocation::Finite(p) => phi.valuation_at(*p),
            PunctureLocation::Infinity => phi.valuation_at_infinity(),
        };
        out[k - (i + 1)] = v.map(|(v, lc)| (v, -lc));
    }
    out
}

/// Lower convex hull of the Newton polygon points, as indices in ascending
/// `k`.
fn lower_hull(points: &[(i64, i64)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for (idx, &(x, y)) in points.iter().enumerate() {
        while hull.len() >= 2 {
            let (x1, y1) = points[hull[hull.len() - 2]];
            let (x2, y2) = points[hull[hull.len() - 1]];
            // drop the middle point unless it lies strictly below the chord
            let cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(idx);
    }
    hull
}

/// Leading terms `(exponent, coefficient)` of all K roots; identically zero
/// roots appear as `None`.
fn leading_terms(vals: &[Option<(i64, C64)>]) -> Vec<Option<(Exponent, C64)>> {
    let zero_roots = vals.iter().position(|v| v.is_some()).unwrap_or(0);
    let mut out: Vec<Option<(Exponent, C64)>> = vec![None; zero_roots];
    let pts: Vec<(i64, i64)> = vals
        .iter()
        .enumerate()
        .filter_map(|(k, v)| v.map(|(v, _)| (k as i64, v)))
        .collect();
    let hull = lower_hull(&pts);
    for w in hull.windows(2) {
        let (k1, v1) = pts[w[0]];
        let (k2, v2) = pts[w[1]];
        let slope = Ratio::new(v2 - v1, k2 - k1);
        // edge polynomial in λ over the points lying on this edge
        let mut edge = vec![C64::new(0.0, 0.0); (k2 - k1) as usize + 1];
        for &(k, v) in &pts {
            if k >= k1 && k <= k2 && Ratio::from_integer(v - v1) == slope * (k - k1) {
                edge[(k - k1) as usize] = vals[k as usize].unwrap().1;
            }
        }
        let lambdas = poly::roots(&edge).unwrap_or_default();
        for l in lambdas {
            out.push(Some((-slope, l)));
        }
    }
    out
}

fn puncture_report(data: &SpectralData, loc: PunctureLocation) -> PunctureReport {
    let vals = local_valuations(data, &loc);
    let terms = leading_terms(&vals);
    let mut pairs = Vec::new();
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            let delta = match (terms[i], terms[j]) {
                (None, None) => None,
                (Some((m, _)), None) | (None, Some((m, _))) => Some(m),
                (Some((mi, li)), Some((mj, lj))) => {
                    if mi != mj {
                        Some(mi.min(mj))
                    } else if (li - lj).norm() > 1e-6 * (1.0 + li.norm()) {
                        Some(mi)
                    } else {
                        None
                    }
                }
            };
            let pole_order = delta.map(|d| match loc {
                PunctureLocation::Finite(_) => -d * 2,
                PunctureLocation::Infinity => Ratio::from_integer(4) - d * 2,
            });
            let ok = matches!(pole_order, Some(o) if o >= Ratio::from_integer(2));
            pairs.push(PairPole {
                pair: (i, j),
                pole_order,
                ok,
            });
        }
    }
    let ok = pairs.iter().all(|p| p.ok);
    PunctureReport {
        location: loc,
        sheet_exponents: terms.iter().map(|t| t.map(|(m, _)| m)).collect(),
        pairs,
        ok,
    }
}
