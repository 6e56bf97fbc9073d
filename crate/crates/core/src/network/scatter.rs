//! Scattering at ordered collisions.

use std::ops::Range;

use log::warn;

use super::{Collision, NetworkError, NetworkState};
use crate::curve::sheets_anywhere;
use crate::tracer::{Seed, WallSource};

/// One composite wall to emit at a collision, from the consecutive
/// sub-chain `members` of the ordered participants.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPlan {
    pub members: Range<usize>,
    pub sheets: (usize, usize),
    pub mass: f64,
    /// `(−1)^{s+1}` for a sub-chain of length `s`.
    pub sign: i32,
}

/// A seed for a scattered wall together with its factor data.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSeed {
    pub seed: Seed,
    pub sign: i32,
    /// Parent tree ids in chain order.
    pub parents: Vec<usize>,
}

pub fn scatter_plan(c: &Collision) -> Result<Vec<ScatterPlan>, NetworkError> {
    if c.cyclic {
        return Err(NetworkError::CyclicCollision(c.id));
    }
    let l = c.participants.len();
    let mut out = Vec::new();
    for s in 2..=l {
        for start in 0..=l - s {
            let members = start..start + s;
            let first = &c.participants[start];
            let last = &c.participants[start + s - 1];
            out.push(ScatterPlan {
                sheets: (first.sheets.0, last.sheets.1),
                mass: c.participants[members.clone()].iter().map(|p| p.mass).sum(),
                sign: if s % 2 == 0 { -1 } else { 1 },
                members,
            });
        }
    }
    Ok(out)
}

impl NetworkState {
    /// Marks the collision scattered and returns the seeds of its new walls.
    pub fn scatter(&mut self, id: usize) -> Result<Vec<ScatterSeed>, NetworkError> {
        let c = self.collisions.get(id).ok_or(NetworkError::UnknownCollision(id))?;
        if c.scattered {
            return Err(NetworkError::AlreadyScattered(id));
        }
        let plans = scatter_plan(c)?;
        let point = c.point;
        let values = sheets_anywhere(&self.data, point, &self.config.trace.curve)?;
        let seeds = plans
            .into_iter()
            .map(|plan| {
                let (a, b) = plan.sheets;
                if (values[a] - values[b]).norm() <= self.config.trace.curve.sheet_match_tol {
                    warn!("collision {id}: composite pair {:?} has coincident sheets", plan.sheets);
                }
                ScatterSeed {
                    seed: Seed {
                        position: point,
                        values: values.clone(),
                        pair: plan.sheets,
                        mass: plan.mass,
                        source: WallSource::ScatteredAt { collision: id },
                    },
                    sign: plan.sign,
                    parents: c.participants[plan.members].iter().map(|p| p.tree).collect(),
                }
            })
            .collect();
        self.collisions[id].scattered = true;
        Ok(seeds)
    }
}
