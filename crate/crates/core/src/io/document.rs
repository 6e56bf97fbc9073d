//! The network document and its canonical JSON form.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::IoError;
use crate::network::{Collision, NetworkState, ObstructionReport};
use crate::novikov::{Coeff, CoeffRepr, LoopSpec, NovikovMatrix, WallFactorAssignment};
use crate::poly::C64;
use crate::tracer::{Termination, WallSource};

pub const SCHEMA_VERSION: &str = "1";

pub type Point = [f64; 2];

fn pt(z: C64) -> Point {
    [z.re, z.im]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TurningPointRecord {
    pub id: usize,
    pub position: Point,
    pub pair: [usize; 2],
    pub simple: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PunctureRecord {
    pub infinity: bool,
    pub finite: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WallRecord {
    pub id: usize,
    /// Sorted sheet slots at the first point.
    pub sheets: [usize; 2],
    pub points: Vec<Point>,
    pub mass_profile: Vec<f64>,
    pub source: WallSource,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TreeRecord {
    pub id: usize,
    pub root_edge: usize,
    /// Walls of all edges, root edge first.
    pub edges: Vec<usize>,
    pub parents: Vec<usize>,
    pub mass: f64,
    pub sign: i32,
    pub closed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<CoeffRepr>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ParticipantRecord {
    pub tree: usize,
    pub wall: usize,
    pub segment: usize,
    pub mass: f64,
    pub sheets: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CollisionRecord {
    pub id: usize,
    pub point: Point,
    pub participants: Vec<ParticipantRecord>,
    pub mass: f64,
    pub cyclic: bool,
    pub scattered: bool,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MonodromyRecord {
    /// Loop descriptor as accepted on the command line.
    #[serde(rename = "loop")]
    pub loop_spec: String,
    pub basepoint: Point,
    pub truncation: f64,
    /// `matrix[i][j]` lists `[exponent, coefficient]` terms.
    pub matrix: Vec<Vec<Vec<(f64, CoeffRepr)>>>,
}

impl MonodromyRecord {
    pub fn new<K: Coeff>(spec: &LoopSpec, basepoint: C64, m: &NovikovMatrix<K>) -> Self {
        let k = m.size();
        let matrix = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| m.get(i, j).terms().iter().map(|(e, c)| (*e, c.repr())).collect())
                    .collect()
            })
            .collect();
        Self {
            loop_spec: spec.to_string(),
            basepoint: pt(basepoint),
            truncation: m.cutoff(),
            matrix,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NetworkDocument {
    pub schema_version: String,
    pub rank: usize,
    pub theta: f64,
    pub mass_cutoff: f64,
    pub domain_radius: f64,
    pub turning_points: Vec<TurningPointRecord>,
    pub punctures: PunctureRecord,
    pub walls: Vec<WallRecord>,
    pub trees: Vec<TreeRecord>,
    pub collisions: Vec<CollisionRecord>,
    pub obstructions: ObstructionReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monodromies: Option<Vec<MonodromyRecord>>,
}

fn collision_record(c: &Collision) -> CollisionRecord {
    CollisionRecord {
        id: c.id,
        point: pt(c.point),
        participants: c
            .participants
            .iter()
            .map(|p| ParticipantRecord {
                tree: p.tree,
                wall: p.wall,
                segment: p.segment,
                mass: p.mass,
                sheets: [p.sheets.0, p.sheets.1],
            })
            .collect(),
        mass: c.mass,
        cyclic: c.cyclic,
        scattered: c.scattered,
        children: c.children.clone(),
    }
}

impl NetworkDocument {
    pub fn from_state<K: Coeff>(
        state: &NetworkState,
        factors: Option<&WallFactorAssignment<K>>,
        monodromies: Option<Vec<MonodromyRecord>>,
    ) -> Self {
        let p = state.data.punctures();
        Self {
            schema_version: SCHEMA_VERSION.into(),
            rank: state.data.rank(),
            theta: state.theta,
            mass_cutoff: state.cutoff,
            domain_radius: state.data.domain_radius(),
            turning_points: state
                .turning_points
                .iter()
                .map(|t| TurningPointRecord {
                    id: t.id,
                    position: pt(t.position),
                    pair: [t.pair.0, t.pair.1],
                    simple: t.simple,
                })
                .collect(),
            punctures: PunctureRecord {
                infinity: p.infinity,
                finite: p.finite.iter().map(|&z| pt(z)).collect(),
            },
            walls: state
                .walls
                .iter()
                .map(|w| WallRecord {
                    id: w.id,
                    sheets: [w.sheets.0, w.sheets.1],
                    points: w.points.iter().map(|&z| pt(z)).collect(),
                    mass_profile: w.mass_profile.clone(),
                    source: w.source,
                    termination: w.termination,
                })
                .collect(),
            trees: state
                .trees
                .iter()
                .map(|t| TreeRecord {
                    id: t.id,
                    root_edge: t.root_edge,
                    edges: t.edges.iter().map(|e| e.wall).collect(),
                    parents: t.parents.clone(),
                    mass: t.mass,
                    sign: t.sign,
                    closed: t.closed,
                    factor: factors.map(|f| f.get(t.id).repr()),
                })
                .collect(),
            collisions: state.collisions.iter().map(collision_record).collect(),
            obstructions: state.obstructions.clone(),
            monodromies,
        }
    }

    /// Checks that ids are ascending from zero and every reference resolves.
    pub fn check_references(&self) -> Result<(), IoError> {
        let bad = |path: String, message: &str| {
            Err(IoError::Validation {
                path,
                message: message.into(),
            })
        };
        let (nt, nw, nr, nc) = (
            self.turning_points.len(),
            self.walls.len(),
            self.trees.len(),
            self.collisions.len(),
        );
        for (i, t) in self.turning_points.iter().enumerate() {
            if t.id != i || t.pair.iter().any(|&s| s >= self.rank) {
                return bad(format!("turningPoints[{i}]"), "id out of order or sheet out of range");
            }
        }
        for (i, w) in self.walls.iter().enumerate() {
            if w.id != i || w.sheets.iter().any(|&s| s >= self.rank) {
                return bad(format!("walls[{i}]"), "id out of order or sheet out of range");
            }
            if w.points.len() != w.mass_profile.len() {
                return bad(format!("walls[{i}].massProfile"), "length differs from points");
            }
            let ok = match w.source {
                WallSource::TurningPointRay { turning_point, .. } => turning_point < nt,
                WallSource::ScatteredAt { collision } => collision < nc,
            } && match w.termination {
                Termination::HitTurningPoint { turning_point } => turning_point < nt,
                _ => true,
            };
            if !ok {
                return bad(format!("walls[{i}]"), "dangling reference");
            }
        }
        for (i, t) in self.trees.iter().enumerate() {
            if t.id != i || t.edges.iter().chain([&t.root_edge]).any(|&w| w >= nw) || t.parents.iter().any(|&p| p >= nr)
            {
                return bad(format!("trees[{i}]"), "id out of order or dangling reference");
            }
        }
        for (i, c) in self.collisions.iter().enumerate() {
            let ok = c.id == i
                && c.children.iter().all(|&w| w < nw)
                && c.participants
                    .iter()
                    .all(|p| p.tree < nr && p.wall < nw && p.segment + 1 < self.walls[p.wall].points.len());
            if !ok {
                return bad(format!("collisions[{i}]"), "id out of order or dangling reference");
            }
        }
        for (i, t) in self.obstructions.closed_trees.iter().enumerate() {
            if t.tree >= nr || t.turning_points.iter().any(|&p| p >= nt) {
                return bad(format!("obstructions.closedTrees[{i}]"), "dangling reference");
            }
        }
        for (i, c) in self.obstructions.cyclic_collisions.iter().enumerate() {
            if c.collision >= nc {
                return bad(format!("obstructions.cyclicCollisions[{i}]"), "dangling reference");
            }
        }
        Ok(())
    }

    /// Canonical JSON: sorted keys, floats with 17 significant digits.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("documents serialize");
        canonical_json(&value)
    }
}

/// Parses a document and checks its references.
pub fn parse_network(text: &str) -> Result<NetworkDocument, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: NetworkDocument = serde_path_to_error::deserialize(de).map_err(|e| IoError::Parse {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;
    doc.check_references()?;
    Ok(doc)
}

pub fn emit_network<K: Coeff>(
    state: &NetworkState,
    factors: Option<&WallFactorAssignment<K>>,
    monodromies: Option<Vec<MonodromyRecord>>,
) -> String {
    NetworkDocument::from_state(state, factors, monodromies).to_canonical_json()
}

fn write_float(out: &mut String, x: f64) {
    if x == 0.0 {
        // one spelling for both zeros
        out.push_str("0.0000000000000000e0");
    } else if x.is_finite() {
        write!(out, "{x:.16e}").unwrap();
    } else {
        out.push_str("null");
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.push_str(&" ".repeat(n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                write_float(out, n.as_f64().unwrap());
            } else {
                write!(out, "{n}").unwrap();
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            // short scalar arrays stay on one line
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, x, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            if sorted.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in sorted.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                write_value(out, x, indent + 2);
                out.push_str(if i + 1 < sorted.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Serializes any JSON value canonically.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567, f64::MIN_POSITIVE] {
            let mut s = String::new();
            write_float(&mut s, x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn keys_are_sorted() {
        let v: Value = serde_json::from_str(r#"{"b": 1, "a": {"d": 2.5, "c": [1, 2]}}"#).unwrap();
        let s = canonical_json(&v);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.find("\"c\"").unwrap() < s.find("\"d\"").unwrap());
        assert!(s.contains("2.5000000000000000e0"));
    }
}
