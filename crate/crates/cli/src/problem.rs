//! Problem files: JSON with exact numbers (JSON numbers or `"p/q"` strings).

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use evp_core::boundedness::Candidate;
use evp_core::evp::{EvpProblem, FiniteMetricSpace, Mode, SetValuedMapTable};
use evp_core::geometry::{ConeGen, Piece, Polytope, VPolyhedralUnion};
use evp_core::rational::{format_rational, parse_rational, Rat, Vector};
use evp_core::scalarization::SeparationFunctional;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;

/// An exact number read from a JSON number or string.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "Value")]
pub struct Num(pub Rat);

impl TryFrom<Value> for Num {
    type Error = String;

    fn try_from(v: Value) -> Result<Self, Self::Error> {
        let text = match &v {
            Value::Number(n) => n.to_string(),
            Value::String(s) => s.clone(),
            other => return Err(format!("expected a number or \"p/q\" string, found {other}")),
        };
        parse_rational(&text).map(Num).map_err(|e| e.to_string())
    }
}

impl Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

fn vectors(v: &[Vec<Num>]) -> Vec<Vector> {
    v.iter().map(|row| row.iter().map(|n| n.0.clone()).collect()).collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeEntry {
    pub generators: Vec<Vec<Num>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HEntry {
    pub vertices: Vec<Vec<Num>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceEntry {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<Num>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ModeEntry {
    Plain,
    Scaled { epsilon: Num, lambda: Num },
    Efficiency { gamma: Num, feasible: Option<Vec<String>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceEntry {
    pub vertices: Vec<Vec<Num>>,
    #[serde(default)]
    pub rays: Vec<Vec<Num>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateEntry {
    pub y0: Vec<Num>,
    pub epsilon: Num,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangesEntry {
    pub pieces: Vec<PieceEntry>,
    /// `(y₀, ε)` pairs tried for H-lower boundedness.
    #[serde(default)]
    pub candidates: Vec<CandidateEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    pub cone: ConeEntry,
    #[serde(rename = "H")]
    pub h: HEntry,
    pub space: Option<SpaceEntry>,
    pub map: Option<BTreeMap<String, Vec<Vec<Num>>>>,
    pub x0: Option<String>,
    pub epsilon: Option<Num>,
    pub mode: Option<ModeEntry>,
    pub ranges: Option<RangesEntry>,
    pub tolerance: Option<Num>,
    pub t_max: Option<Num>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| CliError::input(format!("problem file: {e}")))?;
        file.check_dimensions()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn check_dimensions(&self) -> Result<(), CliError> {
        let n = self.dimension;
        if n == 0 {
            return Err(CliError::input("\"dimension\" must be at least 1"));
        }
        let check = |what: &str, vs: &[Vec<Num>]| -> Result<(), CliError> {
            match vs.iter().position(|v| v.len() != n) {
                Some(i) => Err(CliError::input(format!(
                    "{what}[{i}] has {} coordinates, \"dimension\" is {n}",
                    vs[i].len()
                ))),
                None => Ok(()),
            }
        };
        check("cone.generators", &self.cone.generators)?;
        check("H.vertices", &self.h.vertices)?;
        if let Some(map) = &self.map {
            for (label, values) in map {
                check(&format!("map.{label}"), values)?;
            }
        }
        if let Some(r) = &self.ranges {
            for (i, p) in r.pieces.iter().enumerate() {
                check(&format!("ranges.pieces[{i}].vertices"), &p.vertices)?;
                check(&format!("ranges.pieces[{i}].rays"), &p.rays)?;
            }
            for (i, c) in r.candidates.iter().enumerate() {
                if c.y0.len() != n {
                    return Err(CliError::input(format!(
                        "ranges.candidates[{i}].y0 has {} coordinates, \"dimension\" is {n}",
                        c.y0.len()
                    )));
                }
            }
        }
        if let Some(space) = &self.space {
            let m = space.labels.len();
            if space.dist.len() != m || space.dist.iter().any(|r| r.len() != m) {
                return Err(CliError::input(format!("space.dist must be a {m}×{m} matrix")));
            }
        }
        Ok(())
    }

    pub fn cone(&self) -> Result<ConeGen, CliError> {
        ConeGen::new(self.dimension, vectors(&self.cone.generators))
            .map_err(|e| CliError::input(format!("cone: {e}")))
    }

    pub fn polytope(&self) -> Result<Polytope, CliError> {
        Polytope::new(vectors(&self.h.vertices)).map_err(|e| CliError::input(format!("H: {e}")))
    }

    pub fn functional(&self) -> Result<SeparationFunctional, CliError> {
        let phi = SeparationFunctional::new(self.polytope()?, self.cone()?)?;
        let phi = match &self.t_max {
            Some(t) => phi.with_t_max(t.0.clone())?,
            None => phi,
        };
        Ok(match &self.tolerance {
            Some(t) => phi.with_tolerance(t.0.clone())?,
            None => phi,
        })
    }

    pub fn ranges(&self) -> Result<(VPolyhedralUnion, Vec<Candidate>), CliError> {
        let r = self
            .ranges
            .as_ref()
            .ok_or_else(|| CliError::input("diagnose needs a \"ranges\" block"))?;
        let pieces = r
            .pieces
            .iter()
            .map(|p| Piece { vertices: vectors(&p.vertices), rays: vectors(&p.rays) })
            .collect();
        let union = VPolyhedralUnion::new(pieces).map_err(|e| CliError::input(format!("ranges: {e}")))?;
        let mut candidates: Vec<Candidate> = r
            .candidates
            .iter()
            .map(|c| Candidate { y0: c.y0.iter().map(|n| n.0.clone()).collect(), epsilon: c.epsilon.0.clone() })
            .collect();
        if candidates.is_empty() {
            let epsilon = self.epsilon.as_ref().map(|e| e.0.clone()).unwrap_or_else(|| Rat::from_integer(1.into()));
            candidates.push(Candidate { y0: vec![Rat::zero(); self.dimension], epsilon });
        }
        Ok((union, candidates))
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        Ok(match &self.mode {
            None | Some(ModeEntry::Plain) => Mode::Plain,
            Some(ModeEntry::Scaled { epsilon, lambda }) => {
                Mode::Scaled { epsilon: epsilon.0.clone(), lambda: lambda.0.clone() }
            }
            Some(ModeEntry::Efficiency { gamma, .. }) => Mode::Efficiency { gamma: gamma.0.clone() },
        })
    }

    pub fn evp(&self) -> Result<EvpProblem, CliError> {
        let missing = |key: &str| CliError::input(format!("solve/verify need a \"{key}\" entry"));
        let space = self.space.as_ref().ok_or_else(|| missing("space"))?;
        let map = self.map.as_ref().ok_or_else(|| missing("map"))?;
        let x0 = self.x0.as_ref().ok_or_else(|| missing("x0"))?;
        let epsilon = self.epsilon.as_ref().ok_or_else(|| missing("epsilon"))?;

        let space = FiniteMetricSpace::new(space.labels.clone(), vectors(&space.dist))?;
        let entries: HashMap<String, Vec<Vector>> =
            map.iter().map(|(l, vs)| (l.clone(), vectors(vs))).collect();
        let table = SetValuedMapTable::new(&space, entries, self.dimension)?;
        let problem = EvpProblem::new(
            space,
            table,
            self.cone()?,
            self.polytope()?,
            x0,
            epsilon.0.clone(),
            self.mode()?,
        )?;
        Ok(match &self.mode {
            Some(ModeEntry::Efficiency { feasible: Some(f), .. }) => problem.with_feasible_set(f)?,
            _ => problem,
        })
    }
}

fn rat_json(r: &Rat) -> Value {
    Value::String(format_rational(r))
}

fn vec_json(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(rat_json).collect())
}

pub fn mode_json(mode: &Mode) -> Value {
    match mode {
        Mode::Plain => json!("plain"),
        Mode::Scaled { epsilon, lambda } => {
            json!({"scaled": {"epsilon": rat_json(epsilon), "lambda": rat_json(lambda)}})
        }
        Mode::Efficiency { gamma } => json!({"efficiency": {"gamma": rat_json(gamma)}}),
    }
}

/// Serializes a problem back into the file format.
pub fn problem_json(p: &EvpProblem) -> Value {
    let space = p.space();
    let labels = space.labels();
    let dist: Vec<Value> = space
        .points()
        .map(|a| Value::Array(space.points().map(|b| rat_json(space.dist(a, b))).collect()))
        .collect();
    let map: serde_json::Map<String, Value> = space
        .points()
        .map(|x| {
            let values = p.map().values(x).iter().map(|v| vec_json(v)).collect();
            (space.label(x).to_string(), Value::Array(values))
        })
        .collect();
    let mode = match p.mode() {
        Mode::Efficiency { gamma } => {
            let feasible: Vec<Value> = p.feasible_points().map(|x| json!(p.label(x))).collect();
            json!({"efficiency": {"gamma": rat_json(gamma), "feasible": feasible}})
        }
        other => mode_json(other),
    };
    json!({
        "dimension": p.map().dim(),
        "cone": {"generators": p.k().generators().iter().map(|g| vec_json(g)).collect::<Vec<_>>()},
        "H": {"vertices": p.h().vertices().iter().map(|v| vec_json(v)).collect::<Vec<_>>()},
        "space": {"labels": labels, "dist": dist},
        "map": map,
        "x0": p.label(p.x0()),
        "epsilon": rat_json(p.epsilon()),
        "mode": mode,
    })
}
