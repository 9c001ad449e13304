use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::RVector;

use super::SystemType;

/// On-disk theory description.
///
/// ```json
/// { "name": "gbit", "kind": "polytope",
///   "systems": [ { "label": "gbit", "vec_dim": 3,
///                  "extreme_states": [[1,1,1], ...],
///                  "effect_generators": [[0.5,-0.5,0], ...],
///                  "unit_effect": [1,0,0] } ] }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheorySpec {
    pub name: String,
    pub kind: String,
    pub systems: Vec<SystemSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub label: String,
    pub vec_dim: usize,
    pub extreme_states: Vec<Vec<f64>>,
    pub effect_generators: Vec<Vec<f64>>,
    pub unit_effect: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PolytopeSystem {
    pub label: String,
    pub vec_dim: usize,
    pub extreme_states: Vec<RVector>,
    pub effect_generators: Vec<RVector>,
    pub unit_effect: RVector,
}

impl PolytopeSystem {
    pub fn system_type(&self, theory: &str) -> SystemType {
        SystemType::polytope(theory, &self.label, self.vec_dim)
    }
}

/// A theory whose systems have polytopic state spaces.
#[derive(Debug, Clone)]
pub struct PolytopeTheory {
    pub name: String,
    pub systems: Vec<PolytopeSystem>,
}

const SPEC_TOL: f64 = 1e-9;

impl PolytopeTheory {
    pub fn from_spec(spec: &TheorySpec) -> Result<PolytopeTheory> {
        if spec.kind != "polytope" {
            return Err(Error::Spec(format!("unsupported kind `{}`", spec.kind)));
        }
        if spec.name == super::QUANTUM || spec.name == super::CLASSICAL {
            return Err(Error::Spec(format!("theory name `{}` is reserved", spec.name)));
        }
        if spec.systems.is_empty() {
            return Err(Error::Spec("no systems".into()));
        }
        let mut systems = Vec::with_capacity(spec.systems.len());
        for s in &spec.systems {
            let vector = |v: &Vec<f64>, what: &str| -> Result<RVector> {
                if v.len() != s.vec_dim {
                    return Err(Error::Spec(format!(
                        "{what} of system `{}` has length {}, expected {}",
                        s.label,
                        v.len(),
                        s.vec_dim
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Spec(format!("{what} of system `{}` is not finite", s.label)));
                }
                Ok(RVector::from_vec(v.clone()))
            };
            if s.vec_dim == 0 || s.label.is_empty() || s.label.contains('*') {
                return Err(Error::Spec(format!("bad system `{}`", s.label)));
            }
            let unit_effect = vector(&s.unit_effect, "unit effect")?;
            let extreme_states = s
                .extreme_states
                .iter()
                .map(|v| vector(v, "extreme state"))
                .collect::<Result<Vec<_>>>()?;
            let effect_generators = s
                .effect_generators
                .iter()
                .map(|v| vector(v, "effect generator"))
                .collect::<Result<Vec<_>>>()?;
            if extreme_states.is_empty() || effect_generators.is_empty() {
                return Err(Error::Spec(format!("system `{}` needs states and effects", s.label)));
            }
            for (i, v) in extreme_states.iter().enumerate() {
                let norm = unit_effect.dot(v);
                if (norm - 1.0).abs() > SPEC_TOL {
                    return Err(Error::Spec(format!(
                        "extreme state {i} of `{}` is normalized to {norm}",
                        s.label
                    )));
                }
                for (j, g) in effect_generators.iter().enumerate() {
                    let p = g.dot(v);
                    if !(-SPEC_TOL..=1.0 + SPEC_TOL).contains(&p) {
                        return Err(Error::Spec(format!(
                            "effect generator {j} gives probability {p} on extreme state {i} of `{}`",
                            s.label
                        )));
                    }
                }
            }
            systems.push(PolytopeSystem {
                label: s.label.clone(),
                vec_dim: s.vec_dim,
                extreme_states,
                effect_generators,
                unit_effect,
            });
        }
        Ok(PolytopeTheory { name: spec.name.clone(), systems })
    }

    pub fn from_json(text: &str) -> Result<PolytopeTheory> {
        let spec: TheorySpec = serde_json::from_str(text)?;
        PolytopeTheory::from_spec(&spec)
    }

    pub fn to_spec(&self) -> TheorySpec {
        TheorySpec {
            name: self.name.clone(),
            kind: "polytope".into(),
            systems: self
                .systems
                .iter()
                .map(|s| SystemSpec {
                    label: s.label.clone(),
                    vec_dim: s.vec_dim,
                    extreme_states: s.extreme_states.iter().map(|v| v.iter().copied().collect()).collect(),
                    effect_generators: s.effect_generators.iter().map(|v| v.iter().copied().collect()).collect(),
                    unit_effect: s.unit_effect.iter().copied().collect(),
                })
                .collect(),
        }
    }

    pub fn system(&self, label: &str) -> Option<&PolytopeSystem> {
        self.systems.iter().find(|s| s.label == label)
    }

    /// Square bit: states `(1, x, y)` with `|x|, |y| ≤ 1`, unit effect the
    /// first coordinate, effect cone generated by `(1 ± x)/2` and `(1 ± y)/2`.
    pub fn gbit() -> PolytopeTheory {
        let v = |a: f64, b: f64, c: f64| RVector::from_vec(vec![a, b, c]);
        PolytopeTheory {
            name: "gbit".into(),
            systems: vec![PolytopeSystem {
                label: "gbit".into(),
                vec_dim: 3,
                extreme_states: vec![
                    v(1.0, 1.0, 1.0),
                    v(1.0, 1.0, -1.0),
                    v(1.0, -1.0, -1.0),
                    v(1.0, -1.0, 1.0),
                ],
                effect_generators: vec![
                    v(0.5, 0.5, 0.0),
                    v(0.5, -0.5, 0.0),
                    v(0.5, 0.0, 0.5),
                    v(0.5, 0.0, -0.5),
                ],
                unit_effect: v(1.0, 0.0, 0.0),
            }],
        }
    }
}
