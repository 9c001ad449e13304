//! Operational theories: system types, membership tests for states, effects
//! and transformations, unit effects, and the built-in quantum, classical and
//! gbit instances.

mod polytope;
mod process;
pub mod laws;
pub mod purification;
pub mod quantum;
pub mod random;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp;
use crate::tensor::{self, RMatrix, RVector};

pub use polytope::{PolytopeSystem, PolytopeTheory, SystemSpec, TheorySpec};
pub use process::{compose_par, compose_seq, ProcessRep};

/// Eigenvalues above `-PSD_TOL` count as nonnegative.
pub const PSD_TOL: f64 = 1e-9;
/// Slack allowed on normalization and on effect upper bounds.
pub const NORM_TOL: f64 = 1e-9;

pub const QUANTUM: &str = "quantum";
pub const CLASSICAL: &str = "classical";

/// A system type. Atomic types have no factors; composites list their atomic
/// factors in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemType {
    pub theory: String,
    pub label: String,
    /// Dimension of the real vector space spanned by the states.
    pub vec_dim: usize,
    /// Hilbert dimension (quantum), outcome count (classical), or `vec_dim`
    /// for polytopic systems.
    pub levels: usize,
    pub info_dim_hint: Option<usize>,
    pub factors: Vec<SystemType>,
}

impl SystemType {
    pub fn quantum(d: usize) -> SystemType {
        SystemType {
            theory: QUANTUM.into(),
            label: format!("q{d}"),
            vec_dim: d * d,
            levels: d,
            info_dim_hint: Some(d),
            factors: Vec::new(),
        }
    }

    pub fn classical(n: usize) -> SystemType {
        SystemType {
            theory: CLASSICAL.into(),
            label: format!("c{n}"),
            vec_dim: n,
            levels: n,
            info_dim_hint: Some(n),
            factors: Vec::new(),
        }
    }

    pub fn polytope(theory: &str, label: &str, vec_dim: usize) -> SystemType {
        SystemType {
            theory: theory.into(),
            label: label.into(),
            vec_dim,
            levels: vec_dim,
            info_dim_hint: None,
            factors: Vec::new(),
        }
    }

    /// Composite of the given types, flattened into atoms. A single atom is
    /// returned unchanged.
    pub fn composite(parts: &[SystemType]) -> Result<SystemType> {
        let atoms: Vec<SystemType> = parts.iter().flat_map(|p| p.atoms()).collect();
        let first = atoms
            .first()
            .ok_or_else(|| Error::Dimension("composite of zero systems".into()))?;
        if let Some(other) = atoms.iter().find(|a| a.theory != first.theory) {
            return Err(Error::TheoryMismatch {
                left: first.theory.clone(),
                right: other.theory.clone(),
            });
        }
        if atoms.len() == 1 {
            return Ok(atoms[0].clone());
        }
        let info_dim_hint = atoms
            .iter()
            .map(|a| a.info_dim_hint)
            .try_fold(1usize, |acc, h| h.map(|h| acc * h));
        Ok(SystemType {
            theory: first.theory.clone(),
            label: atoms.iter().map(|a| a.label.as_str()).collect::<Vec<_>>().join("*"),
            vec_dim: atoms.iter().map(|a| a.vec_dim).product(),
            levels: atoms.iter().map(|a| a.levels).product(),
            info_dim_hint,
            factors: atoms,
        })
    }

    pub fn is_atomic(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn atoms(&self) -> Vec<SystemType> {
        if self.factors.is_empty() {
            vec![self.clone()]
        } else {
            self.factors.clone()
        }
    }

    pub fn is_quantum(&self) -> bool {
        self.theory == QUANTUM
    }

    pub fn is_classical(&self) -> bool {
        self.theory == CLASSICAL
    }

    /// Hilbert dimensions of the atomic factors (quantum types only).
    pub fn hilbert_dims(&self) -> Vec<usize> {
        self.atoms().iter().map(|a| a.levels).collect()
    }
}

impl fmt::Display for SystemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

pub(crate) fn flatten(types: &[SystemType]) -> Vec<SystemType> {
    types.iter().flat_map(|t| t.atoms()).collect()
}

pub(crate) fn total_dim(types: &[SystemType]) -> usize {
    types.iter().map(|t| t.vec_dim).product()
}

/// An operational theory instance.
#[derive(Debug, Clone)]
pub enum Theory {
    Quantum,
    Classical,
    Polytope(Arc<PolytopeTheory>),
}

impl Theory {
    pub fn gbit() -> Theory {
        Theory::Polytope(Arc::new(PolytopeTheory::gbit()))
    }

    pub fn id(&self) -> &str {
        match self {
            Theory::Quantum => QUANTUM,
            Theory::Classical => CLASSICAL,
            Theory::Polytope(p) => &p.name,
        }
    }

    /// Resolves a built-in name (`quantum:d`, `classical:n`, `gbit`) to a
    /// theory and its default system type.
    pub fn builtin(name: &str) -> Result<(Theory, SystemType)> {
        let bad = || Error::Validation(format!("unknown theory `{name}`"));
        if name == "gbit" {
            let theory = Theory::gbit();
            let ty = theory.system("gbit")?;
            return Ok((theory, ty));
        }
        let (kind, size) = name.split_once(':').ok_or_else(bad)?;
        let size: usize = size.trim().parse().map_err(|_| bad())?;
        if size == 0 {
            return Err(bad());
        }
        match kind {
            "quantum" => Ok((Theory::Quantum, SystemType::quantum(size))),
            "classical" => Ok((Theory::Classical, SystemType::classical(size))),
            _ => Err(bad()),
        }
    }

    /// Parses a system label of this theory, e.g. `q2`, `c3`, `q2*q2`, `gbit`.
    pub fn system(&self, label: &str) -> Result<SystemType> {
        let parts: Vec<&str> = label.split('*').map(str::trim).collect();
        if parts.len() > 1 {
            let atoms = parts
                .iter()
                .map(|p| self.system(p))
                .collect::<Result<Vec<_>>>()?;
            return SystemType::composite(&atoms);
        }
        let unknown = || Error::Validation(format!("unknown system `{label}` in theory `{}`", self.id()));
        match self {
            Theory::Quantum => parse_sized(label, 'q').map(SystemType::quantum).ok_or_else(unknown),
            Theory::Classical => parse_sized(label, 'c').map(SystemType::classical).ok_or_else(unknown),
            Theory::Polytope(p) => p.system(label).map(|s| s.system_type(&p.name)).ok_or_else(unknown),
        }
    }

    fn check_type(&self, ty: &SystemType) -> Result<()> {
        if ty.theory != self.id() {
            return Err(Error::TheoryMismatch {
                left: self.id().to_string(),
                right: ty.theory.clone(),
            });
        }
        Ok(())
    }

    fn polytope_atom(&self, ty: &SystemType) -> Result<&PolytopeSystem> {
        match self {
            Theory::Polytope(p) => {
                if !ty.is_atomic() {
                    return Err(Error::Unsupported(format!(
                        "composites of polytopic systems ({})",
                        ty.label
                    )));
                }
                p.system(&ty.label)
                    .ok_or_else(|| Error::Validation(format!("unknown system `{}`", ty.label)))
            }
            _ => Err(Error::Unsupported("not a polytopic theory".into())),
        }
    }

    /// Unit (deterministic) effect as a covector.
    pub fn unit_vector(&self, ty: &SystemType) -> Result<RVector> {
        self.check_type(ty)?;
        match self {
            Theory::Quantum => {
                let mut v = RVector::zeros(ty.vec_dim);
                v[0] = (ty.levels as f64).sqrt();
                Ok(v)
            }
            Theory::Classical => Ok(RVector::from_element(ty.vec_dim, 1.0)),
            Theory::Polytope(_) => Ok(self.polytope_atom(ty)?.unit_effect.clone()),
        }
    }

    pub fn unit_effect(&self, ty: &SystemType) -> Result<ProcessRep> {
        let u = self.unit_vector(ty)?;
        ProcessRep::effect(tensor::row(&u), ty.clone())
    }

    /// Unit effect on a list of systems (the marginalization map).
    pub fn unit_effect_on(&self, types: &[SystemType]) -> Result<ProcessRep> {
        let mut row = RMatrix::identity(1, 1);
        for ty in types {
            row = tensor::rkron(&row, &tensor::row(&self.unit_vector(ty)?));
        }
        ProcessRep::new(row, types.to_vec(), Vec::new())
    }

    /// Extreme states of a polytopic (or classical) system.
    pub fn extreme_states(&self, ty: &SystemType) -> Result<Option<Vec<RVector>>> {
        self.check_type(ty)?;
        match self {
            Theory::Quantum => Ok(None),
            Theory::Classical => Ok(Some(
                (0..ty.vec_dim)
                    .map(|i| {
                        let mut v = RVector::zeros(ty.vec_dim);
                        v[i] = 1.0;
                        v
                    })
                    .collect(),
            )),
            Theory::Polytope(_) => Ok(Some(self.polytope_atom(ty)?.extreme_states.clone())),
        }
    }

    /// Generators of the effect cone of a polytopic (or classical) system.
    pub fn effect_generators(&self, ty: &SystemType) -> Result<Option<Vec<RVector>>> {
        self.check_type(ty)?;
        match self {
            Theory::Quantum => Ok(None),
            Theory::Classical => self.extreme_states(ty),
            Theory::Polytope(_) => Ok(Some(self.polytope_atom(ty)?.effect_generators.clone())),
        }
    }

    pub fn is_state(&self, v: &RVector, ty: &SystemType) -> bool {
        self.state_violation(v, ty).is_none()
    }

    /// Explains why `v` is not a state of `ty`, or `None` if it is one.
    pub fn state_violation(&self, v: &RVector, ty: &SystemType) -> Option<String> {
        if self.check_type(ty).is_err() || v.len() != ty.vec_dim {
            return Some(format!("vector of length {} is not a {} state", v.len(), ty.label));
        }
        let norm = match self.unit_vector(ty) {
            Ok(u) => u.dot(v),
            Err(e) => return Some(e.to_string()),
        };
        if (norm - 1.0).abs() > NORM_TOL {
            return Some(format!("unit effect gives {norm}, expected 1"));
        }
        match self {
            Theory::Quantum => {
                let rho = quantum::density(v, ty).ok()?;
                let min = tensor::min_eigenvalue(&rho);
                (min < -PSD_TOL).then(|| format!("minimum eigenvalue {min:.3e} is negative"))
            }
            Theory::Classical => {
                let min = v.min();
                (min < -PSD_TOL).then(|| format!("negative probability {min:.3e}"))
            }
            Theory::Polytope(_) => {
                let extremes = self.extreme_states(ty).ok().flatten().unwrap_or_default();
                match lp::in_cone(&extremes, v) {
                    Ok(Some(_)) => None,
                    Ok(None) => Some("outside the convex hull of the extreme states".into()),
                    Err(e) => Some(e.to_string()),
                }
            }
        }
    }

    /// Is the covector `f` (given as a column vector) an effect on `ty`?
    pub fn is_effect(&self, f: &RVector, ty: &SystemType) -> bool {
        if self.check_type(ty).is_err() || f.len() != ty.vec_dim {
            return false;
        }
        match self {
            Theory::Quantum => match quantum::density(f, ty) {
                Ok(e) => {
                    let (vals, _) = tensor::hermitian_eigen(&e);
                    vals.iter().all(|&x| (-PSD_TOL..=1.0 + NORM_TOL).contains(&x))
                }
                Err(_) => false,
            },
            Theory::Classical => f.iter().all(|&x| (-PSD_TOL..=1.0 + NORM_TOL).contains(&x)),
            Theory::Polytope(_) => {
                let (Ok(Some(gens)), Ok(u)) = (self.effect_generators(ty), self.unit_vector(ty)) else {
                    return false;
                };
                let complement = &u - f;
                matches!(lp::in_cone(&gens, f), Ok(Some(_)))
                    && matches!(lp::in_cone(&gens, &complement), Ok(Some(_)))
            }
        }
    }

    /// Membership of a general process (state, effect, transformation).
    pub fn is_transformation(&self, p: &ProcessRep) -> bool {
        let all = p.inputs().iter().chain(p.outputs());
        if all.clone().any(|t| self.check_type(t).is_err()) {
            return false;
        }
        match self {
            Theory::Quantum => quantum::is_valid_quantum_process(p),
            Theory::Classical => {
                let m = p.matrix();
                if m.iter().any(|&x| x < -PSD_TOL) {
                    return false;
                }
                m.column_iter().all(|col| col.sum() <= 1.0 + NORM_TOL)
            }
            Theory::Polytope(_) => self.polytope_process_ok(p).unwrap_or(false),
        }
    }

    fn polytope_process_ok(&self, p: &ProcessRep) -> Result<bool> {
        if p.inputs().len() > 1 || p.outputs().len() > 1 {
            return Err(Error::Unsupported("composite polytopic processes".into()));
        }
        let inputs: Vec<RVector> = match p.inputs().first() {
            Some(ty) => self.extreme_states(ty)?.unwrap_or_default(),
            None => vec![RVector::from_element(1, 1.0)],
        };
        for s in inputs {
            let out = p.matrix() * s;
            match p.outputs().first() {
                Some(ty) => {
                    let u = self.unit_vector(ty)?;
                    if u.dot(&out) > 1.0 + NORM_TOL {
                        return Ok(false);
                    }
                    let extremes = self.extreme_states(ty)?.unwrap_or_default();
                    if lp::in_cone(&extremes, &out)?.is_none() {
                        return Ok(false);
                    }
                }
                None => {
                    if out[0] < -PSD_TOL || out[0] > 1.0 + NORM_TOL {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// `u ∘ p = u` within `tol`.
    pub fn is_causal_within(&self, p: &ProcessRep, tol: f64) -> Result<bool> {
        Ok(self.causality_residual(p)? <= tol)
    }

    pub fn is_causal(&self, p: &ProcessRep) -> Result<bool> {
        self.is_causal_within(p, tensor::MATRIX_TOL)
    }

    /// ‖u_out ∘ p − u_in‖.
    pub fn causality_residual(&self, p: &ProcessRep) -> Result<f64> {
        let u_out = self.unit_effect_on(p.outputs())?;
        let u_in = self.unit_effect_on(p.inputs())?;
        Ok(tensor::rdiff(&(u_out.matrix() * p.matrix()), u_in.matrix()))
    }

    pub fn max_mixed(&self, ty: &SystemType) -> Result<ProcessRep> {
        self.check_type(ty)?;
        match self {
            Theory::Quantum => {
                let d = ty.levels;
                let mu = tensor::CMatrix::identity(d, d) / tensor::c(d as f64, 0.0);
                quantum::state(&mu, ty)
            }
            Theory::Classical => {
                let n = ty.vec_dim;
                ProcessRep::state(RVector::from_element(n, 1.0 / n as f64), ty.clone())
            }
            Theory::Polytope(p) => Err(Error::Unsupported(format!(
                "maximally mixed state of polytopic theory `{}`",
                p.name
            ))),
        }
    }
}

fn parse_sized(label: &str, prefix: char) -> Option<usize> {
    let rest = label.strip_prefix(prefix)?;
    let n: usize = rest.parse().ok()?;
    (n >= 1).then_some(n)
}
