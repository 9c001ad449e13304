//! Decoherence candidates: dephasing, the four defining checks, sub-theory
//! construction, triviality, and the post-classical and post-quantum
//! counterexamples.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::convex::{self, Purity};
use crate::error::{Error, Result};
use crate::lp;
use crate::report::{Check, VerificationReport};
use crate::tensor::{self, CMatrix, RMatrix, RVector, SeededRng};
use crate::theory::{quantum, random, ProcessRep, SystemType, Theory};

/// Residual allowed for causality, idempotence and fixed points.
pub const MAP_TOL: f64 = 1e-9;
/// A map within this distance of the identity counts as trivial.
pub const TRIVIAL_TOL: f64 = 1e-10;
/// Closure and isomorphism residuals.
pub const CLOSURE_TOL: f64 = 1e-9;
pub const ISO_TOL: f64 = 1e-10;

const ANCHOR_CAUSAL: &str = "decoherence map is causal";
const ANCHOR_IDEMPOTENT: &str = "decoherence map is idempotent";
const ANCHOR_PURITY: &str = "pure states of the sub-theory are pure in the parent theory";
const ANCHOR_DIMENSION: &str = "sub-theory keeps the information dimension of the parent";

#[derive(Debug, Clone, PartialEq)]
pub struct SystemMap {
    pub system: SystemType,
    pub map: ProcessRep,
}

/// A family of endomorphisms, one per system type.
#[derive(Debug, Clone)]
pub struct DecoherenceCandidate {
    pub theory: Theory,
    pub label: String,
    pub maps: Vec<SystemMap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Trivial,
    Nontrivial,
}

impl DecoherenceCandidate {
    /// Validates that each map is an endomorphism of its system and a valid
    /// transformation of the theory.
    pub fn new(theory: Theory, label: impl Into<String>, maps: Vec<SystemMap>) -> Result<DecoherenceCandidate> {
        if maps.is_empty() {
            return Err(Error::Validation("candidate has no maps".into()));
        }
        for m in &maps {
            if m.map.input_type()? != m.system || m.map.output_type()? != m.system {
                return Err(Error::Validation(format!("map for {} is not an endomorphism", m.system)));
            }
            if !theory.is_transformation(&m.map) {
                return Err(Error::Validation(format!("map for {} is not a valid transformation", m.system)));
            }
        }
        Ok(DecoherenceCandidate { theory, label: label.into(), maps })
    }

    pub fn single(theory: Theory, label: impl Into<String>, system: SystemType, map: ProcessRep) -> Result<DecoherenceCandidate> {
        DecoherenceCandidate::new(theory, label, vec![SystemMap { system, map }])
    }

    pub fn theory_id(&self) -> &str {
        self.theory.id()
    }

    pub fn map_for(&self, ty: &SystemType) -> Option<&ProcessRep> {
        self.maps.iter().find(|m| &m.system == ty).map(|m| &m.map)
    }

    /// Identity on one system.
    pub fn identity(theory: Theory, ty: &SystemType) -> Result<DecoherenceCandidate> {
        let ports = ty.atoms();
        DecoherenceCandidate::single(theory, "identity", ty.clone(), ProcessRep::identity(&ports))
    }

    /// Reads `{ "candidate": { "system": label, "matrix": [[..]] } }`; the
    /// inner object may also be a list of such objects.
    pub fn from_json(text: &str, theory: &Theory) -> Result<DecoherenceCandidate> {
        let value: Value = serde_json::from_str(text)?;
        let inner = value
            .get("candidate")
            .ok_or_else(|| Error::Spec("missing `candidate` field".into()))?;
        let entries: Vec<CandidateEntry> = match inner {
            Value::Array(_) => serde_json::from_value(inner.clone())?,
            _ => vec![serde_json::from_value(inner.clone())?],
        };
        let label = value.get("label").and_then(Value::as_str).unwrap_or("candidate").to_string();
        let mut maps = Vec::with_capacity(entries.len());
        for e in entries {
            let system = theory.system(&e.system)?;
            let rows = e.matrix.len();
            let cols = e.matrix.first().map_or(0, Vec::len);
            if e.matrix.iter().any(|r| r.len() != cols) {
                return Err(Error::Spec("matrix rows have different lengths".into()));
            }
            let m = RMatrix::from_row_iterator(rows, cols, e.matrix.into_iter().flatten());
            let ports = system.atoms();
            let map = ProcessRep::new(m, ports.clone(), ports)?;
            maps.push(SystemMap { system, map });
        }
        DecoherenceCandidate::new(theory.clone(), label, maps)
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .maps
            .iter()
            .map(|m| {
                let a = m.map.matrix();
                let rows: Vec<Vec<f64>> = (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
                json!({ "system": m.system.label, "matrix": rows })
            })
            .collect();
        let inner = if entries.len() == 1 { entries[0].clone() } else { Value::Array(entries) };
        json!({ "label": self.label, "candidate": inner })
    }
}

#[derive(Debug, Deserialize)]
struct CandidateEntry {
    system: String,
    matrix: Vec<Vec<f64>>,
}

/// Dephasing `ρ ↦ Σᵢ ⟨bᵢ|ρ|bᵢ⟩ |bᵢ⟩⟨bᵢ|` in the basis given by the columns of
/// `basis` (computational basis when `None`).
pub fn dephasing_map(d: usize, basis: Option<&CMatrix>) -> Result<DecoherenceCandidate> {
    if d < 2 {
        return Err(Error::Dimension(format!("dephasing needs d ≥ 2, got {d}")));
    }
    let map = match basis {
        Some(b) => {
            if b.shape() != (d, d) || tensor::frobenius_diff(&(b.adjoint() * b), &CMatrix::identity(d, d)) > 1e-9 {
                return Err(Error::Validation("basis is not orthonormal".into()));
            }
            quantum::dephasing_channel_in(b)?
        }
        None => quantum::dephasing_channel(d)?,
    };
    DecoherenceCandidate::single(Theory::Quantum, format!("dephasing:{d}"), SystemType::quantum(d), map)
}

/// `1 ⊗ (q ∘ discard)` on `c_n ⊗ c_n`: keeps the first system and replaces
/// the second with the mixed state `q`.
pub fn postclassical_counterexample(n: usize, q: &[f64]) -> Result<DecoherenceCandidate> {
    if n < 2 || q.len() != n {
        return Err(Error::Validation(format!("q must have {n} entries (n ≥ 2)")));
    }
    if q.iter().any(|&x| !x.is_finite() || x < 0.0) || (q.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Validation("q is not a probability vector".into()));
    }
    if q.iter().filter(|&&x| x > 0.0).count() < 2 {
        return Err(Error::Validation("q needs at least two positive entries".into()));
    }
    let c = SystemType::classical(n);
    let qv = RVector::from_column_slice(q);
    let replace = tensor::col(&qv) * RMatrix::from_element(1, n, 1.0);
    let m = tensor::rkron(&RMatrix::identity(n, n), &replace);
    let ports = vec![c.clone(), c.clone()];
    let map = ProcessRep::new(m, ports.clone(), ports)?;
    let system = SystemType::composite(&[c.clone(), c])?;
    DecoherenceCandidate::single(Theory::Classical, format!("postclassical:{n}"), system, map)
}

/// `1 ⊗ (q ∘ discard)` on `q_d ⊗ q_d` for a mixed density matrix `q`.
pub fn postquantum_counterexample(d: usize, q: &CMatrix) -> Result<DecoherenceCandidate> {
    if d < 2 || q.shape() != (d, d) {
        return Err(Error::Validation(format!("q must be a {d}x{d} density matrix (d ≥ 2)")));
    }
    quantum::check_density(q).map_err(|e| Error::Validation(e.to_string()))?;
    if quantum::is_pure_density(q) {
        return Err(Error::Validation("q must be mixed".into()));
    }
    let ty = SystemType::quantum(d);
    let qv = tensor::to_real(q, &quantum::basis_for(std::slice::from_ref(&ty)))?;
    let u = Theory::Quantum.unit_vector(&ty)?;
    let replace = tensor::col(&qv) * tensor::row(&u);
    let m = tensor::rkron(&RMatrix::identity(d * d, d * d), &replace);
    let ports = vec![ty.clone(), ty.clone()];
    let map = ProcessRep::new(m, ports.clone(), ports)?;
    let system = SystemType::composite(&[ty.clone(), ty])?;
    DecoherenceCandidate::single(Theory::Quantum, format!("postquantum:{d}"), system, map)
}

/// Trivial when every map is the identity within [`TRIVIAL_TOL`].
pub fn classify(c: &DecoherenceCandidate) -> Classification {
    let trivial = c.maps.iter().all(|m| {
        let n = m.map.matrix().nrows();
        tensor::rdiff(m.map.matrix(), &RMatrix::identity(n, n)) <= TRIVIAL_TOL
    });
    if trivial {
        Classification::Trivial
    } else {
        Classification::Nontrivial
    }
}

pub fn idempotence_residual(map: &ProcessRep) -> f64 {
    tensor::rdiff(&(map.matrix() * map.matrix()), map.matrix())
}

/// Sampling parameters for checks that need candidate states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> CheckOptions {
        CheckOptions { samples: 20, seed: 42 }
    }
}

/// Image of one parent candidate under the map, with its status in the
/// sub-theory.
#[derive(Debug, Clone)]
pub struct Image {
    pub state: ProcessRep,
    pub sub_pure: bool,
}

/// Parent candidates whose images cover the sub-theory's extreme points:
/// extreme states for classical and polytopic systems; basis states, random
/// pure states and eigenvectors of their images for quantum systems.
pub fn image_candidates(theory: &Theory, map: &ProcessRep, opts: CheckOptions) -> Result<Vec<ProcessRep>> {
    let ty = map.input_type()?;
    let ports = map.inputs().to_vec();
    let retype = |p: ProcessRep| ProcessRep::new(p.matrix().clone(), Vec::new(), ports.clone());
    let base = convex::default_candidates(theory, &ty, if theory.id() == crate::theory::QUANTUM { opts.samples } else { 0 }, opts.seed)?;
    let mut out: Vec<ProcessRep> = base.into_iter().map(retype).collect::<Result<_>>()?;
    if let Theory::Quantum = theory {
        let mut extra = Vec::new();
        for s in &out {
            let img = map.matrix() * s.as_state_vector();
            let rho = quantum::density(&img, &ty)?;
            let (vals, vecs) = tensor::hermitian_eigen(&rho);
            for (i, &x) in vals.iter().enumerate() {
                if x > 1e-9 {
                    let proj = tensor::projector(&vecs.column(i).into_owned());
                    extra.push(quantum::state_on(&proj, ports.clone())?);
                }
            }
        }
        out.extend(extra);
    }
    Ok(out)
}

/// Distinct images of the candidates, each flagged as extreme (pure) in the
/// sub-theory or not. Classical and polytopic images are tested exactly
/// against the hull of the other images; quantum images by whether the
/// face of the fixed-state set at the image is a single point.
pub fn analyze_images(theory: &Theory, map: &ProcessRep, candidates: &[ProcessRep]) -> Result<Vec<Image>> {
    let ty = map.input_type()?;
    let mut vectors: Vec<RVector> = Vec::new();
    for s in candidates {
        let v = map.matrix() * s.as_state_vector();
        if !vectors.iter().any(|w| (w - &v).norm() <= 1e-9) {
            vectors.push(v);
        }
    }
    let mut out = Vec::with_capacity(vectors.len());
    for (i, v) in vectors.iter().enumerate() {
        let sub_pure = match theory {
            Theory::Quantum => quantum_face_is_point(map, v, &ty)?,
            _ => {
                let others: Vec<RVector> = vectors.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, w)| w.clone()).collect();
                lp::convex_weights(&others, v)?.is_none()
            }
        };
        let state = ProcessRep::new(tensor::col(v), Vec::new(), map.outputs().to_vec())?;
        out.push(Image { state, sub_pure });
    }
    Ok(out)
}

/// σ is extreme among fixed states exactly when no nonzero traceless
/// Hermitian `X` with `D X = X` is supported inside `supp σ`.
fn quantum_face_is_point(map: &ProcessRep, sigma: &RVector, ty: &SystemType) -> Result<bool> {
    let basis = quantum::basis_for(std::slice::from_ref(ty));
    let rho = tensor::from_real(sigma, &basis)?;
    let (vals, vecs) = tensor::hermitian_eigen(&rho);
    let top = vals[0].max(f64::MIN_POSITIVE);
    let kernel: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= 1e-9 * top).collect();
    let n = basis.len();
    let dim = basis.dim;
    let rows = n + 1 + 2 * kernel.len() * dim;
    let mut a = RMatrix::zeros(rows, n);
    a.view_mut((0, 0), (n, n)).copy_from(&(map.matrix() - RMatrix::identity(n, n)));
    a[(n, 0)] = 1.0;
    for (l, b) in basis.elements.iter().enumerate() {
        for (k, &ki) in kernel.iter().enumerate() {
            let bra = vecs.column(ki).adjoint();
            let row = bra * b;
            for col in 0..dim {
                let base = n + 1 + 2 * (k * dim + col);
                a[(base, l)] = row[(0, col)].re;
                a[(base + 1, l)] = row[(0, col)].im;
            }
        }
    }
    Ok(tensor::nullity(&a, 1e-8) == 0)
}

fn state_witness(theory: &Theory, s: &ProcessRep, decomposition: &convex::MixtureDecomposition) -> Value {
    let mut w = json!({
        "state": s.as_state_vector().iter().map(|x| crate::report::round12(*x)).collect::<Vec<_>>(),
        "weights": decomposition.weights.iter().map(|x| crate::report::round12(*x)).collect::<Vec<_>>(),
        "components": decomposition.components.len(),
    });
    if let (Theory::Quantum, Ok(rho)) = (theory, quantum::density_of(s)) {
        let re: Vec<Vec<f64>> = (0..rho.nrows())
            .map(|i| (0..rho.ncols()).map(|j| crate::report::round12(rho[(i, j)].re)).collect())
            .collect();
        w["density_real"] = json!(re);
    }
    w
}

/// Runs the four defining checks on every map of the candidate.
pub fn check_candidate(c: &DecoherenceCandidate) -> Result<VerificationReport> {
    check_candidate_with(c, CheckOptions::default())
}

pub fn check_candidate_with(c: &DecoherenceCandidate, opts: CheckOptions) -> Result<VerificationReport> {
    let mut report = VerificationReport::with_seed(opts.seed);
    let prefix = |name: &str, m: &SystemMap| {
        if c.maps.len() == 1 {
            name.to_string()
        } else {
            format!("{}/{name}", m.system.label)
        }
    };
    for m in &c.maps {
        let th = &c.theory;
        report.dims.push(m.system.levels);
        let causal = th.causality_residual(&m.map)?;
        report.push(Check::new(prefix("causal", m), ANCHOR_CAUSAL, causal, MAP_TOL));
        let idem = idempotence_residual(&m.map);
        report.push(Check::new(prefix("idempotent", m), ANCHOR_IDEMPOTENT, idem, MAP_TOL));

        let candidates = image_candidates(th, &m.map, opts)?;
        let images = analyze_images(th, &m.map, &candidates)?;
        let mut witness = None;
        let mut sub_pure_count = 0;
        for img in images.iter().filter(|i| i.sub_pure) {
            sub_pure_count += 1;
            if let Purity::Mixed(dec) = convex::is_pure(th, &img.state)? {
                if dec.is_valid_for(&img.state) {
                    witness = Some(state_witness(th, &img.state, &dec));
                    break;
                }
            }
        }
        let purity = Check::flag(prefix("purity-preservation", m), ANCHOR_PURITY, witness.is_none());
        report.push(match witness {
            Some(w) => purity.with_witness(w),
            None => purity.with_witness(json!({ "sub_theory_pure_states_checked": sub_pure_count })),
        });

        let budget = if th.id() == crate::theory::QUANTUM { opts.samples } else { 0 };
        let parent = convex::info_dimension(th, &convex::default_candidates(th, &m.system, budget, opts.seed)?)?;
        let image_states: Vec<ProcessRep> = images.iter().map(|i| i.state.clone()).collect();
        let sub = convex::info_dimension(th, &image_states)?;
        report.push(
            Check::new(
                prefix("dimension-preservation", m),
                ANCHOR_DIMENSION,
                (parent.pairwise as f64 - sub.pairwise as f64).abs(),
                0.0,
            )
            .with_witness(json!({
                "parent": parent.pairwise,
                "sub_theory": sub.pairwise,
                "parent_joint": parent.joint,
                "sub_theory_joint": sub.joint,
            })),
        );
    }
    Ok(report)
}

/// The states, transformations and effects left invariant by an
/// idempotent candidate on one system. Types are those of the parent.
#[derive(Debug, Clone)]
pub struct SubTheory {
    pub parent: Theory,
    pub candidate: DecoherenceCandidate,
    pub system: SystemType,
    pub map: ProcessRep,
}

/// Linear bijection between a sub-theory whose states form a simplex and
/// classical theory on `k` outcomes.
#[derive(Debug, Clone)]
pub struct ClassicalIso {
    pub k: usize,
    /// Columns are the sub-theory's pure states.
    pub embed: RMatrix,
    /// `embed⁺ ∘ D`.
    pub project: RMatrix,
}

pub fn build_subtheory(c: &DecoherenceCandidate) -> Result<SubTheory> {
    let m = c.maps.first().ok_or_else(|| Error::Validation("candidate has no maps".into()))?;
    let idem = idempotence_residual(&m.map);
    if idem > MAP_TOL {
        return Err(Error::Precondition(format!("candidate is not idempotent (residual {idem:.3e})")));
    }
    Ok(SubTheory {
        parent: c.theory.clone(),
        candidate: c.clone(),
        system: m.system.clone(),
        map: m.map.clone(),
    })
}

impl SubTheory {
    fn d(&self) -> &RMatrix {
        self.map.matrix()
    }

    /// `D s`.
    pub fn project_state(&self, s: &ProcessRep) -> Result<ProcessRep> {
        s.then(&self.map)
    }

    /// `D ∘ T ∘ D` for an endomorphism `T`.
    pub fn project_transformation(&self, t: &ProcessRep) -> Result<ProcessRep> {
        self.map.then(t)?.then(&self.map)
    }

    /// `e ∘ D`.
    pub fn project_effect(&self, e: &ProcessRep) -> Result<ProcessRep> {
        self.map.then(e)
    }

    /// Parent state fixed by the map.
    pub fn contains_state(&self, s: &ProcessRep) -> bool {
        let v = s.as_state_vector();
        v.len() == self.d().ncols()
            && self.parent.is_state(&v, &self.system)
            && (self.d() * &v - &v).norm() <= ISO_TOL
    }

    pub fn contains_transformation(&self, t: &ProcessRep) -> bool {
        t.matrix().shape() == self.d().shape() && tensor::rdiff(&(self.d() * t.matrix() * self.d()), t.matrix()) <= CLOSURE_TOL
    }

    /// Fixed-point property and closure under sequential and parallel
    /// composition on sampled processes.
    pub fn check_closure(&self, samples: usize, seed: u64) -> Result<VerificationReport> {
        let mut rng = SeededRng::seed_from_u64(seed);
        let ports = self.map.inputs().to_vec();
        let (mut fixed, mut seq, mut par) = (0.0_f64, 0.0_f64, 0.0_f64);
        let dd = tensor::rkron(self.d(), self.d());
        for _ in 0..samples {
            let s = self.project_state(&random::random_state(&self.parent, &ports, &mut rng)?)?;
            let v = s.as_state_vector();
            fixed = fixed.max((self.d() * &v - &v).norm());
            let t = self.project_transformation(&random::random_channel(&self.parent, &ports, &ports, &mut rng)?)?;
            let u = self.project_transformation(&random::random_channel(&self.parent, &ports, &ports, &mut rng)?)?;
            let both = u.matrix() * t.matrix();
            seq = seq.max(tensor::rdiff(&(self.d() * &both * self.d()), &both));
            let side = tensor::rkron(t.matrix(), u.matrix());
            par = par.max(tensor::rdiff(&(&dd * &side * &dd), &side));
        }
        let anchor = "sub-theory is closed under composition";
        let mut r = VerificationReport::with_seed(seed);
        r.push(Check::new("fixed-point", "sub-theory states are fixed by the map", fixed, ISO_TOL));
        r.push(Check::new("closure/sequential", anchor, seq, CLOSURE_TOL));
        r.push(Check::new("closure/parallel", anchor, par, CLOSURE_TOL));
        Ok(r)
    }

    /// Sub-theory pure states, found from the parent's candidates.
    pub fn pure_states(&self, opts: CheckOptions) -> Result<Vec<ProcessRep>> {
        let candidates = image_candidates(&self.parent, &self.map, opts)?;
        Ok(analyze_images(&self.parent, &self.map, &candidates)?
            .into_iter()
            .filter(|i| i.sub_pure)
            .map(|i| i.state)
            .collect())
    }

    /// Coordinates identifying the sub-theory with classical theory, when its
    /// pure states are linearly independent and span the image of the map.
    pub fn classical_isomorphism(&self, opts: CheckOptions) -> Result<Option<ClassicalIso>> {
        let pure = self.pure_states(opts)?;
        let k = pure.len();
        if k == 0 {
            return Ok(None);
        }
        let cols: Vec<RVector> = pure.iter().map(ProcessRep::as_state_vector).collect();
        let embed = RMatrix::from_columns(&cols);
        let svd = embed.clone().svd(true, true);
        let rank = svd.singular_values.iter().filter(|&&s| s > 1e-9).count();
        if rank != k {
            return Ok(None);
        }
        let pinv = svd
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::Numeric(format!("pseudo-inverse failed: {e}")))?;
        let project = pinv * self.d();
        if tensor::rdiff(&(&embed * &project), self.d()) > ISO_TOL {
            return Ok(None);
        }
        Ok(Some(ClassicalIso { k, embed, project }))
    }
}

impl ClassicalIso {
    /// Residuals of the bijection: `P E = I`, `E P = D`, stochasticity of the
    /// transported sampled transformations, and preservation of composition.
    pub fn verify(&self, sub: &SubTheory, samples: usize, seed: u64) -> Result<VerificationReport> {
        let mut rng = SeededRng::seed_from_u64(seed);
        let ports = sub.map.inputs().to_vec();
        let k = self.k;
        let inverse = tensor::rdiff(&(&self.project * &self.embed), &RMatrix::identity(k, k));
        let onto = tensor::rdiff(&(&self.embed * &self.project), sub.d());
        let (mut stoch, mut comp, mut effects) = (0.0_f64, 0.0_f64, 0.0_f64);
        let u = sub.parent.unit_vector(&sub.system)?;
        for _ in 0..samples {
            let t = sub.project_transformation(&random::random_channel(&sub.parent, &ports, &ports, &mut rng)?)?;
            let s = sub.project_transformation(&random::random_channel(&sub.parent, &ports, &ports, &mut rng)?)?;
            let ct = &self.project * t.matrix() * &self.embed;
            let cs = &self.project * s.matrix() * &self.embed;
            for col in ct.column_iter() {
                let neg = col.iter().fold(0.0_f64, |acc, &x| acc.max(-x));
                stoch = stoch.max(neg).max((col.sum() - 1.0).abs());
            }
            let joint = &self.project * (s.matrix() * t.matrix()) * &self.embed;
            comp = comp.max(tensor::rdiff(&joint, &(&cs * &ct)));
            let e = random::random_effect(&sub.parent, &ports, &mut rng)?;
            let row = e.matrix() * sub.d() * &self.embed;
            let over = row.iter().fold(0.0_f64, |acc, &x| acc.max(-x).max(x - 1.0));
            effects = effects.max(over);
        }
        let norm = (tensor::row(&u) * &self.embed - RMatrix::from_element(1, k, 1.0)).norm();
        let anchor = "sub-theory is classical probability theory";
        let mut r = VerificationReport::with_seed(seed);
        r.push(Check::new("iso/inverse", anchor, inverse, ISO_TOL));
        r.push(Check::new("iso/onto-image", anchor, onto, ISO_TOL));
        r.push(Check::new("iso/normalization", anchor, norm, ISO_TOL));
        r.push(Check::new("iso/stochastic", anchor, stoch, ISO_TOL));
        r.push(Check::new("iso/composition", anchor, comp, ISO_TOL));
        r.push(Check::new("iso/effects", anchor, effects, ISO_TOL));
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{c, CVector};

    fn plus(d: usize) -> CMatrix {
        let amp = c(1.0 / (d as f64).sqrt(), 0.0);
        tensor::projector(&CVector::from_element(d, amp))
    }

    #[test]
    fn dephasing_examples() {
        let cand = dephasing_map(2, None).unwrap();
        let map = &cand.maps[0].map;
        let out = quantum::apply(map, &plus(2)).unwrap();
        let half = CMatrix::identity(2, 2) * c(0.5, 0.0);
        assert!(tensor::frobenius_diff(&out, &half) < 1e-12);
        let diag = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.3, 0.0), c(0.7, 0.0)]));
        assert!(tensor::frobenius_diff(&quantum::apply(map, &diag).unwrap(), &diag) < 1e-12);
    }

    #[test]
    fn dephasing_is_an_environment_interaction() {
        // U = Σᵢ |i⟩⟨i| ⊗ πᵢ with πᵢ the cyclic shift by i, so πᵢ|0⟩ = |i⟩
        for d in 2..=4 {
            let mut u = CMatrix::zeros(d * d, d * d);
            for i in 0..d {
                let mut pi = CMatrix::zeros(d, d);
                for k in 0..d {
                    pi[((k + i) % d, k)] = c(1.0, 0.0);
                }
                u += tensor::kron(&tensor::basis_projector(d, i), &pi);
            }
            let env0 = tensor::basis_projector(d, 0);
            let ty = SystemType::quantum(d);
            let oracle = quantum::channel(vec![ty.clone()], vec![ty], |rho| {
                let big = &u * tensor::kron(rho, &env0) * u.adjoint();
                tensor::partial_trace(&big, &[d, d], &[0]).unwrap()
            })
            .unwrap();
            let cand = dephasing_map(d, None).unwrap();
            assert!(tensor::rdiff(oracle.matrix(), cand.maps[0].map.matrix()) < 1e-10);
        }
    }

    #[test]
    fn dephasing_passes_all_checks() {
        let r = check_candidate(&dephasing_map(3, None).unwrap()).unwrap();
        assert!(r.all_pass(), "{}", r.to_table());
        assert_eq!(r.checks.len(), 4);
        assert_eq!(classify(&dephasing_map(2, None).unwrap()), Classification::Nontrivial);
    }

    #[test]
    fn dephasing_in_a_rotated_basis() {
        let u = tensor::random_unitary(3, 9);
        let r = check_candidate(&dephasing_map(3, Some(&u)).unwrap()).unwrap();
        assert!(r.all_pass(), "{}", r.to_table());
    }

    #[test]
    fn identity_candidate() {
        let cand = DecoherenceCandidate::identity(Theory::Quantum, &SystemType::quantum(2)).unwrap();
        assert_eq!(classify(&cand), Classification::Trivial);
        let r = check_candidate(&cand).unwrap();
        assert!(r.all_pass(), "{}", r.to_table());
        let sub = build_subtheory(&cand).unwrap();
        let mut rng = tensor::rng_from_seed(2);
        let s = random::random_state(&Theory::Quantum, &[SystemType::quantum(2)], &mut rng).unwrap();
        assert!(sub.contains_state(&s));
    }

    #[test]
    fn postclassical_fails_purity_and_dimension() {
        let cand = postclassical_counterexample(2, &[0.5, 0.5]).unwrap();
        let r = check_candidate(&cand).unwrap();
        assert!(r.get("causal").unwrap().passed());
        assert!(r.get("idempotent").unwrap().passed());
        assert!(!r.get("purity-preservation").unwrap().passed());
        let dim = r.get("dimension-preservation").unwrap();
        assert!(!dim.passed());
        assert_eq!(dim.witness.as_ref().unwrap()["parent"], 4);
        assert_eq!(dim.witness.as_ref().unwrap()["sub_theory"], 2);
        assert_eq!(classify(&cand), Classification::Nontrivial);

        // D(a ⊗ b) = a ⊗ q on point masses
        let m = cand.maps[0].map.matrix();
        for a in 0..2 {
            for b in 0..2 {
                let mut v = RVector::zeros(4);
                v[a * 2 + b] = 1.0;
                let out = m * v;
                let mut expected = RVector::zeros(4);
                expected[a * 2] = 0.5;
                expected[a * 2 + 1] = 0.5;
                assert!((out - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn counterexample_validation() {
        assert!(postclassical_counterexample(2, &[1.0, 0.0]).is_err());
        assert!(postclassical_counterexample(3, &[0.5, 0.5]).is_err());
        assert!(postclassical_counterexample(2, &[0.7, 0.7]).is_err());
        assert!(postquantum_counterexample(2, &tensor::basis_projector(2, 0)).is_err());
    }

    #[test]
    fn postquantum_fails_with_product_witness() {
        let q = CMatrix::identity(2, 2) * c(0.5, 0.0);
        let cand = postquantum_counterexample(2, &q).unwrap();
        let r = check_candidate(&cand).unwrap();
        assert!(r.get("causal").unwrap().passed());
        assert!(r.get("idempotent").unwrap().passed());
        let purity = r.get("purity-preservation").unwrap();
        assert!(!purity.passed());
        // the witness is ρ ⊗ I/2 for a pure ρ: rank 2 with equal weights
        let w = purity.witness.as_ref().unwrap();
        let weights: Vec<f64> = serde_json::from_value(w["weights"].clone()).unwrap();
        assert_eq!(weights.len(), 2);
        assert!(weights.iter().all(|x| (x - 0.5).abs() < 1e-9));
        let dim = r.get("dimension-preservation").unwrap();
        assert_eq!(dim.witness.as_ref().unwrap()["parent"], 4);
        assert_eq!(dim.witness.as_ref().unwrap()["sub_theory"], 2);

        // image states are exactly products with q
        let sub = build_subtheory(&cand).unwrap();
        let mut rng = tensor::rng_from_seed(6);
        let ports = cand.maps[0].map.inputs().to_vec();
        for _ in 0..10 {
            let s = random::random_state(&Theory::Quantum, &ports, &mut rng).unwrap();
            let img = quantum::density_of(&sub.project_state(&s).unwrap()).unwrap();
            let rho_a = tensor::partial_trace(&quantum::density_of(&s).unwrap(), &[2, 2], &[0]).unwrap();
            assert!(tensor::frobenius_diff(&img, &tensor::kron(&rho_a, &q)) < 1e-12);
        }
    }

    #[test]
    fn subtheory_requires_idempotence() {
        let u = tensor::random_unitary(2, 3);
        let map = quantum::unitary_channel(&u, vec![SystemType::quantum(2)]).unwrap();
        let cand = DecoherenceCandidate::single(Theory::Quantum, "u", SystemType::quantum(2), map).unwrap();
        assert!(matches!(build_subtheory(&cand), Err(Error::Precondition(_))));
    }

    #[test]
    fn dephasing_subtheory_is_classical() {
        for d in 2..=4 {
            let sub = build_subtheory(&dephasing_map(d, None).unwrap()).unwrap();
            assert!(sub.check_closure(20, 1).unwrap().all_pass());
            let iso = sub.classical_isomorphism(CheckOptions::default()).unwrap().unwrap();
            assert_eq!(iso.k, d);
            let r = iso.verify(&sub, 20, 3).unwrap();
            assert!(r.all_pass(), "{}", r.to_table());
        }
    }

    #[test]
    fn postclassical_subtheory_is_classical() {
        let sub = build_subtheory(&postclassical_counterexample(3, &[0.2, 0.3, 0.5]).unwrap()).unwrap();
        assert!(sub.check_closure(20, 1).unwrap().all_pass());
        let iso = sub.classical_isomorphism(CheckOptions::default()).unwrap().unwrap();
        assert_eq!(iso.k, 3);
        assert!(iso.verify(&sub, 20, 3).unwrap().all_pass());
    }

    #[test]
    fn candidate_json_round_trip() {
        let cand = postclassical_counterexample(2, &[0.5, 0.5]).unwrap();
        let text = cand.to_json().to_string();
        let back = DecoherenceCandidate::from_json(&text, &Theory::Classical).unwrap();
        assert_eq!(back.maps[0].map.matrix(), cand.maps[0].map.matrix());
        assert_eq!(back.maps[0].system, cand.maps[0].system);
        let bad = r#"{"candidate": {"system": "c2", "matrix": [[1, 0], [0, 2]]}}"#;
        assert!(DecoherenceCandidate::from_json(bad, &Theory::Classical).is_err());
    }

    #[test]
    fn gbit_identity_candidate() {
        let g = Theory::gbit();
        let cand = DecoherenceCandidate::identity(g.clone(), &g.system("gbit").unwrap()).unwrap();
        let r = check_candidate(&cand).unwrap();
        assert!(r.all_pass(), "{}", r.to_table());
    }
}
