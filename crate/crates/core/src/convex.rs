//! Purity, perfect distinguishability, information dimension and mixture
//! decompositions.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp;
use crate::tensor::{self, CMatrix, RMatrix, RVector, SeededRng};
use crate::theory::{quantum, ProcessRep, SystemType, Theory, PSD_TOL};

/// `e_i(ρ_j) = δ_ij` must hold within this tolerance.
pub const DISTINGUISH_TOL: f64 = 1e-7;
/// Effects of a measurement must sum to the unit effect within this.
pub const UNIT_TOL: f64 = 1e-8;
/// Mixture decompositions must reproduce their target within this.
pub const MIXTURE_TOL: f64 = 1e-9;
/// Second/first singular value ratio below which a quantum state is pure.
pub const RANK_TOL: f64 = 1e-8;
/// Largest candidate set accepted by [`info_dimension`].
pub const CANDIDATE_LIMIT: usize = 256;

/// Effects on one system summing to the unit effect.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub effects: Vec<ProcessRep>,
}

impl Measurement {
    /// Validates each effect and the normalization.
    pub fn new(theory: &Theory, effects: Vec<ProcessRep>) -> Result<Measurement> {
        let first = effects.first().ok_or_else(|| Error::Validation("empty measurement".into()))?;
        let ty = first.input_type()?;
        let mut total = RVector::zeros(ty.vec_dim);
        for (i, e) in effects.iter().enumerate() {
            if !e.is_effect() || e.input_type()? != ty {
                return Err(Error::Validation(format!("outcome {i} is not an effect on {}", ty.label)));
            }
            let v = e.as_effect_vector();
            if !theory.is_effect(&v, &ty) {
                return Err(Error::Validation(format!("outcome {i} is not a valid effect")));
            }
            total += v;
        }
        let residual = (total - theory.unit_vector(&ty)?).norm();
        if residual > UNIT_TOL {
            return Err(Error::Validation(format!("effects sum to the unit effect only within {residual:.3e}")));
        }
        Ok(Measurement { effects })
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// Outcome probabilities on a state.
    pub fn probabilities(&self, state: &ProcessRep) -> Vec<f64> {
        let v = state.as_state_vector();
        self.effects.iter().map(|e| e.as_effect_vector().dot(&v)).collect()
    }

    /// `max |e_i(ρ_j) − δ_ij|`.
    pub fn discrimination_residual(&self, states: &[ProcessRep]) -> f64 {
        let mut worst = 0.0_f64;
        for (j, s) in states.iter().enumerate() {
            for (i, p) in self.probabilities(s).into_iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p - target).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDecomposition {
    pub weights: Vec<f64>,
    pub components: Vec<ProcessRep>,
}

impl MixtureDecomposition {
    pub fn mixture(&self) -> RVector {
        let n = self.components.first().map_or(0, |c| c.matrix().nrows());
        self.weights
            .iter()
            .zip(&self.components)
            .fold(RVector::zeros(n), |acc, (w, c)| acc + c.as_state_vector() * *w)
    }

    /// Distance between the weighted sum and `target`.
    pub fn residual(&self, target: &ProcessRep) -> f64 {
        (self.mixture() - target.as_state_vector()).norm()
    }

    pub fn is_valid_for(&self, target: &ProcessRep) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
            && (self.weights.iter().sum::<f64>() - 1.0).abs() <= MIXTURE_TOL
            && self.residual(target) <= MIXTURE_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Purity {
    Pure,
    Mixed(MixtureDecomposition),
}

impl Purity {
    pub fn is_pure(&self) -> bool {
        matches!(self, Purity::Pure)
    }
}

fn check_state(theory: &Theory, s: &ProcessRep) -> Result<SystemType> {
    if !s.is_state() {
        return Err(Error::State("not a state".into()));
    }
    let ty = s.output_type()?;
    if let Some(why) = theory.state_violation(&s.as_state_vector(), &ty) {
        return Err(Error::State(why));
    }
    Ok(ty)
}

/// Purity test. Mixed states come with a decomposition into distinct
/// states.
pub fn is_pure(theory: &Theory, s: &ProcessRep) -> Result<Purity> {
    let ty = check_state(theory, s)?;
    let v = s.as_state_vector();
    match theory {
        Theory::Quantum => {
            let rho = quantum::density(&v, &ty)?;
            let (vals, vecs) = tensor::hermitian_eigen(&rho);
            let top = vals[0].max(f64::MIN_POSITIVE);
            if vals.get(1).copied().unwrap_or(0.0) < RANK_TOL * top {
                return Ok(Purity::Pure);
            }
            let mut weights = Vec::new();
            let mut components = Vec::new();
            for (i, &p) in vals.iter().enumerate() {
                if p > RANK_TOL * top {
                    weights.push(p);
                    let proj = tensor::projector(&vecs.column(i).into_owned());
                    components.push(quantum::state_on(&proj, s.outputs().to_vec())?);
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            Ok(Purity::Mixed(MixtureDecomposition { weights, components }))
        }
        Theory::Classical => {
            let support: Vec<usize> = (0..v.len()).filter(|&i| v[i] > PSD_TOL).collect();
            if support.len() <= 1 {
                return Ok(Purity::Pure);
            }
            let total: f64 = support.iter().map(|&i| v[i]).sum();
            let weights = support.iter().map(|&i| v[i] / total).collect();
            let components = support
                .iter()
                .map(|&i| {
                    let mut e = RVector::zeros(v.len());
                    e[i] = 1.0;
                    ProcessRep::new(tensor::col(&e), Vec::new(), s.outputs().to_vec())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Purity::Mixed(MixtureDecomposition { weights, components }))
        }
        Theory::Polytope(_) => {
            let extremes = theory.extreme_states(&ty)?.unwrap_or_default();
            if extremes.iter().any(|e| (e - &v).norm() <= MIXTURE_TOL) {
                return Ok(Purity::Pure);
            }
            let w = lp::convex_weights(&extremes, &v)?
                .ok_or_else(|| Error::State("outside the state space".into()))?;
            let mut weights = Vec::new();
            let mut components = Vec::new();
            for (i, &wi) in w.iter().enumerate() {
                if wi > 1e-12 {
                    weights.push(wi);
                    components.push(ProcessRep::state(extremes[i].clone(), ty.clone())?);
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|x| *x /= total);
            Ok(Purity::Mixed(MixtureDecomposition { weights, components }))
        }
    }
}

/// Orthogonal projector onto the support of a density matrix.
fn support_projector(rho: &CMatrix) -> CMatrix {
    let (vals, vecs) = tensor::hermitian_eigen(rho);
    let top = vals[0].max(f64::MIN_POSITIVE);
    let d = rho.nrows();
    let mut p = CMatrix::zeros(d, d);
    for (i, &x) in vals.iter().enumerate() {
        if x > 1e-10 * top {
            p += tensor::projector(&vecs.column(i).into_owned());
        }
    }
    p
}

fn common_type(states: &[ProcessRep]) -> Result<SystemType> {
    let first = states.first().ok_or_else(|| Error::Validation("no states".into()))?;
    let ty = first.output_type()?;
    for s in states {
        if !s.is_state() || s.output_type()? != ty {
            return Err(Error::Validation("states must share one system type".into()));
        }
    }
    Ok(ty)
}

/// Measurement with `e_i(ρ_j) = δ_ij`, or `None` when the states are not
/// perfectly distinguishable.
///
/// Quantum states are distinguishable exactly when their supports are
/// orthogonal; the support projectors (plus the leftover on the first
/// outcome) form the measurement. Classical and polytopic theories solve a
/// linear feasibility program over the effect-cone generators.
pub fn perfectly_distinguishable(theory: &Theory, states: &[ProcessRep]) -> Result<Option<Measurement>> {
    if states.len() < 2 {
        return Err(Error::Validation("need at least two states".into()));
    }
    let ty = common_type(states)?;
    let effects = match theory {
        Theory::Quantum => {
            let rhos = states.iter().map(quantum::density_of).collect::<Result<Vec<_>>>()?;
            let supports: Vec<CMatrix> = rhos.iter().map(support_projector).collect();
            for (i, p) in supports.iter().enumerate() {
                for (j, rho) in rhos.iter().enumerate() {
                    if i != j && tensor::trace(&(p * rho)).re > DISTINGUISH_TOL {
                        return Ok(None);
                    }
                }
            }
            let d = ty.levels;
            let mut ops = supports;
            let rest = ops.iter().fold(CMatrix::identity(d, d), |acc, p| acc - p);
            ops[0] += rest;
            ops.iter()
                .map(|e| quantum::effect_on(&((e + e.adjoint()) * tensor::c(0.5, 0.0)), states[0].outputs().to_vec()))
                .collect::<Result<Vec<_>>>()?
        }
        _ => {
            let gens = theory
                .effect_generators(&ty)?
                .ok_or_else(|| Error::Unsupported("no effect generators".into()))?;
            let Some(vectors) = lp_measurement(theory, &ty, &gens, states)? else {
                return Ok(None);
            };
            vectors
                .into_iter()
                .map(|v| ProcessRep::new(tensor::row(&v), states[0].outputs().to_vec(), Vec::new()))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let m = match Measurement::new(theory, effects) {
        Ok(m) => m,
        Err(Error::Validation(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if m.discrimination_residual(states) > DISTINGUISH_TOL {
        return Ok(None);
    }
    Ok(Some(m))
}

/// Effects `e_i = Σ_g λ_ig g` with `λ ≥ 0`, `e_i(ρ_j) = δ_ij`, `Σ e_i = u`.
fn lp_measurement(
    theory: &Theory,
    ty: &SystemType,
    gens: &[RVector],
    states: &[ProcessRep],
) -> Result<Option<Vec<RVector>>> {
    let (k, g, n) = (states.len(), gens.len(), ty.vec_dim);
    let vs: Vec<RVector> = states.iter().map(ProcessRep::as_state_vector).collect();
    let mut a = RMatrix::zeros(k * k + n, k * g);
    let mut b = RVector::zeros(k * k + n);
    for i in 0..k {
        for (j, vj) in vs.iter().enumerate() {
            let row = i * k + j;
            for (l, gen) in gens.iter().enumerate() {
                a[(row, i * g + l)] = gen.dot(vj);
            }
            b[row] = if i == j { 1.0 } else { 0.0 };
        }
    }
    let u = theory.unit_vector(ty)?;
    for r in 0..n {
        for i in 0..k {
            for (l, gen) in gens.iter().enumerate() {
                a[(k * k + r, i * g + l)] = gen[r];
            }
        }
        b[k * k + r] = u[r];
    }
    let Some(x) = lp::nonneg_solution(&a, &b)? else {
        return Ok(None);
    };
    Ok(Some(
        (0..k)
            .map(|i| gens.iter().enumerate().fold(RVector::zeros(n), |acc, (l, gen)| acc + gen * x[i * g + l]))
            .collect(),
    ))
}

/// Information-dimension result. `pairwise` is the largest set of pairwise
/// perfectly distinguishable candidates; `joint` the largest set with a
/// single measurement distinguishing all members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoDimension {
    pub pairwise: usize,
    pub witness: Vec<usize>,
    pub witness_jointly_distinguishable: bool,
    pub joint: usize,
    pub joint_witness: Vec<usize>,
    pub candidates: usize,
}

/// Default candidates: extreme states for classical and polytopic systems;
/// the computational basis plus `budget` seeded random pure states for
/// quantum systems.
pub fn default_candidates(theory: &Theory, ty: &SystemType, budget: usize, seed: u64) -> Result<Vec<ProcessRep>> {
    match theory {
        Theory::Quantum => {
            let d = ty.levels;
            let mut out = (0..d)
                .map(|i| quantum::state(&tensor::basis_projector(d, i), ty))
                .collect::<Result<Vec<_>>>()?;
            let mut rng = SeededRng::seed_from_u64(seed);
            for _ in 0..budget {
                out.push(quantum::state(&tensor::sample_pure(d, &mut rng), ty)?);
            }
            Ok(out)
        }
        _ => theory
            .extreme_states(ty)?
            .unwrap_or_default()
            .into_iter()
            .map(|v| ProcessRep::state(v, ty.clone()))
            .collect(),
    }
}

/// Largest pairwise perfectly distinguishable subset of the candidates
/// (exact maximum clique), plus the largest jointly distinguishable subset.
pub fn info_dimension(theory: &Theory, candidates: &[ProcessRep]) -> Result<InfoDimension> {
    let n = candidates.len();
    if n > CANDIDATE_LIMIT {
        return Err(Error::Budget { size: n, limit: CANDIDATE_LIMIT });
    }
    if n == 0 {
        return Err(Error::Validation("no candidates".into()));
    }
    common_type(candidates)?;
    let oracle = PairOracle::new(theory, candidates)?;
    let mut adj = vec![Bits::new(n); n];
    for i in 0..n {
        for j in i + 1..n {
            if oracle.distinguishable(i, j)? {
                adj[i].set(j);
                adj[j].set(i);
            }
        }
    }
    let witness = max_clique(&adj, |_| Ok(true))?;
    let witness_jointly_distinguishable = joint_ok(theory, candidates, &witness)?;
    let joint_witness = max_clique(&adj, |set| joint_ok(theory, candidates, set))?;
    Ok(InfoDimension {
        pairwise: witness.len(),
        witness,
        witness_jointly_distinguishable,
        joint: joint_witness.len(),
        joint_witness,
        candidates: n,
    })
}

fn joint_ok(theory: &Theory, candidates: &[ProcessRep], set: &[usize]) -> Result<bool> {
    if set.len() < 2 {
        return Ok(true);
    }
    let states: Vec<ProcessRep> = set.iter().map(|&i| candidates[i].clone()).collect();
    Ok(perfectly_distinguishable(theory, &states)?.is_some())
}

/// Pairwise test with per-state work done once.
enum PairOracle<'a> {
    Quantum { rhos: Vec<CMatrix>, supports: Vec<CMatrix> },
    Other { theory: &'a Theory, states: &'a [ProcessRep] },
}

impl<'a> PairOracle<'a> {
    fn new(theory: &'a Theory, states: &'a [ProcessRep]) -> Result<PairOracle<'a>> {
        Ok(match theory {
            Theory::Quantum => {
                let rhos = states.iter().map(quantum::density_of).collect::<Result<Vec<_>>>()?;
                let supports = rhos.iter().map(support_projector).collect();
                PairOracle::Quantum { rhos, supports }
            }
            _ => PairOracle::Other { theory, states },
        })
    }

    fn distinguishable(&self, i: usize, j: usize) -> Result<bool> {
        match self {
            PairOracle::Quantum { rhos, supports } => Ok(tensor::trace(&(&supports[i] * &rhos[j])).re
                <= DISTINGUISH_TOL
                && tensor::trace(&(&supports[j] * &rhos[i])).re <= DISTINGUISH_TOL),
            PairOracle::Other { theory, states } => {
                Ok(perfectly_distinguishable(theory, &[states[i].clone(), states[j].clone()])?.is_some())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
}

/// Exact maximum clique by branch and bound. Vertices are tried in index
/// order and the incumbent is only replaced by a strictly larger clique, so
/// the lexicographically first maximum clique is returned. `accept` prunes
/// cliques that fail a monotone side condition.
fn max_clique<F>(adj: &[Bits], mut accept: F) -> Result<Vec<usize>>
where
    F: FnMut(&[usize]) -> Result<bool>,
{
    let n = adj.len();
    let mut all = Bits::new(n);
    for i in 0..n {
        all.set(i);
    }
    let mut best: Vec<usize> = if n > 0 { vec![0] } else { Vec::new() };
    let mut current = Vec::new();
    expand(adj, &mut current, all, &mut best, &mut accept)?;
    Ok(best)
}

fn expand<F>(adj: &[Bits], current: &mut Vec<usize>, mut pool: Bits, best: &mut Vec<usize>, accept: &mut F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<bool>,
{
    while let Some(v) = pool.first() {
        if current.len() + pool.count() <= best.len() {
            return Ok(());
        }
        pool.clear(v);
        current.push(v);
        if accept(current)? {
            if current.len() > best.len() {
                *best = current.clone();
            }
            let next = pool.and(&adj[v]);
            expand(adj, current, next, best, accept)?;
        }
        current.pop();
    }
    Ok(())
}

/// `σ = (μ − pφ)/(1 − p)` when that is a valid state.
pub fn decompose_against(theory: &Theory, mu: &ProcessRep, phi: &ProcessRep, p: f64) -> Result<Option<ProcessRep>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Validation(format!("weight {p} is not in (0, 1)")));
    }
    let ty = mu.output_type()?;
    if phi.output_type()? != ty {
        return Err(Error::Validation("states have different types".into()));
    }
    let sigma = (mu.as_state_vector() - phi.as_state_vector() * p) / (1.0 - p);
    if !theory.is_state(&sigma, &ty) {
        return Ok(None);
    }
    Ok(Some(ProcessRep::new(tensor::col(&sigma), Vec::new(), mu.outputs().to_vec())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{c, CVector};

    fn q(d: usize) -> SystemType {
        SystemType::quantum(d)
    }

    fn qstate(rho: &CMatrix) -> ProcessRep {
        quantum::state(rho, &q(rho.nrows())).unwrap()
    }

    fn plus() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        tensor::projector(&CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]))
    }

    #[test]
    fn quantum_purity() {
        let zero = qstate(&tensor::basis_projector(2, 0));
        assert!(is_pure(&Theory::Quantum, &zero).unwrap().is_pure());
        let mu = Theory::Quantum.max_mixed(&q(2)).unwrap();
        let Purity::Mixed(w) = is_pure(&Theory::Quantum, &mu).unwrap() else { panic!("I/2 is mixed") };
        assert_eq!(w.weights.len(), 2);
        assert!(w.weights.iter().all(|x| (x - 0.5).abs() < 1e-12));
        assert!(w.is_valid_for(&mu));
        for comp in &w.components {
            assert!(is_pure(&Theory::Quantum, comp).unwrap().is_pure());
        }
    }

    #[test]
    fn classical_product_with_mixed_factor() {
        let a = ProcessRep::state(RVector::from_vec(vec![1.0, 0.0]), SystemType::classical(2)).unwrap();
        let qv = ProcessRep::state(RVector::from_vec(vec![0.25, 0.0, 0.75]), SystemType::classical(3)).unwrap();
        let s = a.tensor(&qv).unwrap();
        let Purity::Mixed(w) = is_pure(&Theory::Classical, &s).unwrap() else { panic!("mixed") };
        assert_eq!(w.weights, vec![0.25, 0.75]);
        assert!(w.is_valid_for(&s));
        assert!(is_pure(&Theory::Classical, &a.tensor(&a).unwrap()).unwrap().is_pure());
    }

    #[test]
    fn gbit_purity() {
        let g = Theory::gbit();
        let ty = g.system("gbit").unwrap();
        let vertex = ProcessRep::state(RVector::from_vec(vec![1.0, 1.0, -1.0]), ty.clone()).unwrap();
        assert!(is_pure(&g, &vertex).unwrap().is_pure());
        let edge = ProcessRep::state(RVector::from_vec(vec![1.0, 1.0, 0.0]), ty.clone()).unwrap();
        let Purity::Mixed(w) = is_pure(&g, &edge).unwrap() else { panic!("mixed") };
        assert!(w.is_valid_for(&edge));
        let outside = ProcessRep::state(RVector::from_vec(vec![1.0, 2.0, 0.0]), ty).unwrap();
        assert!(matches!(is_pure(&g, &outside), Err(Error::State(_))));
    }

    #[test]
    fn quantum_distinguishability() {
        let states = [qstate(&tensor::basis_projector(2, 0)), qstate(&tensor::basis_projector(2, 1))];
        let m = perfectly_distinguishable(&Theory::Quantum, &states).unwrap().unwrap();
        assert!(m.discrimination_residual(&states) < 1e-12);
        let e0 = quantum::effect_operator(&m.effects[0]).unwrap();
        assert!(tensor::frobenius_diff(&e0, &tensor::basis_projector(2, 0)) < 1e-12);

        let overlapping = [qstate(&tensor::basis_projector(2, 0)), qstate(&plus())];
        assert!(perfectly_distinguishable(&Theory::Quantum, &overlapping).unwrap().is_none());
        // fidelity cross-check
        let f = tensor::trace(&(tensor::basis_projector(2, 0) * plus())).re;
        assert!(f > 0.0);
    }

    #[test]
    fn orthogonal_mixed_supports() {
        let mut a = CMatrix::zeros(3, 3);
        a[(0, 0)] = c(0.5, 0.0);
        a[(1, 1)] = c(0.5, 0.0);
        let states = [qstate(&a), qstate(&tensor::basis_projector(3, 2))];
        let m = perfectly_distinguishable(&Theory::Quantum, &states).unwrap().unwrap();
        assert!(m.discrimination_residual(&states) < 1e-12);
    }

    #[test]
    fn classical_vertices_are_distinguished_by_indicators() {
        let ty = SystemType::classical(4);
        let states = default_candidates(&Theory::Classical, &ty, 0, 0).unwrap();
        let m = perfectly_distinguishable(&Theory::Classical, &states).unwrap().unwrap();
        for (i, e) in m.effects.iter().enumerate() {
            let v = e.as_effect_vector();
            for j in 0..4 {
                assert!((v[j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn gbit_pairs() {
        let g = Theory::gbit();
        let ty = g.system("gbit").unwrap();
        let v = default_candidates(&g, &ty, 0, 0).unwrap();
        // every pair of square vertices, adjacent or opposite, can be told apart
        for i in 0..4 {
            for j in i + 1..4 {
                let m = perfectly_distinguishable(&g, &[v[i].clone(), v[j].clone()]).unwrap();
                assert!(m.is_some(), "{i} {j}");
            }
        }
        assert!(perfectly_distinguishable(&g, &v[..3]).unwrap().is_none());
    }

    #[test]
    fn info_dimensions() {
        let c4 = SystemType::classical(4);
        let r = info_dimension(&Theory::Classical, &default_candidates(&Theory::Classical, &c4, 0, 0).unwrap()).unwrap();
        assert_eq!((r.pairwise, r.joint), (4, 4));
        assert!(r.witness_jointly_distinguishable);

        let cands = default_candidates(&Theory::Quantum, &q(3), 200, 42).unwrap();
        let r = info_dimension(&Theory::Quantum, &cands).unwrap();
        assert_eq!((r.pairwise, r.joint), (3, 3));
        assert_eq!(r.witness, vec![0, 1, 2]);

        let g = Theory::gbit();
        let ty = g.system("gbit").unwrap();
        let r = info_dimension(&g, &default_candidates(&g, &ty, 0, 0).unwrap()).unwrap();
        assert_eq!(r.pairwise, 4);
        assert_eq!(r.joint, 2);
        assert!(!r.witness_jointly_distinguishable);
    }

    #[test]
    fn candidate_budget() {
        let cands = default_candidates(&Theory::Quantum, &q(2), CANDIDATE_LIMIT, 1).unwrap();
        assert!(matches!(info_dimension(&Theory::Quantum, &cands), Err(Error::Budget { .. })));
    }

    #[test]
    fn clique_tie_break_is_lexicographic() {
        // two triangles {1,2,3} and {0,4,5}; the one containing 0 wins
        let mut adj = vec![Bits::new(6); 6];
        for (a, b) in [(1, 2), (2, 3), (1, 3), (0, 4), (4, 5), (0, 5)] {
            adj[a].set(b);
            adj[b].set(a);
        }
        assert_eq!(max_clique(&adj, |_| Ok(true)).unwrap(), vec![0, 4, 5]);
    }

    #[test]
    fn decompositions() {
        let mu = Theory::Quantum.max_mixed(&q(2)).unwrap();
        let zero = qstate(&tensor::basis_projector(2, 0));
        let sigma = decompose_against(&Theory::Quantum, &mu, &zero, 0.5).unwrap().unwrap();
        let rho = quantum::density_of(&sigma).unwrap();
        assert!(tensor::frobenius_diff(&rho, &tensor::basis_projector(2, 1)) < 1e-12);
        assert!(decompose_against(&Theory::Quantum, &mu, &zero, 0.9).unwrap().is_none());
        assert!(decompose_against(&Theory::Quantum, &mu, &zero, 1.0).is_err());

        let mut rng = tensor::rng_from_seed(4);
        for d in 2..=5 {
            let mu = Theory::Quantum.max_mixed(&q(d)).unwrap();
            let phi = qstate(&tensor::sample_pure(d, &mut rng));
            let p = 1.0 / d as f64;
            let sigma = decompose_against(&Theory::Quantum, &mu, &phi, p).unwrap().unwrap();
            let back = phi.as_state_vector() * p + sigma.as_state_vector() * (1.0 - p);
            assert!((back - mu.as_state_vector()).norm() < 1e-10);
            assert!(tensor::min_eigenvalue(&quantum::density_of(&sigma).unwrap()) >= -1e-9);
        }
    }
}
