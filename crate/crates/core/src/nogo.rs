//! Numerical certification of the no-go argument on quantum instances.
//!
//! Each `verify_*` function replays one step of the argument on concrete
//! states and returns checks with residuals. The diagrammatic and algebraic
//! presentations of the argument use the same equations, so both are covered
//! by the same computations.
//!
//! Uniqueness of the invariant state is verified through the Heisenberg-Weyl
//! twirl rather than the purification argument: the conclusion is checked,
//! the proof route is not mechanized.

use std::thread;

use rand::SeedableRng;
use serde_json::json;

use crate::convex;
use crate::decoherence::{self, DecoherenceCandidate, MAP_TOL};
use crate::error::{Error, Result};
use crate::report::{round12, Check, VerificationReport};
use crate::tensor::{self, c, CMatrix, CVector, RMatrix, RVector, SeededRng};
use crate::theory::{purification, quantum, random, ProcessRep, SystemType, Theory};

/// Construction residuals.
pub const CONSTRUCTION_TOL: f64 = 1e-9;
/// Reversible maps recovered through two SVDs.
pub const RECOVERED_TOL: f64 = 1e-8;
/// Exact identities on closed-form states.
pub const EXACT_TOL: f64 = 1e-12;
pub const INVARIANCE_TOL: f64 = 1e-10;

const A_LOCAL: &str = "hyperdecoherence leaves sub-theory bipartite states invariant";
const A_BELL: &str = "marginals of the Bell state are maximally mixed";
const A_MU: &str = "maximally mixed state is invariant under reversible transformations";
const A_MU_ROUTE: &str = "reversible map on one side of the Bell state moves to the other side";
const A_DECOMP: &str = "every pure state arises in a decomposition of the maximally mixed state";
const A_TRANSITIVE: &str = "a reversible transformation connects any two pure states";
const A_STEER: &str = "the Bell state steers to any pure state";
const A_IDENTITY: &str = "hyperdecoherence acts as the identity on all states";
const A_TWIRL: &str = "there exists a unique invariant state";
const A_PRODUCT: &str = "parallel composition of unique invariant states is invariant";
const A_PURE_EFFECT: &str = "every pure state has a pure effect giving probability one";
const A_CONSTANT: &str = "pure effects give the same probability on the invariant state";
const A_COROLLARY: &str = "invariant state decomposes against any pure state with weight 1/d";
const A_WITNESS: &str = "post-classical theory has more distinguishable states than its sub-theory";

/// Which bipartite states the local invariance check samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSet {
    /// Arbitrary quantum states on `q_d ⊗ A`; the Bell state is sampled first.
    Full,
    /// States of the candidate's own sub-theory, `(D ⊗ D) ψ`.
    SubTheory,
}

fn qt(d: usize) -> SystemType {
    SystemType::quantum(d)
}

fn require_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Validation(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(tag)
}

fn single_map(c: &DecoherenceCandidate) -> Result<(&SystemType, &ProcessRep)> {
    if c.theory.id() != crate::theory::QUANTUM {
        return Err(Error::Unsupported("no-go checks need a quantum candidate".into()));
    }
    match c.maps.as_slice() {
        [m] => Ok((&m.system, &m.map)),
        _ => Err(Error::Unsupported("no-go checks take a candidate with a single map".into())),
    }
}

/// `(1 ⊗ D) v` from the product decomposition `v = Σ V_ij e_i ⊗ e_j`.
fn apply_second(v: &RVector, d_map: &RMatrix, n_first: usize) -> RVector {
    let n_second = d_map.ncols();
    let coeffs = RMatrix::from_row_iterator(n_first, n_second, v.iter().copied());
    let out = coeffs * d_map.transpose();
    RVector::from_row_iterator(out.len(), out.transpose().iter().copied())
}

/// `(1 ⊗ D) ψ = ψ` for sampled bipartite states `ψ` on `q_d ⊗ A`.
pub fn verify_local_invariance(c: &DecoherenceCandidate, d: usize, n_samples: usize, seed: u64) -> Result<Check> {
    verify_local_invariance_on(c, d, n_samples, seed, StateSet::Full)
}

pub fn verify_local_invariance_on(
    c: &DecoherenceCandidate,
    d: usize,
    n_samples: usize,
    seed: u64,
    states: StateSet,
) -> Result<Check> {
    require_dim(d)?;
    let (system, map) = single_map(c)?;
    let idem = decoherence::idempotence_residual(map);
    if idem > MAP_TOL {
        return Err(Error::Precondition(format!("candidate is not idempotent (residual {idem:.3e})")));
    }
    let d_map = map.matrix();
    let n_first = d * d;
    let first_map = match states {
        StateSet::Full => None,
        StateSet::SubTheory => {
            if system != &qt(d) {
                return Err(Error::Validation(format!("sub-theory states need d equal to the candidate's dimension {}", system.levels)));
            }
            Some(d_map)
        }
    };
    let mut outputs = vec![qt(d)];
    outputs.extend(map.inputs().iter().cloned());
    let mut samples: Vec<(String, RVector)> = Vec::new();
    if system.levels == d {
        let bell = quantum::bell_state(d)?;
        samples.push(("bell".into(), bell.as_state_vector()));
    }
    let mut rng = SeededRng::seed_from_u64(seed);
    for i in 0..n_samples {
        samples.push((format!("random-{i}"), random::random_pure_state(&Theory::Quantum, &outputs, &mut rng)?.as_state_vector()));
    }
    let mut worst = (0.0_f64, String::new());
    for (label, v) in samples {
        let v = match first_map {
            Some(m) => apply_second(&apply_first(&v, m, d_map.ncols()), d_map, n_first),
            None => v,
        };
        let r = (apply_second(&v, d_map, n_first) - &v).norm();
        if r > worst.0 || worst.1.is_empty() {
            worst = (r, label);
        }
    }
    Ok(Check::new("local-invariance", A_LOCAL, worst.0, CONSTRUCTION_TOL).with_witness(json!({
        "worst_state": worst.1,
        "states": match states { StateSet::Full => "full", StateSet::SubTheory => "sub-theory" },
    })))
}

/// `(D ⊗ 1) v` with `D` on the first factor.
fn apply_first(v: &RVector, d_map: &RMatrix, n_second: usize) -> RVector {
    let n_first = d_map.ncols();
    let coeffs = RMatrix::from_row_iterator(n_first, n_second, v.iter().copied());
    let out = d_map * coeffs;
    RVector::from_row_iterator(out.len(), out.transpose().iter().copied())
}

/// Largest deviation of the two marginals of `state` (on `q_d ⊗ q_d`) from
/// `I/d`, computed both by discarding through the unit effect and by partial
/// trace of the density matrix.
pub fn bell_marginal_residual(state: &ProcessRep, d: usize) -> Result<f64> {
    let q = qt(d);
    let u = Theory::Quantum.unit_effect(&q)?;
    let id = ProcessRep::identity(std::slice::from_ref(&q));
    let mu = CMatrix::identity(d, d) / c(d as f64, 0.0);
    let left = quantum::density_of(&state.then(&id.tensor(&u)?)?)?;
    let right = quantum::density_of(&state.then(&u.tensor(&id)?)?)?;
    let rho = quantum::density_of(state)?;
    let pt_left = tensor::partial_trace(&rho, &[d, d], &[0])?;
    let pt_right = tensor::partial_trace(&rho, &[d, d], &[1])?;
    Ok([left, right, pt_left, pt_right]
        .iter()
        .map(|m| tensor::frobenius_diff(m, &mu))
        .fold(0.0, f64::max))
}

pub fn verify_bell_marginals(d: usize) -> Result<Check> {
    require_dim(d)?;
    let r = bell_marginal_residual(&quantum::bell_state(d)?, d)?;
    Ok(Check::new("bell-marginals", A_BELL, r, EXACT_TOL))
}

/// The marginal check applied to `(1 − ε) Bell + ε |00⟩⟨00|`; it must fail.
pub fn perturbed_bell_marginals(d: usize, eps: f64) -> Result<Check> {
    require_dim(d)?;
    let bell = quantum::density_of(&quantum::bell_state(d)?)?;
    let zero = tensor::basis_projector(d * d, 0);
    let rho = bell * c(1.0 - eps, 0.0) + zero * c(eps, 0.0);
    let state = quantum::state_on(&rho, vec![qt(d), qt(d)])?;
    let r = bell_marginal_residual(&state, d)?;
    Ok(Check::new("bell-marginals/perturbed", A_BELL, r, EXACT_TOL).with_witness(json!({ "epsilon": eps })))
}

/// `G(I/d) = I/d` for sampled unitary channels, plus the purification route:
/// `T` with `(G ⊗ 1) Bell = (1 ⊗ T) Bell` recovered by connecting
/// purifications, which also reproduces the marginal identity.
pub fn verify_mu_invariance(d: usize, n_unitaries: usize, seed: u64) -> Result<VerificationReport> {
    require_dim(d)?;
    let q = qt(d);
    let mu = Theory::Quantum.max_mixed(&q)?;
    let bell = quantum::bell_state(d)?;
    let id = ProcessRep::identity(std::slice::from_ref(&q));
    let mut rng = SeededRng::seed_from_u64(seed);
    let (mut invariance, mut route, mut marginal, mut transpose_gap) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..n_unitaries.max(1) {
        let u = if i == 0 { CMatrix::identity(d, d) } else { tensor::sample_unitary(d, &mut rng) };
        let g = quantum::unitary_channel(&u, vec![q.clone()])?;
        invariance = invariance.max((g.matrix() * mu.as_state_vector() - mu.as_state_vector()).norm());

        let moved = bell.then(&g.tensor(&id)?)?;
        let t = quantum::connect_purifications(&moved, &bell)?;
        let transferred = bell.then(&id.tensor(&t)?)?;
        route = route.max((transferred.as_state_vector() - moved.as_state_vector()).norm());
        let discard = id.tensor(&Theory::Quantum.unit_effect(&q)?)?;
        marginal = marginal.max((transferred.then(&discard)?.as_state_vector() - mu.as_state_vector()).norm());
        let ut = quantum::unitary_channel(&u.transpose(), vec![q.clone()])?;
        transpose_gap = transpose_gap.max(tensor::rdiff(t.matrix(), ut.matrix()));
    }
    let mut r = VerificationReport::with_seed(seed);
    r.dims.push(d);
    r.push(
        Check::new("mu-invariance", A_MU, invariance, INVARIANCE_TOL)
            .with_witness(json!({ "unitaries": n_unitaries.max(1) })),
    );
    r.push(
        Check::new("mu-invariance/purification-route", A_MU_ROUTE, route.max(marginal), RECOVERED_TOL).with_witness(json!({
            "transfer_residual": round12(route),
            "marginal_residual": round12(marginal),
            "distance_to_transpose": round12(transpose_gap),
        })),
    );
    Ok(r)
}

/// Unitary `U` with `U|0⟩ = |φ⟩`.
pub fn unitary_from_zero(phi: &CVector, seed: u64) -> CMatrix {
    let d = phi.len();
    let mut rng = SeededRng::seed_from_u64(seed);
    let mut m = tensor::gaussian_matrix(d, d, &mut rng);
    m.set_column(0, phi);
    let mut q = m.qr().q();
    let overlap = (q.column(0).adjoint() * phi)[(0, 0)];
    let phase = overlap / c(overlap.norm(), 0.0);
    let col = q.column(0) * phase;
    q.set_column(0, &col);
    q
}

/// `I/d = (1/d) φ + (1 − 1/d) σ` with valid `σ` for sampled pure `φ`, each
/// reached from `|0⟩` by an explicit unitary; weights above `1/d` must fail.
pub fn verify_any_state_decomposition(d: usize, n_samples: usize, seed: u64) -> Result<VerificationReport> {
    require_dim(d)?;
    let q = qt(d);
    let th = Theory::Quantum;
    let mu = th.max_mixed(&q)?;
    let zero = tensor::basis_projector(d, 0);
    let p = 1.0 / d as f64;
    let mut rng = SeededRng::seed_from_u64(seed);
    let (mut valid, mut min_eig, mut transit, mut boundary_ok) = (0.0_f64, f64::INFINITY, 0.0_f64, true);
    let mut missing = 0usize;
    for i in 0..n_samples.max(1) {
        let v = tensor::sample_pure_vector(d, &mut rng);
        let phi_m = tensor::projector(&v);
        let u = unitary_from_zero(&v, sub_seed(seed, i as u64));
        transit = transit.max(tensor::frobenius_diff(&(&u * &zero * u.adjoint()), &phi_m));
        let phi = quantum::state(&phi_m, &q)?;
        match convex::decompose_against(&th, &mu, &phi, p)? {
            Some(sigma) => {
                let s = quantum::density_of(&sigma)?;
                min_eig = min_eig.min(tensor::min_eigenvalue(&s));
                let mix = (phi.as_state_vector() * p + sigma.as_state_vector() * (1.0 - p) - mu.as_state_vector()).norm();
                valid = valid.max(mix);
            }
            None => missing += 1,
        }
        boundary_ok &= convex::decompose_against(&th, &mu, &phi, p + 1e-6)?.is_none();
    }
    let residual = if missing > 0 { f64::INFINITY } else { valid.max(-min_eig).max(0.0) };
    let mut r = VerificationReport::with_seed(seed);
    r.dims.push(d);
    r.push(Check::new("any-state-decomposition", A_DECOMP, residual, CONSTRUCTION_TOL).with_witness(json!({
        "samples": n_samples.max(1),
        "min_eigenvalue": round12(min_eig),
        "missing": missing,
    })));
    r.push(Check::new("any-state-decomposition/transitivity", A_TRANSITIVE, transit, CONSTRUCTION_TOL));
    r.push(
        Check::flag("any-state-decomposition/boundary", A_DECOMP, boundary_ok)
            .with_witness(json!({ "weight": round12(p + 1e-6) })),
    );
    Ok(r)
}

/// Effect operator `E` on `q_d` obtained through purification: purify
/// `s = (1/d) φ ⊗ |0⟩⟨0| + (1 − 1/d) σ ⊗ |1⟩⟨1|`, connect the purification to
/// `Bell ⊗ χ`, and pull `e₀ ⊗ u` back through the reversible map.
pub fn steering_effect_by_purification(phi: &CMatrix) -> Result<CMatrix> {
    let d = phi.nrows();
    let q = qt(d);
    let th = Theory::Quantum;
    let mu = th.max_mixed(&q)?;
    let p = 1.0 / d as f64;
    let phi_state = quantum::state(phi, &q)?;
    let sigma = convex::decompose_against(&th, &mu, &phi_state, p)?
        .ok_or_else(|| Error::Numeric("pure state has no complementary decomposition".into()))?;
    let sigma_m = quantum::density_of(&sigma)?;
    let s = tensor::kron(phi, &tensor::basis_projector(2, 0)) * c(p, 0.0)
        + tensor::kron(&sigma_m, &tensor::basis_projector(2, 1)) * c(1.0 - p, 0.0);
    // purification on q_d ⊗ (q_2 ⊗ q_2d); row-major indices already group
    // the flag and purifying systems together
    let target = quantum::purify_vector(&s)?;
    let chi = tensor::ket(4, 0);
    let source = tensor::kron_vec(&quantum::bell_vector(d), &chi);
    let r = quantum::connect_pure_vectors(&target, &source, d, 4 * d)?;
    let flag0 = tensor::kron(&tensor::basis_projector(2, 0), &CMatrix::identity(2 * d, 2 * d));
    let pulled = r.adjoint() * flag0 * &r;
    let embed = tensor::kron(&CMatrix::identity(d, d), &CMatrix::from_column_slice(4, 1, chi.as_slice()));
    Ok(embed.adjoint() * pulled * embed)
}

/// `d · (1 ⊗ e_φ) Bell = φ` with `e_φ = Tr(φᵀ ·)` directly and through the
/// purification route, and agreement of the two effects.
pub fn verify_steering(d: usize, n_samples: usize, seed: u64) -> Result<VerificationReport> {
    require_dim(d)?;
    let q = qt(d);
    let bell = quantum::bell_state(d)?;
    let id = ProcessRep::identity(std::slice::from_ref(&q));
    let steer = |e: &ProcessRep| -> Result<CMatrix> {
        Ok(quantum::density_of(&bell.then(&id.tensor(e)?)?)? * c(d as f64, 0.0))
    };
    let mut rng = SeededRng::seed_from_u64(seed);
    let (mut direct, mut route, mut agree) = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..n_samples.max(1) {
        let phi = if i == 0 { tensor::basis_projector(d, 0) } else { tensor::sample_pure(d, &mut rng) };
        let e_phi = quantum::transpose_effect(&phi, &q)?;
        direct = direct.max(tensor::frobenius_diff(&steer(&e_phi)?, &phi));
        let op = steering_effect_by_purification(&phi)?;
        let e_route = quantum::effect(&op, &q)?;
        route = route.max(tensor::frobenius_diff(&steer(&e_route)?, &phi));
        agree = agree.max(tensor::frobenius_diff(&op, &phi.transpose()));
    }
    let mut r = VerificationReport::with_seed(seed);
    r.dims.push(d);
    r.push(Check::new("steering/direct", A_STEER, direct, CONSTRUCTION_TOL));
    r.push(Check::new("steering/purification", A_STEER, route, CONSTRUCTION_TOL));
    r.push(Check::new("steering/route-agreement", A_STEER, agree, RECOVERED_TOL));
    Ok(r)
}

/// Pure states spanning the operators on `C^d`: `|i⟩`, `|i⟩ + |j⟩` and
/// `|i⟩ + i|j⟩`.
pub fn spanning_pure_states(d: usize) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = (0..d).map(|i| tensor::basis_projector(d, i)).collect();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            for phase in [c(s, 0.0), c(0.0, s)] {
                let mut v = CVector::zeros(d);
                v[i] = c(s, 0.0);
                v[j] = phase;
                out.push(tensor::projector(&v));
            }
        }
    }
    out
}

/// Replays `D φ = d (D ⊗ e_φ) Bell = d (1 ⊗ e_φ) Bell = φ` on a spanning
/// set and then asserts `D = 1`. The candidate must first pass causality,
/// idempotence, local invariance and purity preservation.
pub fn verify_hyperdec_identity(c: &DecoherenceCandidate, d: usize) -> Result<VerificationReport> {
    verify_hyperdec_identity_seeded(c, d, 42)
}

pub fn verify_hyperdec_identity_seeded(cand: &DecoherenceCandidate, d: usize, seed: u64) -> Result<VerificationReport> {
    require_dim(d)?;
    let (system, map) = single_map(cand)?;
    if system != &qt(d) {
        return Err(Error::Validation(format!("candidate acts on {}, expected q{d}", system.label)));
    }
    let causal = Theory::Quantum.causality_residual(map)?;
    if causal > MAP_TOL {
        return Err(Error::Precondition(format!("causality fails (residual {causal:.3e})")));
    }
    let idem = decoherence::idempotence_residual(map);
    if idem > MAP_TOL {
        return Err(Error::Precondition(format!("idempotence fails (residual {idem:.3e})")));
    }
    let local = verify_local_invariance(cand, d, 10, seed)?;
    if !local.passed() {
        return Err(Error::Precondition(format!(
            "local invariance (1 ⊗ D) ψ = ψ fails (residual {:.3e}); the sub-theory is not the full quantum theory",
            local.residual
        )));
    }
    let defining = decoherence::check_candidate_with(cand, decoherence::CheckOptions { samples: 10, seed })?;
    if let Some(chk) = defining.get("purity-preservation").filter(|chk| !chk.passed()) {
        return Err(Error::Precondition(format!("purity preservation fails: {}", chk.name)));
    }

    let q = qt(d);
    let bell = quantum::bell_state(d)?;
    let id = ProcessRep::identity(std::slice::from_ref(&q));
    let scale = c(d as f64, 0.0);
    let (mut step1, mut step2, mut step3) = (0.0_f64, 0.0_f64, 0.0_f64);
    for phi in spanning_pure_states(d) {
        let e_phi = quantum::transpose_effect(&phi, &q)?;
        let d_phi = quantum::density_of(&quantum::state(&phi, &q)?.then(map)?)?;
        let with_d = quantum::density_of(&bell.then(&map.tensor(&e_phi)?)?)? * scale;
        let without = quantum::density_of(&bell.then(&id.tensor(&e_phi)?)?)? * scale;
        step1 = step1.max(tensor::frobenius_diff(&d_phi, &with_d));
        step2 = step2.max(tensor::frobenius_diff(&with_d, &without));
        step3 = step3.max(tensor::frobenius_diff(&without, &phi));
    }
    let n = map.matrix().nrows();
    let gap = tensor::rdiff(map.matrix(), &RMatrix::identity(n, n));
    let mut r = VerificationReport::with_seed(seed);
    r.dims.push(d);
    r.push(Check::new("hyperdec-identity/chain", A_IDENTITY, step1.max(step2).max(step3), CONSTRUCTION_TOL).with_witness(
        json!({
            "steering_linearity": round12(step1),
            "local_invariance": round12(step2),
            "steering": round12(step3),
            "spanning_states": d * d,
        }),
    ));
    r.push(Check::new("hyperdec-identity/matrix", A_IDENTITY, gap, CONSTRUCTION_TOL));
    Ok(r)
}

/// Heisenberg-Weyl operators `X^a Z^b`.
pub fn heisenberg_weyl(d: usize) -> Vec<CMatrix> {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let x = CMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let z = CMatrix::from_fn(d, d, |i, j| if i == j { c(0.0, omega * i as f64).exp() } else { c(0.0, 0.0) });
    let mut out = Vec::with_capacity(d * d);
    let mut xa = CMatrix::identity(d, d);
    for _ in 0..d {
        let mut zb = CMatrix::identity(d, d);
        for _ in 0..d {
            out.push(&xa * &zb);
            zb = &zb * &z;
        }
        xa = &xa * &x;
    }
    out
}

/// Group average `(1/d²) Σ W ρ W†` over the Heisenberg-Weyl group.
pub fn twirl(rho: &CMatrix) -> CMatrix {
    let d = rho.nrows();
    let group = heisenberg_weyl(d);
    let n = group.len() as f64;
    group.iter().fold(CMatrix::zeros(d, d), |acc, w| acc + w * rho * w.adjoint()) / c(n, 0.0)
}

pub fn twirl_channel(d: usize) -> Result<ProcessRep> {
    let kraus: Vec<CMatrix> = heisenberg_weyl(d).into_iter().map(|w| w / c(d as f64, 0.0)).collect();
    quantum::kraus_channel(vec![qt(d)], vec![qt(d)], &kraus)
}

/// Checks on `q_d` instantiating the invariant-state lemmas and their
/// corollary, plus the distinguishability witness on the post-classical
/// counterexample.
pub fn verify_appendix_b(d: usize, seed: u64) -> Result<VerificationReport> {
    require_dim(d)?;
    let q = qt(d);
    let th = Theory::Quantum;
    let mut rng = SeededRng::seed_from_u64(seed);
    let mut r = VerificationReport::with_seed(seed);
    r.dims.push(d);
    let mu_m = CMatrix::identity(d, d) / c(d as f64, 0.0);
    let mu = th.max_mixed(&q)?;

    let mut twirl_res = 0.0_f64;
    for i in 0..50 {
        let rho = tensor::sample_density(d, 1 + i % d, &mut rng);
        let expected = &mu_m * tensor::trace(&rho);
        twirl_res = twirl_res.max(tensor::frobenius_diff(&twirl(&rho), &expected));
    }
    r.push(
        Check::new("invariant-state/twirl-output", A_TWIRL, twirl_res, EXACT_TOL)
            .with_witness(json!({ "route": "conclusion verified by group average, proof route not mechanized" })),
    );
    let channel = twirl_channel(d)?;
    let n = channel.matrix().nrows();
    let fixed_dim = tensor::nullity(&(channel.matrix() - RMatrix::identity(n, n)), 1e-9);
    r.push(
        Check::new("invariant-state/twirl-fixed-points", A_TWIRL, (fixed_dim as f64 - 1.0).abs(), 0.0)
            .with_witness(json!({ "fixed_point_dimension": fixed_dim })),
    );
    let mu_fixed = (channel.matrix() * mu.as_state_vector() - mu.as_state_vector()).norm();
    let cp = (-tensor::min_eigenvalue(&quantum::choi(&channel)?)).max(0.0);
    let causal = th.causality_residual(&channel)?;
    r.push(Check::new("invariant-state/twirl-channel", A_TWIRL, cp.max(causal).max(mu_fixed), CONSTRUCTION_TOL));

    let mut product = 0.0_f64;
    for other in [2, d] {
        let joint = th.max_mixed(&SystemType::composite(&[q.clone(), qt(other)])?)?;
        let parts = tensor::rkron(
            &tensor::col(&mu.as_state_vector()),
            &tensor::col(&th.max_mixed(&qt(other))?.as_state_vector()),
        );
        product = product.max((tensor::col(&joint.as_state_vector()) - parts).norm());
    }
    r.push(Check::new("invariant-state/mu-product", A_PRODUCT, product, EXACT_TOL));

    let (mut extreme, mut one, mut constant) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let a = tensor::sample_pure(d, &mut rng);
        let effect = quantum::effect(&a, &q)?;
        let state = quantum::state(&a, &q)?;
        let valid = th.is_effect(&effect.as_effect_vector(), &q);
        extreme = extreme.max(tensor::frobenius_diff(&(&a * &a), &a)).max(if valid { 0.0 } else { 1.0 });
        let p1 = state.then(&effect)?.scalar().unwrap_or(f64::NAN);
        one = one.max((p1 - 1.0).abs());
        let p_mu = mu.then(&effect)?.scalar().unwrap_or(f64::NAN);
        constant = constant.max((p_mu - 1.0 / d as f64).abs());
    }
    r.push(
        Check::new("invariant-state/pure-effect", A_PURE_EFFECT, extreme.max(one), EXACT_TOL)
            .with_witness(json!({ "effects": 100, "projector_residual": round12(extreme), "probability_residual": round12(one) })),
    );
    r.push(
        Check::new("invariant-state/constant-on-mu", A_CONSTANT, constant, EXACT_TOL)
            .with_witness(json!({ "p_star": round12(1.0 / d as f64), "effects": 100 })),
    );

    let mut corollary = 0.0_f64;
    let p = 1.0 / d as f64;
    for _ in 0..50 {
        let a = quantum::state(&tensor::sample_pure(d, &mut rng), &q)?;
        corollary = match convex::decompose_against(&th, &mu, &a, p)? {
            Some(alpha) => corollary.max((-tensor::min_eigenvalue(&quantum::density_of(&alpha)?)).max(0.0)),
            None => f64::INFINITY,
        };
    }
    r.push(Check::new("invariant-state/corollary", A_COROLLARY, corollary, CONSTRUCTION_TOL).with_witness(json!({ "states": 50 })));
    r.extend(postclassical_witness()?);
    Ok(r)
}

/// On `1 ⊗ (q ∘ discard)` over `c2 ⊗ c2` with uniform `q`: the two parent
/// refinements of the sub-pure state `δ₀ ⊗ q` together with the other
/// sub-pure state `δ₁ ⊗ q` are three pairwise distinguishable states, one
/// more than the sub-theory's dimension.
pub fn postclassical_witness() -> Result<VerificationReport> {
    let cand = decoherence::postclassical_counterexample(2, &[0.5, 0.5])?;
    let th = Theory::Classical;
    let map = &cand.maps[0].map;
    let ports = map.inputs().to_vec();
    let point = |i: usize| -> Result<ProcessRep> {
        let mut v = RVector::zeros(4);
        v[i] = 1.0;
        ProcessRep::new(tensor::col(&v), Vec::new(), ports.clone())
    };
    let refinements = [point(0)?, point(1)?];
    let other = point(2)?.then(map)?;
    let states = [refinements[0].clone(), refinements[1].clone(), other];
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in i + 1..3 {
            let pair = [states[i].clone(), states[j].clone()];
            worst = worst.max(match convex::perfectly_distinguishable(&th, &pair)? {
                Some(m) => m.discrimination_residual(&pair),
                None => f64::INFINITY,
            });
        }
    }
    let sub_pure = cand.maps[0].map.matrix() * refinements[0].as_state_vector();
    let mixture = (refinements[0].as_state_vector() * 0.5 + refinements[1].as_state_vector() * 0.5 - &sub_pure).norm();
    let mut r = VerificationReport::new();
    r.push(
        Check::new("invariant-state/postclassical-witness", A_WITNESS, worst.max(mixture), convex::DISTINGUISH_TOL).with_witness(json!({
            "states": states.iter().map(|s| s.as_state_vector().iter().map(|x| round12(*x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "count": 3,
            "sub_theory_dimension": 2,
        })),
    );
    let defining = decoherence::check_candidate(&cand)?;
    let dim = defining
        .get("dimension-preservation")
        .ok_or_else(|| Error::Numeric("dimension check missing".into()))?;
    let w = dim.witness.clone().unwrap_or_default();
    let parent = w["parent"].as_u64().unwrap_or(0);
    let sub = w["sub_theory"].as_u64().unwrap_or(0);
    r.push(Check::flag("invariant-state/postclassical-dimension", A_WITNESS, parent == 4 && sub == 2).with_witness(w));
    Ok(r)
}

fn counterexample_fingerprint(name: &str, cand: &DecoherenceCandidate, seed: u64) -> Result<VerificationReport> {
    let defining = decoherence::check_candidate_with(cand, decoherence::CheckOptions { samples: 20, seed })?;
    let mut r = VerificationReport::new();
    for key in ["causal", "idempotent"] {
        if let Some(chk) = defining.get(key) {
            r.push(Check { name: format!("counterexample/{name}/{key}"), ..chk.clone() });
        }
    }
    for key in ["purity-preservation", "dimension-preservation"] {
        if let Some(chk) = defining.get(key) {
            r.push(
                Check::negative_control(format!("counterexample/{name}/{key}-fails"), chk.anchor.clone(), chk)
                    .with_witness(chk.witness.clone().unwrap_or_default()),
            );
        }
    }
    Ok(r)
}

fn suite_for_dim(d: usize, seed: u64) -> Result<VerificationReport> {
    let mut r = VerificationReport::new();
    let tag = |k: u64| sub_seed(seed, d as u64 * 100 + k);
    let q = qt(d);

    r.push(verify_bell_marginals(d)?);
    let perturbed = perturbed_bell_marginals(d, 0.1)?;
    r.push(Check::negative_control("negative-control/bell-perturbed", A_BELL, &perturbed).with_witness(perturbed.to_json()));
    r.extend(verify_mu_invariance(d, 100, tag(1))?);
    r.extend(verify_any_state_decomposition(d, 50, tag(2))?);
    r.extend(verify_steering(d, 50, tag(3))?);

    let identity = DecoherenceCandidate::identity(Theory::Quantum, &q)?;
    let dephasing = decoherence::dephasing_map(d, None)?;
    let mut chk = verify_local_invariance(&identity, d, 20, tag(4))?;
    chk.name = "local-invariance/identity".into();
    r.push(chk);
    let mut chk = verify_local_invariance_on(&dephasing, d, 20, tag(5), StateSet::SubTheory)?;
    chk.name = "local-invariance/dephasing-sub-theory".into();
    r.push(chk);
    let full = verify_local_invariance(&dephasing, d, 20, tag(5))?;
    r.push(Check::negative_control("negative-control/dephasing-local-invariance", A_LOCAL, &full).with_witness(full.to_json()));

    for mut chk in verify_hyperdec_identity_seeded(&identity, d, tag(6))?.checks {
        chk.name = chk.name.replace("hyperdec-identity/", "hyperdec-identity/identity-candidate/");
        r.push(chk);
    }
    let rejected = match verify_hyperdec_identity_seeded(&dephasing, d, tag(6)) {
        Err(Error::Precondition(msg)) => Some(msg),
        _ => None,
    };
    let ok = rejected.as_deref().is_some_and(|m| m.contains("local invariance"));
    r.push(Check::flag("hyperdec-identity/dephasing-rejected", A_IDENTITY, ok).with_witness(json!({ "error": rejected })));

    r.extend(verify_appendix_b(d, tag(7))?);
    r.extend(purification::check_purification_principle(&Theory::Quantum, &q, 20, tag(8))?);

    let uniform = vec![1.0 / d as f64; d];
    r.extend(counterexample_fingerprint("postclassical", &decoherence::postclassical_counterexample(d, &uniform)?, tag(9))?);
    let half = CMatrix::identity(d, d) / c(d as f64, 0.0);
    r.extend(counterexample_fingerprint("postquantum", &decoherence::postquantum_counterexample(d, &half)?, tag(10))?);
    Ok(r.prefixed(&format!("d{d}")))
}

/// Every check over the given dimensions, sorted by name. Dimensions run
/// concurrently; the result does not depend on scheduling.
pub fn run_nogo_suite(dims: &[usize], seed: u64) -> Result<VerificationReport> {
    if dims.is_empty() {
        return Err(Error::Usage("at least one dimension is required".into()));
    }
    for &d in dims {
        require_dim(d).map_err(|e| Error::Usage(e.to_string()))?;
    }
    let mut unique = dims.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let results: Vec<Result<VerificationReport>> = thread::scope(|s| {
        let handles: Vec<_> = unique.iter().map(|&d| s.spawn(move || suite_for_dim(d, seed))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Numeric("suite worker panicked".into()))))
            .collect()
    });
    let mut report = VerificationReport::with_seed(seed);
    report.dims = unique;
    for r in results {
        report.extend(r?);
    }
    report.sort_by_name();
    Ok(report)
}
