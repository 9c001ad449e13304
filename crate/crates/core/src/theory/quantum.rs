//! Quantum theory in real coordinates.
//!
//! Operators on a Hilbert space of dimension `D` are stored as coordinate
//! vectors over the product Hermitian basis (see [`HermBasis`]). Complex
//! matrices only appear at the boundary: building processes from density
//! matrices, Kraus operators or unitaries, and reading them back.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tensor::{self, c, CMatrix, CVector, HermBasis, RMatrix, RVector};

use super::{ProcessRep, SystemType, PSD_TOL};

/// Relative singular-value threshold for the rank-1 (purity) test.
pub const PURITY_TOL: f64 = 1e-8;
/// Marginals of two purifications must agree to this Frobenius residual.
pub const COPURIFY_TOL: f64 = 1e-9;

pub fn hilbert_dims(types: &[SystemType]) -> Vec<usize> {
    types.iter().flat_map(|t| t.hilbert_dims()).collect()
}

pub fn basis_for(types: &[SystemType]) -> Arc<HermBasis> {
    HermBasis::shared(&hilbert_dims(types))
}

fn ensure_quantum(types: &[SystemType]) -> Result<()> {
    match types.iter().find(|t| !t.is_quantum()) {
        Some(t) => Err(Error::TheoryMismatch { left: "quantum".into(), right: t.theory.clone() }),
        None => Ok(()),
    }
}

/// Operator with the given real coordinates on `ty`.
pub fn density(v: &RVector, ty: &SystemType) -> Result<CMatrix> {
    ensure_quantum(std::slice::from_ref(ty))?;
    tensor::from_real(v, &basis_for(std::slice::from_ref(ty)))
}

/// Density matrix of a quantum state process.
pub fn density_of(state: &ProcessRep) -> Result<CMatrix> {
    if !state.inputs().is_empty() {
        return Err(Error::State("process has inputs".into()));
    }
    ensure_quantum(state.outputs())?;
    tensor::from_real(&state.as_state_vector(), &basis_for(state.outputs()))
}

/// Operator `E` with `e(ρ) = Tr(E ρ)` for a quantum effect process.
pub fn effect_operator(effect: &ProcessRep) -> Result<CMatrix> {
    if !effect.outputs().is_empty() {
        return Err(Error::Validation("process has outputs".into()));
    }
    ensure_quantum(effect.inputs())?;
    tensor::from_real(&effect.as_effect_vector(), &basis_for(effect.inputs()))
}

pub fn state(rho: &CMatrix, ty: &SystemType) -> Result<ProcessRep> {
    state_on(rho, vec![ty.clone()])
}

/// State with several output ports (e.g. a bipartite state as two wires).
pub fn state_on(rho: &CMatrix, outputs: Vec<SystemType>) -> Result<ProcessRep> {
    ensure_quantum(&outputs)?;
    let v = tensor::to_real(rho, &basis_for(&outputs))?;
    let n = v.len();
    ProcessRep::new(RMatrix::from_column_slice(n, 1, v.as_slice()), Vec::new(), outputs)
}

pub fn effect(e: &CMatrix, ty: &SystemType) -> Result<ProcessRep> {
    effect_on(e, vec![ty.clone()])
}

pub fn effect_on(e: &CMatrix, inputs: Vec<SystemType>) -> Result<ProcessRep> {
    ensure_quantum(&inputs)?;
    let v = tensor::to_real(e, &basis_for(&inputs))?;
    ProcessRep::new(tensor::row(&v), inputs, Vec::new())
}

/// Real matrix of a Hermiticity-preserving linear map given as a closure.
pub fn channel<F>(inputs: Vec<SystemType>, outputs: Vec<SystemType>, map: F) -> Result<ProcessRep>
where
    F: Fn(&CMatrix) -> CMatrix,
{
    ensure_quantum(&inputs)?;
    ensure_quantum(&outputs)?;
    let b_in = basis_for(&inputs);
    let b_out = basis_for(&outputs);
    let mut m = RMatrix::zeros(b_out.len(), b_in.len());
    for (l, x) in b_in.elements.iter().enumerate() {
        let y = map(x);
        if y.nrows() != b_out.dim || y.ncols() != b_out.dim {
            return Err(Error::Dimension(format!(
                "map produced a {}x{} operator, expected {}x{}",
                y.nrows(),
                y.ncols(),
                b_out.dim,
                b_out.dim
            )));
        }
        for (k, b) in b_out.elements.iter().enumerate() {
            m[(k, l)] = tensor::hs_inner(b, &y).re;
        }
    }
    ProcessRep::new(m, inputs, outputs)
}

pub fn kraus_channel(inputs: Vec<SystemType>, outputs: Vec<SystemType>, kraus: &[CMatrix]) -> Result<ProcessRep> {
    channel(inputs, outputs, |x| {
        kraus.iter().fold(CMatrix::zeros(0, 0), |acc, k| {
            let term = k * x * k.adjoint();
            if acc.is_empty() {
                term
            } else {
                acc + term
            }
        })
    })
}

/// Conjugation by a unitary, flagged reversible.
pub fn unitary_channel(u: &CMatrix, types: Vec<SystemType>) -> Result<ProcessRep> {
    let dim: usize = hilbert_dims(&types).iter().product();
    if u.nrows() != dim || u.ncols() != dim {
        return Err(Error::Dimension(format!("unitary is {}x{}, system needs {dim}", u.nrows(), u.ncols())));
    }
    let residual = tensor::frobenius_diff(&(u.adjoint() * u), &CMatrix::identity(dim, dim));
    if residual > 1e-9 {
        return Err(Error::Validation(format!("matrix is not unitary (residual {residual:.3e})")));
    }
    Ok(channel(types.clone(), types, |x| u * x * u.adjoint())?.with_reversible(true))
}

/// Applies the complex-linear extension of a quantum process to any operator.
pub fn apply(p: &ProcessRep, x: &CMatrix) -> Result<CMatrix> {
    let b_in = basis_for(p.inputs());
    let b_out = basis_for(p.outputs());
    if x.nrows() != b_in.dim || x.ncols() != b_in.dim {
        return Err(Error::Dimension("operator does not match process input".into()));
    }
    let coords = b_in.complex_coords(x);
    let mut out = CMatrix::zeros(b_out.dim, b_out.dim);
    for (k, b) in b_out.elements.iter().enumerate() {
        let mut acc = c(0.0, 0.0);
        for (l, z) in coords.iter().enumerate() {
            acc += z * p.matrix()[(k, l)];
        }
        out += b * acc;
    }
    Ok(out)
}

/// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
pub fn choi(p: &ProcessRep) -> Result<CMatrix> {
    let din: usize = hilbert_dims(p.inputs()).iter().product();
    let dout: usize = hilbert_dims(p.outputs()).iter().product();
    let b_in = basis_for(p.inputs());
    let b_out = basis_for(p.outputs());
    // images of the input basis elements
    let images: Vec<CMatrix> = (0..b_in.len())
        .map(|l| tensor::from_real(&p.matrix().column(l).into_owned(), &b_out))
        .collect::<Result<_>>()?;
    let mut j = CMatrix::zeros(din * dout, din * dout);
    for r in 0..din {
        for s in 0..din {
            let mut block = CMatrix::zeros(dout, dout);
            for (l, b) in b_in.elements.iter().enumerate() {
                // coefficient of B_l in |r⟩⟨s| is Tr(B_l |r⟩⟨s|) = (B_l)_{sr}
                let coef = b[(s, r)];
                if coef.norm() > 0.0 {
                    block += &images[l] * coef;
                }
            }
            j.view_mut((r * dout, s * dout), (dout, dout)).copy_from(&block);
        }
    }
    Ok(j)
}

/// Completely positive and trace non-increasing.
pub fn is_valid_quantum_process(p: &ProcessRep) -> bool {
    let Ok(j) = choi(p) else { return false };
    if tensor::min_eigenvalue(&j) < -PSD_TOL {
        return false;
    }
    // Φ†(I) ≤ I
    let b_in = basis_for(p.inputs());
    let mut u_out = RMatrix::zeros(1, p.matrix().nrows());
    u_out[(0, 0)] = (hilbert_dims(p.outputs()).iter().product::<usize>() as f64).sqrt();
    let dual = (u_out * p.matrix()).transpose();
    match tensor::from_real(&dual.column(0).into_owned(), &b_in) {
        Ok(op) => tensor::hermitian_eigen(&op).0[0] <= 1.0 + super::NORM_TOL,
        Err(_) => false,
    }
}

/// Dephasing in the computational basis, `ρ ↦ Σᵢ ⟨i|ρ|i⟩ |i⟩⟨i|`.
pub fn dephasing_channel(d: usize) -> Result<ProcessRep> {
    let kraus: Vec<CMatrix> = (0..d).map(|i| tensor::basis_projector(d, i)).collect();
    let ty = SystemType::quantum(d);
    kraus_channel(vec![ty.clone()], vec![ty], &kraus)
}

/// Dephasing in the orthonormal basis given by the columns of `basis`.
pub fn dephasing_channel_in(basis: &CMatrix) -> Result<ProcessRep> {
    let d = basis.nrows();
    let kraus: Vec<CMatrix> = (0..d)
        .map(|i| tensor::projector(&basis.column(i).into_owned()))
        .collect();
    let ty = SystemType::quantum(d);
    kraus_channel(vec![ty.clone()], vec![ty], &kraus)
}

/// `(1/√d) Σᵢ |ii⟩`.
pub fn bell_vector(d: usize) -> CVector {
    let mut v = CVector::zeros(d * d);
    let amp = c(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v[i * d + i] = amp;
    }
    v
}

/// The Bell state `(1/d) Σ_ij |ii⟩⟨jj|` as a state with two output wires.
pub fn bell_state(d: usize) -> Result<ProcessRep> {
    if d < 2 {
        return Err(Error::Dimension(format!("Bell state needs d ≥ 2, got {d}")));
    }
    let q = SystemType::quantum(d);
    state_on(&tensor::projector(&bell_vector(d)), vec![q.clone(), q])
}

pub fn is_pure_density(rho: &CMatrix) -> bool {
    let sv = rho.clone().singular_values();
    let mut s: Vec<f64> = sv.iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.len() < 2 || s[1] <= PURITY_TOL * s[0]
}

/// A unit vector `|ψ⟩` with `ρ = |ψ⟩⟨ψ|`, for a pure `ρ`.
pub fn pure_vector(rho: &CMatrix) -> Result<CVector> {
    if !is_pure_density(rho) {
        return Err(Error::State("state is not pure".into()));
    }
    let (vals, vecs) = tensor::hermitian_eigen(rho);
    let v = vecs.column(0).into_owned();
    Ok(v * c(vals[0].max(0.0).sqrt(), 0.0))
}

pub fn check_density(rho: &CMatrix) -> Result<()> {
    let dev = tensor::hermiticity_deviation(rho);
    if dev > tensor::HERMITICITY_TOL {
        return Err(Error::State(format!("not Hermitian (deviation {dev:.3e})")));
    }
    let tr = tensor::trace(rho).re;
    if (tr - 1.0).abs() > super::NORM_TOL {
        return Err(Error::State(format!("trace {tr} ≠ 1")));
    }
    let min = tensor::min_eigenvalue(rho);
    if min < -PSD_TOL {
        return Err(Error::State(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// `Σᵢ √pᵢ |vᵢ⟩|i⟩` from the eigendecomposition `ρ = Σᵢ pᵢ |vᵢ⟩⟨vᵢ|`.
pub fn purify_vector(rho: &CMatrix) -> Result<CVector> {
    check_density(rho)?;
    let d = rho.nrows();
    let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || rho[(i, j)].norm() == 0.0));
    let (vals, vecs) = if diagonal {
        ((0..d).map(|i| rho[(i, i)].re).collect(), CMatrix::identity(d, d))
    } else {
        tensor::hermitian_eigen(rho)
    };
    // eigenvalues at rounding level would turn into 1e-8 amplitudes
    let floor = 1e-13 * vals.iter().copied().fold(0.0, f64::max);
    let mut out = CVector::zeros(d * d);
    for (i, p) in vals.iter().enumerate() {
        let w = if *p > floor { p.sqrt() } else { 0.0 };
        if w == 0.0 {
            continue;
        }
        out += tensor::kron_vec(&vecs.column(i).into_owned(), &tensor::ket(d, i)) * c(w, 0.0);
    }
    Ok(out)
}

/// Purification on `ty ⊗ q_D` where `D` is the Hilbert dimension of `ty`.
pub fn purify(rho: &ProcessRep) -> Result<ProcessRep> {
    let ty = rho.output_type()?;
    let m = density_of(rho).map_err(|e| Error::State(e.to_string()))?;
    let psi = purify_vector(&m)?;
    state_on(&tensor::projector(&psi), vec![ty, SystemType::quantum(m.nrows())])
}

/// Row-major reshape of a bipartite vector into its `d1 × d2` coefficient
/// matrix, `ψ = Σ Ψ_ij |i⟩|j⟩`.
pub fn coefficient_matrix(psi: &CVector, d1: usize, d2: usize) -> CMatrix {
    CMatrix::from_fn(d1, d2, |i, j| psi[i * d2 + j])
}

/// Unitary `R` on the second factor with `(1 ⊗ R) ψ′ = ψ` (up to the global
/// phase already present in the inputs).
///
/// With `Ψ = Ψ′ Rᵀ` the unitary polar factor of `Ψ′† Ψ` is always a valid
/// choice, including degenerate Schmidt spectra where `R` is not unique.
pub fn connect_pure_vectors(psi: &CVector, psi_prime: &CVector, d1: usize, d2: usize) -> Result<CMatrix> {
    if psi.len() != d1 * d2 || psi_prime.len() != d1 * d2 {
        return Err(Error::Dimension("vectors do not match the bipartition".into()));
    }
    let a = coefficient_matrix(psi, d1, d2);
    let b = coefficient_matrix(psi_prime, d1, d2);
    let residual = tensor::frobenius_diff(&(&a * a.adjoint()), &(&b * b.adjoint()));
    if residual > COPURIFY_TOL {
        return Err(Error::NotCopurifying { residual });
    }
    let w = b.adjoint() * &a;
    let svd = w.svd(true, true);
    let (Some(left), Some(right_t)) = (svd.u, svd.v_t) else {
        return Err(Error::Numeric("SVD did not return singular vectors".into()));
    };
    let z = left * right_t;
    Ok(z.transpose())
}

/// Reversible transformation `R` on the purifying systems with
/// `(1 ⊗ R) ψ′ = ψ`. The first output of each state is the purified system,
/// the remaining outputs form the purifying system.
pub fn connect_purifications(psi: &ProcessRep, psi_prime: &ProcessRep) -> Result<ProcessRep> {
    let split = |p: &ProcessRep| -> Result<(Vec<SystemType>, Vec<SystemType>)> {
        let outs = p.outputs();
        if outs.len() < 2 {
            return Err(Error::State("expected a bipartite state".into()));
        }
        Ok((vec![outs[0].clone()], outs[1..].to_vec()))
    };
    let (first, rest) = split(psi)?;
    let (first2, rest2) = split(psi_prime)?;
    if super::flatten(&first) != super::flatten(&first2) || super::flatten(&rest) != super::flatten(&rest2) {
        return Err(Error::Composition("states have different type splits".into()));
    }
    let d1: usize = hilbert_dims(&first).iter().product();
    let d2: usize = hilbert_dims(&rest).iter().product();
    let v = pure_vector(&density_of(psi)?)?;
    let v_prime = pure_vector(&density_of(psi_prime)?)?;
    let r = connect_pure_vectors(&v, &v_prime, d1, d2)?;
    unitary_channel(&r, rest)
}

/// Effect `Tr(φᵀ ·)`.
pub fn transpose_effect(phi: &CMatrix, ty: &SystemType) -> Result<ProcessRep> {
    effect(&phi.transpose(), ty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{compose_par, compose_seq, Theory};
    use crate::tensor::{frobenius_diff, partial_trace, rng_from_seed, sample_density, sample_pure_vector, sample_unitary};

    fn q(d: usize) -> SystemType {
        SystemType::quantum(d)
    }

    fn half_identity(d: usize) -> CMatrix {
        CMatrix::identity(d, d) / c(d as f64, 0.0)
    }

    #[test]
    fn dephasing_fixes_zero_and_kills_coherence() {
        let deph = dephasing_channel(2).unwrap();
        let zero = state(&tensor::basis_projector(2, 0), &q(2)).unwrap();
        let out = compose_seq(&zero, &deph).unwrap();
        assert!(out.approx_eq(&zero, 1e-15));
        let plus = CMatrix::from_element(2, 2, c(0.5, 0.0));
        let out = density_of(&compose_seq(&state(&plus, &q(2)).unwrap(), &deph).unwrap()).unwrap();
        assert!(frobenius_diff(&out, &half_identity(2)) < 1e-15);
    }

    #[test]
    fn causality_of_channels() {
        let theory = Theory::Quantum;
        assert!(theory.is_causal(&dephasing_channel(3).unwrap()).unwrap());
        // ρ ↦ ⟨0|ρ|0⟩ |0⟩⟨0| loses trace
        let p0 = tensor::basis_projector(2, 0);
        let lossy = kraus_channel(vec![q(2)], vec![q(2)], &[p0]).unwrap();
        assert!(!theory.is_causal(&lossy).unwrap());
        assert!(theory.is_transformation(&lossy));
        let mut worst = 0.0_f64;
        for seed in 0..100 {
            let u = tensor::random_unitary(2 + (seed as usize) % 3, seed);
            let ch = unitary_channel(&u, vec![q(u.nrows())]).unwrap();
            assert!(ch.is_reversible());
            worst = worst.max(theory.causality_residual(&ch).unwrap());
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn choi_of_identity_is_unnormalized_bell() {
        let id = ProcessRep::identity(&[q(2)]);
        let j = choi(&id).unwrap();
        let expected = tensor::projector(&bell_vector(2)) * c(2.0, 0.0);
        assert!(frobenius_diff(&j, &expected) < 1e-14);
        assert!(is_valid_quantum_process(&id));
        let transpose = channel(vec![q(2)], vec![q(2)], |x| x.transpose()).unwrap();
        assert!(!is_valid_quantum_process(&transpose));
    }

    #[test]
    fn product_of_pure_states_is_pure() {
        let mut rng = rng_from_seed(4);
        let a = tensor::projector(&sample_pure_vector(2, &mut rng));
        let b = tensor::projector(&sample_pure_vector(3, &mut rng));
        let ab = compose_par(&state(&a, &q(2)).unwrap(), &state(&b, &q(3)).unwrap()).unwrap();
        let rho = density_of(&ab).unwrap();
        assert!(is_pure_density(&rho));
        assert!(frobenius_diff(&rho, &tensor::kron(&a, &b)) < 1e-12);
    }

    #[test]
    fn bell_marginals_and_rank() {
        assert!(matches!(bell_state(1), Err(Error::Dimension(_))));
        for d in 2..=5 {
            let rho = density_of(&bell_state(d).unwrap()).unwrap();
            assert!(is_pure_density(&rho));
            for keep in [0usize, 1] {
                let m = partial_trace(&rho, &[d, d], &[keep]).unwrap();
                assert!(frobenius_diff(&m, &half_identity(d)) < 1e-12);
            }
        }
        // (1/2) Σ_ij |ii⟩⟨jj|
        let rho = density_of(&bell_state(2).unwrap()).unwrap();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((rho[(i, j)] - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn composite_bell_is_reordered_product() {
        // Bell(d1) ⊗ Bell(d2) is ordered A1 B1 A2 B2; moving to A1 A2 B1 B2 gives Bell(d1 d2)
        for (d1, d2) in [(2, 2), (2, 3)] {
            let product = tensor::kron_vec(&bell_vector(d1), &bell_vector(d2));
            // explicit index shuffle as the oracle
            let dims = [d1, d1, d2, d2];
            let total = d1 * d1 * d2 * d2;
            let mut reordered = CVector::zeros(total);
            for a1 in 0..d1 {
                for a2 in 0..d1 {
                    for b1 in 0..d2 {
                        for b2 in 0..d2 {
                            let old = ((a1 * d1 + a2) * d2 + b1) * d2 + b2;
                            let new = ((a1 * d2 + b1) * d1 + a2) * d2 + b2;
                            reordered[new] = product[old];
                        }
                    }
                }
            }
            assert!(tensor::vdiff(&reordered, &bell_vector(d1 * d2)) < 1e-14);
            let perm = tensor::to_complex(&tensor::permutation_matrix(&dims, &[0, 2, 1, 3]));
            assert!(tensor::vdiff(&(perm * product), &bell_vector(d1 * d2)) < 1e-14);
        }
    }

    #[test]
    fn purification_round_trip() {
        let mut rng = rng_from_seed(8);
        let mut worst = 0.0_f64;
        for k in 0..100 {
            let d = 2 + k % 2;
            let rho = sample_density(d, 1 + k % d, &mut rng);
            let purified = purify(&state(&rho, &q(d)).unwrap()).unwrap();
            let big = density_of(&purified).unwrap();
            assert!(is_pure_density(&big));
            worst = worst.max(frobenius_diff(&partial_trace(&big, &[d, d], &[0]).unwrap(), &rho));
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn purify_diagonal_state() {
        let (p0, p1) = (0.3_f64, 0.7_f64);
        let rho = CMatrix::from_diagonal(&CVector::from_vec(vec![c(p0, 0.0), c(p1, 0.0)]));
        let v = purify_vector(&rho).unwrap();
        // √p₀|00⟩ + √p₁|11⟩
        let mut expected = CVector::zeros(4);
        expected[0] = c(p0.sqrt(), 0.0);
        expected[3] = c(p1.sqrt(), 0.0);
        assert!(tensor::vdiff(&v, &expected) < 1e-15);
    }

    #[test]
    fn purify_pure_state_is_a_product() {
        let mut rng = rng_from_seed(21);
        let psi = sample_pure_vector(3, &mut rng);
        let v = purify_vector(&tensor::projector(&psi)).unwrap();
        let big = tensor::projector(&v);
        let anc = partial_trace(&big, &[3, 3], &[1]).unwrap();
        assert!(is_pure_density(&anc));
        assert!(frobenius_diff(&big, &tensor::kron(&tensor::projector(&psi), &anc)) < 1e-12);
    }

    #[test]
    fn purify_max_mixed_is_bell_up_to_local_unitary() {
        let d = 3;
        let v = purify_vector(&half_identity(d)).unwrap();
        let r = connect_pure_vectors(&bell_vector(d), &v, d, d).unwrap();
        let moved = tensor::kron(&CMatrix::identity(d, d), &r) * &v;
        assert!(frobenius_diff(&tensor::projector(&moved), &tensor::projector(&bell_vector(d))) < 1e-12);
    }

    #[test]
    fn purify_rejects_invalid_state() {
        let bad = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.2, 0.0), c(-0.2, 0.0)]));
        assert!(matches!(purify_vector(&bad), Err(Error::State(_))));
    }

    #[test]
    fn connect_recovers_random_local_unitary() {
        let mut rng = rng_from_seed(13);
        let mut worst = 0.0_f64;
        for k in 0..40 {
            let d = 2 + k % 3;
            let psi = purify_vector(&sample_density(d, 1 + k % d, &mut rng)).unwrap();
            let u = sample_unitary(d, &mut rng);
            let psi_prime = tensor::kron(&CMatrix::identity(d, d), &u) * &psi;
            let r = connect_pure_vectors(&psi, &psi_prime, d, d).unwrap();
            assert!(frobenius_diff(&(r.adjoint() * &r), &CMatrix::identity(d, d)) < 1e-10);
            let back = tensor::kron(&CMatrix::identity(d, d), &r) * &psi_prime;
            worst = worst.max(frobenius_diff(&tensor::projector(&back), &tensor::projector(&psi)));
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn connect_identical_gives_identity() {
        let psi = purify_vector(&random_density_3()).unwrap();
        let r = connect_pure_vectors(&psi, &psi, 3, 3).unwrap();
        assert!(frobenius_diff(&r, &CMatrix::identity(3, 3)) < 1e-10);
    }

    fn random_density_3() -> CMatrix {
        tensor::random_density(3, 3, 77)
    }

    #[test]
    fn connect_bell_and_flipped_bell() {
        let x = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let bell = bell_vector(2);
        let flipped = tensor::kron(&CMatrix::identity(2, 2), &x) * &bell;
        let r = connect_pure_vectors(&bell, &flipped, 2, 2).unwrap();
        // R = X up to a global phase
        let phase = r[(0, 1)];
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        assert!(frobenius_diff(&r, &(&x * phase)) < 1e-10);
    }

    #[test]
    fn connect_rejects_different_marginals() {
        let a = purify_vector(&half_identity(2)).unwrap();
        let b = purify_vector(&tensor::random_density(2, 2, 3)).unwrap();
        assert!(matches!(connect_pure_vectors(&a, &b, 2, 2), Err(Error::NotCopurifying { .. })));
    }

    #[test]
    fn connect_purification_processes() {
        let d = 2;
        let rho = tensor::random_density(d, 2, 31);
        let psi = purify(&state(&rho, &q(d)).unwrap()).unwrap();
        let u = tensor::random_unitary(d, 5);
        let shift = compose_par(&ProcessRep::identity(&[q(d)]), &unitary_channel(&u, vec![q(d)]).unwrap()).unwrap();
        let psi_prime = compose_seq(&psi, &shift).unwrap();
        let r = connect_purifications(&psi, &psi_prime).unwrap();
        assert!(r.is_reversible());
        let back = compose_seq(&psi_prime, &compose_par(&ProcessRep::identity(&[q(d)]), &r).unwrap()).unwrap();
        assert!(back.approx_eq(&psi, 1e-8));
    }
}
