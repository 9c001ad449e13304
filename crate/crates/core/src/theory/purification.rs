//! Numerical test of the purification principle on a theory.
//!
//! Quantum theory passes on sampled mixed states. Classical theory and the
//! gbit fail: every pure bipartite state available to them has pure marginals,
//! so no mixed state can arise as a marginal.

use serde_json::json;

use crate::error::Result;
use crate::report::{Check, VerificationReport};
use crate::tensor::{self, CMatrix, RMatrix, RVector};

use super::{quantum, SystemType, Theory};

pub const MARGINAL_TOL: f64 = 1e-10;
pub const RECOVERY_TOL: f64 = 1e-8;

const ANCHOR: &str = "every state is the marginal of a pure bipartite state, unique up to a reversible map on the purifier";

pub fn check_purification_principle(
    theory: &Theory,
    ty: &SystemType,
    n_samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::with_seed(seed);
    match theory {
        Theory::Quantum => quantum_checks(ty, n_samples, seed, &mut report)?,
        _ => report.push(polytope_check(theory, ty)?),
    }
    Ok(report)
}

fn quantum_checks(ty: &SystemType, n_samples: usize, seed: u64, report: &mut VerificationReport) -> Result<()> {
    let d = ty.levels;
    report.dims.push(d);
    let mut rng = tensor::rng_from_seed(seed);
    let (mut marginal, mut purity, mut recovery) = (0.0_f64, 0.0_f64, 0.0_f64);
    for k in 0..n_samples {
        let rank = if d > 1 { 2 + k % (d - 1) } else { 1 };
        let rho = tensor::sample_density(d, rank, &mut rng);
        let psi = quantum::purify_vector(&rho)?;
        let big = tensor::projector(&psi);
        let sv = big.clone().singular_values();
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        purity = purity.max(s.get(1).copied().unwrap_or(0.0) / s[0]);
        marginal = marginal.max(tensor::frobenius_diff(&tensor::partial_trace(&big, &[d, d], &[0])?, &rho));

        let u = tensor::sample_unitary(d, &mut rng);
        let moved = tensor::kron(&CMatrix::identity(d, d), &u) * &psi;
        let r = quantum::connect_pure_vectors(&psi, &moved, d, d)?;
        let back = tensor::kron(&CMatrix::identity(d, d), &r) * &moved;
        recovery = recovery.max(tensor::frobenius_diff(&tensor::projector(&back), &big));
    }
    report.push(Check::new("purification/marginal", ANCHOR, marginal, MARGINAL_TOL));
    report.push(Check::new("purification/pure", ANCHOR, purity, quantum::PURITY_TOL));
    report.push(Check::new("purification/uniqueness", ANCHOR, recovery, RECOVERY_TOL));
    Ok(())
}

/// Enumerates the pure bipartite states of `ty ⊗ ty` (products of extreme
/// states) and measures how far the maximally mixed target is from every
/// marginal they produce.
fn polytope_check(theory: &Theory, ty: &SystemType) -> Result<Check> {
    let extremes = theory.extreme_states(ty)?.unwrap_or_default();
    let unit = theory.unit_vector(ty)?;
    let n = extremes.len();
    let target = extremes.iter().fold(RVector::zeros(ty.vec_dim), |acc, v| acc + v) / n as f64;
    // marginal map (1 ⊗ u) on the bipartite space
    let marginal_map = tensor::rkron(&RMatrix::identity(ty.vec_dim, ty.vec_dim), &tensor::row(&unit));
    let mut best = f64::INFINITY;
    let mut all_marginals_pure = true;
    for a in &extremes {
        for b in &extremes {
            let joint = tensor::rkron(&tensor::col(a), &tensor::col(b));
            let marginal = (&marginal_map * joint).column(0).into_owned();
            all_marginals_pure &= extremes.iter().any(|e| (e - &marginal).norm() < 1e-12);
            best = best.min((marginal - &target).norm());
        }
    }
    let reason = if theory.id() == super::CLASSICAL {
        "pure bipartite classical states are point masses, whose marginals are point masses"
    } else {
        "pure bipartite states restricted to products of extreme states have extreme marginals"
    };
    Ok(Check::new("purification/exists", ANCHOR, best, MARGINAL_TOL).with_witness(json!({
        "mixed_state": target.iter().copied().collect::<Vec<f64>>(),
        "pure_bipartite_states_checked": n * n,
        "all_marginals_pure": all_marginals_pure,
        "reason": reason,
    })))
}
