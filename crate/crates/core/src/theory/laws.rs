//! Sampled checks of the framework laws every theory must satisfy: unit-effect
//! normalization, convexity of states and probabilities, effect bounds, and
//! closure of transformations under composition.

use rand::{Rng, SeedableRng};

use crate::error::Result;
use crate::report::{Check, VerificationReport};
use crate::tensor::{self, SeededRng};

use super::{random, ProcessRep, SystemType, Theory};

pub const LAW_TOL: f64 = 1e-12;
pub const MEMBERSHIP_TOL: f64 = 1e-9;

fn prob(s: &ProcessRep, e: &ProcessRep) -> Result<f64> {
    Ok(s.then(e)?.scalar().unwrap_or(f64::NAN))
}

/// Runs the law checks on `n_samples` random states, effects and
/// transformations of `ty`. Parallel composition is sampled only where the
/// theory supports composite systems.
pub fn check_theory_laws(theory: &Theory, ty: &SystemType, n_samples: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = SeededRng::seed_from_u64(seed);
    let ports = ty.atoms();
    let u = theory.unit_effect_on(&ports)?;
    let composites = !matches!(theory, Theory::Polytope(_));
    let (mut norm, mut convex, mut mixture_state, mut bounds) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let (mut seq_valid, mut seq_causal, mut par_causal, mut interchange) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..n_samples.max(1) {
        let s1 = random::random_state(theory, &ports, &mut rng)?;
        let s2 = random::random_state(theory, &ports, &mut rng)?;
        let e = random::random_effect(theory, &ports, &mut rng)?;
        norm = norm.max((prob(&s1, &u)? - 1.0).abs());
        let lam: f64 = rng.random();
        let mix = s1.as_state_vector() * lam + s2.as_state_vector() * (1.0 - lam);
        let mixed = ProcessRep::new(tensor::col(&mix), Vec::new(), ports.clone())?;
        if !theory.is_state(&mix, ty) {
            mixture_state = 1.0;
        }
        convex = convex.max((prob(&mixed, &e)? - (lam * prob(&s1, &e)? + (1.0 - lam) * prob(&s2, &e)?)).abs());
        let p = prob(&s1, &e)?;
        bounds = bounds.max((-p).max(p - 1.0).max(0.0));

        let f = random::random_channel(theory, &ports, &ports, &mut rng)?;
        let g = random::random_channel(theory, &ports, &ports, &mut rng)?;
        let fg = f.then(&g)?;
        if !theory.is_transformation(&fg) {
            seq_valid = 1.0;
        }
        seq_causal = seq_causal.max(theory.causality_residual(&fg)?);
        if composites {
            let par = f.tensor(&g)?;
            par_causal = par_causal.max(theory.causality_residual(&par)?);
            // (f ⊗ g) ; (h ⊗ k) = (f ; h) ⊗ (g ; k)
            let h = random::random_channel(theory, &ports, &ports, &mut rng)?;
            let k = random::random_channel(theory, &ports, &ports, &mut rng)?;
            let lhs = f.tensor(&g)?.then(&h.tensor(&k)?)?;
            let rhs = f.then(&h)?.tensor(&g.then(&k)?)?;
            interchange = interchange.max(tensor::rdiff(lhs.matrix(), rhs.matrix()));
        }
    }
    let mut r = VerificationReport::with_seed(seed);
    r.dims.push(ty.levels);
    r.push(Check::new("laws/unit-normalization", "the unit effect gives one on every state", norm, LAW_TOL));
    r.push(Check::new("laws/convex-probabilities", "probabilities are linear in mixtures", convex, LAW_TOL));
    r.push(Check::new("laws/convex-states", "mixtures of states are states", mixture_state, 0.0));
    r.push(Check::new("laws/effect-bounds", "effects give probabilities in [0, 1]", bounds, MEMBERSHIP_TOL));
    r.push(Check::new("laws/closure-sequential", "transformations are closed under sequential composition", seq_valid.max(seq_causal), MEMBERSHIP_TOL));
    if composites {
        r.push(Check::new("laws/closure-parallel", "causal transformations compose in parallel to causal ones", par_causal, MEMBERSHIP_TOL));
        r.push(Check::new("laws/interchange", "sequential and parallel composition interchange", interchange, LAW_TOL));
    }
    Ok(r)
}
