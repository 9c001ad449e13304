//! Seeded sampling of valid processes for property checks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{self, c, CMatrix, RMatrix, RVector};

use super::{quantum, total_dim, ProcessRep, SystemType, Theory};

fn probability_vector(n: usize, rng: &mut impl Rng) -> RVector {
    // exponential spacings give a uniform point on the simplex
    let v = RVector::from_fn(n, |_, _| -(1.0 - rng.random::<f64>()).ln());
    let s = v.sum();
    v / s
}

pub fn random_state(theory: &Theory, outputs: &[SystemType], rng: &mut impl Rng) -> Result<ProcessRep> {
    match theory {
        Theory::Quantum => {
            let d: usize = quantum::hilbert_dims(outputs).iter().product();
            let rank = rng.random_range(1..=d);
            quantum::state_on(&tensor::sample_density(d, rank, rng), outputs.to_vec())
        }
        Theory::Classical => {
            let p = probability_vector(total_dim(outputs), rng);
            ProcessRep::new(RMatrix::from_column_slice(p.len(), 1, p.as_slice()), Vec::new(), outputs.to_vec())
        }
        Theory::Polytope(_) => {
            let ty = single(outputs)?;
            let extremes = theory.extreme_states(ty)?.unwrap_or_default();
            let w = probability_vector(extremes.len(), rng);
            let v = extremes.iter().zip(w.iter()).fold(RVector::zeros(ty.vec_dim), |acc, (x, &wi)| acc + x * wi);
            ProcessRep::state(v, ty.clone())
        }
    }
}

pub fn random_pure_state(theory: &Theory, outputs: &[SystemType], rng: &mut impl Rng) -> Result<ProcessRep> {
    match theory {
        Theory::Quantum => {
            let d: usize = quantum::hilbert_dims(outputs).iter().product();
            quantum::state_on(&tensor::sample_pure(d, rng), outputs.to_vec())
        }
        _ => {
            let ty = SystemType::composite(outputs)?;
            let extremes = match theory {
                Theory::Classical => theory.extreme_states(&ty)?.unwrap_or_default(),
                _ => theory.extreme_states(single(outputs)?)?.unwrap_or_default(),
            };
            let v = extremes[rng.random_range(0..extremes.len())].clone();
            ProcessRep::new(RMatrix::from_column_slice(v.len(), 1, v.as_slice()), Vec::new(), outputs.to_vec())
        }
    }
}

pub fn random_effect(theory: &Theory, inputs: &[SystemType], rng: &mut impl Rng) -> Result<ProcessRep> {
    match theory {
        Theory::Quantum => {
            let d: usize = quantum::hilbert_dims(inputs).iter().product();
            let u = tensor::sample_unitary(d, rng);
            let lam = CMatrix::from_diagonal(&tensor::CVector::from_fn(d, |_, _| c(rng.random::<f64>(), 0.0)));
            let e = &u * lam * u.adjoint();
            let e = (&e + e.adjoint()) * c(0.5, 0.0);
            quantum::effect_on(&e, inputs.to_vec())
        }
        Theory::Classical => {
            let n = total_dim(inputs);
            ProcessRep::new(RMatrix::from_fn(1, n, |_, _| rng.random::<f64>()), inputs.to_vec(), Vec::new())
        }
        Theory::Polytope(_) => {
            let ty = single(inputs)?;
            let gens = theory.effect_generators(ty)?.unwrap_or_default();
            let g = &gens[rng.random_range(0..gens.len())];
            let e = g * rng.random::<f64>();
            let e = if theory.is_effect(&e, ty) { e } else { theory.unit_vector(ty)? * rng.random::<f64>() };
            ProcessRep::effect(tensor::row(&e), ty.clone())
        }
    }
}

/// A random causal transformation (deterministic channel).
pub fn random_channel(
    theory: &Theory,
    inputs: &[SystemType],
    outputs: &[SystemType],
    rng: &mut impl Rng,
) -> Result<ProcessRep> {
    match theory {
        Theory::Quantum => {
            let din: usize = quantum::hilbert_dims(inputs).iter().product();
            let dout: usize = quantum::hilbert_dims(outputs).iter().product();
            let env = din.div_ceil(dout) + 1;
            let u = tensor::sample_unitary(dout * env, rng);
            let iso = u.columns(0, din).into_owned();
            let kraus: Vec<CMatrix> = (0..env)
                .map(|e| CMatrix::from_fn(dout, din, |i, j| iso[(i * env + e, j)]))
                .collect();
            quantum::kraus_channel(inputs.to_vec(), outputs.to_vec(), &kraus)
        }
        Theory::Classical => {
            let (n_in, n_out) = (total_dim(inputs), total_dim(outputs));
            let mut m = RMatrix::zeros(n_out, n_in);
            for j in 0..n_in {
                m.set_column(j, &probability_vector(n_out, rng));
            }
            ProcessRep::new(m, inputs.to_vec(), outputs.to_vec())
        }
        Theory::Polytope(_) => {
            let (a, b) = (single(inputs)?, single(outputs)?);
            let prep = random_state(theory, outputs, rng)?;
            let discard = theory.unit_effect(a)?;
            let measure_prepare = discard.then(&prep)?;
            if a == b {
                let lam = rng.random::<f64>();
                let m = ProcessRep::identity(inputs).matrix() * lam + measure_prepare.matrix() * (1.0 - lam);
                ProcessRep::new(m, inputs.to_vec(), outputs.to_vec())
            } else {
                Ok(measure_prepare)
            }
        }
    }
}

/// Random valid process with the given port types: a state, an effect, or a
/// causal transformation.
pub fn random_process(
    theory: &Theory,
    inputs: &[SystemType],
    outputs: &[SystemType],
    rng: &mut impl Rng,
) -> Result<ProcessRep> {
    match (inputs.is_empty(), outputs.is_empty()) {
        (true, true) => Ok(ProcessRep::scalar_value(rng.random::<f64>())),
        (true, false) => random_state(theory, outputs, rng),
        (false, true) => random_effect(theory, inputs, rng),
        (false, false) => random_channel(theory, inputs, outputs, rng),
    }
}

fn single(types: &[SystemType]) -> Result<&SystemType> {
    match types {
        [t] => Ok(t),
        _ => Err(Error::Unsupported("polytopic processes on composite systems".into())),
    }
}
