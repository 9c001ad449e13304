//! Composition laws, tomography and connectivity-only evaluation on random
//! processes and diagrams.

use std::collections::HashMap;

use hyperdec::diagram::{parse_with_env, Diagram};
use hyperdec::tensor::{self, rdiff, RMatrix, RVector, SeededRng};
use hyperdec::theory::{quantum, random};
use hyperdec::{ProcessRep, SystemType, Theory};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn q2() -> Vec<SystemType> {
    vec![SystemType::quantum(2)]
}

fn chan(th: &Theory, ports: &[SystemType], rng: &mut SeededRng) -> ProcessRep {
    random::random_channel(th, ports, ports, rng).unwrap()
}

/// A uniformly chosen topological order, built by picking a random ready node.
fn random_topological_order(d: &Diagram, rng: &mut SeededRng) -> Vec<usize> {
    let n = d.nodes.len();
    let mut indegree = vec![0usize; n];
    for w in &d.wires {
        indegree[w.to.node] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while !ready.is_empty() {
        let node = ready.swap_remove(rng.random_range(0..ready.len()));
        order.push(node);
        for w in d.wires.iter().filter(|w| w.from.node == node) {
            indegree[w.to.node] -= 1;
            if indegree[w.to.node] == 0 {
                ready.push(w.to.node);
            }
        }
    }
    order
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interchange_law_on_diagrams(seed in any::<u64>()) {
        let mut rng = SeededRng::seed_from_u64(seed);
        let th = Theory::Quantum;
        let q = q2();
        let mut env = HashMap::new();
        env.insert("u".to_string(), random::random_state(&th, &q, &mut rng).unwrap());
        env.insert("e".to_string(), random::random_state(&th, &q, &mut rng).unwrap());
        env.insert("f".to_string(), chan(&th, &q, &mut rng));
        env.insert("k".to_string(), chan(&th, &q, &mut rng));
        let lhs = parse_with_env("(u * e) ; (f * k)", &env).unwrap().evaluate().unwrap();
        let rhs = parse_with_env("(u ; f) * (e ; k)", &env).unwrap().evaluate().unwrap();
        prop_assert!(rdiff(lhs.matrix(), rhs.matrix()) < 1e-12);
    }

    #[test]
    fn evaluation_depends_only_on_connectivity(seed in any::<u64>()) {
        let mut rng = SeededRng::seed_from_u64(seed);
        let th = Theory::Quantum;
        let q = q2();
        let qq = vec![SystemType::quantum(2), SystemType::quantum(2)];
        let mut env = HashMap::new();
        env.insert("s1".to_string(), random::random_state(&th, &q, &mut rng).unwrap());
        env.insert("s2".to_string(), random::random_state(&th, &q, &mut rng).unwrap());
        env.insert("f".to_string(), chan(&th, &q, &mut rng));
        env.insert("g".to_string(), chan(&th, &q, &mut rng));
        env.insert("h".to_string(), chan(&th, &qq, &mut rng));
        let d = parse_with_env("(s1 * s2) ; (f * g) ; swap(q2, q2) ; h", &env).unwrap();
        prop_assert_eq!(d.nodes.len(), 6);
        let reference = d.evaluate().unwrap();
        for _ in 0..4 {
            let order = random_topological_order(&d, &mut rng);
            let other = d.evaluate_with_order(&order).unwrap();
            prop_assert!(rdiff(reference.matrix(), other.matrix()) < 1e-12);
        }
        // independent oracle: Kronecker products and an explicit swap
        let fg = tensor::rkron(env["f"].matrix(), env["g"].matrix());
        let s = tensor::rkron(env["s1"].matrix(), env["s2"].matrix());
        let swap = tensor::permutation_matrix(&[4, 4], &[1, 0]);
        let expected = env["h"].matrix() * swap * fg * s;
        prop_assert!(rdiff(reference.matrix(), &expected) < 1e-12);
    }

    #[test]
    fn unit_effect_normalizes_states(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = SeededRng::seed_from_u64(seed);
        for th in [Theory::Quantum, Theory::Classical] {
            let ty = if matches!(th, Theory::Quantum) { SystemType::quantum(d) } else { SystemType::classical(d) };
            let s = random::random_state(&th, std::slice::from_ref(&ty), &mut rng).unwrap();
            let p = s.then(&th.unit_effect(&ty).unwrap()).unwrap().scalar().unwrap();
            prop_assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn probabilities_are_convex(seed in any::<u64>(), lam in 0.0f64..1.0) {
        let mut rng = SeededRng::seed_from_u64(seed);
        let th = Theory::Quantum;
        let q = vec![SystemType::quantum(3)];
        let s1 = random::random_state(&th, &q, &mut rng).unwrap();
        let s2 = random::random_state(&th, &q, &mut rng).unwrap();
        let e = random::random_effect(&th, &q, &mut rng).unwrap();
        let mix = s1.as_state_vector() * lam + s2.as_state_vector() * (1.0 - lam);
        let mixed = ProcessRep::new(tensor::col(&mix), Vec::new(), q.clone()).unwrap();
        let p = |s: &ProcessRep| s.then(&e).unwrap().scalar().unwrap();
        prop_assert!((p(&mixed) - (lam * p(&s1) + (1.0 - lam) * p(&s2))).abs() < 1e-12);
    }

    #[test]
    fn tomography_with_a_spanning_effect_set(seed in any::<u64>()) {
        // states are equal iff every effect of a spanning set agrees on them
        let mut rng = SeededRng::seed_from_u64(seed);
        let th = Theory::Quantum;
        let ty = SystemType::quantum(2);
        let effects: Vec<RVector> = spanning_effects(&ty);
        let basis = RMatrix::from_rows(&effects.iter().map(|e| e.transpose()).collect::<Vec<_>>());
        let s1 = random::random_state(&th, std::slice::from_ref(&ty), &mut rng).unwrap().as_state_vector();
        let s2 = random::random_state(&th, std::slice::from_ref(&ty), &mut rng).unwrap().as_state_vector();
        let probe = |v: &RVector| &basis * v;
        prop_assert!((probe(&s1) - probe(&s1.clone())).norm() < 1e-10);
        let differ = (&s1 - &s2).norm() > 1e-10;
        let probes_differ = (probe(&s1) - probe(&s2)).norm() > 1e-10;
        prop_assert_eq!(differ, probes_differ);
    }
}

/// Effects `|φ⟩⟨φ|` for `|0⟩, |1⟩, |+⟩, |+i⟩`, which span the operators on C².
fn spanning_effects(ty: &SystemType) -> Vec<RVector> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [
        (tensor::c(1.0, 0.0), tensor::c(0.0, 0.0)),
        (tensor::c(0.0, 0.0), tensor::c(1.0, 0.0)),
        (tensor::c(s, 0.0), tensor::c(s, 0.0)),
        (tensor::c(s, 0.0), tensor::c(0.0, s)),
    ];
    kets.iter()
        .map(|&(a, b)| {
            let v = tensor::CVector::from_vec(vec![a, b]);
            quantum::effect(&tensor::projector(&v), ty).unwrap().as_effect_vector()
        })
        .collect()
}

#[test]
fn spanning_effects_have_full_rank() {
    let effects = spanning_effects(&SystemType::quantum(2));
    let m = RMatrix::from_rows(&effects.iter().map(|e| e.transpose()).collect::<Vec<_>>());
    assert_eq!(m.rank(1e-10), 4);
}

#[test]
fn classical_diagrams_compose_stochastic_matrices() {
    let d = hyperdec::diagram::parse("state0(c2) ; stochastic(c2, c2, [0.9, 0.2, 0.1, 0.8]) ; effect1(c2)").unwrap();
    assert!((d.probability().unwrap() - 0.1).abs() < 1e-12);
}
