//! Built-in processes callable from the DSL.

use crate::tensor::{self, c, CMatrix, RMatrix};
use crate::theory::{quantum, random, ProcessRep, SystemType, Theory};

use super::error::{DiagramError, Pos};

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Number(f64, Pos),
    /// An identifier, or several joined by `*` (a composite type).
    Name(String, Pos),
    List(Vec<Arg>, Pos),
}

impl Arg {
    pub fn pos(&self) -> Pos {
        match self {
            Arg::Number(_, p) | Arg::Name(_, p) | Arg::List(_, p) => *p,
        }
    }
}

pub const BUILTINS: &[&str] = &[
    "id", "discard", "swap", "bell", "maxmix", "state0", "state1", "plus", "effect0", "effect1", "dephase",
    "unitary", "stochastic", "channel", "vertex", "facet",
];

pub fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

struct Call<'a> {
    name: &'a str,
    pos: Pos,
    args: &'a [Arg],
}

impl Call<'_> {
    fn fail(&self, msg: impl Into<String>) -> DiagramError {
        DiagramError::Builtin { pos: self.pos, name: self.name.to_string(), msg: msg.into() }
    }

    fn arity(&self, expected: &str, ok: bool) -> Result<(), DiagramError> {
        if ok {
            Ok(())
        } else {
            Err(DiagramError::Arity {
                pos: self.pos,
                name: self.name.to_string(),
                expected: expected.to_string(),
                found: self.args.len(),
            })
        }
    }

    fn lift<T>(&self, r: crate::error::Result<T>) -> Result<T, DiagramError> {
        r.map_err(|e| self.fail(e.to_string()))
    }

    /// Atomic system types named by argument `i`.
    fn types(&self, i: usize) -> Result<Vec<SystemType>, DiagramError> {
        match &self.args[i] {
            Arg::Name(label, pos) => resolve_types(label).map_err(|msg| DiagramError::Builtin {
                pos: *pos,
                name: self.name.to_string(),
                msg,
            }),
            other => Err(DiagramError::Builtin {
                pos: other.pos(),
                name: self.name.to_string(),
                msg: "expected a system type".into(),
            }),
        }
    }

    fn atom(&self, i: usize) -> Result<SystemType, DiagramError> {
        let mut ts = self.types(i)?;
        if ts.len() != 1 {
            return Err(self.fail("expected a single system"));
        }
        Ok(ts.remove(0))
    }

    fn number(&self, i: usize) -> Result<f64, DiagramError> {
        match &self.args[i] {
            Arg::Number(x, _) => Ok(*x),
            other => Err(DiagramError::Builtin {
                pos: other.pos(),
                name: self.name.to_string(),
                msg: "expected a number".into(),
            }),
        }
    }

    fn count(&self, i: usize) -> Result<usize, DiagramError> {
        let x = self.number(i)?;
        if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
            return Err(self.fail(format!("expected a non-negative integer, got {x}")));
        }
        Ok(x as usize)
    }

    fn all_types(&self) -> Result<Vec<SystemType>, DiagramError> {
        let mut out = Vec::new();
        for i in 0..self.args.len() {
            out.extend(self.types(i)?);
        }
        Ok(out)
    }
}

/// Parses `q2`, `c3`, `gbit`, or `*`-joined products of them into atoms.
pub fn resolve_types(label: &str) -> Result<Vec<SystemType>, String> {
    label
        .split('*')
        .map(|part| {
            let part = part.trim();
            let sized = |prefix: char| {
                part.strip_prefix(prefix)
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&n| n > 0)
            };
            if let Some(d) = sized('q') {
                Ok(SystemType::quantum(d))
            } else if let Some(n) = sized('c') {
                Ok(SystemType::classical(n))
            } else if part == "gbit" {
                Theory::gbit().system("gbit").map_err(|e| e.to_string())
            } else {
                Err(format!("unknown system type `{part}`"))
            }
        })
        .collect()
}

pub fn theory_of(ty: &SystemType) -> Theory {
    if ty.is_quantum() {
        Theory::Quantum
    } else if ty.is_classical() {
        Theory::Classical
    } else {
        Theory::gbit()
    }
}

fn same_theory(types: &[SystemType]) -> Option<Theory> {
    let first = types.first()?;
    types.iter().all(|t| t.theory == first.theory).then(|| theory_of(first))
}

fn named_unitary(name: &str, d: usize) -> Option<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = |v: [[(f64, f64); 2]; 2]| CMatrix::from_fn(2, 2, |i, j| c(v[i][j].0, v[i][j].1));
    match (name, d) {
        ("x", 2) => Some(m([[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]])),
        ("y", 2) => Some(m([[(0.0, 0.0), (0.0, -1.0)], [(0.0, 1.0), (0.0, 0.0)]])),
        ("z", 2) => Some(m([[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (-1.0, 0.0)]])),
        ("h", 2) => Some(m([[(s, 0.0), (s, 0.0)], [(s, 0.0), (-s, 0.0)]])),
        ("s", 2) => Some(m([[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (0.0, 1.0)]])),
        ("cnot", 4) => {
            let mut u = CMatrix::zeros(4, 4);
            for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                u[(i, j)] = c(1.0, 0.0);
            }
            Some(u)
        }
        ("fourier", d) => {
            let w = 2.0 * std::f64::consts::PI / d as f64;
            Some(CMatrix::from_fn(d, d, |i, j| {
                let a = w * (i * j) as f64;
                c(a.cos(), a.sin()) / (d as f64).sqrt()
            }))
        }
        _ => None,
    }
}

/// Instantiates builtin `name` with the given arguments.
pub fn instantiate(name: &str, pos: Pos, args: &[Arg]) -> Result<ProcessRep, DiagramError> {
    let call = Call { name, pos, args };
    match name {
        "id" | "discard" | "maxmix" => {
            call.arity("at least 1", !args.is_empty())?;
            let types = call.all_types()?;
            let theory = same_theory(&types).ok_or_else(|| call.fail("mixed theories"))?;
            match name {
                "id" => Ok(ProcessRep::identity(&types)),
                "discard" => call.lift(theory.unit_effect_on(&types)),
                _ => {
                    let mut acc = ProcessRep::scalar_value(1.0);
                    for t in &types {
                        acc = call.lift(acc.tensor(&call.lift(theory.max_mixed(t))?))?;
                    }
                    Ok(acc)
                }
            }
        }
        "swap" => {
            call.arity("2", args.len() == 2)?;
            let (a, b) = (call.types(0)?, call.types(1)?);
            let types: Vec<SystemType> = a.iter().chain(&b).cloned().collect();
            let dims: Vec<usize> = types.iter().map(|t| t.vec_dim).collect();
            let perm: Vec<usize> = (a.len()..types.len()).chain(0..a.len()).collect();
            let outputs: Vec<SystemType> = perm.iter().map(|&i| types[i].clone()).collect();
            let p = tensor::permutation_matrix(&dims, &perm);
            Ok(call.lift(ProcessRep::new(p, types, outputs))?.with_reversible(true))
        }
        "bell" => {
            call.arity("1", args.len() == 1)?;
            let d = call.count(0)?;
            call.lift(quantum::bell_state(d))
        }
        "state0" | "state1" | "plus" | "effect0" | "effect1" => {
            call.arity("1", args.len() == 1)?;
            let t = call.atom(0)?;
            let k = usize::from(name.ends_with('1'));
            let levels = t.levels;
            if k >= levels || (name == "plus" && levels < 2) {
                return Err(call.fail(format!("`{}` has too few levels", t.label)));
            }
            if t.is_quantum() {
                let op = if name == "plus" {
                    let mut v = tensor::CVector::zeros(levels);
                    v[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                    v[1] = v[0];
                    tensor::projector(&v)
                } else {
                    tensor::basis_projector(levels, k)
                };
                if name.starts_with("effect") {
                    call.lift(quantum::effect(&op, &t))
                } else {
                    call.lift(quantum::state(&op, &t))
                }
            } else if t.is_classical() {
                let mut v = crate::tensor::RVector::zeros(levels);
                if name == "plus" {
                    v[0] = 0.5;
                    v[1] = 0.5;
                } else {
                    v[k] = 1.0;
                }
                if name.starts_with("effect") {
                    call.lift(ProcessRep::effect(tensor::row(&v), t))
                } else {
                    call.lift(ProcessRep::state(v, t))
                }
            } else {
                Err(call.fail("use vertex/facet for polytopic systems"))
            }
        }
        "dephase" => {
            call.arity("1", args.len() == 1)?;
            let t = call.atom(0)?;
            if t.is_quantum() {
                call.lift(quantum::dephasing_channel(t.levels))
            } else if t.is_classical() {
                Ok(ProcessRep::identity(&[t]))
            } else {
                Err(call.fail("no dephasing for polytopic systems"))
            }
        }
        "unitary" => {
            call.arity("2", args.len() == 2)?;
            let types = call.types(0)?;
            if !types.iter().all(SystemType::is_quantum) {
                return Err(call.fail("unitaries act on quantum systems"));
            }
            let d: usize = types.iter().map(|t| t.levels).product();
            let u = match &args[1] {
                Arg::Name(n, _) => named_unitary(n, d)
                    .ok_or_else(|| call.fail(format!("no unitary named `{n}` on dimension {d}")))?,
                Arg::Number(..) => tensor::random_unitary(d, call.count(1)? as u64),
                Arg::List(..) => return Err(call.fail("expected a name or seed")),
            };
            call.lift(quantum::unitary_channel(&u, types))
        }
        "stochastic" => {
            call.arity("3", args.len() == 3)?;
            let (a, b) = (call.atom(0)?, call.atom(1)?);
            if !a.is_classical() || !b.is_classical() {
                return Err(call.fail("stochastic maps act on classical systems"));
            }
            let entries = match &args[2] {
                Arg::List(items, _) => items
                    .iter()
                    .map(|x| match x {
                        Arg::Number(v, _) => Ok(*v),
                        other => Err(DiagramError::Builtin {
                            pos: other.pos(),
                            name: name.into(),
                            msg: "expected a number".into(),
                        }),
                    })
                    .collect::<Result<Vec<f64>, _>>()?,
                other => {
                    return Err(DiagramError::Builtin { pos: other.pos(), name: name.into(), msg: "expected a list".into() })
                }
            };
            if entries.len() != a.levels * b.levels {
                return Err(call.fail(format!("expected {} entries, got {}", a.levels * b.levels, entries.len())));
            }
            let m = RMatrix::from_row_slice(b.levels, a.levels, &entries);
            for (j, col) in m.column_iter().enumerate() {
                if col.iter().any(|&x| x < 0.0) || (col.sum() - 1.0).abs() > 1e-9 {
                    return Err(call.fail(format!("column {j} is not a probability vector")));
                }
            }
            call.lift(ProcessRep::new(m, vec![a], vec![b]))
        }
        "channel" => {
            call.arity("3", args.len() == 3)?;
            let (a, b) = (call.types(0)?, call.types(1)?);
            let seed = call.count(2)? as u64;
            let all: Vec<SystemType> = a.iter().chain(&b).cloned().collect();
            let theory = same_theory(&all).ok_or_else(|| call.fail("mixed theories"))?;
            let mut rng = tensor::rng_from_seed(seed);
            call.lift(random::random_channel(&theory, &a, &b, &mut rng))
        }
        "vertex" | "facet" => {
            call.arity("2", args.len() == 2)?;
            let t = call.atom(0)?;
            let k = call.count(1)?;
            let theory = theory_of(&t);
            let list = if name == "vertex" {
                call.lift(theory.extreme_states(&t))?
            } else {
                call.lift(theory.effect_generators(&t))?
            }
            .unwrap_or_default();
            let v = list.get(k).cloned().ok_or_else(|| call.fail(format!("index {k} out of range ({} available)", list.len())))?;
            if name == "vertex" {
                call.lift(ProcessRep::state(v, t))
            } else {
                call.lift(ProcessRep::effect(tensor::row(&v), t))
            }
        }
        _ => Err(DiagramError::UnknownName { pos, name: name.into() }),
    }
}
