use std::collections::BTreeSet;

use crate::tensor::{self, RMatrix};
use crate::theory::{ProcessRep, SystemType};

use super::error::{DiagramError, Pos};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub label: String,
    pub process: ProcessRep,
}

impl Node {
    pub fn inputs(&self) -> &[SystemType] {
        self.process.inputs()
    }

    pub fn outputs(&self) -> &[SystemType] {
        self.process.outputs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortRef {
    pub node: usize,
    pub port: usize,
}

/// Connects output port `from` to input port `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Wire {
    pub from: PortRef,
    pub to: PortRef,
}

/// Typed wiring of processes. Free inputs are node input ports left open,
/// free outputs are node output ports left open, both in interface order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagram {
    pub nodes: Vec<Node>,
    pub wires: Vec<Wire>,
    pub free_inputs: Vec<PortRef>,
    pub free_outputs: Vec<PortRef>,
}

/// Ordered free port types of a well-formed diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct PortSummary {
    pub inputs: Vec<SystemType>,
    pub outputs: Vec<SystemType>,
}

fn labels(types: &[SystemType]) -> String {
    types.iter().map(|t| t.label.as_str()).collect::<Vec<_>>().join(", ")
}

/// Splits composite ports into atomic ones; the matrix is unchanged because
/// composite coordinates are Kronecker products of the atomic ones.
fn atomize(p: ProcessRep) -> ProcessRep {
    if p.inputs().iter().chain(p.outputs()).all(SystemType::is_atomic) {
        return p;
    }
    let flat = |ts: &[SystemType]| ts.iter().flat_map(SystemType::atoms).collect::<Vec<_>>();
    let reversible = p.is_reversible();
    ProcessRep::new(p.matrix().clone(), flat(p.inputs()), flat(p.outputs()))
        .expect("atomizing preserves dimensions")
        .with_reversible(reversible)
}

impl Diagram {
    pub fn empty() -> Diagram {
        Diagram::default()
    }

    /// A diagram holding one process, all of its ports free.
    pub fn single(label: impl Into<String>, process: ProcessRep) -> Diagram {
        let mut d = Diagram::empty();
        d.add_node(label, process);
        d
    }

    /// Adds a node with all its ports free (appended to the interface).
    pub fn add_node(&mut self, label: impl Into<String>, process: ProcessRep) -> usize {
        let process = atomize(process);
        let node = self.nodes.len();
        self.free_inputs.extend((0..process.inputs().len()).map(|port| PortRef { node, port }));
        self.free_outputs.extend((0..process.outputs().len()).map(|port| PortRef { node, port }));
        self.nodes.push(Node { label: label.into(), process });
        node
    }

    /// Records a wire and removes both ends from the free lists. No checks
    /// happen here; [`Diagram::typecheck`] reports bad wirings.
    pub fn connect(&mut self, from: PortRef, to: PortRef) {
        self.free_outputs.retain(|p| *p != from);
        self.free_inputs.retain(|p| *p != to);
        self.wires.push(Wire { from, to });
    }

    pub fn input_types(&self) -> Vec<SystemType> {
        self.free_inputs.iter().map(|p| self.nodes[p.node].inputs()[p.port].clone()).collect()
    }

    pub fn output_types(&self) -> Vec<SystemType> {
        self.free_outputs.iter().map(|p| self.nodes[p.node].outputs()[p.port].clone()).collect()
    }

    fn shifted(&self, offset: usize) -> Diagram {
        let mv = |p: &PortRef| PortRef { node: p.node + offset, port: p.port };
        Diagram {
            nodes: self.nodes.clone(),
            wires: self.wires.iter().map(|w| Wire { from: mv(&w.from), to: mv(&w.to) }).collect(),
            free_inputs: self.free_inputs.iter().map(mv).collect(),
            free_outputs: self.free_outputs.iter().map(mv).collect(),
        }
    }

    /// Side-by-side composition.
    pub fn par(&self, other: &Diagram) -> Diagram {
        let b = other.shifted(self.nodes.len());
        let mut d = self.clone();
        d.nodes.extend(b.nodes);
        d.wires.extend(b.wires);
        d.free_inputs.extend(b.free_inputs);
        d.free_outputs.extend(b.free_outputs);
        d
    }

    /// `self` then `other`, wiring free outputs to free inputs by position.
    pub fn seq(&self, other: &Diagram, pos: Option<Pos>) -> Result<Diagram, DiagramError> {
        let (outs, ins) = (self.output_types(), other.input_types());
        if outs != ins {
            return Err(DiagramError::TypeMismatch { pos, expected: labels(&ins), found: labels(&outs) });
        }
        let b = other.shifted(self.nodes.len());
        let mut d = self.clone();
        let links: Vec<Wire> = d
            .free_outputs
            .iter()
            .zip(&b.free_inputs)
            .map(|(&from, &to)| Wire { from, to })
            .collect();
        d.nodes.extend(b.nodes);
        d.wires.extend(b.wires);
        d.wires.extend(links);
        d.free_outputs = b.free_outputs;
        Ok(d)
    }

    /// Checks port types, port multiplicities and acyclicity, returning the
    /// free port types.
    pub fn typecheck(&self) -> Result<PortSummary, DiagramError> {
        let n = self.nodes.len();
        let in_range = |p: &PortRef, output: bool| {
            p.node < n && {
                let node = &self.nodes[p.node];
                p.port < if output { node.outputs().len() } else { node.inputs().len() }
            }
        };
        for w in &self.wires {
            if !in_range(&w.from, true) || !in_range(&w.to, false) {
                return Err(DiagramError::DanglingPort(format!(
                    "wire {:?} -> {:?} refers to a missing port",
                    w.from, w.to
                )));
            }
            let (a, b) = (
                &self.nodes[w.from.node].outputs()[w.from.port],
                &self.nodes[w.to.node].inputs()[w.to.port],
            );
            if a != b {
                return Err(DiagramError::TypeMismatch {
                    pos: None,
                    expected: b.label.clone(),
                    found: format!("{} (node {} output {} -> node {} input {})", a.label, w.from.node, w.from.port, w.to.node, w.to.port),
                });
            }
        }
        for p in self.free_inputs.iter() {
            if !in_range(p, false) {
                return Err(DiagramError::DanglingPort(format!("free input {p:?} does not exist")));
            }
        }
        for p in self.free_outputs.iter() {
            if !in_range(p, true) {
                return Err(DiagramError::DanglingPort(format!("free output {p:?} does not exist")));
            }
        }
        for (k, node) in self.nodes.iter().enumerate() {
            for port in 0..node.inputs().len() {
                let p = PortRef { node: k, port };
                let uses = self.wires.iter().filter(|w| w.to == p).count()
                    + self.free_inputs.iter().filter(|q| **q == p).count();
                if uses != 1 {
                    return Err(DiagramError::DanglingPort(format!(
                        "input {port} of node {k} (`{}`) is used {uses} times",
                        node.label
                    )));
                }
            }
            for port in 0..node.outputs().len() {
                let p = PortRef { node: k, port };
                let uses = self.wires.iter().filter(|w| w.from == p).count()
                    + self.free_outputs.iter().filter(|q| **q == p).count();
                if uses != 1 {
                    return Err(DiagramError::DanglingPort(format!(
                        "output {port} of node {k} (`{}`) is used {uses} times",
                        node.label
                    )));
                }
            }
        }
        self.topological_order()?;
        Ok(PortSummary { inputs: self.input_types(), outputs: self.output_types() })
    }

    /// Kahn's algorithm, smallest ready node first.
    pub fn topological_order(&self) -> Result<Vec<usize>, DiagramError> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        for w in &self.wires {
            indegree[w.to.node] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&k| indegree[k] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(k) = ready.pop_first() {
            order.push(k);
            for w in self.wires.iter().filter(|w| w.from.node == k) {
                indegree[w.to.node] -= 1;
                if indegree[w.to.node] == 0 {
                    ready.insert(w.to.node);
                }
            }
        }
        if order.len() < n {
            let nodes = (0..n).filter(|k| indegree[*k] > 0).collect();
            return Err(DiagramError::Cycle { nodes });
        }
        Ok(order)
    }

    pub fn evaluate(&self) -> Result<ProcessRep, DiagramError> {
        self.typecheck()?;
        let order = self.topological_order()?;
        self.fold(&order)
    }

    /// Evaluates in a caller-chosen order, which must be topological.
    pub fn evaluate_with_order(&self, order: &[usize]) -> Result<ProcessRep, DiagramError> {
        self.typecheck()?;
        let mut seen = vec![false; self.nodes.len()];
        for &k in order {
            if k >= seen.len() || seen[k] {
                return Err(DiagramError::Order(format!("node {k} is missing or repeated")));
            }
            seen[k] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(DiagramError::Order("not every node is listed".into()));
        }
        let rank: Vec<usize> = {
            let mut r = vec![0; order.len()];
            for (i, &k) in order.iter().enumerate() {
                r[k] = i;
            }
            r
        };
        if let Some(w) = self.wires.iter().find(|w| rank[w.from.node] >= rank[w.to.node]) {
            return Err(DiagramError::Order(format!(
                "node {} is evaluated before its predecessor {}",
                w.to.node, w.from.node
            )));
        }
        self.fold(order)
    }

    /// Sweeps nodes in order, keeping the list of wires in flight. Each step
    /// permutes the node's inputs to the front, applies `node ⊗ id`, and
    /// prepends the node's outputs.
    fn fold(&self, order: &[usize]) -> Result<ProcessRep, DiagramError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Dest {
            In(PortRef),
            Out(usize),
        }
        let dest_of_output = |p: PortRef| -> Dest {
            if let Some(w) = self.wires.iter().find(|w| w.from == p) {
                Dest::In(w.to)
            } else {
                Dest::Out(self.free_outputs.iter().position(|q| *q == p).expect("typechecked"))
            }
        };
        let in_types = self.input_types();
        let in_dim: usize = in_types.iter().map(|t| t.vec_dim).product();
        let mut frontier: Vec<(Dest, usize)> = self
            .free_inputs
            .iter()
            .zip(&in_types)
            .map(|(&p, t)| (Dest::In(p), t.vec_dim))
            .collect();
        let mut m = RMatrix::identity(in_dim, in_dim);
        let mut reversible = true;

        for &k in order {
            let node = &self.nodes[k];
            let mut perm = Vec::with_capacity(frontier.len());
            for port in 0..node.inputs().len() {
                let target = Dest::In(PortRef { node: k, port });
                let idx = frontier.iter().position(|(d, _)| *d == target).ok_or_else(|| {
                    DiagramError::Evaluation { node: k, msg: format!("input {port} is not available") }
                })?;
                perm.push(idx);
            }
            let rest: Vec<usize> = (0..frontier.len()).filter(|i| !perm.contains(i)).collect();
            perm.extend(&rest);
            let dims: Vec<usize> = frontier.iter().map(|(_, d)| *d).collect();
            let p = tensor::permutation_matrix(&dims, &perm);
            let rest_dim: usize = rest.iter().map(|&i| dims[i]).product();
            let step = tensor::rkron(node.process.matrix(), &RMatrix::identity(rest_dim, rest_dim));
            m = step * p * m;
            reversible &= node.process.is_reversible();

            let mut next: Vec<(Dest, usize)> = (0..node.outputs().len())
                .map(|port| (dest_of_output(PortRef { node: k, port }), node.outputs()[port].vec_dim))
                .collect();
            next.extend(rest.iter().map(|&i| frontier[i]));
            frontier = next;
        }

        let mut perm = Vec::with_capacity(frontier.len());
        for k in 0..self.free_outputs.len() {
            let idx = frontier
                .iter()
                .position(|(d, _)| *d == Dest::Out(k))
                .ok_or_else(|| DiagramError::Evaluation { node: self.free_outputs[k].node, msg: "free output lost".into() })?;
            perm.push(idx);
        }
        if perm.len() != frontier.len() {
            return Err(DiagramError::Evaluation { node: 0, msg: "unconsumed wires remain".into() });
        }
        let dims: Vec<usize> = frontier.iter().map(|(_, d)| *d).collect();
        m = tensor::permutation_matrix(&dims, &perm) * m;
        ProcessRep::new(m, in_types, self.output_types())
            .map(|p| p.with_reversible(reversible && !self.nodes.is_empty()))
            .map_err(|e| DiagramError::Evaluation { node: 0, msg: e.to_string() })
    }

    /// Probability of a closed diagram, clamped to `[0, 1]`.
    pub fn probability(&self) -> Result<f64, DiagramError> {
        if !self.free_inputs.is_empty() || !self.free_outputs.is_empty() {
            return Err(DiagramError::OpenDiagram {
                inputs: self.free_inputs.len(),
                outputs: self.free_outputs.len(),
            });
        }
        let p = self.evaluate()?;
        Ok(p.matrix()[(0, 0)].clamp(0.0, 1.0))
    }
}
