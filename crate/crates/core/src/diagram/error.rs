use std::fmt;

use thiserror::Error;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagramError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },

    #[error("{pos}: unknown identifier `{name}`")]
    UnknownName { pos: Pos, name: String },

    #[error("{pos}: `{name}` takes {expected} argument(s), got {found}")]
    Arity { pos: Pos, name: String, expected: String, found: usize },

    #[error("{pos}: bad argument to `{name}`: {msg}")]
    Builtin { pos: Pos, name: String, msg: String },

    #[error("{}type mismatch: expected [{expected}], found [{found}]", at(.pos))]
    TypeMismatch { pos: Option<Pos>, expected: String, found: String },

    #[error("wiring has a cycle through nodes {nodes:?}")]
    Cycle { nodes: Vec<usize> },

    #[error("dangling or reused port: {0}")]
    DanglingPort(String),

    #[error("diagram is open ({inputs} free inputs, {outputs} free outputs); it has no probability")]
    OpenDiagram { inputs: usize, outputs: usize },

    #[error("bad evaluation order: {0}")]
    Order(String),

    #[error("node {node} failed to compose: {msg}")]
    Evaluation { node: usize, msg: String },
}

fn at(pos: &Option<Pos>) -> String {
    pos.map(|p| format!("{p}: ")).unwrap_or_default()
}

impl DiagramError {
    pub fn pos(&self) -> Option<Pos> {
        match self {
            DiagramError::Syntax { pos, .. }
            | DiagramError::UnknownName { pos, .. }
            | DiagramError::Arity { pos, .. }
            | DiagramError::Builtin { pos, .. } => Some(*pos),
            DiagramError::TypeMismatch { pos, .. } => *pos,
            _ => None,
        }
    }
}
