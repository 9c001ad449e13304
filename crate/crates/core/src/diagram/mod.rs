//! Circuit DSL and diagram evaluation.
//!
//! `;` composes sequentially (left happens first) and `*` places processes
//! side by side. Ports are positional: composite systems are split into
//! their atomic factors and wired in order.

mod builtins;
mod error;
mod graph;
mod lexer;
mod parser;

use serde::{Deserialize, Serialize};

use crate::theory::ProcessRep;

pub use builtins::{resolve_types, BUILTINS};
pub use error::{DiagramError, Pos};
pub use graph::{Diagram, Node, PortRef, PortSummary, Wire};
pub use parser::{parse, parse_with_env};

/// JSON form of an evaluated process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixExport {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

impl MatrixExport {
    pub fn from_process(p: &ProcessRep) -> MatrixExport {
        let m = p.matrix();
        MatrixExport {
            inputs: p.inputs().iter().map(|t| t.label.clone()).collect(),
            outputs: p.outputs().iter().map(|t| t.label.clone()).collect(),
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| crate::report::round12(m[(i, j)])).collect())
                .collect(),
        }
    }
}
