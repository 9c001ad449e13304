use crate::error::{Error, Result};
use crate::tensor::{self, RMatrix, RVector};

use super::{flatten, total_dim, SystemType};

/// A real linear map between theory vector spaces with ordered input and
/// output systems. States have no inputs, effects have no outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessRep {
    matrix: RMatrix,
    inputs: Vec<SystemType>,
    outputs: Vec<SystemType>,
    reversible: bool,
}

impl ProcessRep {
    pub fn new(matrix: RMatrix, inputs: Vec<SystemType>, outputs: Vec<SystemType>) -> Result<ProcessRep> {
        let (rows, cols) = (total_dim(&outputs), total_dim(&inputs));
        if matrix.shape() != (rows, cols) {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, types need {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                rows,
                cols
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite matrix entry".into()));
        }
        let mut theories = inputs.iter().chain(&outputs).map(|t| &t.theory);
        if let Some(first) = theories.next() {
            if let Some(other) = theories.find(|t| *t != first) {
                return Err(Error::TheoryMismatch {
                    left: first.clone(),
                    right: other.clone(),
                });
            }
        }
        Ok(ProcessRep { matrix, inputs, outputs, reversible: false })
    }

    pub fn state(v: RVector, ty: SystemType) -> Result<ProcessRep> {
        let n = v.len();
        ProcessRep::new(RMatrix::from_column_slice(n, 1, v.as_slice()), Vec::new(), vec![ty])
    }

    pub fn effect(row: RMatrix, ty: SystemType) -> Result<ProcessRep> {
        ProcessRep::new(row, vec![ty], Vec::new())
    }

    pub fn identity(types: &[SystemType]) -> ProcessRep {
        let n = total_dim(types);
        ProcessRep {
            matrix: RMatrix::identity(n, n),
            inputs: types.to_vec(),
            outputs: types.to_vec(),
            reversible: true,
        }
    }

    pub fn scalar_value(p: f64) -> ProcessRep {
        ProcessRep {
            matrix: RMatrix::from_element(1, 1, p),
            inputs: Vec::new(),
            outputs: Vec::new(),
            reversible: false,
        }
    }

    /// Marks the process as reversible. The caller vouches that the inverse is
    /// also a valid transformation.
    pub fn with_reversible(mut self, reversible: bool) -> ProcessRep {
        self.reversible = reversible && self.matrix.is_square();
        self
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    pub fn inputs(&self) -> &[SystemType] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[SystemType] {
        &self.outputs
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    pub fn theory_id(&self) -> Option<&str> {
        self.inputs.iter().chain(&self.outputs).map(|t| t.theory.as_str()).next()
    }

    pub fn is_state(&self) -> bool {
        self.inputs.is_empty() && !self.outputs.is_empty()
    }

    pub fn is_effect(&self) -> bool {
        self.outputs.is_empty() && !self.inputs.is_empty()
    }

    pub fn scalar(&self) -> Option<f64> {
        (self.inputs.is_empty() && self.outputs.is_empty()).then(|| self.matrix[(0, 0)])
    }

    /// The single column of a state (or any process without inputs).
    pub fn as_state_vector(&self) -> RVector {
        self.matrix.column(0).into_owned()
    }

    /// The single row of an effect, as a column vector.
    pub fn as_effect_vector(&self) -> RVector {
        self.matrix.row(0).transpose()
    }

    /// Combined output type, if there is at least one output.
    pub fn output_type(&self) -> Result<SystemType> {
        SystemType::composite(&self.outputs)
    }

    pub fn input_type(&self) -> Result<SystemType> {
        SystemType::composite(&self.inputs)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ProcessRep) -> Result<ProcessRep> {
        compose_seq(self, next)
    }

    pub fn tensor(&self, other: &ProcessRep) -> Result<ProcessRep> {
        compose_par(self, other)
    }

    pub fn approx_eq(&self, other: &ProcessRep, tol: f64) -> bool {
        flatten(&self.inputs) == flatten(&other.inputs)
            && flatten(&self.outputs) == flatten(&other.outputs)
            && tensor::rdiff(&self.matrix, &other.matrix) <= tol
    }
}

/// Sequential composition: `f` happens first, then `g`.
pub fn compose_seq(f: &ProcessRep, g: &ProcessRep) -> Result<ProcessRep> {
    if flatten(&f.outputs) != flatten(&g.inputs) {
        return Err(Error::Composition(format!(
            "outputs [{}] do not match inputs [{}]",
            labels(&f.outputs),
            labels(&g.inputs)
        )));
    }
    Ok(ProcessRep {
        matrix: &g.matrix * &f.matrix,
        inputs: f.inputs.clone(),
        outputs: g.outputs.clone(),
        reversible: f.reversible && g.reversible,
    })
}

/// Parallel composition; input and output lists are concatenated.
pub fn compose_par(f: &ProcessRep, g: &ProcessRep) -> Result<ProcessRep> {
    if let (Some(a), Some(b)) = (f.theory_id(), g.theory_id()) {
        if a != b {
            return Err(Error::TheoryMismatch { left: a.into(), right: b.into() });
        }
    }
    Ok(ProcessRep {
        matrix: tensor::rkron(&f.matrix, &g.matrix),
        inputs: f.inputs.iter().chain(&g.inputs).cloned().collect(),
        outputs: f.outputs.iter().chain(&g.outputs).cloned().collect(),
        reversible: f.reversible && g.reversible,
    })
}

fn labels(types: &[SystemType]) -> String {
    types.iter().map(|t| t.label.as_str()).collect::<Vec<_>>().join(", ")
}
