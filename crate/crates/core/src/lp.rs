//! Thin wrapper over `microlp` for the nonnegative feasibility programs used by
//! polytopic theories.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};
use crate::tensor::{RMatrix, RVector};

/// Total slack above which a system `A x = b, x ≥ 0` counts as infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-7;

/// Finds `x ≥ 0` with `A x = b`, or `None` when no such `x` exists.
///
/// Each equality row gets a pair of nonnegative slacks and the total slack is
/// minimized, so near-feasible systems are judged against
/// [`FEASIBILITY_TOL`] instead of the solver's internal epsilon.
pub fn nonneg_solution(a: &RMatrix, b: &RVector) -> Result<Option<RVector>> {
    if a.nrows() != b.len() {
        return Err(Error::Dimension(format!(
            "constraint matrix has {} rows, right-hand side {}",
            a.nrows(),
            b.len()
        )));
    }
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let xs: Vec<_> = (0..a.ncols())
        .map(|_| problem.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    for i in 0..a.nrows() {
        let plus = problem.add_var(1.0, (0.0, f64::INFINITY));
        let minus = problem.add_var(1.0, (0.0, f64::INFINITY));
        let mut row: Vec<_> = xs
            .iter()
            .enumerate()
            .filter(|(j, _)| a[(i, *j)] != 0.0)
            .map(|(j, &v)| (v, a[(i, j)]))
            .collect();
        row.push((plus, 1.0));
        row.push((minus, -1.0));
        problem.add_constraint(row.as_slice(), ComparisonOp::Eq, b[i]);
    }
    let outcome = problem
        .solve()
        .map_err(|e| Error::Numeric(format!("linear program failed: {e}")))?;
    let solution = outcome
        .into_solution()
        .map_err(|_| Error::Numeric("linear program interrupted".into()))?;
    if solution.objective() > FEASIBILITY_TOL {
        return Ok(None);
    }
    Ok(Some(RVector::from_iterator(
        xs.len(),
        xs.iter().map(|&v| solution.var_value(v).max(0.0)),
    )))
}

/// Is `target` a nonnegative combination of `generators`?
pub fn in_cone(generators: &[RVector], target: &RVector) -> Result<Option<RVector>> {
    if generators.is_empty() {
        return Ok(if target.norm() <= FEASIBILITY_TOL {
            Some(RVector::zeros(0))
        } else {
            None
        });
    }
    let a = RMatrix::from_columns(generators);
    nonneg_solution(&a, target)
}

/// Convex weights expressing `target` as a mixture of `points`, if any.
pub fn convex_weights(points: &[RVector], target: &RVector) -> Result<Option<RVector>> {
    if points.is_empty() {
        return Ok(None);
    }
    let n = target.len();
    let mut a = RMatrix::zeros(n + 1, points.len());
    for (j, p) in points.iter().enumerate() {
        a.view_mut((0, j), (n, 1)).copy_from(p);
        a[(n, j)] = 1.0;
    }
    let mut b = RVector::zeros(n + 1);
    b.rows_mut(0, n).copy_from(target);
    b[n] = 1.0;
    nonneg_solution(&a, &b)
}
