use std::time::Instant;

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use super::{verify_point, SolveOptions, SolveOutcome, Status};
use crate::error::CpzError;
use crate::linalg::pseudo_inverse;
use crate::encode::FeasibilitySystem;
use crate::set::Vector;

/// Phase-1 linear program for a system without logarithmic constraints.
///
/// The equalities and bounds are kept exact and every linear inequality
/// gets a nonnegative slack; the sum of slacks is minimized. When the
/// equalities themselves are inconsistent a second program minimizes their
/// absolute violation instead, so that `best_violation` is meaningful.
pub fn solve_linear_feasibility(sys: &FeasibilitySystem, opts: &SolveOptions) -> Result<SolveOutcome, CpzError> {
    opts.validate()?;
    if sys.has_log_constraints() {
        return Err(CpzError::MalformedSystem("logarithmic constraints need the nonlinear solver".into()));
    }
    let start = Instant::now();

    let z = match phase_one(sys, false)? {
        Some((z, objective)) if objective <= opts.tol_eq => z,
        Some((z, _)) => return Ok(not_proven(sys, &z, opts, start)),
        None => match phase_one(sys, true)? {
            Some((z, _)) => return Ok(not_proven(sys, &z, opts, start)),
            None => return Err(CpzError::LinearProgram("relaxed program has no solution".into())),
        },
    };

    // Simplex output is exact up to pivoting noise; one least-squares
    // correction onto the equalities usually removes what is left.
    let mut candidates = vec![z.clone()];
    if sys.eq_matrix.nrows() > 0 {
        let correction = pseudo_inverse(&sys.eq_matrix).0 * (&sys.eq_rhs - &sys.eq_matrix * &z);
        candidates.push(&z + correction);
    }
    let mut best = None;
    for z in &candidates {
        let (cert, report) = verify_point(sys, z, opts)?;
        if report.passed() {
            return Ok(SolveOutcome {
                status: Status::Feasible,
                encoding: sys.encoding,
                certificate: Some(cert),
                best_violation: sys.max_violation(z),
                report: Some(report),
                wall_time: start.elapsed(),
                restarts_used: 1,
            });
        }
        best.get_or_insert(report);
    }
    Ok(SolveOutcome {
        status: Status::NotProven,
        encoding: sys.encoding,
        certificate: None,
        report: best,
        best_violation: sys.max_violation(&z),
        wall_time: start.elapsed(),
        restarts_used: 1,
    })
}

fn not_proven(sys: &FeasibilitySystem, z: &Vector, opts: &SolveOptions, start: Instant) -> SolveOutcome {
    SolveOutcome {
        status: Status::NotProven,
        encoding: sys.encoding,
        certificate: None,
        report: verify_point(sys, z, opts).ok().map(|(_, r)| r),
        best_violation: sys.max_violation(z),
        wall_time: start.elapsed(),
        restarts_used: 1,
    }
}

/// Solves the slack program. With `soften_equalities` every equality row
/// also gets a pair of slacks. Returns `None` when the program is
/// infeasible.
fn phase_one(sys: &FeasibilitySystem, soften_equalities: bool) -> Result<Option<(Vector, f64)>, CpzError> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Variable> = sys
        .lower_bounds
        .iter()
        .map(|lb| lp.add_var(0.0, (lb.unwrap_or(f64::NEG_INFINITY), f64::INFINITY)))
        .collect();

    for (row, &rhs) in sys.eq_matrix.row_iter().zip(sys.eq_rhs.iter()) {
        let mut expr: Vec<(Variable, f64)> =
            row.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(k, &c)| (vars[k], c)).collect();
        if soften_equalities {
            expr.push((lp.add_var(1.0, (0.0, f64::INFINITY)), 1.0));
            expr.push((lp.add_var(1.0, (0.0, f64::INFINITY)), -1.0));
        }
        lp.add_constraint(expr, ComparisonOp::Eq, rhs);
    }
    for ineq in &sys.linear_ineqs {
        let mut expr: Vec<(Variable, f64)> = ineq.terms.iter().map(|&(k, c)| (vars[k], c)).collect();
        expr.push((lp.add_var(1.0, (0.0, f64::INFINITY)), -1.0));
        lp.add_constraint(expr, ComparisonOp::Le, ineq.rhs);
    }

    match lp.solve() {
        Ok(sol) => {
            let z = Vector::from_iterator(vars.len(), vars.iter().map(|&v| sol[v]));
            Ok(Some((z, sol.objective())))
        }
        Err(minilp::Error::Infeasible) => Ok(None),
        Err(e) => Err(CpzError::LinearProgram(e.to_string())),
    }
}
