use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::lbfgs::minimize;
use super::{verify_point, Certificate, SolveOptions, SolveOutcome, Status};
use crate::encode::{
    guarded_log, guarded_log_derivative, AlphaCertificate, CertificateCheckReport, FeasibilitySystem,
    InclusionCertificate,
};
use crate::error::CpzError;
use crate::linalg::affine_solution;
use crate::set::{Matrix, Vector};

/// Standard deviation of the random restart coordinates.
const RESTART_SCALE: f64 = 0.5;

/// Multi-start penalty search for a system with logarithmic constraints.
///
/// The equalities are eliminated as `z = z0 + N y` with `N` an orthonormal
/// nullspace basis. In `y` a sum of squared hinge violations is minimized
/// with L-BFGS, the log rows shifted by a small margin so that a zero merit
/// leaves room for rounding. Restart 0 starts from the identity-shaped
/// certificate projected onto the equalities, restart 1 from `y = 0`, the
/// rest from Gaussian `y`. Every start point and every local minimum is
/// handed to the exact verifier; the first that passes is returned.
pub fn solve_nonlinear_feasibility(sys: &FeasibilitySystem, opts: &SolveOptions) -> Result<SolveOutcome, CpzError> {
    opts.validate()?;
    let start = Instant::now();
    let deadline = start + opts.time_limit;

    let affine = affine_solution(&sys.eq_matrix, &sys.eq_rhs);
    let z0 = affine.particular;
    let basis = affine.basis;
    let mut search = Search { sys, opts, best: None, best_violation: f64::INFINITY };

    if affine.residual > opts.tol_eq {
        // The linear part alone is inconsistent; no certificate exists.
        if let Some(found) = search.consider(&z0)? {
            return Ok(found.finish(start, 0));
        }
        return Ok(search.finish(start, 0));
    }

    let merit = Merit { sys, margin: opts.tol_ineq / 10.0, eps_log: opts.eps_log };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let normal = Normal::new(0.0, RESTART_SCALE).expect("valid scale");

    for restart in 0..opts.restarts {
        if restart > 0 && Instant::now() >= deadline {
            return Ok(search.finish(start, restart));
        }
        let y0 = match restart {
            0 => basis.tr_mul(&(sys.embed(&structural_guess(sys)) - &z0)),
            1 => Vector::zeros(basis.ncols()),
            _ => Vector::from_fn(basis.ncols(), |_, _| normal.sample(&mut rng)),
        };
        let lift = |y: &Vector| &z0 + &basis * y;
        if let Some(outcome) = search.consider(&lift(&y0))? {
            return Ok(outcome.finish(start, restart + 1));
        }
        let objective = |y: &Vector| {
            let (v, gz) = merit.eval(&lift(y));
            (v, basis.tr_mul(&gz))
        };
        let local = minimize(objective, y0, opts.max_iter, deadline);
        if let Some(outcome) = search.consider(&lift(&local))? {
            return Ok(outcome.finish(start, restart + 1));
        }
    }
    Ok(search.finish(start, opts.restarts))
}

/// `gamma = 0`, `psi = 0` and rectangular identities for the maps: exact
/// for self-inclusion, a reasonable start otherwise.
fn structural_guess(sys: &FeasibilitySystem) -> InclusionCertificate {
    let (inner, outer) = (&sys.inner, &sys.outer);
    InclusionCertificate {
        center_shift: Vector::zeros(outer.num_generators()),
        generator_map: Matrix::identity(outer.num_generators(), inner.num_generators()),
        row_map: Matrix::identity(outer.num_constraints(), inner.num_constraints()),
        constraint_map: Matrix::identity(outer.num_constraint_generators(), inner.num_constraint_generators()),
        constraint_shift: Vector::zeros(outer.num_constraint_generators()),
    }
}

struct Search<'a> {
    sys: &'a FeasibilitySystem,
    opts: &'a SolveOptions,
    best: Option<CertificateCheckReport>,
    best_violation: f64,
}

/// A verified certificate waiting for its timing information.
struct Found {
    encoding: crate::encode::Encoding,
    certificate: Certificate,
    report: CertificateCheckReport,
    violation: f64,
}

impl Found {
    fn finish(self, start: Instant, restarts_used: usize) -> SolveOutcome {
        SolveOutcome {
            status: Status::Feasible,
            encoding: self.encoding,
            certificate: Some(self.certificate),
            report: Some(self.report),
            best_violation: self.violation,
            wall_time: start.elapsed(),
            restarts_used,
        }
    }
}

impl Search<'_> {
    /// Verifies the certificate held by `z`. A split certificate is
    /// replaced by the minimal split of its base, for which the smooth and
    /// the exact bound coincide.
    fn consider(&mut self, z: &Vector) -> Result<Option<Found>, CpzError> {
        let violation = self.sys.max_violation(z);
        let (cert, report) = verify_point(self.sys, z, self.opts)?;
        if report.passed() {
            let certificate = match cert {
                Certificate::Alpha(a) => Certificate::Alpha(AlphaCertificate::from_base(a.base)),
                base => base,
            };
            return Ok(Some(Found { encoding: self.sys.encoding, certificate, report, violation }));
        }
        let better = match &self.best {
            None => true,
            Some(b) => score(&report) < score(b),
        };
        if better {
            self.best = Some(report);
        }
        self.best_violation = self.best_violation.min(violation);
        Ok(None)
    }

    fn finish(self, start: Instant, restarts_used: usize) -> SolveOutcome {
        SolveOutcome {
            status: Status::NotProven,
            encoding: self.sys.encoding,
            certificate: None,
            report: self.best,
            best_violation: self.best_violation,
            wall_time: start.elapsed(),
            restarts_used,
        }
    }
}

fn score(r: &CertificateCheckReport) -> f64 {
    r.max_eq_residual().max(r.max_ineq_lhs())
}

/// Squared-hinge merit over the inequality part of a system.
struct Merit<'a> {
    sys: &'a FeasibilitySystem,
    margin: f64,
    eps_log: f64,
}

impl Merit<'_> {
    fn eval(&self, z: &Vector) -> (f64, Vector) {
        let mut value = 0.0;
        let mut grad = Vector::zeros(z.len());

        for block in &self.sys.log_blocks {
            if block.args.is_empty() {
                continue;
            }
            let args = block.arguments(z);
            let logs = args.map(|a| guarded_log(a, self.eps_log));
            let rows = &block.weights * &logs;
            let hinge = rows.map(|v| (v + self.margin).max(0.0));
            value += hinge.norm_squared();
            if hinge.iter().all(|&h| h == 0.0) {
                continue;
            }
            let d_logs = block.weights.tr_mul(&hinge) * 2.0;
            for (j, arg) in block.args.iter().enumerate() {
                let d_arg = d_logs[j] * guarded_log_derivative(args[j], self.eps_log);
                if d_arg == 0.0 {
                    continue;
                }
                for &(k, c) in &arg.terms {
                    let dk = if arg.absolute { c * sign(z[k]) } else { c };
                    grad[k] += d_arg * dk;
                }
            }
        }
        for (k, lb) in self.sys.lower_bounds.iter().enumerate() {
            if let Some(lb) = lb {
                let h = (lb - z[k]).max(0.0);
                value += h * h;
                grad[k] -= 2.0 * h;
            }
        }
        for ineq in &self.sys.linear_ineqs {
            let h = ineq.excess(z).max(0.0);
            if h > 0.0 {
                value += h * h;
                for &(k, c) in &ineq.terms {
                    grad[k] += 2.0 * h * c;
                }
            }
        }
        (value, grad)
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{encode_cor1, encode_prop1};
    use crate::fixtures;

    fn finite_difference(merit: &Merit, z: &Vector) -> Vector {
        let h = 1e-6;
        Vector::from_fn(z.len(), |k, _| {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            (merit.eval(&zp).0 - merit.eval(&zm).0) / (2.0 * h)
        })
    }

    #[test]
    fn merit_gradient_matches_finite_differences() {
        let p1 = fixtures::scaled_example(1);
        let p3 = fixtures::scaled_example(3);
        for sys in [encode_cor1(&p3, &p1).unwrap(), encode_prop1(&p3, &p1).unwrap()] {
            let merit = Merit { sys: &sys, margin: 1e-9, eps_log: 1e-12 };
            let z = Vector::from_fn(sys.num_vars, |k, _| 0.3 + 0.1 * ((k * 7 % 11) as f64) - 0.5 * (k % 2) as f64);
            let (_, g) = merit.eval(&z);
            let fd = finite_difference(&merit, &z);
            let err = (&g - &fd).amax() / g.amax().max(1.0);
            assert!(err < 1e-5, "relative gradient error {err}");
        }
    }

    #[test]
    fn self_inclusion_of_example() {
        let set = fixtures::illustrative_example();
        let out = solve_nonlinear_feasibility(&encode_cor1(&set, &set).unwrap(), &SolveOptions::default()).unwrap();
        assert!(out.is_feasible());
        let cert = out.certificate.unwrap();
        let id = InclusionCertificate::identity(&set);
        assert!((&cert.base().generator_map - &id.generator_map).amax() < 1e-8);
        assert!(cert.base().center_shift.amax() < 1e-8);
    }

    #[test]
    fn forward_pair_is_proven_and_reverse_is_not() {
        let p1 = fixtures::scaled_example(1);
        let p2 = fixtures::scaled_example(2);
        let opts = SolveOptions::default();
        let fwd = solve_nonlinear_feasibility(&encode_cor1(&p1, &p2).unwrap(), &opts).unwrap();
        assert!(fwd.is_feasible());
        let alpha = fwd.certificate.as_ref().unwrap().alpha().unwrap();
        assert!(alpha.check_split(&p2).passes(opts.tol_eq, opts.tol_ineq));
        let rev = solve_nonlinear_feasibility(&encode_cor1(&p2, &p1).unwrap(), &opts).unwrap();
        assert_eq!(rev.status, Status::NotProven);
        assert!(rev.best_violation > 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let p1 = fixtures::scaled_example(1);
        let p3 = fixtures::scaled_example(3);
        let opts = SolveOptions { restarts: 3, max_iter: 200, ..SolveOptions::default() };
        let a = solve_nonlinear_feasibility(&encode_cor1(&p3, &p1).unwrap(), &opts).unwrap();
        let b = solve_nonlinear_feasibility(&encode_cor1(&p3, &p1).unwrap(), &opts).unwrap();
        assert_eq!(a.best_violation, b.best_violation);
        assert_eq!(a.restarts_used, b.restarts_used);
    }
}
