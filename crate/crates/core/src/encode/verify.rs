//! Exact evaluation of the inclusion conditions for a given certificate.
//!
//! Verification never smooths the absolute values and never floors the
//! logarithm. It is the only path by which a solver result is reported as
//! proven.

use std::collections::BTreeMap;

use super::certificate::{exponent_pinv, InclusionCertificate};
use super::system::Condition;
use crate::error::CpzError;
use crate::set::{ConPolyZonotope, Matrix, Vector};

/// Residuals, bounds and per-condition verdicts of one verification.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheckReport {
    /// Max absolute residual of each equality condition (0 when vacuous).
    pub eq_residuals: BTreeMap<Condition, f64>,
    /// `|gamma| + |Gamma| 1`, length `n2`.
    pub mu_e_bound: Vector,
    /// `|psi| + |Psi| 1`, length `q2`.
    pub mu_r_bound: Vector,
    /// `pinv(E2^T) log(mu_e_bound)`, length `s2`.
    pub ineq_lhs_e: Vector,
    /// `pinv(R2^T) log(mu_r_bound)`, length `s2` (zeros when `q2 = 0`).
    pub ineq_lhs_r: Vector,
    pub verdicts: BTreeMap<Condition, bool>,
    pub tol_eq: f64,
    pub tol_ineq: f64,
}

impl CertificateCheckReport {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    pub fn failed_conditions(&self) -> Vec<Condition> {
        self.verdicts.iter().filter(|(_, &ok)| !ok).map(|(&c, _)| c).collect()
    }

    pub fn max_eq_residual(&self) -> f64 {
        self.eq_residuals.values().copied().fold(0.0, f64::max)
    }

    pub fn max_ineq_lhs(&self) -> f64 {
        self.ineq_lhs_e.iter().chain(self.ineq_lhs_r.iter()).copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Checks the six inclusion conditions for `cert` with exact absolute
/// values and logarithms.
pub fn verify_certificate(
    inner: &ConPolyZonotope,
    outer: &ConPolyZonotope,
    cert: &InclusionCertificate,
    tol_eq: f64,
    tol_ineq: f64,
) -> Result<CertificateCheckReport, CpzError> {
    if inner.dim() != outer.dim() {
        return Err(CpzError::DimensionMismatch { inner: inner.dim(), outer: outer.dim() });
    }
    cert.check_shape(inner, outer)?;

    let mut eq_residuals = BTreeMap::new();
    let center = &inner.center - &outer.center - &outer.generators * &cert.center_shift;
    eq_residuals.insert(Condition::Center, amax(&center));
    let gens = &inner.generators - &outer.generators * &cert.generator_map;
    eq_residuals.insert(Condition::Generators, amax(&gens));

    let (cg, rhs) = if outer.has_constraints() {
        let f2 = &outer.constraint_generators;
        let lhs_c = &cert.row_map * &inner.constraint_generators_or_empty(cert.row_map.ncols());
        let cg = lhs_c - f2 * &cert.constraint_map;
        let rhs = &cert.row_map * &inner.constraint_rhs_or_empty(cert.row_map.ncols())
            - (&outer.constraint_rhs - f2 * &cert.constraint_shift);
        (amax(&cg), amax(&rhs))
    } else {
        (0.0, 0.0)
    };
    eq_residuals.insert(Condition::ConstraintGenerators, cg);
    eq_residuals.insert(Condition::ConstraintRhs, rhs);

    let mu_e_bound = abs_row_bound(&cert.generator_map, &cert.center_shift);
    let mu_r_bound = abs_row_bound(&cert.constraint_map, &cert.constraint_shift);
    let ineq_lhs_e = log_combination(&exponent_pinv(&outer.exponents), &mu_e_bound);
    let ineq_lhs_r = if outer.has_constraints() {
        log_combination(&exponent_pinv(&outer.constraint_exponents), &mu_r_bound)
    } else {
        Vector::zeros(outer.num_factors())
    };

    let mut verdicts = BTreeMap::new();
    for (&c, &r) in &eq_residuals {
        verdicts.insert(c, r <= tol_eq);
    }
    verdicts.insert(Condition::GeneratorBound, ineq_lhs_e.iter().all(|&v| v <= tol_ineq));
    verdicts.insert(Condition::ConstraintBound, ineq_lhs_r.iter().all(|&v| v <= tol_ineq));

    Ok(CertificateCheckReport {
        eq_residuals,
        mu_e_bound,
        mu_r_bound,
        ineq_lhs_e,
        ineq_lhs_r,
        verdicts,
        tol_eq,
        tol_ineq,
    })
}

impl ConPolyZonotope {
    // An unconstrained inner set contributes a 0 x q1 block to `Pi F1`.
    fn constraint_generators_or_empty(&self, p: usize) -> Matrix {
        if self.has_constraints() {
            self.constraint_generators.clone()
        } else {
            Matrix::zeros(p, 0)
        }
    }

    fn constraint_rhs_or_empty(&self, p: usize) -> Vector {
        if self.has_constraints() {
            self.constraint_rhs.clone()
        } else {
            Vector::zeros(p)
        }
    }
}

fn amax<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `|shift| + |map| 1`.
pub(crate) fn abs_row_bound(map: &Matrix, shift: &Vector) -> Vector {
    Vector::from_iterator(
        shift.len(),
        (0..shift.len()).map(|i| shift[i].abs() + map.row(i).iter().map(|v| v.abs()).sum::<f64>()),
    )
}

/// `weights * log(args)` evaluated sign-carefully: a zero argument gives
/// `-inf` through a positive weight and `+inf` through a negative one
/// (`+inf` wins when both occur); zero weights ignore the argument.
pub(crate) fn log_combination(weights: &Matrix, args: &Vector) -> Vector {
    Vector::from_iterator(
        weights.nrows(),
        weights.row_iter().map(|row| {
            let mut acc = 0.0;
            let mut minus_inf = false;
            let mut plus_inf = false;
            for (&w, &a) in row.iter().zip(args.iter()) {
                if w == 0.0 {
                    continue;
                }
                if a <= 0.0 {
                    if w > 0.0 {
                        minus_inf = true;
                    } else {
                        plus_inf = true;
                    }
                } else {
                    acc += w * a.ln();
                }
            }
            if plus_inf {
                f64::INFINITY
            } else if minus_inf {
                f64::NEG_INFINITY
            } else {
                acc
            }
        }),
    )
}
