//! Feasibility solvers for the inclusion encodings.
//!
//! Every [`Status::Feasible`] outcome carries a certificate that has passed
//! [`verify_certificate`] at the requested tolerances; solver convergence
//! alone never counts.

mod lbfgs;
mod lp;
mod nlp;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

pub use lp::solve_linear_feasibility;
pub use nlp::solve_nonlinear_feasibility;

use crate::encode::{
    encode_cor1, encode_cz_lp, encode_prop1, verify_certificate, AlphaCertificate, CertificateCheckReport,
    Encoding, FeasibilitySystem, InclusionCertificate,
};
use crate::error::CpzError;
use crate::set::{ConPolyZonotope, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub tol_eq: f64,
    pub tol_ineq: f64,
    /// Iteration budget of each local run.
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Floor applied to logarithm arguments during the search.
    pub eps_log: f64,
    /// Wall-clock cap for one solve.
    pub time_limit: Duration,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_eq: 1e-8,
            tol_ineq: 1e-8,
            max_iter: 2000,
            restarts: 16,
            seed: 0,
            eps_log: 1e-12,
            time_limit: Duration::from_secs(120),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), CpzError> {
        let positive = [("tol_eq", self.tol_eq), ("tol_ineq", self.tol_ineq), ("eps_log", self.eps_log)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CpzError::InvalidOptions(format!("{name} must be positive, got {v}")));
            }
        }
        if self.restarts == 0 {
            return Err(CpzError::InvalidOptions("restarts must be at least 1".into()));
        }
        if self.time_limit.is_zero() {
            return Err(CpzError::InvalidOptions("time limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Feasible,
    /// No certificate was found. This says nothing about non-inclusion.
    NotProven,
}

/// Certificate returned by a solve.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    Base(InclusionCertificate),
    Alpha(AlphaCertificate),
}

impl Certificate {
    pub fn base(&self) -> &InclusionCertificate {
        match self {
            Certificate::Base(c) => c,
            Certificate::Alpha(a) => &a.base,
        }
    }

    pub fn alpha(&self) -> Option<&AlphaCertificate> {
        match self {
            Certificate::Base(_) => None,
            Certificate::Alpha(a) => Some(a),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: Status,
    pub encoding: Encoding,
    /// Present exactly when the status is feasible.
    pub certificate: Option<Certificate>,
    /// Verification of the returned certificate, or of the best candidate
    /// seen when nothing verified.
    pub report: Option<CertificateCheckReport>,
    /// Smallest worst-constraint violation over all candidates.
    pub best_violation: f64,
    pub wall_time: Duration,
    pub restarts_used: usize,
}

impl SolveOutcome {
    pub fn is_feasible(&self) -> bool {
        self.status == Status::Feasible
    }
}

/// Encoding selection for [`check_inclusion`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    Prop1,
    Cor1,
    CzLp,
    /// `cz-lp` when both sets are (constrained) zonotopes, `cor1` otherwise.
    #[default]
    Auto,
}

impl Method {
    /// The encoding this method resolves to for a given pair.
    pub fn resolve(self, inner: &ConPolyZonotope, outer: &ConPolyZonotope) -> Encoding {
        match self {
            Method::Prop1 => Encoding::Prop1,
            Method::Cor1 => Encoding::Cor1,
            Method::CzLp => Encoding::CzLp,
            Method::Auto if inner.classify().is_linear() && outer.classify().is_linear() => Encoding::CzLp,
            Method::Auto => Encoding::Cor1,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Prop1 => "prop1",
            Method::Cor1 => "cor1",
            Method::CzLp => "cz-lp",
            Method::Auto => "auto",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prop1" => Ok(Method::Prop1),
            "cor1" => Ok(Method::Cor1),
            "cz-lp" => Ok(Method::CzLp),
            "auto" => Ok(Method::Auto),
            other => Err(format!("unknown method '{other}' (expected prop1, cor1, cz-lp or auto)")),
        }
    }
}

/// Encodes `inner ⊆ outer` with the selected method and solves it.
pub fn check_inclusion(
    inner: &ConPolyZonotope,
    outer: &ConPolyZonotope,
    method: Method,
    opts: &SolveOptions,
) -> Result<SolveOutcome, CpzError> {
    opts.validate()?;
    match method.resolve(inner, outer) {
        Encoding::CzLp => solve_linear_feasibility(&encode_cz_lp(inner, outer)?, opts),
        Encoding::Cor1 => solve_nonlinear_feasibility(&encode_cor1(inner, outer)?, opts),
        Encoding::Prop1 => solve_nonlinear_feasibility(&encode_prop1(inner, outer)?, opts),
    }
}

/// Reads and verifies the certificate held by `z`.
pub(crate) fn verify_point(
    sys: &FeasibilitySystem,
    z: &Vector,
    opts: &SolveOptions,
) -> Result<(Certificate, CertificateCheckReport), CpzError> {
    let cert = match sys.alpha_certificate(z) {
        Some(alpha) => Certificate::Alpha(alpha),
        None => Certificate::Base(sys.certificate(z)),
    };
    let report = verify_certificate(&sys.inner, &sys.outer, cert.base(), opts.tol_eq, opts.tol_ineq)?;
    Ok((cert, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn default_options_are_valid() {
        SolveOptions::default().validate().unwrap();
        let bad = SolveOptions { restarts: 0, ..SolveOptions::default() };
        assert!(bad.validate().is_err());
        let bad = SolveOptions { tol_eq: 0.0, ..SolveOptions::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Prop1, Method::Cor1, Method::CzLp, Method::Auto] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("simplex".parse::<Method>().is_err());
    }

    #[test]
    fn auto_routes_by_kind() {
        let sq = fixtures::unit_square();
        assert_eq!(Method::Auto.resolve(&sq, &sq), Encoding::CzLp);
        let ex = fixtures::illustrative_example();
        assert_eq!(Method::Auto.resolve(&ex, &ex), Encoding::Cor1);
    }
}
