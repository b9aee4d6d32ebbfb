//! The constrained polynomial zonotope representation.
//!
//! A set is the tuple `<c, G, E, F, theta, R>` describing
//!
//! ```text
//! { c + sum_i (prod_k lambda_k^E[k,i]) G[:,i]
//!   : sum_j (prod_k lambda_k^R[k,j]) F[:,j] = theta, |lambda|_inf <= 1 }
//! ```
//!
//! Polynomial zonotopes, constrained zonotopes and plain zonotopes are the
//! same type with an empty constraint block and/or identity exponents; see
//! [`SetKind`].

use std::fmt;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};

use crate::error::CpzError;

/// Real matrix type used throughout the crate.
pub type Matrix = DMatrix<f64>;
/// Real vector type used throughout the crate.
pub type Vector = DVector<f64>;
/// Exponent matrix. Entries are signed only so that invalid input can be
/// represented and reported by [`ConPolyZonotope::validate`].
pub type Exponents = DMatrix<i64>;

/// A constrained polynomial zonotope `<c, G, E, F, theta, R>`.
///
/// Fields are public so that arbitrary (possibly invalid) data can be
/// assembled and then checked with [`validate`](Self::validate); use
/// [`ConPolyZonotope::new`] to get a validated value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConPolyZonotope {
    /// Center, length `d`.
    pub center: Vector,
    /// Generator matrix, `d x n`.
    pub generators: Matrix,
    /// Generator exponents, `s x n`.
    pub exponents: Exponents,
    /// Constraint generators, `p x q` (zero-sized when unconstrained).
    pub constraint_generators: Matrix,
    /// Constraint right-hand side, length `p`.
    pub constraint_rhs: Vector,
    /// Constraint exponents, `s x q`.
    pub constraint_exponents: Exponents,
}

/// One invariant breach found by [`ConPolyZonotope::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    GeneratorRows { expected: usize, found: usize },
    ExponentColumns { expected: usize, found: usize },
    ConstraintExponentRows { expected: usize, found: usize },
    ConstraintExponentColumns { expected: usize, found: usize },
    RhsLength { expected: usize, found: usize },
    NegativeExponent { matrix: &'static str, row: usize, col: usize },
    IncompleteConstraintBlock,
    NonFinite { field: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GeneratorRows { expected, found } => {
                write!(f, "G has {found} rows, center has length {expected}")
            }
            Violation::ExponentColumns { expected, found } => {
                write!(f, "E has {found} columns, G has {expected}")
            }
            Violation::ConstraintExponentRows { expected, found } => {
                write!(f, "R has {found} rows, E has {expected}")
            }
            Violation::ConstraintExponentColumns { expected, found } => {
                write!(f, "R has {found} columns, F has {expected}")
            }
            Violation::RhsLength { expected, found } => {
                write!(f, "theta length mismatch: F has {expected} rows, theta has {found} entries")
            }
            Violation::NegativeExponent { matrix, row, col } => {
                write!(f, "negative exponent in {matrix} at ({row}, {col})")
            }
            Violation::IncompleteConstraintBlock => {
                write!(f, "constraint block incomplete: F, theta and R must be jointly present")
            }
            Violation::NonFinite { field } => write!(f, "non-finite value in {field}"),
        }
    }
}

/// Most specific representation class of a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetKind {
    /// Constrained polynomial zonotope (general case).
    Cpz,
    /// Polynomial zonotope: no constraints, non-identity exponents.
    Pz,
    /// Constrained zonotope: identity `E` and `R`, with constraints.
    Cz,
    /// Zonotope: identity `E`, no constraints.
    Z,
}

impl SetKind {
    /// True for the kinds handled by the linear (constrained zonotope) test.
    pub fn is_linear(self) -> bool {
        matches!(self, SetKind::Cz | SetKind::Z)
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetKind::Cpz => "CPZ",
            SetKind::Pz => "PZ",
            SetKind::Cz => "CZ",
            SetKind::Z => "Z",
        })
    }
}

/// A point of the factor domain.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPoint(pub Vector);

impl LambdaPoint {
    pub fn new(values: Vector) -> Self {
        LambdaPoint(values)
    }

    pub fn inf_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `|lambda|_inf <= 1`.
    pub fn is_admissible(&self) -> bool {
        self.inf_norm() <= 1.0
    }
}

impl Deref for LambdaPoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        self.0.as_slice()
    }
}

/// Result of [`ConPolyZonotope::evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub point: Vector,
    /// `sum_j (prod_k lambda_k^R[k,j]) F[:,j] - theta`.
    pub eq_residual: Vector,
}

impl ConPolyZonotope {
    /// Builds a set and checks every invariant.
    pub fn new(
        center: Vector,
        generators: Matrix,
        exponents: Exponents,
        constraint_generators: Matrix,
        constraint_rhs: Vector,
        constraint_exponents: Exponents,
    ) -> Result<Self, CpzError> {
        let set = ConPolyZonotope {
            center,
            generators,
            exponents,
            constraint_generators,
            constraint_rhs,
            constraint_exponents,
        };
        let violations = set.validate();
        if violations.is_empty() {
            Ok(set)
        } else {
            Err(CpzError::InvalidSet(violations))
        }
    }

    /// Builds a set without equality constraints.
    pub fn unconstrained(
        center: Vector,
        generators: Matrix,
        exponents: Exponents,
    ) -> Result<Self, CpzError> {
        let s = exponents.nrows();
        Self::new(
            center,
            generators,
            exponents,
            Matrix::zeros(0, 0),
            Vector::zeros(0),
            Exponents::zeros(s, 0),
        )
    }

    /// A zonotope `<c, G>` with identity exponents.
    pub fn zonotope(center: Vector, generators: Matrix) -> Result<Self, CpzError> {
        let n = generators.ncols();
        Self::unconstrained(center, generators, Exponents::identity(n, n))
    }

    /// A constrained zonotope `<c, G, I, F, theta, I>`.
    pub fn constrained_zonotope(
        center: Vector,
        generators: Matrix,
        constraint_generators: Matrix,
        constraint_rhs: Vector,
    ) -> Result<Self, CpzError> {
        let n = generators.ncols();
        Self::new(
            center,
            generators,
            Exponents::identity(n, n),
            constraint_generators,
            constraint_rhs,
            Exponents::identity(n, n),
        )
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Number of generators `n`.
    pub fn num_generators(&self) -> usize {
        self.generators.ncols()
    }

    /// Number of factors `s`.
    pub fn num_factors(&self) -> usize {
        self.exponents.nrows()
    }

    /// Number of equality constraints `p`.
    pub fn num_constraints(&self) -> usize {
        self.constraint_generators.nrows()
    }

    /// Number of constraint generators `q`.
    pub fn num_constraint_generators(&self) -> usize {
        self.constraint_generators.ncols()
    }

    pub fn has_constraints(&self) -> bool {
        !self.constraint_generators.is_empty()
    }

    /// Lists every invariant violation; an empty list means the set is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let d = self.center.len();
        let n = self.generators.ncols();
        let s = self.exponents.nrows();
        let (p, q) = self.constraint_generators.shape();

        if self.generators.nrows() != d {
            out.push(Violation::GeneratorRows { expected: d, found: self.generators.nrows() });
        }
        if self.exponents.ncols() != n {
            out.push(Violation::ExponentColumns { expected: n, found: self.exponents.ncols() });
        }

        let f_present = p * q > 0;
        let theta_present = !self.constraint_rhs.is_empty();
        let r_present = self.constraint_exponents.ncols() > 0;
        if f_present != theta_present || f_present != r_present {
            out.push(Violation::IncompleteConstraintBlock);
        } else if f_present {
            if self.constraint_rhs.len() != p {
                out.push(Violation::RhsLength { expected: p, found: self.constraint_rhs.len() });
            }
            if self.constraint_exponents.ncols() != q {
                out.push(Violation::ConstraintExponentColumns {
                    expected: q,
                    found: self.constraint_exponents.ncols(),
                });
            }
        }
        if r_present && self.constraint_exponents.nrows() != s {
            out.push(Violation::ConstraintExponentRows {
                expected: s,
                found: self.constraint_exponents.nrows(),
            });
        }

        for (name, m) in [("E", &self.exponents), ("R", &self.constraint_exponents)] {
            for (col, column) in m.column_iter().enumerate() {
                for (row, &v) in column.iter().enumerate() {
                    if v < 0 {
                        out.push(Violation::NegativeExponent { matrix: name, row, col });
                    }
                }
            }
        }

        let fields: [(&'static str, &[f64]); 4] = [
            ("c", self.center.as_slice()),
            ("G", self.generators.as_slice()),
            ("F", self.constraint_generators.as_slice()),
            ("theta", self.constraint_rhs.as_slice()),
        ];
        for (field, values) in fields {
            if !values.iter().all(|v| v.is_finite()) {
                out.push(Violation::NonFinite { field });
            }
        }
        out
    }

    /// Evaluates the point and the equality residual at `lambda`.
    ///
    /// No admissibility check on `|lambda|_inf` is made.
    pub fn evaluate(&self, lambda: &[f64]) -> Result<Evaluation, CpzError> {
        self.check_lambda(lambda)?;
        let mono = monomials(&self.exponents, lambda);
        let point = &self.center + &self.generators * mono;
        Ok(Evaluation { point, eq_residual: self.constraint_residual(lambda) })
    }

    /// `sum_j (prod_k lambda_k^R[k,j]) F[:,j] - theta` without the point.
    pub fn constraint_residual(&self, lambda: &[f64]) -> Vector {
        if !self.has_constraints() {
            return Vector::zeros(0);
        }
        let mono = monomials(&self.constraint_exponents, lambda);
        &self.constraint_generators * mono - &self.constraint_rhs
    }

    pub(crate) fn check_lambda(&self, lambda: &[f64]) -> Result<(), CpzError> {
        if lambda.len() != self.num_factors() {
            return Err(CpzError::LambdaLength { expected: self.num_factors(), found: lambda.len() });
        }
        Ok(())
    }

    /// Most specific kind per the identity/emptiness rules.
    pub fn classify(&self) -> SetKind {
        let e_identity = is_identity(&self.exponents);
        if !self.has_constraints() {
            if e_identity {
                SetKind::Z
            } else {
                SetKind::Pz
            }
        } else if e_identity && is_identity(&self.constraint_exponents) {
            SetKind::Cz
        } else {
            SetKind::Cpz
        }
    }

    /// Image under `x -> M x`: `<Mc, MG, E, F, theta, R>`.
    pub fn linear_map(&self, m: &Matrix) -> Result<Self, CpzError> {
        if m.ncols() != self.dim() {
            return Err(CpzError::MapDimension { expected: self.dim(), found: m.ncols() });
        }
        Ok(ConPolyZonotope {
            center: m * &self.center,
            generators: m * &self.generators,
            ..self.clone()
        })
    }

    /// The same set with the constraint block removed.
    pub fn without_constraints(&self) -> Self {
        ConPolyZonotope {
            constraint_generators: Matrix::zeros(0, 0),
            constraint_rhs: Vector::zeros(0),
            constraint_exponents: Exponents::zeros(self.num_factors(), 0),
            ..self.clone()
        }
    }

    /// Right-multiplies `G` and `F` by diagonal scalings (column scaling).
    pub fn scale_columns(&self, generator_scale: &[f64], constraint_scale: &[f64]) -> Result<Self, CpzError> {
        if generator_scale.len() != self.num_generators() {
            return Err(CpzError::ScaleLength {
                expected: self.num_generators(),
                found: generator_scale.len(),
            });
        }
        if constraint_scale.len() != self.num_constraint_generators() {
            return Err(CpzError::ScaleLength {
                expected: self.num_constraint_generators(),
                found: constraint_scale.len(),
            });
        }
        let mut out = self.clone();
        for (j, &k) in generator_scale.iter().enumerate() {
            out.generators.column_mut(j).scale_mut(k);
        }
        for (j, &k) in constraint_scale.iter().enumerate() {
            out.constraint_generators.column_mut(j).scale_mut(k);
        }
        Ok(out)
    }
}

fn is_identity(m: &Exponents) -> bool {
    m.is_square()
        && m.nrows() > 0
        && m.row_iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &v)| v == if i == j { 1 } else { 0 }))
}

/// `x^k` by repeated multiplication, so that `0^0 = 1`.
pub(crate) fn int_pow(x: f64, k: i64) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k.unsigned_abs() {
        acc *= x;
    }
    if k < 0 {
        1.0 / acc
    } else {
        acc
    }
}

/// Column monomials `prod_k lambda_k^exps[k, j]`.
pub(crate) fn monomials(exps: &Exponents, lambda: &[f64]) -> Vector {
    Vector::from_iterator(
        exps.ncols(),
        exps.column_iter().map(|col| {
            col.iter().zip(lambda).map(|(&e, &l)| int_pow(l, e)).product::<f64>()
        }),
    )
}

/// Jacobian of the column monomials with respect to `lambda` (`ncols x s`).
pub(crate) fn monomial_jacobian(exps: &Exponents, lambda: &[f64]) -> Matrix {
    let s = lambda.len();
    let mut jac = Matrix::zeros(exps.ncols(), s);
    for (j, col) in exps.column_iter().enumerate() {
        for k in 0..s {
            let ek = col[k];
            if ek == 0 {
                continue;
            }
            let mut v = ek as f64 * int_pow(lambda[k], ek - 1);
            for (m, (&e, &l)) in col.iter().zip(lambda).enumerate() {
                if m != k {
                    v *= int_pow(l, e);
                }
            }
            jac[(j, k)] = v;
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn example_set_is_valid() {
        let set = fixtures::illustrative_example();
        assert!(set.validate().is_empty());
        assert_eq!(set.dim(), 2);
        assert_eq!(set.num_generators(), 4);
        assert_eq!(set.num_factors(), 3);
        assert_eq!(set.num_constraints(), 1);
        assert_eq!(set.num_constraint_generators(), 3);
    }

    #[test]
    fn negative_exponent_is_reported_once() {
        let mut set = fixtures::illustrative_example();
        set.exponents[(1, 2)] = -1;
        let v = set.validate();
        assert_eq!(v, vec![Violation::NegativeExponent { matrix: "E", row: 1, col: 2 }]);
        assert!(v[0].to_string().contains("negative exponent"));
    }

    #[test]
    fn theta_length_mismatch_is_reported_once() {
        let mut set = fixtures::illustrative_example();
        set.constraint_rhs = dvector![1.5, 0.0];
        let v = set.validate();
        assert_eq!(v, vec![Violation::RhsLength { expected: 1, found: 2 }]);
        assert!(v[0].to_string().contains("theta length mismatch"));
    }

    #[test]
    fn missing_theta_is_incomplete_block() {
        let mut set = fixtures::illustrative_example();
        set.constraint_rhs = Vector::zeros(0);
        assert_eq!(set.validate(), vec![Violation::IncompleteConstraintBlock]);
    }

    #[test]
    fn evaluate_example_points() {
        let set = fixtures::illustrative_example();
        let ev = set.evaluate(&[1.0, 0.5, 0.0]).unwrap();
        assert_eq!(ev.point, dvector![1.0, 0.5]);
        assert_eq!(ev.eq_residual, dvector![0.0]);

        let ev = set.evaluate(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(ev.point, dvector![0.0, 0.0]);
        assert_eq!(ev.eq_residual, dvector![-1.5]);
    }

    #[test]
    fn zero_generators_evaluate_to_center() {
        let mut set = fixtures::illustrative_example();
        set.center = dvector![0.3, -2.0];
        set.generators.fill(0.0);
        let ev = set.evaluate(&[0.2, -0.7, 0.9]).unwrap();
        assert_eq!(ev.point, set.center);
        // 0.9 * (-0.7) ... : lambda2 + lambda1*lambda3 + lambda1^2 - 1.5
        let expected = -0.7 + 0.2 * 0.9 + 0.2 * 0.2 - 1.5;
        assert!((ev.eq_residual[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn evaluate_rejects_wrong_length() {
        let set = fixtures::illustrative_example();
        assert!(matches!(
            set.evaluate(&[0.0, 0.0]),
            Err(CpzError::LambdaLength { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn zero_to_the_zero_is_one() {
        assert_eq!(int_pow(0.0, 0), 1.0);
        assert_eq!(int_pow(-0.5, 3), -0.125);
        let m = monomials(&dmatrix![0i64, 2; 0, 1], &[0.0, 3.0]);
        assert_eq!(m, dvector![1.0, 0.0]);
    }

    #[test]
    fn classify_kinds() {
        let set = fixtures::illustrative_example();
        assert_eq!(set.classify(), SetKind::Cpz);
        assert_eq!(set.without_constraints().classify(), SetKind::Pz);

        let cz = ConPolyZonotope::constrained_zonotope(
            dvector![0.0, 0.0],
            dmatrix![1.0, 0.0, 1.0; 0.0, 1.0, 1.0],
            dmatrix![1.0, 1.0, 1.0],
            dvector![0.5],
        )
        .unwrap();
        assert_eq!(cz.classify(), SetKind::Cz);
        assert_eq!(cz.without_constraints().classify(), SetKind::Z);
    }

    #[test]
    fn identity_map_is_noop() {
        let set = fixtures::illustrative_example();
        assert_eq!(set.linear_map(&Matrix::identity(2, 2)).unwrap(), set);
    }

    #[test]
    fn doubling_map() {
        let set = fixtures::illustrative_example();
        let out = set.linear_map(&(Matrix::identity(2, 2) * 2.0)).unwrap();
        assert_eq!(out.center, dvector![0.0, 0.0]);
        assert_eq!(out.generators, &set.generators * 2.0);
        assert_eq!(out.exponents, set.exponents);
        assert_eq!(out.constraint_generators, set.constraint_generators);
        assert_eq!(out.constraint_rhs, set.constraint_rhs);
        assert_eq!(out.constraint_exponents, set.constraint_exponents);
    }

    #[test]
    fn projection_map() {
        let set = fixtures::illustrative_example();
        let out = set.linear_map(&dmatrix![1.0, 0.0]).unwrap();
        assert_eq!(out.dim(), 1);
        assert_eq!(out.evaluate(&[1.0, 0.5, 0.0]).unwrap().point, dvector![1.0]);
        assert!(matches!(
            set.linear_map(&dmatrix![1.0, 0.0, 0.0]),
            Err(CpzError::MapDimension { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn monomial_jacobian_matches_finite_differences() {
        let set = fixtures::illustrative_example();
        let lambda = [0.3, -0.6, 0.8];
        let jac = monomial_jacobian(&set.exponents, &lambda);
        let h = 1e-6;
        for k in 0..3 {
            let mut up = lambda;
            let mut dn = lambda;
            up[k] += h;
            dn[k] -= h;
            let fd = (monomials(&set.exponents, &up) - monomials(&set.exponents, &dn)) / (2.0 * h);
            for j in 0..4 {
                assert!((fd[j] - jac[(j, k)]).abs() < 1e-8);
            }
        }
    }
}
