use crate::error::CpzError;
use crate::linalg::pseudo_inverse;
use crate::set::{ConPolyZonotope, Matrix, Vector};

/// Witness matrices for the sufficient inclusion conditions.
///
/// With `x = c1 + G1 m1(lambda1)`, the outer factors are chosen so that
/// `m2(lambda2) = gamma + Gamma m1(lambda1)` and the outer constraint
/// monomials equal `psi + Psi r1(lambda1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionCertificate {
    /// `gamma`, length `n2`.
    pub center_shift: Vector,
    /// `Gamma`, `n2 x n1`.
    pub generator_map: Matrix,
    /// `Pi`, `p2 x p1`.
    pub row_map: Matrix,
    /// `Psi`, `q2 x q1`.
    pub constraint_map: Matrix,
    /// `psi`, length `q2`.
    pub constraint_shift: Vector,
}

/// Shapes a certificate must have for a given (inner, outer) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertificateShape {
    pub n_inner: usize,
    pub n_outer: usize,
    pub p_inner: usize,
    pub p_outer: usize,
    pub q_inner: usize,
    pub q_outer: usize,
}

impl CertificateShape {
    pub fn of(inner: &ConPolyZonotope, outer: &ConPolyZonotope) -> Self {
        CertificateShape {
            n_inner: inner.num_generators(),
            n_outer: outer.num_generators(),
            p_inner: inner.num_constraints(),
            p_outer: outer.num_constraints(),
            q_inner: inner.num_constraint_generators(),
            q_outer: outer.num_constraint_generators(),
        }
    }
}

impl InclusionCertificate {
    /// The trivial certificate for `set ⊆ set`.
    pub fn identity(set: &ConPolyZonotope) -> Self {
        let n = set.num_generators();
        let p = set.num_constraints();
        let q = set.num_constraint_generators();
        InclusionCertificate {
            center_shift: Vector::zeros(n),
            generator_map: Matrix::identity(n, n),
            row_map: Matrix::identity(p, p),
            constraint_map: Matrix::identity(q, q),
            constraint_shift: Vector::zeros(q),
        }
    }

    pub fn check_shape(&self, inner: &ConPolyZonotope, outer: &ConPolyZonotope) -> Result<(), CpzError> {
        let s = CertificateShape::of(inner, outer);
        let checks = [
            ("gamma", (self.center_shift.len(), 1), (s.n_outer, 1)),
            ("Gamma", self.generator_map.shape(), (s.n_outer, s.n_inner)),
            ("Pi", self.row_map.shape(), (s.p_outer, s.p_inner)),
            ("Psi", self.constraint_map.shape(), (s.q_outer, s.q_inner)),
            ("psi", (self.constraint_shift.len(), 1), (s.q_outer, 1)),
        ];
        for (name, found, expected) in checks {
            if found != expected {
                return Err(CpzError::CertificateShape(format!(
                    "{name} is {}x{}, expected {}x{}",
                    found.0, found.1, expected.0, expected.1
                )));
            }
        }
        Ok(())
    }

    /// Builds the general certificate from a constrained-zonotope witness
    /// `(gamma, Gamma)`: `Psi = Gamma`, `psi = gamma`, and
    /// `Pi = [F2 Psi, theta2 - F2 psi] * pinv([F1, theta1])`.
    ///
    /// An unconstrained inner set has `q1 = 0`, so `Psi` is empty there.
    pub fn from_linear_witness(
        inner: &ConPolyZonotope,
        outer: &ConPolyZonotope,
        center_shift: Vector,
        generator_map: Matrix,
    ) -> Self {
        let q_outer = outer.num_constraint_generators();
        let q_inner = inner.num_constraint_generators();
        let p_outer = outer.num_constraints();
        let p_inner = inner.num_constraints();

        if q_outer == 0 {
            return InclusionCertificate {
                center_shift,
                generator_map,
                row_map: Matrix::zeros(0, p_inner),
                constraint_map: Matrix::zeros(0, q_inner),
                constraint_shift: Vector::zeros(0),
            };
        }
        let constraint_map = if q_inner == 0 {
            Matrix::zeros(q_outer, 0)
        } else {
            generator_map.clone()
        };
        let constraint_shift = center_shift.clone();
        let f2 = &outer.constraint_generators;
        let mut target = Matrix::zeros(p_outer, q_inner + 1);
        target.columns_mut(0, q_inner).copy_from(&(f2 * &constraint_map));
        target.set_column(q_inner, &(&outer.constraint_rhs - f2 * &constraint_shift));

        let row_map = if p_inner == 0 {
            Matrix::zeros(p_outer, 0)
        } else {
            let mut stacked = Matrix::zeros(p_inner, q_inner + 1);
            stacked.columns_mut(0, q_inner).copy_from(&inner.constraint_generators);
            stacked.set_column(q_inner, &inner.constraint_rhs);
            target * pseudo_inverse(&stacked).0
        };
        InclusionCertificate { center_shift, generator_map, row_map, constraint_map, constraint_shift }
    }
}

/// A certificate together with the nonnegative split variables of the
/// smooth (absolute-value free) encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCertificate {
    pub base: InclusionCertificate,
    /// `alpha_Gamma`, `2(n1+1) x n2`, nonnegative.
    pub generator_split: Matrix,
    /// `alpha_Psi`, `2(q1+1) x q2`, nonnegative.
    pub constraint_split: Matrix,
}

/// Evaluation of the smooth conditions of an [`AlphaCertificate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCheck {
    /// Worst residual of the two linking equalities.
    pub linking_residual: f64,
    /// Smallest split entry (0 when there are none).
    pub min_alpha: f64,
    /// `pinv(E2^T) log(alpha_Gamma^T 1)`.
    pub generator_lhs: Vector,
    /// `pinv(R2^T) log(alpha_Psi^T 1)`.
    pub constraint_lhs: Vector,
}

impl SplitCheck {
    pub fn passes(&self, tol_eq: f64, tol_ineq: f64) -> bool {
        self.linking_residual <= tol_eq
            && self.min_alpha >= -tol_eq
            && self.generator_lhs.iter().chain(self.constraint_lhs.iter()).all(|&v| v <= tol_ineq)
    }
}

/// `[M v]^T`, the stacked matrix the split variables must reproduce.
pub(crate) fn stacked_transpose(map: &Matrix, shift: &Vector) -> Matrix {
    let (rows, cols) = map.shape();
    let mut out = Matrix::zeros(cols + 1, rows);
    out.rows_mut(0, cols).copy_from(&map.transpose());
    out.set_row(cols, &shift.transpose());
    out
}

/// `[I -I] alpha`.
pub(crate) fn fold_split(alpha: &Matrix) -> Matrix {
    let half = alpha.nrows() / 2;
    alpha.rows(0, half) - alpha.rows(half, half)
}

/// Positive/negative parts of `m`, stacked.
pub(crate) fn split_parts(m: &Matrix) -> Matrix {
    let (rows, cols) = m.shape();
    let mut out = Matrix::zeros(2 * rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let v = m[(i, j)];
            out[(i, j)] = v.max(0.0);
            out[(i + rows, j)] = (-v).max(0.0);
        }
    }
    out
}

impl AlphaCertificate {
    /// Completes a certificate with the minimal split (positive and
    /// negative parts).
    pub fn from_base(base: InclusionCertificate) -> Self {
        let generator_split = split_parts(&stacked_transpose(&base.generator_map, &base.center_shift));
        let constraint_split =
            split_parts(&stacked_transpose(&base.constraint_map, &base.constraint_shift));
        AlphaCertificate { base, generator_split, constraint_split }
    }

    /// Evaluates linking equalities, nonnegativity and the smooth log
    /// inequalities against `outer`.
    pub fn check_split(&self, outer: &ConPolyZonotope) -> SplitCheck {
        let b = &self.base;
        let gen_link = stacked_transpose(&b.generator_map, &b.center_shift) - fold_split(&self.generator_split);
        let con_link =
            stacked_transpose(&b.constraint_map, &b.constraint_shift) - fold_split(&self.constraint_split);
        let linking_residual = [gen_link.amax_or_zero(), con_link.amax_or_zero()].into_iter().fold(0.0, f64::max);
        let min_alpha = self
            .generator_split
            .iter()
            .chain(self.constraint_split.iter())
            .copied()
            .reduce(f64::min)
            .unwrap_or(0.0);

        let s = outer.num_factors();
        let col_sums = |a: &Matrix| Vector::from_iterator(a.ncols(), a.column_iter().map(|c| c.sum()));
        let generator_lhs =
            super::verify::log_combination(&exponent_pinv(&outer.exponents), &col_sums(&self.generator_split));
        let constraint_lhs = if outer.has_constraints() {
            super::verify::log_combination(
                &exponent_pinv(&outer.constraint_exponents),
                &col_sums(&self.constraint_split),
            )
        } else {
            Vector::zeros(s)
        };
        SplitCheck { linking_residual, min_alpha, generator_lhs, constraint_lhs }
    }
}

/// `pinv(X^T)` for an integer exponent matrix `X`.
pub(crate) fn exponent_pinv(exps: &crate::set::Exponents) -> Matrix {
    pseudo_inverse(&exponent_transpose(exps)).0
}

pub(crate) fn exponent_transpose(exps: &crate::set::Exponents) -> Matrix {
    exps.transpose().map(|v| v as f64)
}

trait AmaxOrZero {
    fn amax_or_zero(&self) -> f64;
}

impl AmaxOrZero for Matrix {
    fn amax_or_zero(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.amax()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn identity_shape_matches_self_pair() {
        let set = fixtures::illustrative_example();
        InclusionCertificate::identity(&set).check_shape(&set, &set).unwrap();
        let wrong = InclusionCertificate { center_shift: dvector![0.0], ..InclusionCertificate::identity(&set) };
        assert!(matches!(wrong.check_shape(&set, &set), Err(CpzError::CertificateShape(_))));
    }

    #[test]
    fn split_round_trip() {
        let m = dmatrix![1.0, -2.0; 0.5, 0.0];
        let v = dvector![-0.25, 3.0];
        let st = stacked_transpose(&m, &v);
        assert_eq!(st, dmatrix![1.0, 0.5; -2.0, 0.0; -0.25, 3.0]);
        assert_eq!(fold_split(&split_parts(&st)), st);
    }

    #[test]
    fn minimal_split_sums_to_abs_bound() {
        let set = fixtures::illustrative_example();
        let mut base = InclusionCertificate::identity(&set);
        base.center_shift[1] = -0.3;
        base.generator_map[(1, 2)] = 0.2;
        let alpha = AlphaCertificate::from_base(base.clone());
        let sums: Vec<f64> = alpha.generator_split.column_iter().map(|c| c.sum()).collect();
        assert!((sums[1] - 1.5).abs() < 1e-15);
        let check = alpha.check_split(&set);
        assert_eq!(check.linking_residual, 0.0);
        assert!(check.min_alpha >= 0.0);
    }
}
