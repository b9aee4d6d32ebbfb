//! Dense linear algebra helpers built on nalgebra's SVD.

use nalgebra::SymmetricEigen;

use crate::set::{Matrix, Vector};

/// Singular values below `RANK_TOLERANCE * sigma_max` are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Moore-Penrose pseudo-inverse and numerical rank.
pub fn pseudo_inverse(m: &Matrix) -> (Matrix, usize) {
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return (Matrix::zeros(cols, rows), 0);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sigma_max = svd.singular_values.max();
    let cutoff = RANK_TOLERANCE * sigma_max;

    let mut pinv = Matrix::zeros(cols, rows);
    let mut rank = 0;
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma > cutoff && sigma > 0.0 {
            rank += 1;
            pinv += (v_t.row(i).transpose() / sigma) * u.column(i).transpose();
        }
    }
    (pinv, rank)
}

/// Numerical rank with the same cutoff as [`pseudo_inverse`].
pub fn rank(m: &Matrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let cutoff = RANK_TOLERANCE * sv.max();
    sv.iter().filter(|&&s| s > cutoff && s > 0.0).count()
}

/// Solution set of `A z = b` written as `particular + basis * y`.
#[derive(Debug, Clone)]
pub struct AffineSolution {
    /// Minimum-norm least-squares solution.
    pub particular: Vector,
    /// Orthonormal basis of the nullspace of `A` (columns).
    pub basis: Matrix,
    /// `|A particular - b|_inf`; nonzero when the system is inconsistent.
    pub residual: f64,
}

/// Particular solution and nullspace basis of `A z = b`.
pub fn affine_solution(a: &Matrix, b: &Vector) -> AffineSolution {
    let n = a.ncols();
    if a.nrows() == 0 {
        return AffineSolution { particular: Vector::zeros(n), basis: Matrix::identity(n, n), residual: 0.0 };
    }
    let (pinv, _) = pseudo_inverse(a);
    let particular = &pinv * b;
    let residual = (a * &particular - b).amax();

    // Projector onto the nullspace; its unit eigenvectors span it.
    let projector = Matrix::identity(n, n) - &pinv * a;
    let sym = (&projector + projector.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut basis = Matrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        basis.set_column(j, &eig.eigenvectors.column(i));
    }
    AffineSolution { particular, basis, residual }
}
