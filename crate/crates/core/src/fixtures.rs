//! Reference sets used by the experiments and tests.

use nalgebra::{dmatrix, dvector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::linalg::rank;
use crate::set::{monomials, ConPolyZonotope, Exponents, Matrix, Vector};

/// Generator scalings of the three nested experiment sets, by index 1..=3.
pub const GENERATOR_SCALES: [[f64; 4]; 3] = [
    [0.9, 0.9, 0.72, 0.72],
    [1.0, 1.0, 1.0, 1.0],
    [1.18, 1.18, 1.64, 1.64],
];

/// Constraint-generator scalings of the three experiment sets.
pub const CONSTRAINT_SCALES: [[f64; 3]; 3] = [
    [0.9, 0.81, 0.81],
    [1.0, 1.0, 1.0],
    [1.18, 1.39, 1.39],
];

/// The two-dimensional CPZ with three factors and one polynomial constraint
///
/// ```text
/// x = (1,0) l1 + (0,1) l2 + (1,1) l1 l2 l3 + (-1,1) l1^2 l3
/// l2 + l1 l3 + l1^2 = 1.5
/// ```
pub fn illustrative_example() -> ConPolyZonotope {
    ConPolyZonotope::new(
        dvector![0.0, 0.0],
        dmatrix![1.0, 0.0, 1.0, -1.0;
                 0.0, 1.0, 1.0, 1.0],
        dmatrix![1, 0, 1, 2;
                 0, 1, 1, 0;
                 0, 0, 1, 1],
        dmatrix![1.0, 1.0, 1.0],
        dvector![1.5],
        dmatrix![0, 1, 2;
                 1, 0, 0;
                 0, 1, 0],
    )
    .expect("reference set is valid")
}

/// Experiment set `index` (1, 2 or 3): the illustrative example with `G`
/// and `F` right-multiplied by the diagonal scalings above.
pub fn scaled_example(index: usize) -> ConPolyZonotope {
    assert!((1..=3).contains(&index), "experiment sets are numbered 1..=3");
    illustrative_example()
        .scale_columns(&GENERATOR_SCALES[index - 1], &CONSTRAINT_SCALES[index - 1])
        .expect("scalings match the reference set")
}

/// Unit square zonotope `<0, I2, I2>`.
pub fn unit_square() -> ConPolyZonotope {
    ConPolyZonotope::zonotope(dvector![0.0, 0.0], nalgebra::DMatrix::identity(2, 2))
        .expect("valid zonotope")
}

/// Size limits for [`random_cpz`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomLimits {
    pub max_dim: usize,
    pub max_generators: usize,
    pub max_factors: usize,
    pub max_constraint_generators: usize,
    /// Largest exponent entry.
    pub max_exponent: i64,
}

impl Default for RandomLimits {
    fn default() -> Self {
        RandomLimits { max_dim: 3, max_generators: 6, max_factors: 4, max_constraint_generators: 4, max_exponent: 2 }
    }
}

/// A random valid set with `rank(E) = s` and, when constrained,
/// `rank(R) = s`. The constraint right-hand side is the image of an
/// admissible factor value, so the set is never empty.
pub fn random_cpz<R: Rng + ?Sized>(rng: &mut R, limits: &RandomLimits, constrained: bool) -> ConPolyZonotope {
    let d = rng.random_range(1..=limits.max_dim);
    let s = rng.random_range(1..=limits.max_factors.min(limits.max_generators));
    let n = rng.random_range(s..=limits.max_generators);
    let center = Vector::from_fn(d, |_, _| rng.random_range(-1.0..=1.0));
    let generators = Matrix::from_fn(d, n, |_, _| rng.random_range(-1.0..=1.0));
    let exponents = full_rank_exponents(rng, s, n, limits.max_exponent);
    let set = ConPolyZonotope::unconstrained(center, generators, exponents).expect("consistent shapes");
    if !constrained || limits.max_constraint_generators < s {
        return set;
    }
    let q = rng.random_range(s..=limits.max_constraint_generators);
    let p = rng.random_range(1..=q.saturating_sub(1).clamp(1, 2));
    let constraint_generators = Matrix::from_fn(p, q, |_, _| rng.random_range(-1.0..=1.0));
    let constraint_exponents = full_rank_exponents(rng, s, q, limits.max_exponent);
    let lambda: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let constraint_rhs = &constraint_generators * monomials(&constraint_exponents, &lambda);
    ConPolyZonotope::new(
        set.center,
        set.generators,
        set.exponents,
        constraint_generators,
        constraint_rhs,
        constraint_exponents,
    )
    .expect("consistent shapes")
}

/// Random `s x cols` exponent matrix of rank `s` (requires `cols >= s`).
fn full_rank_exponents<R: Rng + ?Sized>(rng: &mut R, s: usize, cols: usize, max_exp: i64) -> Exponents {
    loop {
        let mut columns: Vec<Vec<i64>> = (0..s)
            .map(|k| (0..s).map(|i| if i == k { rng.random_range(1..=max_exp.max(1)) } else { 0 }).collect())
            .collect();
        columns.extend((s..cols).map(|_| (0..s).map(|_| rng.random_range(0..=max_exp)).collect()));
        columns.shuffle(rng);
        let m = Exponents::from_fn(s, cols, |i, j| columns[j][i]);
        if rank(&m.map(|v| v as f64)) == s {
            return m;
        }
    }
}

/// A constrained zonotope pair `(inner, outer)` with inclusion by
/// construction: the inner set is the outer one with `G` and `F`
/// right-scaled by `diag(delta)`, `delta` in `[0.2, max_scale]`, sharing
/// center and `theta`. `theta = F lambda*` with `|lambda*_i| <= delta_i`,
/// so both sets are nonempty.
pub fn random_cz_pair<R: Rng + ?Sized>(rng: &mut R, max_dim: usize, max_generators: usize, max_scale: f64) -> (ConPolyZonotope, ConPolyZonotope) {
    let d = rng.random_range(1..=max_dim);
    let n = rng.random_range(2.max(d)..=max_generators.max(2));
    let p = rng.random_range(1..=(n - 1).min(2));
    let delta: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..=max_scale)).collect();
    let center = Vector::from_fn(d, |_, _| rng.random_range(-1.0..=1.0));
    let generators = Matrix::from_fn(d, n, |_, _| rng.random_range(-1.0..=1.0));
    let f = Matrix::from_fn(p, n, |_, _| rng.random_range(-1.0..=1.0));
    let lambda = Vector::from_iterator(n, delta.iter().map(|&dl| rng.random_range(-dl..=dl)));
    let theta = &f * lambda;
    let outer = ConPolyZonotope::constrained_zonotope(center, generators, f, theta).expect("consistent shapes");
    let inner = outer.scale_columns(&delta, &delta).expect("one scale per generator");
    (inner, outer)
}
