//! Drawing points of a set by projecting random factors onto its
//! constraint manifold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::pseudo_inverse;
use crate::set::{monomial_jacobian, ConPolyZonotope, LambdaPoint, Matrix, Vector};

/// Iteration cap of the constraint projection.
pub const PROJECTION_ITERS: usize = 50;

/// Attempts per requested sample before giving up.
const ATTEMPTS_PER_SAMPLE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub point: Vector,
    pub lambda: LambdaPoint,
}

/// Outcome of [`sample_points`]: possibly fewer samples than requested.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub attempts: usize,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Draws up to `count` points of `set`.
///
/// Each attempt draws `lambda` uniformly from the unit box and, for a
/// constrained set, runs a damped Gauss-Newton projection onto the
/// constraint manifold. Attempts that end outside `tol_c` are discarded.
pub fn sample_points(set: &ConPolyZonotope, count: usize, tol_c: f64, seed: u64) -> SampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = set.num_factors();
    let max_attempts = ATTEMPTS_PER_SAMPLE * count;
    let mut samples = Vec::with_capacity(count);
    let mut attempts = 0;
    while samples.len() < count && attempts < max_attempts {
        attempts += 1;
        let start = Vector::from_fn(s, |_, _| rng.random_range(-1.0..=1.0));
        let Some(lambda) = project_onto_constraints(set, start, tol_c, PROJECTION_ITERS) else {
            continue;
        };
        let point = set.evaluate(lambda.as_slice()).expect("lambda length matches").point;
        samples.push(Sample { point, lambda: LambdaPoint(lambda) });
    }
    SampleSet { samples, attempts }
}

/// Moves `lambda` inside the unit box until the constraint residual is at
/// most `tol` in the max norm, or returns `None`.
///
/// Steps are minimum-norm Gauss-Newton steps clipped to the box and halved
/// while the residual grows.
pub fn project_onto_constraints(
    set: &ConPolyZonotope,
    mut lambda: Vector,
    tol: f64,
    max_iter: usize,
) -> Option<Vector> {
    clip_to_box(&mut lambda);
    if !set.has_constraints() {
        return Some(lambda);
    }
    let mut r = set.constraint_residual(lambda.as_slice());
    let mut norm = r.amax();
    for _ in 0..max_iter {
        if norm <= tol {
            return Some(lambda);
        }
        let jac = constraint_jacobian(set, lambda.as_slice());
        let step = -(pseudo_inverse(&jac).0 * &r);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = &lambda + &step * t;
            clip_to_box(&mut trial);
            let r_trial = set.constraint_residual(trial.as_slice());
            let n_trial = r_trial.amax();
            if n_trial < norm {
                lambda = trial;
                r = r_trial;
                norm = n_trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (norm <= tol).then_some(lambda)
}

/// `F * d(monomials)/d(lambda)`, `p x s`.
pub(crate) fn constraint_jacobian(set: &ConPolyZonotope, lambda: &[f64]) -> Matrix {
    &set.constraint_generators * monomial_jacobian(&set.constraint_exponents, lambda)
}

pub(crate) fn clip_to_box(v: &mut Vector) {
    v.iter_mut().for_each(|x| *x = x.clamp(-1.0, 1.0));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn square_needs_no_projection() {
        let set = fixtures::unit_square();
        let out = sample_points(&set, 4, 1e-10, 3);
        assert_eq!(out.len(), 4);
        assert_eq!(out.attempts, 4);
        for s in &out.samples {
            assert!(s.point.iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn example_samples_satisfy_constraint() {
        let set = fixtures::illustrative_example();
        let out = sample_points(&set, 1000, 1e-10, 11);
        assert_eq!(out.len(), 1000);
        for s in &out.samples {
            let l = &s.lambda;
            assert!(l.is_admissible());
            let lhs = l[1] + l[0] * l[2] + l[0] * l[0];
            assert!((lhs - 1.5).abs() <= 1e-10, "residual {}", lhs - 1.5);
        }
    }

    #[test]
    fn unreachable_constraint_gives_nothing() {
        let set = ConPolyZonotope::new(
            dvector![0.0],
            dmatrix![1.0],
            dmatrix![1],
            dmatrix![1.0],
            dvector![10.0],
            dmatrix![1],
        )
        .unwrap();
        let out = sample_points(&set, 5, 1e-8, 0);
        assert!(out.is_empty());
        assert_eq!(out.attempts, 100);
    }

    #[test]
    fn same_seed_same_samples() {
        let set = fixtures::illustrative_example();
        assert_eq!(sample_points(&set, 20, 1e-10, 5), sample_points(&set, 20, 1e-10, 5));
    }
}
