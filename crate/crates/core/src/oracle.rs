//! Approximate membership distances and sampling-based falsification.
//!
//! Everything here is one-sided. A small distance shows membership (the
//! minimizing factor values are a witness); a large one is only evidence of
//! non-membership. Falsification can refute an inclusion but never prove it.

use std::cell::OnceCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CpzError;
use crate::sampling::{clip_to_box, constraint_jacobian, project_onto_constraints, sample_points, PROJECTION_ITERS};
use crate::set::{monomial_jacobian, monomials, ConPolyZonotope, LambdaPoint, Matrix, Vector};

/// Total number of grid seeds above which the grid is coarsened.
pub const MAX_GRID_SEEDS: usize = 1_000_000;
/// Number of random seeds used instead of a grid for many factors.
const RANDOM_SEEDS: usize = 4096;
/// Factor count above which random seeding replaces the grid.
const MAX_GRID_FACTORS: usize = 6;
/// Points per axis of the first, cheap seeding pass.
const COARSE_PER_DIM: usize = 5;
/// Distance below which no further seeds are refined. Projection back onto
/// the constraints typically leaves a few 1e-9 of distance, so this sits
/// well above the local target.
const SEARCH_EXIT: f64 = 1e-7;
/// Distance at which one local refinement stops.
const LOCAL_EXIT: f64 = 1e-9;
const COARSE_REFINED: usize = 4;
const FINE_REFINED: usize = 24;
/// Candidates considered per requested seed when spreading seeds out.
const SELECTION_POOL: usize = 32;
/// Minimum factor-space separation of the fine seeds that are refined.
const FINE_SEPARATION: f64 = 0.3;
const PENALTIES: [f64; 5] = [1.0, 1e2, 1e4, 1e6, 1e8];

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    pub grid_per_dim: usize,
    /// Iteration budget of one local refinement (split over the penalty
    /// stages).
    pub refine_iters: usize,
    /// Constraint tolerance for a factor value to count as admissible.
    pub tol_c: f64,
    /// Distances above this count as outside.
    pub outside_margin: f64,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { grid_per_dim: 21, refine_iters: 100, tol_c: 1e-8, outside_margin: 1e-2, seed: 0 }
    }
}

impl OracleOptions {
    pub fn validate(&self) -> Result<(), CpzError> {
        if self.grid_per_dim < 2 {
            return Err(CpzError::InvalidOptions("grid_per_dim must be at least 2".into()));
        }
        let positive = |v: f64| v > 0.0;
        if !positive(self.tol_c) || !positive(self.outside_margin) {
            return Err(CpzError::InvalidOptions("tol_c and outside_margin must be positive".into()));
        }
        Ok(())
    }
}

/// A point of the inner set that lies outside the outer set.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Vector,
    pub inner_lambda: LambdaPoint,
    pub outer_distance: f64,
}

impl Witness {
    /// Re-checks the witness against both sets: `point` is generated by an
    /// admissible `inner_lambda` within `tol_c`, and the outer distance
    /// recomputed from scratch still exceeds the margin.
    pub fn revalidate(&self, inner: &ConPolyZonotope, outer: &ConPolyZonotope, opts: &OracleOptions) -> bool {
        let Ok(eval) = inner.evaluate(&self.inner_lambda) else { return false };
        let residual = eval.eq_residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.inner_lambda.is_admissible()
            && residual <= opts.tol_c
            && (&eval.point - &self.point).amax() <= 1e-12 * (1.0 + self.point.amax())
            && membership_distance(&self.point, outer, opts) > opts.outside_margin
    }
}

/// Upper bound on the Euclidean distance from `point` to `set`.
pub fn membership_distance(point: &Vector, set: &ConPolyZonotope, opts: &OracleOptions) -> f64 {
    MembershipOracle::new(set, opts).distance(point)
}

/// Grid seeds evaluated once per set.
struct Seeds {
    lambdas: Vec<Vector>,
    points: Vec<Vector>,
    residual_sq: Vec<f64>,
}

impl Seeds {
    fn build(set: &ConPolyZonotope, lambdas: Vec<Vector>) -> Self {
        let mut points = Vec::with_capacity(lambdas.len());
        let mut residual_sq = Vec::with_capacity(lambdas.len());
        for l in &lambdas {
            points.push(&set.center + &set.generators * monomials(&set.exponents, l.as_slice()));
            residual_sq.push(set.constraint_residual(l.as_slice()).norm_squared());
        }
        Seeds { lambdas, points, residual_sq }
    }

    /// Indices of up to `k` seeds with small penalized distance, taken in
    /// order of distance but skipping seeds within `separation` (max norm
    /// in factor space) of one already taken.
    fn best(&self, target: &Vector, k: usize, separation: f64) -> Vec<usize> {
        let mut scored: Vec<(f64, usize)> = self
            .points
            .iter()
            .zip(&self.residual_sq)
            .enumerate()
            .map(|(i, (x, r))| ((x - target).norm_squared() + r, i))
            .collect();
        let pool = (k * SELECTION_POOL).min(scored.len());
        if pool == 0 {
            return Vec::new();
        }
        scored.select_nth_unstable_by(pool - 1, |a, b| a.0.total_cmp(&b.0));
        scored.truncate(pool);
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        for (_, i) in scored {
            if chosen.len() == k {
                break;
            }
            let l = &self.lambdas[i];
            if chosen.iter().all(|&j| (&self.lambdas[j] - l).amax() > separation) {
                chosen.push(i);
            }
        }
        chosen
    }
}

/// Membership distance queries against one set, with cached seeds.
pub struct MembershipOracle<'a> {
    set: &'a ConPolyZonotope,
    opts: OracleOptions,
    coarse: Seeds,
    fine: OnceCell<Seeds>,
}

impl<'a> MembershipOracle<'a> {
    pub fn new(set: &'a ConPolyZonotope, opts: &OracleOptions) -> Self {
        let s = set.num_factors();
        let coarse = if s > MAX_GRID_FACTORS {
            random_lambdas(s, RANDOM_SEEDS / 16, opts.seed)
        } else {
            grid_lambdas(s, COARSE_PER_DIM.min(opts.grid_per_dim))
        };
        MembershipOracle { set, opts: opts.clone(), coarse: Seeds::build(set, coarse), fine: OnceCell::new() }
    }

    fn fine_seeds(&self) -> &Seeds {
        self.fine.get_or_init(|| {
            let s = self.set.num_factors();
            let lambdas = if s > MAX_GRID_FACTORS {
                random_lambdas(s, RANDOM_SEEDS, self.opts.seed)
            } else {
                let mut per_dim = self.opts.grid_per_dim;
                while per_dim > 2 && per_dim.saturating_pow(s as u32) > MAX_GRID_SEEDS {
                    per_dim -= 1;
                }
                grid_lambdas(s, per_dim)
            };
            Seeds::build(self.set, lambdas)
        })
    }

    /// Best distance found together with the admissible factor value that
    /// attains it, if any refinement ended on the constraint manifold.
    pub fn nearest(&self, point: &Vector) -> Option<(f64, LambdaPoint)> {
        let mut best: Option<(f64, Vector)> = None;
        for (seeds, k, sep) in [(&self.coarse, COARSE_REFINED, 0.0), (self.fine_seeds(), FINE_REFINED, FINE_SEPARATION)] {
            for i in seeds.best(point, k, sep) {
                if let Some((d, l)) = self.refine(point, seeds.lambdas[i].clone()) {
                    if best.as_ref().is_none_or(|(b, _)| d < *b) {
                        best = Some((d, l));
                    }
                }
                if best.as_ref().is_some_and(|(b, _)| *b <= SEARCH_EXIT) {
                    return best.map(|(d, l)| (d, LambdaPoint(l)));
                }
            }
        }
        best.map(|(d, l)| (d, LambdaPoint(l)))
    }

    /// Upper bound on the distance from `point` to the set; infinite when
    /// no admissible factor value was reached.
    pub fn distance(&self, point: &Vector) -> f64 {
        self.nearest(point).map_or(f64::INFINITY, |(d, _)| d)
    }

    /// Penalized projected Levenberg-Marquardt from `lambda`, then an exact
    /// projection onto the constraints.
    fn refine(&self, target: &Vector, mut lambda: Vector) -> Option<(f64, Vector)> {
        let set = self.set;
        let stages: &[f64] = if set.has_constraints() { &PENALTIES } else { &PENALTIES[..1] };
        let per_stage = (self.opts.refine_iters / stages.len()).max(5);
        for &rho in stages {
            lambda = self.levenberg_marquardt(target, lambda, rho, per_stage);
            if !set.has_constraints() || set.constraint_residual(lambda.as_slice()).amax() <= self.opts.tol_c {
                break;
            }
        }
        let lambda = project_onto_constraints(set, lambda, self.opts.tol_c, PROJECTION_ITERS)?;
        let x = &set.center + &set.generators * monomials(&set.exponents, lambda.as_slice());
        Some(((x - target).norm(), lambda))
    }

    fn levenberg_marquardt(&self, target: &Vector, mut lambda: Vector, rho: f64, iters: usize) -> Vector {
        let set = self.set;
        let s = lambda.len();
        let w = rho.sqrt();
        let residual = |l: &Vector| {
            let x = &set.center + &set.generators * monomials(&set.exponents, l.as_slice());
            let r = set.constraint_residual(l.as_slice());
            let mut f = Vector::zeros(x.len() + r.len());
            f.rows_mut(0, x.len()).copy_from(&(x - target));
            f.rows_mut(set.dim(), r.len()).copy_from(&(r * w));
            f
        };
        let mut f = residual(&lambda);
        let mut cost = f.norm_squared();
        let mut mu = 1e-3;
        for _ in 0..iters {
            if cost <= LOCAL_EXIT * LOCAL_EXIT {
                break;
            }
            let mut jac = Matrix::zeros(f.len(), s);
            jac.rows_mut(0, set.dim())
                .copy_from(&(&set.generators * monomial_jacobian(&set.exponents, lambda.as_slice())));
            if set.has_constraints() {
                jac.rows_mut(set.dim(), set.num_constraints())
                    .copy_from(&(constraint_jacobian(set, lambda.as_slice()) * w));
            }
            let grad = jac.tr_mul(&f);
            // Factors pinned at a bound with the descent direction pointing
            // outward are held fixed for this step.
            let free: Vec<bool> = (0..s)
                .map(|k| !((lambda[k] >= 1.0 && grad[k] < 0.0) || (lambda[k] <= -1.0 && grad[k] > 0.0)))
                .collect();
            let mut improved = false;
            for _ in 0..8 {
                let mut h = jac.tr_mul(&jac);
                for k in 0..s {
                    if free[k] {
                        h[(k, k)] += mu * (1.0 + h[(k, k)]);
                    } else {
                        h.row_mut(k).fill(0.0);
                        h.column_mut(k).fill(0.0);
                        h[(k, k)] = 1.0;
                    }
                }
                let rhs = Vector::from_fn(s, |k, _| if free[k] { -grad[k] } else { 0.0 });
                let Some(step) = h.cholesky().map(|c| c.solve(&rhs)) else {
                    mu *= 4.0;
                    continue;
                };
                let mut trial = &lambda + step;
                clip_to_box(&mut trial);
                let f_trial = residual(&trial);
                let c_trial = f_trial.norm_squared();
                if c_trial < cost {
                    let moved = (&trial - &lambda).amax();
                    lambda = trial;
                    f = f_trial;
                    cost = c_trial;
                    mu = (mu / 3.0).max(1e-12);
                    improved = moved > 1e-15;
                    break;
                }
                mu *= 4.0;
            }
            if !improved {
                break;
            }
        }
        lambda
    }
}

/// Cell-centred grid shifted by a tenth of a cell, so that no coordinate
/// is 0 or a bound. A factor that enters only through even powers has zero
/// derivative at 0, and a seed placed there would never leave that plane.
fn grid_lambdas(s: usize, per_dim: usize) -> Vec<Vector> {
    let n = per_dim as f64;
    let axis: Vec<f64> = (0..per_dim).map(|i| -1.0 + (2.0 * i as f64 + 1.1) / n).collect();
    let total = per_dim.pow(s as u32);
    (0..total)
        .map(|mut idx| {
            Vector::from_fn(s, |_, _| {
                let v = axis[idx % per_dim];
                idx /= per_dim;
                v
            })
        })
        .collect()
}

fn random_lambdas(s: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Vector::from_fn(s, |_, _| rng.random_range(-1.0..=1.0))).collect()
}

/// Samples `samples` points of `inner` and returns the first one whose
/// distance to `outer` exceeds the margin.
pub fn falsify_inclusion(
    inner: &ConPolyZonotope,
    outer: &ConPolyZonotope,
    samples: usize,
    opts: &OracleOptions,
) -> Result<Option<Witness>, CpzError> {
    opts.validate()?;
    if inner.dim() != outer.dim() {
        return Err(CpzError::DimensionMismatch { inner: inner.dim(), outer: outer.dim() });
    }
    let drawn = sample_points(inner, samples, opts.tol_c, opts.seed);
    let oracle = MembershipOracle::new(outer, opts);
    for sample in drawn.samples {
        let d = oracle.distance(&sample.point);
        if d > opts.outside_margin {
            return Ok(Some(Witness { point: sample.point, inner_lambda: sample.lambda, outer_distance: d }));
        }
    }
    Ok(None)
}

/// Distances of sampled inner points to the outer set.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionAudit {
    pub samples: usize,
    pub max_distance: f64,
    /// Sample attaining `max_distance`.
    pub worst_point: Option<Vector>,
}

/// Computes the distance of every sampled inner point (no early stop).
pub fn audit_inclusion(
    inner: &ConPolyZonotope,
    outer: &ConPolyZonotope,
    samples: usize,
    opts: &OracleOptions,
) -> Result<InclusionAudit, CpzError> {
    opts.validate()?;
    if inner.dim() != outer.dim() {
        return Err(CpzError::DimensionMismatch { inner: inner.dim(), outer: outer.dim() });
    }
    let drawn = sample_points(inner, samples, opts.tol_c, opts.seed);
    let oracle = MembershipOracle::new(outer, opts);
    let mut audit = InclusionAudit { samples: drawn.len(), max_distance: 0.0, worst_point: None };
    for sample in drawn.samples {
        let d = oracle.distance(&sample.point);
        if audit.worst_point.is_none() || d > audit.max_distance {
            audit.max_distance = d;
            audit.worst_point = Some(sample.point);
        }
    }
    Ok(audit)
}
