//! Feasibility encodings of the sufficient inclusion test `P1 ⊆ P2`.
//!
//! All three encodings share the linear equalities
//!
//! ```text
//! c1 = c2 + G2 gamma          G1 = G2 Gamma
//! Pi F1 = F2 Psi              Pi theta1 = theta2 - F2 psi
//! ```
//!
//! and differ in how the bound `|gamma| + |Gamma| 1` (and its constraint
//! counterpart) enters:
//!
//! * [`encode_prop1`]: `pinv(E2^T) log(|gamma| + |Gamma| 1) <= 0`, nonsmooth.
//! * [`encode_cor1`]: the absolute values are replaced by column sums of
//!   nonnegative split variables `alpha` with `[Gamma gamma]^T = [I -I] alpha`.
//! * [`encode_cz_lp`]: for constrained zonotopes the exponents are identity
//!   matrices and the test collapses to the linear bound `alpha^T 1 <= 1`,
//!   with `Psi = Gamma` and `psi = gamma`.

mod certificate;
mod system;
mod verify;

pub use certificate::{AlphaCertificate, CertificateShape, InclusionCertificate, SplitCheck};
pub use system::{
    Block, Condition, Encoding, FeasibilitySystem, LinearInequality, LogArgument, LogBlock, SizeReport, VarMap,
    VarSlice,
};
pub use verify::{verify_certificate, CertificateCheckReport};

pub(crate) use certificate::split_parts;
pub(crate) use system::{guarded_log, guarded_log_derivative, stacked_index};

use crate::error::CpzError;
use crate::linalg::rank;
use crate::set::{ConPolyZonotope, Matrix, Vector};
use certificate::{exponent_pinv, exponent_transpose};

/// Default floor for logarithm arguments inside smooth solvers.
pub const DEFAULT_LOG_FLOOR: f64 = 1e-12;

/// Builds the system of the nonsmooth encoding (exact absolute values).
pub fn encode_prop1(inner: &ConPolyZonotope, outer: &ConPolyZonotope) -> Result<FeasibilitySystem, CpzError> {
    check_pair(inner, outer)?;
    check_rank(inner, outer)?;
    let mut b = Builder::new(Encoding::Prop1, inner, outer);
    let base = b.base_blocks(inner, outer);
    b.base_equalities(inner, outer, &base);

    let gen_args = base.abs_rows(base.center_shift, base.generator_map);
    b.log_block(Condition::GeneratorBound, exponent_pinv(&outer.exponents), gen_args);
    let con_block = match (base.constraint_shift, base.constraint_map) {
        (Some(shift), map) if outer.has_constraints() => {
            (exponent_pinv(&outer.constraint_exponents), base.abs_rows(shift, map))
        }
        _ => (Matrix::zeros(outer.num_factors(), 0), Vec::new()),
    };
    b.log_block(Condition::ConstraintBound, con_block.0, con_block.1);
    Ok(b.finish())
}

/// Builds the smooth encoding with nonnegative split variables.
pub fn encode_cor1(inner: &ConPolyZonotope, outer: &ConPolyZonotope) -> Result<FeasibilitySystem, CpzError> {
    check_pair(inner, outer)?;
    check_rank(inner, outer)?;
    let mut b = Builder::new(Encoding::Cor1, inner, outer);
    let base = b.base_blocks(inner, outer);
    let n_inner = inner.num_generators();
    let n_outer = outer.num_generators();
    let alpha_gen = b.block(Block::GeneratorSplit, 2 * (n_inner + 1), n_outer);
    let alpha_con = base.constraint_shift.map(|shift| {
        let q_inner = base.constraint_map.map_or(0, |m| m.cols);
        (b.block(Block::ConstraintSplit, 2 * (q_inner + 1), shift.rows), shift)
    });
    b.base_equalities(inner, outer, &base);

    b.split_link(Condition::GeneratorSplit, base.generator_map, base.center_shift, alpha_gen);
    if let Some((alpha, shift)) = alpha_con {
        b.split_link(Condition::ConstraintSplit, base.constraint_map, shift, alpha);
    }
    b.nonnegative(alpha_gen);
    if let Some((alpha, _)) = alpha_con {
        b.nonnegative(alpha);
    }

    b.log_block(Condition::GeneratorBound, exponent_pinv(&outer.exponents), column_sums(alpha_gen));
    match alpha_con {
        Some((alpha, _)) if outer.has_constraints() => {
            b.log_block(Condition::ConstraintBound, exponent_pinv(&outer.constraint_exponents), column_sums(alpha))
        }
        _ => b.log_block(Condition::ConstraintBound, Matrix::zeros(outer.num_factors(), 0), Vec::new()),
    }
    Ok(b.finish())
}

/// Builds the linear program for constrained zonotopes (or zonotopes).
pub fn encode_cz_lp(inner: &ConPolyZonotope, outer: &ConPolyZonotope) -> Result<FeasibilitySystem, CpzError> {
    check_pair(inner, outer)?;
    for (side, set) in [("inner", inner), ("outer", outer)] {
        let kind = set.classify();
        if !kind.is_linear() {
            return Err(CpzError::NotLinear { side, kind });
        }
    }
    let d = inner.dim();
    let n_inner = inner.num_generators();
    let n_outer = outer.num_generators();
    let p_inner = inner.num_constraints();
    let p_outer = outer.num_constraints();

    let mut b = Builder::new(Encoding::CzLp, inner, outer);
    let gamma = b.block(Block::CenterShift, n_outer, 1);
    let gmap = b.block(Block::GeneratorMap, n_outer, n_inner);
    let pi = (p_outer > 0 && p_inner > 0).then(|| b.block(Block::RowMap, p_outer, p_inner));
    let alpha = b.block(Block::GeneratorSplit, 2 * (n_inner + 1), n_outer);

    b.center_and_generators(inner, outer, gamma, gmap);
    if p_outer > 0 {
        let f2 = &outer.constraint_generators;
        // Pi F1 = F2 Gamma, with F1 read as p1 x n1 (empty rows for a zonotope)
        for j in 0..n_inner {
            for r in 0..p_outer {
                let mut terms = Vec::new();
                if let Some(pi) = pi {
                    for k in 0..p_inner {
                        terms.push((pi.at(r, k), inner.constraint_generators[(k, j)]));
                    }
                }
                for i in 0..n_outer {
                    terms.push((gmap.at(i, j), -f2[(r, i)]));
                }
                b.equality(Condition::ConstraintGenerators, terms, 0.0);
            }
        }
        // Pi theta1 = theta2 - F2 gamma
        for r in 0..p_outer {
            let mut terms = Vec::new();
            if let Some(pi) = pi {
                for k in 0..p_inner {
                    terms.push((pi.at(r, k), inner.constraint_rhs[k]));
                }
            }
            for i in 0..n_outer {
                terms.push((gamma.at(i, 0), f2[(r, i)]));
            }
            b.equality(Condition::ConstraintRhs, terms, outer.constraint_rhs[r]);
        }
    }
    b.split_link(Condition::GeneratorSplit, Some(gmap), gamma, alpha);
    b.nonnegative(alpha);
    for arg in column_sums(alpha) {
        b.linear_ineqs.push(LinearInequality { condition: Condition::GeneratorBound, terms: arg.terms, rhs: 1.0 });
    }
    debug_assert_eq!(b.eq_rows.len(), (d + p_outer + n_outer) * (n_inner + 1));
    Ok(b.finish())
}

fn check_pair(inner: &ConPolyZonotope, outer: &ConPolyZonotope) -> Result<(), CpzError> {
    for set in [inner, outer] {
        let v = set.validate();
        if !v.is_empty() {
            return Err(CpzError::InvalidSet(v));
        }
    }
    if inner.dim() != outer.dim() {
        return Err(CpzError::DimensionMismatch { inner: inner.dim(), outer: outer.dim() });
    }
    Ok(())
}

fn check_rank(inner: &ConPolyZonotope, outer: &ConPolyZonotope) -> Result<(), CpzError> {
    let s = outer.num_factors();
    let hint = if inner.classify().is_linear() && outer.classify().is_linear() {
        "both sets are constrained zonotopes, use the linear test (cz-lp) instead"
    } else {
        "the logarithmic bound cannot be inverted"
    };
    let r = rank(&exponent_transpose(&outer.exponents));
    if r != s {
        return Err(CpzError::RankDeficient { matrix: "E^T", rank: r, required: s, hint });
    }
    if outer.has_constraints() {
        let r = rank(&exponent_transpose(&outer.constraint_exponents));
        if r != s {
            return Err(CpzError::RankDeficient { matrix: "R^T", rank: r, required: s, hint });
        }
    }
    Ok(())
}

/// One argument per column of `alpha`: its column sum.
fn column_sums(alpha: VarSlice) -> Vec<LogArgument> {
    (0..alpha.cols)
        .map(|i| LogArgument { terms: (0..alpha.rows).map(|k| (alpha.at(k, i), 1.0)).collect(), absolute: false })
        .collect()
}

/// Variable blocks shared by the two nonlinear encodings.
struct BaseBlocks {
    center_shift: VarSlice,
    generator_map: Option<VarSlice>,
    row_map: Option<VarSlice>,
    constraint_map: Option<VarSlice>,
    constraint_shift: Option<VarSlice>,
}

impl BaseBlocks {
    /// `|shift_i| + sum_j |map_ij|` for every row `i`.
    fn abs_rows(&self, shift: VarSlice, map: Option<VarSlice>) -> Vec<LogArgument> {
        (0..shift.rows)
            .map(|i| {
                let mut terms = vec![(shift.at(i, 0), 1.0)];
                if let Some(m) = map {
                    terms.extend((0..m.cols).map(|j| (m.at(i, j), 1.0)));
                }
                LogArgument { terms, absolute: true }
            })
            .collect()
    }
}

/// Sparse equality row: terms, right-hand side and source condition.
type EqRow = (Vec<(usize, f64)>, f64, Condition);

struct Builder {
    encoding: Encoding,
    num_vars: usize,
    slices: Vec<VarSlice>,
    eq_rows: Vec<EqRow>,
    lower_bounds: Vec<(usize, f64)>,
    linear_ineqs: Vec<LinearInequality>,
    log_blocks: Vec<LogBlock>,
    inner: ConPolyZonotope,
    outer: ConPolyZonotope,
}

impl Builder {
    fn new(encoding: Encoding, inner: &ConPolyZonotope, outer: &ConPolyZonotope) -> Self {
        Builder {
            encoding,
            num_vars: 0,
            slices: Vec::new(),
            eq_rows: Vec::new(),
            lower_bounds: Vec::new(),
            linear_ineqs: Vec::new(),
            log_blocks: Vec::new(),
            inner: inner.clone(),
            outer: outer.clone(),
        }
    }

    fn block(&mut self, block: Block, rows: usize, cols: usize) -> VarSlice {
        let slice = VarSlice { block, offset: self.num_vars, rows, cols };
        if !slice.is_empty() {
            self.num_vars += slice.len();
            self.slices.push(slice);
        }
        slice
    }

    fn base_blocks(&mut self, inner: &ConPolyZonotope, outer: &ConPolyZonotope) -> BaseBlocks {
        let n_inner = inner.num_generators();
        let n_outer = outer.num_generators();
        let center_shift = self.block(Block::CenterShift, n_outer, 1);
        let generator_map = Some(self.block(Block::GeneratorMap, n_outer, n_inner)).filter(|s| !s.is_empty());
        let (mut row_map, mut constraint_map, mut constraint_shift) = (None, None, None);
        if outer.has_constraints() {
            let (p_inner, q_inner) = (inner.num_constraints(), inner.num_constraint_generators());
            let (p_outer, q_outer) = (outer.num_constraints(), outer.num_constraint_generators());
            row_map = Some(self.block(Block::RowMap, p_outer, p_inner)).filter(|s| !s.is_empty());
            constraint_map = Some(self.block(Block::ConstraintMap, q_outer, q_inner)).filter(|s| !s.is_empty());
            constraint_shift = Some(self.block(Block::ConstraintShift, q_outer, 1));
        }
        BaseBlocks { center_shift, generator_map, row_map, constraint_map, constraint_shift }
    }

    fn equality(&mut self, condition: Condition, terms: Vec<(usize, f64)>, rhs: f64) {
        self.eq_rows.push((terms, rhs, condition));
    }

    fn center_and_generators(
        &mut self,
        inner: &ConPolyZonotope,
        outer: &ConPolyZonotope,
        gamma: VarSlice,
        gmap: VarSlice,
    ) {
        let g2 = &outer.generators;
        for r in 0..inner.dim() {
            let terms = (0..gamma.rows).map(|i| (gamma.at(i, 0), g2[(r, i)])).collect();
            self.equality(Condition::Center, terms, inner.center[r] - outer.center[r]);
        }
        for j in 0..inner.num_generators() {
            for r in 0..inner.dim() {
                let terms = (0..gmap.rows).map(|i| (gmap.at(i, j), g2[(r, i)])).collect();
                self.equality(Condition::Generators, terms, inner.generators[(r, j)]);
            }
        }
    }

    fn base_equalities(&mut self, inner: &ConPolyZonotope, outer: &ConPolyZonotope, base: &BaseBlocks) {
        let gmap = base.generator_map.unwrap_or(VarSlice {
            block: Block::GeneratorMap,
            offset: 0,
            rows: outer.num_generators(),
            cols: 0,
        });
        self.center_and_generators(inner, outer, base.center_shift, gmap);

        let Some(shift) = base.constraint_shift else { return };
        let f2 = &outer.constraint_generators;
        let p_outer = outer.num_constraints();
        let q_outer = outer.num_constraint_generators();
        let p_inner = inner.num_constraints();
        // Pi F1 = F2 Psi
        for j in 0..inner.num_constraint_generators() {
            for r in 0..p_outer {
                let mut terms = Vec::new();
                if let Some(pi) = base.row_map {
                    terms.extend((0..p_inner).map(|k| (pi.at(r, k), inner.constraint_generators[(k, j)])));
                }
                if let Some(psi) = base.constraint_map {
                    terms.extend((0..q_outer).map(|i| (psi.at(i, j), -f2[(r, i)])));
                }
                self.equality(Condition::ConstraintGenerators, terms, 0.0);
            }
        }
        // Pi theta1 = theta2 - F2 psi
        for r in 0..p_outer {
            let mut terms = Vec::new();
            if let Some(pi) = base.row_map {
                terms.extend((0..p_inner).map(|k| (pi.at(r, k), inner.constraint_rhs[k])));
            }
            terms.extend((0..q_outer).map(|i| (shift.at(i, 0), f2[(r, i)])));
            self.equality(Condition::ConstraintRhs, terms, outer.constraint_rhs[r]);
        }
    }

    /// `[map shift]^T = [I -I] alpha`, entry by entry.
    fn split_link(&mut self, condition: Condition, map: Option<VarSlice>, shift: VarSlice, alpha: VarSlice) {
        let cols = map.map_or(0, |m| m.cols);
        let half = cols + 1;
        debug_assert_eq!(alpha.rows, 2 * half);
        for i in 0..shift.rows {
            for k in 0..half {
                let var = stacked_index(map, shift, k, i);
                let terms = vec![(var, 1.0), (alpha.at(k, i), -1.0), (alpha.at(k + half, i), 1.0)];
                self.equality(condition, terms, 0.0);
            }
        }
    }

    fn nonnegative(&mut self, alpha: VarSlice) {
        self.lower_bounds.extend(alpha.range().map(|k| (k, 0.0)));
    }

    fn log_block(&mut self, condition: Condition, weights: Matrix, args: Vec<LogArgument>) {
        debug_assert_eq!(weights.ncols(), args.len());
        self.log_blocks.push(LogBlock { condition, weights, args, floor: DEFAULT_LOG_FLOOR });
    }

    fn finish(self) -> FeasibilitySystem {
        let n = self.num_vars;
        let m = self.eq_rows.len();
        let mut eq_matrix = Matrix::zeros(m, n);
        let mut eq_rhs = Vector::zeros(m);
        let mut eq_conditions = Vec::with_capacity(m);
        for (row, (terms, rhs, cond)) in self.eq_rows.into_iter().enumerate() {
            for (k, c) in terms {
                eq_matrix[(row, k)] += c;
            }
            eq_rhs[row] = rhs;
            eq_conditions.push(cond);
        }
        let mut lower_bounds = vec![None; n];
        for &(k, lb) in &self.lower_bounds {
            lower_bounds[k] = Some(lb);
        }
        let inequalities = self.log_blocks.iter().map(LogBlock::rows).sum::<usize>()
            + self.linear_ineqs.len()
            + self.lower_bounds.len();
        FeasibilitySystem {
            encoding: self.encoding,
            num_vars: n,
            eq_matrix,
            eq_rhs,
            eq_conditions,
            lower_bounds,
            linear_ineqs: self.linear_ineqs,
            log_blocks: self.log_blocks,
            var_map: VarMap { slices: self.slices },
            size: SizeReport { variables: n, equalities: m, inequalities },
            inner: self.inner,
            outer: self.outer,
        }
    }
}

impl FeasibilitySystem {
    /// Reads the base certificate out of a variable vector. For the linear
    /// encoding `Psi = Gamma`, `psi = gamma` and `Pi` comes from `z`.
    pub fn certificate(&self, z: &Vector) -> InclusionCertificate {
        let shape = CertificateShape::of(&self.inner, &self.outer);
        let read = |block: Block, rows: usize, cols: usize| {
            self.var_map.get(block).map_or_else(|| Matrix::zeros(rows, cols), |s| s.extract(z))
        };
        let center_shift = read(Block::CenterShift, shape.n_outer, 1).column(0).into_owned();
        let generator_map = read(Block::GeneratorMap, shape.n_outer, shape.n_inner);
        let row_map = read(Block::RowMap, shape.p_outer, shape.p_inner);
        if self.encoding == Encoding::CzLp {
            let mut cert =
                InclusionCertificate::from_linear_witness(&self.inner, &self.outer, center_shift, generator_map);
            if shape.p_outer > 0 {
                cert.row_map = row_map;
            }
            return cert;
        }
        InclusionCertificate {
            center_shift,
            generator_map,
            row_map,
            constraint_map: read(Block::ConstraintMap, shape.q_outer, shape.q_inner),
            constraint_shift: read(Block::ConstraintShift, shape.q_outer, 1).column(0).into_owned(),
        }
    }

    /// Split certificate, for the smooth encoding only.
    pub fn alpha_certificate(&self, z: &Vector) -> Option<AlphaCertificate> {
        if self.encoding != Encoding::Cor1 {
            return None;
        }
        let shape = CertificateShape::of(&self.inner, &self.outer);
        let read = |block: Block, rows: usize, cols: usize| {
            self.var_map.get(block).map_or_else(|| Matrix::zeros(rows, cols), |s| s.extract(z))
        };
        Some(AlphaCertificate {
            base: self.certificate(z),
            generator_split: read(Block::GeneratorSplit, 2 * (shape.n_inner + 1), shape.n_outer),
            constraint_split: read(Block::ConstraintSplit, 2 * (shape.q_inner + 1), shape.q_outer),
        })
    }

    /// Embeds a base certificate into the variable vector, filling split
    /// variables (if any) with positive and negative parts.
    pub fn embed(&self, cert: &InclusionCertificate) -> Vector {
        let mut z = Vector::zeros(self.num_vars);
        let mut write = |block: Block, m: &Matrix| {
            if let Some(s) = self.var_map.get(block) {
                if s.rows == m.nrows() && s.cols == m.ncols() {
                    z.as_mut_slice()[s.range()].copy_from_slice(m.as_slice());
                }
            }
        };
        let gamma = Matrix::from_column_slice(cert.center_shift.len(), 1, cert.center_shift.as_slice());
        let psi = Matrix::from_column_slice(cert.constraint_shift.len(), 1, cert.constraint_shift.as_slice());
        write(Block::CenterShift, &gamma);
        write(Block::GeneratorMap, &cert.generator_map);
        write(Block::RowMap, &cert.row_map);
        write(Block::ConstraintMap, &cert.constraint_map);
        write(Block::ConstraintShift, &psi);
        write(
            Block::GeneratorSplit,
            &split_parts(&certificate::stacked_transpose(&cert.generator_map, &cert.center_shift)),
        );
        write(
            Block::ConstraintSplit,
            &split_parts(&certificate::stacked_transpose(&cert.constraint_map, &cert.constraint_shift)),
        );
        z
    }
}

/// Closed-form problem sizes of the two nonlinear encodings.
pub fn expected_size(
    encoding: Encoding,
    inner: &ConPolyZonotope,
    outer: &ConPolyZonotope,
) -> Option<SizeReport> {
    let d = inner.dim();
    let (n1, n2) = (inner.num_generators(), outer.num_generators());
    let (p1, p2) = (inner.num_constraints(), outer.num_constraints());
    let (q1, q2) = (inner.num_constraint_generators(), outer.num_constraint_generators());
    let s2 = outer.num_factors();
    match encoding {
        Encoding::Prop1 => Some(SizeReport {
            variables: n2 * (n1 + 1) + p2 * p1 + q2 * (q1 + 1),
            equalities: d * (n1 + 1) + p2 * (q1 + 1),
            inequalities: 2 * s2,
        }),
        Encoding::Cor1 => Some(SizeReport {
            variables: 3 * n2 * (n1 + 1) + p2 * p1 + 3 * q2 * (q1 + 1),
            equalities: (d + n2) * (n1 + 1) + (p2 + q2) * (q1 + 1),
            inequalities: 2 * (s2 + n2 * (n1 + 1) + q2 * (q1 + 1)),
        }),
        Encoding::CzLp => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use nalgebra::dvector;

    #[test]
    fn prop1_size_on_experiment_pair() {
        let sys = encode_prop1(&fixtures::scaled_example(1), &fixtures::scaled_example(2)).unwrap();
        assert_eq!(sys.size.variables, 33);
        assert_eq!(sys.size, expected_size(Encoding::Prop1, &sys.inner, &sys.outer).unwrap());
    }

    #[test]
    fn cor1_size_on_experiment_pair() {
        let sys = encode_cor1(&fixtures::scaled_example(1), &fixtures::scaled_example(2)).unwrap();
        assert_eq!(sys.size.variables, 97);
        assert_eq!(sys.size.inequalities, 70);
        assert_eq!(sys.size, expected_size(Encoding::Cor1, &sys.inner, &sys.outer).unwrap());
    }

    #[test]
    fn zonotope_self_pair_sizes() {
        let z = fixtures::unit_square();
        let sys = encode_prop1(&z, &z).unwrap();
        assert_eq!(sys.size, SizeReport { variables: 6, equalities: 6, inequalities: 4 });
        let sys = encode_cor1(&z, &z).unwrap();
        assert!(sys.var_map.get(Block::ConstraintSplit).is_none());
        assert!(sys.var_map.get(Block::ConstraintShift).is_none());
    }

    #[test]
    fn dimension_mismatch() {
        let z2 = fixtures::unit_square();
        let z3 = ConPolyZonotope::zonotope(dvector![0.0, 0.0, 0.0], Matrix::identity(3, 3)).unwrap();
        assert!(matches!(encode_prop1(&z2, &z3), Err(CpzError::DimensionMismatch { inner: 2, outer: 3 })));
        assert!(encode_prop1(&z2, &z3).unwrap_err().to_string().contains("ambient dimension mismatch"));
    }

    #[test]
    fn rank_deficient_exponents_rejected() {
        let outer = ConPolyZonotope::unconstrained(
            dvector![0.0],
            nalgebra::dmatrix![1.0, 1.0],
            nalgebra::dmatrix![1, 2; 1, 2],
        )
        .unwrap();
        let err = encode_cor1(&outer, &outer).unwrap_err();
        assert!(matches!(err, CpzError::RankDeficient { matrix: "E^T", rank: 1, required: 2, .. }));
    }

    #[test]
    fn cz_lp_rejects_polynomial_sets() {
        let p = fixtures::illustrative_example();
        assert!(matches!(encode_cz_lp(&p, &p), Err(CpzError::NotLinear { side: "inner", .. })));
    }

    #[test]
    fn var_map_is_disjoint_and_covering() {
        let pairs = [
            (fixtures::scaled_example(1), fixtures::scaled_example(3)),
            (fixtures::illustrative_example().without_constraints(), fixtures::illustrative_example()),
            (fixtures::illustrative_example(), fixtures::illustrative_example().without_constraints()),
        ];
        for (inner, outer) in &pairs {
            for sys in [encode_prop1(inner, outer).unwrap(), encode_cor1(inner, outer).unwrap()] {
                let mut covered = vec![0u8; sys.num_vars];
                for s in &sys.var_map.slices {
                    for k in s.range() {
                        covered[k] += 1;
                    }
                }
                assert!(covered.iter().all(|&c| c == 1));
                assert_eq!(sys.var_map.total(), sys.num_vars);
                assert_eq!(Some(sys.size), expected_size(sys.encoding, inner, outer));
            }
        }
    }

    #[test]
    fn identity_embedding_satisfies_cor1_system() {
        let set = fixtures::illustrative_example();
        let sys = encode_cor1(&set, &set).unwrap();
        let z = sys.embed(&InclusionCertificate::identity(&set));
        assert!(sys.max_violation(&z) < 1e-12);
        assert_eq!(sys.certificate(&z), InclusionCertificate::identity(&set));
    }

    #[test]
    fn outer_constraints_without_inner_constraints() {
        let outer = fixtures::illustrative_example();
        let inner = outer.without_constraints();
        let sys = encode_cor1(&inner, &outer).unwrap();
        assert!(sys.var_map.get(Block::ConstraintMap).is_none());
        assert!(sys.var_map.get(Block::RowMap).is_none());
        assert_eq!(sys.var_map.get(Block::ConstraintShift).unwrap().len(), 3);
        assert_eq!(sys.var_map.get(Block::ConstraintSplit).unwrap().len(), 6);
        let rhs_rows = sys.eq_conditions.iter().filter(|&&c| c == Condition::ConstraintRhs).count();
        assert_eq!(rhs_rows, 1);
    }
}
