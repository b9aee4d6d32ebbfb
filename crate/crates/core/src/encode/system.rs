use std::fmt;
use std::ops::Range;

use crate::set::{ConPolyZonotope, Matrix, Vector};

/// Which inclusion encoding a [`FeasibilitySystem`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    /// Conditions (a)-(f) with exact absolute values inside the logarithms.
    Prop1,
    /// Same conditions with the absolute values replaced by a nonnegative
    /// split of `[Gamma gamma]` and `[Psi psi]`.
    Cor1,
    /// Linear test for constrained zonotopes.
    CzLp,
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Prop1 => "prop1",
            Encoding::Cor1 => "cor1",
            Encoding::CzLp => "cz-lp",
        })
    }
}

/// The individual inclusion conditions, used to label rows and residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// `c1 = c2 + G2 gamma`
    Center,
    /// `G1 = G2 Gamma`
    Generators,
    /// `Pi F1 = F2 Psi`
    ConstraintGenerators,
    /// `Pi theta1 = theta2 - F2 psi`
    ConstraintRhs,
    /// `pinv(E2^T) log(|gamma| + |Gamma| 1) <= 0`
    GeneratorBound,
    /// `pinv(R2^T) log(|psi| + |Psi| 1) <= 0`
    ConstraintBound,
    /// `[Gamma gamma]^T = [I -I] alpha_Gamma`
    GeneratorSplit,
    /// `[Psi psi]^T = [I -I] alpha_Psi`
    ConstraintSplit,
    /// `alpha >= 0`
    Nonnegativity,
}

impl Condition {
    /// The conditions checked by certificate verification, in order.
    pub const VERIFIED: [Condition; 6] = [
        Condition::Center,
        Condition::Generators,
        Condition::ConstraintGenerators,
        Condition::ConstraintRhs,
        Condition::GeneratorBound,
        Condition::ConstraintBound,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Condition::Center => "center",
            Condition::Generators => "generators",
            Condition::ConstraintGenerators => "constraint_generators",
            Condition::ConstraintRhs => "constraint_rhs",
            Condition::GeneratorBound => "generator_bound",
            Condition::ConstraintBound => "constraint_bound",
            Condition::GeneratorSplit => "generator_split",
            Condition::ConstraintSplit => "constraint_split",
            Condition::Nonnegativity => "nonnegativity",
        }
    }
}

/// Decision-variable blocks of an inclusion encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    /// `gamma`, length `n2`.
    CenterShift,
    /// `Gamma`, `n2 x n1`.
    GeneratorMap,
    /// `Pi`, `p2 x p1`.
    RowMap,
    /// `Psi`, `q2 x q1`.
    ConstraintMap,
    /// `psi`, length `q2`.
    ConstraintShift,
    /// `alpha_Gamma`, `2(n1+1) x n2`.
    GeneratorSplit,
    /// `alpha_Psi`, `2(q1+1) x q2`.
    ConstraintSplit,
}

/// Location of a matrix-shaped block inside the variable vector
/// (column-major).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarSlice {
    pub block: Block,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl VarSlice {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len()
    }

    /// Variable index of entry `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.rows && j < self.cols);
        self.offset + i + j * self.rows
    }

    /// Reads the block out of a full variable vector.
    pub fn extract(&self, z: &Vector) -> Matrix {
        Matrix::from_column_slice(self.rows, self.cols, &z.as_slice()[self.range()])
    }
}

/// Named, disjoint slices covering the variable vector.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarMap {
    pub slices: Vec<VarSlice>,
}

impl VarMap {
    pub fn get(&self, block: Block) -> Option<&VarSlice> {
        self.slices.iter().find(|s| s.block == block)
    }

    pub fn total(&self) -> usize {
        self.slices.iter().map(VarSlice::len).sum()
    }
}

/// Problem size in the accounting used for the encodings: bound
/// constraints count as inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeReport {
    pub variables: usize,
    pub equalities: usize,
    pub inequalities: usize,
}

/// Argument of one logarithm: `sum coef * z_k`, or `sum coef * |z_k|`
/// when `absolute`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogArgument {
    pub terms: Vec<(usize, f64)>,
    pub absolute: bool,
}

impl LogArgument {
    pub fn value(&self, z: &Vector) -> f64 {
        self.terms
            .iter()
            .map(|&(k, c)| c * if self.absolute { z[k].abs() } else { z[k] })
            .sum()
    }
}

/// A block of inequalities `weights * log(args(z)) <= 0`, one per row of
/// `weights`. A block with rows but no arguments is vacuously satisfied.
#[derive(Debug, Clone, PartialEq)]
pub struct LogBlock {
    pub condition: Condition,
    pub weights: Matrix,
    pub args: Vec<LogArgument>,
    /// Domain guard used by smooth solvers: arguments below it are
    /// continued linearly.
    pub floor: f64,
}

impl LogBlock {
    pub fn rows(&self) -> usize {
        self.weights.nrows()
    }

    pub fn arguments(&self, z: &Vector) -> Vector {
        Vector::from_iterator(self.args.len(), self.args.iter().map(|a| a.value(z)))
    }

    /// Row values with the floored, linearly continued logarithm.
    pub fn guarded_values(&self, z: &Vector) -> Vector {
        let logs = self.arguments(z).map(|a| guarded_log(a, self.floor));
        &self.weights * logs
    }
}

/// `ln(a)` for `a >= floor`, its tangent line at `floor` below.
pub(crate) fn guarded_log(a: f64, floor: f64) -> f64 {
    if a >= floor {
        a.ln()
    } else {
        floor.ln() + (a - floor) / floor
    }
}

pub(crate) fn guarded_log_derivative(a: f64, floor: f64) -> f64 {
    1.0 / a.max(floor)
}

/// Linear inequality `sum coef * z_k <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInequality {
    pub condition: Condition,
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LinearInequality {
    pub fn excess(&self, z: &Vector) -> f64 {
        self.terms.iter().map(|&(k, c)| c * z[k]).sum::<f64>() - self.rhs
    }
}

/// Linear equalities, bounds and inequalities over `z`, together with the
/// pair of sets they certify inclusion for.
#[derive(Debug, Clone)]
pub struct FeasibilitySystem {
    pub encoding: Encoding,
    pub num_vars: usize,
    /// `eq_matrix * z = eq_rhs`.
    pub eq_matrix: Matrix,
    pub eq_rhs: Vector,
    /// Condition each equality row belongs to.
    pub eq_conditions: Vec<Condition>,
    pub lower_bounds: Vec<Option<f64>>,
    pub linear_ineqs: Vec<LinearInequality>,
    pub log_blocks: Vec<LogBlock>,
    pub var_map: VarMap,
    pub size: SizeReport,
    pub inner: ConPolyZonotope,
    pub outer: ConPolyZonotope,
}

impl FeasibilitySystem {
    pub fn has_log_constraints(&self) -> bool {
        self.log_blocks.iter().any(|b| !b.args.is_empty())
    }

    /// Largest violation of any constraint at `z`, using guarded logarithms.
    pub fn max_violation(&self, z: &Vector) -> f64 {
        let mut worst = if self.eq_matrix.nrows() > 0 {
            (&self.eq_matrix * z - &self.eq_rhs).amax()
        } else {
            0.0
        };
        for (k, lb) in self.lower_bounds.iter().enumerate() {
            if let Some(lb) = lb {
                worst = worst.max(lb - z[k]);
            }
        }
        for ineq in &self.linear_ineqs {
            worst = worst.max(ineq.excess(z));
        }
        for block in &self.log_blocks {
            if let Some(m) = block.guarded_values(z).iter().copied().reduce(f64::max) {
                worst = worst.max(m);
            }
        }
        worst.max(0.0)
    }
}

/// Variable index of entry `(k, i)` of `[map shift]^T`.
pub(crate) fn stacked_index(map: Option<VarSlice>, shift: VarSlice, k: usize, i: usize) -> usize {
    match map {
        Some(m) if k < m.cols => m.at(i, k),
        _ => shift.at(i, 0),
    }
}
