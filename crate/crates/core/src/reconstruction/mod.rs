//! The inverse problem: which bilateral matrices are consistent with a
//! published vector of net balances.
//!
//! For `n` participants the row sums pin down `n - 1` independent numbers
//! while the matrix has `n(n-1)/2`, so every feasible report is explained by
//! an affine family of matrices of dimension `(n-1)(n-2)/2`. This module
//! describes that family ([`SolutionSpace`], [`parametrize_n3`]), picks
//! canonical members of it ([`min_norm_reconstruct`],
//! [`constrained_reconstruct`]) and lists small integer members exhaustively
//! ([`enumerate_integer_solutions`]).

mod enumerate;
mod projection;
mod simplex;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::Zero;

use crate::error::{Error, Result};
use crate::ledger::{degrees_of_freedom, AggregateReport, BalanceMatrix};
use crate::money::{Money, RationalMoney};

pub use enumerate::{enumerate_integer_solutions, Enumeration, DEFAULT_BUDGET, DEFAULT_QUANTUM};

use projection::Interval;
use simplex::{PhaseOne, Tableau, Q};

/// Position of `(a, b)`, `a < b`, in the row-major strict upper triangle.
pub(crate) fn pair_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < n);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
}

/// A report is explainable by some bilateral matrix iff it sums to zero.
pub fn feasible(report: &AggregateReport) -> bool {
    report.is_balanced()
}

/// Dimension of the family of matrices sharing one aggregate report.
pub fn solution_space_dim(n: usize) -> Result<usize> {
    let dof = degrees_of_freedom(n)?;
    Ok(dof.bilateral - dof.aggregates)
}

fn require_feasible(report: &AggregateReport) -> Result<()> {
    if feasible(report) {
        Ok(())
    } else {
        Err(Error::InfeasibleReport(report.total()))
    }
}

/// All solutions of a report: `particular + Σ c_k basis[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSpace {
    pub n: usize,
    pub particular: BalanceMatrix,
    pub null_dimension: usize,
    pub basis: Vec<BalanceMatrix>,
}

impl SolutionSpace {
    /// The particular solution routes everything through participant 0
    /// (`T_0j = -T_j`); the basis is the elementary cycles `0 → j → k → 0`
    /// for `0 < j < k`.
    pub fn for_report(report: &AggregateReport) -> Result<Self> {
        let n = report.n();
        let null_dimension = solution_space_dim(n)?;
        require_feasible(report)?;
        let mut particular = BalanceMatrix::zeros(n);
        for j in 1..n {
            particular.set_pair(0, j, -report.balances[j]);
        }
        let basis: Vec<BalanceMatrix> = (1..n)
            .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
            .map(|(j, k)| BalanceMatrix::three_cycle(n, 0, j, k, Money::from_cents(1)))
            .collect();
        debug_assert_eq!(basis.len(), null_dimension);
        Ok(SolutionSpace {
            n,
            particular,
            null_dimension,
            basis,
        })
    }

    /// The member with the given integer coordinates (cents) along the basis.
    pub fn point(&self, coordinates: &[i128]) -> Result<BalanceMatrix> {
        if coordinates.len() != self.null_dimension {
            return Err(Error::DimensionMismatch {
                expected: self.null_dimension,
                found: coordinates.len(),
            });
        }
        let mut m = self.particular.clone();
        for (c, b) in coordinates.iter().zip(&self.basis) {
            let scaled =
                BalanceMatrix::from_entries(self.n, b.entries().iter().map(|&e| e * *c).collect())?;
            m = &m + &scaled;
        }
        Ok(m)
    }
}

/// The three-participant family with `T12 = t12` as its free parameter:
/// `T13 = -t12 - T2 - T3` and `T23 = t12 + T2`.
pub fn parametrize_n3(report: &AggregateReport, t12: Money) -> Result<BalanceMatrix> {
    if report.n() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: report.n(),
        });
    }
    require_feasible(report)?;
    let (t2, t3) = (report.balances[1], report.balances[2]);
    let mut m = BalanceMatrix::zeros(3);
    m.set_pair(0, 1, t12);
    m.set_pair(0, 2, -t12 - t2 - t3);
    m.set_pair(1, 2, t12 + t2);
    Ok(m)
}

/// Matrix of exact rationals, used for the minimum-norm reconstruction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<RationalMoney>,
}

impl RationalMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> RationalMoney {
        self.entries[i * self.n + j]
    }

    pub fn row_sum(&self, i: usize) -> RationalMoney {
        self.entries[i * self.n..(i + 1) * self.n]
            .iter()
            .copied()
            .sum()
    }

    pub fn is_skew_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            self.get(i, i) == RationalMoney::zero()
                && (i + 1..self.n).all(|j| self.get(i, j) == -self.get(j, i))
        })
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(RationalMoney::is_integral)
    }

    /// Entrywise inner product with an integer matrix.
    pub fn dot(&self, other: &BalanceMatrix) -> RationalMoney {
        assert_eq!(self.n, other.n());
        self.entries
            .iter()
            .zip(other.entries())
            .map(|(r, m)| *r * m.cents())
            .sum()
    }

    /// Sum of squares over all entries, in cents².
    pub fn frobenius_squared(&self) -> f64 {
        self.entries.iter().map(|e| e.to_f64().powi(2)).sum()
    }

    /// Rounds half-to-even entrywise (which keeps skew-symmetry).
    pub fn round_half_even(&self) -> BalanceMatrix {
        BalanceMatrix::from_entries(
            self.n,
            self.entries
                .iter()
                .map(RationalMoney::round_half_even)
                .collect(),
        )
        .expect("dimensions are preserved")
    }
}

/// Closed-form minimum-Frobenius-norm member of the solution family:
/// `T_ij = (T_i - T_j) / n`.
pub fn min_norm_reconstruct(report: &AggregateReport) -> Result<RationalMatrix> {
    let n = report.n();
    if n < 2 {
        return Err(Error::TooFewParticipants { n, min: 2 });
    }
    require_feasible(report)?;
    let b = &report.balances;
    let entries = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| RationalMoney::new((b[i] - b[j]).cents(), n as i128))
        .collect();
    Ok(RationalMatrix { n, entries })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Objective {
    #[default]
    MinFrobeniusNorm,
    MinL1,
    FeasibilityOnly,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::MinFrobeniusNorm => "min_frobenius_norm",
            Objective::MinL1 => "min_l1",
            Objective::FeasibilityOnly => "feasibility_only",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "min_frobenius_norm" | "min_norm" | "min_frobenius" => Ok(Objective::MinFrobeniusNorm),
            "min_l1" => Ok(Objective::MinL1),
            "feasibility_only" | "feasibility" => Ok(Objective::FeasibilityOnly),
            _ => Err(Error::param(
                "objective",
                format!("unknown objective `{s}`"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintKind {
    Fix,
    Lower,
    Upper,
}

impl ConstraintKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Fix => "fix",
            ConstraintKind::Lower => "lower",
            ConstraintKind::Upper => "upper",
        }
    }
}

impl FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fix" => Ok(ConstraintKind::Fix),
            "lower" => Ok(ConstraintKind::Lower),
            "upper" => Ok(ConstraintKind::Upper),
            other => Err(Error::param(
                "kind",
                format!("`{other}` is not fix, lower or upper"),
            )),
        }
    }
}

/// A condition on entry `(i, j)` (0-based): pinned, bounded below or above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub i: usize,
    pub j: usize,
    pub kind: ConstraintKind,
    pub value: Money,
}

/// Side conditions and objective for [`constrained_reconstruct`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReconstructionConstraints {
    pub constraints: Vec<Constraint>,
    pub objective: Objective,
}

impl ReconstructionConstraints {
    pub fn new(objective: Objective) -> Self {
        ReconstructionConstraints {
            constraints: Vec::new(),
            objective,
        }
    }

    fn with(mut self, i: usize, j: usize, kind: ConstraintKind, value: Money) -> Self {
        self.constraints.push(Constraint { i, j, kind, value });
        self
    }

    pub fn fix(self, i: usize, j: usize, value: Money) -> Self {
        self.with(i, j, ConstraintKind::Fix, value)
    }

    pub fn lower(self, i: usize, j: usize, value: Money) -> Self {
        self.with(i, j, ConstraintKind::Lower, value)
    }

    pub fn upper(self, i: usize, j: usize, value: Money) -> Self {
        self.with(i, j, ConstraintKind::Upper, value)
    }

    pub fn is_unconstrained(&self) -> bool {
        self.constraints.is_empty()
    }
}

/// One row of the reconstruction problem, as named in certificates.
/// Displayed with 1-based indices, e.g. `T(2,3) fix`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintRef {
    RowSum(usize),
    Entry {
        i: usize,
        j: usize,
        kind: ConstraintKind,
    },
}

impl fmt::Display for ConstraintRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintRef::RowSum(i) => write!(f, "row sum {}", i + 1),
            ConstraintRef::Entry { i, j, kind } => {
                write!(f, "T({},{}) {}", i + 1, j + 1, kind.name())
            }
        }
    }
}

/// A subset of constraints that cannot hold simultaneously.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub constraints: Vec<ConstraintRef>,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.constraints.iter().map(ToString::to_string).collect();
        write!(f, "conflicting set {{{}}}", names.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub matrix: BalanceMatrix,
    pub objective: Objective,
    pub null_dimension: usize,
    /// False when an iterative method stopped at its iteration cap.
    pub converged: bool,
}

impl Reconstruction {
    pub fn l1(&self) -> Money {
        self.matrix.l1_upper()
    }

    /// Frobenius norm over all n² entries, in cents.
    pub fn frobenius_norm(&self) -> f64 {
        self.matrix
            .entries()
            .iter()
            .map(|m| (m.cents() as f64).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// The objective value as exported in solution metadata.
    pub fn objective_value(&self) -> String {
        match self.objective {
            Objective::MinL1 => self.l1().to_string(),
            Objective::MinFrobeniusNorm => format!("{:.3}", self.frobenius_norm()),
            Objective::FeasibilityOnly => "0".to_string(),
        }
    }
}

/// Per upper-triangle entry: box plus the constraints that produced it.
struct Normalized {
    boxes: Vec<Interval>,
    rows: Vec<(usize, ConstraintKind, Money, ConstraintRef)>,
}

fn normalize(n: usize, constraints: &[Constraint]) -> Result<Normalized> {
    // (pair, side) -> (value, origin); side is the kind after orienting to a < b
    let mut sides: BTreeMap<(usize, ConstraintKind), (Money, ConstraintRef)> = BTreeMap::new();
    for c in constraints {
        for index in [c.i, c.j] {
            if index >= n {
                return Err(Error::ParticipantOutOfRange { index, n });
            }
        }
        let origin = ConstraintRef::Entry {
            i: c.i,
            j: c.j,
            kind: c.kind,
        };
        if c.i == c.j {
            let consistent = match c.kind {
                ConstraintKind::Fix => c.value.is_zero(),
                ConstraintKind::Lower => !c.value.is_positive(),
                ConstraintKind::Upper => !c.value.is_negative(),
            };
            if !consistent {
                return Err(Error::InconsistentConstraints(format!(
                    "{origin} = {} contradicts the zero diagonal",
                    c.value
                )));
            }
            continue;
        }
        let (a, b, flip) = if c.i < c.j {
            (c.i, c.j, false)
        } else {
            (c.j, c.i, true)
        };
        let (side, value) = match (c.kind, flip) {
            (kind, false) => (kind, c.value),
            (ConstraintKind::Fix, true) => (ConstraintKind::Fix, -c.value),
            (ConstraintKind::Lower, true) => (ConstraintKind::Upper, -c.value),
            (ConstraintKind::Upper, true) => (ConstraintKind::Lower, -c.value),
        };
        let key = (pair_index(n, a, b), side);
        if let Some((existing, other)) = sides.get(&key) {
            if *existing != value {
                return Err(Error::InconsistentConstraints(format!(
                    "{origin} and {other} disagree on the same entry"
                )));
            }
            continue;
        }
        sides.insert(key, (value, origin));
    }

    let mut boxes = vec![Interval::FREE; n * (n - 1) / 2];
    let mut origins: Vec<[Option<ConstraintRef>; 3]> = vec![[None; 3]; boxes.len()];
    let mut rows = Vec::new();
    for (&(k, side), &(value, origin)) in &sides {
        let slot = &mut boxes[k];
        match side {
            ConstraintKind::Fix => {
                slot.lo = Some(slot.lo.map_or(value, |v| v.max(value)));
                slot.hi = Some(slot.hi.map_or(value, |v| v.min(value)));
                origins[k][0] = Some(origin);
            }
            ConstraintKind::Lower => {
                slot.lo = Some(slot.lo.map_or(value, |v| v.max(value)));
                origins[k][1] = Some(origin);
            }
            ConstraintKind::Upper => {
                slot.hi = Some(slot.hi.map_or(value, |v| v.min(value)));
                origins[k][2] = Some(origin);
            }
        }
        rows.push((k, side, value, origin));
    }
    for (k, slot) in boxes.iter().enumerate() {
        if let (Some(lo), Some(hi)) = (slot.lo, slot.hi) {
            if lo > hi {
                let constraints = origins[k].iter().flatten().copied().collect();
                return Err(Error::Unsatisfiable(Certificate { constraints }));
            }
        }
    }
    Ok(Normalized { boxes, rows })
}

/// Builds the split-variable LP: columns `p_k, q_k` per pair (`x_k = p_k - q_k`)
/// followed by one slack per bound row. Returns the tableau after phase one.
fn phase_one(
    report: &AggregateReport,
    normalized: &Normalized,
) -> std::result::Result<(Tableau, usize), Certificate> {
    let n = report.n();
    let m = n * (n - 1) / 2;
    let slacks = normalized
        .rows
        .iter()
        .filter(|r| r.1 != ConstraintKind::Fix)
        .count();
    let width = 2 * m + slacks;
    let mut a: Vec<Vec<Q>> = Vec::new();
    let mut b: Vec<Q> = Vec::new();
    let mut names: Vec<ConstraintRef> = Vec::new();

    for i in 0..n {
        let mut row = vec![Q::zero(); width];
        for (k, (x, y)) in pairs(n).enumerate() {
            let coefficient = if x == i {
                1
            } else if y == i {
                -1
            } else {
                continue;
            };
            row[2 * k] = Q::from(coefficient);
            row[2 * k + 1] = Q::from(-coefficient);
        }
        a.push(row);
        b.push(Q::from(report.balances[i].cents()));
        names.push(ConstraintRef::RowSum(i));
    }
    let mut slack = 2 * m;
    for &(k, side, value, origin) in &normalized.rows {
        let mut row = vec![Q::zero(); width];
        row[2 * k] = Q::from(1);
        row[2 * k + 1] = Q::from(-1);
        match side {
            ConstraintKind::Fix => {}
            ConstraintKind::Lower => {
                row[slack] = Q::from(-1);
                slack += 1;
            }
            ConstraintKind::Upper => {
                row[slack] = Q::from(1);
                slack += 1;
            }
        }
        a.push(row);
        b.push(Q::from(value.cents()));
        names.push(origin);
    }

    match Tableau::phase_one(a, b) {
        PhaseOne::Feasible(t) => Ok((t, m)),
        PhaseOne::Infeasible { multipliers } => {
            let mut constraints: Vec<ConstraintRef> = names
                .into_iter()
                .zip(multipliers)
                .filter(|(_, y)| !y.is_zero())
                .map(|(name, _)| name)
                .collect();
            constraints.sort();
            constraints.dedup();
            Err(Certificate { constraints })
        }
    }
}

fn matrix_from_lp(n: usize, pairs_count: usize, x: &[Q]) -> BalanceMatrix {
    let upper: Vec<Money> = (0..pairs_count)
        .map(|k| {
            let v = x[2 * k] - x[2 * k + 1];
            debug_assert!(
                v.is_integer(),
                "vertex of a unimodular system must be integral"
            );
            Money::from_cents(v.round().to_integer())
        })
        .collect();
    BalanceMatrix::from_upper(n, &upper).expect("upper triangle has the right length")
}

/// Picks one member of the solution family subject to bounds and pinned
/// entries.
///
/// * `MinL1` minimises `Σ_{i<j} |T_ij|` by an exact simplex; among optimal
///   solutions the lexicographically smallest upper triangle is returned.
/// * `MinFrobeniusNorm` projects the zero matrix onto the constraint set and
///   rounds to cents.
/// * `FeasibilityOnly` returns the first vertex found.
///
/// Row sums of the returned matrix equal the report exactly. When the
/// constraints cannot be met the error carries a [`Certificate`].
pub fn constrained_reconstruct(
    report: &AggregateReport,
    constraints: &ReconstructionConstraints,
) -> Result<Reconstruction> {
    let n = report.n();
    let null_dimension = solution_space_dim(n)?;
    require_feasible(report)?;
    let normalized = normalize(n, &constraints.constraints)?;

    let done = |matrix: BalanceMatrix, converged: bool| {
        debug_assert_eq!(matrix.aggregate(report.day).ok().as_ref(), Some(report));
        Ok(Reconstruction {
            matrix,
            objective: constraints.objective,
            null_dimension,
            converged,
        })
    };

    if constraints.objective == Objective::MinFrobeniusNorm && normalized.rows.is_empty() {
        let rounded = min_norm_reconstruct(report)?.round_half_even();
        let matrix = projection::repair_row_sums(&rounded, report, &normalized.boxes)
            .expect("unbounded entries can always absorb rounding residue");
        return done(matrix, true);
    }

    let (mut tableau, m) = phase_one(report, &normalized).map_err(Error::Unsatisfiable)?;

    match constraints.objective {
        Objective::FeasibilityOnly => done(matrix_from_lp(n, m, &tableau.solution()), true),
        Objective::MinL1 => {
            let width = tableau.solution().len();
            let mut cost = vec![Q::zero(); width];
            cost[..2 * m].iter_mut().for_each(|c| *c = Q::from(1));
            tableau.set_structural_objective(&cost);
            tableau
                .optimize()
                .expect("the L1 objective is bounded below by zero");
            // Walk the optimal face towards the lexicographically smallest
            // upper triangle. The face is bounded because the L1 norm is fixed.
            for k in 0..m {
                tableau.restrict_to_optimal_face();
                let mut cost = vec![Q::zero(); width];
                cost[2 * k] = Q::from(1);
                cost[2 * k + 1] = Q::from(-1);
                tableau.set_structural_objective(&cost);
                tableau
                    .optimize()
                    .expect("entries are bounded on the optimal L1 face");
            }
            done(matrix_from_lp(n, m, &tableau.solution()), true)
        }
        Objective::MinFrobeniusNorm => {
            let (x, converged) = projection::project_min_norm(report, &normalized.boxes);
            let upper: Vec<Money> = x
                .iter()
                .zip(&normalized.boxes)
                .map(|(&v, bx)| {
                    let mut cents = Money::from_cents(v.round() as i128);
                    if let Some(lo) = bx.lo {
                        cents = cents.max(lo);
                    }
                    if let Some(hi) = bx.hi {
                        cents = cents.min(hi);
                    }
                    cents
                })
                .collect();
            let rounded = BalanceMatrix::from_upper(n, &upper)?;
            match projection::repair_row_sums(&rounded, report, &normalized.boxes) {
                Some(matrix) => done(matrix, converged),
                // fall back on the LP vertex, which satisfies every constraint
                None => done(matrix_from_lp(n, m, &tableau.solution()), false),
            }
        }
    }
}
