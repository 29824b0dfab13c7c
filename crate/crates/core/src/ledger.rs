//! Bilateral balance bookkeeping and end-of-day netting.
//!
//! Entry `(i, j)` of a [`BalanceMatrix`] is the claim of participant `i` on
//! participant `j`. A cross-border payment from a payer to a payee credits
//! the payee's claim on the payer and debits the mirror entry, so the matrix
//! stays skew-symmetric with a zero diagonal. Netting collapses each row to a
//! single balance; those balances always sum to zero.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::money::Money;
use crate::participant::ParticipantId;

/// A directed cross-border transfer settled on `day`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Payment {
    pub payer: ParticipantId,
    pub payee: ParticipantId,
    pub amount: Money,
    pub day: u32,
}

impl Payment {
    pub fn new(payer: ParticipantId, payee: ParticipantId, amount: Money, day: u32) -> Self {
        Payment {
            payer,
            payee,
            amount,
            day,
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        for id in [self.payer, self.payee] {
            if id.0 >= n {
                return Err(Error::ParticipantOutOfRange { index: id.0, n });
            }
        }
        if self.payer == self.payee {
            return Err(Error::SelfPayment(self.payer.0));
        }
        if !self.amount.is_positive() {
            return Err(Error::NonPositiveAmount(self.amount));
        }
        Ok(())
    }
}

/// A breach of skew-symmetry found by [`BalanceMatrix::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    Diagonal {
        index: usize,
        value: Money,
    },
    /// Reported once per unordered pair, with `row < col`.
    Antisymmetry {
        row: usize,
        col: usize,
        upper: Money,
        lower: Money,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Diagonal { index, value } => {
                write!(f, "diagonal ({index},{index}) = {value}")
            }
            Violation::Antisymmetry {
                row,
                col,
                upper,
                lower,
            } => write!(f, "({row},{col}) = {upper} but ({col},{row}) = {lower}"),
        }
    }
}

/// Dense n×n matrix of bilateral claims in cents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BalanceMatrix {
    n: usize,
    entries: Vec<Money>,
}

impl BalanceMatrix {
    pub fn zeros(n: usize) -> Self {
        BalanceMatrix {
            n,
            entries: vec![Money::ZERO; n * n],
        }
    }

    /// Wraps row-major entries without validating them.
    pub fn from_entries(n: usize, entries: Vec<Money>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Ok(BalanceMatrix { n, entries })
    }

    /// Builds a valid matrix from its strict upper triangle, listed row by
    /// row: `(0,1), (0,2), …, (0,n-1), (1,2), …`.
    pub fn from_upper(n: usize, upper: &[Money]) -> Result<Self> {
        let pairs = n * n.saturating_sub(1) / 2;
        if upper.len() != pairs {
            return Err(Error::DimensionMismatch {
                expected: pairs,
                found: upper.len(),
            });
        }
        let mut m = BalanceMatrix::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                m.set_pair(i, j, upper[k]);
                k += 1;
            }
        }
        Ok(m)
    }

    /// Elementary cycle `a → b → c → a` of weight `x`: entries
    /// `(a,b) = (b,c) = x`, `(a,c) = -x`. Every row sums to zero.
    pub fn three_cycle(n: usize, a: usize, b: usize, c: usize, x: Money) -> Self {
        let mut m = BalanceMatrix::zeros(n);
        m.set_pair(a, b, x);
        m.set_pair(b, c, x);
        m.set_pair(a, c, -x);
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Money {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Money] {
        &self.entries
    }

    /// Sets `(i, j) = value` and `(j, i) = -value`.
    pub fn set_pair(&mut self, i: usize, j: usize, value: Money) {
        let n = self.n;
        self.entries[i * n + j] = value;
        self.entries[j * n + i] = -value;
    }

    /// Raw single-entry write; may break skew-symmetry.
    pub fn set_raw(&mut self, i: usize, j: usize, value: Money) {
        self.entries[i * self.n + j] = value;
    }

    /// Strict upper triangle in row-major order.
    pub fn upper(&self) -> Vec<Money> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn row_sum(&self, i: usize) -> Money {
        self.entries[i * self.n..(i + 1) * self.n].iter().sum()
    }

    /// Books a payment, returning the new matrix.
    pub fn record_payment(&self, payment: &Payment) -> Result<BalanceMatrix> {
        let mut next = self.clone();
        next.post(payment)?;
        Ok(next)
    }

    /// In-place form of [`record_payment`](Self::record_payment) for the
    /// single writer that owns a running ledger.
    pub fn post(&mut self, payment: &Payment) -> Result<()> {
        payment.check(self.n)?;
        let (payer, payee, n) = (payment.payer.0, payment.payee.0, self.n);
        self.entries[payee * n + payer] += payment.amount;
        self.entries[payer * n + payee] -= payment.amount;
        Ok(())
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        for i in 0..self.n {
            let d = self.get(i, i);
            if !d.is_zero() {
                violations.push(Violation::Diagonal { index: i, value: d });
            }
            for j in i + 1..self.n {
                let (upper, lower) = (self.get(i, j), self.get(j, i));
                if upper != -lower {
                    violations.push(Violation::Antisymmetry {
                        row: i,
                        col: j,
                        upper,
                        lower,
                    });
                }
            }
        }
        violations
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// End-of-day netting: one balance per participant.
    pub fn aggregate(&self, day: u32) -> Result<AggregateReport> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidMatrix(violations));
        }
        let balances = (0..self.n).map(|i| self.row_sum(i)).collect();
        Ok(AggregateReport { day, balances })
    }

    /// Relabels participants: row/column `i` of the result is row/column
    /// `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> BalanceMatrix {
        assert_eq!(perm.len(), self.n, "permutation length");
        let mut out = BalanceMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set_raw(i, j, self.get(perm[i], perm[j]));
            }
        }
        out
    }

    /// Sum of absolute values over the strict upper triangle.
    pub fn l1_upper(&self) -> Money {
        self.upper().iter().map(|m| m.abs()).sum()
    }

    fn zip_with(&self, rhs: &BalanceMatrix, f: impl Fn(Money, Money) -> Money) -> BalanceMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions differ");
        BalanceMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl Add for &BalanceMatrix {
    type Output = BalanceMatrix;
    fn add(self, rhs: &BalanceMatrix) -> BalanceMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &BalanceMatrix {
    type Output = BalanceMatrix;
    fn sub(self, rhs: &BalanceMatrix) -> BalanceMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &BalanceMatrix {
    type Output = BalanceMatrix;
    fn neg(self) -> BalanceMatrix {
        BalanceMatrix {
            n: self.n,
            entries: self.entries.iter().map(|&m| -m).collect(),
        }
    }
}

/// Published per-participant net balances for one day.
///
/// Reports produced by [`BalanceMatrix::aggregate`] always sum to zero.
/// Reports built from external data may not; see [`AggregateReport::is_balanced`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AggregateReport {
    pub day: u32,
    pub balances: Vec<Money>,
}

impl AggregateReport {
    pub fn new(day: u32, balances: Vec<Money>) -> Self {
        AggregateReport { day, balances }
    }

    pub fn n(&self) -> usize {
        self.balances.len()
    }

    pub fn total(&self) -> Money {
        self.balances.iter().sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.total().is_zero()
    }
}

impl Add for &AggregateReport {
    type Output = AggregateReport;
    fn add(self, rhs: &AggregateReport) -> AggregateReport {
        assert_eq!(self.n(), rhs.n(), "report dimensions differ");
        AggregateReport {
            day: self.day,
            balances: self
                .balances
                .iter()
                .zip(&rhs.balances)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

/// How a [`Ledger`] carries balances from one day to the next.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NettingMode {
    /// Balances accumulate across days.
    #[default]
    Cumulative,
    /// Every day starts from a zero matrix.
    PerDay,
}

/// Nets one day's payments, starting from `opening` (or from zero).
pub fn end_of_day_netting(
    n: usize,
    payments: &[Payment],
    day: u32,
    opening: Option<&BalanceMatrix>,
) -> Result<(BalanceMatrix, AggregateReport)> {
    let mut matrix = match opening {
        Some(m) if m.n() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.n(),
            })
        }
        Some(m) => m.clone(),
        None => BalanceMatrix::zeros(n),
    };
    for (position, payment) in payments.iter().enumerate() {
        if payment.day != day {
            return Err(Error::DayMismatch {
                position,
                expected: day,
                found: payment.day,
            });
        }
        matrix.post(payment).map_err(|e| Error::Payment {
            position,
            source: Box::new(e),
        })?;
    }
    let report = matrix.aggregate(day)?;
    Ok((matrix, report))
}

/// Running ledger advanced one day at a time by a single writer. Each
/// closed day yields an immutable snapshot.
#[derive(Clone, Debug)]
pub struct Ledger {
    mode: NettingMode,
    matrix: BalanceMatrix,
    last_day: Option<u32>,
}

impl Ledger {
    pub fn new(n: usize, mode: NettingMode) -> Self {
        Ledger {
            mode,
            matrix: BalanceMatrix::zeros(n),
            last_day: None,
        }
    }

    pub fn matrix(&self) -> &BalanceMatrix {
        &self.matrix
    }

    pub fn close_day(
        &mut self,
        day: u32,
        payments: &[Payment],
    ) -> Result<(BalanceMatrix, AggregateReport)> {
        if let Some(previous) = self.last_day {
            if day <= previous {
                return Err(Error::EventsOutOfOrder { day, previous });
            }
        }
        let opening = match self.mode {
            NettingMode::Cumulative => Some(&self.matrix),
            NettingMode::PerDay => None,
        };
        let (matrix, report) = end_of_day_netting(self.matrix.n(), payments, day, opening)?;
        self.matrix = matrix.clone();
        self.last_day = Some(day);
        Ok((matrix, report))
    }
}

/// Independent bilateral balances versus independent published aggregates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreesOfFreedom {
    pub bilateral: usize,
    pub aggregates: usize,
}

pub fn degrees_of_freedom(n: usize) -> Result<DegreesOfFreedom> {
    if n < 2 {
        return Err(Error::TooFewParticipants { n, min: 2 });
    }
    Ok(DegreesOfFreedom {
        bilateral: n * (n - 1) / 2,
        aggregates: n - 1,
    })
}
