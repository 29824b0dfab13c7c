use crate::error::{Error, Result};
use crate::ledger::{AggregateReport, BalanceMatrix};
use crate::money::Money;

/// One billion euro in cents.
pub const DEFAULT_QUANTUM: Money = Money::from_billions(1);
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Search grid for [`enumerate_integer_solutions`]: entries are multiples of
/// `quantum` with magnitude at most `bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub bound: Money,
    pub quantum: Money,
    pub budget: u128,
}

impl Enumeration {
    pub fn new(bound: Money) -> Self {
        Enumeration {
            bound,
            quantum: DEFAULT_QUANTUM,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_quantum(mut self, quantum: Money) -> Self {
        self.quantum = quantum;
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }
}

/// Every valid matrix on the grid whose row sums equal `report`, in
/// lexicographic order of the strict upper triangle.
///
/// Entries `(a, b)` with `1 <= a < b` are enumerated freely; the first row
/// is then forced by the row sums of the other participants.
pub fn enumerate_integer_solutions(
    report: &AggregateReport,
    grid: &Enumeration,
) -> Result<Vec<BalanceMatrix>> {
    let n = report.n();
    if n < 2 {
        return Err(Error::TooFewParticipants { n, min: 2 });
    }
    if n > 4 {
        return Err(Error::EnumerationTooWide(n));
    }
    if grid.bound.is_negative() {
        return Err(Error::param("bound", "must be non-negative"));
    }
    if !grid.quantum.is_positive() {
        return Err(Error::param("quantum", "must be strictly positive"));
    }
    if !report.is_balanced() {
        return Err(Error::InfeasibleReport(report.total()));
    }

    let steps = grid.bound.cents() / grid.quantum.cents();
    let free: Vec<(usize, usize)> = (1..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let values_per_entry = 2 * steps as u128 + 1;
    let estimate = values_per_entry
        .checked_pow(free.len() as u32)
        .unwrap_or(u128::MAX);
    if estimate > grid.budget {
        return Err(Error::EnumerationBudget {
            estimate,
            budget: grid.budget,
        });
    }

    let mut solutions = Vec::new();
    let mut digits = vec![-steps; free.len()];
    loop {
        let mut m = BalanceMatrix::zeros(n);
        for (&(a, b), &d) in free.iter().zip(&digits) {
            m.set_pair(a, b, grid.quantum * d);
        }
        // row j: T_j = -T_0j + sum_{k>=1} T_jk
        let forced: Option<Vec<Money>> = (1..n)
            .map(|j| {
                let v = m.row_sum(j) - report.balances[j];
                let on_grid = v.cents() % grid.quantum.cents() == 0;
                (on_grid && v.abs() <= grid.bound).then_some(v)
            })
            .collect();
        if let Some(first_row) = forced {
            for (j, v) in (1..n).zip(first_row) {
                m.set_pair(0, j, v);
            }
            debug_assert_eq!(m.row_sum(0), report.balances[0]);
            solutions.push(m);
        }

        // odometer increment
        let mut k = digits.len();
        loop {
            if k == 0 {
                solutions.sort_by_key(BalanceMatrix::upper);
                return Ok(solutions);
            }
            k -= 1;
            if digits[k] < steps {
                digits[k] += 1;
                for d in &mut digits[k + 1..] {
                    *d = -steps;
                }
                break;
            }
        }
    }
}
