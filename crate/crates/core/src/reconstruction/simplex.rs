//! Dense two-phase tableau simplex over exact rationals.
//!
//! Problems handed to this solver come from incidence matrices plus unit
//! bound rows, which are totally unimodular; every tableau entry stays in
//! {-1, 0, 1} and every basic solution is integral, so `Ratio<i128>` never
//! grows past the magnitude of the right-hand side.
//!
//! Pivoting follows Bland's rule (lowest eligible column enters, ties in the
//! ratio test go to the lowest basic column) which both guarantees
//! termination and makes the result independent of anything but the input.

use num::rational::Ratio;
use num::{Signed, Zero};

pub(crate) type Q = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Unbounded;

/// Outcome of phase one.
pub(crate) enum PhaseOne {
    Feasible(Tableau),
    /// Farkas multipliers, one per original row (sign relative to the row as
    /// supplied by the caller). Rows with a non-zero multiplier form an
    /// infeasible subsystem.
    Infeasible {
        multipliers: Vec<Q>,
    },
}

pub(crate) struct Tableau {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    reduced: Vec<Q>,
    allowed: Vec<bool>,
    structural: usize,
}

impl Tableau {
    /// Sets up `A x = b, x >= 0` with one artificial column per row and
    /// drives the artificials to zero.
    pub(crate) fn phase_one(a: Vec<Vec<Q>>, b: Vec<Q>) -> PhaseOne {
        let m = a.len();
        let structural = a.first().map_or(0, Vec::len);
        let mut flipped = vec![false; m];
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (i, (mut row, mut value)) in a.into_iter().zip(b).enumerate() {
            debug_assert_eq!(row.len(), structural);
            if value.is_negative() {
                row.iter_mut().for_each(|v| *v = -*v);
                value = -value;
                flipped[i] = true;
            }
            row.extend((0..m).map(|k| if k == i { Q::from(1) } else { Q::zero() }));
            rows.push(row);
            rhs.push(value);
        }
        let cols = structural + m;
        let mut t = Tableau {
            rows,
            rhs,
            basis: (structural..cols).collect(),
            reduced: vec![Q::zero(); cols],
            allowed: vec![true; cols],
            structural,
        };
        let mut cost = vec![Q::zero(); cols];
        cost[structural..].iter_mut().for_each(|c| *c = Q::from(1));
        t.set_objective(&cost);
        t.optimize().expect("phase one is bounded below by zero");

        if t.objective(&cost) > Q::zero() {
            // reduced cost of artificial k is 1 - y_k
            let multipliers = (0..m)
                .map(|k| {
                    let y = Q::from(1) - t.reduced[structural + k];
                    if flipped[k] {
                        -y
                    } else {
                        y
                    }
                })
                .collect();
            return PhaseOne::Infeasible { multipliers };
        }

        for col in structural..cols {
            t.allowed[col] = false;
        }
        for r in 0..m {
            if t.basis[r] >= structural {
                if let Some(c) = (0..structural).find(|&c| !t.rows[r][c].is_zero()) {
                    t.pivot(r, c);
                }
                // otherwise the row is redundant; its artificial stays basic at 0
            }
        }
        PhaseOne::Feasible(t)
    }

    /// Installs a cost vector over the structural columns (artificials cost 0).
    pub(crate) fn set_structural_objective(&mut self, cost: &[Q]) {
        let mut full = cost.to_vec();
        full.resize(self.reduced.len(), Q::zero());
        self.set_objective(&full);
    }

    fn set_objective(&mut self, cost: &[Q]) {
        let mut reduced = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb.is_zero() {
                continue;
            }
            for (d, a) in reduced.iter_mut().zip(&self.rows[r]) {
                *d -= cb * a;
            }
        }
        self.reduced = reduced;
    }

    fn objective(&self, cost: &[Q]) -> Q {
        self.basis
            .iter()
            .zip(&self.rhs)
            .map(|(&b, v)| cost[b] * v)
            .fold(Q::zero(), |acc, x| acc + x)
    }

    pub(crate) fn optimize(&mut self) -> Result<(), Unbounded> {
        loop {
            let entering =
                (0..self.reduced.len()).find(|&j| self.allowed[j] && self.reduced[j].is_negative());
            let Some(col) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, Q)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((br, bq)) => {
                        ratio < *bq || (ratio == *bq && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let (row, _) = best.ok_or(Unbounded)?;
            self.pivot(row, col);
        }
    }

    /// Restricts the feasible region to the current optimal face: every
    /// non-basic column with a strictly positive reduced cost is pinned at 0.
    pub(crate) fn restrict_to_optimal_face(&mut self) {
        for j in 0..self.reduced.len() {
            if self.reduced[j].is_positive() && !self.basis.contains(&j) {
                self.allowed[j] = false;
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        if p != Q::from(1) {
            self.rows[row].iter_mut().for_each(|v| *v /= p);
            self.rhs[row] /= p;
        }
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row];
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let f = self.rows[r][col];
            if f.is_zero() {
                continue;
            }
            for (v, a) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !a.is_zero() {
                    *v -= f * a;
                }
            }
            self.rhs[r] -= f * pivot_rhs;
        }
        let f = self.reduced[col];
        if !f.is_zero() {
            for (v, a) in self.reduced.iter_mut().zip(&pivot_row) {
                if !a.is_zero() {
                    *v -= f * a;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Values of the structural columns at the current vertex.
    pub(crate) fn solution(&self) -> Vec<Q> {
        let mut x = vec![Q::zero(); self.structural];
        for (&b, v) in self.basis.iter().zip(&self.rhs) {
            if b < self.structural {
                x[b] = *v;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i128) -> Q {
        Q::from(v)
    }

    fn solve(a: Vec<Vec<i128>>, b: Vec<i128>, c: Vec<i128>) -> Result<Vec<Q>, Option<Vec<Q>>> {
        let a = a
            .into_iter()
            .map(|r| r.into_iter().map(q).collect())
            .collect();
        let b = b.into_iter().map(q).collect();
        match Tableau::phase_one(a, b) {
            PhaseOne::Infeasible { multipliers } => Err(Some(multipliers)),
            PhaseOne::Feasible(mut t) => {
                let c: Vec<Q> = c.into_iter().map(q).collect();
                t.set_structural_objective(&c);
                t.optimize().map_err(|_| None)?;
                Ok(t.solution())
            }
        }
    }

    #[test]
    fn small_lp() {
        // min -x - y  s.t. x + s1 = 2, y + s2 = 3
        let x = solve(
            vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1]],
            vec![2, 3],
            vec![-1, -1, 0, 0],
        )
        .unwrap();
        assert_eq!(&x[..2], &[q(2), q(3)]);
    }

    #[test]
    fn negative_rhs_is_normalised() {
        // x - y = -4, min x + y  -> x = 0, y = 4
        let x = solve(vec![vec![1, -1]], vec![-4], vec![1, 1]).unwrap();
        assert_eq!(x, vec![q(0), q(4)]);
    }

    #[test]
    fn infeasible_gives_farkas_multipliers() {
        // x = 1 and x = 2
        let err = solve(vec![vec![1], vec![1]], vec![1, 2], vec![0]).unwrap_err();
        let y = err.unwrap();
        assert!(!y[0].is_zero() && !y[1].is_zero());
        // y^T b must be non-zero while y^T A = 0
        assert_eq!(y[0] + y[1], q(0));
    }

    #[test]
    fn unbounded_detected() {
        // min -x s.t. x - y = 0
        assert_eq!(solve(vec![vec![1, -1]], vec![0], vec![-1, 0]), Err(None));
    }

    #[test]
    fn redundant_rows_survive() {
        // x + y = 2 stated twice
        let x = solve(vec![vec![1, 1], vec![1, 1]], vec![2, 2], vec![1, 2]).unwrap();
        assert_eq!(x, vec![q(2), q(0)]);
    }
}
