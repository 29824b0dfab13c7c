//! Minimum-Frobenius-norm reconstruction under box constraints, and the
//! integer repair that turns a rounded solution back into one whose row sums
//! match the report exactly.

use std::collections::VecDeque;

use crate::ledger::{AggregateReport, BalanceMatrix};
use crate::money::Money;

use super::pair_index;

const MAX_ITERATIONS: usize = 2_000_000;
const TOLERANCE: f64 = 1e-13;

/// Closed interval on an upper-triangle entry `x_ab`, `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Interval {
    pub lo: Option<Money>,
    pub hi: Option<Money>,
}

impl Interval {
    pub const FREE: Interval = Interval { lo: None, hi: None };
}

/// Euclidean projection of the zero matrix onto
/// `{x : row sums = report} ∩ box`, by Dykstra's alternating projections.
/// Returns upper-triangle values in cents (not yet rounded), plus whether the
/// iteration met its tolerance.
pub(crate) fn project_min_norm(report: &AggregateReport, boxes: &[Interval]) -> (Vec<f64>, bool) {
    let n = report.n();
    let scale = report
        .balances
        .iter()
        .map(|m| m.cents().unsigned_abs())
        .chain(
            boxes
                .iter()
                .flat_map(|b| [b.lo, b.hi])
                .flatten()
                .map(|m| m.cents().unsigned_abs()),
        )
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let target: Vec<f64> = report
        .balances
        .iter()
        .map(|m| m.cents() as f64 / scale)
        .collect();
    let lo: Vec<f64> = boxes
        .iter()
        .map(|b| b.lo.map_or(f64::NEG_INFINITY, |v| v.cents() as f64 / scale))
        .collect();
    let hi: Vec<f64> = boxes
        .iter()
        .map(|b| b.hi.map_or(f64::INFINITY, |v| v.cents() as f64 / scale))
        .collect();

    let m = boxes.len();
    let mut x = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut p = vec![0.0; m];
    let mut q = vec![0.0; m];
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        for k in 0..m {
            y[k] = x[k] + p[k];
        }
        project_affine(n, &target, &mut y);
        for k in 0..m {
            p[k] = x[k] + p[k] - y[k];
        }
        let mut change: f64 = 0.0;
        let mut gap: f64 = 0.0;
        for k in 0..m {
            let v = y[k] + q[k];
            let clamped = v.clamp(lo[k], hi[k]);
            q[k] = v - clamped;
            change = change.max((clamped - x[k]).abs());
            gap = gap.max((clamped - y[k]).abs());
            x[k] = clamped;
        }
        if change < TOLERANCE && gap < TOLERANCE {
            converged = true;
            break;
        }
    }
    (x.into_iter().map(|v| v * scale).collect(), converged)
}

/// Orthogonal projection onto `{x : row sums = target}`. The correction
/// `A^T r / n` is exact because `A A^T = nI - J` acts as `n` on zero-sum
/// vectors.
fn project_affine(n: usize, target: &[f64], x: &mut [f64]) {
    let mut residual = vec![0.0; n];
    let mut k = 0;
    for a in 0..n {
        for b in a + 1..n {
            residual[a] += x[k];
            residual[b] -= x[k];
            k += 1;
        }
    }
    for (r, t) in residual.iter_mut().zip(target) {
        *r -= t;
    }
    let nf = n as f64;
    let mut k = 0;
    for a in 0..n {
        for b in a + 1..n {
            x[k] -= (residual[a] - residual[b]) / nf;
            k += 1;
        }
    }
}

/// Adjusts an integer matrix so that its row sums equal `report` exactly,
/// moving amounts along paths of entries that still have room inside their
/// box. `boxes` is indexed like the strict upper triangle. Returns `None`
/// when no such adjustment exists.
pub(crate) fn repair_row_sums(
    matrix: &BalanceMatrix,
    report: &AggregateReport,
    boxes: &[Interval],
) -> Option<BalanceMatrix> {
    let n = matrix.n();
    let mut m = matrix.clone();
    let mut residual: Vec<i128> = (0..n)
        .map(|i| (report.balances[i] - m.row_sum(i)).cents())
        .collect();

    // Room for moving `delta` from u to w, i.e. raising entry (w, u).
    let room = |m: &BalanceMatrix, u: usize, w: usize| -> i128 {
        let (a, b, sign) = if w < u { (w, u, 1) } else { (u, w, -1) };
        let interval = boxes[pair_index(n, a, b)];
        let x = m.get(a, b);
        let limit = if sign > 0 {
            interval.hi.map(|hi| hi - x)
        } else {
            interval.lo.map(|lo| x - lo)
        };
        limit.map_or(i128::MAX, |r| r.cents().max(0))
    };

    while let Some(source) = residual.iter().position(|&r| r < 0) {
        // breadth-first search for a gainer reachable through roomy entries
        let mut parent = vec![usize::MAX; n];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        let mut sink = None;
        while let Some(u) = queue.pop_front() {
            if residual[u] > 0 {
                sink = Some(u);
                break;
            }
            #[allow(clippy::needless_range_loop)]
            for w in 0..n {
                if w != u && parent[w] == usize::MAX && room(&m, u, w) > 0 {
                    parent[w] = u;
                    queue.push_back(w);
                }
            }
        }
        let sink = sink?;
        let mut path = vec![sink];
        while *path.last().unwrap() != source {
            path.push(parent[*path.last().unwrap()]);
        }
        path.reverse();
        let mut delta = (-residual[source]).min(residual[sink]);
        for step in path.windows(2) {
            delta = delta.min(room(&m, step[0], step[1]));
        }
        for step in path.windows(2) {
            let (u, w) = (step[0], step[1]);
            let current = m.get(w, u);
            m.set_pair(w, u, current + Money::from_cents(delta));
        }
        residual[source] += delta;
        residual[sink] -= delta;
    }
    Some(m)
}
