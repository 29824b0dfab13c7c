//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use target_ledger::{AggregateReport, Money};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Random zero-sum report of `n` balances with magnitudes up to `scale` cents.
pub fn random_report(rng: &mut impl Rng, n: usize, scale: i128) -> AggregateReport {
    let mut balances: Vec<Money> = (0..n - 1)
        .map(|_| Money::from_cents(rng.gen_range(-scale..=scale)))
        .collect();
    let last = -balances.iter().copied().sum::<Money>();
    balances.push(last);
    AggregateReport::new(0, balances)
}

/// Least-norm solution of the row-sum equations, computed numerically:
/// `x = A^T (A A^T)^{-1} b` with the redundant last equation dropped.
/// Returns the strict upper triangle, row-major.
pub fn least_norm_upper(report: &AggregateReport) -> Vec<f64> {
    let n = report.n();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut a = DMatrix::<f64>::zeros(n - 1, pairs.len());
    for (k, &(i, j)) in pairs.iter().enumerate() {
        if i < n - 1 {
            a[(i, k)] = 1.0;
        }
        if j < n - 1 {
            a[(j, k)] = -1.0;
        }
    }
    let b = DVector::from_iterator(
        n - 1,
        report.balances[..n - 1].iter().map(|m| m.cents() as f64),
    );
    let gram = &a * a.transpose();
    let y = gram
        .cholesky()
        .expect("incidence rows are independent")
        .solve(&b);
    (a.transpose() * y).iter().copied().collect()
}

/// Sum of squares over the full skew-symmetric matrix given its upper triangle.
pub fn frobenius_squared_from_upper(upper: &[f64]) -> f64 {
    2.0 * upper.iter().map(|x| x * x).sum::<f64>()
}

/// Compound growth by repeated multiplication in floating point.
pub fn iterate_growth(start: f64, factor: f64, periods: u32) -> f64 {
    let mut v = start;
    for _ in 0..periods {
        v *= factor;
    }
    v
}
