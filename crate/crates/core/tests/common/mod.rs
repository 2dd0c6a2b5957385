//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use mixed_cocycles::measure::{AtomicMeasure, Metric};
use statrs::function::factorial::ln_binomial;

/// W₁ by a generic LP solver: minimize Σ c_ij π_ij over couplings.
pub fn w1_lp<T: Metric>(mu: &AtomicMeasure<T>, nu: &AtomicMeasure<T>) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<_>> = mu
        .atoms()
        .iter()
        .map(|x| nu.atoms().iter().map(|y| lp.add_var(x.distance(y), (0.0, f64::INFINITY))).collect())
        .collect();
    for (i, &a) in mu.weights().iter().enumerate() {
        let row: Vec<_> = vars[i].iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(&row, ComparisonOp::Eq, a);
    }
    for (j, &b) in nu.weights().iter().enumerate() {
        let col: Vec<_> = vars.iter().map(|r| (r[j], 1.0)).collect();
        lp.add_constraint(&col, ComparisonOp::Eq, b);
    }
    lp.solve().expect("transport LP is feasible").objective()
}

/// P(|S_n/n| > ε) for S_n a sum of n fair ±1 signs, by exact
/// binomial summation.
pub fn coin_tail(n: u64, epsilon: f64) -> f64 {
    (0..=n)
        .filter(|&k| ((2 * k) as f64 - n as f64).abs() / n as f64 > epsilon)
        .map(|k| (ln_binomial(n, k) - n as f64 * std::f64::consts::LN_2).exp())
        .sum()
}

/// Cramér rate of a fair ±1 coin, sup_λ (λx − log cosh λ), by golden-section
/// search on the concave objective.
pub fn coin_cramer_rate(x: f64) -> f64 {
    let g = |l: f64| l * x - l.cosh().ln();
    let (mut a, mut b) = (0.0, 20.0);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    g(0.5 * (a + b))
}

/// Second-largest eigenvalue modulus of a stochastic matrix by power
/// iteration on P − 1νᵀ, with ν itself from power iteration on Pᵀ.
pub fn second_eigen_modulus(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let mut nu = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let mut next = vec![0.0; n];
        for (i, r) in rows.iter().enumerate() {
            for j in 0..n {
                next[j] += nu[i] * r[j];
            }
        }
        nu = next;
    }
    let b: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&nu).map(|(p, v)| p - v).collect()).collect();
    let mul = |m: &[Vec<f64>], x: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| m[i][k] * x[k][j]).sum()).collect())
            .collect()
    };
    let norm = |m: &[Vec<f64>]| m.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let k = 60;
    let mut pk = b.clone();
    for _ in 1..k {
        pk = mul(&pk, &b);
    }
    let mut p2k = pk.clone();
    for _ in 0..k {
        p2k = mul(&p2k, &b);
    }
    (norm(&p2k) / norm(&pk)).powf(1.0 / k as f64)
}
