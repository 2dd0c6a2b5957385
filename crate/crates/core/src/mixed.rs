//! Random products of quasiperiodic cocycles: the skew map F driven by a
//! measure ν on 𝒢, Lyapunov exponent estimators and an exhaustive
//! small-word oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{grid_points, QpCocycle};
use crate::error::{invalid, Error, Result};
use crate::linalg::{op_norm, qr_positive, Matrix};
use crate::measure::{AtomicMeasure, Measure};
use crate::record::Sig17;
use crate::rng::RngStream;
use crate::stats::mean_and_stderr;
use crate::torus::{check_dim, TorusPoint};

/// Words allowed in [`brute_force_lognorm`].
pub const WORD_CAP: usize = 1 << 24;
/// Frame diagonal below this counts as degenerate in the spectrum iteration.
pub const FRAME_FLOOR: f64 = 1e-300;

/// A driving measure ν on 𝒢 together with the dimensions of its cocycles.
#[derive(Clone, Debug)]
pub struct MixedCocycle {
    driving: Measure<QpCocycle>,
    d: usize,
    m: usize,
}

impl MixedCocycle {
    /// Atomic ν: every atom must share d and m. Sampler ν: draws are
    /// checked against d and m as they happen.
    pub fn new(driving: Measure<QpCocycle>, d: usize, m: usize) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(invalid("dimensions must be positive"));
        }
        if let Measure::Atomic(a) = &driving {
            for g in a.atoms() {
                check_dim(d, g.dim())?;
                check_dim(m, g.size())?;
            }
        }
        Ok(Self { driving, d, m })
    }

    /// Dimensions taken from the first atom.
    pub fn from_atomic(nu: AtomicMeasure<QpCocycle>) -> Result<Self> {
        let first = nu.atoms().first().ok_or_else(|| invalid("empty measure"))?;
        let (d, m) = (first.dim(), first.size());
        Self::new(Measure::Atomic(nu), d, m)
    }

    pub fn driving(&self) -> &Measure<QpCocycle> {
        &self.driving
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// Draws one ω_j ~ ν and hands it to `f` (atoms are borrowed, not cloned).
    fn with_draw<R>(&self, rng: &mut RngStream, f: impl FnOnce(&QpCocycle) -> Result<R>) -> Result<R> {
        match &self.driving {
            Measure::Atomic(a) => f(a.sample_ref(rng)),
            Measure::Sampler(s) => {
                let g = s.draw(rng)?;
                check_dim(self.d, g.dim())?;
                check_dim(self.m, g.size())?;
                f(&g)
            }
        }
    }

    fn check_theta(&self, theta: &TorusPoint) -> Result<()> {
        check_dim(self.d, theta.dim())
    }
}

/// Position τ_ω^j(θ₀) and the running product 𝒜^j(ω)(θ₀), stored as
/// unit columns times per-column log scales so that no direction
/// underflows however far the column norms drift apart.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    pub theta: TorusPoint,
    pub steps: usize,
    columns: Matrix,
    column_logs: Vec<f64>,
}

impl ProductState {
    pub fn new(theta: TorusPoint, m: usize) -> Self {
        Self {
            theta,
            steps: 0,
            columns: Matrix::identity(m, m),
            column_logs: vec![0.0; m],
        }
    }

    /// (frame, log_scale) with product = e^{log_scale}·frame and ‖frame‖ = 1.
    pub fn rescaled(&self) -> (Matrix, f64) {
        let top = self.column_logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut scaled = self.columns.clone();
        for (j, c) in self.column_logs.iter().enumerate() {
            scaled.column_mut(j).scale_mut((c - top).exp());
        }
        let norm = op_norm(&scaled);
        (scaled / norm, top + norm.ln())
    }

    pub fn frame(&self) -> Matrix {
        self.rescaled().0
    }

    pub fn log_scale(&self) -> f64 {
        self.rescaled().1
    }

    /// log‖𝒜^j(ω)(θ₀)‖.
    pub fn log_norm(&self) -> f64 {
        self.log_scale()
    }

    /// (1/j)·log‖𝒜^j(ω)(θ₀)‖.
    pub fn exponent_sample(&self) -> f64 {
        self.log_norm() / self.steps as f64
    }

    /// The unrescaled product; only sensible for short products.
    pub fn product(&self) -> Matrix {
        let (frame, log_scale) = self.rescaled();
        frame * log_scale.exp()
    }

    fn advance(&mut self, g: &QpCocycle) -> Result<()> {
        check_dim(self.theta.dim(), g.dim())?;
        check_dim(self.columns.nrows(), g.size())?;
        let a = g.eval_coords(self.theta.coords())?;
        let mut next = a * &self.columns;
        for (j, c) in self.column_logs.iter_mut().enumerate() {
            let norm = next.column(j).norm();
            if !norm.is_finite() || norm <= 0.0 {
                return Err(Error::NonFinite(format!("product at step {}", self.steps + 1)));
            }
            next.column_mut(j).scale_mut(1.0 / norm);
            *c += norm.ln();
        }
        self.columns = next;
        self.theta.translate_mut(g.freq());
        self.steps += 1;
        Ok(())
    }
}

/// One application of F: multiply by A(θ), rescale, translate θ by α.
pub fn step(state: &ProductState, g: &QpCocycle) -> Result<ProductState> {
    let mut next = state.clone();
    next.advance(g)?;
    Ok(next)
}

/// Folds `n` i.i.d. draws from ν into a fresh state at θ₀. Consumes the
/// stream only for the draws of ω.
pub fn iterate_product(f: &MixedCocycle, theta0: &TorusPoint, rng: &mut RngStream, n: usize) -> Result<ProductState> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    f.check_theta(theta0)?;
    let mut state = ProductState::new(theta0.clone(), f.m);
    for _ in 0..n {
        f.with_draw(rng, |g| state.advance(g))?;
    }
    Ok(state)
}

/// Point estimate of an exponent with its standard error across chains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_iterates: usize,
    pub n_samples: usize,
}

impl LyapunovEstimate {
    pub(crate) fn from_samples(xs: &[f64], n_iterates: usize) -> Result<Self> {
        let (value, std_error) = mean_and_stderr(xs);
        if !value.is_finite() || !std_error.is_finite() {
            return Err(Error::NonFinite("exponent estimate".into()));
        }
        Ok(Self {
            value,
            std_error,
            n_iterates,
            n_samples: xs.len(),
        })
    }

    pub fn record(&self, seed: u64) -> LyapunovRecord {
        LyapunovRecord {
            value: Sig17(self.value),
            std_error: Sig17(self.std_error),
            n_iterates: self.n_iterates,
            n_samples: self.n_samples,
            seed,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyapunovRecord {
    pub value: Sig17,
    pub std_error: Sig17,
    pub n_iterates: usize,
    pub n_samples: usize,
    pub seed: u64,
}

/// Estimator knobs shared by the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorParams {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub burn_in: usize,
}

fn default_n() -> usize {
    100_000
}

fn default_samples() -> usize {
    32
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            n: default_n(),
            samples: default_samples(),
            burn_in: 0,
        }
    }
}

impl EstimatorParams {
    pub fn new(n: usize, samples: usize) -> Self {
        Self { n, samples, burn_in: 0 }
    }
}

fn check_counts(n: usize, samples: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if samples < 2 {
        return Err(invalid("at least 2 samples are needed for a standard error"));
    }
    Ok(())
}

/// Runs `count` chains in parallel; chain c owns `rng.derive(c)`. Results
/// come back in chain order whatever the worker count.
fn run_chains<R: Send>(rng: &RngStream, count: usize, chain: impl Fn(RngStream) -> Result<R> + Sync) -> Result<Vec<R>> {
    (0..count)
        .into_par_iter()
        .map(|c| chain(rng.derive(c as u64)))
        .collect()
}

/// Top exponent from `samples` independent chains with Haar θ₀. Each chain
/// contributes (log‖𝒜ⁿ‖ − log‖𝒜^b‖)/(n − b) with b = burn_in.
pub fn lyapunov_top(f: &MixedCocycle, rng: &RngStream, n: usize, samples: usize, burn_in: usize) -> Result<LyapunovEstimate> {
    check_counts(n, samples)?;
    if burn_in >= n {
        return Err(invalid("burn_in must be smaller than n"));
    }
    let xs = run_chains(rng, samples, |mut chain| {
        let theta0 = TorusPoint::haar(f.d, &mut chain);
        let mut state = ProductState::new(theta0, f.m);
        let mut at_burn_in = 0.0;
        for j in 0..n {
            if j == burn_in {
                at_burn_in = state.log_norm();
            }
            f.with_draw(&mut chain, |g| state.advance(g))?;
        }
        Ok((state.log_norm() - at_burn_in) / (n - burn_in) as f64)
    })?;
    LyapunovEstimate::from_samples(&xs, n)
}

pub fn lyapunov_top_with(f: &MixedCocycle, rng: &RngStream, params: &EstimatorParams) -> Result<LyapunovEstimate> {
    lyapunov_top(f, rng, params.n, params.samples, params.burn_in)
}

/// All m exponents by QR re-orthonormalisation after every step, sorted
/// descending within each chain before averaging.
pub fn lyapunov_spectrum(f: &MixedCocycle, rng: &RngStream, n: usize, samples: usize) -> Result<Vec<LyapunovEstimate>> {
    let per_chain = spectrum_samples(f, rng, n, samples)?;
    (0..f.m)
        .map(|i| {
            let xs: Vec<f64> = per_chain.iter().map(|e| e[i]).collect();
            LyapunovEstimate::from_samples(&xs, n)
        })
        .collect()
}

/// Per-chain finite-n spectra (descending), in chain order.
pub fn spectrum_samples(f: &MixedCocycle, rng: &RngStream, n: usize, samples: usize) -> Result<Vec<Vec<f64>>> {
    check_counts(n, samples)?;
    let m = f.m;
    run_chains(rng, samples, |mut chain| {
        let mut theta = TorusPoint::haar(f.d, &mut chain);
        let mut q = Matrix::identity(m, m);
        let mut sums = vec![0.0; m];
        for _ in 0..n {
            f.with_draw(&mut chain, |g| {
                let a = g.eval_coords(theta.coords())?;
                let (q_next, diag) = qr_positive(&(a * &q));
                for (s, &r) in sums.iter_mut().zip(&diag) {
                    if !(r >= FRAME_FLOOR) || !r.is_finite() {
                        return Err(Error::FrameDegenerate(r));
                    }
                    *s += r.ln();
                }
                q = q_next;
                theta.translate_mut(g.freq());
                Ok(())
            })?;
        }
        let mut exps: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
        exps.sort_by(|a, b| b.total_cmp(a));
        Ok(exps)
    })
}

/// Exact expectation over all aⁿ words of (1/n)·log‖𝒜ⁿ(ω)(θ)‖, averaged
/// over the theta_grid^d lattice.
pub fn brute_force_lognorm(f: &MixedCocycle, theta_grid: usize, n: usize) -> Result<f64> {
    let nu = f
        .driving
        .as_atomic()
        .ok_or_else(|| invalid("brute force needs an atomic driving measure"))?;
    if n == 0 || theta_grid == 0 {
        return Err(invalid("n and theta_grid must be at least 1"));
    }
    let words = (nu.len() as f64).powi(n as i32);
    if words > WORD_CAP as f64 {
        return Err(Error::WordCap { words, cap: WORD_CAP });
    }
    let grid = grid_points(f.d, theta_grid);
    let per_point = grid
        .par_iter()
        .map(|theta| {
            let start = ProductState::new(TorusPoint::new(theta.clone())?, f.m);
            word_sum(nu, &start, n)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_point.iter().sum::<f64>() / (per_point.len() as f64 * n as f64))
}

/// Σ over words of length `remaining` of weight·log‖product‖.
fn word_sum(nu: &AtomicMeasure<QpCocycle>, state: &ProductState, remaining: usize) -> Result<f64> {
    if remaining == 0 {
        return Ok(state.log_norm());
    }
    let mut total = 0.0;
    for (g, w) in nu.iter() {
        let next = step(state, g)?;
        total += w * word_sum(nu, &next, remaining - 1)?;
    }
    Ok(total)
}

/// Max relative deviation between 𝒜ⁿ(ω)(θ) and 𝒜^{n−k}(σ^k ω)(τ^k θ)·𝒜^k(ω)(θ)
/// over `samples` random (ω, θ).
pub fn cocycle_identity_check(f: &MixedCocycle, rng: &RngStream, n: usize, k: usize, samples: usize) -> Result<f64> {
    if !(n > k && k >= 1) {
        return Err(invalid("need n > k ≥ 1"));
    }
    let devs = run_chains(rng, samples.max(1), |mut chain| {
        let theta0 = TorusPoint::haar(f.d, &mut chain);
        let word = (0..n)
            .map(|_| f.with_draw(&mut chain, |g| Ok(g.clone())))
            .collect::<Result<Vec<_>>>()?;
        let mut full = ProductState::new(theta0.clone(), f.m);
        for g in &word {
            full.advance(g)?;
        }
        let mut head = ProductState::new(theta0, f.m);
        for g in &word[..k] {
            head.advance(g)?;
        }
        let mut tail = ProductState::new(head.theta.clone(), f.m);
        for g in &word[k..] {
            tail.advance(g)?;
        }
        // both sides divided by ‖𝒜ⁿ‖ so the comparison is scale free
        let (full_frame, full_log) = full.rescaled();
        let (head_frame, head_log) = head.rescaled();
        let (tail_frame, tail_log) = tail.rescaled();
        let split = (tail_frame * head_frame) * (tail_log + head_log - full_log).exp();
        let scale = full_frame.abs().max();
        Ok((split - &full_frame).abs().max() / scale)
    })?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}
