//! Markov kernels (stochastic dynamical systems), the Markov operator on
//! finite state sets, stochastic Birkhoff sums and the empirical large
//! deviation, mixing and CLT diagnostics.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::measure::{AtomicMeasure, Measure};
use crate::rng::RngStream;
use crate::stats::{ks_distance_normal, linear_fit, moments, wilson95, LinearFit, Moments};
use crate::torus::{check_dim, Frequency, TorusPoint};

/// Row-sum tolerance for exact kernels.
pub const ROW_TOLERANCE: f64 = 1e-12;
/// Residual below which a measure counts as stationary.
pub const STATIONARY_TOLERANCE: f64 = 1e-10;
/// Deviations at or below this are treated as exact zeros in rate fits.
pub const DEVIATION_FLOOR: f64 = 1e-13;
/// Length of the auxiliary run used when the mean must be estimated.
pub const AUX_RUN_LENGTH: usize = 1_000_000;

/// x ↦ K_x, sampled through a stream.
pub trait MarkovKernel: Send + Sync {
    type State: Clone + Send + Sync;

    fn transition(&self, x: &Self::State, rng: &mut RngStream) -> Result<Self::State>;

    /// Exact transition rows, for kernels on a finite state set.
    fn exact_rows(&self) -> Option<&FiniteKernel> {
        None
    }

    /// ∫φ dν for the unique stationary ν, when it can be computed exactly.
    fn stationary_mean(&self, _phi: &Observable<Self::State>) -> Option<Result<f64>> {
        None
    }
}

/// Row-stochastic matrix on states 0..n.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteKernel {
    rows: Vec<Vec<f64>>,
    cdfs: Vec<Vec<f64>>,
}

impl FiniteKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(invalid("kernel needs at least one state"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return Err(Error::InvalidMeasure(format!("row {i} has a negative or non-finite entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidMeasure(format!("row {i} sums to {total}")));
            }
        }
        let cdfs = rows
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                let mut c: Vec<f64> = row
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                // the last state with positive mass absorbs rounding
                if let Some(last) = row.iter().rposition(|&p| p > 0.0) {
                    c[last..].iter_mut().for_each(|x| *x = f64::INFINITY);
                }
                c
            })
            .collect();
        Ok(Self { rows, cdfs })
    }

    /// K_x = δ_x.
    pub fn frozen(n: usize) -> Self {
        Self::new((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
            .expect("identity rows")
    }

    /// Two states, K_0 = δ_1, K_1 = δ_0.
    pub fn swap() -> Self {
        Self::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).expect("swap rows")
    }

    /// Every row equal to `weights`: an i.i.d. sequence.
    pub fn iid(weights: &[f64]) -> Result<Self> {
        Self::new(vec![weights.to_vec(); weights.len()])
    }

    pub fn states(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.states();
        DMatrix::from_fn(n, n, |i, j| self.rows[i][j])
    }

    /// (Qφ)(i) = Σ_j P_ij φ(j), computed as min φ + Σ_j P_ij (φ(j) − min φ)
    /// and clamped to [min φ, max φ] so constants, positivity and the sup
    /// norm bound hold exactly despite rounding in the rows.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let lo = phi.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.rows
            .iter()
            .map(|row| {
                let s: f64 = row.iter().zip(phi).map(|(p, v)| p * (v - lo)).sum();
                (lo + s).clamp(lo, hi)
            })
            .collect()
    }

    /// ν ↦ K∗ν as a weight vector.
    pub fn push(&self, nu: &[f64]) -> Vec<f64> {
        let n = self.states();
        let mut out = vec![0.0; n];
        for (i, &w) in nu.iter().enumerate() {
            for (o, p) in out.iter_mut().zip(&self.rows[i]) {
                *o += w * p;
            }
        }
        out
    }

    /// The stationary law, when unique (solves νP = ν, Σν = 1).
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let n = self.states();
        let mut a = self.matrix().transpose() - DMatrix::identity(n, n);
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        let lu = a.lu();
        if lu.determinant().abs() < 1e-12 {
            return Err(Error::Degenerate("stationary law is not unique".into()));
        }
        let x = lu.solve(&b).ok_or_else(|| Error::Degenerate("stationary solve failed".into()))?;
        Ok(x.iter().map(|v| v.max(0.0)).collect())
    }
}

impl MarkovKernel for FiniteKernel {
    type State = usize;

    fn transition(&self, x: &usize, rng: &mut RngStream) -> Result<usize> {
        let cdf = self.cdfs.get(*x).ok_or_else(|| invalid(format!("state {x} out of range")))?;
        let u = rng.uniform();
        Ok(cdf.partition_point(|&c| c <= u))
    }

    fn exact_rows(&self) -> Option<&FiniteKernel> {
        Some(self)
    }

    fn stationary_mean(&self, phi: &Observable<usize>) -> Option<Result<f64>> {
        Some(self.stationary().map(|nu| nu.iter().enumerate().map(|(i, w)| w * phi.eval(&i)).sum()))
    }
}

/// K_x = δ_{x+α}: the torus translation as a deterministic kernel.
#[derive(Clone, Debug)]
pub struct RotationKernel {
    pub alpha: Frequency,
}

impl MarkovKernel for RotationKernel {
    type State = TorusPoint;

    fn transition(&self, x: &TorusPoint, _rng: &mut RngStream) -> Result<TorusPoint> {
        check_dim(x.dim(), self.alpha.dim())?;
        let mut y = x.clone();
        y.translate_mut(&self.alpha);
        Ok(y)
    }
}

/// K_x = law for every x.
#[derive(Clone, Debug)]
pub struct IidKernel<S> {
    pub law: Measure<S>,
}

impl<S: Clone + Send + Sync + 'static> MarkovKernel for IidKernel<S> {
    type State = S;

    fn transition(&self, _x: &S, rng: &mut RngStream) -> Result<S> {
        self.law.draw(rng)
    }
}

type TransitionFn<S> = Arc<dyn Fn(&S, &mut RngStream) -> Result<S> + Send + Sync>;

/// Kernel given by an arbitrary sampling procedure.
#[derive(Clone)]
pub struct ClosureKernel<S> {
    f: TransitionFn<S>,
}

impl<S> ClosureKernel<S> {
    pub fn new(f: impl Fn(&S, &mut RngStream) -> Result<S> + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f) }
    }
}

impl<S: Clone + Send + Sync> MarkovKernel for ClosureKernel<S> {
    type State = S;

    fn transition(&self, x: &S, rng: &mut RngStream) -> Result<S> {
        (self.f)(x, rng)
    }
}

/// Declared regularity class of an observable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularity {
    Bounded { bound: f64 },
    Lipschitz { constant: f64 },
    Holder { exponent: f64, constant: f64 },
}

impl Regularity {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Regularity::Bounded { bound } => bound > 0.0 && bound.is_finite(),
            Regularity::Lipschitz { constant } => constant > 0.0 && constant.is_finite(),
            Regularity::Holder { exponent, constant } => {
                exponent > 0.0 && exponent <= 1.0 && constant > 0.0 && constant.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid regularity constants {self:?}")))
        }
    }
}

type EvalFn<S> = Arc<dyn Fn(&S) -> f64 + Send + Sync>;

/// φ: state → ℝ with its declared regularity.
#[derive(Clone)]
pub struct Observable<S> {
    eval: EvalFn<S>,
    regularity: Regularity,
}

impl<S> fmt::Debug for Observable<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable").field("regularity", &self.regularity).finish_non_exhaustive()
    }
}

impl<S> Observable<S> {
    pub fn new(f: impl Fn(&S) -> f64 + Send + Sync + 'static, regularity: Regularity) -> Result<Self> {
        regularity.validate()?;
        Ok(Self {
            eval: Arc::new(f),
            regularity,
        })
    }

    pub fn eval(&self, x: &S) -> f64 {
        (self.eval)(x)
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }
}

impl Observable<usize> {
    /// φ(i) = values[i] on a finite state set.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observable value".into()));
        }
        let bound = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bound = if bound > 0.0 { bound } else { 1.0 };
        let n = values.len();
        Self::new(
            move |&i| if i < n { values[i] } else { f64::NAN },
            Regularity::Bounded { bound },
        )
    }

    pub fn values(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.eval(&i)).collect()
    }
}

/// Law of Z₀.
#[derive(Clone, Debug)]
pub enum Initial<S> {
    Point(S),
    Law(Measure<S>),
}

impl<S: Clone + Send + Sync + 'static> Initial<S> {
    fn draw(&self, rng: &mut RngStream) -> Result<S> {
        match self {
            Initial::Point(x) => Ok(x.clone()),
            Initial::Law(m) => m.draw(rng),
        }
    }
}

/// Z₀, …, Z_{n−1} and the stream that produced them.
#[derive(Clone, Debug)]
pub struct ChainSample<S> {
    pub states: Vec<S>,
    pub master_seed: u64,
    pub stream_id: u64,
}

pub fn chain_sample<K: MarkovKernel>(
    k: &K,
    init: &Initial<K::State>,
    rng: &mut RngStream,
    n: usize,
) -> Result<ChainSample<K::State>>
where
    K::State: 'static,
{
    if n == 0 {
        return Err(invalid("chain length must be at least 1"));
    }
    let (master_seed, stream_id) = (rng.master_seed(), rng.stream_id());
    let mut states = Vec::with_capacity(n);
    states.push(init.draw(rng)?);
    for j in 1..n {
        let next = k.transition(&states[j - 1], rng)?;
        states.push(next);
    }
    Ok(ChainSample {
        states,
        master_seed,
        stream_id,
    })
}

/// Qⁿφ on a kernel with exact rows.
pub fn markov_operator_apply<K: MarkovKernel<State = usize>>(
    k: &K,
    phi: &Observable<usize>,
    n: usize,
) -> Result<Observable<usize>> {
    let rows = k.exact_rows().ok_or(Error::MissingRows)?;
    let mut values = phi.values(rows.states());
    for _ in 0..n {
        values = rows.apply(&values);
    }
    let out = Observable::from_values(values)?;
    Ok(Observable {
        regularity: phi.regularity,
        ..out
    })
}

fn measure_weights(rows: &FiniteKernel, nu: &AtomicMeasure<usize>) -> Result<Vec<f64>> {
    let mut w = vec![0.0; rows.states()];
    for (&x, p) in nu.iter() {
        *w.get_mut(x)
            .ok_or_else(|| invalid(format!("state {x} is outside the kernel's state set")))? += p;
    }
    Ok(w)
}

/// Total variation distance between ν and K∗ν.
pub fn stationarity_residual<K: MarkovKernel<State = usize>>(k: &K, nu: &AtomicMeasure<usize>) -> Result<f64> {
    let rows = k.exact_rows().ok_or(Error::MissingRows)?;
    let w = measure_weights(rows, nu)?;
    let pushed = rows.push(&w);
    Ok(0.5 * w.iter().zip(&pushed).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// S_nφ = φ(Z₀) + ⋯ + φ(Z_{n−1}).
pub fn stochastic_birkhoff<S>(chain: &ChainSample<S>, phi: &Observable<S>) -> f64 {
    chain.states.iter().fold(0.0, |acc, x| acc + phi.eval(x))
}

/// Where ∫φ dν comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeanSource {
    /// Known exactly by the caller.
    Supplied(f64),
    /// Exact from the unique stationary law when the kernel has rows,
    /// otherwise estimated by one long auxiliary run (flagged).
    Auto,
}

/// ∫φ dν and whether it was estimated.
fn resolve_mean<K: MarkovKernel>(
    k: &K,
    init: &Initial<K::State>,
    phi: &Observable<K::State>,
    source: MeanSource,
    rng: &RngStream,
) -> Result<(f64, bool)>
where
    K::State: 'static,
{
    if let MeanSource::Supplied(m) = source {
        return Ok((m, false));
    }
    if let Some(m) = k.stationary_mean(phi) {
        return Ok((m?, false));
    }
    let mut aux = rng.derive(u64::MAX);
    let mut x = init.draw(&mut aux)?;
    let mut sum = 0.0;
    for _ in 0..AUX_RUN_LENGTH {
        sum += phi.eval(&x);
        x = k.transition(&x, &mut aux)?;
    }
    Ok((sum / AUX_RUN_LENGTH as f64, true))
}

/// Runs `chains` chains to max(n_list), returning S_n for each listed n.
fn birkhoff_paths<K: MarkovKernel>(
    k: &K,
    init: &Initial<K::State>,
    phi: &Observable<K::State>,
    n_list: &[usize],
    chains: usize,
    rng: &RngStream,
) -> Result<Vec<Vec<f64>>>
where
    K::State: 'static,
{
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut stream = rng.derive(c as u64);
            let mut x = init.draw(&mut stream)?;
            let mut sums = vec![0.0; n_list.len()];
            let mut s = 0.0;
            for j in 1..=n_max {
                s += phi.eval(&x);
                for (slot, &n) in sums.iter_mut().zip(n_list) {
                    if n == j {
                        *slot = s;
                    }
                }
                if j < n_max {
                    x = k.transition(&x, &mut stream)?;
                }
            }
            Ok(sums)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LdtRow {
    pub n: usize,
    pub exceedances: u64,
    pub chains: u64,
    pub tail: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl LdtRow {
    pub fn new(n: usize, exceedances: u64, chains: u64) -> Self {
        let (wilson_low, wilson_high) = wilson95(exceedances, chains);
        Self {
            n,
            exceedances,
            chains,
            tail: exceedances as f64 / chains as f64,
            wilson_low,
            wilson_high,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LdtTable {
    pub epsilon: f64,
    pub mean: f64,
    pub mean_estimated: bool,
    pub rows: Vec<LdtRow>,
}

/// Fraction of chains with |S_nφ/n − ∫φ| > ε for each n. Every chain
/// serves all n (one path, read at each listed length).
#[allow(clippy::too_many_arguments)]
pub fn ldt_tail_estimate<K: MarkovKernel>(
    k: &K,
    init: &Initial<K::State>,
    phi: &Observable<K::State>,
    epsilon: f64,
    n_list: &[usize],
    chains: usize,
    mean: MeanSource,
    rng: &RngStream,
) -> Result<LdtTable>
where
    K::State: 'static,
{
    if !(epsilon > 0.0) {
        return Err(invalid("ε must be positive"));
    }
    if chains < 100 {
        return Err(invalid("at least 100 chains are needed"));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(invalid("n list must be nonempty with positive entries"));
    }
    let (m, estimated) = resolve_mean(k, init, phi, mean, rng)?;
    let paths = birkhoff_paths(k, init, phi, n_list, chains, rng)?;
    let rows = n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let hits = paths.iter().filter(|s| (s[i] / n as f64 - m).abs() > epsilon).count();
            LdtRow::new(n, hits as u64, chains as u64)
        })
        .collect();
    Ok(LdtTable {
        epsilon,
        mean: m,
        mean_estimated: estimated,
        rows,
    })
}

/// log(tail) ≈ slope·n + intercept over rows with nonzero tails.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub fit_quality: f64,
    pub slope_stderr: f64,
    /// Slope negative and more than two standard errors from 0.
    pub decays: bool,
    pub rows_used: usize,
}

pub fn ldt_rate_fit(table: &LdtTable) -> Result<RateFit> {
    let (ns, logs): (Vec<f64>, Vec<f64>) = table
        .rows
        .iter()
        .filter(|r| r.tail > 0.0)
        .map(|r| (r.n as f64, r.tail.ln()))
        .unzip();
    if ns.len() < 3 {
        return Err(Error::TailsVanish);
    }
    let fit = linear_fit(&ns, &logs).ok_or_else(|| Error::Degenerate("all rows share one n".into()))?;
    Ok(RateFit {
        slope: fit.slope,
        intercept: fit.intercept,
        fit_quality: fit.r_squared,
        slope_stderr: fit.slope_stderr,
        decays: fit.slope < 0.0 && -fit.slope > 2.0 * fit.slope_stderr,
        rows_used: ns.len(),
    })
}

/// Exact sup deviations ‖Qⁿφ − ∫φ dν‖_∞ (max over φ in the set) with
/// geometric and power-law fits.
#[derive(Clone, Debug, PartialEq)]
pub struct MixingTable {
    pub rows: Vec<(usize, f64)>,
    /// Fit of log deviation against n on the tail half of the rows above
    /// the rounding floor; exp(slope) is the geometric rate.
    pub geometric: Option<LinearFit>,
    /// Fit of log deviation against log n; −slope is the power exponent p.
    pub power: Option<LinearFit>,
    /// Deviations reach the floor or at least halve between n = 1 and n_max.
    pub mixing: bool,
}

impl MixingTable {
    pub fn geometric_rate(&self) -> Option<f64> {
        self.geometric.map(|f| f.slope.exp())
    }

    pub fn power_exponent(&self) -> Option<f64> {
        self.power.map(|f| -f.slope)
    }
}

pub fn mixing_rate_estimate<K: MarkovKernel<State = usize>>(
    k: &K,
    phi_set: &[Observable<usize>],
    n_max: usize,
    nu: &AtomicMeasure<usize>,
) -> Result<MixingTable> {
    let rows = k.exact_rows().ok_or(Error::MissingRows)?;
    if n_max == 0 || phi_set.is_empty() {
        return Err(invalid("need n_max ≥ 1 and at least one observable"));
    }
    let residual = stationarity_residual(k, nu)?;
    if residual >= STATIONARY_TOLERANCE {
        return Err(Error::NotStationary(residual));
    }
    let w = measure_weights(rows, nu)?;
    let n_states = rows.states();
    let mut current: Vec<Vec<f64>> = phi_set.iter().map(|p| p.values(n_states)).collect();
    let means: Vec<f64> = current.iter().map(|v| v.iter().zip(&w).map(|(a, b)| a * b).sum()).collect();
    let mut table = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        current = current.iter().map(|v| rows.apply(v)).collect();
        let dev = current
            .iter()
            .zip(&means)
            .flat_map(|(v, m)| v.iter().map(move |x| (x - m).abs()))
            .fold(0.0, f64::max);
        table.push((n, dev));
    }
    let live: Vec<(f64, f64)> = table
        .iter()
        .filter(|(_, d)| *d > DEVIATION_FLOOR)
        .map(|&(n, d)| (n as f64, d.ln()))
        .collect();
    let tail = &live[live.len() / 2..];
    let geometric = if tail.len() >= 3 {
        let (x, y): (Vec<f64>, Vec<f64>) = tail.iter().copied().unzip();
        linear_fit(&x, &y)
    } else {
        None
    };
    let power = if live.len() >= 3 {
        let (x, y): (Vec<f64>, Vec<f64>) = live.iter().map(|(n, l)| (n.ln(), *l)).unzip();
        linear_fit(&x, &y)
    } else {
        None
    };
    let first = table[0].1;
    let last = table[table.len() - 1].1;
    let mixing = last <= DEVIATION_FLOOR || (n_max > 1 && last <= 0.5 * first);
    Ok(MixingTable {
        rows: table,
        geometric,
        power,
        mixing,
    })
}

/// Standardised Birkhoff sums (S_nφ − n·m)/√n across chains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CltReport {
    pub mean: f64,
    pub mean_estimated: bool,
    pub moments: Moments,
    /// KS distance to the normal law with the sample mean and variance.
    pub ks_distance: f64,
    pub chains: usize,
    pub n: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn clt_check<K: MarkovKernel>(
    k: &K,
    init: &Initial<K::State>,
    phi: &Observable<K::State>,
    n: usize,
    chains: usize,
    mean: MeanSource,
    rng: &RngStream,
) -> Result<CltReport>
where
    K::State: 'static,
{
    if chains < 1000 {
        return Err(invalid("at least 1000 chains are needed"));
    }
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let (m, estimated) = resolve_mean(k, init, phi, mean, rng)?;
    let paths = birkhoff_paths(k, init, phi, &[n], chains, rng)?;
    let root = (n as f64).sqrt();
    let z: Vec<f64> = paths.iter().map(|s| (s[0] - n as f64 * m) / root).collect();
    let mo = moments(&z);
    if !(mo.variance > 1e-24) {
        return Err(Error::Degenerate("standardised sums have zero variance".into()));
    }
    let centred: Vec<f64> = z.iter().map(|x| x - mo.mean).collect();
    Ok(CltReport {
        mean: m,
        mean_estimated: estimated,
        moments: mo,
        ks_distance: ks_distance_normal(&centred, mo.variance.sqrt()),
        chains,
        n,
    })
}
