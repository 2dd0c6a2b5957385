//! Arithmetic on the torus 𝕋^d = (ℝ/ℤ)^d, translations, Fourier
//! coefficients of atomic measures and (mixing) Diophantine checks.
//!
//! Every check here is a finite-cutoff verification: a passing report
//! means "no violation among modes with 0 < ‖k‖_∞ ≤ cutoff".

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::AtomicMeasure;
use crate::rng::RngStream;

/// Tolerance separating rational from irrational frequencies.
pub const RATIONAL_TOLERANCE: f64 = 1e-10;

/// Reduce to the canonical representative in [0, 1).
#[inline]
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance on the circle ℝ/ℤ.
#[inline]
pub fn circle_distance(x: f64, y: f64) -> f64 {
    let t = (x - y).abs();
    let t = t - t.floor();
    t.min(1.0 - t)
}

/// Distance from x to the nearest integer.
#[inline]
pub fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// A point of 𝕋^d with every coordinate in [0, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TorusPoint(Vec<f64>);

/// Frequencies live on the same torus and share the same representation.
pub type Frequency = TorusPoint;

impl TryFrom<Vec<f64>> for TorusPoint {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        TorusPoint::new(coords)
    }
}

impl From<TorusPoint> for Vec<f64> {
    fn from(p: TorusPoint) -> Self {
        p.0
    }
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("torus dimension must be at least 1"));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("torus coordinate".into()));
        }
        Ok(Self(coords.into_iter().map(wrap).collect()))
    }

    /// One-dimensional point; panics on a non-finite coordinate.
    pub fn scalar(x: f64) -> Self {
        Self::new(vec![x]).expect("finite coordinate")
    }

    pub fn origin(d: usize) -> Self {
        Self(vec![0.0; d.max(1)])
    }

    /// Haar-distributed point.
    pub fn haar(d: usize, rng: &mut RngStream) -> Self {
        Self((0..d).map(|_| rng.uniform()).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|&x| wrap(-x)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| wrap(a + b)).collect(),
        ))
    }

    /// In-place translation; dimensions must already agree.
    #[inline]
    pub(crate) fn translate_mut(&mut self, alpha: &TorusPoint) {
        for (x, a) in self.0.iter_mut().zip(&alpha.0) {
            *x = wrap(*x + a);
        }
    }

    /// Sup over coordinates of the circle distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| circle_distance(a, b))
            .fold(0.0, f64::max)
    }

    pub fn dot(&self, k: &[i64]) -> f64 {
        self.0.iter().zip(k).map(|(x, &ki)| x * ki as f64).sum()
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// τ_α(θ) = θ + α mod 1.
pub fn translate(theta: &TorusPoint, alpha: &Frequency) -> Result<TorusPoint> {
    theta.add(alpha)
}

/// Classical Birkhoff sum φ(θ) + φ(θ+α) + … + φ(θ+(n−1)α).
pub fn birkhoff_sum<F>(phi: F, theta: &TorusPoint, alpha: &Frequency, n: usize) -> Result<f64>
where
    F: Fn(&TorusPoint) -> f64,
{
    check_dim(theta.dim(), alpha.dim())?;
    let mut x = theta.clone();
    let mut sum = 0.0;
    for _ in 0..n {
        sum += phi(&x);
        x.translate_mut(alpha);
    }
    Ok(sum)
}

/// μ̂(k) = Σ_j w_j exp(2πi⟨k, θ_j⟩).
pub fn fourier_coefficient(mu: &AtomicMeasure<TorusPoint>, k: &[i64]) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (theta, &w) in mu.atoms().iter().zip(mu.weights()) {
        check_dim(theta.dim(), k.len())?;
        let phase = 2.0 * std::f64::consts::PI * theta.dot(k);
        acc += Complex64::from_polar(w, phase);
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineParams {
    pub gamma: f64,
    pub tau: f64,
    pub cutoff: usize,
}

impl DiophantineParams {
    pub fn new(gamma: f64, tau: f64, cutoff: usize) -> Result<Self> {
        let p = Self { gamma, tau, cutoff };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !(self.tau > 0.0) {
            return Err(invalid("gamma and tau must be positive"));
        }
        if self.cutoff == 0 {
            return Err(invalid("cutoff must be at least 1"));
        }
        Ok(())
    }

    fn threshold(&self, k: &[i64]) -> f64 {
        self.gamma / (sup_norm(k) as f64).powf(self.tau)
    }
}

/// Outcome of a finite-cutoff condition check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub pass: bool,
    /// Mode attaining the smallest margin.
    pub worst_k: Vec<i64>,
    pub margin: f64,
    /// Largest ‖k‖_∞ examined.
    pub cutoff: usize,
}

pub fn sup_norm(k: &[i64]) -> i64 {
    k.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Nonzero modes with ‖k‖_∞ ≤ cutoff, one from each ±k pair (first
/// nonzero coordinate positive). Ordered lexicographically from −cutoff.
pub fn half_modes(d: usize, cutoff: usize) -> Vec<Vec<i64>> {
    let c = cutoff as i64;
    let mut out = Vec::new();
    let mut k = vec![-c; d];
    loop {
        if let Some(first) = k.iter().find(|&&x| x != 0) {
            if *first > 0 {
                out.push(k.clone());
            }
        }
        // odometer increment
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if k[i] < c {
                k[i] += 1;
                for kj in k.iter_mut().skip(i + 1) {
                    *kj = -c;
                }
                break;
            }
        }
    }
}

fn worst_over_modes<F>(d: usize, cutoff: usize, margin_of: F) -> Result<ConditionReport>
where
    F: Fn(&[i64]) -> Result<f64>,
{
    let mut worst: Option<(Vec<i64>, f64)> = None;
    for k in half_modes(d, cutoff) {
        let m = margin_of(&k)?;
        if worst.as_ref().is_none_or(|(_, w)| m < *w) {
            worst = Some((k, m));
        }
    }
    let (worst_k, margin) = worst.expect("cutoff >= 1 yields modes");
    Ok(ConditionReport {
        pass: margin >= 0.0,
        worst_k,
        margin,
        cutoff,
    })
}

/// Mixing Diophantine condition |μ̂(k)| ≤ 1 − γ/‖k‖^τ up to the cutoff.
pub fn mixing_dc_check(
    mu: &AtomicMeasure<TorusPoint>,
    params: &DiophantineParams,
) -> Result<ConditionReport> {
    params.validate()?;
    let d = mu.atoms()[0].dim();
    worst_over_modes(d, params.cutoff, |k| {
        let modulus = fourier_coefficient(mu, k)?.norm();
        Ok(1.0 - params.threshold(k) - modulus)
    })
}

/// Diophantine condition dist(⟨k, α⟩, ℤ) ≥ γ/‖k‖^τ up to the cutoff.
pub fn diophantine_check(alpha: &Frequency, params: &DiophantineParams) -> Result<ConditionReport> {
    params.validate()?;
    worst_over_modes(alpha.dim(), params.cutoff, |k| {
        Ok(dist_to_integer(alpha.dot(k)) - params.threshold(k))
    })
}

/// ⟨k, α⟩ ∉ ℤ (beyond [`RATIONAL_TOLERANCE`]) for every 0 < ‖k‖_∞ ≤ cutoff.
pub fn rational_independence_check(alpha: &Frequency, cutoff: usize) -> bool {
    half_modes(alpha.dim(), cutoff)
        .iter()
        .all(|k| dist_to_integer(alpha.dot(k)) > RATIONAL_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    fn pt(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn translate_examples() {
        assert_eq!(translate(&pt(&[0.25]), &pt(&[0.5])).unwrap(), pt(&[0.75]));
        assert_eq!(translate(&pt(&[0.75]), &pt(&[0.5])).unwrap(), pt(&[0.25]));
        let r = translate(&pt(&[0.2, 0.9]), &pt(&[0.3, 0.3])).unwrap();
        assert!((r.coords()[0] - 0.5).abs() < 1e-15);
        assert!((r.coords()[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn translate_dimension_mismatch() {
        assert!(matches!(
            translate(&pt(&[0.1]), &pt(&[0.1, 0.2])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn wrap_stays_below_one() {
        assert_eq!(wrap(-1e-18), 0.0);
        assert_eq!(wrap(1.0), 0.0);
        assert!((wrap(-0.25) - 0.75).abs() < 1e-16);
    }

    #[test]
    fn fourier_examples() {
        let delta0 = AtomicMeasure::dirac(TorusPoint::origin(1));
        let c = fourier_coefficient(&delta0, &[7]).unwrap();
        assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        let half = AtomicMeasure::uniform(vec![pt(&[0.0]), pt(&[0.5])]).unwrap();
        assert!(fourier_coefficient(&half, &[1]).unwrap().norm() < 1e-15);
        assert!((fourier_coefficient(&half, &[2]).unwrap().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixing_dc_examples() {
        let p = DiophantineParams::new(0.1, 2.0, 10).unwrap();
        let half = AtomicMeasure::uniform(vec![pt(&[0.0]), pt(&[0.5])]).unwrap();
        let r = mixing_dc_check(&half, &p).unwrap();
        assert!(!r.pass);
        assert_eq!(r.worst_k, vec![2]);

        let p = DiophantineParams::new(0.1, 2.0, 100).unwrap();
        let gm = AtomicMeasure::uniform(vec![pt(&[0.0]), pt(&[golden()])]).unwrap();
        let r = mixing_dc_check(&gm, &p).unwrap();
        assert!(r.pass, "{r:?}");
        // Direct oracle: min over k of 1 - 0.1/k² - |cos(πkα)|.
        let oracle = (1..=100)
            .map(|k| {
                let k = k as f64;
                1.0 - 0.1 / (k * k) - (std::f64::consts::PI * k * golden()).cos().abs()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((r.margin - oracle).abs() < 1e-12);

        for a in [0.0, 0.3, golden()] {
            let dirac = AtomicMeasure::dirac(pt(&[a]));
            assert!(!mixing_dc_check(&dirac, &DiophantineParams::new(1e-6, 1.0, 5).unwrap())
                .unwrap()
                .pass);
        }
    }

    #[test]
    fn zero_cutoff_is_an_error() {
        assert!(DiophantineParams::new(0.1, 1.0, 0).is_err());
        let p = DiophantineParams {
            gamma: 0.1,
            tau: 1.0,
            cutoff: 0,
        };
        assert!(diophantine_check(&pt(&[0.3]), &p).is_err());
    }

    #[test]
    fn diophantine_examples() {
        let p = DiophantineParams::new(0.1, 1.0, 10).unwrap();
        let r = diophantine_check(&pt(&[0.5]), &p).unwrap();
        assert!(!r.pass);
        assert_eq!(r.worst_k, vec![2]);

        // Direct check: min_k k·dist(kα, ℤ) over k ≤ 1000 is 0.3820 at k = 1
        // (the Hurwitz constant 1/√5 is only the liminf).
        let a = pt(&[golden()]);
        let pass = diophantine_check(&a, &DiophantineParams::new(0.38, 1.0, 1000).unwrap()).unwrap();
        assert!(pass.pass);
        let fail = diophantine_check(&a, &DiophantineParams::new(0.4, 1.0, 1000).unwrap()).unwrap();
        assert!(!fail.pass);
        assert_eq!(fail.worst_k, vec![1]);
        let fail = diophantine_check(&a, &DiophantineParams::new(0.5, 1.0, 1000).unwrap()).unwrap();
        assert!(!fail.pass);
    }

    #[test]
    fn rational_independence_examples() {
        assert!(!rational_independence_check(&pt(&[0.5]), 4));
        assert!(rational_independence_check(&pt(&[golden()]), 50));
        assert!(!rational_independence_check(&pt(&[1.0 / 3.0, 2.0 / 3.0]), 3));
    }

    #[test]
    fn half_modes_cover_pairs() {
        let m = half_modes(2, 2);
        // (5² − 1) / 2 nonzero representatives
        assert_eq!(m.len(), 12);
        assert!(m.iter().all(|k| !m.contains(&k.iter().map(|x| -x).collect())));
        assert_eq!(half_modes(1, 3), vec![vec![1], vec![2], vec![3]]);
    }

    proptest! {
        #[test]
        fn translate_roundtrip(t in proptest::collection::vec(0.0f64..1.0, 1..4), seed in 0u64..1000) {
            let mut rng = RngStream::new(seed, 0);
            let theta = TorusPoint::new(t.clone()).unwrap();
            let alpha = TorusPoint::haar(t.len(), &mut rng);
            let back = translate(&translate(&theta, &alpha).unwrap(), &alpha.neg()).unwrap();
            prop_assert!(back.distance(&theta) < 1e-12);
            prop_assert!(back.coords().iter().all(|&x| (0.0..1.0).contains(&x)));
        }

        #[test]
        fn fourier_bounded_and_convolution(seed in 0u64..500, k in -6i64..6) {
            let mut rng = RngStream::new(seed, 1);
            let random_measure = |rng: &mut RngStream, n: usize| {
                let atoms: Vec<TorusPoint> = (0..n).map(|_| TorusPoint::haar(1, rng)).collect();
                let raw: Vec<f64> = (0..n).map(|_| 0.1 + rng.uniform()).collect();
                let s: f64 = raw.iter().sum();
                AtomicMeasure::new(atoms, raw.iter().map(|w| w / s).collect()).unwrap()
            };
            let mu = random_measure(&mut rng, 3);
            let nu = random_measure(&mut rng, 2);
            let cm = fourier_coefficient(&mu, &[k]).unwrap();
            prop_assert!(cm.norm() <= 1.0 + 1e-12);
            prop_assert!((fourier_coefficient(&mu, &[0]).unwrap().norm() - 1.0).abs() < 1e-12);
            // μ * ν is the pushforward of μ × ν under addition
            let conv = mu.product(&nu).pushforward(|(a, b)| a.add(b).unwrap());
            let lhs = fourier_coefficient(&conv, &[k]).unwrap();
            let rhs = cm * fourier_coefficient(&nu, &[k]).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn mixing_dc_monotone_in_gamma(seed in 0u64..200, g in 0.01f64..0.5, shrink in 0.0f64..1.0) {
            let mut rng = RngStream::new(seed, 2);
            let atoms = vec![TorusPoint::haar(1, &mut rng), TorusPoint::haar(1, &mut rng)];
            let mu = AtomicMeasure::uniform(atoms).unwrap();
            let hi = mixing_dc_check(&mu, &DiophantineParams::new(g, 1.5, 20).unwrap()).unwrap();
            let lo = mixing_dc_check(&mu, &DiophantineParams::new(g * shrink + 1e-9, 1.5, 20).unwrap()).unwrap();
            prop_assert!(!hi.pass || lo.pass);
        }
    }
}
