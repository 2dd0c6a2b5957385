//! Projective lines, the spectral-gap estimator and Monte Carlo estimates
//! of how often a projectivised random product lands in a small ball.

use rayon::prelude::*;

use crate::cocycle::QpCocycle;
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::measure::{Magnitude, Measure, SamplerMeasure};
use crate::mixed::{iterate_product, spectrum_samples, LyapunovEstimate, MixedCocycle};
use crate::rng::RngStream;
use crate::schrodinger::{exponential_perturbation, shear};
use crate::stats::{mean_and_stderr, wilson95};
use crate::torus::TorusPoint;

/// Images shorter than this cannot be normalised.
pub const ACTION_FLOOR: f64 = 1e-300;

/// A line in ℝ^m, stored as a unit vector whose first nonzero coordinate
/// is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint(Vec<f64>);

impl ProjectivePoint {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(invalid("empty vector"));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < ACTION_FLOOR {
            return Err(Error::Degenerate(format!("vector of norm {norm:e} has no direction")));
        }
        let sign = match v.iter().find(|x| **x != 0.0) {
            Some(x) if *x < 0.0 => -1.0,
            _ => 1.0,
        };
        Ok(Self(v.iter().map(|x| sign * x / norm).collect()))
    }

    /// Line through e_i in ℝ^m.
    pub fn axis(i: usize, m: usize) -> Self {
        let mut v = vec![0.0; m];
        v[i] = 1.0;
        Self(v)
    }

    /// Line at angle t in the plane.
    pub fn from_angle(t: f64) -> Self {
        let (s, c) = t.sin_cos();
        Self::new(vec![c, s]).expect("unit vector")
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn representative(&self) -> &[f64] {
        &self.0
    }
}

/// Sine of the angle between two lines, computed as ‖p ∧ q‖.
pub fn projective_distance(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let (a, b) = (&p.0, &q.0);
    let mut acc = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let w = a[i] * b[j] - a[j] * b[i];
            acc += w * w;
        }
    }
    Ok(acc.sqrt().min(1.0))
}

/// The line through M·p.
pub fn projective_action(m: &Matrix, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    if m.ncols() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.ncols(),
            found: p.dim(),
        });
    }
    let image: Vec<f64> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * p.0[j]).sum())
        .collect();
    let norm = image.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm >= ACTION_FLOOR) {
        return Err(Error::Degenerate(format!("image of norm {norm:e}")));
    }
    ProjectivePoint::new(image)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapEstimate {
    pub gap: f64,
    /// Standard error of the per-chain gaps.
    pub std_error: f64,
    /// √(se(L₁)² + se(L₂)²), for comparison with estimates made separately.
    pub combined_std_error: f64,
    pub top: LyapunovEstimate,
    pub second: LyapunovEstimate,
}

/// L₁ − L₂ from the QR spectrum; chain c contributes its own difference.
pub fn spectral_gap_estimate(f: &MixedCocycle, rng: &RngStream, n: usize, samples: usize) -> Result<GapEstimate> {
    if f.size() < 2 {
        return Err(invalid("spectral gap needs m ≥ 2"));
    }
    let per_chain = spectrum_samples(f, rng, n, samples)?;
    let gaps: Vec<f64> = per_chain.iter().map(|e| e[0] - e[1]).collect();
    let (gap, std_error) = mean_and_stderr(&gaps);
    let column = |i: usize| -> Result<LyapunovEstimate> {
        let xs: Vec<f64> = per_chain.iter().map(|e| e[i]).collect();
        LyapunovEstimate::from_samples(&xs, n)
    };
    let (top, second) = (column(0)?, column(1)?);
    Ok(GapEstimate {
        gap,
        std_error,
        combined_std_error: top.std_error.hypot(second.std_error),
        top,
        second,
    })
}

/// A one-parameter family ε ↦ ν_ε around a base cocycle A₀.
#[derive(Clone, Debug)]
pub enum PerturbationFamily {
    /// Atoms (α, P(εw)·A₀), w ~ noise.
    Shear { base: QpCocycle, noise: Measure<f64> },
    /// Atoms (α, exp(εW)·A₀), W ~ noise on sl_m.
    Exponential { base: QpCocycle, noise: Measure<Matrix> },
}

impl PerturbationFamily {
    pub fn base(&self) -> &QpCocycle {
        match self {
            Self::Shear { base, .. } | Self::Exponential { base, .. } => base,
        }
    }

    pub fn at(&self, epsilon: f64) -> Result<MixedCocycle> {
        match self {
            Self::Shear { base, noise } => {
                if base.size() != 2 {
                    return Err(invalid("shear perturbations need m = 2"));
                }
                let bound = (1.0 + epsilon.abs() * noise.support_bound()) * base.magnitude();
                let b = base.clone();
                let driving = noise.try_pushforward(move |&w| b.left_multiply(&shear(epsilon * w)), bound.max(1.0))?;
                MixedCocycle::new(driving, base.dim(), 2)
            }
            Self::Exponential { base, noise } => exponential_perturbation(base, noise, epsilon),
        }
    }
}

/// Constants of the ball-concentration hypothesis being probed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct H2Params {
    pub k0: usize,
    pub eps0: f64,
    pub r: f64,
    pub c_target: f64,
    pub vartheta_target: f64,
}

impl H2Params {
    pub fn validate(&self) -> Result<()> {
        if self.k0 == 0 {
            return Err(invalid("k0 must be at least 1"));
        }
        if !(self.eps0 > 0.0) {
            return Err(invalid("eps0 must be positive"));
        }
        if !(self.r > 0.0 && self.r < self.eps0) {
            return Err(invalid("radius must satisfy 0 < r < eps0"));
        }
        Ok(())
    }

    /// C·(r/ε₀)^ϑ, the bound shape being compared against.
    pub fn target_bound(&self) -> f64 {
        self.c_target * (self.r / self.eps0).powf(self.vartheta_target)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct H2Estimate {
    pub r: f64,
    pub probability: f64,
    pub hits: u64,
    pub chains: u64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Fraction of chains whose k0-step image of p̂ (from fixed θ) lies in the
/// closed ball B(q̂, r), with F = family at ε₀.
#[allow(clippy::too_many_arguments)]
pub fn h2_probability_estimate(
    family: &PerturbationFamily,
    params: &H2Params,
    theta: &TorusPoint,
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    rng: &RngStream,
    chains: usize,
) -> Result<H2Estimate> {
    params.validate()?;
    let f = family.at(params.eps0)?;
    Ok(h2_nested(&f, params.k0, theta, p, q, &[params.r], rng, chains)?[0])
}

/// One estimate per radius from the same chains (common random numbers),
/// so the estimates are nondecreasing in r path by path.
#[allow(clippy::too_many_arguments)]
pub fn h2_nested(
    f: &MixedCocycle,
    k0: usize,
    theta: &TorusPoint,
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    radii: &[f64],
    rng: &RngStream,
    chains: usize,
) -> Result<Vec<H2Estimate>> {
    if chains < 1000 {
        return Err(invalid("at least 1000 chains are needed"));
    }
    if k0 == 0 {
        return Err(invalid("k0 must be at least 1"));
    }
    if p.dim() != f.size() || q.dim() != f.size() {
        return Err(Error::DimensionMismatch {
            expected: f.size(),
            found: p.dim(),
        });
    }
    let distances = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut stream = rng.derive(c as u64);
            let state = iterate_product(f, theta, &mut stream, k0)?;
            projective_distance(&projective_action(&state.frame(), p)?, q)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(radii
        .iter()
        .map(|&r| {
            let hits = distances.iter().filter(|&&d| d <= r).count() as u64;
            let (wilson_low, wilson_high) = wilson95(hits, chains as u64);
            H2Estimate {
                r,
                probability: hits as f64 / chains as f64,
                hits,
                chains: chains as u64,
                wilson_low,
                wilson_high,
            }
        })
        .collect())
}

/// Uniform law on [−1, 1], the default continuous shear noise.
pub fn uniform_noise() -> Measure<f64> {
    SamplerMeasure::uniform_interval(-1.0, 1.0).into()
}
