//! Randomised Schrödinger cocycles and matrix-exponential perturbations.
//!
//! The transfer matrix is [[v(θ) − E, −1], [1, 0]]. A real noise w enters
//! through the shear P(εw) = [[1, εw], [0, 1]], which adds εw to the
//! potential entry.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cocycle::{QpCocycle, TrigMode, TrigPolynomial};
use crate::error::{invalid, Error, Result};
use crate::linalg::{expm, Matrix};
use crate::measure::{AtomicMeasure, Magnitude, Measure, SamplerMeasure};
use crate::mixed::{lyapunov_top_with, EstimatorParams, LyapunovEstimate, MixedCocycle};
use crate::rng::RngStream;
use crate::torus::{check_dim, Frequency, TorusPoint};

/// Trace tolerance for generators of SL_m.
pub const TRACE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialMode {
    pub k: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Real trigonometric polynomial v: 𝕋^d → ℝ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Potential {
    pub d: usize,
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub modes: Vec<PotentialMode>,
}

impl Potential {
    pub fn zero(d: usize) -> Self {
        Self::constant(d, 0.0)
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Self {
            d,
            constant: c,
            modes: Vec::new(),
        }
    }

    /// θ ↦ amplitude·cos(2πθ₁) on 𝕋^d.
    pub fn cosine(d: usize, amplitude: f64) -> Self {
        let mut k = vec![0; d];
        k[0] = 1;
        Self {
            d,
            constant: 0.0,
            modes: vec![PotentialMode {
                k,
                cos: amplitude,
                sin: 0.0,
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(invalid("potential dimension must be at least 1"));
        }
        if !self.constant.is_finite() {
            return Err(Error::NonFinite("potential constant".into()));
        }
        for m in &self.modes {
            check_dim(self.d, m.k.len())?;
            if !m.cos.is_finite() || !m.sin.is_finite() {
                return Err(Error::NonFinite("potential coefficient".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.modes.iter().fold(self.constant, |acc, m| {
            let phase = 2.0 * PI * m.k.iter().zip(theta).map(|(&k, x)| k as f64 * x).sum::<f64>();
            let (s, c) = phase.sin_cos();
            acc + m.cos * c + m.sin * s
        })
    }

    /// θ ↦ [[v(θ) − E, −1], [1, 0]] as a matrix trigonometric polynomial.
    pub fn transfer_map(&self, energy: f64) -> Result<TrigPolynomial> {
        self.validate()?;
        let corner = |x: f64| Matrix::from_row_slice(2, 2, &[x, 0.0, 0.0, 0.0]);
        TrigPolynomial::new(
            self.d,
            Matrix::from_row_slice(2, 2, &[self.constant - energy, -1.0, 1.0, 0.0]),
            self.modes
                .iter()
                .map(|m| TrigMode {
                    k: m.k.clone(),
                    cos: corner(m.cos),
                    sin: corner(m.sin),
                })
                .collect(),
        )
    }
}

/// [[v(θ) − E, −1], [1, 0]].
pub fn schrodinger_matrix(v: &Potential, energy: f64, theta: &TorusPoint) -> Result<Matrix> {
    check_dim(v.d, theta.dim())?;
    Ok(Matrix::from_row_slice(
        2,
        2,
        &[v.eval(theta.coords()) - energy, -1.0, 1.0, 0.0],
    ))
}

/// [[1, w], [0, 1]].
pub fn shear(w: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[1.0, w, 0.0, 1.0])
}

/// The quasiperiodic Schrödinger cocycle (α, A_{v−E}).
pub fn schrodinger_cocycle(v: &Potential, energy: f64, alpha: &Frequency) -> Result<QpCocycle> {
    QpCocycle::trig(alpha.clone(), v.transfer_map(energy)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// (α, P(εw)·A), w ~ ρ on ℝ.
    PerturbedPotential,
    /// (α', A), α' ~ μ on 𝕋^d.
    RandomFrequency,
    /// (α', P(εw)·A), (α', w) ~ η on 𝕋^d × ℝ.
    Both,
}

/// Noise law for the selected model.
#[derive(Clone, Debug)]
pub enum Noise {
    Real(Measure<f64>),
    Torus(Measure<TorusPoint>),
    Joint(Measure<(TorusPoint, f64)>),
}

#[derive(Clone, Debug)]
pub struct SchrodingerConfig {
    pub potential: Potential,
    pub energy: f64,
    pub alpha: Frequency,
    pub noise: Noise,
    pub epsilon: f64,
    pub model: Model,
}

impl SchrodingerConfig {
    pub fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        check_dim(self.potential.d, self.alpha.dim())?;
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(invalid("epsilon must be a finite number ≥ 0"));
        }
        if !self.energy.is_finite() {
            return Err(Error::NonFinite("energy".into()));
        }
        let ok = matches!(
            (self.model, &self.noise),
            (Model::PerturbedPotential, Noise::Real(_))
                | (Model::RandomFrequency, Noise::Torus(_))
                | (Model::Both, Noise::Joint(_))
        );
        if !ok {
            return Err(Error::ModelMismatch(format!(
                "model {:?} does not accept this noise space",
                self.model
            )));
        }
        let d = self.potential.d;
        match &self.noise {
            Noise::Torus(Measure::Atomic(mu)) => mu.atoms().iter().try_for_each(|a| check_dim(d, a.dim())),
            Noise::Joint(Measure::Atomic(eta)) => eta.atoms().iter().try_for_each(|(a, _)| check_dim(d, a.dim())),
            _ => Ok(()),
        }
    }

    pub fn with_energy(&self, energy: f64) -> Self {
        Self {
            energy,
            ..self.clone()
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }
}

/// Driving measure ν_E for the configured model. Atomic noise gives an
/// atomic ν_E (coinciding atoms merge, so ε = 0 collapses op1 to one atom);
/// sampler noise gives a sampler over 𝒢.
pub fn build_model(cfg: &SchrodingerConfig) -> Result<MixedCocycle> {
    cfg.validate()?;
    let base = schrodinger_cocycle(&cfg.potential, cfg.energy, &cfg.alpha)?;
    let eps = cfg.epsilon;
    let base_bound = base.magnitude();
    let d = cfg.potential.d;
    let driving = match &cfg.noise {
        Noise::Real(rho) => {
            let bound = (1.0 + eps * rho.support_bound()) * base_bound;
            rho.try_pushforward(move |&w| base.left_multiply(&shear(eps * w)), bound.max(1.0))?
        }
        Noise::Torus(mu) => mu.try_pushforward(move |a| base.with_frequency(a.clone()), base_bound.max(1.0))?,
        Noise::Joint(eta) => {
            let bound = (1.0 + eps * eta.support_bound()) * base_bound;
            eta.try_pushforward(
                move |(a, w)| base.with_frequency(a.clone())?.left_multiply(&shear(eps * w)),
                bound.max(1.0),
            )?
        }
    };
    MixedCocycle::new(driving, d, 2)
}

fn check_traceless(w: &Matrix, m: usize) -> Result<()> {
    if w.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: w.nrows(),
        });
    }
    if w.trace().abs() > TRACE_TOLERANCE {
        return Err(invalid(format!("generator has trace {} (must be 0)", w.trace())));
    }
    Ok(())
}

/// Driving measure with atoms (α, θ ↦ exp(εW)·A₀(θ)), W ~ μ on sl_m.
pub fn exponential_perturbation(a0: &QpCocycle, mu: &Measure<Matrix>, epsilon: f64) -> Result<MixedCocycle> {
    if !epsilon.is_finite() {
        return Err(Error::NonFinite("epsilon".into()));
    }
    let m = a0.size();
    if let Measure::Atomic(atoms) = mu {
        atoms.atoms().iter().try_for_each(|w| check_traceless(w, m))?;
    }
    let bound = (epsilon.abs() * mu.support_bound()).exp() * a0.magnitude();
    let base = a0.clone();
    let driving = mu.try_pushforward(
        move |w| {
            check_traceless(w, m)?;
            base.left_multiply(&expm(&(w * epsilon))?)
        },
        bound.max(1.0),
    )?;
    MixedCocycle::new(driving, a0.dim(), m)
}

/// One row of an energy sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRow {
    pub energy: f64,
    pub estimate: LyapunovEstimate,
}

/// L₁(ν_E) for each energy; energy i uses stream `rng.derive(i)`.
pub fn energy_sweep(
    cfg: &SchrodingerConfig,
    energies: &[f64],
    params: &EstimatorParams,
    rng: &RngStream,
) -> Result<Vec<EnergyRow>> {
    if energies.is_empty() {
        return Err(invalid("energy list is empty"));
    }
    energies
        .iter()
        .enumerate()
        .map(|(i, &energy)| {
            let f = build_model(&cfg.with_energy(energy))?;
            let estimate = lyapunov_top_with(&f, &rng.derive(i as u64), params)?;
            Ok(EnergyRow { energy, estimate })
        })
        .collect()
}

/// Config-file form of a noise law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    /// Atomic ρ on ℝ.
    Real { atoms: Vec<f64>, weights: Vec<f64> },
    /// Uniform ρ on [lo, hi].
    UniformInterval { lo: f64, hi: f64 },
    /// Atomic μ on 𝕋^d.
    Torus { atoms: Vec<Vec<f64>>, weights: Vec<f64> },
    /// Atomic η on 𝕋^d × ℝ, atom j = (frequencies[j], shifts[j]).
    Joint {
        frequencies: Vec<Vec<f64>>,
        shifts: Vec<f64>,
        weights: Vec<f64>,
    },
}

impl NoiseSpec {
    pub fn to_noise(&self) -> Result<Noise> {
        Ok(match self {
            NoiseSpec::Real { atoms, weights } => Noise::Real(AtomicMeasure::new(atoms.clone(), weights.clone())?.into()),
            NoiseSpec::UniformInterval { lo, hi } => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(invalid("uniform interval needs finite lo < hi"));
                }
                Noise::Real(SamplerMeasure::uniform_interval(*lo, *hi).into())
            }
            NoiseSpec::Torus { atoms, weights } => {
                let pts = atoms.iter().map(|a| TorusPoint::new(a.clone())).collect::<Result<Vec<_>>>()?;
                Noise::Torus(AtomicMeasure::new(pts, weights.clone())?.into())
            }
            NoiseSpec::Joint {
                frequencies,
                shifts,
                weights,
            } => {
                if frequencies.len() != shifts.len() {
                    return Err(invalid("joint noise needs one shift per frequency"));
                }
                let pts = frequencies
                    .iter()
                    .zip(shifts)
                    .map(|(a, &w)| Ok((TorusPoint::new(a.clone())?, w)))
                    .collect::<Result<Vec<_>>>()?;
                Noise::Joint(AtomicMeasure::new(pts, weights.clone())?.into())
            }
        })
    }
}

/// Config-file form of [`SchrodingerConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchrodingerSpec {
    pub potential: Potential,
    #[serde(default)]
    pub energy: f64,
    pub alpha: Vec<f64>,
    pub noise: NoiseSpec,
    #[serde(default = "unit_coupling")]
    pub epsilon: f64,
    pub model: Model,
}

fn unit_coupling() -> f64 {
    1.0
}

impl SchrodingerSpec {
    pub fn to_config(&self) -> Result<SchrodingerConfig> {
        let cfg = SchrodingerConfig {
            potential: self.potential.clone(),
            energy: self.energy,
            alpha: TorusPoint::new(self.alpha.clone())?,
            noise: self.noise.to_noise()?,
            epsilon: self.epsilon,
            model: self.model,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
