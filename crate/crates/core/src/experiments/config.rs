//! JSON experiment configuration.
//!
//! A config names one experiment through the `experiment` tag and carries
//! the sections that experiment needs. Unknown keys are rejected by
//! comparing the input document against its own re-serialization, since
//! serde cannot deny unknown fields through a flattened tagged enum.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bundle::ProjectivePoint;
use crate::cocycle::QpCocycle;
use crate::error::{Error, Result};
use crate::markov::{FiniteKernel, Initial};
use crate::measure::{AtomicMeasure, Measure};
use crate::mixed::{EstimatorParams, MixedCocycle};
use crate::schrodinger::{build_model, schrodinger_cocycle, Noise, NoiseSpec, Potential, SchrodingerSpec};
use crate::torus::{DiophantineParams, TorusPoint};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(flatten)]
    pub experiment: Experiment,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    Lyapunov(LyapunovConfig),
    PositivityScan(PositivityConfig),
    StabilityCurve(StabilityConfig),
    HolderScan(HolderConfig),
    LdtRate(LdtConfig),
    MixingCheck(MixingConfig),
    CltCheck(CltConfig),
    H2Scan(H2Config),
}

impl Experiment {
    pub const NAMES: [&'static str; 8] = [
        "lyapunov",
        "positivity-scan",
        "stability-curve",
        "holder-scan",
        "ldt-rate",
        "mixing-check",
        "clt-check",
        "h2-scan",
    ];

    pub fn name(&self) -> &'static str {
        let i = match self {
            Self::Lyapunov(_) => 0,
            Self::PositivityScan(_) => 1,
            Self::StabilityCurve(_) => 2,
            Self::HolderScan(_) => 3,
            Self::LdtRate(_) => 4,
            Self::MixingCheck(_) => 5,
            Self::CltCheck(_) => 6,
            Self::H2Scan(_) => 7,
        };
        Self::NAMES[i]
    }
}

/// Driving measure: a Schrödinger model or explicit atoms on the group.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Schrodinger(SchrodingerSpec),
    Atomic(AtomicMeasure<QpCocycle>),
}

impl ModelSpec {
    pub fn build(&self) -> Result<MixedCocycle> {
        match self {
            Self::Schrodinger(s) => build_model(&s.to_config()?),
            Self::Atomic(nu) => MixedCocycle::from_atomic(nu.clone()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyapunovConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub estimator: EstimatorParams,
    /// Also report the full spectrum (QR method).
    #[serde(default)]
    pub spectrum: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositivityConfig {
    pub model: SchrodingerSpec,
    pub energies: Vec<f64>,
    #[serde(default)]
    pub estimator: EstimatorParams,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub model: SchrodingerSpec,
    /// Coupling values; must contain 0.
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub estimator: EstimatorParams,
}

/// Weight moves from atom `from` to atom `to`; radius δ moves δ/d(from, to).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolderConfig {
    pub base: AtomicMeasure<QpCocycle>,
    pub from: usize,
    pub to: usize,
    pub radii: Vec<f64>,
    #[serde(default)]
    pub estimator: EstimatorParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Finite { rows: Vec<Vec<f64>> },
    /// Every row equal to `weights`.
    Iid { weights: Vec<f64> },
}

impl KernelSpec {
    pub fn build(&self) -> Result<FiniteKernel> {
        match self {
            Self::Finite { rows } => FiniteKernel::new(rows.clone()),
            Self::Iid { weights } => FiniteKernel::iid(weights),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    /// Z₀ drawn from the stationary law.
    #[default]
    Stationary,
    State(usize),
}

impl InitialSpec {
    pub fn build(&self, k: &FiniteKernel) -> Result<Initial<usize>> {
        match self {
            Self::State(s) if *s < k.states() => Ok(Initial::Point(*s)),
            Self::State(s) => Err(Error::Config(format!("initial state {s} out of range"))),
            Self::Stationary => Ok(Initial::Law(stationary_measure(k)?.into())),
        }
    }
}

/// Stationary law as an atomic measure on the states it charges.
pub fn stationary_measure(k: &FiniteKernel) -> Result<AtomicMeasure<usize>> {
    let nu = k.stationary()?;
    let (atoms, weights): (Vec<usize>, Vec<f64>) = nu.iter().copied().enumerate().filter(|(_, w)| *w > 0.0).unzip();
    let total: f64 = weights.iter().sum();
    AtomicMeasure::new(atoms, weights.iter().map(|w| w / total).collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LdtConfig {
    pub kernel: KernelSpec,
    /// φ(i) for each state.
    pub observable: Vec<f64>,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default = "default_ldt_epsilons")]
    pub epsilons: Vec<f64>,
    /// Chain lengths are round(c/ε²) for each multiplier c.
    #[serde(default = "default_multipliers")]
    pub n_multipliers: Vec<f64>,
    #[serde(default = "default_chains")]
    pub chains: usize,
    /// Exact ∫φ dν; computed from the stationary law when absent.
    #[serde(default)]
    pub mean: Option<f64>,
    /// Power-mixing exponent p, for the 2 + 1/p comparison.
    #[serde(default)]
    pub mixing_power: Option<f64>,
}

fn default_ldt_epsilons() -> Vec<f64> {
    vec![0.1, 0.2, 0.3]
}

fn default_multipliers() -> Vec<f64> {
    (3..=12).map(f64::from).collect()
}

fn default_chains() -> usize {
    10_000
}

impl LdtConfig {
    pub fn lengths(&self, epsilon: f64) -> Vec<usize> {
        self.n_multipliers
            .iter()
            .map(|c| ((c / (epsilon * epsilon)).round() as usize).max(1))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixingConfig {
    /// Frequency law μ on 𝕋^d for the mixing Diophantine check.
    #[serde(default)]
    pub frequency_law: Option<AtomicMeasure<TorusPoint>>,
    #[serde(default = "default_diophantine")]
    pub diophantine: DiophantineParams,
    /// Finite kernel whose decay ‖Qⁿφ − ∫φ dν‖_∞ is measured.
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    /// Observables as value vectors; indicators of each state when empty.
    #[serde(default)]
    pub observables: Vec<Vec<f64>>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_diophantine() -> DiophantineParams {
    DiophantineParams {
        gamma: 0.1,
        tau: 2.0,
        cutoff: 100,
    }
}

fn default_n_max() -> usize {
    60
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CltConfig {
    pub kernel: KernelSpec,
    pub observable: Vec<f64>,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default = "default_clt_n")]
    pub n: usize,
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default)]
    pub mean: Option<f64>,
}

fn default_clt_n() -> usize {
    1000
}

/// Shear family around a Schrödinger cocycle, scanned over (r, ε).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct H2Config {
    pub potential: Potential,
    #[serde(default)]
    pub energy: f64,
    pub alpha: Vec<f64>,
    pub noise: NoiseSpec,
    pub k0: usize,
    pub theta: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub radii: Vec<f64>,
    pub epsilons: Vec<f64>,
    #[serde(default = "default_chains")]
    pub chains: usize,
}

impl H2Config {
    pub fn base(&self) -> Result<QpCocycle> {
        schrodinger_cocycle(&self.potential, self.energy, &TorusPoint::new(self.alpha.clone())?)
    }

    pub fn noise(&self) -> Result<Measure<f64>> {
        match self.noise.to_noise()? {
            Noise::Real(m) => Ok(m),
            _ => Err(Error::Config("h2-scan noise must be a law on ℝ".into())),
        }
    }

    pub fn points(&self) -> Result<(TorusPoint, ProjectivePoint, ProjectivePoint)> {
        Ok((
            TorusPoint::new(self.theta.clone())?,
            ProjectivePoint::new(self.p.clone())?,
            ProjectivePoint::new(self.q.clone())?,
        ))
    }
}

fn need(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg.into()))
    }
}

fn positive_list(xs: &[f64], what: &str) -> Result<()> {
    need(!xs.is_empty(), &format!("{what} list is empty"))?;
    need(xs.iter().all(|x| x.is_finite() && *x > 0.0), &format!("{what} must be positive"))
}

fn check_estimator(p: &EstimatorParams) -> Result<()> {
    need(p.n >= 1, "estimator n must be at least 1")?;
    need(p.samples >= 2, "estimator needs at least 2 samples")?;
    need(p.burn_in < p.n, "burn_in must be below n")
}

fn check_observable(k: &FiniteKernel, phi: &[f64]) -> Result<()> {
    need(phi.len() == k.states(), "observable needs one value per state")?;
    need(phi.iter().all(|x| x.is_finite()), "observable values must be finite")
}

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn from_json(text: &str) -> Result<Self> {
        let input: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg: Self = serde_json::from_value(input.clone()).map_err(|e| Error::Config(e.to_string()))?;
        let canon = serde_json::to_value(&cfg)?;
        let mut unknown = Vec::new();
        unknown_keys(&input, &canon, "", &mut unknown);
        if !unknown.is_empty() {
            return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Builds every sub-config without running anything.
    pub fn validate(&self) -> Result<()> {
        match &self.experiment {
            Experiment::Lyapunov(c) => {
                check_estimator(&c.estimator)?;
                need(!(c.spectrum && c.estimator.burn_in > 0), "burn_in is not supported with spectrum")?;
                c.model.build().map(drop)
            }
            Experiment::PositivityScan(c) => {
                check_estimator(&c.estimator)?;
                need(!c.energies.is_empty(), "energy list is empty")?;
                need(c.energies.iter().all(|e| e.is_finite()), "energies must be finite")?;
                c.model.to_config().map(drop)
            }
            Experiment::StabilityCurve(c) => {
                check_estimator(&c.estimator)?;
                need(c.epsilons.contains(&0.0), "epsilon list must contain 0")?;
                need(c.epsilons.iter().all(|e| e.is_finite() && *e >= 0.0), "epsilons must be ≥ 0")?;
                c.model.to_config().map(drop)
            }
            Experiment::HolderScan(c) => {
                check_estimator(&c.estimator)?;
                let n = c.base.len();
                need(c.from < n && c.to < n && c.from != c.to, "from/to must be distinct atom indices")?;
                need(!c.radii.is_empty(), "radius list is empty")?;
                need(c.radii.iter().all(|r| r.is_finite() && *r >= 0.0), "radii must be ≥ 0")?;
                MixedCocycle::from_atomic(c.base.clone()).map(drop)
            }
            Experiment::LdtRate(c) => {
                let k = c.kernel.build()?;
                check_observable(&k, &c.observable)?;
                c.initial.build(&k)?;
                positive_list(&c.epsilons, "epsilon")?;
                positive_list(&c.n_multipliers, "n multiplier")?;
                need(c.chains >= 100, "at least 100 chains are needed")?;
                need(c.mixing_power.is_none_or(|p| p > 0.0), "mixing_power must be positive")
            }
            Experiment::MixingCheck(c) => {
                need(
                    c.frequency_law.is_some() || c.kernel.is_some(),
                    "mixing-check needs a frequency_law, a kernel, or both",
                )?;
                c.diophantine.validate()?;
                if let Some(spec) = &c.kernel {
                    let k = spec.build()?;
                    for phi in &c.observables {
                        check_observable(&k, phi)?;
                    }
                    need(c.n_max >= 1, "n_max must be at least 1")?;
                }
                Ok(())
            }
            Experiment::CltCheck(c) => {
                let k = c.kernel.build()?;
                check_observable(&k, &c.observable)?;
                c.initial.build(&k)?;
                need(c.n >= 1, "n must be at least 1")?;
                need(c.chains >= 1000, "at least 1000 chains are needed")
            }
            Experiment::H2Scan(c) => {
                let base = c.base()?;
                c.noise()?;
                let (theta, p, q) = c.points()?;
                need(theta.dim() == base.dim(), "theta dimension must match alpha")?;
                need(p.dim() == 2 && q.dim() == 2, "p and q must be vectors in ℝ²")?;
                need(c.k0 >= 1, "k0 must be at least 1")?;
                positive_list(&c.radii, "radius")?;
                positive_list(&c.epsilons, "epsilon")?;
                need(c.chains >= 1000, "at least 1000 chains are needed")
            }
        }
    }
}

fn unknown_keys(input: &Value, canon: &Value, path: &str, out: &mut Vec<String>) {
    match (input, canon) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, v) in a {
                let here = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get(k) {
                    Some(w) => unknown_keys(v, w, &here, out),
                    None => out.push(here),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            for (i, (v, w)) in a.iter().zip(b).enumerate() {
                unknown_keys(v, w, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LYAP: &str = r#"{
        "experiment": "lyapunov",
        "master_seed": 7,
        "model": {"schrodinger": {
            "potential": {"d": 1, "constant": 0.0, "modes": []},
            "alpha": [0.6180339887498949],
            "noise": {"kind": "real", "atoms": [-1.0, 1.0], "weights": [0.5, 0.5]},
            "model": "perturbed_potential"
        }},
        "estimator": {"n": 1000, "samples": 4}
    }"#;

    #[test]
    fn parses_and_fills_defaults() {
        let cfg = ExperimentConfig::from_json(LYAP).unwrap();
        assert_eq!(cfg.experiment.name(), "lyapunov");
        assert_eq!(cfg.output, PathBuf::from("out"));
        let Experiment::Lyapunov(c) = &cfg.experiment else { panic!() };
        assert_eq!(c.estimator.burn_in, 0);
        assert!(!c.spectrum);
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = ExperimentConfig::from_json(LYAP).unwrap();
        let once = cfg.to_json().unwrap();
        let twice = ExperimentConfig::from_json(&once).unwrap().to_json().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        let typo = LYAP.replace("\"samples\"", "\"sample_count\"");
        assert!(matches!(ExperimentConfig::from_json(&typo), Err(Error::Config(_))));
        let extra = LYAP.replace("\"master_seed\": 7,", "\"master_seed\": 7, \"colour\": 1,");
        let err = ExperimentConfig::from_json(&extra).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
        let bad = LYAP.replace("\"lyapunov\"", "\"lyapunov-scan\"");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let mismatch = LYAP.replace("perturbed_potential", "random_frequency");
        assert!(ExperimentConfig::from_json(&mismatch).is_err());
    }

    #[test]
    fn stability_needs_zero() {
        let text = r#"{
            "experiment": "stability-curve", "master_seed": 1,
            "model": {"potential": {"d": 1, "constant": 0.0, "modes": []},
                      "alpha": [0.3], "noise": {"kind": "uniform_interval", "lo": -1.0, "hi": 1.0},
                      "model": "perturbed_potential"},
            "epsilons": [0.5, 0.25]
        }"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        assert!(ExperimentConfig::from_json(&text.replace("[0.5, 0.25]", "[0.0, 0.5]")).is_ok());
    }

    #[test]
    fn ldt_lengths() {
        let text = r#"{"experiment": "ldt-rate", "master_seed": 3,
            "kernel": {"kind": "iid", "weights": [0.5, 0.5]}, "observable": [0.0, 1.0]}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let Experiment::LdtRate(c) = &cfg.experiment else { panic!() };
        assert_eq!(c.lengths(0.1), (3..=12).map(|c| c * 100).collect::<Vec<_>>());
        assert_eq!(c.initial, InitialSpec::Stationary);
    }
}
