// The three random Schrödinger models: noisy potential, random frequency,
// and both at once, plus an energy sweep with positivity verdicts.

use mixed_cocycles::measure::AtomicMeasure;
use mixed_cocycles::mixed::{lyapunov_top_with, EstimatorParams};
use mixed_cocycles::rng::RngStream;
use mixed_cocycles::schrodinger::{build_model, energy_sweep, Model, Noise, Potential, SchrodingerConfig};
use mixed_cocycles::torus::TorusPoint;
use mixed_cocycles::Result;

const GOLDEN: f64 = 0.6180339887498949;

pub fn run_example() -> Result<()> {
    let params = EstimatorParams::new(10_000, 16);
    let rng = RngStream::new(7, 0);

    let kicks = AtomicMeasure::uniform(vec![-1.0, 1.0])?;
    let anderson = SchrodingerConfig {
        potential: Potential::zero(1),
        energy: 0.0,
        alpha: TorusPoint::scalar(GOLDEN),
        noise: Noise::Real(kicks.clone().into()),
        epsilon: 1.0,
        model: Model::PerturbedPotential,
    };

    let freqs = AtomicMeasure::uniform(vec![TorusPoint::scalar(GOLDEN), TorusPoint::scalar(2f64.sqrt() - 1.0)])?;
    let random_frequency = SchrodingerConfig {
        potential: Potential::cosine(1, 3.0),
        noise: Noise::Torus(freqs.into()),
        model: Model::RandomFrequency,
        ..anderson.clone()
    };

    let joint = AtomicMeasure::uniform(vec![
        (TorusPoint::scalar(GOLDEN), -1.0),
        (TorusPoint::scalar(2f64.sqrt() - 1.0), 1.0),
    ])?;
    let both = SchrodingerConfig {
        noise: Noise::Joint(joint.into()),
        model: Model::Both,
        ..random_frequency.clone()
    };

    for (name, cfg) in [("perturbed potential", &anderson), ("random frequency", &random_frequency), ("both", &both)] {
        let est = lyapunov_top_with(&build_model(cfg)?, &rng, &params)?;
        println!("{name:>20}: L1 = {:.4} ± {:.4}", est.value, est.std_error);
    }

    let energies = [-2.0, -1.0, 0.0, 1.0, 2.0];
    for row in energy_sweep(&anderson, &energies, &params, &rng)? {
        let e = row.estimate;
        let verdict = if e.value - 3.0 * e.std_error > 0.0 { "positive" } else { "not-established" };
        println!("E = {:+.1}: L1 = {:.4} ± {:.4} {verdict}", row.energy, e.value, e.std_error);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
