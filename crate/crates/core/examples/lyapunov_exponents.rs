// Top exponent and spectrum of mixed cocycles, checked against exact
// values and against the exhaustive word oracle at small n.

use mixed_cocycles::cocycle::QpCocycle;
use mixed_cocycles::linalg::Matrix;
use mixed_cocycles::measure::AtomicMeasure;
use mixed_cocycles::mixed::{brute_force_lognorm, lyapunov_spectrum, lyapunov_top, EstimatorParams, MixedCocycle};
use mixed_cocycles::rng::RngStream;
use mixed_cocycles::torus::TorusPoint;
use mixed_cocycles::Result;

fn constant(a: [f64; 4]) -> Result<QpCocycle> {
    QpCocycle::constant(TorusPoint::scalar(0.0), Matrix::from_row_slice(2, 2, &a))
}

pub fn run_example() -> Result<()> {
    let rng = RngStream::new(2024, 0);

    let hyperbolic = MixedCocycle::from_atomic(AtomicMeasure::dirac(constant([3.0, 0.0, 0.0, 1.0 / 3.0])?))?;
    let spec = lyapunov_spectrum(&hyperbolic, &rng, 1000, 4)?;
    println!("diag(3, 1/3): L1 = {:.12}, L2 = {:.12} (log 3 = {:.12})", spec[0].value, spec[1].value, 3f64.ln());

    // two non-commuting atoms: positive exponent
    let nu = AtomicMeasure::uniform(vec![constant([2.0, 0.0, 0.0, 0.5])?, constant([1.0, 1.0, 0.0, 1.0])?])?;
    let f = MixedCocycle::from_atomic(nu)?;
    let est = lyapunov_top(&f, &rng, 20_000, 16, 0)?;
    println!("L1 = {:.4} ± {:.4}", est.value, est.std_error);

    // at n = 12 the Monte Carlo average and the exact word average agree
    let oracle = brute_force_lognorm(&f, 1, 12)?;
    let small = lyapunov_top(&f, &rng, 12, 20_000, 0)?;
    println!("n = 12: Monte Carlo {:.4} ± {:.4}, exact {oracle:.4}", small.value, small.std_error);

    let defaults = EstimatorParams::default();
    println!("desk-scale defaults: n = {}, samples = {}", defaults.n, defaults.samples);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
