// Random perturbations exp(εW)·A₀ of a quasiperiodic cocycle, W drawn from
// a law on sl₂, and how L₁ moves with ε.

use mixed_cocycles::linalg::{det, expm, Matrix};
use mixed_cocycles::measure::AtomicMeasure;
use mixed_cocycles::mixed::lyapunov_top;
use mixed_cocycles::rng::RngStream;
use mixed_cocycles::schrodinger::{exponential_perturbation, schrodinger_cocycle, Potential};
use mixed_cocycles::torus::TorusPoint;
use mixed_cocycles::Result;

pub fn run_example() -> Result<()> {
    let w1 = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let w2 = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    println!("det exp(0.7·W) = {:.15}", det(&expm(&(&w2 * 0.7))?));

    let noise = AtomicMeasure::uniform(vec![w1, w2])?;
    let a0 = schrodinger_cocycle(&Potential::cosine(1, 1.0), 0.2, &TorusPoint::scalar(0.6180339887498949))?;
    let rng = RngStream::new(99, 0);
    for eps in [0.0, 0.1, 0.3, 1.0] {
        let f = exponential_perturbation(&a0, &noise.clone().into(), eps)?;
        let est = lyapunov_top(&f, &rng, 10_000, 16, 0)?;
        println!("ε = {eps:.1}: L1 = {:.4} ± {:.4}", est.value, est.std_error);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
