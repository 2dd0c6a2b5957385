// Exact W₁ between atomic measures, on the torus and on the cocycle group,
// including the weight shift that moves a measure by exactly δ.

use mixed_cocycles::cocycle::QpCocycle;
use mixed_cocycles::experiments::runners::shift_weight;
use mixed_cocycles::linalg::Matrix;
use mixed_cocycles::measure::{wasserstein1, AtomicMeasure, Metric};
use mixed_cocycles::torus::TorusPoint;
use mixed_cocycles::Result;

pub fn run_example() -> Result<()> {
    let mu = AtomicMeasure::new(vec![TorusPoint::scalar(0.1), TorusPoint::scalar(0.5)], vec![0.5, 0.5])?;
    let nu = AtomicMeasure::new(
        vec![TorusPoint::scalar(0.9), TorusPoint::scalar(0.45), TorusPoint::scalar(0.6)],
        vec![0.4, 0.3, 0.3],
    )?;
    println!("W1 on the circle: {:.6}", wasserstein1(&mu, &nu)?);

    let a = QpCocycle::constant(TorusPoint::scalar(0.0), Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]))?;
    let b = QpCocycle::constant(TorusPoint::scalar(0.0), Matrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0]))?;
    let gap = a.distance(&b);
    let base = AtomicMeasure::uniform(vec![a, b])?;
    for delta in [0.01, 0.1, 0.5] {
        let moved = shift_weight(&base, 1, 0, delta / gap)?;
        println!("requested δ = {delta}: W1 = {:.12}", wasserstein1(&base, &moved)?);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
