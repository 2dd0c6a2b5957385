// Birkhoff sums along a torus translation and the two arithmetic
// conditions on frequencies: Diophantine and mixing Diophantine.

use mixed_cocycles::measure::AtomicMeasure;
use mixed_cocycles::torus::{birkhoff_sum, diophantine_check, mixing_dc_check, DiophantineParams, TorusPoint};
use mixed_cocycles::Result;

pub fn run_example() -> Result<()> {
    let golden = TorusPoint::scalar(0.6180339887498949);
    let phi = |t: &TorusPoint| (2.0 * std::f64::consts::PI * t.coords()[0]).cos();
    for n in [10, 1000, 100_000] {
        let s = birkhoff_sum(phi, &TorusPoint::scalar(0.2), &golden, n)?;
        println!("S_n cos / n at n = {n:>6}: {:.2e}", s / n as f64);
    }

    let dc = diophantine_check(&golden, &DiophantineParams::new(0.38, 1.0, 1000)?)?;
    println!("golden mean Diophantine (γ=0.38, τ=1): {} at k = {:?}", dc.pass, dc.worst_k);

    let params = DiophantineParams::new(0.1, 2.0, 100)?;
    let point = mixing_dc_check(&AtomicMeasure::dirac(golden.clone()), &params)?;
    let pair = mixing_dc_check(&AtomicMeasure::uniform(vec![TorusPoint::scalar(0.0), golden])?, &params)?;
    let periodic = mixing_dc_check(&AtomicMeasure::uniform(vec![TorusPoint::scalar(0.0), TorusPoint::scalar(0.5)])?, &params)?;
    println!("δ_α: {}; ½(δ₀ + δ_golden): {} (margin {:.2e}); ½(δ₀ + δ_½): {} at k = {:?}",
        point.pass, pair.pass, pair.margin, periodic.pass, periodic.worst_k);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
