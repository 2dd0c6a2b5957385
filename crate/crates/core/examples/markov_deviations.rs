// Large deviations and CLT for Birkhoff sums of a finite Markov chain.

use mixed_cocycles::markov::{
    clt_check, ldt_rate_fit, ldt_tail_estimate, FiniteKernel, Initial, MeanSource, Observable,
};
use mixed_cocycles::measure::AtomicMeasure;
use mixed_cocycles::rng::RngStream;
use mixed_cocycles::Result;

pub fn run_example() -> Result<()> {
    let k = FiniteKernel::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]])?;
    let nu = k.stationary()?;
    println!("stationary law: {nu:?}");
    let init = Initial::Law(AtomicMeasure::new(vec![0, 1], nu)?.into());
    let phi = Observable::from_values(vec![-1.0, 1.0])?;
    let rng = RngStream::new(5, 0);

    let eps = 0.2;
    let ns: Vec<usize> = (3..=10).map(|c| (c as f64 / (eps * eps)) as usize).collect();
    let table = ldt_tail_estimate(&k, &init, &phi, eps, &ns, 20_000, MeanSource::Auto, &rng)?;
    for r in &table.rows {
        println!("n = {:>3}: tail {:.4} [{:.4}, {:.4}]", r.n, r.tail, r.wilson_low, r.wilson_high);
    }
    let fit = ldt_rate_fit(&table)?;
    println!("c(ε={eps}) ≈ {:.4} (R² = {:.3})", -fit.slope, fit.fit_quality);

    let clt = clt_check(&k, &init, &phi, 400, 4000, MeanSource::Auto, &rng)?;
    println!(
        "CLT: variance {:.3}, skewness {:+.3}, excess kurtosis {:+.3}, KS {:.4}",
        clt.moments.variance, clt.moments.skewness, clt.moments.excess_kurtosis, clt.ks_distance
    );
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
