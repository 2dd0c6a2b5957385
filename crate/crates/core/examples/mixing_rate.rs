// Exact decay of ‖Qⁿφ − ∫φ dν‖_∞ for a finite kernel and the fitted
// geometric and power rates.

use mixed_cocycles::markov::{mixing_rate_estimate, FiniteKernel, Observable};
use mixed_cocycles::measure::AtomicMeasure;
use mixed_cocycles::Result;

pub fn run_example() -> Result<()> {
    let k = FiniteKernel::new(vec![
        vec![0.5, 0.3, 0.2],
        vec![0.1, 0.6, 0.3],
        vec![0.3, 0.3, 0.4],
    ])?;
    let nu = AtomicMeasure::new(vec![0, 1, 2], k.stationary()?)?;
    let phis = vec![
        Observable::from_values(vec![1.0, 0.0, 0.0])?,
        Observable::from_values(vec![0.0, -1.0, 2.0])?,
    ];
    let table = mixing_rate_estimate(&k, &phis, 40, &nu)?;
    for (n, dev) in table.rows.iter().take(6) {
        println!("n = {n}: {dev:.3e}");
    }
    println!("geometric rate {:?}, mixing: {}", table.geometric_rate(), table.mixing);

    let swap = FiniteKernel::swap();
    let nu = AtomicMeasure::uniform(vec![0, 1])?;
    let table = mixing_rate_estimate(&swap, &[Observable::from_values(vec![1.0, 0.0])?], 10, &nu)?;
    println!("periodic swap kernel mixing: {}", table.mixing);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
