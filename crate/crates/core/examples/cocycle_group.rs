// Quasiperiodic cocycles as a group: compose, invert, measure distances,
// check a C¹ bound and round-trip through JSON.

use mixed_cocycles::cocycle::{c1_norm_check, compose, distance, invert, C1Bound, QpCocycle};
use mixed_cocycles::schrodinger::{schrodinger_cocycle, Potential};
use mixed_cocycles::torus::TorusPoint;
use mixed_cocycles::Result;

pub fn run_example() -> Result<()> {
    let alpha = TorusPoint::scalar(0.6180339887498949);
    // almost Mathieu at coupling 1: v(θ) = 2cos 2πθ
    let g = schrodinger_cocycle(&Potential::cosine(1, 2.0), 0.3, &alpha)?;
    let h = schrodinger_cocycle(&Potential::zero(1), -0.5, &TorusPoint::scalar(0.25))?;

    let gh = compose(&g, &h)?;
    let theta = TorusPoint::scalar(0.1);
    println!("(g∘h)(0.1) = {}", gh.evaluate(&theta)?);
    println!("frequency of g∘h: {:?}", gh.freq().coords());

    let back = compose(&gh, &invert(&h)?)?;
    println!("d(g∘h∘h⁻¹, g) = {:.2e}", distance(&back, &g, 64)?);
    println!("d(g, h) = {:.4}", distance(&g, &h, 64)?);

    let ok = c1_norm_check(&g, C1Bound::new(20.0)?, 256)?;
    println!("‖g‖_C¹ ≤ 20: {ok}");

    let text = serde_json::to_string(&g)?;
    let again: QpCocycle = serde_json::from_str(&text)?;
    println!("JSON round trip distance: {:.1e}", distance(&g, &again, 64)?);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
