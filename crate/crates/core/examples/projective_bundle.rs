// Projective lines: distances, the projective action, the spectral gap
// L₁ − L₂, and ball-hitting probabilities with nested radii.

use mixed_cocycles::bundle::{
    h2_nested, projective_action, projective_distance, spectral_gap_estimate, uniform_noise, PerturbationFamily,
    ProjectivePoint,
};
use mixed_cocycles::linalg::Matrix;
use mixed_cocycles::rng::RngStream;
use mixed_cocycles::schrodinger::{schrodinger_cocycle, Potential};
use mixed_cocycles::torus::TorusPoint;
use mixed_cocycles::Result;

pub fn run_example() -> Result<()> {
    let e1 = ProjectivePoint::axis(0, 2);
    let diag = ProjectivePoint::new(vec![1.0, 1.0])?;
    println!("d(e1, diagonal) = {:.6}", projective_distance(&e1, &diag)?);
    let shear = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    let image = projective_action(&shear, &ProjectivePoint::axis(1, 2))?;
    println!("shear image of e2: {:?}", image.representative());

    let base = schrodinger_cocycle(&Potential::zero(1), 0.0, &TorusPoint::scalar(0.6180339887498949))?;
    let family = PerturbationFamily::Shear {
        base,
        noise: uniform_noise(),
    };
    let rng = RngStream::new(17, 0);
    let f = family.at(1.0)?;
    let gap = spectral_gap_estimate(&f, &rng, 5000, 16)?;
    println!("gap L1 − L2 = {:.4} ± {:.4}", gap.gap, gap.combined_std_error);

    let radii = [0.05, 0.1, 0.2, 0.4];
    let rows = h2_nested(&f, 2, &TorusPoint::scalar(0.1), &e1, &ProjectivePoint::axis(1, 2), &radii, &rng, 4000)?;
    for r in rows {
        println!("r = {:.2}: P = {:.4} [{:.4}, {:.4}]", r.r, r.probability, r.wilson_low, r.wilson_high);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
