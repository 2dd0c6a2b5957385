//! Acceptance criteria 1–12. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::error::Error as StdError;
use std::process::Command;
use std::time::Instant;

use mixed_cocycles::cocycle::{compose, invert, max_pointwise_gap, random_sl2_trig, QpCocycle};
use mixed_cocycles::experiments::{run, ExperimentConfig};
use mixed_cocycles::linalg::Matrix;
use mixed_cocycles::markov::{
    ldt_tail_estimate, mixing_rate_estimate, FiniteKernel, IidKernel, Initial, MeanSource, Observable,
};
use mixed_cocycles::measure::{wasserstein1, AtomicMeasure};
use mixed_cocycles::mixed::{brute_force_lognorm, cocycle_identity_check, lyapunov_spectrum, lyapunov_top, MixedCocycle};
use mixed_cocycles::rng::RngStream;
use mixed_cocycles::schrodinger::{build_model, Model, Noise, Potential, SchrodingerConfig};
use mixed_cocycles::torus::{mixing_dc_check, DiophantineParams, TorusPoint};
use serde_json::json;

type Check = Result<(bool, String), Box<dyn StdError>>;
type Criterion = (&'static str, fn() -> Check);

const GOLDEN: f64 = 0.6180339887498949;

fn m2(a: f64, b: f64, c: f64, d: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[a, b, c, d])
}

fn constant(alpha: f64, a: Matrix) -> QpCocycle {
    QpCocycle::constant(TorusPoint::scalar(alpha), a).unwrap()
}

fn diag_pair(p: f64) -> AtomicMeasure<QpCocycle> {
    AtomicMeasure::new(
        vec![constant(0.0, m2(2.0, 0.0, 0.0, 0.5)), constant(0.0, m2(0.5, 0.0, 0.0, 2.0))],
        vec![p, 1.0 - p],
    )
    .unwrap()
}

fn schrodinger(potential: Potential, energy: f64, noise: Noise) -> SchrodingerConfig {
    SchrodingerConfig {
        potential,
        energy,
        alpha: TorusPoint::scalar(GOLDEN),
        noise,
        epsilon: 1.0,
        model: Model::PerturbedPotential,
    }
}

fn anderson(energy: f64, weights: [f64; 2]) -> MixedCocycle {
    let rho = AtomicMeasure::new(vec![-1.0, 1.0], weights.to_vec()).unwrap();
    build_model(&schrodinger(Potential::zero(1), energy, Noise::Real(rho.into()))).unwrap()
}

fn c1_deterministic() -> Check {
    let f = MixedCocycle::from_atomic(AtomicMeasure::dirac(constant(0.1, m2(3.0, 0.0, 0.0, 1.0 / 3.0))))?;
    let rng = RngStream::new(1, 0);
    let top = lyapunov_top(&f, &rng, 1000, 4, 0)?;
    let spec = lyapunov_spectrum(&f, &rng, 1000, 4)?;
    let l = 3f64.ln();
    let err = (top.value - l).abs().max((spec[0].value - l).abs()).max((spec[1].value + l).abs());
    Ok((err < 1e-9, format!("max error {err:.2e} (tol 1e-9)")))
}

fn c2_zero_exponent() -> Check {
    let f = MixedCocycle::from_atomic(diag_pair(0.5))?;
    let est = lyapunov_top(&f, &RngStream::new(2, 0), 1_000_000, 32, 0)?;
    let tol = (3.0 * est.std_error).max(0.02);
    Ok((
        est.value.abs() <= tol,
        format!("L1 = {:.3e} ± {:.1e}, tol {tol:.3}", est.value, est.std_error),
    ))
}

fn c3_oracle_equivalence() -> Check {
    let rot = |t: f64| m2(t.cos(), -t.sin(), t.sin(), t.cos());
    let rho = AtomicMeasure::uniform(vec![-1.0, 1.0])?;
    let measures: Vec<(&str, MixedCocycle)> = vec![
        ("symmetric diagonal pair", MixedCocycle::from_atomic(diag_pair(0.5))?),
        ("biased diagonal pair", MixedCocycle::from_atomic(diag_pair(0.7))?),
        (
            "shear and rotation",
            MixedCocycle::from_atomic(AtomicMeasure::new(
                vec![constant(0.0, m2(1.0, 1.0, 0.0, 1.0)), constant(0.0, rot(1.0))],
                vec![0.4, 0.6],
            )?)?,
        ),
        (
            "single hyperbolic atom",
            MixedCocycle::from_atomic(AtomicMeasure::dirac(constant(0.3, m2(2.0, 1.0, 1.0, 1.0))))?,
        ),
        ("Anderson E=0", anderson(0.0, [0.5, 0.5])),
        ("Anderson E=1, biased", anderson(1.0, [0.3, 0.7])),
        (
            "cosine potential, two kicks",
            build_model(&schrodinger(Potential::cosine(1, 2.0), 0.5, Noise::Real(rho.into())))?,
        ),
    ];
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (i, (name, f)) in measures.iter().enumerate() {
        let oracle = brute_force_lognorm(f, 64, 14)?;
        let est = lyapunov_top(f, &RngStream::new(3, i as u64), 14, 20_000, 0)?;
        let tol = (3.0 * est.std_error).max(1e-3);
        let dev = (est.value - oracle).abs();
        worst = worst.max(dev / tol);
        if dev > tol {
            ok = false;
            println!("    {name}: estimate {:.5} vs oracle {oracle:.5} (tol {tol:.1e})", est.value);
        }
    }
    Ok((ok, format!("{} measures, worst deviation {worst:.2} of tolerance", measures.len())))
}

fn c4_positivity() -> Check {
    let text = json!({
        "experiment": "positivity-scan", "master_seed": 4,
        "model": {"potential": {"d": 1, "constant": 0.0, "modes": []}, "alpha": [GOLDEN],
                  "noise": {"kind": "real", "atoms": [-1.0, 1.0], "weights": [0.5, 0.5]},
                  "epsilon": 1.0, "model": "perturbed_potential"},
        "energies": [-2.0, -1.0, 0.0, 1.0, 2.0],
        "estimator": {"n": 100000, "samples": 32}
    });
    let out = run(&ExperimentConfig::from_json(&text.to_string())?)?;
    let t = out.table("positivity-scan").unwrap();
    let (l, se) = (t.floats("L1").unwrap(), t.floats("stderr").unwrap());
    let margin = l.iter().zip(&se).map(|(l, s)| (l - 3.0 * s) / l).fold(f64::INFINITY, f64::min);
    let lows: Vec<String> = l.iter().map(|x| format!("{x:.3}")).collect();
    Ok((
        l.iter().zip(&se).all(|(l, s)| l - 3.0 * s > 0.0),
        format!("L1 = [{}], min relative margin {margin:.3}", lows.join(", ")),
    ))
}

fn c5_group_axioms() -> Check {
    let mut rng = RngStream::new(5, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = 1 + rng.below(2);
        let (f, g, h) = (
            random_sl2_trig(&mut rng, d, 3),
            random_sl2_trig(&mut rng, d, 3),
            random_sl2_trig(&mut rng, d, 3),
        );
        let id = QpCocycle::identity(d, 2);
        let grid = if d == 1 { 64 } else { 8 };
        let gaps = [
            max_pointwise_gap(&compose(&compose(&f, &g)?, &h)?, &compose(&f, &compose(&g, &h)?)?, grid)?,
            max_pointwise_gap(&compose(&id, &f)?, &f, grid)?,
            max_pointwise_gap(&compose(&f, &id)?, &f, grid)?,
            max_pointwise_gap(&compose(&f, &invert(&f)?)?, &id, grid)?,
            max_pointwise_gap(&compose(&invert(&f)?, &f)?, &id, grid)?,
            max_pointwise_gap(&invert(&compose(&f, &g)?)?, &compose(&invert(&g)?, &invert(&f)?)?, grid)?,
        ];
        worst = gaps.iter().fold(worst, |w, g| w.max(*g));
    }
    Ok((worst < 1e-10, format!("200 triples, worst gap {worst:.2e} (tol 1e-10)")))
}

fn c6_cocycle_identity() -> Check {
    let f = anderson(0.3, [0.5, 0.5]);
    let mut rng = RngStream::new(6, 0);
    let mut worst: f64 = 0.0;
    for split in 0..100 {
        let n = 2 + rng.below(999);
        let k = 1 + rng.below(n - 1);
        worst = worst.max(cocycle_identity_check(&f, &RngStream::new(6, 1 + split), n, k, 4)?);
    }
    Ok((worst < 1e-8, format!("100 splits, worst relative deviation {worst:.2e} (tol 1e-8)")))
}

fn c7_ldt() -> Check {
    let coin = IidKernel {
        law: AtomicMeasure::uniform(vec![-1.0, 1.0])?.into(),
    };
    let init = Initial::Law(AtomicMeasure::uniform(vec![-1.0, 1.0])?.into());
    let phi = Observable::new(|x: &f64| *x, mixed_cocycles::markov::Regularity::Bounded { bound: 1.0 })?;
    let table = ldt_tail_estimate(&coin, &init, &phi, 0.5, &[100], 100_000, MeanSource::Supplied(0.0), &RngStream::new(7, 0))?;
    let row = &table.rows[0];
    let exact = common::coin_tail(100, 0.5);
    let tail_ok = row.wilson_low <= exact && exact <= row.wilson_high;

    let text = json!({
        "experiment": "ldt-rate", "master_seed": 7,
        "kernel": {"kind": "iid", "weights": [0.5, 0.5]}, "observable": [-1.0, 1.0],
        "mean": 0.0, "chains": 100000
    });
    let out = run(&ExperimentConfig::from_json(&text.to_string())?)?;
    let fits = out.table("ldt-rate-fit").unwrap();
    let mut rates_ok = true;
    let mut parts = Vec::new();
    for (eps, rate) in fits.floats("epsilon").unwrap().iter().zip(fits.floats("rate").unwrap()) {
        let oracle = common::coin_cramer_rate(*eps);
        let rel = (rate - oracle).abs() / oracle;
        rates_ok &= rel <= 0.25;
        parts.push(format!("ε={eps}: {rate:.5} vs {oracle:.5} ({:+.0}%)", 100.0 * (rate / oracle - 1.0)));
    }
    Ok((
        tail_ok && rates_ok,
        format!(
            "tail {} in [{:.1e}, {:.1e}] vs exact {exact:.2e}; {}",
            row.tail,
            row.wilson_low,
            row.wilson_high,
            parts.join("; ")
        ),
    ))
}

fn c8_mixing_rate() -> Check {
    let mut rng = RngStream::new(8, 0);
    let mut ok = true;
    let mut parts = Vec::new();
    for _ in 0..5 {
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| {
                let r: Vec<f64> = (0..5).map(|_| rng.uniform_in(0.05, 1.0)).collect();
                let s: f64 = r.iter().sum();
                r.iter().map(|x| x / s).collect()
            })
            .collect();
        let k = FiniteKernel::new(rows.clone())?;
        let nu = k.stationary()?;
        let nu = AtomicMeasure::new((0..5).collect(), nu)?;
        let phis = (0..5)
            .map(|i| Observable::from_values((0..5).map(|j| (i == j) as u8 as f64).collect()))
            .collect::<Result<Vec<_>, _>>()?;
        let table = mixing_rate_estimate(&k, &phis, 80, &nu)?;
        let fitted = table.geometric_rate().unwrap_or(f64::NAN);
        let oracle = common::second_eigen_modulus(&rows);
        ok &= (fitted - oracle).abs() <= 0.1 * oracle;
        parts.push(format!("{fitted:.4}/{oracle:.4}"));
    }
    Ok((ok, format!("fitted/|λ₂| over 5 kernels: {}", parts.join(", "))))
}

fn c9_wasserstein() -> Check {
    let mut rng = RngStream::new(9, 0);
    let random_measure = |rng: &mut RngStream| {
        let n = 1 + rng.below(8);
        let atoms: Vec<TorusPoint> = (0..n).map(|_| TorusPoint::haar(2, rng)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.1, 1.0)).collect();
        let s: f64 = w.iter().sum();
        AtomicMeasure::new(atoms, w.iter().map(|x| x / s).collect()).unwrap()
    };
    let mut worst_lp: f64 = 0.0;
    for _ in 0..100 {
        let (mu, nu) = (random_measure(&mut rng), random_measure(&mut rng));
        worst_lp = worst_lp.max((wasserstein1(&mu, &nu)? - common::w1_lp(&mu, &nu)).abs());
    }
    let mut worst_axiom: f64 = 0.0;
    for _ in 0..100 {
        let (a, b, c) = (random_measure(&mut rng), random_measure(&mut rng), random_measure(&mut rng));
        let (ab, ba, bc, ac) = (wasserstein1(&a, &b)?, wasserstein1(&b, &a)?, wasserstein1(&b, &c)?, wasserstein1(&a, &c)?);
        worst_axiom = worst_axiom
            .max(wasserstein1(&a, &a)?)
            .max((ab - ba).abs())
            .max(ac - ab - bc);
    }
    Ok((
        worst_lp <= 1e-9 && worst_axiom <= 1e-9,
        format!("LP gap {worst_lp:.1e}, axiom violation {worst_axiom:.1e} (tol 1e-9)"),
    ))
}

fn c10_stability() -> Check {
    let mut eps = vec![0.0];
    eps.extend((1..=8).map(|k| 2f64.powi(-k)));
    let text = json!({
        "experiment": "stability-curve", "master_seed": 10,
        "model": {"potential": {"d": 1, "constant": 0.0, "modes": [{"k": [1], "cos": 5.0, "sin": 0.0}]},
                  "energy": 0.0, "alpha": [GOLDEN],
                  "noise": {"kind": "uniform_interval", "lo": -1.0, "hi": 1.0},
                  "model": "perturbed_potential"},
        "epsilons": eps,
        "estimator": {"n": 100000, "samples": 32}
    });
    let out = run(&ExperimentConfig::from_json(&text.to_string())?)?;
    let t = out.table("stability-curve").unwrap();
    let (d, se) = (t.floats("abs_delta").unwrap(), t.floats("delta_stderr").unwrap());
    let l0 = t.floats("L1").unwrap()[0];
    let end_ok = d[8] < (5.0 * se[8]).max(0.05);
    let mono_ok = (1..8).all(|k| d[k + 1] <= d[k] + 2.0 * se[k + 1].max(se[k]));
    let ds: Vec<String> = d[1..].iter().map(|x| format!("{x:.1e}")).collect();
    Ok((
        end_ok && mono_ok && l0 > 0.5,
        format!("L1(0) = {l0:.4}, |ΔL1| for k=1..8: [{}]", ds.join(", ")),
    ))
}

fn c11_determinism() -> Check {
    let holder_base = diag_pair(0.5);
    let schro = json!({"potential": {"d": 1, "constant": 0.0, "modes": []}, "alpha": [GOLDEN],
        "noise": {"kind": "real", "atoms": [-1.0, 1.0], "weights": [0.5, 0.5]}, "model": "perturbed_potential"});
    let est = json!({"n": 2000, "samples": 8});
    let configs = [
        json!({"experiment": "lyapunov", "master_seed": 1, "model": {"schrodinger": schro}, "estimator": est, "spectrum": true}),
        json!({"experiment": "positivity-scan", "master_seed": 1, "model": schro, "energies": [-1.0, 0.0, 1.0], "estimator": est}),
        json!({"experiment": "stability-curve", "master_seed": 1, "model": schro, "epsilons": [0.0, 0.5, 0.25], "estimator": est}),
        json!({"experiment": "holder-scan", "master_seed": 1, "base": holder_base, "from": 1, "to": 0,
               "radii": [0.0, 0.05, 0.1], "estimator": est}),
        json!({"experiment": "ldt-rate", "master_seed": 1, "kernel": {"kind": "finite", "rows": [[0.7, 0.3], [0.4, 0.6]]},
               "observable": [-1.0, 1.0], "epsilons": [0.2, 0.3], "chains": 2000}),
        json!({"experiment": "mixing-check", "master_seed": 1,
               "frequency_law": {"atoms": [[0.0], [GOLDEN]], "weights": [0.5, 0.5]},
               "kernel": {"kind": "finite", "rows": [[0.7, 0.3], [0.4, 0.6]]}}),
        json!({"experiment": "clt-check", "master_seed": 1, "kernel": {"kind": "iid", "weights": [0.5, 0.5]},
               "observable": [-1.0, 1.0], "n": 100, "chains": 2000}),
        json!({"experiment": "h2-scan", "master_seed": 1, "potential": {"d": 1, "constant": 0.0, "modes": []},
               "alpha": [GOLDEN], "noise": {"kind": "uniform_interval", "lo": -1.0, "hi": 1.0}, "k0": 2,
               "theta": [0.1], "p": [1.0, 0.0], "q": [0.0, 1.0], "radii": [0.1, 0.3], "epsilons": [0.5, 1.0], "chains": 1000}),
    ];
    let dir = tempfile::tempdir()?;
    let mut ok = true;
    let mut files = 0;
    for (i, cfg) in configs.iter().enumerate() {
        let path = dir.path().join(format!("c{i}.json"));
        std::fs::write(&path, cfg.to_string())?;
        let name = cfg["experiment"].as_str().unwrap();
        let mut outputs = Vec::new();
        for (run_id, threads) in [(0, "1"), (1, "8"), (2, "8")] {
            let out = dir.path().join(format!("out{i}_{run_id}"));
            let status = Command::new(env!("CARGO_BIN_EXE_mixcoc"))
                .args([name, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads])
                .output()?;
            if !status.status.success() {
                println!("    {name}: {}", String::from_utf8_lossy(&status.stderr).trim());
                ok = false;
            }
            let mut csvs: Vec<_> = std::fs::read_dir(&out)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            csvs.sort();
            outputs.push(csvs.iter().map(std::fs::read).collect::<Result<Vec<_>, _>>()?);
        }
        files += outputs[0].len();
        if outputs[0].is_empty() || outputs.iter().any(|o| *o != outputs[0]) {
            println!("    {name}: CSV bytes differ between runs");
            ok = false;
        }
    }
    Ok((ok, format!("8 experiments, {files} CSV files, threads 1/8/8 byte-identical")))
}

fn c12_mixing_dc() -> Check {
    let params = DiophantineParams::new(0.1, 2.0, 100)?;
    let dirac_fail = [0.0, 0.5, GOLDEN, 2f64.sqrt() - 1.0, 0.123456789]
        .iter()
        .map(|&a| mixing_dc_check(&AtomicMeasure::dirac(TorusPoint::scalar(a)), &params))
        .collect::<Result<Vec<_>, _>>()?
        .iter()
        .all(|r| !r.pass);
    let golden = mixing_dc_check(&AtomicMeasure::uniform(vec![TorusPoint::scalar(0.0), TorusPoint::scalar(GOLDEN)])?, &params)?;
    let periodic = mixing_dc_check(&AtomicMeasure::uniform(vec![TorusPoint::scalar(0.0), TorusPoint::scalar(0.5)])?, &params)?;
    let ok = dirac_fail && golden.pass && !periodic.pass && periodic.worst_k == vec![2];
    Ok((
        ok,
        format!(
            "diracs fail: {dirac_fail}; golden pass: {} (margin {:.3e}); periodic fails at k={:?}",
            golden.pass, golden.margin, periodic.worst_k
        ),
    ))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("deterministic exponents", c1_deterministic),
        ("zero-exponent symmetry", c2_zero_exponent),
        ("oracle equivalence", c3_oracle_equivalence),
        ("positivity scan", c4_positivity),
        ("group axioms", c5_group_axioms),
        ("cocycle identity", c6_cocycle_identity),
        ("LDT oracle", c7_ldt),
        ("mixing-rate oracle", c8_mixing_rate),
        ("Wasserstein oracle", c9_wasserstein),
        ("stability curve", c10_stability),
        ("determinism", c11_determinism),
        ("mixing-DC checker", c12_mixing_dc),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += !pass as usize;
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.1}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
