//! Experiment runners. Each returns its tables and a JSON summary; file
//! output lives in the parent module so runners stay free of IO.
//!
//! Every runner draws from the root stream `RngStream::new(master_seed, 0)`.
//! Sweeps over a perturbation parameter reuse that stream for every grid
//! value (common random numbers); sweeps over energies give energy i the
//! child stream `derive(i)`, recorded in the `stream` column.

use serde_json::{json, Value};

use crate::bundle::{h2_nested, PerturbationFamily};
use crate::error::{Error, Result};
use crate::markov::{clt_check, ldt_rate_fit, ldt_tail_estimate, mixing_rate_estimate, MeanSource, Observable};
use crate::measure::{wasserstein1, AtomicMeasure, Metric};
use crate::mixed::{lyapunov_spectrum, lyapunov_top_with, MixedCocycle};
use crate::record::format_sig17;
use crate::rng::RngStream;
use crate::schrodinger::energy_sweep;
use crate::stats::linear_fit;
use crate::torus::mixing_dc_check;

use super::config::*;

/// A CSV table with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&'static str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    /// Column `name` parsed as floats.
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?.iter().map(|s| s.parse().ok()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub summary: Value,
}

impl RunOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

fn f(x: f64) -> String {
    format_sig17(x)
}

fn u(x: impl ToString) -> String {
    x.to_string()
}

/// Slope with a 95% normal band, or null when fewer than 3 points.
fn slope_summary(x: &[f64], y: &[f64]) -> Value {
    match (x.len() >= 3).then(|| linear_fit(x, y)).flatten() {
        Some(fit) => json!({
            "slope": fit.slope,
            "slope_stderr": fit.slope_stderr,
            "band": [fit.slope - 1.96 * fit.slope_stderr, fit.slope + 1.96 * fit.slope_stderr],
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "points": x.len(),
        }),
        None => Value::Null,
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let rng = RngStream::new(cfg.master_seed, 0);
    let seed = cfg.master_seed;
    match &cfg.experiment {
        Experiment::Lyapunov(c) => lyapunov(c, seed, &rng),
        Experiment::PositivityScan(c) => positivity_scan(c, seed, &rng),
        Experiment::StabilityCurve(c) => stability_curve(c, seed, &rng),
        Experiment::HolderScan(c) => holder_scan(c, seed, &rng),
        Experiment::LdtRate(c) => ldt_rate(c, seed, &rng),
        Experiment::MixingCheck(c) => mixing_check(c),
        Experiment::CltCheck(c) => clt(c, seed, &rng),
        Experiment::H2Scan(c) => h2_scan(c, seed, &rng),
    }
}

fn lyapunov(c: &LyapunovConfig, seed: u64, rng: &RngStream) -> Result<RunOutput> {
    let model = c.model.build()?;
    let p = &c.estimator;
    let estimates = if c.spectrum {
        lyapunov_spectrum(&model, rng, p.n, p.samples)?
    } else {
        vec![lyapunov_top_with(&model, rng, p)?]
    };
    let mut t = Table::new(
        "lyapunov",
        &["index", "exponent", "std_error", "n", "samples", "burn_in", "seed"],
    );
    for (i, e) in estimates.iter().enumerate() {
        t.push(vec![
            u(i + 1),
            f(e.value),
            f(e.std_error),
            u(e.n_iterates),
            u(e.n_samples),
            u(p.burn_in),
            u(seed),
        ]);
    }
    let summary = json!({
        "exponents": estimates.iter().map(|e| e.value).collect::<Vec<_>>(),
        "std_errors": estimates.iter().map(|e| e.std_error).collect::<Vec<_>>(),
    });
    Ok(RunOutput {
        tables: vec![t],
        summary,
    })
}

fn positivity_scan(c: &PositivityConfig, seed: u64, rng: &RngStream) -> Result<RunOutput> {
    let cfg = c.model.to_config()?;
    let rows = energy_sweep(&cfg, &c.energies, &c.estimator, rng)?;
    let mut t = Table::new(
        "positivity-scan",
        &["E", "L1", "stderr", "n", "samples", "seed", "stream", "epsilon", "verdict"],
    );
    let mut positive = 0;
    for (i, r) in rows.iter().enumerate() {
        let e = &r.estimate;
        let ok = e.value - 3.0 * e.std_error > 0.0;
        positive += ok as usize;
        t.push(vec![
            f(r.energy),
            f(e.value),
            f(e.std_error),
            u(e.n_iterates),
            u(e.n_samples),
            u(seed),
            u(i),
            f(cfg.epsilon),
            u(if ok { "positive" } else { "not-established" }),
        ]);
    }
    let summary = json!({"rows": rows.len(), "positive": positive, "all_positive": positive == rows.len()});
    Ok(RunOutput {
        tables: vec![t],
        summary,
    })
}

fn stability_curve(c: &StabilityConfig, seed: u64, rng: &RngStream) -> Result<RunOutput> {
    let base = c.model.to_config()?;
    let estimates = c
        .epsilons
        .iter()
        .map(|&eps| lyapunov_top_with(&crate::schrodinger::build_model(&base.with_epsilon(eps))?, rng, &c.estimator))
        .collect::<Result<Vec<_>>>()?;
    let zero = c.epsilons.iter().position(|&e| e == 0.0).expect("validated");
    let l0 = estimates[zero];
    let mut t = Table::new(
        "stability-curve",
        &["epsilon", "L1", "stderr", "abs_delta", "delta_stderr", "n", "samples", "energy", "seed"],
    );
    let mut deltas = Vec::new();
    for (&eps, e) in c.epsilons.iter().zip(&estimates) {
        let d = (e.value - l0.value).abs();
        let se = if eps == 0.0 { 0.0 } else { e.std_error.hypot(l0.std_error) };
        if eps > 0.0 {
            deltas.push((eps, d, se));
        }
        t.push(vec![
            f(eps),
            f(e.value),
            f(e.std_error),
            f(d),
            f(se),
            u(e.n_iterates),
            u(e.n_samples),
            f(base.energy),
            u(seed),
        ]);
    }
    deltas.sort_by(|a, b| a.0.total_cmp(&b.0));
    let convergence = deltas.iter().take(3).map(|d| d.1).fold(0.0, f64::max);
    // weak-Hölder modulus check: log|ΔL| against log ε
    let (x, y): (Vec<f64>, Vec<f64>) = deltas.iter().filter(|d| d.1 > 0.0).map(|d| (d.0.ln(), d.1.ln())).unzip();
    let summary = json!({
        "l1_zero": l0.value,
        "l1_zero_stderr": l0.std_error,
        "convergence": convergence,
        "modulus_fit": slope_summary(&x, &y),
    });
    Ok(RunOutput {
        tables: vec![t],
        summary,
    })
}

/// Base measure with mass t moved from atom `from` to atom `to`.
pub fn shift_weight<T: Metric + Clone>(
    base: &AtomicMeasure<T>,
    from: usize,
    to: usize,
    t: f64,
) -> Result<AtomicMeasure<T>> {
    if t == 0.0 {
        return Ok(base.clone());
    }
    let mut w = base.weights().to_vec();
    if !(t > 0.0 && t < w[from]) {
        return Err(Error::InvalidParameter(format!(
            "moving {t} exceeds the weight {} of atom {from}",
            w[from]
        )));
    }
    w[from] -= t;
    w[to] += t;
    AtomicMeasure::new(base.atoms().to_vec(), w)
}

fn holder_scan(c: &HolderConfig, seed: u64, rng: &RngStream) -> Result<RunOutput> {
    let gap = c.base.atoms()[c.from].distance(&c.base.atoms()[c.to]);
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::Degenerate("atoms `from` and `to` are at distance 0".into()));
    }
    let l0 = lyapunov_top_with(&MixedCocycle::from_atomic(c.base.clone())?, rng, &c.estimator)?;
    let mut t = Table::new(
        "holder-scan",
        &["delta", "w1", "mass_moved", "L1", "stderr", "abs_delta_L1", "n", "samples", "seed"],
    );
    let mut fit_pts = Vec::new();
    for &delta in &c.radii {
        let moved = delta / gap;
        let nu = shift_weight(&c.base, c.from, c.to, moved)?;
        let w1 = wasserstein1(&c.base, &nu)?;
        let e = lyapunov_top_with(&MixedCocycle::from_atomic(nu)?, rng, &c.estimator)?;
        let dl = (e.value - l0.value).abs();
        if delta > 0.0 && dl > 0.0 {
            fit_pts.push((delta.ln(), dl.ln()));
        }
        t.push(vec![
            f(delta),
            f(w1),
            f(moved),
            f(e.value),
            f(e.std_error),
            f(dl),
            u(e.n_iterates),
            u(e.n_samples),
            u(seed),
        ]);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = fit_pts.into_iter().unzip();
    let summary = json!({
        "l1_base": l0.value,
        "atom_distance": gap,
        "holder_fit": slope_summary(&x, &y),
    });
    Ok(RunOutput {
        tables: vec![t],
        summary,
    })
}

fn ldt_rate(c: &LdtConfig, seed: u64, rng: &RngStream) -> Result<RunOutput> {
    let k = c.kernel.build()?;
    let init = c.initial.build(&k)?;
    let phi = Observable::from_values(c.observable.clone())?;
    let mean = c.mean.map_or(MeanSource::Auto, MeanSource::Supplied);
    let mut tails = Table::new(
        "ldt-rate",
        &["epsilon", "n", "exceedances", "chains", "tail", "wilson_low", "wilson_high", "mean", "seed"],
    );
    let mut fits = Table::new(
        "ldt-rate-fit",
        &["epsilon", "rate", "slope_stderr", "intercept", "fit_quality", "rows_used", "seed"],
    );
    let mut log_eps = Vec::new();
    let mut log_rate = Vec::new();
    for &eps in &c.epsilons {
        let table = ldt_tail_estimate(&k, &init, &phi, eps, &c.lengths(eps), c.chains, mean, rng)?;
        for r in &table.rows {
            tails.push(vec![
                f(eps),
                u(r.n),
                u(r.exceedances),
                u(r.chains),
                f(r.tail),
                f(r.wilson_low),
                f(r.wilson_high),
                f(table.mean),
                u(seed),
            ]);
        }
        let fit = ldt_rate_fit(&table)?;
        let rate = -fit.slope;
        fits.push(vec![
            f(eps),
            f(rate),
            f(fit.slope_stderr),
            f(fit.intercept),
            f(fit.fit_quality),
            u(fit.rows_used),
            u(seed),
        ]);
        if rate > 0.0 {
            log_eps.push(eps.ln());
            log_rate.push(rate.ln());
        }
    }
    let expected = match (&c.kernel, c.mixing_power) {
        (_, Some(p)) => Some(2.0 + 1.0 / p),
        (KernelSpec::Iid { .. }, None) => Some(2.0),
        _ => None,
    };
    let summary = json!({
        "exponent_fit": slope_summary(&log_eps, &log_rate),
        "expected_exponent": expected,
    });
    Ok(RunOutput {
        tables: vec![tails, fits],
        summary,
    })
}

fn mixing_check(c: &MixingConfig) -> Result<RunOutput> {
    let mut tables = Vec::new();
    let mut summary = serde_json::Map::new();
    if let Some(mu) = &c.frequency_law {
        let report = mixing_dc_check(mu, &c.diophantine)?;
        let mut t = Table::new(
            "mixing-check",
            &["pass", "margin", "worst_k", "gamma", "tau", "cutoff"],
        );
        let k = report.worst_k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        t.push(vec![
            u(report.pass),
            f(report.margin),
            k,
            f(c.diophantine.gamma),
            f(c.diophantine.tau),
            u(report.cutoff),
        ]);
        tables.push(t);
        summary.insert("mixing_dc".into(), serde_json::to_value(&report)?);
    }
    if let Some(spec) = &c.kernel {
        let k = spec.build()?;
        let nu = stationary_measure(&k)?;
        let phis = if c.observables.is_empty() {
            (0..k.states())
                .map(|i| Observable::from_values((0..k.states()).map(|j| (i == j) as u8 as f64).collect()))
                .collect::<Result<Vec<_>>>()?
        } else {
            c.observables
                .iter()
                .map(|v| Observable::from_values(v.clone()))
                .collect::<Result<Vec<_>>>()?
        };
        let table = mixing_rate_estimate(&k, &phis, c.n_max, &nu)?;
        let mut t = Table::new("mixing-decay", &["n", "deviation"]);
        for &(n, d) in &table.rows {
            t.push(vec![u(n), f(d)]);
        }
        tables.push(t);
        summary.insert(
            "decay".into(),
            json!({
                "geometric_rate": table.geometric_rate(),
                "power_exponent": table.power_exponent(),
                "mixing": table.mixing,
            }),
        );
    }
    Ok(RunOutput {
        tables,
        summary: Value::Object(summary),
    })
}

fn clt(c: &CltConfig, seed: u64, rng: &RngStream) -> Result<RunOutput> {
    let k = c.kernel.build()?;
    let init = c.initial.build(&k)?;
    let phi = Observable::from_values(c.observable.clone())?;
    let mean = c.mean.map_or(MeanSource::Auto, MeanSource::Supplied);
    let r = clt_check(&k, &init, &phi, c.n, c.chains, mean, rng)?;
    let mut t = Table::new(
        "clt-check",
        &[
            "n",
            "chains",
            "mean",
            "z_mean",
            "z_variance",
            "z_skewness",
            "z_excess_kurtosis",
            "ks_distance",
            "seed",
        ],
    );
    t.push(vec![
        u(r.n),
        u(r.chains),
        f(r.mean),
        f(r.moments.mean),
        f(r.moments.variance),
        f(r.moments.skewness),
        f(r.moments.excess_kurtosis),
        f(r.ks_distance),
        u(seed),
    ]);
    let summary = json!({
        "variance": r.moments.variance,
        "ks_distance": r.ks_distance,
        // rough 1% KS critical value
        "ks_critical": 1.63 / (r.chains as f64).sqrt(),
    });
    Ok(RunOutput {
        tables: vec![t],
        summary,
    })
}

fn h2_scan(c: &H2Config, seed: u64, rng: &RngStream) -> Result<RunOutput> {
    let family = PerturbationFamily::Shear {
        base: c.base()?,
        noise: c.noise()?,
    };
    let (theta, p, q) = c.points()?;
    let mut t = Table::new(
        "h2-scan",
        &[
            "epsilon",
            "r",
            "r_over_epsilon",
            "probability",
            "hits",
            "chains",
            "wilson_low",
            "wilson_high",
            "k0",
            "seed",
        ],
    );
    let mut x = Vec::new();
    let mut y = Vec::new();
    for &eps in &c.epsilons {
        let f_eps = family.at(eps)?;
        for est in h2_nested(&f_eps, c.k0, &theta, &p, &q, &c.radii, rng, c.chains)? {
            let ratio = est.r / eps;
            if est.hits > 0 {
                x.push(ratio.ln());
                y.push(est.probability.ln());
            }
            t.push(vec![
                f(eps),
                f(est.r),
                f(ratio),
                f(est.probability),
                u(est.hits),
                u(est.chains),
                f(est.wilson_low),
                f(est.wilson_high),
                u(c.k0),
                u(seed),
            ]);
        }
    }
    let summary = json!({"vartheta_fit": slope_summary(&x, &y)});
    Ok(RunOutput {
        tables: vec![t],
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::QpCocycle;
    use crate::linalg::Matrix;
    use crate::torus::TorusPoint;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    fn diag_pair() -> AtomicMeasure<QpCocycle> {
        let a = QpCocycle::constant(TorusPoint::scalar(0.0), Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])).unwrap();
        let b = QpCocycle::constant(TorusPoint::scalar(0.0), Matrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0])).unwrap();
        AtomicMeasure::uniform(vec![a, b]).unwrap()
    }

    fn anderson(energies: &str, atoms: &str, weights: &str) -> String {
        format!(
            r#"{{"experiment": "positivity-scan", "master_seed": 11,
            "model": {{"potential": {{"d": 1, "constant": 0.0, "modes": []}},
                      "alpha": [0.6180339887498949],
                      "noise": {{"kind": "real", "atoms": {atoms}, "weights": {weights}}},
                      "model": "perturbed_potential"}},
            "energies": {energies}, "estimator": {{"n": 4000, "samples": 16}}}}"#
        )
    }

    #[test]
    fn weight_shift_has_exact_w1() {
        let base = diag_pair();
        let d = base.atoms()[0].distance(&base.atoms()[1]);
        for delta in [1e-3, 0.01, 0.1] {
            let nu = shift_weight(&base, 1, 0, delta / d).unwrap();
            assert!((wasserstein1(&base, &nu).unwrap() - delta).abs() < 1e-9);
        }
        assert!(shift_weight(&base, 1, 0, 0.5).is_err());
    }

    #[test]
    fn positivity_scan_rows_and_verdicts() {
        let out = run(&cfg(&anderson("[-2.0, -1.0, 0.0, 1.0, 2.0]", "[-1.0, 1.0]", "[0.5, 0.5]"))).unwrap();
        let t = out.table("positivity-scan").unwrap();
        assert_eq!(t.rows.len(), 5);
        assert!(t.column("verdict").unwrap().iter().all(|v| *v == "positive"));
        // v ≡ 0, ρ = δ₀, E = 0 is elliptic
        let out = run(&cfg(&anderson("[0.0]", "[0.0]", "[1.0]"))).unwrap();
        assert_eq!(out.table("positivity-scan").unwrap().column("verdict").unwrap(), vec!["not-established"]);
    }

    #[test]
    fn holder_scan_zero_radius_is_exact() {
        let text = serde_json::json!({
            "experiment": "holder-scan", "master_seed": 5,
            "base": diag_pair(), "from": 1, "to": 0,
            "radii": [0.0, 0.02, 0.05, 0.1, 0.2],
            "estimator": {"n": 20000, "samples": 16}
        })
        .to_string();
        let out = run(&cfg(&text)).unwrap();
        let t = out.table("holder-scan").unwrap();
        let dl = t.floats("abs_delta_L1").unwrap();
        assert_eq!(dl[0], 0.0);
        let (delta, w1) = (t.floats("delta").unwrap(), t.floats("w1").unwrap());
        for (a, b) in delta.iter().zip(&w1) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(dl.windows(2).all(|w| w[1] > w[0]), "{dl:?}");
        assert!(out.summary["holder_fit"]["slope"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn exponent_recovered_from_exact_rates() {
        let eps = [0.1f64, 0.2, 0.3];
        let (x, y): (Vec<f64>, Vec<f64>) = eps.iter().map(|e| (e.ln(), (0.7 * e.powf(2.5)).ln())).unzip();
        let fit = slope_summary(&x, &y);
        assert!((fit["slope"].as_f64().unwrap() - 2.5).abs() < 1e-6);
        assert!((fit["intercept"].as_f64().unwrap() - 0.7f64.ln()).abs() < 1e-6);
        assert!(slope_summary(&x[..2], &y[..2]).is_null());
    }

    #[test]
    fn ldt_zero_tails_error() {
        let text = r#"{"experiment": "ldt-rate", "master_seed": 2,
            "kernel": {"kind": "iid", "weights": [0.5, 0.5]}, "observable": [0.0, 1.0],
            "epsilons": [0.45], "chains": 200}"#;
        assert!(matches!(run(&cfg(text)), Err(Error::TailsVanish)));
    }

    #[test]
    fn mixing_check_verdicts() {
        let text = r#"{"experiment": "mixing-check", "master_seed": 0,
            "frequency_law": {"atoms": [[0.0], [0.6180339887498949]], "weights": [0.5, 0.5]},
            "kernel": {"kind": "finite", "rows": [[0.9, 0.1], [0.2, 0.8]]}}"#;
        let out = run(&cfg(text)).unwrap();
        assert_eq!(out.summary["mixing_dc"]["pass"], true);
        let rate = out.summary["decay"]["geometric_rate"].as_f64().unwrap();
        assert!((rate - 0.7).abs() < 1e-6, "{rate}");
        let dirac = text.replace(r#"[[0.0], [0.6180339887498949]], "weights": [0.5, 0.5]"#, r#"[[0.3]], "weights": [1.0]"#);
        assert_eq!(run(&cfg(&dirac)).unwrap().summary["mixing_dc"]["pass"], false);
    }

    #[test]
    fn clt_and_h2_run() {
        let text = r#"{"experiment": "clt-check", "master_seed": 9,
            "kernel": {"kind": "iid", "weights": [0.5, 0.5]}, "observable": [-1.0, 1.0],
            "n": 200, "chains": 4000}"#;
        let out = run(&cfg(text)).unwrap();
        assert!((out.summary["variance"].as_f64().unwrap() - 1.0).abs() < 0.1);
        let text = r#"{"experiment": "h2-scan", "master_seed": 9,
            "potential": {"d": 1, "constant": 0.0, "modes": []}, "alpha": [0.6180339887498949],
            "noise": {"kind": "uniform_interval", "lo": -1.0, "hi": 1.0},
            "k0": 2, "theta": [0.1], "p": [1.0, 0.0], "q": [0.0, 1.0],
            "radii": [0.05, 0.1, 0.2, 0.4], "epsilons": [0.5, 1.0], "chains": 2000}"#;
        let out = run(&cfg(text)).unwrap();
        let t = out.table("h2-scan").unwrap();
        assert_eq!(t.rows.len(), 8);
        let p = t.floats("probability").unwrap();
        assert!(p[..4].windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn tables_ignore_thread_count() {
        let c = cfg(&anderson("[-1.0, 0.5]", "[-1.0, 1.0]", "[0.5, 0.5]"));
        let in_pool = |n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            pool.install(|| run(&c).unwrap().tables)
        };
        assert_eq!(in_pool(1), in_pool(4));
    }
}
