// Driving an experiment from a JSON config, as the `mixcoc` binary does,
// and reading back the CSV it writes.

use mixed_cocycles::experiments::{execute, ExperimentConfig};
use mixed_cocycles::Result;

const CONFIG: &str = r#"{
    "experiment": "stability-curve",
    "master_seed": 10,
    "model": {
        "potential": {"d": 1, "constant": 0.0, "modes": [{"k": [1], "cos": 5.0, "sin": 0.0}]},
        "alpha": [0.6180339887498949],
        "noise": {"kind": "uniform_interval", "lo": -1.0, "hi": 1.0},
        "model": "perturbed_potential"
    },
    "epsilons": [0.0, 0.5, 0.25, 0.125, 0.0625],
    "estimator": {"n": 5000, "samples": 8}
}"#;

pub fn run_example() -> Result<()> {
    let mut cfg = ExperimentConfig::from_json(CONFIG)?;
    cfg.output = std::env::temp_dir().join(format!("mixcoc-example-{}", std::process::id()));
    let (out, files) = execute(&cfg)?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    print!("{}", std::fs::read_to_string(&files[0])?);
    println!("summary: {}", out.summary);
    std::fs::remove_dir_all(&cfg.output)?;
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
