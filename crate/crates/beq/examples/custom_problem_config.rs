//! Define a problem inline through the JSON config schema (no code), run
//! it, and emit the CSV trace — the same path the `beq run --config` command
//! takes.
//!
//! ```sh
//! cargo run --release --example custom_problem_config
//! ```

use beq::cli::{execute_run, ExperimentConfig};

fn main() -> Result<(), beq::Error> {
    let json = r#"{
        "schema_version": 1,
        "problem": {
            "name": "tilted-quadratic",
            "set": {"kind": "box", "lower": [-2.0, -2.0], "upper": [2.0, 2.0]},
            "lower": {"kind": "difference", "dim": 2,
                      "phi": {"kind": "shifted_quadratic", "center": [0.5, -0.25]}},
            "upper": {"kind": "affine",
                      "a": [[3.0, 1.0], [1.0, 2.0]],
                      "b": [[1.0, 0.0], [0.0, 1.0]],
                      "offset": [0.2, -0.1]},
            "x0": [1.5, 1.5],
            "x1": [1.5, 1.5],
            "lower_solution_set": {"kind": "box", "lower": [0.5, -0.25], "upper": [0.5, -0.25]},
            "reference": [0.5, -0.25]
        },
        "method": "ipsa",
        "schedule": {"lambda": "1/n", "beta": "1+n", "alpha": "0.1-1/n", "clamp_alpha": true},
        "budget": 300,
        "stop": {"step_tol": 1e-12},
        "seed": 0,
        "diagnostics": {"record_ep_residual": true, "inner_tol": 1e-10, "inner_budget": 100000}
    }"#;

    let mut config: ExperimentConfig =
        serde_json::from_str(json).map_err(|e| beq::Error::Config(e.to_string()))?;
    let out = std::env::temp_dir().join("beq_custom_problem.csv");
    config.output = Some(out.clone());

    let artifacts = execute_run(&config)?;
    println!("{}", artifacts.regime.summary());
    let last = artifacts.trace.last();
    println!(
        "finished at n = {}: err to ref {:.3e}, lower-level residual {:.3e}",
        last.n,
        last.err_to_ref.unwrap(),
        last.ep_residual.unwrap()
    );
    println!("trace written to {}", out.display());
    let head: Vec<String> = std::fs::read_to_string(&out)
        .map_err(beq::Error::Io)?
        .lines()
        .take(3)
        .map(String::from)
        .collect();
    println!("first lines:\n{}", head.join("\n"));
    Ok(())
}
