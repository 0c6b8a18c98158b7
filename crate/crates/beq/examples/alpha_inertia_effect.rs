//! Explore inertia weights: zero, the clamped reference schedule, a constant
//! near the admissible ceiling, and a constant above it (clamping disabled),
//! with the regime verdict for each choice.
//!
//! ```sh
//! cargo run --release --example alpha_inertia_effect
//! ```

use beq::algorithms::{alpha_ceiling, run, validate_regime, Method, RunOptions, Schedule};
use beq::problems::toy_interval;

fn main() -> Result<(), beq::Error> {
    let problem = toy_interval()?;
    println!("inertia ceiling: {:.10}", alpha_ceiling());
    println!(
        "{:>24} {:>14} {:>8} {:>8}",
        "alpha schedule", "err@500", "weak", "strong"
    );

    let cases: Vec<(&str, Schedule)> = vec![
        (
            "0",
            Schedule::new(|n| 1.0 / n as f64, |n| 1.0 + n as f64, |_| 0.0, true),
        ),
        ("clamp(0.1 - 1/n)", Schedule::benchmark_default()),
        (
            "0.18 constant",
            Schedule::new(|n| 1.0 / n as f64, |n| 1.0 + n as f64, |_| 0.18, true),
        ),
        (
            "0.3 constant, no clamp",
            Schedule::new(|n| 1.0 / n as f64, |n| 1.0 + n as f64, |_| 0.3, false),
        ),
    ];
    for (label, schedule) in cases {
        let trace = run(
            &problem,
            Method::Ipsa,
            &schedule,
            &RunOptions {
                budget: 500,
                ..RunOptions::default()
            },
        )?;
        let regime = validate_regime(&schedule, 2048)?;
        println!(
            "{:>24} {:>14.6e} {:>8} {:>8}",
            label,
            trace.final_err().unwrap(),
            regime.weak.satisfied,
            regime.strong.satisfied
        );
    }
    Ok(())
}
