//! Compare the splitting solver against the four baseline proximal schemes
//! on two problems: the 5-dimensional benchmark (resolvents in closed form)
//! and the 1-D interval instance (combined resolvents via the inner solver).
//!
//! ```sh
//! cargo run --release --example baseline_comparison
//! ```

use beq::algorithms::{run, Method, RunOptions, Schedule};
use beq::problems::{paper_r5, toy_interval};

fn main() -> Result<(), beq::Error> {
    for problem in [paper_r5()?, toy_interval()?] {
        println!("== {} ==", problem.name);
        println!("{:>22} {:>14} {:>12}", "method", "err to ref", "iterates");
        for method in Method::ALL {
            // The regularized proximal point scheme penalizes the upper
            // level and expects a summable lambda*beta (decaying weights);
            // the other four drive beta upward.
            let schedule = match method {
                Method::Rppm => {
                    Schedule::new(|_| 0.2, |n| 1.0 / (n as f64 * n as f64), |_| 0.0, true)
                }
                _ => Schedule::benchmark_default(),
            };
            let trace = run(
                &problem,
                method,
                &schedule,
                &RunOptions {
                    budget: 500,
                    ..RunOptions::default()
                },
            )?;
            println!(
                "{:>22} {:>14.6e} {:>12}",
                method.name(),
                trace.final_err().unwrap(),
                trace.last().n
            );
        }
        println!();
    }
    Ok(())
}
