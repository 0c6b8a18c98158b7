//! Run the inertial proximal splitting solver on the built-in 5-dimensional
//! benchmark with the reference schedule and watch the error decay.
//!
//! ```sh
//! cargo run --release --example paper_problem_ipsa
//! ```

use beq::algorithms::{run, Method, RunOptions, Schedule};
use beq::problems::paper_r5;

fn main() -> Result<(), beq::Error> {
    let problem = paper_r5()?;
    println!(
        "problem `{}`: dim {}, reference solution certified at distance {:.2e} from the origin",
        problem.name,
        problem.dim(),
        problem.reference.as_ref().unwrap().norm()
    );

    let schedule = Schedule::benchmark_default();
    let trace = run(
        &problem,
        Method::Ipsa,
        &schedule,
        &RunOptions {
            budget: 10_000,
            ..RunOptions::default()
        },
    )?;

    println!("{:>8} {:>14} {:>14}", "n", "step norm", "err to ref");
    for n in [1u64, 2, 5, 10, 100, 1_000, 10_001] {
        if let Some(record) = trace.record_at(n) {
            println!(
                "{:>8} {:>14.6e} {:>14.6e}",
                record.n,
                record.step_norm,
                record.err_to_ref.unwrap()
            );
        }
    }
    println!(
        "final error after {} iterates: {:.3e}",
        trace.last().n,
        trace.final_err().unwrap()
    );
    Ok(())
}
