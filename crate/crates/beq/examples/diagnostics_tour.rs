//! Diagnostics walkthrough: equilibrium and dual residuals, the Fitzpatrick
//! transform (closed form vs estimator), the geometric-condition monitor,
//! the strong-regime energy inequality, and summability tail trends.
//!
//! ```sh
//! cargo run --release --example diagnostics_tour
//! ```

use beq::algorithms::{run, Method, RunOptions, Schedule};
use beq::diagnostics::{
    energy_check_strong, ep_residual, fitzpatrick, minty_residual, normal_cone_direction,
    summability_report, EnergyCheckContext, GeometricMonitor,
};
use beq::linalg::{ConvexSet, Vector};
use beq::problems::paper_r5;

fn main() -> Result<(), beq::Error> {
    let problem = paper_r5()?;
    let reference = problem.reference.clone().unwrap();

    // Residuals at the reference point and at an infeasible-for-the-lower-level point.
    let mut far = Vector::zeros(5);
    far[0] = 2.0;
    println!(
        "residuals at the reference: equilibrium {:.2e}, dual {:.2e}",
        ep_residual(&problem.lower, &problem.set, &reference, 0)?,
        minty_residual(&problem.lower, &problem.set, &reference, 0)?,
    );
    println!(
        "residuals at 2*e1:         equilibrium {:.2e}, dual {:.2e}",
        ep_residual(&problem.lower, &problem.set, &far, 0)?,
        minty_residual(&problem.lower, &problem.set, &far, 0)?,
    );

    // Fitzpatrick transform: closed form on the whole space vs the ascent
    // estimator over a large ball standing in for it.
    let mut u = Vector::zeros(5);
    u[1] = 0.5;
    let closed = fitzpatrick(&problem.lower, &problem.set, &far, &u, 0)?;
    let big_ball = ConvexSet::ball(Vector::zeros(5), 50.0)?;
    let estimated = fitzpatrick(&problem.lower, &big_ball, &far, &u, 0)?;
    println!("transform at (2e1, 0.5e2): closed {closed:.9}, estimator {estimated:.9}");
    let mut outside = Vector::zeros(5);
    outside[1] = 1.5;
    println!(
        "transform outside the conjugate domain: {}",
        fitzpatrick(&problem.lower, &problem.set, &far, &outside, 0)?
    );

    // Geometric-condition monitor along the benchmark schedule.
    let p = normal_cone_direction(&problem)?;
    let mut monitor = GeometricMonitor::new(reference.clone(), p);
    let solution_set = problem.lower_solution_set.clone().unwrap();
    for n in 1..=100u64 {
        monitor.accumulate(
            &problem.lower,
            &problem.set,
            &solution_set,
            1.0 / n as f64,
            1.0 + n as f64,
            0,
        )?;
    }
    println!(
        "geometric monitor after {} terms: partial sum {:.3e}, infinite terms {}",
        monitor.terms, monitor.partial_sum, monitor.infinite_terms
    );

    // Energy inequality and summability on a medium run.
    let trace = run(
        &problem,
        Method::Ipsa,
        &Schedule::benchmark_default(),
        &RunOptions {
            budget: 2200,
            ..RunOptions::default()
        },
    )?;
    let ctx = EnergyCheckContext {
        u: reference.clone(),
        b: 1.0,
        alpha_bound: 0.1,
    };
    let energy = energy_check_strong(&ctx, &trace.records[..200], &problem.upper)?;
    println!(
        "energy inequality, first 200 iterates: max violation {:.3e}",
        energy.max_violation
    );

    let tails = summability_report(&trace.records, Some((&problem.lower, &reference)))?;
    println!(
        "summability tails decreasing: steps {}, inner gaps {}, weighted lower values {:?}",
        tails.step_tails_decreasing, tails.inner_tails_decreasing, tails.weighted_tails_decreasing
    );
    for w in &tails.windows {
        println!(
            "  window [{:>5},{:>5}): step sum {:.3e}, inner sum {:.3e}",
            w.start,
            2 * w.start,
            w.step_sum,
            w.inner_sum
        );
    }
    Ok(())
}
