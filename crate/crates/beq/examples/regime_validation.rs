//! Check parameter schedules against the hypotheses of the two convergence
//! regimes: the weak regime wants square-summable but non-summable step
//! sizes with a positive tail of `lambda_n * beta_n`; the strong regime
//! wants divergent steps vanishing individually with unbounded penalization.
//!
//! ```sh
//! cargo run --release --example regime_validation
//! ```

use beq::algorithms::validate_regime;
use beq::cli::{build_schedule, ScheduleSpec};

fn main() -> Result<(), beq::Error> {
    let cases = [
        ("reference", "1/n", "1+n", "0.1-1/n", true),
        ("summable steps", "1/n^2", "n", "0", true),
        ("oversized inertia", "1/n", "1+n", "0.3", false),
        ("constant steps", "0.05", "1+n", "0", true),
        ("bounded penalization", "1/n", "2", "0", true),
        (
            "slow decay",
            "1/sqrt(n)",
            "sqrt(n)",
            "max(0.1-1/n, 0)",
            true,
        ),
    ];
    for (label, lambda, beta, alpha, clamp) in cases {
        let schedule = build_schedule(&ScheduleSpec {
            lambda: lambda.into(),
            beta: beta.into(),
            alpha: alpha.into(),
            clamp_alpha: clamp,
        })?;
        let report = validate_regime(&schedule, 4096)?;
        println!(
            "{label}: lambda = {lambda}, beta = {beta}, alpha = {alpha}\n{}\n",
            report.summary()
        );
    }
    Ok(())
}
