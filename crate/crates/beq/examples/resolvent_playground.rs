//! Tour of the resolvent engine: the closed-form prox of `max(1, ||.||)`,
//! the affine linear-solve route, the iterative route on a weighted sum, and
//! the residual certificate that backs every generic answer.
//!
//! ```sh
//! cargo run --release --example resolvent_playground
//! ```

use std::sync::Arc;

use beq::bifunctions::Bifunction;
use beq::convex::MaxOneNorm;
use beq::linalg::{ConvexSet, Vector};
use beq::problems::{paper_matrix_a, paper_matrix_b};
use beq::resolvents::{
    prox_max_one_norm, resolvent, resolvent_generic, vi_residual, InnerSolveOptions,
    ResolventRequest,
};

fn main() -> Result<(), beq::Error> {
    // Closed-form prox: three regimes.
    for (t, radius) in [(1.0, 0.5), (1.0, 1.5), (1.0, 3.0)] {
        let w = Vector::from_vec(vec![radius, 0.0, 0.0, 0.0, 0.0]);
        let z = prox_max_one_norm(t, &w);
        println!(
            "prox(t={t}) at radius {radius}: output radius {:.6}",
            z.norm()
        );
    }

    let set = ConvexSet::whole_space(5);
    let opts = InnerSolveOptions::default();
    let f = Bifunction::difference(5, Arc::new(MaxOneNorm));
    let g = Bifunction::affine(paper_matrix_a(), paper_matrix_b())?;

    // Affine route: one linear solve, certified by the resolvent inequality.
    let mut anchor = Vector::zeros(5);
    anchor[0] = 1.0;
    let z = resolvent(&g, &set, 1.0, &anchor, &opts)?;
    let residual = vi_residual(&g, &set, 1.0, &anchor, &z, 0)?;
    println!(
        "affine resolvent at e1: z[0] = {:.9}, certificate residual {residual:.2e}",
        z[0]
    );

    // Iterative route on beta*f + g, cross-checked against a 10x budget run.
    let combined = Bifunction::combined(vec![(2.0, f), (1.0, g)])?;
    let fast = resolvent(&combined, &set, 1.0, &anchor, &opts)?;
    let oracle = resolvent_generic(&ResolventRequest {
        bifunction: &combined,
        set: &set,
        lambda: 1.0,
        anchor: &anchor,
        inner_tol: 1e-12,
        inner_budget: 1_000_000,
        seed: 99,
    })?;
    println!(
        "iterative resolvent of 2f + g: first entry {:.9}, gap to 10x-budget oracle {:.2e}",
        fast[0],
        (&fast - &oracle).norm()
    );

    // Zero bifunction over a ball reduces to the metric projection.
    let zero5 = Bifunction::combined(vec![(0.0, Bifunction::difference(5, Arc::new(MaxOneNorm)))])?;
    let ball = ConvexSet::ball(Vector::zeros(5), 1.0)?;
    let far = &anchor * 3.0;
    let projected = resolvent(&zero5, &ball, 1.0, &far, &opts)?;
    println!(
        "zero bifunction over the unit ball projects 3*e1 to radius {:.6}",
        projected.norm()
    );
    Ok(())
}
