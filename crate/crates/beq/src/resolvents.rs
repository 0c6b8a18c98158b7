//! Resolvent evaluation `z = J_lambda^f(x)`: the unique `z` in `K` with
//! `lambda * f(z, y) + <y - z, z - x> >= 0` for all `y` in `K`.
//!
//! Dispatch prefers exactness and speed: closed-form prox for difference
//! bifunctions, one linear solve for affine ones (both on the whole space),
//! and otherwise an inner forward-backward iteration on the strongly
//! monotone regularized problem, certified by an ascent estimate of the
//! variational-inequality residual.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ascent::{self, AscentOptions};
use crate::bifunctions::{
    AffineBifunction, Bifunction, DifferenceBifunction, ResolventStrategy, SmoothProxSplit,
};
use crate::convex::ConvexFunction;
use crate::linalg::{solve_linear, ConvexSet, Matrix, Vector};
use crate::{Error, Result};

/// Inner-solver knobs shared by all outer algorithms.
#[derive(Debug, Clone, Copy)]
pub struct InnerSolveOptions {
    /// Residual target for the iterative route.
    pub tol: f64,
    /// Iteration budget for the iterative route.
    pub budget: u64,
    /// Seed for step-size estimation and residual certification.
    pub seed: u64,
}

impl Default for InnerSolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            budget: 100_000,
            seed: 0,
        }
    }
}

/// A fully specified inner resolvent problem.
#[derive(Debug, Clone)]
pub struct ResolventRequest<'a> {
    pub bifunction: &'a Bifunction,
    pub set: &'a ConvexSet,
    pub lambda: f64,
    pub anchor: &'a Vector,
    pub inner_tol: f64,
    pub inner_budget: u64,
    pub seed: u64,
}

/// Proximal map of `phi(x) = max(1, ||x||)` with weight `t`: identity inside
/// the unit ball, radial projection onto the sphere in the middle band, and
/// a radial shrink by `t` outside.
pub fn prox_max_one_norm(t: f64, w: &Vector) -> Vector {
    crate::convex::MaxOneNorm.prox(t, w)
}

/// Resolvent of an affine bifunction over the whole space: solves
/// `(I + lambda (A + B)) z = x - lambda * offset`.
pub fn resolvent_affine(g: &AffineBifunction, lambda: f64, x: &Vector) -> Result<Vector> {
    let d = g.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let m = Matrix::identity(d, d) + (g.a() + g.b()) * lambda;
    let rhs = x - g.offset() * lambda;
    solve_linear(&m, &rhs)
}

/// Resolvent of a difference bifunction over the whole space: the prox of
/// its convex function.
pub fn resolvent_difference(f: &DifferenceBifunction, lambda: f64, x: &Vector) -> Result<Vector> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    Ok(f.phi().prox(lambda, x))
}

/// Evaluates `J_lambda^f(x)` over `set` by the cheapest valid route.
pub fn resolvent(
    f: &Bifunction,
    set: &ConvexSet,
    lambda: f64,
    x: &Vector,
    opts: &InnerSolveOptions,
) -> Result<Vector> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::Config(format!(
            "resolvent weight must be positive, got {lambda}"
        )));
    }
    if set.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: set.dim(),
        });
    }
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }

    let mut leaves = Vec::new();
    f.collect_terms(1.0, &mut leaves);
    if leaves.iter().all(|(w, _)| *w == 0.0) {
        // Zero bifunction: the resolvent is the metric projection.
        return set.project(x);
    }

    match f.strategy() {
        ResolventStrategy::ClosedFormProx if set.is_whole_space() => {
            let (w, phi) = f
                .prox_closed_form()
                .expect("strategy promised a closed-form prox");
            Ok(phi.prox(lambda * w, x))
        }
        ResolventStrategy::AffineLinearSolve if set.is_whole_space() => {
            let aggregate = f
                .affine_aggregate()
                .expect("strategy promised an affine aggregate");
            resolvent_affine(&aggregate, lambda, x)
        }
        _ => resolvent_generic(&ResolventRequest {
            bifunction: f,
            set,
            lambda,
            anchor: x,
            inner_tol: opts.tol,
            inner_budget: opts.budget,
            seed: opts.seed,
        }),
    }
}

/// Forward operator of the inner problem at `z` excluding the prox term:
/// `lambda * M(z) + z - anchor` where `M` is the diagonal subgradient of the
/// smooth part.
fn forward_operator(split: &SmoothProxSplit, lambda: f64, anchor: &Vector, z: &Vector) -> Vector {
    split.smooth_gradient_second(z, z) * lambda + z - anchor
}

/// Sampled Lipschitz estimate of the smooth diagonal operator.
fn lipschitz_estimate(split: &SmoothProxSplit, dim: usize, anchor: &Vector, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut worst: f64 = 0.0;
    for _ in 0..16 {
        let u = anchor + Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
        let v = anchor + Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
        let gap = (&u - &v).norm();
        if gap < 1e-12 {
            continue;
        }
        // Compare the pure smooth operator (lambda factored out, anchor terms cancel).
        let mu = forward_operator(split, 1.0, anchor, &u) - &u + anchor;
        let mv = forward_operator(split, 1.0, anchor, &v) - &v + anchor;
        worst = worst.max((mu - mv).norm() / gap);
    }
    worst * 1.2
}

/// Iterative inner solver for resolvents with no closed form.
///
/// Runs a forward-backward iteration on the 1-strongly monotone inner
/// problem (the anchor term supplies the strong monotonicity): forward step
/// on the smooth leaves, backward prox step on the single nonsmooth leaf or
/// projection onto the set. Step size starts at `1/(1 + lambda * L)` with a
/// sampled Lipschitz estimate `L`, halving whenever progress stalls. The
/// returned point is certified by [`vi_residual`].
pub fn resolvent_generic(req: &ResolventRequest<'_>) -> Result<Vector> {
    let d = req.bifunction.dim();
    if req.anchor.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: req.anchor.len(),
        });
    }
    if req.lambda <= 0.0 || !req.lambda.is_finite() {
        return Err(Error::Config(format!(
            "resolvent weight must be positive, got {}",
            req.lambda
        )));
    }
    let split = req.bifunction.smooth_prox_split().ok_or_else(|| {
        Error::UnsupportedStructure("more than one nonsmooth term in a combined bifunction".into())
    })?;
    if split.prox_term.is_some() && !req.set.is_whole_space() {
        return Err(Error::UnsupportedStructure(
            "nonsmooth term combined with a constrained set has no exact backward step".into(),
        ));
    }

    let lipschitz = lipschitz_estimate(&split, d, req.anchor, req.seed);
    let mut step = 1.0 / (1.0 + req.lambda * lipschitz);

    let mut z = req.set.project(req.anchor)?;
    let mut best = z.clone();
    let mut best_displacement = f64::INFINITY;
    let mut stall = 0u32;
    let mut used = 0u64;

    let backward = |step: f64, point: &Vector| -> Result<Vector> {
        if let Some((w, phi)) = &split.prox_term {
            Ok(phi.prox(step * req.lambda * w, point))
        } else {
            req.set.project(point)
        }
    };

    while used < req.inner_budget {
        let mut stagnated = false;
        while used < req.inner_budget {
            used += 1;
            let forward = &z - forward_operator(&split, req.lambda, req.anchor, &z) * step;
            let next = backward(step, &forward)?;
            let displacement = (&next - &z).norm();
            z = next;
            if displacement < best_displacement {
                best_displacement = displacement;
                best = z.clone();
                stall = 0;
            } else {
                stall += 1;
            }
            if displacement <= 1e-15 * (1.0 + z.norm()) {
                stagnated = true;
                break;
            }
            if stall >= 300 || !z.norm().is_finite() {
                break;
            }
        }
        let candidate = if stagnated { z.clone() } else { best.clone() };
        let residual = vi_residual(
            req.bifunction,
            req.set,
            req.lambda,
            req.anchor,
            &candidate,
            req.seed,
        )?;
        if residual <= req.inner_tol {
            return Ok(candidate);
        }
        if used >= req.inner_budget {
            return Err(Error::InnerBudgetExhausted {
                best: candidate,
                residual,
            });
        }
        // Not converged at this step size: restart from the best iterate
        // with a smaller step (handles nonsymmetric smooth parts).
        step *= 0.5;
        z = best.clone();
        stall = 0;
        if step < 1e-18 {
            return Err(Error::InnerBudgetExhausted {
                best: candidate,
                residual,
            });
        }
    }
    let residual = vi_residual(
        req.bifunction,
        req.set,
        req.lambda,
        req.anchor,
        &best,
        req.seed,
    )?;
    if residual <= req.inner_tol {
        Ok(best)
    } else {
        Err(Error::InnerBudgetExhausted { best, residual })
    }
}

/// Residual of the resolvent inequality at `z`:
/// `max(0, sup_{y in K} -[lambda f(z, y) + <y - z, z - anchor>])`,
/// estimated by multistart projected ascent (proximal-gradient steps when
/// the nonsmooth part is prox-capable). Zero (up to estimator accuracy) iff
/// `z` is the resolvent at `anchor`.
pub fn vi_residual(
    f: &Bifunction,
    set: &ConvexSet,
    lambda: f64,
    anchor: &Vector,
    z: &Vector,
    seed: u64,
) -> Result<f64> {
    let shift = z - anchor;
    let objective =
        move |y: &Vector| -> f64 { -lambda * f.eval_unchecked(z, y) - (y - z).dot(&shift) };
    let opts = AscentOptions {
        seed: seed ^ 0x5bd1_e995,
        travel_cap: 16.0 * (1.0 + z.norm() + anchor.norm()),
        ..AscentOptions::default()
    };
    let anchors = [z.clone(), anchor.clone()];
    let outcome = match f.smooth_prox_split() {
        Some(split) => {
            let gradient =
                |y: &Vector| -(split.smooth_gradient_second(z, y) * lambda) - (z - anchor);
            match &split.prox_term {
                Some((w, phi)) => {
                    let weight = lambda * w;
                    let backward = move |tau: f64, point: &Vector| phi.prox(tau * weight, point);
                    ascent::maximize(set, &objective, &gradient, Some(&backward), &anchors, &opts)?
                }
                None => ascent::maximize(set, &objective, &gradient, None, &anchors, &opts)?,
            }
        }
        None => {
            let gradient = |y: &Vector| -> Vector {
                match f.subgradient_second(z, y) {
                    Some(g) => -(g * lambda) - (z - anchor),
                    None => ascent::numeric_gradient(&objective, y),
                }
            };
            ascent::maximize(set, &objective, &gradient, None, &anchors, &opts)?
        }
    };
    Ok(outcome.value.max(0.0))
}

/// Worst violation of the resolvent inequality over `samples` drawn points
/// of the set (no ascent refinement). Cheap certificate for step contracts.
pub fn sampled_vi_violation(
    f: &Bifunction,
    set: &ConvexSet,
    lambda: f64,
    anchor: &Vector,
    z: &Vector,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let y = set.sample(&mut rng);
        let value = lambda * f.eval(z, &y)? + (&y - z).dot(&(z - anchor));
        worst = worst.max(-value);
    }
    Ok(worst)
}
