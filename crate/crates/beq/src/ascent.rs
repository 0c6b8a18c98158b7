//! Multistart projected ascent for suprema over a convex set.
//!
//! Realizes the `sup over y in K` quantifier numerically. Each seeded start
//! runs a backtracking ascent; when the caller supplies a proximal map for
//! the nonsmooth concave part, steps are proximal-gradient (the kinks live
//! inside the prox, which resolves ridge maximizers exactly), otherwise
//! plain normalized subgradient steps with an annealed step size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{ConvexSet, Vector};
use crate::Result;

/// Backward map of the nonsmooth concave objective part: `(tau, point)`
/// evaluates the prox with weight `tau` at `point`.
pub(crate) type ProxMap<'a> = dyn Fn(f64, &Vector) -> Vector + 'a;

pub(crate) struct AscentOptions {
    pub starts: usize,
    pub steps: usize,
    pub seed: u64,
    /// Cap on total travel from the start point; keeps estimates finite on
    /// recession directions where the objective grows without bound.
    pub travel_cap: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            steps: 500,
            seed: 0,
            travel_cap: 64.0,
        }
    }
}

pub(crate) struct AscentOutcome {
    pub value: f64,
    #[cfg_attr(not(test), allow(dead_code))]
    pub arg: Vector,
    /// Set when a start kept gaining value until it hit the travel cap,
    /// which indicates a recession direction (the true sup may be +inf).
    pub hit_travel_cap: bool,
}

/// Maximizes `objective` over `set`, starting from `anchors` plus seeded
/// samples. `gradient` returns a supergradient of the smooth part (the full
/// objective when no `prox` is given); `prox` is the backward map of the
/// remaining concave nonsmooth part.
pub(crate) fn maximize(
    set: &ConvexSet,
    objective: &dyn Fn(&Vector) -> f64,
    gradient: &dyn Fn(&Vector) -> Vector,
    prox: Option<&ProxMap<'_>>,
    anchors: &[Vector],
    opts: &AscentOptions,
) -> Result<AscentOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts: Vec<Vector> = anchors
        .iter()
        .map(|a| set.project(a))
        .collect::<Result<_>>()?;
    while starts.len() < opts.starts.max(anchors.len()) {
        starts.push(set.sample(&mut rng));
    }

    let mut best_value = f64::NEG_INFINITY;
    let mut best_arg = starts[0].clone();
    let mut hit_travel_cap = false;

    for start in starts {
        let origin = start.clone();
        let mut y = start;
        let mut value = objective(&y);
        let mut step = 2.0;
        for _ in 0..opts.steps {
            if step < 1e-18 {
                break;
            }
            let g = gradient(&y);
            let candidate = match prox {
                Some(backward) => set.project(&backward(step, &(&y + &g * step)))?,
                None => {
                    let g_norm = g.norm();
                    if g_norm == 0.0 {
                        break;
                    }
                    set.project(&(&y + g * (step / g_norm)))?
                }
            };
            let candidate_value = objective(&candidate);
            if candidate_value > value {
                y = candidate;
                value = candidate_value;
                step *= 1.4;
                if (&y - &origin).norm() > opts.travel_cap {
                    hit_travel_cap = true;
                    break;
                }
            } else {
                step *= 0.5;
            }
        }
        if value > best_value {
            best_value = value;
            best_arg = y;
        }
    }

    Ok(AscentOutcome {
        value: best_value,
        arg: best_arg,
        hit_travel_cap,
    })
}

/// Central finite-difference supergradient for objectives without an
/// analytic one.
pub(crate) fn numeric_gradient(objective: &dyn Fn(&Vector) -> f64, y: &Vector) -> Vector {
    let h = 1e-6 * (1.0 + y.norm());
    let mut grad = Vector::zeros(y.len());
    let mut probe = y.clone();
    for i in 0..y.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = objective(&probe);
        probe[i] = orig - h;
        let down = objective(&probe);
        probe[i] = orig;
        grad[i] = (up - down) / (2.0 * h);
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{ConvexFunction, MaxOneNorm};

    #[test]
    fn finds_quadratic_maximum() {
        let set = ConvexSet::whole_space(3);
        let target = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        let objective = |y: &Vector| -0.5 * (y - &target).norm_squared();
        let gradient = |y: &Vector| target.clone() - y;
        let out = maximize(
            &set,
            &objective,
            &gradient,
            None,
            &[Vector::zeros(3)],
            &AscentOptions::default(),
        )
        .unwrap();
        assert!(out.value.abs() <= 1e-12, "value {}", out.value);
        assert!((out.arg - target).norm() <= 1e-6);
    }

    #[test]
    fn respects_constraint_set() {
        let set = ConvexSet::ball(Vector::zeros(2), 1.0).unwrap();
        // Maximize <c, y> over the unit ball: optimum is c/||c|| with value ||c||.
        let c = Vector::from_vec(vec![3.0, 4.0]);
        let objective = |y: &Vector| c.dot(y);
        let gradient = |_: &Vector| c.clone();
        let out = maximize(
            &set,
            &objective,
            &gradient,
            None,
            &[],
            &AscentOptions::default(),
        )
        .unwrap();
        assert!((out.value - 5.0).abs() <= 1e-9, "value {}", out.value);
    }

    #[test]
    fn prox_mode_locates_radial_ridge() {
        // sup <u, y> - max(1, ||y||) over R^2 for ||u|| < 1 sits exactly on
        // the unit sphere; the prox step resolves the ridge.
        let set = ConvexSet::whole_space(2);
        let u = Vector::from_vec(vec![0.6, 0.0]);
        let objective = |y: &Vector| u.dot(y) - y.norm().max(1.0);
        let gradient = |_: &Vector| u.clone();
        let prox = |tau: f64, point: &Vector| MaxOneNorm.prox(tau, point);
        let out = maximize(
            &set,
            &objective,
            &gradient,
            Some(&prox),
            &[],
            &AscentOptions::default(),
        )
        .unwrap();
        assert!((out.value - (-0.4)).abs() <= 1e-9, "value {}", out.value);
    }

    #[test]
    fn subgradient_fallback_reaches_ridge_coarsely() {
        // Without the prox map the dance stalls near the ridge; it must
        // still get within coarse tolerance for fallback uses.
        let set = ConvexSet::whole_space(2);
        let u = Vector::from_vec(vec![0.6, 0.0]);
        let objective = |y: &Vector| u.dot(y) - y.norm().max(1.0);
        let gradient = |y: &Vector| {
            let r = y.norm();
            if r <= 1.0 {
                u.clone()
            } else {
                &u - y / r
            }
        };
        let out = maximize(
            &set,
            &objective,
            &gradient,
            None,
            &[],
            &AscentOptions::default(),
        )
        .unwrap();
        assert!((out.value - (-0.4)).abs() <= 2e-3, "value {}", out.value);
    }

    #[test]
    fn flags_recession_direction() {
        let set = ConvexSet::whole_space(2);
        let c = Vector::from_vec(vec![1.0, 0.0]);
        let objective = |y: &Vector| c.dot(y);
        let gradient = |_: &Vector| c.clone();
        let out = maximize(
            &set,
            &objective,
            &gradient,
            None,
            &[],
            &AscentOptions::default(),
        )
        .unwrap();
        assert!(out.hit_travel_cap);
    }

    #[test]
    fn numeric_gradient_matches_analytic() {
        let objective = |y: &Vector| y[0] * y[0] + 3.0 * y[1];
        let y = Vector::from_vec(vec![0.7, -0.2]);
        let g = numeric_gradient(&objective, &y);
        assert!((g[0] - 1.4).abs() <= 1e-5);
        assert!((g[1] - 3.0).abs() <= 1e-5);
    }
}
