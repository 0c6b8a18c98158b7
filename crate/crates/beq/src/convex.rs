//! Convex functions with prox, subgradient, and conjugate capabilities.
//!
//! These back the difference bifunctions `f(x, y) = phi(y) - phi(x)`: the
//! prox capability gives their resolvent in closed form, the conjugate feeds
//! the Fitzpatrick transform, and the subgradient drives the generic inner
//! solver.

use std::fmt;
use std::sync::Arc;

use crate::linalg::Vector;

/// A proper convex function on `R^d` with the capabilities the solvers need.
pub trait ConvexFunction: Send + Sync {
    fn value(&self, x: &Vector) -> f64;

    /// `argmin_y  t * phi(y) + 0.5 * ||y - w||^2` for `t > 0`.
    fn prox(&self, t: f64, w: &Vector) -> Vector;

    /// One element of the subdifferential at `x`.
    fn subgradient(&self, x: &Vector) -> Vector;

    /// Fenchel conjugate `phi*(p)`, when known in closed form. `None` means
    /// the capability is absent; `Some(f64::INFINITY)` means `p` lies outside
    /// the conjugate's domain.
    fn conjugate(&self, _p: &Vector) -> Option<f64> {
        None
    }

    /// Whether the subgradient is a genuine gradient (continuously varying).
    /// Smooth functions may ride in the forward part of the inner solver.
    fn is_smooth(&self) -> bool {
        false
    }

    fn name(&self) -> &'static str;
}

impl fmt::Debug for dyn ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvexFunction({})", self.name())
    }
}

/// `phi(x) = max(1, ||x||)`: constant inside the unit ball, the norm outside.
///
/// Its minimizers are the whole closed unit ball, which makes it the standard
/// lower-level bifunction with a fat solution set.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxOneNorm;

impl ConvexFunction for MaxOneNorm {
    fn value(&self, x: &Vector) -> f64 {
        x.norm().max(1.0)
    }

    fn prox(&self, t: f64, w: &Vector) -> Vector {
        let r = w.norm();
        if r <= 1.0 {
            w.clone()
        } else if r <= 1.0 + t {
            w / r
        } else {
            w * (1.0 - t / r)
        }
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        let r = x.norm();
        if r <= 1.0 {
            // 0 belongs to the subdifferential everywhere on the ball,
            // including its boundary.
            Vector::zeros(x.len())
        } else {
            x / r
        }
    }

    fn conjugate(&self, p: &Vector) -> Option<f64> {
        let n = p.norm();
        Some(if n <= 1.0 { n - 1.0 } else { f64::INFINITY })
    }

    fn name(&self) -> &'static str {
        "max-one-norm"
    }
}

/// `phi(x) = 0.5 * ||x - center||^2`, the prototypical smooth prox-friendly
/// function; its unique minimizer is `center`.
#[derive(Debug, Clone)]
pub struct ShiftedQuadratic {
    pub center: Vector,
}

impl ShiftedQuadratic {
    pub fn new(center: Vector) -> Self {
        Self { center }
    }
}

impl ConvexFunction for ShiftedQuadratic {
    fn value(&self, x: &Vector) -> f64 {
        0.5 * (x - &self.center).norm_squared()
    }

    fn prox(&self, t: f64, w: &Vector) -> Vector {
        (w + &self.center * t) / (1.0 + t)
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        x - &self.center
    }

    fn conjugate(&self, p: &Vector) -> Option<f64> {
        Some(p.dot(&self.center) + 0.5 * p.norm_squared())
    }

    fn is_smooth(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "shifted-quadratic"
    }
}

/// Spot-checks convexity by the midpoint inequality on sampled pairs.
/// Returns the worst violation (nonpositive for convex functions).
pub fn midpoint_convexity_violation(
    phi: &Arc<dyn ConvexFunction>,
    pairs: &[(Vector, Vector)],
) -> f64 {
    pairs
        .iter()
        .map(|(x, y)| {
            let mid = (x + y) * 0.5;
            phi.value(&mid) - 0.5 * (phi.value(x) + phi.value(y))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vector {
        Vector::from_fn(d, |_, _| rng.gen_range(-scale..scale))
    }

    #[test]
    fn max_one_norm_values() {
        let phi = MaxOneNorm;
        assert_eq!(phi.value(&Vector::zeros(3)), 1.0);
        assert_eq!(phi.value(&Vector::from_vec(vec![2.0, 0.0, 0.0])), 2.0);
    }

    #[test]
    fn max_one_norm_conjugate_matches_radial_grid_oracle() {
        // Oracle: phi*(p) = sup_{s >= 0} s*||p|| - max(1, s), scanned over a
        // fine radial grid with local refinement.
        let phi = MaxOneNorm;
        for norm_p in [0.0, 0.3, 0.7, 0.95, 1.0] {
            let p = Vector::from_vec(vec![norm_p, 0.0]);
            let mut best = f64::NEG_INFINITY;
            for k in 0..200_000 {
                let s = k as f64 * 1e-4;
                best = best.max(s * norm_p - s.max(1.0));
            }
            let closed = phi.conjugate(&p).unwrap();
            assert!(
                (closed - best).abs() <= 1e-4 * (1.0 + best.abs()),
                "norm {norm_p}: closed {closed} vs grid {best}"
            );
        }
        let outside = Vector::from_vec(vec![1.5, 0.0]);
        assert!(phi.conjugate(&outside).unwrap().is_infinite());
    }

    #[test]
    fn shifted_quadratic_prox_matches_first_order_condition() {
        // Finite-difference check of t*grad(phi)(z) + (z - w) = 0.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = ShiftedQuadratic::new(Vector::from_vec(vec![1.0, -2.0, 0.5]));
        for _ in 0..50 {
            let w = random_vec(&mut rng, 3, 4.0);
            let t = rng.gen_range(0.05..5.0);
            let z = phi.prox(t, &w);
            let resid = (phi.subgradient(&z) * t + &z - &w).norm();
            assert!(resid <= 1e-10, "stationarity residual {resid}");
        }
    }

    #[test]
    fn prox_is_firmly_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phis: Vec<Arc<dyn ConvexFunction>> = vec![
            Arc::new(MaxOneNorm),
            Arc::new(ShiftedQuadratic::new(Vector::from_vec(vec![0.3, -0.7]))),
        ];
        for phi in &phis {
            for _ in 0..200 {
                let t = rng.gen_range(0.01..4.0);
                let w1 = random_vec(&mut rng, 2, 5.0);
                let w2 = random_vec(&mut rng, 2, 5.0);
                let p1 = phi.prox(t, &w1);
                let p2 = phi.prox(t, &w2);
                let lhs = (&p1 - &p2).norm_squared();
                let rhs = (&p1 - &p2).dot(&(w1 - w2));
                assert!(lhs <= rhs + 1e-12, "{}: lhs {lhs} rhs {rhs}", phi.name());
            }
        }
    }

    #[test]
    fn midpoint_convexity_holds_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs: Vec<_> = (0..200)
            .map(|_| (random_vec(&mut rng, 4, 3.0), random_vec(&mut rng, 4, 3.0)))
            .collect();
        let phi: Arc<dyn ConvexFunction> = Arc::new(MaxOneNorm);
        assert!(midpoint_convexity_violation(&phi, &pairs) <= 1e-12);
        let phi: Arc<dyn ConvexFunction> = Arc::new(ShiftedQuadratic::new(Vector::zeros(4)));
        assert!(midpoint_convexity_violation(&phi, &pairs) <= 1e-12);
    }
}
