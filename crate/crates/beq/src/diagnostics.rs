//! Residuals, the Fitzpatrick transform with its geometric summability
//! monitor, and proof-level energy checks over solver traces.
//!
//! Suprema over the constraint set are realized by closed forms where the
//! bifunction structure provides them (conjugates for difference terms,
//! stationary linear solves for affine ones) and otherwise by a bounded
//! multistart projected ascent with fixed seeds.

use crate::algorithms::TraceRecord;
use crate::ascent::{self, AscentOptions};
use crate::bifunctions::Bifunction;
use crate::linalg::{self, solve_linear, ConvexSet, Vector};
use crate::problems::Problem;
use crate::{Error, Result};

/// Equilibrium residual `max(0, sup_{y in K} -f(x, y))`: zero (up to
/// estimator accuracy) iff `x` solves the equilibrium problem for `f`.
pub fn ep_residual(f: &Bifunction, set: &ConvexSet, x: &Vector, seed: u64) -> Result<f64> {
    // Closed form for (scaled) difference bifunctions on the whole space:
    // sup -w(phi(y) - phi(x)) = w(phi(x) + phi*(0)).
    if set.is_whole_space() {
        if let Some((w, phi)) = f.prox_closed_form() {
            if let Some(conj_zero) = phi.conjugate(&Vector::zeros(x.len())) {
                return Ok((w * (phi.value(x) + conj_zero)).max(0.0));
            }
        }
        if let Some(aff) = f.affine_aggregate() {
            // Stationary point of the concave map y -> -g(x, y).
            let bsym = aff.b() + aff.b().transpose();
            if linalg::is_positive_semidefinite(aff.b(), 1e-10) {
                let rhs = aff.b().transpose() * x - aff.a() * x - aff.offset();
                if let Ok(y) = solve_linear(&bsym, &rhs) {
                    return Ok((-aff.eval(x, &y)).max(0.0));
                }
            }
        }
    }
    let objective = move |y: &Vector| -> f64 { -f.eval_unchecked(x, y) };
    let opts = AscentOptions {
        seed,
        ..AscentOptions::default()
    };
    let anchors = [x.clone()];
    let outcome = match f.smooth_prox_split() {
        Some(split) => {
            let gradient = |y: &Vector| -split.smooth_gradient_second(x, y);
            match &split.prox_term {
                Some((w, phi)) => {
                    let weight = *w;
                    let backward = move |tau: f64, point: &Vector| phi.prox(tau * weight, point);
                    ascent::maximize(set, &objective, &gradient, Some(&backward), &anchors, &opts)?
                }
                None => ascent::maximize(set, &objective, &gradient, None, &anchors, &opts)?,
            }
        }
        None => {
            let gradient = |y: &Vector| -> Vector {
                match f.subgradient_second(x, y) {
                    Some(g) => -g,
                    None => ascent::numeric_gradient(&objective, y),
                }
            };
            ascent::maximize(set, &objective, &gradient, None, &anchors, &opts)?
        }
    };
    Ok(outcome.value.max(0.0))
}

/// Dual (Minty) residual `max(0, sup_{y in K} f(y, x))`: zero iff `x` solves
/// the dual equilibrium problem. For monotone bifunctions every equilibrium
/// point also has zero dual residual.
pub fn minty_residual(f: &Bifunction, set: &ConvexSet, x: &Vector, seed: u64) -> Result<f64> {
    if set.is_whole_space() {
        if let Some((w, phi)) = f.prox_closed_form() {
            if let Some(conj_zero) = phi.conjugate(&Vector::zeros(x.len())) {
                // sup w(phi(x) - phi(y)) = w(phi(x) - min phi).
                return Ok((w * (phi.value(x) + conj_zero)).max(0.0));
            }
        }
        if let Some(aff) = f.affine_aggregate() {
            let asym = aff.a() + aff.a().transpose();
            if linalg::is_positive_semidefinite(aff.a(), 1e-10) {
                let rhs = aff.a().transpose() * x - aff.b() * x - aff.offset();
                if let Ok(y) = solve_linear(&asym, &rhs) {
                    return Ok(aff.eval(&y, x).max(0.0));
                }
            }
        }
    }
    let objective = move |y: &Vector| -> f64 { f.eval_unchecked(y, x) };
    let opts = AscentOptions {
        seed,
        ..AscentOptions::default()
    };
    let anchors = [x.clone()];
    let outcome = match f.smooth_prox_split() {
        Some(split) => {
            // Difference leaves contribute -w*phi(y) in the first slot, so
            // the same prox serves as the backward map.
            let gradient = |y: &Vector| split.smooth_gradient_first(y, x);
            match &split.prox_term {
                Some((w, phi)) => {
                    let weight = *w;
                    let backward = move |tau: f64, point: &Vector| phi.prox(tau * weight, point);
                    ascent::maximize(set, &objective, &gradient, Some(&backward), &anchors, &opts)?
                }
                None => ascent::maximize(set, &objective, &gradient, None, &anchors, &opts)?,
            }
        }
        None => {
            let gradient = |y: &Vector| -> Vector {
                match f.subgradient_first(y, x) {
                    Some(g) => g,
                    None => ascent::numeric_gradient(&objective, y),
                }
            };
            ascent::maximize(set, &objective, &gradient, None, &anchors, &opts)?
        }
    };
    Ok(outcome.value.max(0.0))
}

/// Fitzpatrick transform `F_f(x, u) = sup_{y in K} { <u, y> + f(y, x) }`.
///
/// Closed form for (scaled) difference bifunctions on the whole space:
/// `w * phi(x) + w * phi*(u / w)`, which is `+inf` outside the conjugate
/// domain. Otherwise a multistart ascent estimate; an ascent that keeps
/// gaining until its travel cap reports `+inf`.
pub fn fitzpatrick(
    f: &Bifunction,
    set: &ConvexSet,
    x: &Vector,
    u: &Vector,
    seed: u64,
) -> Result<f64> {
    if x.len() != f.dim() || u.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: if x.len() != f.dim() { x.len() } else { u.len() },
        });
    }
    if set.is_whole_space() {
        if let Some((w, phi)) = f.prox_closed_form() {
            if let Some(conj) = phi.conjugate(&(u / w)) {
                return Ok(w * phi.value(x) + w * conj);
            }
        }
        if let Some(aff) = f.affine_aggregate() {
            let asym = aff.a() + aff.a().transpose();
            if linalg::is_positive_semidefinite(aff.a(), 1e-10) {
                let rhs = u + aff.a().transpose() * x - aff.b() * x - aff.offset();
                if let Ok(y) = solve_linear(&asym, &rhs) {
                    return Ok(u.dot(&y) + aff.eval(&y, x));
                }
            }
        }
    }
    let objective = move |y: &Vector| -> f64 { u.dot(y) + f.eval_unchecked(y, x) };
    let opts = AscentOptions {
        seed,
        ..AscentOptions::default()
    };
    let anchors = [x.clone()];
    let outcome = match f.smooth_prox_split() {
        Some(split) => {
            let gradient = |y: &Vector| split.smooth_gradient_first(y, x) + u;
            match &split.prox_term {
                Some((w, phi)) => {
                    let weight = *w;
                    let backward = move |tau: f64, point: &Vector| phi.prox(tau * weight, point);
                    ascent::maximize(set, &objective, &gradient, Some(&backward), &anchors, &opts)?
                }
                None => ascent::maximize(set, &objective, &gradient, None, &anchors, &opts)?,
            }
        }
        None => {
            let gradient = |y: &Vector| -> Vector {
                match f.subgradient_first(y, x) {
                    Some(g) => g + u,
                    None => ascent::numeric_gradient(&objective, y),
                }
            };
            ascent::maximize(set, &objective, &gradient, None, &anchors, &opts)?
        }
    };
    if outcome.hit_travel_cap {
        return Ok(f64::INFINITY);
    }
    Ok(outcome.value)
}

/// One term of the geometric summability series:
/// `lambda * beta * [ F_f(u, 2p/beta) - support_{S_f}(2p/beta) ]`.
///
/// Nonnegative whenever finite for `u` in the lower solution set; `+inf`
/// when the paired point leaves the conjugate domain, in which case the
/// geometric condition fails at that index.
#[allow(clippy::too_many_arguments)]
pub fn geometric_condition_summand(
    f: &Bifunction,
    set: &ConvexSet,
    lower_solution_set: &ConvexSet,
    u: &Vector,
    p: &Vector,
    lambda: f64,
    beta: f64,
    seed: u64,
) -> Result<f64> {
    if lambda <= 0.0 || beta <= 0.0 || !lambda.is_finite() || !beta.is_finite() {
        return Err(Error::Config(format!(
            "geometric summand needs positive weights, got lambda={lambda}, beta={beta}"
        )));
    }
    let paired = p * (2.0 / beta);
    let transform = fitzpatrick(f, set, u, &paired, seed)?;
    if transform.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let support = lower_solution_set.support(&paired)?;
    if support.is_infinite() {
        // Unbounded support with finite transform: the bracket is -inf,
        // which cannot occur for u in the solution set; report zero gap.
        return Ok(f64::NEG_INFINITY);
    }
    Ok(lambda * beta * (transform - support))
}

/// Running monitor for the geometric condition along a schedule.
#[derive(Debug, Clone)]
pub struct GeometricMonitor {
    pub u: Vector,
    pub p: Vector,
    pub partial_sum: f64,
    pub terms: usize,
    pub infinite_terms: usize,
    pub min_summand: f64,
}

impl GeometricMonitor {
    pub fn new(u: Vector, p: Vector) -> Self {
        Self {
            u,
            p,
            partial_sum: 0.0,
            terms: 0,
            infinite_terms: 0,
            min_summand: f64::INFINITY,
        }
    }

    /// Adds the summand for one index and returns it.
    pub fn accumulate(
        &mut self,
        f: &Bifunction,
        set: &ConvexSet,
        lower_solution_set: &ConvexSet,
        lambda: f64,
        beta: f64,
        seed: u64,
    ) -> Result<f64> {
        let term = geometric_condition_summand(
            f,
            set,
            lower_solution_set,
            &self.u,
            &self.p,
            lambda,
            beta,
            seed,
        )?;
        self.terms += 1;
        if term.is_infinite() {
            self.infinite_terms += 1;
        } else {
            self.partial_sum += term;
            self.min_summand = self.min_summand.min(term);
        }
        Ok(term)
    }
}

/// Normal-cone element for the monitor at the problem's reference solution:
/// the negative diagonal subgradient of the upper bifunction projected onto
/// the normal cone of the lower solution set (zero at interior points).
pub fn normal_cone_direction(problem: &Problem) -> Result<Vector> {
    let reference = problem
        .reference
        .as_ref()
        .ok_or_else(|| Error::Config("monitor direction needs a reference solution".into()))?;
    let solution_set = problem
        .lower_solution_set
        .as_ref()
        .ok_or_else(|| Error::Config("monitor direction needs the lower solution set".into()))?;
    let gradient = problem.upper.diagonal_subgradient(reference)?;
    solution_set.normal_cone_project(reference, &(-gradient), 1e-9)
}

/// Inputs of the strong-regime energy check along a trace.
#[derive(Debug, Clone)]
pub struct EnergyCheckContext {
    /// A solution of the bilevel problem.
    pub u: Vector,
    /// Auxiliary constant; must lie in `(2a, 1/(4a) - 1)` for the inertia
    /// bound `a` (any positive value when `a = 0`).
    pub b: f64,
    /// Upper bound on the inertia weights along the run.
    pub alpha_bound: f64,
}

impl EnergyCheckContext {
    fn validate(&self) -> Result<()> {
        let a = self.alpha_bound;
        if a < 0.0 {
            return Err(Error::Config("inertia bound must be nonnegative".into()));
        }
        let (lo, hi) = if a > 0.0 {
            (2.0 * a, 0.25 / a - 1.0)
        } else {
            (0.0, f64::INFINITY)
        };
        if !(self.b > lo && self.b < hi) {
            return Err(Error::Config(format!(
                "energy constant b = {} outside the admissible window ({lo}, {hi})",
                self.b
            )));
        }
        Ok(())
    }
}

/// Per-iteration outcome of the energy inequality check.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    /// `(n, violation)` for every checked transition.
    pub violations: Vec<(u64, f64)>,
    pub max_violation: f64,
}

/// Checks the descent inequality of the strong-convergence energy argument
/// on consecutive trace records:
/// `b_{n+1} <= 2 lambda_n g(z_{n+1}, u) + b_n + (a(b+1) - 1/4) d_{n+1}`
/// with `b_n = a_n - alpha_n a_{n-1} + (1+b) alpha_n d_n`, `a_n = ||x_n - u||^2`
/// and `d_n = ||x_n - x_{n-1}||^2`. Returns the positive part per iteration;
/// near-exact resolvents keep it at numerical noise.
pub fn energy_check_strong(
    ctx: &EnergyCheckContext,
    records: &[TraceRecord],
    upper: &Bifunction,
) -> Result<EnergyReport> {
    ctx.validate()?;
    if records.len() < 3 {
        return Err(Error::Config(
            "energy check needs at least three consecutive records".into(),
        ));
    }
    for pair in records.windows(2) {
        if pair[1].n != pair[0].n + 1 {
            return Err(Error::Config(
                "energy check needs contiguous records".into(),
            ));
        }
    }
    let a = |r: &TraceRecord| (&r.x - &ctx.u).norm_squared();
    let d = |cur: &TraceRecord, prev: &TraceRecord| (&cur.x - &prev.x).norm_squared();
    let b_of = |i: usize| -> f64 {
        a(&records[i]) - records[i].alpha * a(&records[i - 1])
            + (1.0 + ctx.b) * records[i].alpha * d(&records[i], &records[i - 1])
    };
    let slope = ctx.alpha_bound * (ctx.b + 1.0) - 0.25;

    let mut violations = Vec::with_capacity(records.len().saturating_sub(2));
    let mut max_violation: f64 = 0.0;
    for i in 1..records.len() - 1 {
        let lambda = records[i].lambda;
        let g_term = upper.eval(&records[i + 1].z, &ctx.u)?;
        let lhs = b_of(i + 1);
        let rhs = 2.0 * lambda * g_term + b_of(i) + slope * d(&records[i + 1], &records[i]);
        let violation = (lhs - rhs).max(0.0);
        max_violation = max_violation.max(violation);
        violations.push((records[i].n, violation));
    }
    Ok(EnergyReport {
        violations,
        max_violation,
    })
}

/// Tail sums over one doubling window.
#[derive(Debug, Clone)]
pub struct SummabilityWindow {
    /// Window covers iterate indices `[start, 2 * start)`.
    pub start: u64,
    /// Sum of `||x_{n+1} - x_n||^2`.
    pub step_sum: f64,
    /// Sum of `||z_{n+1} - x_n||^2`.
    pub inner_sum: f64,
    /// Sum of `lambda_n beta_n f(u, x_{n+1})` when a solution was supplied.
    pub weighted_lower_sum: Option<f64>,
}

/// Doubling-window verdicts for the summability estimates.
#[derive(Debug, Clone)]
pub struct SummabilityReport {
    pub windows: Vec<SummabilityWindow>,
    pub step_tails_decreasing: bool,
    pub inner_tails_decreasing: bool,
    pub weighted_tails_decreasing: Option<bool>,
}

/// Computes tail sums of the squared step and inner-gap series over doubling
/// windows `[N, 2N)` and reports whether they shrink as `N` doubles; a
/// decreasing tail is the finite-horizon signature of a summable series.
pub fn summability_report(
    records: &[TraceRecord],
    lower_at_solution: Option<(&Bifunction, &Vector)>,
) -> Result<SummabilityReport> {
    if records.len() < 64 {
        return Err(Error::Config(
            "summability report needs at least 64 records".into(),
        ));
    }
    let first_n = records[0].n;
    let index_of = |n: u64| -> Option<usize> {
        n.checked_sub(first_n)
            .map(|k| k as usize)
            .filter(|&k| k < records.len())
    };
    let last_n = records[records.len() - 1].n;

    let mut windows = Vec::new();
    let mut start = 64u64.max(first_n + 1);
    while 2 * start <= last_n {
        let mut step_sum = 0.0;
        let mut inner_sum = 0.0;
        let mut weighted = lower_at_solution.map(|_| 0.0);
        for n in start..2 * start {
            let (Some(i), Some(j)) = (index_of(n), index_of(n + 1)) else {
                break;
            };
            step_sum += (&records[j].x - &records[i].x).norm_squared();
            inner_sum += (&records[j].z - &records[i].x).norm_squared();
            if let (Some(acc), Some((f, u))) = (weighted.as_mut(), lower_at_solution) {
                *acc += records[i].lambda * records[i].beta * f.eval(u, &records[j].x)?;
            }
        }
        windows.push(SummabilityWindow {
            start,
            step_sum,
            inner_sum,
            weighted_lower_sum: weighted,
        });
        start *= 2;
    }

    let decreasing = |pick: &dyn Fn(&SummabilityWindow) -> f64| -> bool {
        windows
            .windows(2)
            .all(|w| pick(&w[1]) < pick(&w[0]) + 1e-300)
    };
    let step_tails_decreasing = windows.len() >= 2 && decreasing(&|w| w.step_sum);
    let inner_tails_decreasing = windows.len() >= 2 && decreasing(&|w| w.inner_sum);
    let weighted_tails_decreasing = lower_at_solution.map(|_| {
        windows.len() >= 2
            && windows.windows(2).all(|w| {
                w[1].weighted_lower_sum.unwrap() < w[0].weighted_lower_sum.unwrap() + 1e-300
            })
    });
    Ok(SummabilityReport {
        windows,
        step_tails_decreasing,
        inner_tails_decreasing,
        weighted_tails_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::MaxOneNorm;
    use crate::problems::{paper_matrix_a, paper_matrix_b};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn paper_f() -> Bifunction {
        Bifunction::difference(5, Arc::new(MaxOneNorm))
    }

    fn paper_g() -> Bifunction {
        Bifunction::affine(paper_matrix_a(), paper_matrix_b()).unwrap()
    }

    fn whole() -> ConvexSet {
        ConvexSet::whole_space(5)
    }

    #[test]
    fn ep_residual_examples() {
        let f = paper_f();
        assert_eq!(
            ep_residual(&f, &whole(), &Vector::zeros(5), 0).unwrap(),
            0.0
        );
        let mut x = Vector::zeros(5);
        x[0] = 2.0;
        let r = ep_residual(&f, &whole(), &x, 0).unwrap();
        assert!((r - 1.0).abs() <= 1e-10, "residual {r}");
        let zero = Bifunction::combined(vec![(0.0, paper_f())]).unwrap();
        assert_eq!(ep_residual(&zero, &whole(), &x, 0).unwrap(), 0.0);
    }

    #[test]
    fn ep_residual_estimator_matches_closed_form_off_whole_space_structure() {
        // Affine upper level at its equilibrium: residual 0; away from it,
        // the closed form and the estimator must agree.
        let g = paper_g();
        let r = ep_residual(&g, &whole(), &Vector::zeros(5), 3).unwrap();
        assert!(r <= 1e-9, "residual at equilibrium {r}");
        let mut x = Vector::zeros(5);
        x[1] = 0.5;
        let closed = ep_residual(&g, &whole(), &x, 3).unwrap();
        // Ascent-only estimate (forced through a ball much larger than the
        // relevant region behaves like the whole space locally).
        let big_ball = ConvexSet::ball(Vector::zeros(5), 50.0).unwrap();
        let estimated = ep_residual(&g, &big_ball, &x, 3).unwrap();
        assert!(
            (closed - estimated).abs() <= 1e-6 * (1.0 + closed.abs()),
            "closed {closed} vs estimated {estimated}"
        );
    }

    #[test]
    fn minty_residual_examples() {
        let f = paper_f();
        assert_eq!(
            minty_residual(&f, &whole(), &Vector::zeros(5), 0).unwrap(),
            0.0
        );
        let mut x = Vector::zeros(5);
        x[2] = -2.0;
        let r = minty_residual(&f, &whole(), &x, 0).unwrap();
        assert!((r - 1.0).abs() <= 1e-10, "residual {r}");
    }

    #[test]
    fn minty_zero_wherever_ep_zero_for_monotone_builtins() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let f = paper_f();
        for _ in 0..16 {
            let x = Vector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0)).normalize()
                * rng.gen_range(0.0..0.999);
            assert!(ep_residual(&f, &whole(), &x, 1).unwrap() <= 1e-10);
            assert!(minty_residual(&f, &whole(), &x, 1).unwrap() <= 1e-6);
        }
    }

    #[test]
    fn fitzpatrick_closed_form_examples() {
        let f = paper_f();
        // u = 0: phi*(0) = -1, so F(x, 0) = phi(x) - 1; zero at the origin.
        assert_eq!(
            fitzpatrick(&f, &whole(), &Vector::zeros(5), &Vector::zeros(5), 0).unwrap(),
            0.0
        );
        let mut x = Vector::zeros(5);
        x[0] = 3.0;
        assert!(
            (fitzpatrick(&f, &whole(), &x, &Vector::zeros(5), 0).unwrap() - 2.0).abs() <= 1e-12
        );
        // Outside the conjugate domain the transform is infinite.
        let mut u = Vector::zeros(5);
        u[1] = 1.5;
        assert!(fitzpatrick(&f, &whole(), &x, &u, 0).unwrap().is_infinite());
    }

    #[test]
    fn fitzpatrick_reduces_to_support_function_for_zero_bifunction() {
        let zero = Bifunction::combined(vec![(0.0, paper_f())]).unwrap();
        let ball = ConvexSet::ball(Vector::zeros(5), 1.0).unwrap();
        let mut u = Vector::zeros(5);
        u[0] = 2.0;
        u[3] = -1.0;
        let value = fitzpatrick(&zero, &ball, &Vector::zeros(5), &u, 0).unwrap();
        assert!((value - u.norm()).abs() <= 1e-8, "value {value}");
    }

    #[test]
    fn fitzpatrick_dominates_diagonal_pairing() {
        // F_f(x, u) >= <u, x> because y = x is feasible in the sup.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let f = paper_f();
        for _ in 0..50 {
            let x = Vector::from_fn(5, |_, _| rng.gen_range(-2.0..2.0));
            let u = Vector::from_fn(5, |_, _| rng.gen_range(-0.4..0.4));
            let value = fitzpatrick(&f, &whole(), &x, &u, 2).unwrap();
            if value.is_finite() {
                assert!(value >= u.dot(&x) - 1e-9);
            }
        }
    }

    #[test]
    fn fitzpatrick_closed_form_agrees_with_estimator() {
        let f = paper_f();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        // The estimator runs on a huge ball standing in for the whole space.
        let big = ConvexSet::ball(Vector::zeros(5), 100.0).unwrap();
        for _ in 0..20 {
            let x = Vector::from_fn(5, |_, _| rng.gen_range(-2.0..2.0));
            let u = Vector::from_fn(5, |_, _| rng.gen_range(-0.25..0.25));
            let closed = fitzpatrick(&f, &whole(), &x, &u, 5).unwrap();
            let estimated = fitzpatrick(&f, &big, &x, &u, 5).unwrap();
            assert!(
                (closed - estimated).abs() <= 1e-6 * (1.0 + closed.abs()),
                "closed {closed} vs estimated {estimated}"
            );
        }
    }

    #[test]
    fn geometric_summand_closed_forms() {
        let f = paper_f();
        let ball = ConvexSet::ball(Vector::zeros(5), 1.0).unwrap();
        let mut u = Vector::zeros(5);
        u[0] = 1.0; // boundary point of the solution set
        let mut p = Vector::zeros(5);
        p[0] = 0.4; // outward normal direction at u

        // ||2p/beta|| <= 1 keeps the bracket exactly zero.
        let s = geometric_condition_summand(&f, &whole(), &ball, &u, &p, 0.25, 2.0, 0).unwrap();
        assert!(s.abs() <= 1e-12, "summand {s}");
        // p = 0 likewise.
        let s =
            geometric_condition_summand(&f, &whole(), &ball, &u, &Vector::zeros(5), 0.25, 2.0, 0)
                .unwrap();
        assert!(s.abs() <= 1e-12);
        // Small beta pushes the paired point outside the conjugate domain.
        let s = geometric_condition_summand(&f, &whole(), &ball, &u, &p, 0.25, 0.5, 0).unwrap();
        assert!(s.is_infinite() && s > 0.0);
    }

    #[test]
    fn geometric_monitor_accumulates() {
        let f = paper_f();
        let ball = ConvexSet::ball(Vector::zeros(5), 1.0).unwrap();
        let mut u = Vector::zeros(5);
        u[0] = 1.0;
        let mut p = Vector::zeros(5);
        p[0] = 0.3;
        let mut monitor = GeometricMonitor::new(u, p);
        for n in 1..=50u64 {
            let lambda = 1.0 / n as f64;
            let beta = 1.0 + n as f64;
            monitor
                .accumulate(&f, &whole(), &ball, lambda, beta, 0)
                .unwrap();
        }
        assert_eq!(monitor.terms, 50);
        assert_eq!(monitor.infinite_terms, 0);
        assert!(monitor.partial_sum.abs() <= 1e-10);
        assert!(monitor.min_summand >= -1e-8);
    }

    #[test]
    fn energy_context_window_is_validated() {
        let bad = EnergyCheckContext {
            u: Vector::zeros(5),
            b: 0.1,
            alpha_bound: 0.1,
        };
        assert!(bad.validate().is_err());
        let good = EnergyCheckContext {
            u: Vector::zeros(5),
            b: 1.0,
            alpha_bound: 0.1,
        };
        assert!(good.validate().is_ok());
        let alpha_zero = EnergyCheckContext {
            u: Vector::zeros(5),
            b: 1.0,
            alpha_bound: 0.0,
        };
        assert!(alpha_zero.validate().is_ok());
    }

    #[test]
    fn summability_needs_enough_records() {
        assert!(matches!(
            summability_report(&[], None),
            Err(Error::Config(_))
        ));
    }

    fn constant_records(point: &Vector, count: u64) -> Vec<TraceRecord> {
        (1..=count)
            .map(|n| TraceRecord {
                n,
                lambda: 1.0 / n as f64,
                beta: 1.0 + n as f64,
                alpha: 0.05,
                x: point.clone(),
                z: point.clone(),
                step_norm: 0.0,
                err_to_ref: None,
                ep_residual: None,
            })
            .collect()
    }

    #[test]
    fn energy_check_is_exact_on_a_stationary_stream() {
        let point = Vector::zeros(5);
        let records = constant_records(&point, 50);
        let ctx = EnergyCheckContext {
            u: point,
            b: 1.0,
            alpha_bound: 0.1,
        };
        let report = energy_check_strong(&ctx, &records, &paper_g()).unwrap();
        assert_eq!(report.max_violation, 0.0);
    }

    #[test]
    fn energy_check_holds_on_a_plain_splitting_run() {
        // alpha = 0 reduces the inequality to
        // a_{n+1} <= 2 lambda_n g(z_{n+1}, u) + a_n - d_{n+1}/4.
        use crate::algorithms::{run, Method, RunOptions, Schedule};
        let problem = crate::problems::paper_r5().unwrap();
        let schedule = Schedule::new(|n| 1.0 / n as f64, |n| 1.0 + n as f64, |_| 0.0, true);
        let trace = run(
            &problem,
            Method::Psm,
            &schedule,
            &RunOptions {
                budget: 120,
                ..RunOptions::default()
            },
        )
        .unwrap();
        let ctx = EnergyCheckContext {
            u: problem.reference.clone().unwrap(),
            b: 1.0,
            alpha_bound: 0.0,
        };
        let report = energy_check_strong(&ctx, &trace.records, &problem.upper).unwrap();
        assert!(
            report.max_violation <= 1e-9,
            "violation {}",
            report.max_violation
        );
    }

    #[test]
    fn summability_tails_vanish_on_a_stationary_stream() {
        let point = Vector::from_element(5, 0.25);
        let records = constant_records(&point, 300);
        let report = summability_report(&records, None).unwrap();
        assert!(report.windows.len() >= 2);
        for window in &report.windows {
            assert_eq!(window.step_sum, 0.0);
            assert_eq!(window.inner_sum, 0.0);
        }
    }
}
