//! The five proximal schemes, parameter schedules with regime validators,
//! and the outer run loop that produces traces.
//!
//! All schemes share the iterate layout `(x_prev, x_curr)` plus the last
//! inner point `z` and inertial point `y`:
//!
//! - splitting with inertia: `y_n = x_n + alpha_n (x_n - x_{n-1})`,
//!   `z_{n+1} = J_{lambda_n}^{g}(y_n)`, `x_{n+1} = J_{lambda_n}^{beta_n f}(z_{n+1})`;
//! - splitting without inertia: the same with `y_n = x_n`;
//! - inertial prox on the sum: `x_{n+1} = J_{lambda_n}^{beta_n f + g}(y_n)`;
//! - prox-penalization: the same with `y_n = x_n`;
//! - regularized proximal point: `x_{n+1} = J_{lambda_n}^{f + beta_n g}(x_n)`.

use std::fmt;
use std::sync::Arc;

use crate::diagnostics::ep_residual;
use crate::linalg::Vector;
use crate::problems::Problem;
use crate::resolvents::{resolvent, InnerSolveOptions};
use crate::{Error, Result};

/// Upper limit for inertia weights: `(sqrt(3) - 1) / 4` shrunk by `1e-9` so
/// clamped schedules satisfy the strict inequality the convergence analysis
/// needs.
pub fn alpha_ceiling() -> f64 {
    (3.0_f64.sqrt() - 1.0) / 4.0 - 1e-9
}

type ScheduleFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// The parameter triple `(lambda_n, beta_n, alpha_n)`, evaluated from `n = 1`.
#[derive(Clone)]
pub struct Schedule {
    lambda: ScheduleFn,
    beta: ScheduleFn,
    alpha: ScheduleFn,
    pub clamp_alpha: bool,
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Schedule")
            .field("clamp_alpha", &self.clamp_alpha)
            .finish_non_exhaustive()
    }
}

impl Schedule {
    pub fn new(
        lambda: impl Fn(u64) -> f64 + Send + Sync + 'static,
        beta: impl Fn(u64) -> f64 + Send + Sync + 'static,
        alpha: impl Fn(u64) -> f64 + Send + Sync + 'static,
        clamp_alpha: bool,
    ) -> Self {
        Self {
            lambda: Arc::new(lambda),
            beta: Arc::new(beta),
            alpha: Arc::new(alpha),
            clamp_alpha,
        }
    }

    /// `lambda_n = 1/n`, `beta_n = 1 + n`, `alpha_n = clamp(0.1 - 1/n)`: the
    /// reference benchmark schedule satisfying both convergence regimes.
    pub fn benchmark_default() -> Self {
        Self::new(
            |n| 1.0 / n as f64,
            |n| 1.0 + n as f64,
            |n| 0.1 - 1.0 / n as f64,
            true,
        )
    }

    pub fn lambda(&self, n: u64) -> f64 {
        (self.lambda)(n)
    }

    pub fn beta(&self, n: u64) -> f64 {
        (self.beta)(n)
    }

    /// Raw inertia weight before clamping.
    pub fn alpha_raw(&self, n: u64) -> f64 {
        (self.alpha)(n)
    }

    /// Effective inertia weight: clamped into `[0, alpha_ceiling()]` when
    /// clamping is enabled.
    pub fn alpha(&self, n: u64) -> f64 {
        let raw = self.alpha_raw(n);
        if self.clamp_alpha {
            raw.max(0.0).min(alpha_ceiling())
        } else {
            raw
        }
    }

    fn validated_lambda(&self, n: u64) -> Result<f64> {
        let v = self.lambda(n);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidSchedule(format!(
                "lambda({n}) = {v} must be positive"
            )))
        }
    }

    fn validated_beta(&self, n: u64) -> Result<f64> {
        let v = self.beta(n);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidSchedule(format!(
                "beta({n}) = {v} must be positive"
            )))
        }
    }
}

/// The available iterative schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Inertial proximal splitting (the main solver).
    Ipsa,
    /// Proximal splitting without inertia.
    Psm,
    /// Inertial prox on the weighted sum.
    InertialProx,
    /// Prox-penalization on the weighted sum, no inertia.
    PpmPenalization,
    /// Regularized proximal point (penalization on the upper level).
    Rppm,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ipsa,
        Method::Psm,
        Method::InertialProx,
        Method::PpmPenalization,
        Method::Rppm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Ipsa => "ipsa",
            Method::Psm => "psm",
            Method::InertialProx => "inertial_prox",
            Method::PpmPenalization => "ppm_penalization",
            Method::Rppm => "rppm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ipsa" => Ok(Method::Ipsa),
            "psm" => Ok(Method::Psm),
            "inertial_prox" => Ok(Method::InertialProx),
            "ppm_penalization" => Ok(Method::PpmPenalization),
            "rppm" => Ok(Method::Rppm),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Iterate bundle after `n - 1` completed steps.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Index of the current iterate (starts at 1).
    pub n: u64,
    pub x_prev: Vector,
    pub x_curr: Vector,
    /// Last inner point (`z_n`); equals `x_n` for the one-resolvent schemes.
    pub z_curr: Vector,
    /// Last inertial point (`y_n`); equals `x_n` before any step.
    pub y_curr: Vector,
}

impl SolverState {
    pub fn initial(problem: &Problem) -> Self {
        Self {
            n: 1,
            x_prev: problem.x0.clone(),
            x_curr: problem.x1.clone(),
            z_curr: problem.x1.clone(),
            y_curr: problem.x1.clone(),
        }
    }
}

/// One row of a solver trace.
///
/// Record `n` holds the iterate `x_n`, the inner point `z_n` produced with
/// it, and the schedule values at `n` (the parameters that generate
/// `x_{n+1}`). `step_norm` is `||x_n - x_{n-1}||`.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub n: u64,
    pub lambda: f64,
    pub beta: f64,
    pub alpha: f64,
    pub x: Vector,
    pub z: Vector,
    pub step_norm: f64,
    pub err_to_ref: Option<f64>,
    pub ep_residual: Option<f64>,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    /// Both stopping tolerances were met.
    Converged,
    /// The iteration budget ran out first.
    BudgetExhausted,
}

/// Record stream of one run.
#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub outcome: RunOutcome,
}

impl Trace {
    pub fn last(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("traces always hold the initial record")
    }

    /// Final distance to the reference solution, when recorded.
    pub fn final_err(&self) -> Option<f64> {
        self.last().err_to_ref
    }

    /// Record with iterate index `n`, if present.
    pub fn record_at(&self, n: u64) -> Option<&TraceRecord> {
        let first = self.records.first()?.n;
        n.checked_sub(first)
            .and_then(|k| self.records.get(k as usize))
            .filter(|r| r.n == n)
    }
}

/// Stopping rule: terminate once `step_norm < step_tol` and, when a residual
/// tolerance is set, the equilibrium residual of the lower level is below it.
#[derive(Debug, Clone, Copy, Default)]
pub struct StopRule {
    pub step_tol: Option<f64>,
    pub residual_tol: Option<f64>,
    /// Extra cap on iterations; the effective budget is the minimum of this
    /// and the run budget.
    pub max_iters: Option<u64>,
}

/// Everything a run needs besides the problem, method, and schedule.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub budget: u64,
    pub stop: StopRule,
    pub inner: InnerSolveOptions,
    pub seed: u64,
    /// Record the lower-level equilibrium residual on every iterate.
    pub record_ep_residual: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            budget: 1000,
            stop: StopRule::default(),
            inner: InnerSolveOptions::default(),
            seed: 0,
            record_ep_residual: false,
        }
    }
}

fn per_iteration_seed(seed: u64, n: u64) -> u64 {
    // splitmix-style mixing keeps inner seeds decorrelated across iterations.
    let mut v = seed ^ n.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    v ^= v >> 30;
    v = v.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    v ^= v >> 27;
    v
}

/// Inertial proximal splitting step: extrapolate, then the two resolvents.
pub fn ipsa_step(
    problem: &Problem,
    state: &SolverState,
    schedule: &Schedule,
    inner: &InnerSolveOptions,
) -> Result<SolverState> {
    let n = state.n;
    let lambda = schedule.validated_lambda(n)?;
    let beta = schedule.validated_beta(n)?;
    let alpha = schedule.alpha(n);
    let y = &state.x_curr + (&state.x_curr - &state.x_prev) * alpha;
    let z = resolvent(&problem.upper, &problem.set, lambda, &y, inner)?;
    let scaled_lower = problem.lower.scaled(beta)?;
    let x_next = resolvent(&scaled_lower, &problem.set, lambda, &z, inner)?;
    Ok(SolverState {
        n: n + 1,
        x_prev: state.x_curr.clone(),
        x_curr: x_next,
        z_curr: z,
        y_curr: y,
    })
}

/// Splitting step without inertia (the `alpha = 0` specialization).
pub fn psm_step(
    problem: &Problem,
    state: &SolverState,
    schedule: &Schedule,
    inner: &InnerSolveOptions,
) -> Result<SolverState> {
    let n = state.n;
    let lambda = schedule.validated_lambda(n)?;
    let beta = schedule.validated_beta(n)?;
    let y = state.x_curr.clone();
    let z = resolvent(&problem.upper, &problem.set, lambda, &y, inner)?;
    let scaled_lower = problem.lower.scaled(beta)?;
    let x_next = resolvent(&scaled_lower, &problem.set, lambda, &z, inner)?;
    Ok(SolverState {
        n: n + 1,
        x_prev: state.x_curr.clone(),
        x_curr: x_next,
        z_curr: z,
        y_curr: y,
    })
}

/// Inertial prox step on the weighted sum `beta_n f + g`.
pub fn inertial_prox_step(
    problem: &Problem,
    state: &SolverState,
    schedule: &Schedule,
    inner: &InnerSolveOptions,
) -> Result<SolverState> {
    let n = state.n;
    let lambda = schedule.validated_lambda(n)?;
    let beta = schedule.validated_beta(n)?;
    let alpha = schedule.alpha(n);
    let y = &state.x_curr + (&state.x_curr - &state.x_prev) * alpha;
    let combined = crate::bifunctions::Bifunction::combined(vec![
        (beta, problem.lower.clone()),
        (1.0, problem.upper.clone()),
    ])?;
    let x_next = resolvent(&combined, &problem.set, lambda, &y, inner)?;
    Ok(SolverState {
        n: n + 1,
        x_prev: state.x_curr.clone(),
        z_curr: x_next.clone(),
        x_curr: x_next,
        y_curr: y,
    })
}

/// Prox-penalization step: `x_{n+1} = J_{lambda_n}^{beta_n f + g}(x_n)`.
pub fn ppm_penalization_step(
    problem: &Problem,
    state: &SolverState,
    schedule: &Schedule,
    inner: &InnerSolveOptions,
) -> Result<SolverState> {
    let n = state.n;
    let lambda = schedule.validated_lambda(n)?;
    let beta = schedule.validated_beta(n)?;
    let combined = crate::bifunctions::Bifunction::combined(vec![
        (beta, problem.lower.clone()),
        (1.0, problem.upper.clone()),
    ])?;
    let x_next = resolvent(&combined, &problem.set, lambda, &state.x_curr, inner)?;
    Ok(SolverState {
        n: n + 1,
        x_prev: state.x_curr.clone(),
        z_curr: x_next.clone(),
        x_curr: x_next,
        y_curr: state.x_curr.clone(),
    })
}

/// Regularized proximal point step: `x_{n+1} = J_{lambda_n}^{f + beta_n g}(x_n)`.
pub fn rppm_step(
    problem: &Problem,
    state: &SolverState,
    schedule: &Schedule,
    inner: &InnerSolveOptions,
) -> Result<SolverState> {
    let n = state.n;
    let lambda = schedule.validated_lambda(n)?;
    let beta = schedule.beta(n);
    if beta < 0.0 || !beta.is_finite() {
        return Err(Error::InvalidSchedule(format!(
            "beta({n}) = {beta} must be nonnegative"
        )));
    }
    let combined = crate::bifunctions::Bifunction::combined(vec![
        (1.0, problem.lower.clone()),
        (beta, problem.upper.clone()),
    ])?;
    let x_next = resolvent(&combined, &problem.set, lambda, &state.x_curr, inner)?;
    Ok(SolverState {
        n: n + 1,
        x_prev: state.x_curr.clone(),
        z_curr: x_next.clone(),
        x_curr: x_next,
        y_curr: state.x_curr.clone(),
    })
}

fn dispatch_step(
    method: Method,
    problem: &Problem,
    state: &SolverState,
    schedule: &Schedule,
    inner: &InnerSolveOptions,
) -> Result<SolverState> {
    match method {
        Method::Ipsa => ipsa_step(problem, state, schedule, inner),
        Method::Psm => psm_step(problem, state, schedule, inner),
        Method::InertialProx => inertial_prox_step(problem, state, schedule, inner),
        Method::PpmPenalization => ppm_penalization_step(problem, state, schedule, inner),
        Method::Rppm => rppm_step(problem, state, schedule, inner),
    }
}

/// Runs `method` on `problem` under `schedule`, recording one trace row per
/// iterate. Deterministic for a fixed configuration and seed. A resolvent
/// failure aborts with the partial trace attached.
pub fn run(
    problem: &Problem,
    method: Method,
    schedule: &Schedule,
    opts: &RunOptions,
) -> Result<Trace> {
    for (label, x) in [("x0", &problem.x0), ("x1", &problem.x1)] {
        if !problem.set.contains(x, 1e-9)? {
            return Err(Error::Config(format!(
                "initial point {label} is infeasible"
            )));
        }
    }

    let make_record = |state: &SolverState, step_norm: f64, ep: Option<f64>| TraceRecord {
        n: state.n,
        lambda: schedule.lambda(state.n),
        beta: schedule.beta(state.n),
        alpha: schedule.alpha(state.n),
        x: state.x_curr.clone(),
        z: state.z_curr.clone(),
        step_norm,
        err_to_ref: problem
            .reference
            .as_ref()
            .map(|r| (&state.x_curr - r).norm()),
        ep_residual: ep,
    };

    let mut state = SolverState::initial(problem);
    let initial_ep = if opts.record_ep_residual {
        Some(ep_residual(
            &problem.lower,
            &problem.set,
            &state.x_curr,
            opts.seed,
        )?)
    } else {
        None
    };
    let mut records = vec![make_record(
        &state,
        (&problem.x1 - &problem.x0).norm(),
        initial_ep,
    )];

    let budget = opts
        .stop
        .max_iters
        .map_or(opts.budget, |m| m.min(opts.budget));
    let mut outcome = RunOutcome::BudgetExhausted;

    for _ in 0..budget {
        let inner = InnerSolveOptions {
            seed: per_iteration_seed(opts.seed, state.n),
            ..opts.inner
        };
        let next = match dispatch_step(method, problem, &state, schedule, &inner) {
            Ok(next) => next,
            Err(e) => {
                return Err(Error::RunAborted {
                    message: format!("iteration {} failed: {e}", state.n),
                    partial: Box::new(Trace {
                        records,
                        outcome: RunOutcome::BudgetExhausted,
                    }),
                });
            }
        };
        let step_norm = (&next.x_curr - &state.x_curr).norm();
        state = next;

        let step_ok = opts.stop.step_tol.is_some_and(|tol| step_norm < tol);
        let mut ep = if opts.record_ep_residual {
            Some(ep_residual(
                &problem.lower,
                &problem.set,
                &state.x_curr,
                inner.seed,
            )?)
        } else {
            None
        };
        let mut converged = step_ok;
        if step_ok {
            if let Some(residual_tol) = opts.stop.residual_tol {
                let value = match ep {
                    Some(v) => v,
                    None => {
                        let v =
                            ep_residual(&problem.lower, &problem.set, &state.x_curr, inner.seed)?;
                        ep = Some(v);
                        v
                    }
                };
                converged = value < residual_tol;
            }
        }
        records.push(make_record(&state, step_norm, ep));
        if converged {
            outcome = RunOutcome::Converged;
            break;
        }
    }

    Ok(Trace { records, outcome })
}

/// Verdict for one convergence regime.
#[derive(Debug, Clone)]
pub struct RegimeVerdict {
    pub satisfied: bool,
    pub violations: Vec<String>,
}

/// Numerical check of the schedule hypotheses for the two convergence
/// regimes of the splitting scheme.
#[derive(Debug, Clone)]
pub struct RegimeReport {
    /// Weak regime: square-summable but not summable step sizes, positive
    /// tail of `lambda_n beta_n`, and admissible inertia.
    pub weak: RegimeVerdict,
    /// Strong regime: divergent step-size series with `lambda_n -> 0`,
    /// `beta_n -> +inf`, positive tail of `lambda_n beta_n`, admissible
    /// inertia.
    pub strong: RegimeVerdict,
}

impl RegimeReport {
    pub fn summary(&self) -> String {
        let line = |name: &str, v: &RegimeVerdict| {
            if v.satisfied {
                format!("{name}: satisfied")
            } else {
                format!("{name}: violated ({})", v.violations.join("; "))
            }
        };
        format!(
            "{}\n{}",
            line("weak regime", &self.weak),
            line("strong regime", &self.strong)
        )
    }
}

/// Trend-tests the schedule over `[1, horizon]`: doubling-window ratios
/// decide divergence of the step-size series and convergence of its squares,
/// tail windows decide the `lambda_n beta_n` and limit conditions, and the
/// inertia weights are checked for monotonicity and the ceiling. Trend tests
/// can misjudge schedules that drift slower than polynomially; the report
/// names each failed condition rather than erroring.
pub fn validate_regime(schedule: &Schedule, horizon: u64) -> Result<RegimeReport> {
    if horizon < 100 {
        return Err(Error::Config(
            "regime validation needs a horizon of at least 100".into(),
        ));
    }

    let mut positivity = Vec::new();
    let lambdas: Vec<f64> = (1..=horizon).map(|n| schedule.lambda(n)).collect();
    let betas: Vec<f64> = (1..=horizon).map(|n| schedule.beta(n)).collect();
    let alphas: Vec<f64> = (1..=horizon).map(|n| schedule.alpha(n)).collect();
    if lambdas.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
        positivity.push("step sizes must be positive".to_string());
    }
    if betas.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
        positivity.push("penalization weights must be positive".to_string());
    }

    // Doubling windows [2^k, 2^{k+1}) over the horizon.
    let window_sums = |values: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let mut sums = Vec::new();
        let mut start = 16usize;
        while 2 * start <= horizon as usize {
            sums.push((start..2 * start).map(values).sum());
            start *= 2;
        }
        sums
    };
    let last_ratio = |sums: &[f64]| -> Option<f64> {
        match sums.len() {
            0 | 1 => None,
            k => Some(sums[k - 1] / sums[k - 2].max(f64::MIN_POSITIVE)),
        }
    };

    let lambda_sums = window_sums(&|i| lambdas[i - 1]);
    let lambda_sq_sums = window_sums(&|i| lambdas[i - 1] * lambdas[i - 1]);
    let sum_diverges = last_ratio(&lambda_sums).is_some_and(|r| r >= 0.85);
    let sum_sq_converges = last_ratio(&lambda_sq_sums).is_some_and(|r| r <= 0.75);

    let h = horizon as usize;
    let tail_min = |values: &[f64], from: usize, to: usize| {
        values[from - 1..to]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    };
    let product: Vec<f64> = lambdas.iter().zip(&betas).map(|(l, b)| l * b).collect();
    let tail = tail_min(&product, h / 2, h);
    let prev_tail = tail_min(&product, h / 4, h / 2);
    let liminf_positive = tail > 1e-12 && tail >= 0.6 * prev_tail;

    let alpha_nondecreasing = alphas.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let alpha_max = alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let alpha_min = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let alpha_within_ceiling = alpha_max <= alpha_ceiling() + 1e-15;
    let alpha_nonnegative = alpha_min >= -1e-15;

    let lambda_to_zero = lambdas[h - 1] <= 0.9 * lambdas[h / 2 - 1];
    let beta_to_infinity = betas[h - 1] >= 1.25 * betas[h / 2 - 1];

    let mut weak = positivity.clone();
    if !sum_diverges {
        weak.push("step-size series does not diverge".into());
    }
    if !sum_sq_converges {
        weak.push("squared step-size series does not converge".into());
    }
    if !liminf_positive {
        weak.push("tail of lambda*beta decays toward zero".into());
    }
    let mut strong = positivity;
    if !sum_diverges {
        strong.push("step-size series does not diverge".into());
    }
    if !lambda_to_zero {
        strong.push("step sizes do not vanish".into());
    }
    if !beta_to_infinity {
        strong.push("penalization weights do not grow unboundedly".into());
    }
    if !liminf_positive {
        strong.push("tail of lambda*beta decays toward zero".into());
    }
    for list in [&mut weak, &mut strong] {
        if !alpha_nondecreasing {
            list.push("inertia weights are not nondecreasing".into());
        }
        if !alpha_within_ceiling {
            list.push(format!(
                "inertia weights exceed the ceiling {:.6}",
                alpha_ceiling()
            ));
        }
        if !alpha_nonnegative {
            list.push("inertia weights are negative".into());
        }
    }

    Ok(RegimeReport {
        weak: RegimeVerdict {
            satisfied: weak.is_empty(),
            violations: weak,
        },
        strong: RegimeVerdict {
            satisfied: strong.is_empty(),
            violations: strong,
        },
    })
}
