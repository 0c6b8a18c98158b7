//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with the measured quantity and asserting the stated
//! tolerance within the stated runtime budget.

use std::time::Instant;

use beq::algorithms::{
    alpha_ceiling, ipsa_step, psm_step, run, Method, RunOptions, Schedule, SolverState,
};
use beq::bifunctions::Bifunction;
use beq::cli::{self, DiagnosticsSpec, ExperimentConfig, ProblemSpec, ScheduleSpec, StopSpec};
use beq::convex::MaxOneNorm;
use beq::diagnostics::{
    energy_check_strong, fitzpatrick, geometric_condition_summand, normal_cone_direction,
    summability_report, EnergyCheckContext,
};
use beq::linalg::{weighted_norm_sq, ConvexSet, Vector};
use beq::problems::{paper_matrix_a, paper_matrix_b, paper_r5};
use beq::resolvents::{prox_max_one_norm, resolvent, InnerSolveOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance criterion {id} ({name}): {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn assert_runtime(id: u32, started: Instant, limit_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < limit_s,
        "criterion {id} exceeded its runtime budget: {elapsed:.2}s >= {limit_s}s"
    );
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)).normalize()
}

fn benchmark_schedule() -> Schedule {
    Schedule::new(
        |n| 1.0 / n as f64,
        |n| 1.0 + n as f64,
        |n| 0.1 - 1.0 / n as f64,
        true,
    )
}

/// 1-D numeric minimization of `s -> t*max(1,s) + 0.5*(s-r)^2` over
/// `s >= 0`, independent of the closed-form prox: kink optimality via
/// one-sided slopes, then bisection on a central-difference slope.
fn radial_prox_oracle(t: f64, r: f64) -> f64 {
    let objective = |s: f64| t * s.max(1.0) + 0.5 * (s - r) * (s - r);
    let h = 1e-7;
    let left = (objective(1.0) - objective(1.0 - h)) / h;
    let right = (objective(1.0 + h) - objective(1.0)) / h;
    if left <= 0.0 && right >= 0.0 {
        return 1.0;
    }
    let slope = |s: f64| {
        let h = 1e-6 * (1.0 + s.abs());
        (objective(s + h) - objective(s - h)) / (2.0 * h)
    };
    let (mut lo, mut hi) = (0.0, r + t + 2.0);
    if slope(lo) >= 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_1_prox_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let t = rng.gen_range(0.05..4.0);
        let dir = random_unit(&mut rng, 5);
        // Stratified across the three prox regimes, away from boundaries.
        let r = match case % 3 {
            0 => rng.gen_range(0.0..0.99),
            1 => rng.gen_range(1.01..1.0 + t - 0.01),
            _ => rng.gen_range(1.0 + t + 0.01..1.0 + t + 6.0),
        };
        let w = &dir * r;
        let z = prox_max_one_norm(t, &w);
        let oracle = &dir * radial_prox_oracle(t, r);
        worst = worst.max((&z - &oracle).norm());
    }
    let pass = worst <= 1e-8;
    report(
        1,
        "prox oracle equivalence",
        pass,
        &format!("max gap {worst:.3e} (tol 1e-8)"),
    );
    assert!(pass);
    assert_runtime(1, started, 1.0);
}

#[test]
fn criterion_2_resolvent_fixed_point_law() {
    let started = Instant::now();
    let problem = paper_r5().unwrap();
    let opts = InnerSolveOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst_fixed: f64 = 0.0;
    let mut smallest_move = f64::INFINITY;
    for _ in 0..64 {
        let dir = random_unit(&mut rng, 5);
        let inside = &dir * rng.gen_range(0.0..1.0);
        let z = resolvent(&problem.lower, &problem.set, 1.0, &inside, &opts).unwrap();
        worst_fixed = worst_fixed.max((z - inside).norm());

        let dir = random_unit(&mut rng, 5);
        let outside = &dir * rng.gen_range(1.01..4.0);
        let z = resolvent(&problem.lower, &problem.set, 1.0, &outside, &opts).unwrap();
        smallest_move = smallest_move.min((z - outside).norm());
    }
    let pass = worst_fixed <= 1e-10 && smallest_move > 1e-6;
    report(
        2,
        "resolvent fixed-point law",
        pass,
        &format!("interior drift {worst_fixed:.3e} (tol 1e-10), exterior move {smallest_move:.3e} (> 1e-6)"),
    );
    assert!(pass);
    assert_runtime(2, started, 1.0);
}

#[test]
fn criterion_3_firm_nonexpansiveness_per_strategy() {
    let started = Instant::now();
    let set = ConvexSet::whole_space(5);
    let opts = InnerSolveOptions::default();
    let lower = Bifunction::difference(5, Arc::new(MaxOneNorm));
    let upper = Bifunction::affine(paper_matrix_a(), paper_matrix_b()).unwrap();
    let combined = Bifunction::combined(vec![(2.0, lower.clone()), (1.0, upper.clone())]).unwrap();
    let cases = [
        ("closed-form prox", lower),
        ("linear solve", upper),
        ("iterative", combined),
    ];

    let mut pass = true;
    for (name, f) in &cases {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..500 {
            let x1 = Vector::from_fn(5, |_, _| rng.gen_range(-3.0..3.0));
            let x2 = Vector::from_fn(5, |_, _| rng.gen_range(-3.0..3.0));
            let j1 = resolvent(f, &set, 0.9, &x1, &opts).unwrap();
            let j2 = resolvent(f, &set, 0.9, &x2, &opts).unwrap();
            let slack = (&j1 - &j2).norm_squared() - (&j1 - &j2).dot(&(x1 - x2));
            worst = worst.max(slack);
        }
        let ok = worst <= 1e-8;
        pass &= ok;
        println!("  strategy {name}: worst slack {worst:.3e} (tol 1e-8)");
    }
    report(
        3,
        "firm nonexpansiveness of every strategy",
        pass,
        "500 pairs per strategy",
    );
    assert!(pass);
    assert_runtime(3, started, 10.0);
}

#[test]
fn criterion_4_scheme_coincidence() {
    let started = Instant::now();
    let problem = paper_r5().unwrap();
    let schedule = Schedule::new(|n| 1.0 / n as f64, |n| 1.0 + n as f64, |_| 0.0, true);
    let inner = InnerSolveOptions::default();
    let mut a = SolverState::initial(&problem);
    let mut b = SolverState::initial(&problem);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        a = ipsa_step(&problem, &a, &schedule, &inner).unwrap();
        b = psm_step(&problem, &b, &schedule, &inner).unwrap();
        worst = worst.max((&a.x_curr - &b.x_curr).norm());
        worst = worst.max((&a.z_curr - &b.z_curr).norm());
    }
    let pass = worst <= 1e-12;
    report(
        4,
        "zero-inertia coincidence with plain splitting",
        pass,
        &format!("max gap {worst:.3e} (tol 1e-12)"),
    );
    assert!(pass);
    assert_runtime(4, started, 5.0);
}

#[test]
fn criterion_5_strong_monotonicity_identity() {
    let started = Instant::now();
    let g = Bifunction::affine(paper_matrix_a(), paper_matrix_b()).unwrap();
    let diff = paper_matrix_a() - paper_matrix_b();
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = Vector::from_fn(5, |_, _| rng.gen_range(-3.0..3.0));
        let y = Vector::from_fn(5, |_, _| rng.gen_range(-3.0..3.0));
        let sum = g.eval(&x, &y).unwrap() + g.eval(&y, &x).unwrap();
        let quad = weighted_norm_sq(&diff, &(&x - &y)).unwrap();
        worst = worst.max((sum + quad).abs());
    }
    let pass = worst <= 1e-10;
    report(
        5,
        "strong-monotonicity identity",
        pass,
        &format!("max residual {worst:.3e} (tol 1e-10)"),
    );
    assert!(pass);
    assert_runtime(5, started, 1.0);
}

#[test]
fn criterion_6_qualitative_figure_reproduction() {
    let started = Instant::now();
    let problem = paper_r5().unwrap();

    let run_err_at = |beta: fn(u64) -> f64, alpha: fn(u64) -> f64, clamp: bool, budget: u64| {
        let schedule = Schedule::new(|n| 1.0 / n as f64, beta, alpha, clamp);
        run(
            &problem,
            Method::Ipsa,
            &schedule,
            &RunOptions {
                budget,
                ..RunOptions::default()
            },
        )
        .unwrap()
    };

    // Benchmark schedule to 1e4 iterations: error below 1e-3.
    let reference_trace = run_err_at(|n| 1.0 + n as f64, |n| 0.1 - 1.0 / n as f64, true, 10_000);
    let final_err = reference_trace.final_err().unwrap();
    let clause_a = final_err < 1e-3;
    println!("  clause a: err at n=10^4 with the benchmark schedule = {final_err:.3e} (< 1e-3): {clause_a}");

    // Faster-growing penalization should reach a smaller error at n = 1000.
    let quadratic = run_err_at(
        |n| (n as f64) * (n as f64),
        |n| 0.1 - 1.0 / n as f64,
        true,
        1000,
    );
    let linear = run_err_at(|n| n as f64, |n| 0.1 - 1.0 / n as f64, true, 1000);
    let err_quadratic = quadratic.record_at(1000).unwrap().err_to_ref.unwrap();
    let err_linear = linear.record_at(1000).unwrap().err_to_ref.unwrap();
    let clause_b = err_quadratic < err_linear;
    println!(
        "  clause b: err(beta=n^2) = {err_quadratic:.6e} strictly < err(beta=n) = {err_linear:.6e}: {clause_b}"
    );

    // Inertia above the admissible ceiling should do worse at n = 1000.
    let oversized = run_err_at(|n| 1.0 + n as f64, |_| 0.3, false, 1000);
    let clamped = run_err_at(|n| 1.0 + n as f64, |n| 0.1 - 1.0 / n as f64, true, 1000);
    let err_oversized = oversized.record_at(1000).unwrap().err_to_ref.unwrap();
    let err_clamped = clamped.record_at(1000).unwrap().err_to_ref.unwrap();
    assert!(0.3 > alpha_ceiling());
    let clause_c = err_oversized > err_clamped;
    println!(
        "  clause c: err(alpha=0.3) = {err_oversized:.6e} strictly > err(clamped) = {err_clamped:.6e}: {clause_c}"
    );

    let pass = clause_a && clause_b && clause_c;
    report(
        6,
        "qualitative figure reproduction",
        pass,
        &format!("clauses a={clause_a} b={clause_b} c={clause_c}"),
    );
    assert_runtime(6, started, 60.0);

    // Clauses b and c cannot discriminate on this instance: the first inner
    // point already lies in the unit ball (the lower-level solution set), so
    // the lower-level prox is inactive along the whole trajectory and every
    // penalization schedule produces the identical iterate sequence, while
    // extra inertia only accelerates the remaining linear contraction. The
    // assertions are kept as stated; see `mechanism_demo_binding_lower_level`
    // for the same comparison on an instance whose lower level binds.
    assert!(pass, "clauses: a={clause_a} b={clause_b} c={clause_c}");
}

/// Supplementary (not an acceptance criterion): on an instance whose
/// lower-level constraint binds, faster-growing penalization weights do
/// reach smaller errors, which is the mechanism the figure comparison in
/// criterion 6 looks for.
#[test]
fn mechanism_demo_binding_lower_level() {
    let problem = beq::problems::toy_interval().unwrap();
    let err_at = |beta: fn(u64) -> f64| {
        let schedule = Schedule::new(|n| 1.0 / n as f64, beta, |n| 0.1 - 1.0 / n as f64, true);
        let trace = run(
            &problem,
            Method::Ipsa,
            &schedule,
            &RunOptions {
                budget: 1000,
                ..RunOptions::default()
            },
        )
        .unwrap();
        trace.record_at(1000).unwrap().err_to_ref.unwrap()
    };
    let err_quadratic = err_at(|n| (n as f64) * (n as f64));
    let err_linear = err_at(|n| n as f64);
    println!(
        "  binding instance: err(beta=n^2) = {err_quadratic:.3e} vs err(beta=n) = {err_linear:.3e}"
    );
    assert!(err_quadratic < err_linear);
}

#[test]
fn criterion_7_energy_inequality() {
    let started = Instant::now();
    let problem = paper_r5().unwrap();
    let schedule = benchmark_schedule();
    let trace = run(
        &problem,
        Method::Ipsa,
        &schedule,
        &RunOptions {
            budget: 200,
            inner: InnerSolveOptions {
                tol: 1e-12,
                ..InnerSolveOptions::default()
            },
            ..RunOptions::default()
        },
    )
    .unwrap();
    let ctx = EnergyCheckContext {
        u: problem.reference.clone().unwrap(),
        b: 1.0,
        alpha_bound: 0.1,
    };
    let energy = energy_check_strong(&ctx, &trace.records, &problem.upper).unwrap();
    let pass = energy.max_violation <= 1e-6;
    report(
        7,
        "energy inequality along a strong-regime run",
        pass,
        &format!(
            "max violation {:.3e} over {} transitions (tol 1e-6)",
            energy.max_violation,
            energy.violations.len()
        ),
    );
    assert!(pass);
    assert_runtime(7, started, 10.0);
}

#[test]
fn criterion_8_geometric_condition_closed_form() {
    let started = Instant::now();
    let problem = paper_r5().unwrap();
    let solution_set = problem.lower_solution_set.clone().unwrap();

    // Monitor pair as constructed for the problem's reference solution
    // (interior, hence p = 0), plus a boundary pair with a genuine normal
    // direction.
    let u_interior = problem.reference.clone().unwrap();
    let p_interior = normal_cone_direction(&problem).unwrap();
    assert!(p_interior.norm() <= 1e-12, "interior point must give p = 0");
    let mut u_boundary = Vector::zeros(5);
    u_boundary[0] = 1.0;
    let mut p_boundary = Vector::zeros(5);
    p_boundary[0] = 0.4;

    let mut worst_summand: f64 = 0.0;
    for n in 1..=200u64 {
        let lambda = 1.0 / n as f64;
        let beta = 1.0 + n as f64;
        for (u, p) in [(&u_interior, &p_interior), (&u_boundary, &p_boundary)] {
            let s = geometric_condition_summand(
                &problem.lower,
                &problem.set,
                &solution_set,
                u,
                p,
                lambda,
                beta,
                0,
            )
            .unwrap();
            assert!(s.is_finite(), "summand must stay finite for these pairs");
            worst_summand = worst_summand.max(s.abs());
        }
    }
    let summands_ok = worst_summand <= 1e-6;
    println!("  max |summand| over 200 indices and two monitor pairs: {worst_summand:.3e}");

    // Closed-form transform against the ascent estimator at 50 sampled pairs.
    let big_ball = ConvexSet::ball(Vector::zeros(5), 50.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut worst_gap: f64 = 0.0;
    for i in 0..50 {
        let x = random_unit(&mut rng, 5) * rng.gen_range(0.0..2.5);
        let u = random_unit(&mut rng, 5) * rng.gen_range(0.0..0.9);
        let closed = fitzpatrick(&problem.lower, &problem.set, &x, &u, i).unwrap();
        let estimated = fitzpatrick(&problem.lower, &big_ball, &x, &u, i).unwrap();
        worst_gap = worst_gap.max((closed - estimated).abs());
    }
    let transform_ok = worst_gap <= 1e-6;
    println!("  max closed-form vs estimator gap over 50 pairs: {worst_gap:.3e}");

    let pass = summands_ok && transform_ok;
    report(
        8,
        "geometric condition closed form",
        pass,
        &format!("summands {worst_summand:.3e}, transform gap {worst_gap:.3e} (tol 1e-6)"),
    );
    assert!(pass);
    assert_runtime(8, started, 10.0);
}

#[test]
fn criterion_9_summability_trend() {
    let started = Instant::now();
    let problem = paper_r5().unwrap();
    let trace = run(
        &problem,
        Method::Ipsa,
        &benchmark_schedule(),
        &RunOptions {
            budget: 2200,
            ..RunOptions::default()
        },
    )
    .unwrap();
    let reference = problem.reference.clone().unwrap();
    let report_data =
        summability_report(&trace.records, Some((&problem.lower, &reference))).unwrap();

    let tail = |start: u64| {
        report_data
            .windows
            .iter()
            .find(|w| w.start == start)
            .unwrap_or_else(|| panic!("missing window starting at {start}"))
    };
    let mut pass = true;
    for pair in [128u64, 256, 512]
        .windows(2)
        .chain([[512u64, 1024]].iter().map(|w| &w[..]))
    {
        let (a, b) = (tail(pair[0]), tail(pair[1]));
        let step_ok = b.step_sum < a.step_sum;
        let inner_ok = b.inner_sum < a.inner_sum;
        println!(
            "  windows [{0},{1}) -> [{1},{2}): step {3:.3e} -> {4:.3e}, inner {5:.3e} -> {6:.3e}",
            pair[0],
            pair[1],
            2 * pair[1],
            a.step_sum,
            b.step_sum,
            a.inner_sum,
            b.inner_sum
        );
        pass &= step_ok && inner_ok;
    }
    report(
        9,
        "summability tail trend",
        pass,
        "doubling windows 128..1024 strictly decreasing",
    );
    assert!(pass);
    assert_runtime(9, started, 30.0);
}

#[test]
fn criterion_10_determinism_of_emitted_traces() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig {
        schema_version: cli::SCHEMA_VERSION,
        problem: ProblemSpec::Name("paper-r5".into()),
        method: "ipsa".into(),
        schedule: ScheduleSpec {
            lambda: "1/n".into(),
            beta: "1+n".into(),
            alpha: "0.1-1/n".into(),
            clamp_alpha: true,
        },
        budget: 200,
        stop: StopSpec::default(),
        seed: 7,
        output: Some(dir.path().join("first.csv")),
        diagnostics: DiagnosticsSpec::default(),
    };
    cli::execute_run(&config).unwrap();
    config.output = Some(dir.path().join("second.csv"));
    cli::execute_run(&config).unwrap();
    let first = std::fs::read(dir.path().join("first.csv")).unwrap();
    let second = std::fs::read(dir.path().join("second.csv")).unwrap();
    let pass = first == second && !first.is_empty();
    report(
        10,
        "byte-identical traces for identical config and seed",
        pass,
        &format!("{} bytes compared", first.len()),
    );
    assert!(pass);
    assert_runtime(10, started, 10.0);
}
