//! Benchmark problems: a 5-dimensional affine-over-norm-ball instance, a
//! synthetic quadratic hierarchy with closed-form ground truth, a 1-D toy
//! with a binding lower level, and the reference-solution oracle that
//! certifies `x_ref` instead of assuming it.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bifunctions::{check_monotone, Bifunction};
use crate::convex::{MaxOneNorm, ShiftedQuadratic};
use crate::diagnostics::ep_residual;
use crate::linalg::{ConvexSet, Matrix, Vector};
use crate::{Error, Result};

/// A bilevel equilibrium instance: find `x` in the solution set of the
/// lower-level problem for `lower` with `upper(x, y) >= 0` on that set.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    /// Constraint set `K` of the lower-level problem.
    pub set: ConvexSet,
    /// Lower-level bifunction `f`.
    pub lower: Bifunction,
    /// Upper-level bifunction `g`.
    pub upper: Bifunction,
    /// Solution set of the lower level, when known.
    pub lower_solution_set: Option<ConvexSet>,
    /// Certified reference solution, when available.
    pub reference: Option<Vector>,
    pub x0: Vector,
    pub x1: Vector,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// Checks the registry invariants: feasible initial points, monotone
    /// bifunctions, and (when present) both reference certificates.
    pub fn validate(&self, seed: u64) -> Result<()> {
        for (label, x) in [("x0", &self.x0), ("x1", &self.x1)] {
            if !self.set.contains(x, 1e-10)? {
                return Err(Error::Config(format!(
                    "{label} lies outside the constraint set of `{}`",
                    self.name
                )));
            }
        }
        for (label, f) in [("lower", &self.lower), ("upper", &self.upper)] {
            let report = check_monotone(f, &self.set, 128, seed)?;
            if !report.passes {
                return Err(Error::Config(format!(
                    "{label} bifunction of `{}` failed the sampled monotonicity check \
                     (max sum {:.3e})",
                    self.name, report.max_sum
                )));
            }
        }
        if let Some(reference) = &self.reference {
            let resid = ep_residual(&self.lower, &self.set, reference, seed)?;
            if resid > 1e-6 {
                return Err(Error::Config(format!(
                    "reference point of `{}` has lower-level residual {resid:.3e}",
                    self.name
                )));
            }
            if let Some(solution_set) = &self.lower_solution_set {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
                for _ in 0..128 {
                    let y = solution_set.sample(&mut rng);
                    if self.upper.eval(reference, &y)? < -1e-6 {
                        return Err(Error::Config(format!(
                            "reference point of `{}` violates the upper-level inequality",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// First coefficient matrix of the built-in 5-dimensional instance.
pub fn paper_matrix_a() -> Matrix {
    Matrix::from_row_slice(
        5,
        5,
        &[
            7.0, 3.0, 0.0, 1.0, 1.0, //
            3.0, 9.0, 1.0, 5.0, 4.0, //
            0.0, 1.0, 10.0, 3.0, -4.0, //
            1.0, 5.0, 3.0, 9.0, -1.0, //
            1.0, 4.0, -4.0, -1.0, 9.0,
        ],
    )
}

/// Second coefficient matrix of the built-in 5-dimensional instance.
pub fn paper_matrix_b() -> Matrix {
    Matrix::from_row_slice(
        5,
        5,
        &[
            5.0, 3.0, -1.0, 1.0, 2.0, //
            3.0, 6.0, 1.0, 4.0, 3.0, //
            -1.0, 1.0, 7.0, 2.0, -3.0, //
            1.0, 4.0, 2.0, 7.0, -2.0, //
            2.0, 3.0, -3.0, -2.0, 7.0,
        ],
    )
}

/// The built-in 5-dimensional instance: `K = R^5`, upper level
/// `g(x, y) = <A x + B y, y - x>` (strongly monotone since `A - B` is
/// positive definite), lower level `f(x, y) = phi(y) - phi(x)` with
/// `phi = max(1, ||.||)`, whose solution set is the closed unit ball.
/// The reference solution is computed by [`reference_solution`], not assumed.
pub fn paper_r5() -> Result<Problem> {
    let set = ConvexSet::whole_space(5);
    let upper = Bifunction::affine(paper_matrix_a(), paper_matrix_b())?;
    let lower = Bifunction::difference(5, Arc::new(MaxOneNorm));
    let ones = Vector::from_element(5, 1.0);
    let mut problem = Problem {
        name: "paper-r5".into(),
        set,
        lower,
        upper,
        lower_solution_set: Some(ConvexSet::ball(Vector::zeros(5), 1.0)?),
        reference: None,
        x0: ones.clone(),
        x1: ones,
    };
    problem.reference = Some(reference_solution(&problem, 1e-12)?);
    Ok(problem)
}

/// Synthetic hierarchy with closed-form ground truth: the lower level is the
/// difference bifunction of `0.5 ||x - c||^2` (solution set `{c}`), the
/// upper level is affine with `A - B` = random PSD + I. Every resolvent the
/// splitting schemes need is closed form; the reference solution is `c`.
pub fn quadratic_hierarchical(dim: usize, seed: u64) -> Result<Problem> {
    if dim == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));

    let random_psd = |rng: &mut ChaCha8Rng| -> Matrix {
        let r = Matrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        &r * r.transpose() / dim as f64
    };
    let b = random_psd(&mut rng);
    let gap = random_psd(&mut rng) + Matrix::identity(dim, dim);
    let a = &b + &gap;

    let lower = Bifunction::difference(dim, Arc::new(ShiftedQuadratic::new(center.clone())));
    let upper = Bifunction::affine(a, b)?;
    let start = &center + Vector::from_element(dim, 2.0);
    Ok(Problem {
        name: format!("quadratic-hierarchical-{dim}"),
        set: ConvexSet::whole_space(dim),
        lower,
        upper,
        lower_solution_set: Some(ConvexSet::boxed(center.clone(), center.clone())?),
        reference: Some(center),
        x0: start.clone(),
        x1: start,
    })
}

/// 1-D instance on `K = [-1, 1]` whose lower level pins the origin while the
/// upper level pulls toward 0.5: the lower-level constraint binds, so the
/// penalization weight visibly steers the trajectory.
pub fn toy_interval() -> Result<Problem> {
    let set = ConvexSet::boxed(Vector::from_element(1, -1.0), Vector::from_element(1, 1.0))?;
    let lower = Bifunction::difference(1, Arc::new(ShiftedQuadratic::new(Vector::zeros(1))));
    // g(x, y) = (x - 0.5)(y - x).
    let upper = Bifunction::Affine(crate::bifunctions::AffineBifunction::with_offset(
        Matrix::identity(1, 1),
        Matrix::zeros(1, 1),
        Vector::from_element(1, -0.5),
    )?);
    let start = Vector::from_element(1, 0.8);
    Ok(Problem {
        name: "toy-interval".into(),
        set,
        lower,
        upper,
        lower_solution_set: Some(ConvexSet::boxed(Vector::zeros(1), Vector::zeros(1))?),
        reference: Some(Vector::zeros(1)),
        x0: start.clone(),
        x1: start,
    })
}

/// Solves the upper-level equilibrium over the known lower-level solution
/// set by a long-horizon projected method on the diagonal subgradient of the
/// upper bifunction, then certifies the output on sampled points.
pub fn reference_solution(problem: &Problem, tol: f64) -> Result<Vector> {
    let solution_set = problem.lower_solution_set.as_ref().ok_or_else(|| {
        Error::Config("reference solution needs a known lower-level solution set".into())
    })?;

    // Conservative step from sampled strong-monotonicity and Lipschitz
    // estimates of the diagonal subgradient map.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut lipschitz: f64 = 0.0;
    let mut modulus = f64::INFINITY;
    for _ in 0..32 {
        let u = solution_set.sample(&mut rng);
        let v = solution_set.sample(&mut rng);
        let gap = (&u - &v).norm_squared();
        if gap < 1e-16 {
            continue;
        }
        let du = problem.upper.diagonal_subgradient(&u)?;
        let dv = problem.upper.diagonal_subgradient(&v)?;
        lipschitz = lipschitz.max((&du - &dv).norm() / gap.sqrt());
        modulus = modulus.min((&du - &dv).dot(&(&u - &v)) / gap);
    }
    let step = if lipschitz > 0.0 {
        (modulus.max(1e-6) / (lipschitz * lipschitz)).min(1.0)
    } else {
        1.0
    };

    let mut x = solution_set.project(&problem.x1)?;
    let budget = 2_000_000u64;
    let mut converged = false;
    for _ in 0..budget {
        let gradient = problem.upper.diagonal_subgradient(&x)?;
        let next = solution_set.project(&(&x - gradient * step))?;
        let displacement = (&next - &x).norm();
        x = next;
        if displacement <= tol * step {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "projected method for the reference solution of `{}` did not reach {tol:.1e}",
            problem.name
        )));
    }

    // Certificate: the upper-level inequality on sampled points.
    let mut rng = ChaCha8Rng::seed_from_u64(0xcafe);
    for _ in 0..256 {
        let y = solution_set.sample(&mut rng);
        let value = problem.upper.eval(&x, &y)?;
        if value < -10.0 * tol.max(1e-12) {
            return Err(Error::NonConvergence(format!(
                "candidate reference of `{}` fails the sampled certificate: g = {value:.3e}",
                problem.name
            )));
        }
    }
    Ok(x)
}

/// Names of the built-in problems, in registry order.
pub fn registry_names() -> Vec<&'static str> {
    vec!["paper-r5", "quadratic-hierarchical-8", "toy-interval"]
}

/// Builds a registered problem by name.
pub fn by_name(name: &str) -> Result<Problem> {
    match name {
        "paper-r5" => paper_r5(),
        "quadratic-hierarchical-8" => quadratic_hierarchical(8, 0),
        "toy-interval" => toy_interval(),
        other => Err(Error::Config(format!("unknown problem `{other}`"))),
    }
}
