//! Dense vectors and matrices, convex sets with projections, and small
//! direct linear solves. Everything downstream builds on this layer.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Column vector over `f64`.
pub type Vector = DVector<f64>;
/// Dense matrix over `f64`.
pub type Matrix = DMatrix<f64>;

/// Relative pivot threshold below which a linear system is declared singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// A projection-capable convex subset of `R^d`.
///
/// Variants cover the constraint sets used by the built-in problems: the
/// whole space, closed balls, axis-aligned boxes, and halfspaces
/// `{ y : <normal, y> <= offset }`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    WholeSpace(usize),
    Ball { center: Vector, radius: f64 },
    Box { lower: Vector, upper: Vector },
    Halfspace { normal: Vector, offset: f64 },
}

impl ConvexSet {
    pub fn whole_space(dim: usize) -> Self {
        ConvexSet::WholeSpace(dim)
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::InvalidSet(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::InvalidSet(
                "box lower bound exceeds upper bound".into(),
            ));
        }
        Ok(ConvexSet::Box { lower, upper })
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        if normal.norm() == 0.0 {
            return Err(Error::InvalidSet("halfspace normal must be nonzero".into()));
        }
        Ok(ConvexSet::Halfspace { normal, offset })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::WholeSpace(d) => *d,
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Box { lower, .. } => lower.len(),
            ConvexSet::Halfspace { normal, .. } => normal.len(),
        }
    }

    pub fn is_whole_space(&self) -> bool {
        matches!(self, ConvexSet::WholeSpace(_))
    }

    /// Nearest point of the set. Idempotent.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        Ok(match self {
            ConvexSet::WholeSpace(_) => x.clone(),
            ConvexSet::Ball { center, radius } => {
                let offset = x - center;
                let dist = offset.norm();
                // The ulp-wide slack keeps the projection exactly idempotent:
                // a freshly projected point re-measures within it.
                if dist <= radius * (1.0 + 1e-14) {
                    x.clone()
                } else {
                    center + offset * (*radius / dist)
                }
            }
            ConvexSet::Box { lower, upper } => Vector::from_iterator(
                x.len(),
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(v, (l, u))| v.max(*l).min(*u)),
            ),
            ConvexSet::Halfspace { normal, offset } => {
                let value = normal.dot(x);
                let slack = 1e-14 * (1.0 + offset.abs() + normal.norm() * x.norm());
                if value <= offset + slack {
                    x.clone()
                } else {
                    x - normal * ((value - offset) / normal.norm_squared())
                }
            }
        })
    }

    /// Distance from `x` to its projection.
    pub fn projection_residual(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        Ok(self.projection_residual(x)? <= tol)
    }

    /// Support function `sup { <p, y> : y in the set }`; `+inf` for
    /// directions in which the set is unbounded.
    pub fn support(&self, p: &Vector) -> Result<f64> {
        check_dim(self.dim(), p.len())?;
        let norm_p = p.norm();
        if norm_p == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            ConvexSet::WholeSpace(_) => f64::INFINITY,
            ConvexSet::Ball { center, radius } => center.dot(p) + radius * norm_p,
            ConvexSet::Box { lower, upper } => lower
                .iter()
                .zip(upper.iter())
                .zip(p.iter())
                .map(|((l, u), pi)| if *pi >= 0.0 { pi * u } else { pi * l })
                .sum(),
            ConvexSet::Halfspace { normal, offset } => {
                // Bounded only along nonnegative multiples of the normal.
                let scale = p.dot(normal) / normal.norm_squared();
                let tangential = p - normal * scale;
                if scale >= 0.0 && tangential.norm() <= 1e-12 * norm_p {
                    scale * offset
                } else {
                    f64::INFINITY
                }
            }
        })
    }

    /// Projects `v` onto the normal cone of the set at `at`. Interior points
    /// have trivial normal cone; boundary points of balls and halfspaces have
    /// a ray, boxes a per-coordinate orthant.
    pub fn normal_cone_project(&self, at: &Vector, v: &Vector, tol: f64) -> Result<Vector> {
        check_dim(self.dim(), at.len())?;
        check_dim(self.dim(), v.len())?;
        Ok(match self {
            ConvexSet::WholeSpace(_) => Vector::zeros(v.len()),
            ConvexSet::Ball { center, radius } => {
                let offset = at - center;
                if offset.norm() < radius - tol {
                    Vector::zeros(v.len())
                } else {
                    let outward = offset.normalize();
                    &outward * v.dot(&outward).max(0.0)
                }
            }
            ConvexSet::Box { lower, upper } => Vector::from_iterator(
                v.len(),
                at.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .zip(v.iter())
                    .map(|((ai, (l, u)), vi)| {
                        let at_upper = (u - ai).abs() <= tol;
                        let at_lower = (ai - l).abs() <= tol;
                        match (at_lower, at_upper) {
                            (true, true) => *vi,
                            (false, true) => vi.max(0.0),
                            (true, false) => vi.min(0.0),
                            (false, false) => 0.0,
                        }
                    }),
            ),
            ConvexSet::Halfspace { normal, offset } => {
                if (normal.dot(at) - offset).abs() <= tol * (1.0 + normal.norm()) {
                    let outward = normal.normalize();
                    &outward * v.dot(&outward).max(0.0)
                } else {
                    Vector::zeros(v.len())
                }
            }
        })
    }

    /// Draws a point of the set; used by the sampled checkers. Unbounded
    /// sets are sampled through a Gaussian cloud (projected where needed).
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> Vector {
        let d = self.dim();
        let scale = rng.gen_range(0.5..3.0);
        let raw = Vector::from_iterator(
            d,
            (0..d).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)),
        ) * scale;
        match self {
            ConvexSet::WholeSpace(_) => raw,
            _ => self.project(&raw).expect("sample has matching dimension"),
        }
    }
}

/// Solves `M z = b` by LU with partial pivoting plus one refinement pass.
///
/// Declares the system singular when the smallest pivot falls below
/// [`SINGULARITY_THRESHOLD`] relative to the largest row norm of `M`.
pub fn solve_linear(m: &Matrix, b: &Vector) -> Result<Vector> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    check_dim(m.nrows(), b.len())?;

    let max_row_norm = (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    if max_row_norm == 0.0 {
        return Err(Error::SingularMatrix);
    }

    let lu = m.clone().lu();
    let min_pivot = lu
        .u()
        .diagonal()
        .iter()
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    if min_pivot < SINGULARITY_THRESHOLD * max_row_norm {
        return Err(Error::SingularMatrix);
    }

    let mut z = lu.solve(b).ok_or(Error::SingularMatrix)?;
    // One step of iterative refinement keeps the residual near machine level.
    let residual = b - m * &z;
    if let Some(correction) = lu.solve(&residual) {
        z += correction;
    }
    Ok(z)
}

/// Quadratic form `<M v, v>`.
pub fn weighted_norm_sq(m: &Matrix, v: &Vector) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    check_dim(m.nrows(), v.len())?;
    Ok((m * v).dot(v))
}

/// Whether the symmetrized matrix `(M + M^T)/2` has smallest eigenvalue
/// `>= -tol`. Total: never errors, non-square input is simply not PSD.
pub fn is_positive_semidefinite(m: &Matrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return m.nrows() == m.ncols();
    }
    smallest_symmetric_eigenvalue(m) >= -tol
}

/// Smallest eigenvalue of the symmetrized matrix.
pub fn smallest_symmetric_eigenvalue(m: &Matrix) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of the symmetrized matrix.
pub fn largest_symmetric_eigenvalue(m: &Matrix) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}
