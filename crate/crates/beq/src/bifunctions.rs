//! Equilibrium bifunctions: the affine and difference instances, weighted
//! combinations of them, and sampled monotonicity checkers.
//!
//! Every bifunction here satisfies `f(x, x) = 0` exactly and is convex in
//! its second argument, so it is an equilibrium bifunction wherever its
//! building blocks are valid. Upper hemicontinuity is assumed throughout and
//! is not checked: no finite sampling test can certify it.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convex::ConvexFunction;
use crate::linalg::{ConvexSet, Matrix, Vector};
use crate::{Error, Result};

/// How the resolvent engine should evaluate `J_lambda^f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventStrategy {
    /// A closed-form proximal map is available (difference bifunctions).
    ClosedFormProx,
    /// The resolvent reduces to one linear solve (affine bifunctions).
    AffineLinearSolve,
    /// Fall back to the iterative inner solver.
    GenericIterative,
}

/// `g(x, y) = <A x + B y + offset, y - x>`.
///
/// Monotone iff `A - B` is positive semidefinite after symmetrization, with
/// `g(x, y) + g(y, x) = -<(A - B)(x - y), x - y>` independent of the offset.
#[derive(Debug, Clone)]
pub struct AffineBifunction {
    a: Matrix,
    b: Matrix,
    offset: Vector,
}

impl AffineBifunction {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        let offset = Vector::zeros(a.nrows());
        Self::with_offset(a, b, offset)
    }

    pub fn with_offset(a: Matrix, b: Matrix, offset: Vector) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        if b.nrows() != b.ncols() || b.nrows() != a.nrows() || offset.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.nrows().max(offset.len()),
            });
        }
        Ok(Self { a, b, offset })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> f64 {
        (&self.a * x + &self.b * y + &self.offset).dot(&(y - x))
    }

    /// Gradient of `y -> g(x, y)`.
    pub fn gradient_second(&self, x: &Vector, y: &Vector) -> Vector {
        &self.a * x + &self.b * y + self.b.transpose() * (y - x) + &self.offset
    }

    /// Gradient of `x -> g(x, y)`.
    pub fn gradient_first(&self, x: &Vector, y: &Vector) -> Vector {
        self.a.transpose() * (y - x) - (&self.a * x + &self.b * y + &self.offset)
    }

    /// Scales all coefficients; `w * g` is again affine.
    pub(crate) fn scaled(&self, w: f64) -> Self {
        Self {
            a: &self.a * w,
            b: &self.b * w,
            offset: &self.offset * w,
        }
    }

    /// Sums coefficients with another affine bifunction.
    pub(crate) fn add(&self, other: &Self) -> Self {
        Self {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            offset: &self.offset + &other.offset,
        }
    }
}

/// `f(x, y) = phi(y) - phi(x)` for a convex `phi`; automatically monotone
/// (the two evaluations telescope) and its resolvent is the prox of `phi`.
#[derive(Debug, Clone)]
pub struct DifferenceBifunction {
    dim: usize,
    phi: Arc<dyn ConvexFunction>,
}

impl DifferenceBifunction {
    pub fn new(dim: usize, phi: Arc<dyn ConvexFunction>) -> Self {
        Self { dim, phi }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi(&self) -> &Arc<dyn ConvexFunction> {
        &self.phi
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> f64 {
        self.phi.value(y) - self.phi.value(x)
    }
}

/// Nonnegatively weighted sum of bifunctions, e.g. `beta * f + g`.
#[derive(Debug, Clone)]
pub struct CombinedBifunction {
    terms: Vec<(f64, Bifunction)>,
}

impl CombinedBifunction {
    pub fn new(terms: Vec<(f64, Bifunction)>) -> Result<Self> {
        if let Some((w, _)) = terms.iter().find(|(w, _)| *w < 0.0 || !w.is_finite()) {
            return Err(Error::Config(format!(
                "combined bifunction weights must be nonnegative and finite, got {w}"
            )));
        }
        let dims: Vec<usize> = terms.iter().map(|(_, f)| f.dim()).collect();
        if let Some(&first) = dims.first() {
            if dims.iter().any(|&d| d != first) {
                return Err(Error::DimensionMismatch {
                    expected: first,
                    got: *dims.iter().find(|&&d| d != first).unwrap(),
                });
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(f64, Bifunction)] {
        &self.terms
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> f64 {
        self.terms
            .iter()
            .map(|(w, f)| w * f.eval_unchecked(x, y))
            .sum()
    }
}

/// An equilibrium bifunction on `K x K`.
#[derive(Debug, Clone)]
pub enum Bifunction {
    Affine(AffineBifunction),
    Difference(DifferenceBifunction),
    Combined(CombinedBifunction),
}

impl Bifunction {
    pub fn affine(a: Matrix, b: Matrix) -> Result<Self> {
        Ok(Bifunction::Affine(AffineBifunction::new(a, b)?))
    }

    pub fn difference(dim: usize, phi: Arc<dyn ConvexFunction>) -> Self {
        Bifunction::Difference(DifferenceBifunction::new(dim, phi))
    }

    pub fn combined(terms: Vec<(f64, Bifunction)>) -> Result<Self> {
        Ok(Bifunction::Combined(CombinedBifunction::new(terms)?))
    }

    /// Weighted copy `w * f`, used to build `beta_n * f` each iteration.
    pub fn scaled(&self, w: f64) -> Result<Self> {
        Self::combined(vec![(w, self.clone())])
    }

    pub fn dim(&self) -> usize {
        match self {
            Bifunction::Affine(f) => f.dim(),
            Bifunction::Difference(f) => f.dim(),
            Bifunction::Combined(f) => f.terms.first().map_or(0, |(_, t)| t.dim()),
        }
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> Result<f64> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        if y.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: y.len(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &Vector, y: &Vector) -> f64 {
        match self {
            Bifunction::Affine(f) => f.eval(x, y),
            Bifunction::Difference(f) => f.eval(x, y),
            Bifunction::Combined(f) => f.eval(x, y),
        }
    }

    /// One element of the subdifferential of `y -> f(x, y)` at `y`, when the
    /// structure provides it.
    pub fn subgradient_second(&self, x: &Vector, y: &Vector) -> Option<Vector> {
        match self {
            Bifunction::Affine(f) => Some(f.gradient_second(x, y)),
            Bifunction::Difference(f) => Some(f.phi.subgradient(y)),
            Bifunction::Combined(f) => {
                let mut acc = Vector::zeros(self.dim());
                for (w, term) in &f.terms {
                    acc += term.subgradient_second(x, y)? * *w;
                }
                Some(acc)
            }
        }
    }

    /// One element of the superdifferential of `x -> f(x, y)` at `x` (for
    /// monotone bifunctions the first slot is concave on the built-ins).
    pub fn subgradient_first(&self, x: &Vector, y: &Vector) -> Option<Vector> {
        match self {
            Bifunction::Affine(f) => Some(f.gradient_first(x, y)),
            Bifunction::Difference(f) => Some(-f.phi.subgradient(x)),
            Bifunction::Combined(f) => {
                let mut acc = Vector::zeros(self.dim());
                for (w, term) in &f.terms {
                    acc += term.subgradient_first(x, y)? * *w;
                }
                Some(acc)
            }
        }
    }

    /// Subgradient of `y -> f(y, y)`'s second slot evaluated on the diagonal,
    /// i.e. an element of the operator associated with the bifunction.
    pub fn diagonal_subgradient(&self, y: &Vector) -> Result<Vector> {
        let d = self.dim();
        if y.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: y.len(),
            });
        }
        self.subgradient_second(y, y)
            .ok_or(Error::MissingCapability("diagonal subgradient"))
    }

    /// Preferred resolvent evaluation route.
    ///
    /// Combinations collapse to a closed form only when, after dropping
    /// zero-weight terms, a single term or an all-affine sum remains.
    pub fn strategy(&self) -> ResolventStrategy {
        match self {
            Bifunction::Affine(_) => ResolventStrategy::AffineLinearSolve,
            Bifunction::Difference(_) => ResolventStrategy::ClosedFormProx,
            Bifunction::Combined(_) => {
                if self.prox_closed_form().is_some() {
                    ResolventStrategy::ClosedFormProx
                } else if self.affine_aggregate().is_some() {
                    ResolventStrategy::AffineLinearSolve
                } else {
                    ResolventStrategy::GenericIterative
                }
            }
        }
    }

    /// Flattens the bifunction into `(weight, phi)` when it is a weighted
    /// difference bifunction (possibly nested), so `J_lambda` is a prox.
    pub(crate) fn prox_closed_form(&self) -> Option<(f64, &Arc<dyn ConvexFunction>)> {
        let mut terms = Vec::new();
        self.collect_terms(1.0, &mut terms);
        let mut result: Option<(f64, &Arc<dyn ConvexFunction>)> = None;
        for (w, leaf) in terms {
            if w == 0.0 {
                continue;
            }
            match leaf {
                Leaf::Difference(df) => {
                    if result.is_some() {
                        return None;
                    }
                    result = Some((w, &df.phi));
                }
                Leaf::Affine(_) => return None,
            }
        }
        result
    }

    /// Flattens into a single affine bifunction when every nonzero-weight
    /// leaf is affine.
    pub(crate) fn affine_aggregate(&self) -> Option<AffineBifunction> {
        let mut terms = Vec::new();
        self.collect_terms(1.0, &mut terms);
        let mut acc: Option<AffineBifunction> = None;
        for (w, leaf) in terms {
            if w == 0.0 {
                continue;
            }
            match leaf {
                Leaf::Affine(f) => {
                    let scaled = f.scaled(w);
                    acc = Some(match acc {
                        Some(prev) => prev.add(&scaled),
                        None => scaled,
                    });
                }
                Leaf::Difference(_) => return None,
            }
        }
        acc
    }

    /// Weighted leaves of the combination tree (zero weights retained).
    pub(crate) fn collect_terms<'a>(&'a self, weight: f64, out: &mut Vec<(f64, Leaf<'a>)>) {
        match self {
            Bifunction::Affine(f) => out.push((weight, Leaf::Affine(f))),
            Bifunction::Difference(f) => out.push((weight, Leaf::Difference(f))),
            Bifunction::Combined(f) => {
                for (w, term) in &f.terms {
                    term.collect_terms(weight * w, out);
                }
            }
        }
    }
}

/// Leaf of a combination tree.
pub(crate) enum Leaf<'a> {
    Affine(&'a AffineBifunction),
    Difference(&'a DifferenceBifunction),
}

/// Split of a bifunction into a smooth part (affine leaves plus difference
/// leaves with smooth `phi`) and at most one nonsmooth prox-capable leaf.
/// The inner solver and the sup estimators both ride on this structure.
pub(crate) struct SmoothProxSplit {
    pub affine: Option<AffineBifunction>,
    pub smooth_phis: Vec<(f64, Arc<dyn ConvexFunction>)>,
    /// Weight and function of the single nonsmooth leaf, when present.
    pub prox_term: Option<(f64, Arc<dyn ConvexFunction>)>,
}

impl SmoothProxSplit {
    /// Gradient of the smooth part in the second slot at `(x, y)`.
    pub fn smooth_gradient_second(&self, x: &Vector, y: &Vector) -> Vector {
        let mut g = Vector::zeros(y.len());
        if let Some(aff) = &self.affine {
            g += aff.gradient_second(x, y);
        }
        for (w, phi) in &self.smooth_phis {
            g += phi.subgradient(y) * *w;
        }
        g
    }

    /// Gradient of the smooth part in the first slot at `(x, y)`.
    pub fn smooth_gradient_first(&self, x: &Vector, y: &Vector) -> Vector {
        let mut g = Vector::zeros(x.len());
        if let Some(aff) = &self.affine {
            g += aff.gradient_first(x, y);
        }
        for (w, phi) in &self.smooth_phis {
            g -= phi.subgradient(x) * *w;
        }
        g
    }
}

impl Bifunction {
    /// Splits into smooth plus at most one nonsmooth prox leaf; `None` when
    /// more than one nonsmooth leaf survives (no exact backward map exists).
    pub(crate) fn smooth_prox_split(&self) -> Option<SmoothProxSplit> {
        let mut leaves = Vec::new();
        self.collect_terms(1.0, &mut leaves);
        let mut affine: Option<AffineBifunction> = None;
        let mut smooth_phis = Vec::new();
        let mut prox_term: Option<(f64, Arc<dyn ConvexFunction>)> = None;
        for (w, leaf) in leaves {
            if w == 0.0 {
                continue;
            }
            match leaf {
                Leaf::Affine(aff) => {
                    let scaled = aff.scaled(w);
                    affine = Some(match affine {
                        Some(prev) => prev.add(&scaled),
                        None => scaled,
                    });
                }
                Leaf::Difference(df) => {
                    if df.phi().is_smooth() {
                        smooth_phis.push((w, Arc::clone(df.phi())));
                    } else if prox_term.is_none() {
                        prox_term = Some((w, Arc::clone(df.phi())));
                    } else {
                        return None;
                    }
                }
            }
        }
        Some(SmoothProxSplit {
            affine,
            smooth_phis,
            prox_term,
        })
    }
}

/// Result of a sampled monotonicity check.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    /// Largest observed `f(x, y) + f(y, x)` over the sampled pairs.
    pub max_sum: f64,
    pub samples: usize,
    pub passes: bool,
}

/// Monotonicity tolerance for the sampled checker.
pub const MONOTONE_TOL: f64 = 1e-10;

/// Samples pairs from `set` and reports the worst `f(x,y) + f(y,x)`.
/// Sampled, not certified: a pass means no violation was found.
pub fn check_monotone(
    f: &Bifunction,
    set: &ConvexSet,
    samples: usize,
    seed: u64,
) -> Result<MonotonicityReport> {
    if samples == 0 {
        return Err(Error::Config(
            "monotonicity check needs samples >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_sum = f64::NEG_INFINITY;
    for _ in 0..samples {
        let x = set.sample(&mut rng);
        let y = set.sample(&mut rng);
        let sum = f.eval(&x, &y)? + f.eval(&y, &x)?;
        max_sum = max_sum.max(sum);
    }
    Ok(MonotonicityReport {
        max_sum,
        samples,
        passes: max_sum <= MONOTONE_TOL,
    })
}

/// Estimates the strong-monotonicity modulus as the minimum of
/// `-(f(x,y) + f(y,x)) / ||x - y||^2` over sampled pairs.
pub fn check_strong_monotone(
    f: &Bifunction,
    set: &ConvexSet,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Config(
            "monotonicity check needs samples >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modulus = f64::INFINITY;
    let mut taken = 0;
    while taken < samples {
        let x = set.sample(&mut rng);
        let y = set.sample(&mut rng);
        let gap = (&x - &y).norm_squared();
        if gap < 1e-16 {
            continue;
        }
        taken += 1;
        let sum = f.eval(&x, &y)? + f.eval(&y, &x)?;
        modulus = modulus.min(-sum / gap);
    }
    Ok(modulus)
}
