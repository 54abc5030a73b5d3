//! Projections to the simple product constraints.
//!
//! * symmetric factors, `X Xᵀ = C`: one unitarization ([`proj_gram`]);
//! * orthogonal factors, `X Y = 0`: spectral split of `Y Yᵀ − XᵀX`
//!   ([`proj_orthogonal`]);
//! * outer-full-rank factors, `X Y = C` with `C` r×r invertible: alternate a
//!   quasiprojection (fix one factor, pseudo-solve for the other, keep the
//!   closer option) with exact projections to the tangent space of the
//!   constraint ([`proj_product_fullrank`], scalar form
//!   [`proj_scalar_product`]).
//!
//! All distances are plain Frobenius sums over every component matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{
    self, cholesky_psd, eigspace_split, left_inverse_apply, max_abs, pinv, right_inverse_apply,
    sylvester_spd, unitarize, Matrix, DEFAULT_RANK_TOL,
};

/// Default number of tangent-space refinement cycles.
pub const DEFAULT_REFINEMENT_CYCLES: usize = 10;

/// Option distances closer than this (relative) are ties; ties keep the
/// fix-X option.
const TIE_TOL: f64 = 1e-12;

/// Feasibility tolerance (relative to `max|C|`) a quasiprojection option must
/// meet to be accepted.
const FEAS_TOL: f64 = 1e-9;

fn sq_dist(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(p, q)| (p - q) * (p - q)).sum()
}

fn all_finite(a: &Matrix) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// `X Xᵀ = C`, carried as the factor `A` (m×r) with `A Aᵀ = C`.
#[derive(Debug, Clone)]
pub struct GramConstraint {
    pub a: Matrix,
    pub c: Matrix,
    pub rank: usize,
}

impl GramConstraint {
    pub fn new(c: &Matrix, rank_tol: f64) -> Result<Self> {
        let a = cholesky_psd(c, rank_tol)?;
        Self::from_factor(a, c.clone())
    }

    pub fn from_factor(a: Matrix, c: Matrix) -> Result<Self> {
        let resid = max_abs(&(&a * a.transpose() - &c));
        if resid > 1e-8 * max_abs(&c).max(1.0) {
            return Err(Error::InvalidInput(format!(
                "factor does not reproduce the Gram matrix (residual {resid:e})"
            )));
        }
        let rank = a.ncols();
        Ok(GramConstraint { a, c, rank })
    }
}

/// Nearest `X` (m×k) with `X Xᵀ = C`: `A · 𝒰(Aᵀ X0)`.
pub fn proj_gram(gc: &GramConstraint, x0: &Matrix) -> Result<Matrix> {
    if x0.nrows() != gc.a.nrows() || x0.ncols() < gc.rank {
        return Err(Error::InvalidInput(format!(
            "gram projection: X0 is {}x{}, need {} rows and at least {} columns",
            x0.nrows(),
            x0.ncols(),
            gc.a.nrows(),
            gc.rank
        )));
    }
    let m = gc.a.transpose() * x0;
    Ok(&gc.a * unitarize(&m, DEFAULT_RANK_TOL)?)
}

/// Nearest pair with `X Y = 0`.
pub fn proj_orthogonal(x0: &Matrix, y0: &Matrix) -> Result<(Matrix, Matrix)> {
    if x0.ncols() != y0.nrows() {
        return Err(Error::InvalidInput(format!(
            "orthogonal projection: inner dimensions {} and {} differ",
            x0.ncols(),
            y0.nrows()
        )));
    }
    let s = y0 * y0.transpose() - x0.transpose() * x0;
    let (neg, pos) = eigspace_split(&s, DEFAULT_RANK_TOL)?;
    Ok((x0 * neg, pos * y0))
}

/// `X Y = C` for an invertible r×r `C` and factors r×k, k×r (k ≥ r).
#[derive(Debug, Clone)]
pub struct FullRankConstraint {
    pub c: Matrix,
    pub r: usize,
    pub k: usize,
    /// Tangent-space refinement cycles.
    pub t: usize,
    pub rank_tol: f64,
    feas_tol: f64,
}

impl FullRankConstraint {
    pub fn new(c: Matrix, k: usize, t: usize) -> Result<Self> {
        if !c.is_square() {
            return Err(Error::InvalidInput(format!(
                "full-rank constraint must be square, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        let r = c.nrows();
        if k < r {
            return Err(Error::InvalidInput(format!(
                "inner dimension {k} is smaller than rank {r}"
            )));
        }
        let numerical = matcore::rank(&c, DEFAULT_RANK_TOL)?;
        if numerical != r {
            return Err(Error::InvalidInput(format!(
                "constraint matrix has rank {numerical}, expected {r}"
            )));
        }
        let feas_tol = FEAS_TOL * max_abs(&c);
        Ok(FullRankConstraint {
            c,
            r,
            k,
            t,
            rank_tol: DEFAULT_RANK_TOL,
            feas_tol,
        })
    }

    pub fn with_cycles(mut self, t: usize) -> Self {
        self.t = t;
        self
    }

    pub fn is_feasible(&self, p: &FactorPair) -> bool {
        max_abs(&(&p.x * &p.y - &self.c)) <= self.feas_tol
    }

    /// Balanced feasible pair `(a·E, Eᵀ·C/a)` with `E = [I_r 0]`, used when
    /// neither quasiprojection option exists.
    fn canonical_pair(&self) -> FactorPair {
        let a = (self.c.norm() / (self.r as f64).sqrt()).sqrt();
        let mut x = Matrix::zeros(self.r, self.k);
        let mut y = Matrix::zeros(self.k, self.r);
        for i in 0..self.r {
            x[(i, i)] = a;
        }
        y.view_mut((0, 0), (self.r, self.r)).copy_from(&(&self.c / a));
        FactorPair { x, y }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub x: Matrix,
    pub y: Matrix,
}

impl FactorPair {
    pub fn new(x: Matrix, y: Matrix) -> Self {
        FactorPair { x, y }
    }

    pub fn sq_dist(&self, other: &FactorPair) -> f64 {
        sq_dist(&self.x, &other.x) + sq_dist(&self.y, &other.y)
    }
}

/// Solves `fixed · d = rhs` (fix-X) with minimum-norm `d`.
fn min_norm_right(fixed: &Matrix, rhs: &Matrix, rank_tol: f64) -> Option<Matrix> {
    right_inverse_apply(fixed, rhs).or_else(|| pinv(fixed, rank_tol).ok().map(|p| p * rhs))
}

/// Solves `d · fixed = rhs` (fix-Y) with minimum-norm `d`.
fn min_norm_left(fixed: &Matrix, rhs: &Matrix, rank_tol: f64) -> Option<Matrix> {
    left_inverse_apply(fixed, rhs).or_else(|| pinv(fixed, rank_tol).ok().map(|p| rhs * p))
}

/// Restores `X Y = C` from `current`, choosing between keeping `current.x`
/// or `current.y` by distance to `anchor`.
pub fn quasiproject(
    fc: &FullRankConstraint,
    anchor: &FactorPair,
    current: &FactorPair,
) -> Result<FactorPair> {
    let (x0, y0) = (&anchor.x, &anchor.y);
    let (x1, y1) = (&current.x, &current.y);

    let fix_x = min_norm_right(x1, &(&fc.c - x1 * y0), fc.rank_tol).and_then(|dy| {
        let cand = FactorPair::new(x1.clone(), y0 + &dy);
        (all_finite(&cand.y) && fc.is_feasible(&cand))
            .then(|| (sq_dist(x1, x0) + dy.norm_squared(), cand))
    });
    let fix_y = min_norm_left(y1, &(&fc.c - x0 * y1), fc.rank_tol).and_then(|dx| {
        let cand = FactorPair::new(x0 + &dx, y1.clone());
        (all_finite(&cand.x) && fc.is_feasible(&cand))
            .then(|| (dx.norm_squared() + sq_dist(y1, y0), cand))
    });

    match (fix_x, fix_y) {
        (Some((da, a)), Some((db, b))) => {
            let tie = TIE_TOL * da.max(db).max(1.0);
            Ok(if da <= db + tie { a } else { b })
        }
        (Some((_, a)), None) => Ok(a),
        (None, Some((_, b))) => Ok(b),
        (None, None) => Err(Error::DegeneratePair),
    }
}

/// Exact projection of `anchor` to the tangent space of `X Y = C` at the
/// feasible pair `feasible`.
pub fn tangent_project(
    anchor: &FactorPair,
    feasible: &FactorPair,
    rank_tol: f64,
) -> Result<FactorPair> {
    let (x0, y0) = (&anchor.x, &anchor.y);
    let (x1, y1) = (&feasible.x, &feasible.y);
    let a = x1 * x1.transpose();
    let b = y1.transpose() * y1;
    let r = (x0 - x1) * y1 + x1 * (y0 - y1);
    let f = sylvester_spd(&a, &b, &r, rank_tol)?;
    Ok(FactorPair::new(x0 - &f * y1.transpose(), y0 - x1.transpose() * &f))
}

/// Approximate nearest point on `X Y = C`: one quasiprojection followed by
/// `fc.t` rounds of (tangent projection, quasiprojection).
pub fn proj_product_fullrank(fc: &FullRankConstraint, anchor: &FactorPair) -> Result<FactorPair> {
    if anchor.x.shape() != (fc.r, fc.k) || anchor.y.shape() != (fc.k, fc.r) {
        return Err(Error::InvalidInput(format!(
            "anchor shapes {:?}, {:?} do not match constraint r={}, k={}",
            anchor.x.shape(),
            anchor.y.shape(),
            fc.r,
            fc.k
        )));
    }
    if !all_finite(&anchor.x) || !all_finite(&anchor.y) {
        return Err(Error::ProjectionFailed {
            iteration: 0,
            reason: "non-finite anchor".into(),
        });
    }
    let mut current = match quasiproject(fc, anchor, anchor) {
        Ok(p) => p,
        Err(Error::DegeneratePair) => fc.canonical_pair(),
        Err(e) => return Err(e),
    };
    for _ in 0..fc.t {
        let tangent = match tangent_project(anchor, &current, fc.rank_tol) {
            Ok(p) => p,
            Err(Error::SingularPencil { .. }) => break,
            Err(e) => return Err(e),
        };
        match quasiproject(fc, anchor, &tangent) {
            Ok(p) => current = p,
            Err(Error::DegeneratePair) => break,
            Err(e) => return Err(e),
        }
    }
    if !fc.is_feasible(&current) {
        return Err(Error::ProjectionFailed {
            iteration: 0,
            reason: "product constraint not restored".into(),
        });
    }
    Ok(current)
}

fn scalar_pinv(x: Complex64) -> Complex64 {
    if x.norm_sqr() > 0.0 {
        x.inv()
    } else {
        Complex64::new(0.0, 0.0)
    }
}

fn scalar_feasible(c: Complex64, x: Complex64, y: Complex64) -> bool {
    x.is_finite() && y.is_finite() && (x * y - c).norm() <= FEAS_TOL * c.norm()
}

fn scalar_quasiproject(
    c: Complex64,
    (x0, y0): (Complex64, Complex64),
    (x1, y1): (Complex64, Complex64),
) -> Option<(Complex64, Complex64)> {
    let ya = y0 + scalar_pinv(x1) * (c - x1 * y0);
    let a = scalar_feasible(c, x1, ya).then(|| ((x1 - x0).norm_sqr() + (ya - y0).norm_sqr(), (x1, ya)));
    let xb = x0 + (c - x0 * y1) * scalar_pinv(y1);
    let b = scalar_feasible(c, xb, y1).then(|| ((xb - x0).norm_sqr() + (y1 - y0).norm_sqr(), (xb, y1)));
    match (a, b) {
        (Some((da, pa)), Some((db, pb))) => {
            let tie = TIE_TOL * da.max(db).max(1.0);
            Some(if da <= db + tie { pa } else { pb })
        }
        (Some((_, p)), None) | (None, Some((_, p))) => Some(p),
        (None, None) => None,
    }
}

fn scalar_tangent(
    (x0, y0): (Complex64, Complex64),
    (x1, y1): (Complex64, Complex64),
) -> Option<(Complex64, Complex64)> {
    let denom = x1.norm_sqr() + y1.norm_sqr();
    if !(denom > 0.0) {
        return None;
    }
    let f = ((x0 - x1) * y1 + (y0 - y1) * x1) / denom;
    Some((x0 - f * y1.conj(), y0 - f * x1.conj()))
}

/// Complex scalar specialization of [`proj_product_fullrank`] for `x y = c`.
pub fn proj_scalar_product(
    c: Complex64,
    anchor: (Complex64, Complex64),
    t: usize,
) -> (Complex64, Complex64) {
    let mut current = scalar_quasiproject(c, anchor, anchor).unwrap_or_else(|| {
        let a = c.norm().sqrt();
        if a > 0.0 {
            (Complex64::new(a, 0.0), c / a)
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        }
    });
    for _ in 0..t {
        let Some(tangent) = scalar_tangent(anchor, current) else {
            break;
        };
        match scalar_quasiproject(c, anchor, tangent) {
            Some(p) => current = p,
            None => break,
        }
    }
    current
}
