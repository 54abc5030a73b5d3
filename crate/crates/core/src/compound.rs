//! Compound projections for factors that are not of a simple type.
//!
//! Three constructions reduce `X Y = C` plus a structure constraint on the
//! factors to a pair of projections `(p1, p2)`:
//!
//! * [`RankLimited`]: `rank X = rank Y = rank C = r`. The factors are tied to
//!   the scaled SVD of `C` through `X = U W`, `Y = Z V`, and the product
//!   constraint moves to the small pair `W Z = D`.
//! * [`Hybrid`]: the same idea when one outer dimension already equals `r`.
//! * [`RankExcessive`]: factors of rank above `r`, split as
//!   `X = X_C + X_⊥`, `Y = Y_C + Y_⊥` with replicas and an orthogonality
//!   block.
//! * [`RankOne`]: `C` as a sum of `k` rank-one summands with a per-entry
//!   simplex (or integer simplex) constraint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, diag, max_abs, Matrix, DEFAULT_RANK_TOL};
use crate::projections::{proj_orthogonal, proj_product_fullrank, FactorPair, FullRankConstraint};

/// Which halves of the SVD of `C` are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvdMode {
    /// `X = U W`, `Y = Z V`, product constraint `W Z = D`.
    Full,
    /// Only `X = U W` (requires `n = r`); product constraint `W Y = D V`.
    HalfLeft,
    /// Only `Y = Z V` (requires `m = r`); product constraint `X Z = U D`.
    HalfRight,
}

/// Rescaled SVD `C = U D V` with `UᵀU = g² I`, `V Vᵀ = h² I`.
#[derive(Debug, Clone)]
pub struct ScaledSvdSetup {
    pub u: Matrix,
    pub v: Matrix,
    /// r×r diagonal `D / (g h)`.
    pub d: Matrix,
    /// Right-hand side of the small product constraint: `d` in full mode,
    /// `D V / g` (half-left) or `U D / h` (half-right).
    pub product: Matrix,
    pub g: f64,
    pub h: f64,
    pub r: usize,
    pub mode: SvdMode,
}

pub fn setup_scaled_svd(c: &Matrix, g: f64, h: f64, mode: SvdMode) -> Result<ScaledSvdSetup> {
    if !(g > 0.0 && h > 0.0 && g.is_finite() && h.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "metric parameters must be positive, got g={g}, h={h}"
        )));
    }
    let dec = matcore::svd(c, DEFAULT_RANK_TOL)?;
    let r = dec.rank();
    if r == 0 {
        return Err(Error::InvalidInput("constraint matrix has rank 0".into()));
    }
    let (m, n) = c.shape();
    let u = dec.u * g;
    let v = dec.v * h;
    let d = diag(&dec.s.iter().map(|s| s / (g * h)).collect::<Vec<_>>());
    let product = match mode {
        SvdMode::Full => d.clone(),
        SvdMode::HalfLeft => {
            if n != r {
                return Err(Error::InvalidInput(format!(
                    "half-left mode needs n = rank, got n={n}, rank={r}"
                )));
            }
            // (g U)(D/g)V: the constant absorbs V unscaled.
            &d * &v
        }
        SvdMode::HalfRight => {
            if m != r {
                return Err(Error::InvalidInput(format!(
                    "half-right mode needs m = rank, got m={m}, rank={r}"
                )));
            }
            &u * &d
        }
    };
    Ok(ScaledSvdSetup {
        u,
        v,
        d,
        product,
        g,
        h,
        r,
        mode,
    })
}

/// Structure required of each factor entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Nonnegative,
    PmOne,
    Integer,
    None,
}

impl StructureKind {
    /// Element-wise projection. `±1` rounding sends 0 to +1.
    pub fn project_scalar(self, v: f64) -> f64 {
        match self {
            StructureKind::Nonnegative => v.max(0.0),
            StructureKind::PmOne => {
                if v < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
            StructureKind::Integer => v.round(),
            StructureKind::None => v,
        }
    }

    pub fn project(self, a: &Matrix) -> Matrix {
        a.map(|v| self.project_scalar(v))
    }
}

/// `P_U(W0, X0)`: nearest pair with `X = U W`.
pub fn proj_lift_left(setup: &ScaledSvdSetup, w0: &Matrix, x0: &Matrix) -> (Matrix, Matrix) {
    let g2 = setup.g * setup.g;
    let w1 = (w0 + setup.u.transpose() * x0) / (g2 + 1.0);
    let x1 = &setup.u * &w1;
    (w1, x1)
}

/// `P_V(Z0, Y0)`: nearest pair with `Y = Z V`.
pub fn proj_lift_right(setup: &ScaledSvdSetup, z0: &Matrix, y0: &Matrix) -> (Matrix, Matrix) {
    let h2 = setup.h * setup.h;
    let z1 = (z0 + y0 * setup.v.transpose()) / (h2 + 1.0);
    let y1 = &z1 * &setup.v;
    (z1, y1)
}

fn check_shape(what: &str, a: &Matrix, shape: (usize, usize)) -> Result<()> {
    if a.shape() == shape {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} is {}x{}, expected {}x{}",
            a.nrows(),
            a.ncols(),
            shape.0,
            shape.1
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankLimitedState {
    pub w: Matrix,
    pub x: Matrix,
    pub z: Matrix,
    pub y: Matrix,
}

/// Four-matrix construction for `rank X = rank Y = rank C`.
#[derive(Debug, Clone)]
pub struct RankLimited {
    pub setup: ScaledSvdSetup,
    pub product: FullRankConstraint,
    pub structure: StructureKind,
    pub k: usize,
}

impl RankLimited {
    /// `t` is the number of tangent-space refinement cycles of the inner
    /// product projection.
    pub fn new(c: &Matrix, k: usize, g: f64, h: f64, t: usize, structure: StructureKind) -> Result<Self> {
        let setup = setup_scaled_svd(c, g, h, SvdMode::Full)?;
        if k < setup.r {
            return Err(Error::InvalidInput(format!(
                "inner dimension {k} is below rank {}",
                setup.r
            )));
        }
        let product = FullRankConstraint::new(setup.product.clone(), k, t)?;
        Ok(RankLimited {
            setup,
            product,
            structure,
            k,
        })
    }

    pub fn shapes(&self) -> [(usize, usize); 4] {
        let (m, n, r, k) = (self.setup.u.nrows(), self.setup.v.ncols(), self.setup.r, self.k);
        [(r, k), (m, k), (k, r), (k, n)]
    }

    fn check(&self, s: &RankLimitedState) -> Result<()> {
        let [sw, sx, sz, sy] = self.shapes();
        check_shape("W", &s.w, sw)?;
        check_shape("X", &s.x, sx)?;
        check_shape("Z", &s.z, sz)?;
        check_shape("Y", &s.y, sy)
    }

    /// `(W', P_*(X); Z', P_*(Y))` with `(W', Z')` on `W Z = D`.
    pub fn p1(&self, s: &RankLimitedState) -> Result<RankLimitedState> {
        self.check(s)?;
        let wz = proj_product_fullrank(&self.product, &FactorPair::new(s.w.clone(), s.z.clone()))?;
        Ok(RankLimitedState {
            w: wz.x,
            x: self.structure.project(&s.x),
            z: wz.y,
            y: self.structure.project(&s.y),
        })
    }

    /// `(P_U(W, X); P_V(Z, Y))`.
    pub fn p2(&self, s: &RankLimitedState) -> Result<RankLimitedState> {
        self.check(s)?;
        let (w, x) = proj_lift_left(&self.setup, &s.w, &s.x);
        let (z, y) = proj_lift_right(&self.setup, &s.z, &s.y);
        Ok(RankLimitedState { w, x, z, y })
    }
}

/// Three-matrix state of the hybrid construction. `inner` is `W` (half-left)
/// or `Z` (half-right); `lifted` is the factor tied to it; `direct` is the
/// other factor, constrained only by the product and its structure.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    pub inner: Matrix,
    pub lifted: Matrix,
    pub direct: Matrix,
}

/// Construction for the case where exactly one outer dimension equals `r`.
#[derive(Debug, Clone)]
pub struct Hybrid {
    pub setup: ScaledSvdSetup,
    pub product: FullRankConstraint,
    pub structure: StructureKind,
    pub k: usize,
}

impl Hybrid {
    pub fn new(c: &Matrix, k: usize, g: f64, h: f64, t: usize, structure: StructureKind) -> Result<Self> {
        let (m, n) = c.shape();
        let r = matcore::rank(c, DEFAULT_RANK_TOL)?;
        let mode = if n == r {
            SvdMode::HalfLeft
        } else if m == r {
            SvdMode::HalfRight
        } else {
            return Err(Error::InvalidInput(format!(
                "hybrid construction needs m or n equal to rank {r}, got {m}x{n}"
            )));
        };
        let setup = setup_scaled_svd(c, g, h, mode)?;
        if k < r {
            return Err(Error::InvalidInput(format!("inner dimension {k} is below rank {r}")));
        }
        let product = FullRankConstraint::new(setup.product.clone(), k, t)?;
        Ok(Hybrid {
            setup,
            product,
            structure,
            k,
        })
    }

    /// Shapes of `(inner, lifted, direct)`.
    pub fn shapes(&self) -> [(usize, usize); 3] {
        let (m, n, r, k) = (self.setup.u.nrows(), self.setup.v.ncols(), self.setup.r, self.k);
        match self.setup.mode {
            SvdMode::HalfRight => [(k, r), (k, n), (m, k)],
            _ => [(r, k), (m, k), (k, n)],
        }
    }

    fn check(&self, s: &HybridState) -> Result<()> {
        let [a, b, c] = self.shapes();
        check_shape("inner", &s.inner, a)?;
        check_shape("lifted", &s.lifted, b)?;
        check_shape("direct", &s.direct, c)
    }

    /// Product projection on `(inner, direct)`, structure on `lifted`.
    pub fn p1(&self, s: &HybridState) -> Result<HybridState> {
        self.check(s)?;
        let (inner, direct) = match self.setup.mode {
            SvdMode::HalfRight => {
                let p = proj_product_fullrank(&self.product, &FactorPair::new(s.direct.clone(), s.inner.clone()))?;
                (p.y, p.x)
            }
            _ => {
                let p = proj_product_fullrank(&self.product, &FactorPair::new(s.inner.clone(), s.direct.clone()))?;
                (p.x, p.y)
            }
        };
        Ok(HybridState {
            inner,
            lifted: self.structure.project(&s.lifted),
            direct,
        })
    }

    /// Lift projection on `(inner, lifted)`, structure on `direct`.
    pub fn p2(&self, s: &HybridState) -> Result<HybridState> {
        self.check(s)?;
        let (inner, lifted) = match self.setup.mode {
            SvdMode::HalfRight => proj_lift_right(&self.setup, &s.inner, &s.lifted),
            _ => proj_lift_left(&self.setup, &s.inner, &s.lifted),
        };
        Ok(HybridState {
            inner,
            lifted,
            direct: self.structure.project(&s.direct),
        })
    }

    /// The factors `(X, Y)` represented by a state.
    pub fn factors<'a>(&self, s: &'a HybridState) -> (&'a Matrix, &'a Matrix) {
        match self.setup.mode {
            SvdMode::HalfRight => (&s.direct, &s.lifted),
            _ => (&s.lifted, &s.direct),
        }
    }
}

/// Projection of the four replica values of one nonnegative factor entry:
/// equalize replicas, then shift the two parts apart if their sum is
/// negative.
pub fn nonneg_four(xc: f64, xc_rep: f64, xp: f64, xp_rep: f64) -> (f64, f64, f64, f64) {
    let c = 0.5 * (xc + xc_rep);
    let p = 0.5 * (xp + xp_rep);
    if c + p >= 0.0 {
        (c, c, p, p)
    } else {
        let d = 0.5 * (c - p);
        (d, d, -d, -d)
    }
}

/// Ten-matrix state; `*_rep` are the replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct RankExcessiveState {
    pub w: Matrix,
    pub xc: Matrix,
    pub xc_rep: Matrix,
    pub xp: Matrix,
    pub xp_rep: Matrix,
    pub z: Matrix,
    pub yc: Matrix,
    pub yc_rep: Matrix,
    pub yp: Matrix,
    pub yp_rep: Matrix,
}

impl RankExcessiveState {
    /// `(X, Y) = (X_C + X_⊥, Y_C + Y_⊥)`.
    pub fn factors(&self) -> (Matrix, Matrix) {
        (&self.xc + &self.xp, &self.yc + &self.yp)
    }

    /// `X̃_C Y_⊥ + X_⊥ Ỹ_C + X̃_⊥ Ỹ_⊥`, zero at feasibility.
    pub fn orthogonality_residual(&self) -> Matrix {
        &self.xc_rep * &self.yp + &self.xp * &self.yc_rep + &self.xp_rep * &self.yp_rep
    }
}

/// Construction for factors whose rank exceeds `rank C`.
#[derive(Debug, Clone)]
pub struct RankExcessive {
    pub setup: ScaledSvdSetup,
    pub product: FullRankConstraint,
    pub structure: StructureKind,
    pub k: usize,
}

impl RankExcessive {
    /// Only `Nonnegative` and `None` structures have a replica projection.
    pub fn new(c: &Matrix, k: usize, g: f64, h: f64, t: usize, structure: StructureKind) -> Result<Self> {
        if !matches!(structure, StructureKind::Nonnegative | StructureKind::None) {
            return Err(Error::Unsupported(format!(
                "rank-excessive replica projection for {structure:?} structure"
            )));
        }
        let setup = setup_scaled_svd(c, g, h, SvdMode::Full)?;
        if k < setup.r {
            return Err(Error::InvalidInput(format!(
                "inner dimension {k} is below rank {}",
                setup.r
            )));
        }
        let product = FullRankConstraint::new(setup.product.clone(), k, t)?;
        Ok(RankExcessive {
            setup,
            product,
            structure,
            k,
        })
    }

    /// Shapes of `W`, an m×k X-part, `Z`, a k×n Y-part.
    pub fn shapes(&self) -> [(usize, usize); 4] {
        let (m, n, r, k) = (self.setup.u.nrows(), self.setup.v.ncols(), self.setup.r, self.k);
        [(r, k), (m, k), (k, r), (k, n)]
    }

    fn check(&self, s: &RankExcessiveState) -> Result<()> {
        let [sw, sx, sz, sy] = self.shapes();
        check_shape("W", &s.w, sw)?;
        for (name, a) in [("X_C", &s.xc), ("X~_C", &s.xc_rep), ("X_p", &s.xp), ("X~_p", &s.xp_rep)] {
            check_shape(name, a, sx)?;
        }
        check_shape("Z", &s.z, sz)?;
        for (name, a) in [("Y_C", &s.yc), ("Y~_C", &s.yc_rep), ("Y_p", &s.yp), ("Y~_p", &s.yp_rep)] {
            check_shape(name, a, sy)?;
        }
        Ok(())
    }

    fn four(&self, a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> (Matrix, Matrix, Matrix, Matrix) {
        let (rows, cols) = a.shape();
        let mut out = (
            Matrix::zeros(rows, cols),
            Matrix::zeros(rows, cols),
            Matrix::zeros(rows, cols),
            Matrix::zeros(rows, cols),
        );
        for idx in 0..a.len() {
            let (p, q, r, s) = match self.structure {
                StructureKind::Nonnegative => nonneg_four(a[idx], b[idx], c[idx], d[idx]),
                _ => {
                    let (u, v) = (0.5 * (a[idx] + b[idx]), 0.5 * (c[idx] + d[idx]));
                    (u, u, v, v)
                }
            };
            out.0[idx] = p;
            out.1[idx] = q;
            out.2[idx] = r;
            out.3[idx] = s;
        }
        out
    }

    /// Product projection on `(W, Z)`, replica/structure projection on each
    /// factor's four parts.
    pub fn p1(&self, s: &RankExcessiveState) -> Result<RankExcessiveState> {
        self.check(s)?;
        let wz = proj_product_fullrank(&self.product, &FactorPair::new(s.w.clone(), s.z.clone()))?;
        let (xc, xc_rep, xp, xp_rep) = self.four(&s.xc, &s.xc_rep, &s.xp, &s.xp_rep);
        let (yc, yc_rep, yp, yp_rep) = self.four(&s.yc, &s.yc_rep, &s.yp, &s.yp_rep);
        Ok(RankExcessiveState {
            w: wz.x,
            xc,
            xc_rep,
            xp,
            xp_rep,
            z: wz.y,
            yc,
            yc_rep,
            yp,
            yp_rep,
        })
    }

    /// Lift projections on `(W, X_C)`, `(Z, Y_C)` and the orthogonal-factor
    /// projection on `[X̃_C X_⊥ X̃_⊥] · [Y_⊥; Ỹ_C; Ỹ_⊥] = 0`.
    pub fn p2(&self, s: &RankExcessiveState) -> Result<RankExcessiveState> {
        self.check(s)?;
        let (w, xc) = proj_lift_left(&self.setup, &s.w, &s.xc);
        let (z, yc) = proj_lift_right(&self.setup, &s.z, &s.yc);
        let (m, k) = s.xc.shape();
        let n = s.yc.ncols();
        let mut x3 = Matrix::zeros(m, 3 * k);
        x3.columns_mut(0, k).copy_from(&s.xc_rep);
        x3.columns_mut(k, k).copy_from(&s.xp);
        x3.columns_mut(2 * k, k).copy_from(&s.xp_rep);
        let mut y3 = Matrix::zeros(3 * k, n);
        y3.rows_mut(0, k).copy_from(&s.yp);
        y3.rows_mut(k, k).copy_from(&s.yc_rep);
        y3.rows_mut(2 * k, k).copy_from(&s.yp_rep);
        let (x3, y3) = proj_orthogonal(&x3, &y3)?;
        Ok(RankExcessiveState {
            w,
            xc,
            xc_rep: x3.columns(0, k).into_owned(),
            xp: x3.columns(k, k).into_owned(),
            xp_rep: x3.columns(2 * k, k).into_owned(),
            z,
            yc,
            yc_rep: y3.rows(k, k).into_owned(),
            yp: y3.rows(0, k).into_owned(),
            yp_rep: y3.rows(2 * k, k).into_owned(),
        })
    }
}

/// Nearest matrix of rank at most one.
pub fn rank1_project(z: &Matrix) -> Matrix {
    matcore::rank1_approx(z)
}

/// Euclidean projection onto `{z' ≥ 0, Σ z' = c}`.
///
/// Sort descending once; then repeatedly shift the active prefix to the
/// right sum and drop the entries that became nonpositive.
pub fn simplex_project(z: &[f64], c: f64) -> Result<Vec<f64>> {
    if z.is_empty() {
        return Err(Error::InvalidInput("simplex projection of an empty tuple".into()));
    }
    if !(c >= 0.0) || z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "simplex projection needs finite values and c >= 0, got c={c}"
        )));
    }
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&i, &j| z[j].total_cmp(&z[i]));
    let mut len = z.len();
    let mut shift;
    loop {
        let sum: f64 = order[..len].iter().map(|&i| z[i]).sum();
        shift = (c - sum) / len as f64;
        // Sorted, so the positives after shifting form a prefix.
        let keep = order[..len].iter().take_while(|&&i| z[i] + shift > 0.0).count();
        if keep == len || keep == 0 {
            if keep == 0 {
                len = 0;
            }
            break;
        }
        len = keep;
    }
    let mut out = vec![0.0; z.len()];
    for &i in &order[..len] {
        out[i] = z[i] + shift;
    }
    Ok(out)
}

/// Nearest nonnegative integer tuple with sum `c` to the simplex projection
/// of `z`: round, then repair the sum by moving the entries with the largest
/// rounding error. Ties favour the lower index keeping the larger value.
pub fn lattice_project(z: &[f64], c: u64) -> Result<Vec<f64>> {
    let s = simplex_project(z, c as f64)?;
    let mut out: Vec<f64> = s.iter().map(|v| v.round()).collect();
    let total: f64 = out.iter().sum();
    let deficit = c as f64 - total;
    if deficit != 0.0 {
        // err_i = s_i - out_i in [-0.5, 0.5]
        let mut order: Vec<usize> = (0..s.len()).collect();
        if deficit > 0.0 {
            // Raise the most under-rounded entries; on ties the lower index.
            order.sort_by(|&i, &j| (s[j] - out[j]).total_cmp(&(s[i] - out[i])).then(i.cmp(&j)));
            for &i in order.iter().take(deficit as usize) {
                out[i] += 1.0;
            }
        } else {
            // Lower the most over-rounded entries; on ties the higher index.
            order.sort_by(|&i, &j| (out[j] - s[j]).total_cmp(&(out[i] - s[i])).then(j.cmp(&i)));
            let mut need = (-deficit) as usize;
            for &i in &order {
                if need == 0 {
                    break;
                }
                if out[i] >= 1.0 {
                    out[i] -= 1.0;
                    need -= 1;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneState {
    pub z: Vec<Matrix>,
}

/// Rank-one summand construction: `Σ_l Z^l = C`, each `Z^l` rank one.
#[derive(Debug, Clone)]
pub struct RankOne {
    pub c: Matrix,
    pub k: usize,
    pub structure: StructureKind,
    targets: Vec<u64>,
}

impl RankOne {
    /// `Nonnegative` uses the simplex projection, `Integer` the integer
    /// simplex (nonnegative integer summands), `None` only the sum.
    pub fn new(c: &Matrix, k: usize, structure: StructureKind) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("rank-one method needs k >= 1".into()));
        }
        let mut targets = Vec::new();
        match structure {
            StructureKind::Nonnegative => {
                if c.iter().any(|v| *v < 0.0) {
                    return Err(Error::InvalidInput(
                        "nonnegative summands need a nonnegative C".into(),
                    ));
                }
            }
            StructureKind::Integer => {
                for v in c.iter() {
                    if *v < 0.0 || v.fract() != 0.0 {
                        return Err(Error::InvalidInput(format!(
                            "integer summands need a nonnegative integer C, found {v}"
                        )));
                    }
                    targets.push(*v as u64);
                }
            }
            StructureKind::None => {}
            StructureKind::PmOne => {
                return Err(Error::Unsupported("±1 structure for rank-one summands".into()))
            }
        }
        Ok(RankOne {
            c: c.clone(),
            k,
            structure,
            targets,
        })
    }

    fn check(&self, s: &RankOneState) -> Result<()> {
        if s.z.len() != self.k {
            return Err(Error::InvalidInput(format!(
                "expected {} summands, got {}",
                self.k,
                s.z.len()
            )));
        }
        for z in &s.z {
            check_shape("summand", z, self.c.shape())?;
        }
        Ok(())
    }

    pub fn p1(&self, s: &RankOneState) -> Result<RankOneState> {
        self.check(s)?;
        Ok(RankOneState {
            z: s.z.iter().map(rank1_project).collect(),
        })
    }

    pub fn p2(&self, s: &RankOneState) -> Result<RankOneState> {
        self.check(s)?;
        let mut out = s.z.clone();
        let mut tuple = vec![0.0; self.k];
        for idx in 0..self.c.len() {
            for (l, z) in s.z.iter().enumerate() {
                tuple[l] = z[idx];
            }
            let projected = match self.structure {
                StructureKind::Nonnegative => simplex_project(&tuple, self.c[idx])?,
                StructureKind::Integer => lattice_project(&tuple, self.targets[idx])?,
                _ => {
                    let shift = (self.c[idx] - tuple.iter().sum::<f64>()) / self.k as f64;
                    tuple.iter().map(|v| v + shift).collect()
                }
            };
            for (l, z) in out.iter_mut().enumerate() {
                z[idx] = projected[l];
            }
        }
        Ok(RankOneState { z: out })
    }
}

/// Factors `X` (m×k), `Y` (k×n) with `X[:, l] Y[l, :] = Z^l`.
///
/// For each summand the first row with an entry above `tol · max|Z^l|` fixes
/// `x_i = scale[l]`; `y` follows from that row and the remaining `x` from the
/// largest entry of `y`. Summands farther than `tol · max(1, max|Z^l|)` from
/// rank one are rejected.
pub fn reassemble_rank1(s: &RankOneState, scale: &[f64], tol: f64) -> Result<(Matrix, Matrix)> {
    let k = s.z.len();
    if k == 0 || scale.len() != k {
        return Err(Error::InvalidInput(format!(
            "{} summands but {} scale factors",
            k,
            scale.len()
        )));
    }
    if scale.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::InvalidInput("scale factors must be positive".into()));
    }
    let (m, n) = s.z[0].shape();
    let mut x = Matrix::zeros(m, k);
    let mut y = Matrix::zeros(k, n);
    for (l, z) in s.z.iter().enumerate() {
        check_shape("summand", z, (m, n))?;
        let zmax = max_abs(z);
        let residual = max_abs(&(z - rank1_project(z)));
        if residual > tol * zmax.max(1.0) {
            return Err(Error::NotRankOne { index: l, residual });
        }
        let Some(i) = (0..m).find(|&i| (0..n).any(|j| z[(i, j)].abs() > tol * zmax)) else {
            continue;
        };
        let a = scale[l];
        x[(i, l)] = a;
        for j in 0..n {
            y[(l, j)] = z[(i, j)] / a;
        }
        let jmax = (0..n)
            .max_by(|&p, &q| y[(l, p)].abs().total_cmp(&y[(l, q)].abs()))
            .expect("n >= 1");
        let yj = y[(l, jmax)];
        for ii in 0..m {
            if ii != i {
                x[(ii, l)] = z[(ii, jmax)] / yj;
            }
        }
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::row_vector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn eye(n: usize) -> Matrix {
        Matrix::identity(n, n)
    }

    #[test]
    fn setup_identity_and_diagonal() {
        let s = setup_scaled_svd(&eye(2), 1.0, 1.0, SvdMode::Full).unwrap();
        assert!((&s.d - eye(2)).amax() < 1e-14);
        assert!((&s.u * &s.d * &s.v - eye(2)).amax() < 1e-14);

        let c = diag(&[4.0, 1.0]);
        let s = setup_scaled_svd(&c, 2.0, 1.0, SvdMode::Full).unwrap();
        assert!((s.u.transpose() * &s.u - eye(2) * 4.0).amax() < 1e-12);
        assert!((s.d[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((s.d[(1, 1)] - 0.5).abs() < 1e-12);
        assert!((&s.u * &s.d * &s.v - &c).amax() < 1e-12);
    }

    #[test]
    fn setup_reconstruction_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (m, n, r) = (rng.gen_range(1..7), rng.gen_range(1..7), rng.gen_range(1..4));
            let c = random(m, r, &mut rng) * random(r, n, &mut rng);
            for g in [0.3, 1.0, 3.0] {
                for h in [0.3, 1.0, 3.0] {
                    let s = setup_scaled_svd(&c, g, h, SvdMode::Full).unwrap();
                    assert!((&s.u * &s.d * &s.v - &c).norm() <= 1e-8 * c.norm());
                    let ir = eye(s.r);
                    assert!((s.u.transpose() * &s.u - &ir * (g * g)).amax() < 1e-9);
                    assert!((&s.v * s.v.transpose() - &ir * (h * h)).amax() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn setup_rejects_zero_and_bad_metric() {
        assert!(matches!(
            setup_scaled_svd(&Matrix::zeros(2, 2), 1.0, 1.0, SvdMode::Full),
            Err(Error::InvalidInput(_))
        ));
        assert!(setup_scaled_svd(&eye(2), 0.0, 1.0, SvdMode::Full).is_err());
    }

    #[test]
    fn half_modes_fold_the_product_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = random(5, 3, &mut rng) * random(3, 3, &mut rng);
        let s = setup_scaled_svd(&c, 1.5, 0.7, SvdMode::HalfLeft).unwrap();
        assert!((&s.u * &s.product - &c).amax() < 1e-10);
        let ct = c.transpose();
        let s = setup_scaled_svd(&ct, 1.5, 0.7, SvdMode::HalfRight).unwrap();
        assert!((&s.product * &s.v - &ct).amax() < 1e-10);
        assert!(setup_scaled_svd(&c, 1.0, 1.0, SvdMode::HalfRight).is_err());
    }

    #[test]
    fn lift_projection_cases() {
        // Scalar line x = w: (0, 1) -> (0.5, 0.5).
        let s = setup_scaled_svd(&Matrix::from_element(1, 1, 1.0), 1.0, 1.0, SvdMode::Full).unwrap();
        let (w, x) = proj_lift_left(&s, &Matrix::from_element(1, 1, 0.0), &Matrix::from_element(1, 1, 1.0));
        assert!((w[(0, 0)].abs() - 0.5).abs() < 1e-15);
        assert!((x[(0, 0)] - 0.5).abs() < 1e-15 || (x[(0, 0)] + 0.5).abs() < 1e-15);
        assert!((x - &s.u * &w).amax() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = random(6, 3, &mut rng) * random(3, 5, &mut rng);
        let s = setup_scaled_svd(&c, 1.0, 1.0, SvdMode::Full).unwrap();
        let x0 = random(6, 4, &mut rng);
        let (w1, x1) = proj_lift_left(&s, &Matrix::zeros(3, 4), &x0);
        assert!((&w1 - s.u.transpose() * &x0 / 2.0).amax() < 1e-14);
        assert!((&x1 - &s.u * s.u.transpose() * &x0 / 2.0).amax() < 1e-14);

        // Fixed point when X = U W.
        let w0 = random(3, 4, &mut rng);
        let (w2, x2) = proj_lift_left(&s, &w0, &(&s.u * &w0));
        assert!((w2 - &w0).amax() < 1e-12);
        assert!((x2 - &s.u * &w0).amax() < 1e-12);
    }

    fn feasible_rank_limited(rng: &mut ChaCha8Rng) -> (Matrix, Matrix, Matrix) {
        let x = Matrix::from_fn(7, 4, |_, _| rng.gen_range(0.0..1.0));
        let y = Matrix::from_fn(4, 6, |_, _| rng.gen_range(0.0..1.0));
        let c = &x * &y;
        (c, x, y)
    }

    #[test]
    fn rank_limited_structure_and_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (c, _, _) = feasible_rank_limited(&mut rng);
        let rl = RankLimited::new(&c, 4, 1.2, 1.2, 10, StructureKind::Nonnegative).unwrap();
        let state = RankLimitedState {
            w: random(4, 4, &mut rng),
            x: random(7, 4, &mut rng),
            z: random(4, 4, &mut rng),
            y: random(4, 6, &mut rng),
        };
        let a = rl.p1(&state).unwrap();
        assert!(a.x.iter().all(|v| *v >= 0.0));
        assert!((&a.w * &a.z - &rl.setup.d).amax() < 1e-8);
        let b = rl.p2(&state).unwrap();
        assert!((&b.x - &rl.setup.u * &b.w).amax() < 1e-12);
        assert!((&b.y - &b.z * &rl.setup.v).amax() < 1e-12);
        let bb = rl.p2(&b).unwrap();
        assert!((bb.w - &b.w).amax() < 1e-12 && (bb.y - &b.y).amax() < 1e-12);

        assert_eq!(StructureKind::Nonnegative.project(&row_vector(&[-0.5, 0.3])), row_vector(&[0.0, 0.3]));
        assert_eq!(StructureKind::PmOne.project(&row_vector(&[0.2, -0.2, 0.0])), row_vector(&[1.0, -1.0, 1.0]));
    }

    #[test]
    fn rank_limited_fixed_point_is_a_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (c, x, y) = feasible_rank_limited(&mut rng);
        let rl = RankLimited::new(&c, 4, 0.8, 1.3, 10, StructureKind::Nonnegative).unwrap();
        let g2 = rl.setup.g * rl.setup.g;
        let h2 = rl.setup.h * rl.setup.h;
        let w = rl.setup.u.transpose() * &x / g2;
        let z = &y * rl.setup.v.transpose() / h2;
        let s = RankLimitedState { w, x, z, y };
        let a = rl.p1(&s).unwrap();
        let b = rl.p2(&s).unwrap();
        for t in [&a, &b] {
            assert!((&t.w - &s.w).amax() < 1e-9);
            assert!((&t.x - &s.x).amax() < 1e-9);
            assert!((&t.z - &s.z).amax() < 1e-9);
            assert!((&t.y - &s.y).amax() < 1e-9);
        }
    }

    #[test]
    fn hybrid_fixed_point_and_feasibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        // X must have rank 3 = rank C to lie in the span of U.
        let a = Matrix::from_fn(6, 3, |_, _| rng.gen_range(0.0..1.0));
        let x = a * Matrix::from_fn(3, 4, |_, _| rng.gen_range(0.0..1.0));
        let y = Matrix::from_fn(4, 3, |_, _| rng.gen_range(0.0..1.0));
        let c = &x * &y;
        let hy = Hybrid::new(&c, 4, 1.1, 1.0, 10, StructureKind::Nonnegative).unwrap();
        assert_eq!(hy.setup.mode, SvdMode::HalfLeft);
        let g2 = hy.setup.g * hy.setup.g;
        let s = HybridState {
            inner: hy.setup.u.transpose() * &x / g2,
            lifted: x.clone(),
            direct: y.clone(),
        };
        for t in [hy.p1(&s).unwrap(), hy.p2(&s).unwrap()] {
            assert!((&t.inner - &s.inner).amax() < 1e-9);
            assert!((&t.lifted - &s.lifted).amax() < 1e-9);
            assert!((&t.direct - &s.direct).amax() < 1e-9);
        }
        let r = HybridState {
            inner: random(3, 4, &mut rng),
            lifted: random(6, 4, &mut rng),
            direct: random(4, 3, &mut rng),
        };
        let a = hy.p1(&r).unwrap();
        assert!((&a.inner * &a.direct - &hy.setup.product).amax() < 1e-8);

        // Transposed instance takes the half-right route.
        let hy = Hybrid::new(&c.transpose(), 4, 1.0, 1.1, 10, StructureKind::Nonnegative).unwrap();
        assert_eq!(hy.setup.mode, SvdMode::HalfRight);
        let h2 = hy.setup.h * hy.setup.h;
        let s = HybridState {
            inner: x.transpose() * hy.setup.v.transpose() / h2,
            lifted: x.transpose(),
            direct: y.transpose(),
        };
        let (fx, fy) = hy.factors(&s);
        assert!((fx * fy - c.transpose()).amax() < 1e-12);
        for t in [hy.p1(&s).unwrap(), hy.p2(&s).unwrap()] {
            assert!((&t.inner - &s.inner).amax() < 1e-9);
            assert!((&t.direct - &s.direct).amax() < 1e-9);
        }
    }

    #[test]
    fn nonneg_four_cases() {
        assert_eq!(nonneg_four(1.0, 1.0, 2.0, 2.0), (1.0, 1.0, 2.0, 2.0));
        assert_eq!(nonneg_four(-3.0, -1.0, 1.0, 1.0), (-1.5, -1.5, 1.5, 1.5));
        assert_eq!(nonneg_four(0.0, 0.0, 0.0, 0.0), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn nonneg_four_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let (a, b, c, d) = nonneg_four(v[0], v[1], v[2], v[3]);
            assert_eq!(a, b);
            assert_eq!(c, d);
            assert!(a + c >= -1e-15);
            assert_eq!(nonneg_four(a, b, c, d), (a, b, c, d));
            // Nearest point: compare with a brute-force grid of feasible
            // candidates built from the two free values.
            let dist = |p: f64, q: f64| {
                (p - v[0]).powi(2) + (p - v[1]).powi(2) + (q - v[2]).powi(2) + (q - v[3]).powi(2)
            };
            let best = dist(a, c);
            for i in -30..=30 {
                for j in -30..=30 {
                    let (p, q) = (i as f64 * 0.1, j as f64 * 0.1);
                    if p + q >= 0.0 {
                        assert!(dist(p, q) >= best - 1e-12);
                    }
                }
            }
        }
    }

    fn edm6() -> Matrix {
        Matrix::from_fn(6, 6, |i, j| (i as f64 - j as f64).powi(2))
    }

    fn random_excessive(re: &RankExcessive, rng: &mut ChaCha8Rng) -> RankExcessiveState {
        let [sw, sx, sz, sy] = re.shapes();
        let mut r = |s: (usize, usize)| random(s.0, s.1, rng);
        RankExcessiveState {
            w: r(sw),
            xc: r(sx),
            xc_rep: r(sx),
            xp: r(sx),
            xp_rep: r(sx),
            z: r(sz),
            yc: r(sy),
            yc_rep: r(sy),
            yp: r(sy),
            yp_rep: r(sy),
        }
    }

    #[test]
    fn rank_excessive_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let re = RankExcessive::new(&edm6(), 5, 0.5, 0.5, 10, StructureKind::Nonnegative).unwrap();
        let s = random_excessive(&re, &mut rng);
        let a = re.p1(&s).unwrap();
        assert_eq!(a.xc, a.xc_rep);
        assert_eq!(a.yp, a.yp_rep);
        let (x, y) = a.factors();
        assert!(x.iter().chain(y.iter()).all(|v| *v >= -1e-15));
        assert!((&a.w * &a.z - &re.setup.d).amax() < 1e-8);

        let b = re.p2(&s).unwrap();
        assert!(b.orthogonality_residual().amax() < 1e-9);
        assert!((&b.xc - &re.setup.u * &b.w).amax() < 1e-12);
        assert!((&b.yc - &b.z * &re.setup.v).amax() < 1e-12);
        let bb = re.p2(&b).unwrap();
        assert!((bb.xp - &b.xp).amax() < 1e-9);
    }

    #[test]
    fn rank_excessive_zero_block_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let re = RankExcessive::new(&edm6(), 5, 0.5, 0.5, 10, StructureKind::Nonnegative).unwrap();
        let mut s = random_excessive(&re, &mut rng);
        let zx = Matrix::zeros(6, 5);
        s.xc_rep = zx.clone();
        s.xp = zx.clone();
        s.xp_rep = zx;
        let b = re.p2(&s).unwrap();
        assert!(b.xc_rep.amax() < 1e-15 && b.xp.amax() < 1e-15 && b.xp_rep.amax() < 1e-15);
        assert!((&b.yc_rep - &s.yc_rep).amax() < 1e-12);
        assert!((&b.yp - &s.yp).amax() < 1e-12);
    }

    #[test]
    fn rank_excessive_single_element() {
        let c = Matrix::from_element(1, 1, 2.0);
        let re = RankExcessive::new(&c, 1, 1.0, 1.0, 10, StructureKind::Nonnegative).unwrap();
        let e = |v: f64| Matrix::from_element(1, 1, v);
        let s = RankExcessiveState {
            w: e(1.0),
            xc: e(-3.0),
            xc_rep: e(-1.0),
            xp: e(1.0),
            xp_rep: e(1.0),
            z: e(1.0),
            yc: e(1.0),
            yc_rep: e(1.0),
            yp: e(2.0),
            yp_rep: e(2.0),
        };
        let a = re.p1(&s).unwrap();
        assert_eq!((a.xc[0], a.xc_rep[0], a.xp[0], a.xp_rep[0]), (-1.5, -1.5, 1.5, 1.5));
        assert!((a.w[0] * a.z[0] - re.setup.d[0]).abs() < 1e-12);
    }

    #[test]
    fn rank_excessive_rejects_discrete_structure() {
        assert!(matches!(
            RankExcessive::new(&edm6(), 5, 0.5, 0.5, 10, StructureKind::PmOne),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn rank1_projection_cases() {
        let a = Matrix::from_row_slice(2, 2, &[3.0, 4.0, 6.0, 8.0]);
        assert!((rank1_project(&a) - &a).amax() < 1e-12);
        assert!((rank1_project(&diag(&[3.0, 1.0])) - diag(&[3.0, 0.0])).amax() < 1e-12);
        assert_eq!(rank1_project(&Matrix::zeros(3, 2)), Matrix::zeros(3, 2));
    }

    #[test]
    fn simplex_cases() {
        assert_eq!(simplex_project(&[0.5, 0.5], 1.0).unwrap(), vec![0.5, 0.5]);
        assert_eq!(simplex_project(&[2.0, 0.0], 1.0).unwrap(), vec![1.0, 0.0]);
        let p = simplex_project(&[3.0, 2.0, -1.0], 3.0).unwrap();
        assert!((p[0] - 2.0).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12 && p[2] == 0.0);
        assert_eq!(simplex_project(&[1.0, -2.0], 0.0).unwrap(), vec![0.0, 0.0]);
        assert!(simplex_project(&[], 1.0).is_err());
    }

    #[test]
    fn lattice_cases() {
        assert_eq!(lattice_project(&[1.0, 1.0, 1.0], 3).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(lattice_project(&[1.6, 1.6, -0.2], 3).unwrap(), vec![2.0, 1.0, 0.0]);
        assert_eq!(lattice_project(&[2.9, 0.1], 3).unwrap(), vec![3.0, 0.0]);
        assert_eq!(lattice_project(&[0.2, 0.2, 0.2], 0).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn rank_one_projection_pair() {
        let c = Matrix::from_row_slice(1, 1, &[1.0]);
        let ro = RankOne::new(&c, 2, StructureKind::Nonnegative).unwrap();
        let s = RankOneState {
            z: vec![Matrix::from_element(1, 1, 2.0), Matrix::from_element(1, 1, 0.0)],
        };
        let p = ro.p2(&s).unwrap();
        assert_eq!((p.z[0][0], p.z[1][0]), (1.0, 0.0));
        assert_eq!(ro.p1(&s).unwrap(), s);

        // Feasible integer decomposition of the 6x6 distance matrix is fixed.
        let c = edm6();
        let ro = RankOne::new(&c, 2, StructureKind::Integer).unwrap();
        let upper = Matrix::from_fn(6, 6, |i, j| if j > i { c[(i, j)] } else { 0.0 });
        let lower = &c - &upper;
        let s = RankOneState { z: vec![upper, lower] };
        assert_eq!(ro.p2(&s).unwrap(), s);

        assert!(RankOne::new(&row_vector(&[-1.0]), 2, StructureKind::Nonnegative).is_err());
        assert!(RankOne::new(&row_vector(&[1.5]), 2, StructureKind::Integer).is_err());
    }

    #[test]
    fn reassemble_cases() {
        let z1 = Matrix::from_row_slice(2, 2, &[3.0, 4.0, 6.0, 8.0]);
        let s = RankOneState {
            z: vec![z1.clone(), Matrix::zeros(2, 2)],
        };
        let (x, y) = reassemble_rank1(&s, &[1.0, 1.0], 1e-9).unwrap();
        assert_eq!(x.column(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 2.0]);
        assert_eq!(y.row(0).iter().copied().collect::<Vec<_>>(), vec![3.0, 4.0]);
        assert_eq!(x.column(1).amax(), 0.0);
        assert_eq!(y.row(1).amax(), 0.0);
        assert!((&x * &y - &z1).amax() < 1e-12);

        let (x2, y2) = reassemble_rank1(&s, &[2.0, 1.0], 1e-9).unwrap();
        assert!((x2.column(0) - x.column(0) * 2.0).amax() < 1e-12);
        assert!((y2.row(0) - y.row(0) * 0.5).amax() < 1e-12);

        let bad = RankOneState { z: vec![diag(&[1.0, 1.0])] };
        assert!(matches!(
            reassemble_rank1(&bad, &[1.0], 1e-9),
            Err(Error::NotRankOne { index: 0, .. })
        ));
    }
}
