//! Problem families: generators, constraint pairs, starting points and exact
//! verifiers.
//!
//! | family         | constraint                        | default method   |
//! |----------------|-----------------------------------|------------------|
//! | `gram`         | `X Xᵀ = C`, `X ∈ {±1}`            | `gram`           |
//! | `hadamard`     | `H Hᵀ = m I`, `H ∈ {±1}`          | `gram`           |
//! | `cyclic`       | `x(q) y(q) = c(q)` mod `qᵐ − 1`   | `cyclic`         |
//! | `nmf_designed` | `X Y = C`, `X, Y ≥ 0`             | `rank_limited`   |
//! | `udisj`        | `X Y = C`, `X, Y ≥ 0`             | `rank_limited`   |
//! | `edm`          | `X Y = C`, `C_ij = (i−j)²`        | `rank_excessive` |
//! | `int2d`        | `x y = c` over the integers       | flow field only  |

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compound::{
    lattice_project, RankExcessive, RankExcessiveState, RankLimited, RankLimitedState, RankOne,
    RankOneState, StructureKind,
};
use crate::error::{Error, Result};
use crate::matcore::{self, max_abs, read_matrix, row_vector, write_matrix, Dft, Matrix, DEFAULT_RANK_TOL};
use crate::projections::{proj_gram, proj_scalar_product, GramConstraint};
use crate::solver::{init_random_with, rng_from_seed, ConstraintPair, Sampler, SolveOutcome, SplitVariables};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gram,
    Hadamard,
    Cyclic,
    NmfDesigned,
    Udisj,
    Edm,
    Int2d,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Gram => "gram",
            Family::Hadamard => "hadamard",
            Family::Cyclic => "cyclic",
            Family::NmfDesigned => "nmf_designed",
            Family::Udisj => "udisj",
            Family::Edm => "edm",
            Family::Int2d => "int2d",
        }
    }
}

/// Family parameters; unused ones stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Named instance (e.g. `maxdet15`, `c23`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub family: Family,
    pub params: Params,
    /// Constraint matrix; for `cyclic` the 1×m coefficient row.
    pub c: Matrix,
    pub hidden_x: Option<Matrix>,
    pub hidden_y: Option<Matrix>,
}

fn pm_one(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Random `X ∈ {±1}^{m×k}` and its Gram matrix.
pub fn gen_gram(m: usize, k: usize, seed: u64) -> Result<ProblemInstance> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidInput("gram instance needs m, k >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut x = Matrix::zeros(m, k);
    for i in 0..m {
        for j in 0..k {
            x[(i, j)] = pm_one(&mut rng);
        }
    }
    Ok(ProblemInstance {
        family: Family::Gram,
        params: Params {
            m: Some(m),
            k: Some(k),
            seed: Some(seed),
            ..Params::default()
        },
        c: &x * x.transpose(),
        hidden_x: Some(x),
        hidden_y: None,
    })
}

/// Candidate Gram matrix of a 15×15 maximum-determinant `±1` matrix:
/// `12 I + B` with `B` the 16×16 block matrix `[3J −J −J −J; …]` (J the 4×4
/// all-ones block) without its last row and column.
pub fn maxdet_candidate_15() -> ProblemInstance {
    let c = Matrix::from_fn(15, 15, |i, j| {
        let b = if i / 4 == j / 4 { 3.0 } else { -1.0 };
        b + if i == j { 12.0 } else { 0.0 }
    });
    ProblemInstance {
        family: Family::Gram,
        params: Params {
            m: Some(15),
            k: Some(15),
            name: Some("maxdet15".into()),
            ..Params::default()
        },
        c,
        hidden_x: None,
        hidden_y: None,
    }
}

/// `H Hᵀ = m I`. A hidden solution (Sylvester construction) is attached when
/// `m` is a power of two.
pub fn gen_hadamard(m: usize) -> Result<ProblemInstance> {
    if !(m == 1 || m == 2 || (m > 0 && m % 4 == 0)) {
        return Err(Error::InvalidInput(format!(
            "Hadamard order must be 1, 2 or a multiple of 4, got {m}"
        )));
    }
    let hidden = m.is_power_of_two().then(|| {
        let mut h = Matrix::from_element(1, 1, 1.0);
        while h.nrows() < m {
            let s = h.nrows();
            let mut next = Matrix::zeros(2 * s, 2 * s);
            next.view_mut((0, 0), (s, s)).copy_from(&h);
            next.view_mut((0, s), (s, s)).copy_from(&h);
            next.view_mut((s, 0), (s, s)).copy_from(&h);
            next.view_mut((s, s), (s, s)).copy_from(&(-&h));
            h = next;
        }
        h
    });
    Ok(ProblemInstance {
        family: Family::Hadamard,
        params: Params {
            m: Some(m),
            k: Some(m),
            ..Params::default()
        },
        c: Matrix::identity(m, m) * m as f64,
        hidden_x: hidden,
        hidden_y: None,
    })
}

/// Product in `Z[q]/(qᵐ − 1)`: `z_k = Σ_i x_i y_{(k−i) mod m}`.
pub fn cyclic_product(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "cyclic product of lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let m = x.len();
    Ok((0..m)
        .map(|k| (0..m).map(|i| x[i] * y[(k + m - i) % m]).sum())
        .collect())
}

fn cyclic_product_int(x: &[i64], y: &[i64]) -> Vec<i64> {
    let m = x.len();
    (0..m)
        .map(|k| (0..m).map(|i| x[i] * y[(k + m - i) % m]).sum())
        .collect()
}

/// Coefficients of the degree-22 cyclic polynomial with `±1` factors used as
/// the cyclic benchmark.
pub const C23: [i64; 23] = [
    1, -3, -3, -3, 1, 1, 1, 1, 1, -3, -3, -3, 1, -3, -3, 1, -3, -3, 1, 1, -3, 1, 1,
];

pub fn c23_instance() -> ProblemInstance {
    cyclic_instance(&C23.iter().map(|&v| v as f64).collect::<Vec<_>>(), Some("c23"))
}

pub fn cyclic_instance(coeffs: &[f64], name: Option<&str>) -> ProblemInstance {
    ProblemInstance {
        family: Family::Cyclic,
        params: Params {
            m: Some(coeffs.len()),
            name: name.map(String::from),
            ..Params::default()
        },
        c: row_vector(coeffs),
        hidden_x: None,
        hidden_y: None,
    }
}

/// Random `±1` factors and their cyclic product.
pub fn gen_cyclic(m: usize, seed: u64) -> Result<ProblemInstance> {
    if m == 0 {
        return Err(Error::InvalidInput("cyclic instance needs m >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let x: Vec<f64> = (0..m).map(|_| pm_one(&mut rng)).collect();
    let y: Vec<f64> = (0..m).map(|_| pm_one(&mut rng)).collect();
    let c = cyclic_product(&x, &y)?;
    let mut inst = cyclic_instance(&c, None);
    inst.params.seed = Some(seed);
    inst.hidden_x = Some(row_vector(&x));
    inst.hidden_y = Some(row_vector(&y));
    Ok(inst)
}

/// Product-constraint projection for cyclic polynomials: per-frequency
/// scalar projections on `x̂_l ŷ_l = ĉ_l / √m`, conjugate frequencies
/// projected once and mirrored.
#[derive(Debug, Clone)]
pub struct FourierProduct {
    dft: Dft,
    target: Vec<Complex64>,
    pub t: usize,
}

impl FourierProduct {
    pub fn new(c: &[f64], t: usize) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidInput("empty coefficient vector".into()));
        }
        let dft = Dft::new(c.len());
        let scale = 1.0 / (c.len() as f64).sqrt();
        let target = dft.forward_real(c).into_iter().map(|v| v * scale).collect();
        Ok(FourierProduct { dft, target, t })
    }

    pub fn len(&self) -> usize {
        self.dft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dft.is_empty()
    }

    /// Projected spectra of `x` and `y` (conjugate-symmetric).
    pub fn project_spectra(&self, x: &[f64], y: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let m = self.len();
        let mut xh = self.dft.forward_real(x);
        let mut yh = self.dft.forward_real(y);
        for l in 0..=m / 2 {
            let (a, b) = proj_scalar_product(self.target[l], (xh[l], yh[l]), self.t);
            xh[l] = a;
            yh[l] = b;
            let mirror = (m - l) % m;
            if mirror != l {
                xh[mirror] = a.conj();
                yh[mirror] = b.conj();
            }
        }
        (xh, yh)
    }

    pub fn project(&self, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let m = self.len();
        if x.len() != m || y.len() != m {
            return Err(Error::InvalidInput(format!(
                "coefficient vectors must have length {m}"
            )));
        }
        let (xh, yh) = self.project_spectra(x, y);
        Ok((self.dft.inverse_real(&xh), self.dft.inverse_real(&yh)))
    }
}

/// Nearest (approximately, `t` refinement cycles) pair with cyclic product `c`.
pub fn fourier_product_projection(x: &[f64], y: &[f64], c: &[f64], t: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != c.len() {
        return Err(Error::InvalidInput("coefficient length mismatch".into()));
    }
    FourierProduct::new(c, t)?.project(x, y)
}

/// Exact nonnegative factorization with a forced fraction `f` of zero
/// entries in each factor. Redrawn until `rank C = k` and no column of `X`
/// or row of `Y` is entirely zero.
pub fn gen_nmf_designed(m: usize, n: usize, k: usize, f: f64, seed: u64) -> Result<ProblemInstance> {
    if m == 0 || n == 0 || k == 0 || !(0.0..1.0).contains(&f) {
        return Err(Error::InvalidInput(format!(
            "nmf instance needs m, n, k >= 1 and 0 <= f < 1, got m={m} n={n} k={k} f={f}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let sparse = |rows: usize, cols: usize, rng: &mut ChaCha8Rng| {
        let mut a = Matrix::from_fn(rows, cols, |_, _| 0.0);
        for i in 0..rows {
            for j in 0..cols {
                a[(i, j)] = rng.gen::<f64>();
            }
        }
        let zeros = (f * (rows * cols) as f64).floor() as usize;
        for idx in sample(rng, rows * cols, zeros) {
            a[(idx / cols, idx % cols)] = 0.0;
        }
        a
    };
    for _ in 0..100 {
        let x = sparse(m, k, &mut rng);
        let y = sparse(k, n, &mut rng);
        let dead_col = (0..k).any(|j| x.column(j).iter().all(|v| *v == 0.0));
        let dead_row = (0..k).any(|i| y.row(i).iter().all(|v| *v == 0.0));
        if dead_col || dead_row {
            continue;
        }
        let c = &x * &y;
        if matcore::rank(&c, DEFAULT_RANK_TOL)? != k {
            continue;
        }
        return Ok(ProblemInstance {
            family: Family::NmfDesigned,
            params: Params {
                m: Some(m),
                n: Some(n),
                k: Some(k),
                f: Some(f),
                seed: Some(seed),
                ..Params::default()
            },
            c,
            hidden_x: Some(x),
            hidden_y: Some(y),
        });
    }
    Err(Error::GenerationFailed(format!(
        "no rank-{k} instance in 100 draws (m={m}, n={n}, f={f})"
    )))
}

/// Largest `m·n` a generated constraint matrix may have.
const MAX_ENTRIES: usize = 1 << 26;

/// Unique-disjointness factors: `X_{d+1} = [X X X; 0 X 0; X 0 0; 0 0 X]`,
/// `Y_{d+1} = [Y Y 0 0; Y 0 Y 0; Y 0 0 Y]`, `X_1 = Y_1 = [1]`.
pub fn udisj(d: usize) -> Result<ProblemInstance> {
    if d == 0 {
        return Err(Error::InvalidInput("udisj needs d >= 1".into()));
    }
    let side = 4usize
        .checked_pow(d as u32 - 1)
        .filter(|s| s.checked_mul(*s).is_some_and(|e| e <= MAX_ENTRIES))
        .ok_or_else(|| Error::ResourceLimit(format!("udisj d={d} exceeds the size budget")))?;
    let mut x = Matrix::from_element(1, 1, 1.0);
    let mut y = Matrix::from_element(1, 1, 1.0);
    for _ in 1..d {
        let (a, b) = x.shape();
        let mut xn = Matrix::zeros(4 * a, 3 * b);
        for (bi, bj) in [(0, 0), (0, 1), (0, 2), (1, 1), (2, 0), (3, 2)] {
            xn.view_mut((bi * a, bj * b), (a, b)).copy_from(&x);
        }
        let (p, q) = y.shape();
        let mut yn = Matrix::zeros(3 * p, 4 * q);
        for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 2), (2, 0), (2, 3)] {
            yn.view_mut((bi * p, bj * q), (p, q)).copy_from(&y);
        }
        x = xn;
        y = yn;
    }
    debug_assert_eq!(x.nrows(), side);
    Ok(ProblemInstance {
        family: Family::Udisj,
        params: Params {
            m: Some(side),
            n: Some(side),
            k: Some(x.ncols()),
            d: Some(d),
            ..Params::default()
        },
        c: &x * &y,
        hidden_x: Some(x),
        hidden_y: Some(y),
    })
}

/// Linear Euclidean distance matrix `C_ij = (i − j)²`.
pub fn edm(m: usize) -> Result<ProblemInstance> {
    if m < 3 {
        return Err(Error::InvalidInput(format!("edm needs m >= 3, got {m}")));
    }
    Ok(ProblemInstance {
        family: Family::Edm,
        params: Params {
            m: Some(m),
            n: Some(m),
            ..Params::default()
        },
        c: Matrix::from_fn(m, m, |i, j| (i as f64 - j as f64).powi(2)),
        hidden_x: None,
        hidden_y: None,
    })
}

/// Planar integer factorization toy `x y = c`.
pub fn int2d(c: i64) -> ProblemInstance {
    ProblemInstance {
        family: Family::Int2d,
        params: Params {
            c: Some(c),
            ..Params::default()
        },
        c: Matrix::from_element(1, 1, c as f64),
        hidden_x: None,
        hidden_y: None,
    }
}

/// Projections of the planar toy: the hyperbola `x y = c` (quasiprojection
/// with `t` refinement cycles) and rounding to the integer lattice.
pub fn int2d_projections(
    c: f64,
    t: usize,
) -> (impl Fn(f64, f64) -> Option<(f64, f64)>, impl Fn(f64, f64) -> Option<(f64, f64)>) {
    let hyperbola = move |x: f64, y: f64| {
        let (a, b) = proj_scalar_product(
            Complex64::new(c, 0.0),
            (Complex64::new(x, 0.0), Complex64::new(y, 0.0)),
            t,
        );
        Some((a.re, b.re))
    };
    let round = |x: f64, y: f64| Some((x.round(), y.round()));
    (hyperbola, round)
}

/// Special starting point of the rank-excessive construction: the SVD
/// factorization `X_C = U √D`, `Y_C = √D V` (zero-padded to k), parts
/// `X_⊥ = max(0, −X_C)`, `Y_⊥ = max(0, −Y_C)`, replicas equal. Every
/// constraint except the orthogonality block holds.
pub fn edm_special_init(re: &RankExcessive) -> RankExcessiveState {
    let s = &re.setup;
    let (r, k) = (s.r, re.k);
    let mut w = Matrix::zeros(r, k);
    let mut z = Matrix::zeros(k, r);
    for i in 0..r {
        // d = D/(g h), so √D = √(d g h); W = √D / g keeps X_C = (g U₀) W.
        let sq = (s.d[(i, i)] * s.g * s.h).sqrt();
        w[(i, i)] = sq / s.g;
        z[(i, i)] = sq / s.h;
    }
    let xc = &s.u * &w;
    let yc = &z * &s.v;
    let xp = xc.map(|v| (-v).max(0.0));
    let yp = yc.map(|v| (-v).max(0.0));
    RankExcessiveState {
        w,
        xc_rep: xc.clone(),
        xc,
        xp_rep: xp.clone(),
        xp,
        z,
        yc_rep: yc.clone(),
        yc,
        yp_rep: yp.clone(),
        yp,
    }
}

/// A candidate answer for an instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidate {
    /// `X`, and `Y` where the family has a second factor.
    Factors { x: Matrix, y: Option<Matrix> },
    /// Rank-one summands `Z^l` of `C`.
    Summands(Vec<Matrix>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected(String),
}

impl Verdict {
    pub fn accepted(&self) -> bool {
        *self == Verdict::Accepted
    }
}

/// Default tolerance of the continuous (nonnegative) verifier, relative to
/// `max(1, max|C|)`. Near a solution the iterates approach it only as fast
/// as the product projection is accurate, so a solution is declared once the
/// nonnegative factors reproduce `C` to this accuracy.
pub const NMF_TOL: f64 = 1e-3;

fn to_int(a: &Matrix) -> Option<Vec<i64>> {
    a.iter()
        .map(|v| (v.is_finite() && v.abs() < 1e15).then(|| v.round() as i64))
        .collect()
}

fn reject(reason: impl Into<String>) -> Verdict {
    Verdict::Rejected(reason.into())
}

fn shape_check(what: &str, a: &Matrix, shape: (usize, usize)) -> Option<Verdict> {
    (a.shape() != shape).then(|| {
        reject(format!(
            "shape: {what} is {}x{}, expected {}x{}",
            a.nrows(),
            a.ncols(),
            shape.0,
            shape.1
        ))
    })
}

/// Integer Gram check: entries round to `±1` and `X Xᵀ = C` exactly.
fn verify_gram(c: &Matrix, x: &Matrix) -> Verdict {
    let m = c.nrows();
    if x.nrows() != m {
        return reject(format!("shape: X has {} rows, expected {m}", x.nrows()));
    }
    let Some(xi) = to_int(x) else {
        return reject("non-finite entry");
    };
    if xi.iter().any(|v| v.abs() != 1) {
        return reject("entry is not ±1");
    }
    let Some(ci) = to_int(c) else {
        return reject("constraint matrix is not integer");
    };
    let k = x.ncols();
    // Column-major storage: xi[i + m * l].
    for i in 0..m {
        for j in 0..m {
            let dot: i64 = (0..k).map(|l| xi[i + m * l] * xi[j + m * l]).sum();
            if dot != ci[i + m * j] {
                return reject(format!("gram entry ({i},{j}) is {dot}, expected {}", ci[i + m * j]));
            }
        }
    }
    Verdict::Accepted
}

fn verify_cyclic(c: &Matrix, x: &Matrix, y: &Matrix) -> Verdict {
    let m = c.len();
    for (name, a) in [("x", x), ("y", y)] {
        if a.len() != m {
            return reject(format!("shape: {name} has {} coefficients, expected {m}", a.len()));
        }
    }
    let (Some(xi), Some(yi), Some(ci)) = (to_int(x), to_int(y), to_int(c)) else {
        return reject("non-finite entry");
    };
    if xi.iter().chain(&yi).any(|v| v.abs() != 1) {
        return reject("coefficient is not ±1");
    }
    if cyclic_product_int(&xi, &yi) != ci {
        return reject("cyclic product differs from c");
    }
    Verdict::Accepted
}

fn verify_nonneg(c: &Matrix, x: &Matrix, y: &Matrix, rel_tol: f64) -> Verdict {
    if x.nrows() != c.nrows() || y.ncols() != c.ncols() || x.ncols() != y.nrows() {
        return reject(format!(
            "shape: X {}x{}, Y {}x{} do not multiply to {}x{}",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols(),
            c.nrows(),
            c.ncols()
        ));
    }
    let tol = rel_tol * max_abs(c).max(1.0);
    let min = x.iter().chain(y.iter()).fold(f64::INFINITY, |a, b| a.min(*b));
    if !(min >= -tol) {
        return reject(format!("negative entry {min:e}"));
    }
    let resid = max_abs(&(x * y - c));
    if !(resid <= tol) {
        return reject(format!("product residual {resid:e} exceeds {tol:e}"));
    }
    Verdict::Accepted
}

/// Rank ≤ 1 test of an integer m×n matrix stored column-major.
fn int_rank_le1(z: &[i64], m: usize, n: usize) -> bool {
    let Some(p) = z.iter().position(|v| *v != 0) else {
        return true;
    };
    let (i0, j0) = (p % m, p / m);
    let pivot = z[p] as i128;
    for j in 0..n {
        let top = z[i0 + m * j] as i128;
        for i in 0..m {
            if z[i + m * j] as i128 * pivot != top * z[i + m * j0] as i128 {
                return false;
            }
        }
    }
    true
}

/// Rounded summands are nonnegative, rank ≤ 1, and sum to `C` exactly.
fn verify_summands(c: &Matrix, summands: &[Matrix]) -> Verdict {
    let (m, n) = c.shape();
    let Some(ci) = to_int(c) else {
        return reject("constraint matrix is not integer");
    };
    let mut total = vec![0i64; m * n];
    let mut ints = Vec::with_capacity(summands.len());
    for (l, z) in summands.iter().enumerate() {
        if let Some(v) = shape_check(&format!("summand {l}"), z, (m, n)) {
            return v;
        }
        let Some(zi) = to_int(z) else {
            return reject(format!("summand {l} has a non-finite entry"));
        };
        for (t, v) in total.iter_mut().zip(&zi) {
            *t += v;
        }
        ints.push(zi);
    }
    if total != ci {
        return reject("rounded summands do not sum to C");
    }
    for (l, zi) in ints.iter().enumerate() {
        if zi.iter().any(|v| *v < 0) {
            return reject(format!("summand {l} has a negative entry"));
        }
        if !int_rank_le1(zi, m, n) {
            return reject(format!("summand {l} is not rank one"));
        }
    }
    Verdict::Accepted
}

/// Rank-one summands `X[:, l] Y[l, :]` of a factor pair.
pub fn summands_of(x: &Matrix, y: &Matrix) -> Vec<Matrix> {
    (0..x.ncols()).map(|l| x.column(l) * y.row(l)).collect()
}

/// Family-specific exact acceptance test.
pub fn verify(instance: &ProblemInstance, candidate: &Candidate) -> Verdict {
    verify_with_tol(instance, candidate, NMF_TOL)
}

/// [`verify`] with an explicit relative tolerance for the continuous
/// families.
pub fn verify_with_tol(instance: &ProblemInstance, candidate: &Candidate, nmf_tol: f64) -> Verdict {
    let c = &instance.c;
    match (instance.family, candidate) {
        (Family::Gram | Family::Hadamard, Candidate::Factors { x, .. }) => verify_gram(c, x),
        (Family::Cyclic, Candidate::Factors { x, y: Some(y) }) => verify_cyclic(c, x, y),
        (Family::NmfDesigned | Family::Udisj, Candidate::Factors { x, y: Some(y) }) => {
            verify_nonneg(c, x, y, nmf_tol)
        }
        (Family::Edm, Candidate::Factors { x, y: Some(y) }) => {
            if x.nrows() != c.nrows() || y.ncols() != c.ncols() || x.ncols() != y.nrows() {
                return reject("shape: factors do not match C");
            }
            verify_summands(c, &summands_of(x, y))
        }
        (Family::Edm | Family::NmfDesigned | Family::Udisj, Candidate::Summands(z)) => {
            verify_summands(c, z)
        }
        (Family::Int2d, Candidate::Factors { x, y: Some(y) }) => {
            let (Some(a), Some(b), Some(ci)) = (to_int(x), to_int(y), to_int(c)) else {
                return reject("non-finite entry");
            };
            if a.len() != 1 || b.len() != 1 {
                return reject("shape: int2d factors are scalars");
            }
            if a[0] * b[0] == ci[0] && (x[0] - a[0] as f64).abs() < 1e-9 && (y[0] - b[0] as f64).abs() < 1e-9 {
                Verdict::Accepted
            } else {
                reject("product differs from c")
            }
        }
        (_, Candidate::Factors { y: None, .. }) => reject("shape: missing Y factor"),
        (family, _) => reject(format!("candidate kind not supported for {}", family.as_str())),
    }
}

/// Hidden solution as a candidate, if the generator kept one.
pub fn hidden_candidate(instance: &ProblemInstance) -> Option<Candidate> {
    instance.hidden_x.as_ref().map(|x| Candidate::Factors {
        x: x.clone(),
        y: instance.hidden_y.clone(),
    })
}

// ---------------------------------------------------------------------------
// Manifests

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFiles {
    #[serde(rename = "C")]
    pub c: String,
    #[serde(rename = "hidden_X", skip_serializing_if = "Option::is_none", default)]
    pub hidden_x: Option<String>,
    #[serde(rename = "hidden_Y", skip_serializing_if = "Option::is_none", default)]
    pub hidden_y: Option<String>,
}

/// JSON document describing an instance; file names are relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub family: Family,
    pub params: Params,
    pub files: ManifestFiles,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Writes `manifest.json`, `C.txt` and any hidden factors into `dir`.
pub fn save_instance(instance: &ProblemInstance, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    write_matrix(&dir.join("C.txt"), &instance.c)?;
    let mut files = ManifestFiles {
        c: "C.txt".into(),
        hidden_x: None,
        hidden_y: None,
    };
    if let Some(x) = &instance.hidden_x {
        write_matrix(&dir.join("hidden_X.txt"), x)?;
        files.hidden_x = Some("hidden_X.txt".into());
    }
    if let Some(y) = &instance.hidden_y {
        write_matrix(&dir.join("hidden_Y.txt"), y)?;
        files.hidden_y = Some("hidden_Y.txt".into());
    }
    let manifest = Manifest {
        family: instance.family,
        params: instance.params.clone(),
        files,
    };
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}

/// Reads an instance from a manifest path (or a directory holding one).
pub fn load_instance(path: &Path) -> Result<ProblemInstance> {
    let path = if path.is_dir() { path.join(MANIFEST_NAME) } else { path.to_path_buf() };
    let text = fs::read_to_string(&path)?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let c = read_matrix(&dir.join(&manifest.files.c))?;
    let hidden_x = manifest.files.hidden_x.as_ref().map(|f| read_matrix(&dir.join(f))).transpose()?;
    let hidden_y = manifest.files.hidden_y.as_ref().map(|f| read_matrix(&dir.join(f))).transpose()?;
    Ok(ProblemInstance {
        family: manifest.family,
        params: manifest.params,
        c,
        hidden_x,
        hidden_y,
    })
}

// ---------------------------------------------------------------------------
// Runnable problems

/// Projection construction used to attack an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gram,
    Cyclic,
    RankLimited,
    RankExcessive,
    Rank1,
}

impl Method {
    pub fn default_for(family: Family) -> Option<Method> {
        match family {
            Family::Gram | Family::Hadamard => Some(Method::Gram),
            Family::Cyclic => Some(Method::Cyclic),
            Family::NmfDesigned | Family::Udisj => Some(Method::RankLimited),
            Family::Edm => Some(Method::RankExcessive),
            Family::Int2d => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gram => "gram",
            Method::Cyclic => "cyclic",
            Method::RankLimited => "rank_limited",
            Method::RankExcessive => "rank_excessive",
            Method::Rank1 => "rank1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Random,
    /// SVD-based start of the rank-excessive construction.
    Special,
}

/// Construction parameters shared by every method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Inner dimension; defaults to the instance's `k`.
    pub k: Option<usize>,
    pub t: usize,
    pub g: f64,
    pub h: f64,
    pub init: InitKind,
    /// Summand structure of the rank-one method: `Integer` (integer
    /// simplex) or `Nonnegative` (plain simplex).
    pub rank1_structure: StructureKind,
    /// Relative acceptance tolerance of the continuous families.
    pub nmf_tol: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            k: None,
            t: crate::projections::DEFAULT_REFINEMENT_CYCLES,
            g: 1.0,
            h: 1.0,
            init: InitKind::Random,
            rank1_structure: StructureKind::Integer,
            nmf_tol: NMF_TOL,
        }
    }
}

/// A constraint pair bound to an instance, with starting points and
/// candidate extraction.
pub trait Problem: ConstraintPair {
    fn instance(&self) -> &ProblemInstance;
    fn method(&self) -> Method;
    /// Starting point for a seed (deterministic).
    fn initial(&self, seed: u64) -> SplitVariables;
    /// Candidate answer read from the projection images.
    fn candidate(&self, p1: &SplitVariables, p2: &SplitVariables) -> Candidate;

    fn candidate_of(&self, outcome: &SolveOutcome) -> Candidate {
        self.candidate(&outcome.p1_image, &outcome.p2_image)
    }
}

fn named(items: &[(&str, (usize, usize))]) -> Vec<(String, (usize, usize))> {
    items.iter().map(|(n, s)| (n.to_string(), *s)).collect()
}

/// `X ∈ {±1}` against `X Xᵀ = C`; the discrete projection is `P1`.
pub struct GramProblem {
    instance: ProblemInstance,
    gc: GramConstraint,
    k: usize,
}

impl GramProblem {
    pub fn new(instance: ProblemInstance, k: usize) -> Result<Self> {
        let gc = GramConstraint::new(&instance.c, DEFAULT_RANK_TOL)?;
        if k < gc.rank {
            return Err(Error::InvalidInput(format!(
                "k={k} is below the rank {} of C",
                gc.rank
            )));
        }
        Ok(GramProblem { instance, gc, k })
    }
}

impl ConstraintPair for GramProblem {
    fn project1(&self, x: &SplitVariables) -> Result<SplitVariables> {
        x.with_components(&[StructureKind::PmOne.project(&x.component(0))])
    }
    fn project2(&self, x: &SplitVariables) -> Result<SplitVariables> {
        x.with_components(&[proj_gram(&self.gc, &x.component(0))?])
    }
    fn accept(&self, p1: &SplitVariables, _p2: &SplitVariables) -> bool {
        verify_gram(&self.instance.c, &p1.component(0)).accepted()
    }
}

impl Problem for GramProblem {
    fn instance(&self) -> &ProblemInstance {
        &self.instance
    }
    fn method(&self) -> Method {
        Method::Gram
    }
    fn initial(&self, seed: u64) -> SplitVariables {
        let shapes = named(&[("X", (self.instance.c.nrows(), self.k))]);
        init_random_with(&shapes, &mut rng_from_seed(seed), Sampler::UniformRange(-1.0, 1.0))
    }
    fn candidate(&self, p1: &SplitVariables, _p2: &SplitVariables) -> Candidate {
        Candidate::Factors {
            x: p1.component(0),
            y: None,
        }
    }
}

/// `±1` coefficient vectors against the cyclic product; the product
/// projection is `P1`.
pub struct CyclicProblem {
    instance: ProblemInstance,
    fourier: FourierProduct,
}

impl CyclicProblem {
    pub fn new(instance: ProblemInstance, t: usize) -> Result<Self> {
        let fourier = FourierProduct::new(instance.c.as_slice(), t)?;
        Ok(CyclicProblem { instance, fourier })
    }
}

impl ConstraintPair for CyclicProblem {
    fn project1(&self, v: &SplitVariables) -> Result<SplitVariables> {
        let (x, y) = (v.component(0), v.component(1));
        let (xp, yp) = self.fourier.project(x.as_slice(), y.as_slice())?;
        v.with_components(&[row_vector(&xp), row_vector(&yp)])
    }
    fn project2(&self, v: &SplitVariables) -> Result<SplitVariables> {
        v.with_components(&[
            StructureKind::PmOne.project(&v.component(0)),
            StructureKind::PmOne.project(&v.component(1)),
        ])
    }
    fn accept(&self, _p1: &SplitVariables, p2: &SplitVariables) -> bool {
        verify_cyclic(&self.instance.c, &p2.component(0), &p2.component(1)).accepted()
    }
}

impl Problem for CyclicProblem {
    fn instance(&self) -> &ProblemInstance {
        &self.instance
    }
    fn method(&self) -> Method {
        Method::Cyclic
    }
    fn initial(&self, seed: u64) -> SplitVariables {
        let m = self.instance.c.len();
        let shapes = named(&[("x", (1, m)), ("y", (1, m))]);
        init_random_with(&shapes, &mut rng_from_seed(seed), Sampler::UniformRange(-1.0, 1.0))
    }
    fn candidate(&self, _p1: &SplitVariables, p2: &SplitVariables) -> Candidate {
        Candidate::Factors {
            x: p2.component(0),
            y: Some(p2.component(1)),
        }
    }
}

/// Nonnegative factors through the four-matrix construction.
pub struct RankLimitedProblem {
    instance: ProblemInstance,
    pub construction: RankLimited,
    tol: f64,
}

impl RankLimitedProblem {
    pub fn new(instance: ProblemInstance, k: usize, opts: &BuildOptions) -> Result<Self> {
        let construction = RankLimited::new(&instance.c, k, opts.g, opts.h, opts.t, StructureKind::Nonnegative)?;
        if construction.setup.r != k {
            return Err(Error::InvalidInput(format!(
                "rank-limited method needs k = rank C = {}, got k={k}",
                construction.setup.r
            )));
        }
        Ok(RankLimitedProblem {
            instance,
            construction,
            tol: opts.nmf_tol,
        })
    }

    fn state(v: &SplitVariables) -> RankLimitedState {
        RankLimitedState {
            w: v.component(0),
            x: v.component(1),
            z: v.component(2),
            y: v.component(3),
        }
    }

    fn pack(v: &SplitVariables, s: RankLimitedState) -> Result<SplitVariables> {
        v.with_components(&[s.w, s.x, s.z, s.y])
    }
}

impl ConstraintPair for RankLimitedProblem {
    fn project1(&self, v: &SplitVariables) -> Result<SplitVariables> {
        Self::pack(v, self.construction.p1(&Self::state(v))?)
    }
    fn project2(&self, v: &SplitVariables) -> Result<SplitVariables> {
        Self::pack(v, self.construction.p2(&Self::state(v))?)
    }
    fn accept(&self, p1: &SplitVariables, _p2: &SplitVariables) -> bool {
        verify_nonneg(&self.instance.c, &p1.component(1), &p1.component(3), self.tol).accepted()
    }
}

impl Problem for RankLimitedProblem {
    fn instance(&self) -> &ProblemInstance {
        &self.instance
    }
    fn method(&self) -> Method {
        Method::RankLimited
    }
    fn initial(&self, seed: u64) -> SplitVariables {
        let [sw, sx, sz, sy] = self.construction.shapes();
        let shapes = named(&[("W", sw), ("X", sx), ("Z", sz), ("Y", sy)]);
        init_random_with(&shapes, &mut rng_from_seed(seed), Sampler::Uniform01)
    }
    fn candidate(&self, p1: &SplitVariables, _p2: &SplitVariables) -> Candidate {
        Candidate::Factors {
            x: p1.component(1),
            y: Some(p1.component(3)),
        }
    }
}

const EXCESSIVE_NAMES: [&str; 10] = ["W", "X_C", "X~_C", "X_p", "X~_p", "Z", "Y_C", "Y~_C", "Y_p", "Y~_p"];

/// Nonnegative factors of excess rank through the ten-matrix construction.
pub struct RankExcessiveProblem {
    instance: ProblemInstance,
    pub construction: RankExcessive,
    init: InitKind,
    tol: f64,
}

impl RankExcessiveProblem {
    pub fn new(instance: ProblemInstance, k: usize, opts: &BuildOptions) -> Result<Self> {
        let construction = RankExcessive::new(&instance.c, k, opts.g, opts.h, opts.t, StructureKind::Nonnegative)?;
        Ok(RankExcessiveProblem {
            instance,
            construction,
            init: opts.init,
            tol: opts.nmf_tol,
        })
    }

    pub fn state(v: &SplitVariables) -> RankExcessiveState {
        let c = |i| v.component(i);
        RankExcessiveState {
            w: c(0),
            xc: c(1),
            xc_rep: c(2),
            xp: c(3),
            xp_rep: c(4),
            z: c(5),
            yc: c(6),
            yc_rep: c(7),
            yp: c(8),
            yp_rep: c(9),
        }
    }

    pub fn pack(s: RankExcessiveState) -> SplitVariables {
        let mats = [s.w, s.xc, s.xc_rep, s.xp, s.xp_rep, s.z, s.yc, s.yc_rep, s.yp, s.yp_rep];
        SplitVariables::new(EXCESSIVE_NAMES.iter().map(|n| n.to_string()).zip(mats).collect())
    }

    fn factors(v: &SplitVariables) -> (Matrix, Matrix) {
        (v.component(1) + v.component(3), v.component(6) + v.component(8))
    }
}

impl ConstraintPair for RankExcessiveProblem {
    fn project1(&self, v: &SplitVariables) -> Result<SplitVariables> {
        Ok(Self::pack(self.construction.p1(&Self::state(v))?))
    }
    fn project2(&self, v: &SplitVariables) -> Result<SplitVariables> {
        Ok(Self::pack(self.construction.p2(&Self::state(v))?))
    }
    fn accept(&self, p1: &SplitVariables, _p2: &SplitVariables) -> bool {
        let (x, y) = Self::factors(p1);
        match self.instance.family {
            Family::Edm => verify_summands(&self.instance.c, &summands_of(&x, &y)).accepted(),
            _ => verify_nonneg(&self.instance.c, &x, &y, self.tol).accepted(),
        }
    }
    fn reinit(&self, seed: u64) -> Option<SplitVariables> {
        Some(random_excessive(&self.construction, seed))
    }
}

fn random_excessive(re: &RankExcessive, seed: u64) -> SplitVariables {
    let [sw, sx, sz, sy] = re.shapes();
    let shapes: Vec<(String, (usize, usize))> = EXCESSIVE_NAMES
        .iter()
        .zip([sw, sx, sx, sx, sx, sz, sy, sy, sy, sy])
        .map(|(n, s)| (n.to_string(), s))
        .collect();
    init_random_with(&shapes, &mut rng_from_seed(seed), Sampler::Uniform01)
}

impl Problem for RankExcessiveProblem {
    fn instance(&self) -> &ProblemInstance {
        &self.instance
    }
    fn method(&self) -> Method {
        Method::RankExcessive
    }
    fn initial(&self, seed: u64) -> SplitVariables {
        match self.init {
            InitKind::Special => Self::pack(edm_special_init(&self.construction)),
            InitKind::Random => random_excessive(&self.construction, seed),
        }
    }
    fn candidate(&self, p1: &SplitVariables, _p2: &SplitVariables) -> Candidate {
        let (x, y) = Self::factors(p1);
        Candidate::Factors { x, y: Some(y) }
    }
}

/// Rank-one summands with the (integer) simplex constraint.
pub struct RankOneProblem {
    instance: ProblemInstance,
    pub construction: RankOne,
}

impl RankOneProblem {
    pub fn new(instance: ProblemInstance, k: usize, opts: &BuildOptions) -> Result<Self> {
        let construction = RankOne::new(&instance.c, k, opts.rank1_structure)?;
        Ok(RankOneProblem { instance, construction })
    }

    fn state(v: &SplitVariables) -> RankOneState {
        RankOneState { z: v.components() }
    }

    fn rounded_ok(&self, v: &SplitVariables) -> bool {
        verify_summands(&self.instance.c, &v.components()).accepted()
    }
}

impl ConstraintPair for RankOneProblem {
    fn project1(&self, v: &SplitVariables) -> Result<SplitVariables> {
        v.with_components(&self.construction.p1(&Self::state(v))?.z)
    }
    fn project2(&self, v: &SplitVariables) -> Result<SplitVariables> {
        v.with_components(&self.construction.p2(&Self::state(v))?.z)
    }
    fn accept(&self, p1: &SplitVariables, p2: &SplitVariables) -> bool {
        self.rounded_ok(p1) || self.rounded_ok(p2)
    }
    fn reinit(&self, seed: u64) -> Option<SplitVariables> {
        Some(self.initial(seed))
    }
}

impl Problem for RankOneProblem {
    fn instance(&self) -> &ProblemInstance {
        &self.instance
    }
    fn method(&self) -> Method {
        Method::Rank1
    }
    /// Entries uniform on `[0, max C]` (`[0, (m−1)²]` for distance matrices).
    fn initial(&self, seed: u64) -> SplitVariables {
        let shape = self.instance.c.shape();
        let hi = max_abs(&self.instance.c);
        let shapes: Vec<(String, (usize, usize))> =
            (0..self.construction.k).map(|l| (format!("Z{}", l + 1), shape)).collect();
        init_random_with(&shapes, &mut rng_from_seed(seed), Sampler::UniformRange(0.0, hi))
    }
    fn candidate(&self, p1: &SplitVariables, p2: &SplitVariables) -> Candidate {
        let pick = if self.rounded_ok(p1) || !self.rounded_ok(p2) { p1 } else { p2 };
        Candidate::Summands(pick.components().iter().map(|z| z.map(f64::round)).collect())
    }
}

/// Inner dimension used when the options leave it open.
pub fn default_k(instance: &ProblemInstance) -> Option<usize> {
    match instance.family {
        Family::Cyclic => Some(instance.c.len()),
        _ => instance.params.k,
    }
}

/// Binds an instance to a method.
pub fn build(instance: &ProblemInstance, method: Method, opts: &BuildOptions) -> Result<Box<dyn Problem>> {
    let family = instance.family;
    let compatible = match method {
        Method::Gram => matches!(family, Family::Gram | Family::Hadamard),
        Method::Cyclic => family == Family::Cyclic,
        Method::RankLimited | Method::RankExcessive => {
            matches!(family, Family::NmfDesigned | Family::Udisj | Family::Edm)
        }
        Method::Rank1 => matches!(family, Family::NmfDesigned | Family::Udisj | Family::Edm),
    };
    if !compatible {
        return Err(Error::InvalidInput(format!(
            "method {} does not apply to family {}",
            method.as_str(),
            family.as_str()
        )));
    }
    if opts.init == InitKind::Special && method != Method::RankExcessive {
        return Err(Error::InvalidInput(
            "the special initial point exists only for the rank-excessive method".into(),
        ));
    }
    let k = opts.k.or_else(|| default_k(instance));
    let need_k = || {
        k.ok_or_else(|| Error::InvalidInput(format!("method {} needs an inner dimension k", method.as_str())))
    };
    let inst = instance.clone();
    Ok(match method {
        Method::Gram => {
            let k = k.unwrap_or(instance.c.nrows());
            Box::new(GramProblem::new(inst, k)?)
        }
        Method::Cyclic => Box::new(CyclicProblem::new(inst, opts.t)?),
        Method::RankLimited => Box::new(RankLimitedProblem::new(inst, need_k()?, opts)?),
        Method::RankExcessive => Box::new(RankExcessiveProblem::new(inst, need_k()?, opts)?),
        Method::Rank1 => Box::new(RankOneProblem::new(inst, need_k()?, opts)?),
    })
}

/// Exact lattice-valued rounding used by tests and examples: the integer
/// simplex projection of one tuple.
pub fn integer_tuple(z: &[f64], c: u64) -> Result<Vec<f64>> {
    lattice_project(z, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, SolveConfig};
    use rand::SeedableRng;

    #[test]
    fn gram_generator_cases() {
        let g = gen_gram(1, 1, 0).unwrap();
        assert_eq!(g.c[(0, 0)], 1.0);
        for seed in 0..100 {
            let g = gen_gram(4, 3, seed).unwrap();
            assert!(verify(&g, &hidden_candidate(&g).unwrap()).accepted());
        }
        let x = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        assert_eq!(&x * x.transpose(), Matrix::identity(2, 2) * 2.0);
    }

    #[test]
    fn gram_rejects_perturbed() {
        let g = gen_gram(5, 5, 3).unwrap();
        let mut x = g.hidden_x.clone().unwrap();
        x[(2, 1)] = -x[(2, 1)];
        let v = verify(&g, &Candidate::Factors { x, y: None });
        assert!(!v.accepted());
    }

    #[test]
    fn maxdet_structure() {
        let c = maxdet_candidate_15().c;
        assert_eq!(c.shape(), (15, 15));
        assert_eq!(c, c.transpose());
        for i in 0..15 {
            assert_eq!(c[(i, i)], 15.0);
            for j in 0..15 {
                if i != j {
                    assert!(c[(i, j)] == 3.0 || c[(i, j)] == -1.0);
                }
                assert_eq!(c[(i, j)].fract(), 0.0);
            }
        }
    }

    #[test]
    fn hadamard_cases() {
        assert!(gen_hadamard(3).is_err());
        for m in [1, 2, 4, 8, 16] {
            let h = gen_hadamard(m).unwrap();
            assert!(verify(&h, &hidden_candidate(&h).unwrap()).accepted(), "m={m}");
        }
        assert!(gen_hadamard(12).unwrap().hidden_x.is_none());
    }

    #[test]
    fn cyclic_product_cases() {
        assert_eq!(cyclic_product(&[1.0, 1.0, 0.0], &[1.0, 0.0, 1.0]).unwrap(), vec![2.0, 1.0, 1.0]);
        let y = vec![0.5, -2.0, 3.0, 1.0];
        assert_eq!(cyclic_product(&[1.0, 0.0, 0.0, 0.0], &y).unwrap(), y);
        assert!(cyclic_product(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cyclic_product_matches_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let m = rng.gen_range(3..=32);
            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let z = cyclic_product(&x, &y).unwrap();
            // Circulant matrices C_ij = c_{(j - i) mod m}.
            let circ = |v: &[f64]| Matrix::from_fn(m, m, |i, j| v[(j + m - i) % m]);
            let prod = circ(&x) * circ(&y);
            for j in 0..m {
                assert!((prod[(0, j)] - z[j]).abs() < 1e-10);
            }
            // Spectral form: ẑ = √m x̂ ŷ.
            let (xh, yh) = (matcore::dft_real(&x), matcore::dft_real(&y));
            let zh: Vec<Complex64> = xh.iter().zip(&yh).map(|(a, b)| a * b * (m as f64).sqrt()).collect();
            let back = matcore::idft(&zh);
            for j in 0..m {
                assert!((back[j].re - z[j]).abs() < 1e-10 && back[j].im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn c23_properties() {
        let inst = c23_instance();
        assert_eq!(inst.c.len(), 23);
        assert!(inst.c.iter().all(|v| *v == 1.0 || *v == -3.0));
        // Σc = (Σx)(Σy) with both sums odd.
        let sum: f64 = inst.c.iter().sum();
        assert_eq!(sum, -21.0);
        assert_eq!(sum.rem_euclid(2.0), 1.0);
    }

    #[test]
    fn cyclic_verifier_accepts_generated_pairs() {
        for seed in 0..100 {
            let inst = gen_cyclic(7, seed).unwrap();
            assert!(verify(&inst, &hidden_candidate(&inst).unwrap()).accepted());
        }
    }

    #[test]
    fn fourier_projection_cases() {
        // Feasible pair is fixed.
        let inst = gen_cyclic(9, 4).unwrap();
        let (x, y) = (inst.hidden_x.clone().unwrap(), inst.hidden_y.clone().unwrap());
        let (xp, yp) = fourier_product_projection(x.as_slice(), y.as_slice(), inst.c.as_slice(), 10).unwrap();
        for i in 0..9 {
            assert!((xp[i] - x[i]).abs() < 1e-9 && (yp[i] - y[i]).abs() < 1e-9);
        }
        // m = 1 reduces to the real scalar projection.
        let (a, b) = fourier_product_projection(&[3.0], &[1.0], &[3.0], 0).unwrap();
        assert!((a[0] - 3.0).abs() < 1e-12 && (b[0] - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in [8, 23] {
            let c: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fp = FourierProduct::new(&c, 10).unwrap();
            let (xh, yh) = fp.project_spectra(&x, &y);
            for spec in [&xh, &yh] {
                let back = matcore::idft(spec);
                assert!(back.iter().all(|v| v.im.abs() <= 1e-10));
            }
            let (xp, yp) = fp.project(&x, &y).unwrap();
            let prod = cyclic_product(&xp, &yp).unwrap();
            for j in 0..m {
                assert!((prod[j] - c[j]).abs() <= 1e-8, "m={m}");
            }
        }
    }

    #[test]
    fn nmf_generator() {
        let inst = gen_nmf_designed(10, 10, 4, 0.0, 1).unwrap();
        assert!(inst.hidden_x.as_ref().unwrap().iter().all(|v| *v > 0.0));
        let inst = gen_nmf_designed(12, 12, 6, 0.5, 2).unwrap();
        let x = inst.hidden_x.as_ref().unwrap();
        assert_eq!(x.iter().filter(|v| **v == 0.0).count(), 36);
        assert_eq!(matcore::rank(&inst.c, DEFAULT_RANK_TOL).unwrap(), 6);
        assert!(verify(&inst, &hidden_candidate(&inst).unwrap()).accepted());
        assert!(gen_nmf_designed(5, 5, 2, 1.0, 0).is_err());
    }

    #[test]
    fn nmf_hidden_solutions_verify() {
        for seed in 0..100 {
            let inst = gen_nmf_designed(8, 7, 3, 0.3, seed).unwrap();
            assert!(verify(&inst, &hidden_candidate(&inst).unwrap()).accepted());
        }
    }

    #[test]
    fn nmf_rejects_negative_entry() {
        let inst = gen_nmf_designed(6, 6, 2, 0.0, 9).unwrap();
        let mut x = inst.hidden_x.clone().unwrap();
        x[(0, 0)] = -10.0 * NMF_TOL * max_abs(&inst.c).max(1.0);
        let v = verify(&inst, &Candidate::Factors { x, y: inst.hidden_y.clone() });
        assert!(matches!(v, Verdict::Rejected(r) if r.contains("negative")));
    }

    #[test]
    fn udisj_cases() {
        assert_eq!(udisj(1).unwrap().c, Matrix::from_element(1, 1, 1.0));
        let u2 = udisj(2).unwrap();
        let x2 = Matrix::from_row_slice(4, 3, &[1., 1., 1., 0., 1., 0., 1., 0., 0., 0., 0., 1.]);
        let y2 = Matrix::from_row_slice(3, 4, &[1., 1., 0., 0., 1., 0., 1., 0., 1., 0., 0., 1.]);
        assert_eq!(u2.hidden_x.as_ref().unwrap(), &x2);
        assert_eq!(u2.hidden_y.as_ref().unwrap(), &y2);
        for d in 1..=4 {
            let u = udisj(d).unwrap();
            let side = 4usize.pow(d as u32 - 1);
            assert_eq!(u.c.shape(), (side, side));
            assert_eq!(matcore::rank(&u.c, DEFAULT_RANK_TOL).unwrap(), 3usize.pow(d as u32 - 1));
            assert!(verify(&u, &hidden_candidate(&u).unwrap()).accepted());
        }
        assert!(matches!(udisj(20), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn edm_cases() {
        let e = edm(6).unwrap();
        assert_eq!(e.c.row(0).iter().copied().collect::<Vec<_>>(), vec![0., 1., 4., 9., 16., 25.]);
        assert_eq!(e.c.row(2).iter().copied().collect::<Vec<_>>(), vec![4., 1., 0., 1., 4., 9.]);
        for m in 3..12 {
            assert_eq!(matcore::rank(&edm(m).unwrap().c, DEFAULT_RANK_TOL).unwrap(), 3);
        }
        assert!(edm(2).is_err());
    }

    #[test]
    fn edm_special_init_constraints() {
        for (m, k) in [(6, 5), (8, 6), (12, 7)] {
            let e = edm(m).unwrap();
            let re = RankExcessive::new(&e.c, k, 0.5, 0.5, 10, StructureKind::Nonnegative).unwrap();
            let s = edm_special_init(&re);
            assert!((&s.xc - &re.setup.u * &s.w).amax() < 1e-8);
            assert!((&s.yc - &s.z * &re.setup.v).amax() < 1e-8);
            assert!((&s.w * &s.z - &re.setup.d).amax() < 1e-8);
            assert!((&s.xc * &s.yc - &e.c).amax() < 1e-8);
            let (x, y) = s.factors();
            assert!(x.iter().chain(y.iter()).all(|v| *v >= 0.0));
            assert_eq!(s.xc, s.xc_rep);
            assert_eq!(s.yp, s.yp_rep);
            // P1 leaves it in place (replicas equal, parts sum nonnegative,
            // W Z = D).
            let p = re.p1(&s).unwrap();
            assert!((p.xc - &s.xc).amax() < 1e-8 && (p.w - &s.w).amax() < 1e-8);
        }
    }

    #[test]
    fn summand_verifier() {
        let c = edm(3).unwrap().c;
        // C = upper + lower triangles: each is not rank one for m=3.
        let upper = Matrix::from_fn(3, 3, |i, j| if j > i { c[(i, j)] } else { 0.0 });
        let lower = &c - &upper;
        assert!(!verify_summands(&c, &[upper, lower]).accepted());
        // Rank-one integer summands summing to C pass.
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let b = Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 0.0]);
        assert!(verify_summands(&(&a + &b), &[a.clone(), b.clone()]).accepted());
        assert!(!verify_summands(&(&a + &b + Matrix::identity(2, 2)), &[a, b]).accepted());
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for inst in [gen_gram(3, 4, 1).unwrap(), c23_instance(), udisj(2).unwrap(), int2d(15)] {
            let sub = dir.path().join(inst.family.as_str());
            let path = save_instance(&inst, &sub).unwrap();
            assert_eq!(load_instance(&path).unwrap(), inst);
            assert_eq!(load_instance(&sub).unwrap(), inst);
        }
    }

    #[test]
    fn build_checks_compatibility() {
        let g = gen_gram(3, 3, 0).unwrap();
        assert!(build(&g, Method::Cyclic, &BuildOptions::default()).is_err());
        assert!(build(&g, Method::Gram, &BuildOptions::default()).is_ok());
        let e = edm(6).unwrap();
        let opts = BuildOptions {
            k: Some(5),
            init: InitKind::Special,
            ..BuildOptions::default()
        };
        assert!(build(&e, Method::RankExcessive, &opts).is_ok());
        assert!(build(&e, Method::Rank1, &opts).is_err());
        assert!(build(&e, Method::RankLimited, &BuildOptions::default()).is_err());
    }

    #[test]
    fn hidden_states_are_fixed_points() {
        // Gram: the hidden ±1 matrix is fixed by both projections.
        let g = gen_gram(6, 6, 2).unwrap();
        let p = build(&g, Method::Gram, &BuildOptions::default()).unwrap();
        let x = SplitVariables::new(vec![("X".into(), g.hidden_x.clone().unwrap())]);
        assert!(p.project1(&x).unwrap().dist(&x) < 1e-9);
        assert!(p.project2(&x).unwrap().dist(&x) < 1e-9);
        let out = solve(p.as_ref(), x, &SolveConfig::default()).unwrap();
        assert!(out.solved() && out.iterations == 0);

        // Cyclic: a generated ±1 pair.
        let c = gen_cyclic(11, 3).unwrap();
        let p = build(&c, Method::Cyclic, &BuildOptions::default()).unwrap();
        let v = SplitVariables::new(vec![
            ("x".into(), c.hidden_x.clone().unwrap()),
            ("y".into(), c.hidden_y.clone().unwrap()),
        ]);
        assert!(p.project1(&v).unwrap().dist(&v) < 1e-9);
        assert!(p.project2(&v).unwrap().dist(&v) < 1e-9);

        // Rank-limited: lift the hidden factors.
        let n = gen_nmf_designed(8, 8, 3, 0.3, 1).unwrap();
        let opts = BuildOptions {
            g: 1.2,
            h: 1.2,
            ..BuildOptions::default()
        };
        let rl = RankLimitedProblem::new(n.clone(), 3, &opts).unwrap();
        let s = &rl.construction.setup;
        let (x, y) = (n.hidden_x.clone().unwrap(), n.hidden_y.clone().unwrap());
        let v = SplitVariables::new(vec![
            ("W".into(), s.u.transpose() * &x / (s.g * s.g)),
            ("X".into(), x),
            ("Z".into(), &y * s.v.transpose() / (s.h * s.h)),
            ("Y".into(), y),
        ]);
        assert!(rl.project1(&v).unwrap().dist(&v) < 1e-8);
        assert!(rl.project2(&v).unwrap().dist(&v) < 1e-8);
        assert!(rl.accept(&v, &v));
    }
}
