//! Dense linear-algebra kernels.
//!
//! Every projection in this crate is assembled from a handful of real
//! decompositions: a rank-revealing SVD, a sorted symmetric eigensolver, a
//! PSD square-root factor, the Moore–Penrose pseudoinverse, a Sylvester solver
//! for positive (semi)definite coefficients, and a unitary DFT. The heavy
//! lifting is delegated to `nalgebra`; this module fixes orderings, rank
//! truncation and error semantics.
//!
//! Also defined here is the plain-text matrix format shared by every file the
//! crate reads or writes:
//!
//! ```text
//! rows cols
//! a00 a01 ...
//! a10 a11 ...
//! ```

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense real matrix; the universal value type.
pub type Matrix = DMatrix<f64>;

/// Relative tolerance under which singular values / eigenvalues count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Thin SVD truncated to the numerical rank: `a ≈ u · diag(s) · v`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// m×r, orthonormal columns.
    pub u: Matrix,
    /// r singular values, descending.
    pub s: Vec<f64>,
    /// r×n, orthonormal rows.
    pub v: Matrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * &self.v
    }
}

/// Symmetric eigendecomposition `s = vectors · diag(values) · vectorsᵀ`,
/// eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigSymResult {
    /// k×k orthogonal; column `i` pairs with `values[i]`.
    pub vectors: Matrix,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigSign {
    Negative,
    Positive,
}

fn check_finite(a: &Matrix, what: &str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

/// Rank-revealing thin SVD. Singular values `<= rank_tol * max(s)` are dropped.
pub fn svd(a: &Matrix, rank_tol: f64) -> Result<SvdResult> {
    check_finite(a, "svd input")?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidInput("svd of an empty matrix".into()));
    }
    let (u, sv, vt) = jacobi_svd(a);

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let smax = order.first().map(|&i| sv[i]).unwrap_or(0.0);
    let cutoff = rank_tol * smax;
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| sv[i] > cutoff && sv[i] > 0.0)
        .collect();

    let r = kept.len();
    let mut uu = Matrix::zeros(a.nrows(), r);
    let mut vv = Matrix::zeros(r, a.ncols());
    let mut s = Vec::with_capacity(r);
    for (dst, &src) in kept.iter().enumerate() {
        uu.set_column(dst, &u.column(src));
        vv.set_row(dst, &vt.row(src));
        s.push(sv[src]);
    }
    Ok(SvdResult { u: uu, s, v: vv })
}

// One-sided Jacobi (Hestenes) on the tall orientation. nalgebra's bidiagonal
// SVD occasionally returns singular values off in the second digit on small
// well-conditioned inputs, which breaks idempotence of the projections.
fn jacobi_svd(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let wide = a.nrows() < a.ncols();
    let mut w = if wide { a.transpose() } else { a.clone() };
    let (m, n) = w.shape();
    let mut v = Matrix::identity(n, n);
    let ws = w.as_mut_slice();
    let vs = v.as_mut_slice();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (ws[p * m + i], ws[q * m + i]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (ws[p * m + i], ws[q * m + i]);
                    ws[p * m + i] = c * x - s * y;
                    ws[q * m + i] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (vs[p * n + i], vs[q * n + i]);
                    vs[p * n + i] = c * x - s * y;
                    vs[q * n + i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv = Vec::with_capacity(n);
    for j in 0..n {
        let norm = w.column(j).norm();
        sv.push(norm);
        if norm > 0.0 {
            w.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    // w: tall factor with unit columns, v: right factor with columns.
    if wide {
        (v, sv, w.transpose())
    } else {
        (w, sv, v.transpose())
    }
}

/// Closest matrix of rank at most one (Frobenius norm): `σ₁ u₁ v₁ᵀ`.
pub fn rank1_approx(a: &Matrix) -> Matrix {
    if a.iter().all(|v| *v == 0.0) {
        return Matrix::zeros(a.nrows(), a.ncols());
    }
    let (u, s, vt) = jacobi_svd(a);
    let top = (0..s.len()).max_by(|&i, &j| s[i].total_cmp(&s[j])).expect("nonempty");
    u.column(top) * vt.row(top) * s[top]
}

/// Numerical rank at relative tolerance `rank_tol`.
pub fn rank(a: &Matrix, rank_tol: f64) -> Result<usize> {
    Ok(svd(a, rank_tol)?.rank())
}

/// Replaces every retained singular value by one: `Σ uᵢ vᵢᵀ`.
pub fn unitarize(a: &Matrix, rank_tol: f64) -> Result<Matrix> {
    let dec = svd(a, rank_tol)?;
    if dec.rank() == 0 {
        return Err(Error::DegenerateInput(
            "unitarize: matrix has no nonzero singular value".into(),
        ));
    }
    Ok(dec.u * dec.v)
}

/// Eigendecomposition of the symmetric part `(s + sᵀ)/2`, eigenvalues ascending.
pub fn eig_sym(s: &Matrix) -> Result<EigSymResult> {
    if !s.is_square() {
        return Err(Error::InvalidInput(format!(
            "eig_sym needs a square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    check_finite(s, "eig_sym input")?;
    let sym = (s + s.transpose()) * 0.5;
    let dec = SymmetricEigen::new(sym);
    let n = dec.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dec.eigenvalues[i].total_cmp(&dec.eigenvalues[j]));
    let mut vectors = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &dec.eigenvectors.column(src));
        values.push(dec.eigenvalues[src]);
    }
    Ok(EigSymResult { vectors, values })
}

fn spectral_projector(eig: &EigSymResult, keep: impl Fn(f64) -> bool) -> Matrix {
    let n = eig.values.len();
    let cols: Vec<usize> = (0..n).filter(|&i| keep(eig.values[i])).collect();
    let mut basis = Matrix::zeros(n, cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        basis.set_column(dst, &eig.vectors.column(src));
    }
    &basis * basis.transpose()
}

/// Orthogonal projector onto the span of eigenvectors whose eigenvalue is
/// strictly below `-zero_tol` (negative) or strictly above `zero_tol`
/// (positive). Zero eigenvalues belong to neither.
pub fn eigspace_projector(s: &Matrix, sign: EigSign, zero_tol: f64) -> Result<Matrix> {
    let eig = eig_sym(s)?;
    Ok(match sign {
        EigSign::Negative => spectral_projector(&eig, |v| v < -zero_tol),
        EigSign::Positive => spectral_projector(&eig, |v| v > zero_tol),
    })
}

/// Both spectral projectors from one eigendecomposition; `zero_tol` is
/// relative to the largest eigenvalue magnitude.
pub fn eigspace_split(s: &Matrix, rel_zero_tol: f64) -> Result<(Matrix, Matrix)> {
    let eig = eig_sym(s)?;
    let scale = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = rel_zero_tol * scale;
    Ok((
        spectral_projector(&eig, |v| v < -tol),
        spectral_projector(&eig, |v| v > tol),
    ))
}

/// Factor `a` (m×r, r = numerical rank) with `a·aᵀ = c` for symmetric PSD `c`.
///
/// Uses the eigen route: `a = V_r · sqrt(E_r)`.
pub fn cholesky_psd(c: &Matrix, rank_tol: f64) -> Result<Matrix> {
    let eig = eig_sym(c)?;
    let scale = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = rank_tol * scale;
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -tol.max(f64::MIN_POSITIVE) {
        return Err(Error::NotPsd { min_eig: min });
    }
    let kept: Vec<usize> = (0..eig.values.len())
        .rev()
        .filter(|&i| eig.values[i] > tol)
        .collect();
    let mut a = Matrix::zeros(c.nrows(), kept.len());
    for (dst, &src) in kept.iter().enumerate() {
        let col = eig.vectors.column(src) * eig.values[src].sqrt();
        a.set_column(dst, &col);
    }
    Ok(a)
}

/// Moore–Penrose pseudoinverse; singular values below `rank_tol * max` are
/// treated as zero.
pub fn pinv(a: &Matrix, rank_tol: f64) -> Result<Matrix> {
    let dec = svd(a, rank_tol)?;
    let mut vt = dec.v.transpose();
    for (j, s) in dec.s.iter().enumerate() {
        vt.column_mut(j).scale_mut(1.0 / s);
    }
    Ok(vt * dec.u.transpose())
}

/// Solves `a·f + f·b = r` for symmetric positive semidefinite `a`, `b` by
/// diagonalizing both and dividing componentwise by `αᵢ + βⱼ`.
///
/// Pairs with `αᵢ + βⱼ <= rank_tol * (max α + max β)` raise `SingularPencil`.
pub fn sylvester_spd(a: &Matrix, b: &Matrix, r: &Matrix, rank_tol: f64) -> Result<Matrix> {
    if !a.is_square() || !b.is_square() || r.nrows() != a.nrows() || r.ncols() != b.nrows() {
        return Err(Error::InvalidInput(format!(
            "sylvester shapes a {}x{}, b {}x{}, r {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            r.nrows(),
            r.ncols()
        )));
    }
    let ea = eig_sym(a)?;
    let eb = eig_sym(b)?;
    let amax = ea.values.last().copied().unwrap_or(0.0).max(0.0);
    let bmax = eb.values.last().copied().unwrap_or(0.0).max(0.0);
    let min_sum = ea.values[0] + eb.values[0];
    if !(min_sum > rank_tol * (amax + bmax)) {
        return Err(Error::SingularPencil { min_sum });
    }
    let mut ft = ea.vectors.transpose() * r * &eb.vectors;
    for j in 0..ft.ncols() {
        for i in 0..ft.nrows() {
            ft[(i, j)] /= ea.values[i] + eb.values[j];
        }
    }
    Ok(&ea.vectors * ft * eb.vectors.transpose())
}

/// Solves `x · w = r` for `w` with minimum norm when `x` (r×k, k ≥ r) has full
/// row rank, via `w = xᵀ (x xᵀ)⁻¹ r`. Returns `None` when the Gram matrix is
/// not numerically positive definite.
pub fn right_inverse_apply(x: &Matrix, r: &Matrix) -> Option<Matrix> {
    let gram = x * x.transpose();
    let chol = Cholesky::new(gram)?;
    Some(x.transpose() * chol.solve(r))
}

/// Solves `w · y = r` for `w` with minimum norm when `y` (k×r, k ≥ r) has full
/// column rank, via `w = r (yᵀ y)⁻¹ yᵀ`.
pub fn left_inverse_apply(y: &Matrix, r: &Matrix) -> Option<Matrix> {
    let gram = y.transpose() * y;
    let chol = Cholesky::new(gram)?;
    // r G⁻¹ = (G⁻¹ rᵀ)ᵀ since G is symmetric
    Some(chol.solve(&r.transpose()).transpose() * y.transpose())
}

/// Largest absolute entry.
pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Spectral norm.
pub fn norm2(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    jacobi_svd(a).1.iter().fold(0.0f64, |m, v| m.max(*v))
}

fn twiddles(m: usize, sign: f64) -> Vec<Complex64> {
    (0..m)
        .map(|j| Complex64::from_polar(1.0, sign * 2.0 * PI * j as f64 / m as f64))
        .collect()
}

fn dft_with_sign(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let m = x.len();
    if m == 0 {
        return Vec::new();
    }
    let w = twiddles(m, sign);
    let norm = 1.0 / (m as f64).sqrt();
    (0..m)
        .map(|l| {
            let acc: Complex64 = x
                .iter()
                .enumerate()
                .map(|(k, xk)| w[(k * l) % m] * xk)
                .sum();
            acc * norm
        })
        .collect()
}

/// Unitary DFT `x̂_l = m^{-1/2} Σ_k e^{+i2πkl/m} x_k`.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    dft_with_sign(x, 1.0)
}

/// Inverse of [`dft`].
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    dft_with_sign(x, -1.0)
}

pub fn dft_real(x: &[f64]) -> Vec<Complex64> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft(&xc)
}

/// Precomputed DFT of a fixed length, for inner loops.
#[derive(Debug, Clone)]
pub struct Dft {
    m: usize,
    fwd: Vec<Complex64>,
    inv: Vec<Complex64>,
    norm: f64,
}

impl Dft {
    pub fn new(m: usize) -> Self {
        Dft {
            m,
            fwd: twiddles(m, 1.0),
            inv: twiddles(m, -1.0),
            norm: 1.0 / (m as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let m = self.m;
        (0..m)
            .map(|l| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, xk) in x.iter().enumerate() {
                    acc += self.fwd[(k * l) % m] * xk;
                }
                acc * self.norm
            })
            .collect()
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_real(&self, x: &[Complex64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|k| {
                let mut acc = 0.0;
                for (l, xl) in x.iter().enumerate() {
                    acc += (self.inv[(k * l) % m] * xl).re;
                }
                acc * self.norm
            })
            .collect()
    }
}

/// Formats a matrix in the text exchange format with round-trip precision.
pub fn format_matrix(a: &Matrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| format!("{}", a[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("bad header {header:?}: {e}")))?;
    let (rows, cols) = match dims.as_slice() {
        [r, c] if *r >= 1 && *c >= 1 => (*r, *c),
        _ => return Err(Error::Parse(format!("bad header {header:?}"))),
    };
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {i}")))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("row {i}: {e}")))?;
        if vals.len() != cols {
            return Err(Error::Parse(format!(
                "row {i} has {} entries, expected {cols}",
                vals.len()
            )));
        }
        data.extend(vals);
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing data after last row".into()));
    }
    let a = Matrix::from_row_slice(rows, cols, &data);
    check_finite(&a, "matrix file").map_err(|e| Error::Parse(e.to_string()))?;
    Ok(a)
}

pub fn write_matrix(path: &Path, a: &Matrix) -> Result<()> {
    std::fs::write(path, format_matrix(a))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn row_vector(v: &[f64]) -> Matrix {
    Matrix::from_row_slice(1, v.len(), v)
}

pub fn diag(v: &[f64]) -> Matrix {
    Matrix::from_diagonal(&DVector::from_row_slice(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn eye(n: usize) -> Matrix {
        Matrix::identity(n, n)
    }

    #[test]
    fn svd_identity_and_rank_deficient() {
        let s = svd(&eye(3), 1e-12).unwrap();
        assert_eq!(s.s, vec![1.0, 1.0, 1.0]);
        assert!((s.reconstruct() - eye(3)).amax() < 1e-14);

        let s = svd(&diag(&[3.0, 0.0]), 1e-12).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.s[0] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut a = eye(2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(svd(&a, 1e-10), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn svd_invariants_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let m = rng.gen_range(1..7);
            let n = rng.gen_range(1..7);
            let a = random(m, n, &mut rng);
            let s = svd(&a, DEFAULT_RANK_TOL).unwrap();
            let r = s.rank();
            assert!((s.u.transpose() * &s.u - eye(r)).amax() <= 1e-10);
            assert!((&s.v * s.v.transpose() - eye(r)).amax() <= 1e-10);
            assert!(s.s.windows(2).all(|w| w[0] >= w[1]));
            assert!(norm2(&(s.reconstruct() - &a)) <= 1e-8 * norm2(&a));
        }
    }

    #[test]
    fn unitarize_cases() {
        let th: f64 = 0.3;
        let q = Matrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        assert!((unitarize(&q, 1e-10).unwrap() - &q).amax() < 1e-12);
        assert!((unitarize(&diag(&[5.0, 2.0]), 1e-10).unwrap() - eye(2)).amax() < 1e-12);
        let u = unitarize(&Matrix::from_element(1, 1, -3.7), 1e-10).unwrap();
        assert!((u[(0, 0)] + 1.0).abs() < 1e-14);
        assert!(matches!(
            unitarize(&Matrix::zeros(2, 3), 1e-10),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn unitarize_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = random(3, 5, &mut rng);
            let u1 = unitarize(&a, DEFAULT_RANK_TOL).unwrap();
            let u2 = unitarize(&u1, DEFAULT_RANK_TOL).unwrap();
            assert!((u1 - u2).amax() < 1e-9);
        }
    }

    #[test]
    fn eig_sym_cases() {
        let e = eig_sym(&diag(&[-1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0]);
        assert!((e.vectors.abs() - eye(2)).amax() < 1e-14);

        let e = eig_sym(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);

        assert!(matches!(eig_sym(&Matrix::zeros(2, 3)), Err(Error::InvalidInput(_))));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let b = random(5, 5, &mut rng);
            let s = &b + b.transpose();
            let e = eig_sym(&s).unwrap();
            let resid = &s * &e.vectors - &e.vectors * diag(&e.values);
            assert!(resid.amax() <= 1e-9);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigspace_projector_cases() {
        let s = diag(&[-3.0, 2.0]);
        let neg = eigspace_projector(&s, EigSign::Negative, 1e-12).unwrap();
        let pos = eigspace_projector(&s, EigSign::Positive, 1e-12).unwrap();
        assert!((neg - diag(&[1.0, 0.0])).amax() < 1e-14);
        assert!((pos - diag(&[0.0, 1.0])).amax() < 1e-14);
        let z = diag(&[0.0]);
        assert_eq!(eigspace_projector(&z, EigSign::Negative, 0.0).unwrap()[(0, 0)], 0.0);
        assert_eq!(eigspace_projector(&z, EigSign::Positive, 0.0).unwrap()[(0, 0)], 0.0);
    }

    #[test]
    fn eigspace_projectors_partition_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let n = rng.gen_range(1..7);
            // rank-deficient symmetric matrix so the zero space is nonempty
            let b = random(n, n.saturating_sub(1).max(1), &mut rng);
            let c = random(n, 1, &mut rng);
            let s = &b * b.transpose() - &c * c.transpose();
            let eig = eig_sym(&s).unwrap();
            let scale = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let tol = 1e-10 * scale;
            let neg = spectral_projector(&eig, |v| v < -tol);
            let pos = spectral_projector(&eig, |v| v > tol);
            let zero = spectral_projector(&eig, |v| v.abs() <= tol);
            assert!((&neg + &pos + zero - eye(n)).amax() < 1e-9);
            assert!((&neg * &neg - &neg).amax() < 1e-9);
            assert!((&pos - pos.transpose()).amax() < 1e-9);
        }
    }

    #[test]
    fn cholesky_psd_cases() {
        let c = eye(2) * 4.0;
        let a = cholesky_psd(&c, 1e-10).unwrap();
        assert_eq!(a.ncols(), 2);
        assert!((&a * a.transpose() - &c).amax() < 1e-12);

        let c = Matrix::from_element(2, 2, 1.0);
        let a = cholesky_psd(&c, 1e-10).unwrap();
        assert_eq!(a.ncols(), 1);
        assert!((a[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!((a[(0, 0)] - a[(1, 0)]).abs() < 1e-12);

        assert!(matches!(
            cholesky_psd(&diag(&[1.0, -1.0]), 1e-10),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn cholesky_psd_random_gram_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let m = rng.gen_range(1..8);
            let k = rng.gen_range(1..8);
            let x = random(m, k, &mut rng);
            let c = &x * x.transpose();
            let a = cholesky_psd(&c, DEFAULT_RANK_TOL).unwrap();
            assert_eq!(a.ncols(), m.min(k));
            assert!((&a * a.transpose() - &c).amax() <= 1e-8 * max_abs(&c));
        }
    }

    #[test]
    fn pinv_cases() {
        assert!((pinv(&eye(3), 1e-10).unwrap() - eye(3)).amax() < 1e-14);
        assert_eq!(pinv(&Matrix::from_element(1, 1, 2.0), 1e-10).unwrap()[(0, 0)], 0.5);
        let p = pinv(&diag(&[3.0, 0.0]), 1e-10).unwrap();
        assert!((p - diag(&[1.0 / 3.0, 0.0])).amax() < 1e-15);
        assert_eq!(pinv(&Matrix::zeros(2, 3), 1e-10).unwrap(), Matrix::zeros(3, 2));
    }

    #[test]
    fn pinv_moore_penrose_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let a = random(rng.gen_range(1..6), rng.gen_range(1..6), &mut rng);
            let p = pinv(&a, DEFAULT_RANK_TOL).unwrap();
            assert!((&a * &p * &a - &a).amax() < 1e-8);
            assert!((&p * &a * &p - &p).amax() < 1e-8);
            let ap = &a * &p;
            let pa = &p * &a;
            assert!((&ap - ap.transpose()).amax() < 1e-8);
            assert!((&pa - pa.transpose()).amax() < 1e-8);
        }
    }

    #[test]
    fn sylvester_cases() {
        let one = eye(1);
        let f = sylvester_spd(&one, &one, &Matrix::from_element(1, 1, 4.0), 1e-12).unwrap();
        assert_eq!(f[(0, 0)], 2.0);

        let f = sylvester_spd(
            &diag(&[1.0, 2.0]),
            &diag(&[3.0, 4.0]),
            &Matrix::from_element(2, 2, 1.0),
            1e-12,
        )
        .unwrap();
        let expect = Matrix::from_row_slice(2, 2, &[0.25, 0.2, 0.2, 1.0 / 6.0]);
        assert!((f - expect).amax() < 1e-15);

        let f = sylvester_spd(&eye(3), &eye(3), &Matrix::zeros(3, 3), 1e-12).unwrap();
        assert_eq!(f, Matrix::zeros(3, 3));

        let z = Matrix::zeros(2, 2);
        assert!(matches!(
            sylvester_spd(&z, &z, &eye(2), 1e-12),
            Err(Error::SingularPencil { .. })
        ));
    }

    #[test]
    fn sylvester_residual_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=8 {
            for _ in 0..20 {
                let p = random(n, n + 2, &mut rng);
                let q = random(n, n + 2, &mut rng);
                let a = &p * p.transpose();
                let b = &q * q.transpose();
                let r = random(n, n, &mut rng);
                let f = sylvester_spd(&a, &b, &r, 1e-14).unwrap();
                let resid = &a * &f + &f * &b - &r;
                assert!(resid.amax() <= 1e-10 * max_abs(&r), "n={n}");
            }
        }
    }

    #[test]
    fn dft_cases() {
        let x = dft_real(&[1.0, 0.0, 0.0, 0.0]);
        for v in &x {
            assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let x = dft_real(&[1.0, 1.0, 1.0]);
        assert!((x[0] - Complex64::new(3f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(x[1].norm() < 1e-15 && x[2].norm() < 1e-15);
        // sign convention: e^{+i 2π k l / m}
        let x = dft_real(&[0.0, 1.0, 0.0, 0.0]);
        assert!((x[1] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn dft_roundtrip_parseval_and_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let xh = dft_real(&x);
        let back = idft(&xh);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b.re).abs() < 1e-12 && b.im.abs() < 1e-12);
        }
        let e1: f64 = x.iter().map(|v| v * v).sum();
        let e2: f64 = xh.iter().map(|v| v.norm_sqr()).sum();
        assert!((e1 - e2).abs() < 1e-12);
        for l in 1..8 {
            assert!((xh[l] - xh[8 - l].conj()).norm() < 1e-12);
        }
        let plan = Dft::new(8);
        let xh2 = plan.forward_real(&x);
        for (a, b) in xh.iter().zip(&xh2) {
            assert!((a - b).norm() < 1e-14);
        }
        for (a, b) in x.iter().zip(plan.inverse_real(&xh2)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn text_format_roundtrip() {
        let a = Matrix::from_row_slice(2, 3, &[1.0, -0.1, 1.0 / 3.0, 1e-300, 2.5e10, 0.0]);
        let text = format_matrix(&a);
        assert!(text.starts_with("2 3\n1 -0.1 "));
        assert_eq!(parse_matrix(&text).unwrap(), a);
        assert!(parse_matrix("2 2\n1 2\n3\n").is_err());
        assert!(parse_matrix("0 2\n").is_err());
        assert!(parse_matrix("1 1\nnan\n").is_err());
    }
}
