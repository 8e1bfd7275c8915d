//! Dense complex linear algebra for the small (at most 16 x 16) matrices
//! that describe 1-4 qubit registers.
//!
//! Everything here works on [`CMat`], a row-major dense complex matrix. The
//! Hermitian eigensolver is a cyclic complex Jacobi iteration, which is more
//! than fast enough at these sizes and gives orthonormal eigenvectors to
//! machine precision.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Off-diagonal Frobenius norm (relative to the matrix norm) at which Jacobi stops.
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Tolerance used by [`herm_eig`] when checking its input.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from row-major data. Fails on a length mismatch or
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("matrix entries must be finite".into()));
        }
        Ok(CMat { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        CMat::from_vec(n_rows, n_cols, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = CMat::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// |v><w|
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        CMat::from_fn(v.len(), w.len(), |r, c| v[r] * w[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Frobenius norm of `self - self^dagger`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    /// `<v| self |v>`
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let av = self.apply(v);
        v.iter().zip(&av).map(|(a, b)| a.conj() * b).sum()
    }

    /// Real part of `Tr(self * other)` without forming the product.
    pub fn trace_product_re(&self, other: &CMat) -> f64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = 0.0;
        for r in 0..self.rows {
            for k in 0..self.cols {
                acc += (self[(r, k)] * other[(k, r)]).re;
            }
        }
        acc
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.data[k * other.cols + c];
                }
            }
        }
        out
    }

    /// `self^dagger * m * self`
    pub fn conjugate(&self, m: &CMat) -> CMat {
        self.dagger().matmul(&m.matmul(self))
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_distance(&self, other: &CMat) -> f64 {
        (self - other).frobenius_norm()
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<'a> Mul<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn mul(self, rhs: &'a CMat) -> CMat {
        self.matmul(rhs)
    }
}

impl<'a> Add<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn add(self, rhs: &'a CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn sub(self, rhs: &'a CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Kronecker product: entry `(i*rows_b + k, j*cols_b + l)` is `a[i,j] * b[k,l]`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (rb, cb) = (b.rows, b.cols);
    CMat::from_fn(a.rows * rb, a.cols * cb, |r, c| a[(r / rb, c / cb)] * b[(r % rb, c % cb)])
}

pub fn kron_all<'a>(mats: impl IntoIterator<Item = &'a CMat>) -> CMat {
    mats.into_iter().fold(CMat::identity(1), |acc, m| kron(&acc, m))
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

fn check_dims(rho: &CMat, dims: &[usize]) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::Dimension(format!("expected a square matrix, got {}x{}", rho.rows, rho.cols)));
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Dimension("subsystem dimensions must be positive".into()));
    }
    let total: usize = dims.iter().product();
    if total != rho.rows {
        return Err(Error::Dimension(format!(
            "subsystem dimensions {:?} multiply to {} but the matrix is {}x{}",
            dims, total, rho.rows, rho.cols
        )));
    }
    Ok(())
}

/// Splits a flat index into per-subsystem digits (first subsystem most significant).
fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn flatten(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Traces out every subsystem not listed in `keep`. The kept subsystems stay
/// in ascending order.
pub fn partial_trace(rho: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    check_dims(rho, dims)?;
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace needs a nonempty keep set".into()));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!("subsystem {bad} out of range for {} subsystems", dims.len())));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    let mut out = CMat::zeros(dk, dk);
    let mut full = vec![0usize; dims.len()];
    for r in 0..dk {
        let rd = digits(r, &keep_dims);
        for c in 0..dk {
            let cd = digits(c, &keep_dims);
            let mut acc = ZERO;
            for e in 0..dt {
                let ed = digits(e, &traced_dims);
                for (slot, &k) in keep.iter().enumerate() {
                    full[k] = rd[slot];
                }
                for (slot, &t) in traced.iter().enumerate() {
                    full[t] = ed[slot];
                }
                let row = flatten(&full, dims);
                for (slot, &k) in keep.iter().enumerate() {
                    full[k] = cd[slot];
                }
                let col = flatten(&full, dims);
                acc += rho[(row, col)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Transposes the indices of every subsystem listed in `subsystems`.
pub fn partial_transpose_many(rho: &CMat, dims: &[usize], subsystems: &[usize]) -> Result<CMat> {
    check_dims(rho, dims)?;
    if let Some(&bad) = subsystems.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!("subsystem {bad} out of range for {} subsystems", dims.len())));
    }
    let n = rho.rows;
    let mut out = CMat::zeros(n, n);
    for r in 0..n {
        let mut rd = digits(r, dims);
        for c in 0..n {
            let mut cd = digits(c, dims);
            for &s in subsystems {
                std::mem::swap(&mut rd[s], &mut cd[s]);
            }
            out[(flatten(&rd, dims), flatten(&cd, dims))] = rho[(r, c)];
            for &s in subsystems {
                std::mem::swap(&mut rd[s], &mut cd[s]);
            }
        }
    }
    Ok(out)
}

pub fn partial_transpose(rho: &CMat, dims: &[usize], subsystem: usize) -> Result<CMat> {
    partial_transpose_many(rho, dims, &[subsystem])
}

/// Reorders subsystems so that new subsystem `i` is old subsystem `order[i]`.
pub fn permute_subsystems(rho: &CMat, dims: &[usize], order: &[usize]) -> Result<CMat> {
    check_dims(rho, dims)?;
    let mut seen = order.to_vec();
    seen.sort_unstable();
    if seen != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::InvalidArgument(format!("{order:?} is not a permutation of the subsystems")));
    }
    let new_dims: Vec<usize> = order.iter().map(|&i| dims[i]).collect();
    let n = rho.rows;
    let map = |idx: usize| {
        let old = digits(idx, dims);
        let new: Vec<usize> = order.iter().map(|&i| old[i]).collect();
        flatten(&new, &new_dims)
    };
    let perm: Vec<usize> = (0..n).map(map).collect();
    let mut out = CMat::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(perm[r], perm[c])] = rho[(r, c)];
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct HermEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMat,
}

impl HermEigen {
    /// `V f(diag) V^dagger`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for r in 0..n {
                scaled[(r, c)] *= s;
            }
        }
        scaled.matmul(&self.vectors.dagger())
    }

    pub fn reconstruct(&self) -> CMat {
        self.map_spectrum(|x| C64::new(x, 0.0))
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn herm_eig(h: &CMat) -> Result<HermEigen> {
    if !h.is_square() {
        return Err(Error::Dimension(format!("eigensolver needs a square matrix, got {}x{}", h.rows, h.cols)));
    }
    let defect = h.hermitian_defect();
    let scale = h.frobenius_norm().max(1.0);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    let n = h.rows;
    // Symmetrize so round-off in the input does not leak into the rotations.
    let mut a = CMat::from_fn(n, n, |r, c| (h[(r, c)] + h[(c, r)].conj()) * 0.5);
    let mut v = CMat::identity(n);
    let threshold = JACOBI_TOL * scale;

    let off_norm = |a: &CMat| {
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    acc += a[(r, c)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) >= threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-diagonal norm {:e})",
                off_norm(&a)
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMat::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermEigen { values, vectors })
}

/// Annihilates `a[p,q]` with `G = diag(1, e^{-i alpha}) R(theta)` acting on rows/columns p, q.
fn jacobi_rotate(a: &mut CMat, v: &mut CMat, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag; // e^{i alpha}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let n = a.rows;
    let pc = phase.conj();

    // A <- A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * pc * s;
        a[(k, q)] = akp * s + akq * pc * c;
    }
    // A <- G^dagger A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * s + aqk * phase * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    // V <- V G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * pc * s;
        v[(k, q)] = vkp * s + vkq * pc * c;
    }
}

/// `exp(-i h t)` through the eigendecomposition of `h`.
pub fn propagator(h: &CMat, t: f64) -> Result<CMat> {
    let eig = herm_eig(h)?;
    Ok(eig.map_spectrum(|lam| C64::from_polar(1.0, -lam * t)))
}

/// `U rho U^dagger` with `U = exp(-i h t)`.
pub fn evolve_matrix(rho: &CMat, h: &CMat, t: f64) -> Result<CMat> {
    if rho.rows != h.rows || !rho.is_square() {
        return Err(Error::Dimension(format!(
            "state is {}x{} but the Hamiltonian is {}x{}",
            rho.rows, rho.cols, h.rows, h.cols
        )));
    }
    let u = propagator(h, t)?;
    Ok(u.matmul(rho).matmul(&u.dagger()))
}

/// `a b - b a`
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    &a.matmul(b) - &b.matmul(a)
}

/// `(a b + b a) / 2`
pub fn anticommutator_half(a: &CMat, b: &CMat) -> CMat {
    (&a.matmul(b) + &b.matmul(a)).scale_re(0.5)
}
