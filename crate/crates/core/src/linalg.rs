//! Dense complex linear algebra.
//!
//! A small row-major matrix type plus the handful of operations the rest of
//! the crate needs: a Hermitian eigensolver (Householder tridiagonalization
//! followed by implicit QL), the PSD square root, Kronecker products and the
//! subsystem operations used on composite density matrices.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Hermiticity tolerance accepted by [`herm_eig`] (scaled by the max-norm
/// when that exceeds one).
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |r, c| a[r] * b[c].conj())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("columns have different lengths".into()));
        }
        Ok(Self::from_fn(rows, cols, |r, c| columns[c][r]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// The first `k` columns.
    pub fn leading_columns(&self, k: usize) -> Self {
        Self::from_fn(self.rows, k, |r, c| self[(r, c)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of `self - other`; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-norm of `self - self†`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Max-norm of `self† self - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let gram = self.adjoint().matmul(self);
        gram.max_abs_diff(&Self::identity(self.cols))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// `V diag(f(w)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let w: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let mut acc = ZERO;
                for (k, &wk) in w.iter().enumerate() {
                    if wk != 0.0 {
                        acc += v[(r, k)] * v[(c, k)].conj() * wk;
                    }
                }
                out[(r, c)] = acc;
                out[(c, r)] = acc.conj();
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL * m.max_norm().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
///
/// The input is symmetrized as `(m + m†)/2` before factorization.
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    check_hermitian(m)?;
    let (eigenvalues, eigenvectors) = hermitian_solve(m, true)?;
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors: eigenvectors.expect("vectors requested"),
    })
}

/// Eigenvalues only (ascending); skips eigenvector accumulation.
pub fn herm_eigvals(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    Ok(hermitian_solve(m, false)?.0)
}

fn hermitian_solve(m: &ComplexMatrix, vectors: bool) -> Result<(Vec<f64>, Option<ComplexMatrix>)> {
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), vectors.then(|| ComplexMatrix::zeros(0, 0))));
    }
    let mut a = m.hermitian_part();
    let mut q = vectors.then(|| ComplexMatrix::identity(n));

    // Householder reduction to Hermitian tridiagonal form: a <- H a H, q <- q H.
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let tail: f64 = (lo + 1..n).map(|r| a[(r, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[(lo, k)];
        let sigma = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * sigma;
        for r in lo..n {
            v[r] = a[(r, k)];
        }
        v[lo] -= alpha;
        let vnorm2 = (v[lo].norm_sqr()) + tail;
        let beta = 2.0 / vnorm2;

        // Left: a <- a - beta v (v† a), rows lo..n.
        for c in 0..n {
            let mut s = ZERO;
            for r in lo..n {
                s += v[r].conj() * a[(r, c)];
            }
            w[c] = s * beta;
        }
        for r in lo..n {
            for c in 0..n {
                let t = v[r] * w[c];
                a[(r, c)] -= t;
            }
        }
        // Right: a <- a - beta (a v) v†, columns lo..n.
        for r in 0..n {
            let mut s = ZERO;
            for c in lo..n {
                s += a[(r, c)] * v[c];
            }
            let s = s * beta;
            for c in lo..n {
                let t = s * v[c].conj();
                a[(r, c)] -= t;
            }
        }
        if let Some(q) = q.as_mut() {
            for r in 0..n {
                let mut s = ZERO;
                for c in lo..n {
                    s += q[(r, c)] * v[c];
                }
                let s = s * beta;
                for c in lo..n {
                    let t = s * v[c].conj();
                    q[(r, c)] -= t;
                }
            }
        }
    }

    // Rotate the complex off-diagonal onto the nonnegative reals with a
    // diagonal unitary D, so that D† T D is real symmetric.
    let mut diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    let mut phases = vec![ONE; n];
    for i in 0..n - 1 {
        let e = a[(i + 1, i)];
        let r = e.norm();
        off[i] = r;
        phases[i + 1] = if r > 0.0 { phases[i] * (e / r) } else { phases[i] };
    }

    let mut z = vectors.then(|| {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        z
    });
    tql2(&mut diag, &mut off, z.as_deref_mut())?;

    let eigvecs = match (q, z) {
        (Some(q), Some(z)) => {
            // eigenvectors = q D Z; z is stored transposed (z[j*n + c] = Z[c][j]).
            let mut out = ComplexMatrix::zeros(n, n);
            for r in 0..n {
                for j in 0..n {
                    let mut acc = ZERO;
                    for c in 0..n {
                        acc += q[(r, c)] * phases[c] * z[j * n + c];
                    }
                    out[(r, j)] = acc;
                }
            }
            Some(out)
        }
        _ => None,
    };
    Ok((diag, eigvecs))
}

/// Implicit QL on a real symmetric tridiagonal matrix (EISPACK tql2).
///
/// `off[i]` couples `i` and `i+1`; the last entry is ignored. `zt`, when
/// present, holds the accumulated transform transposed: `zt[j*n + k]` is the
/// k-th component of eigenvector j. Eigenvalues come back ascending.
fn tql2(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(Error::ConvergenceFailure);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(zt) = zt.as_deref_mut() {
                        let (lo, hi) = zt.split_at_mut((i + 1) * n);
                        let vi = &mut lo[i * n..];
                        let vi1 = &mut hi[..n];
                        for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                            let t = *b;
                            *b = s * *a + c * t;
                            *a = c * *a - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort keeps the vector swaps cheap for the sizes used here.
    for i in 0..n - 1 {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            if let Some(zt) = zt.as_deref_mut() {
                for c in 0..n {
                    zt.swap(i * n + c, k * n + c);
                }
            }
        }
    }
    Ok(())
}

/// Eigenvalues below this are rejected by [`psd_sqrt`]; those between it
/// and zero are clamped.
pub const PSD_CLAMP: f64 = 1e-8;

/// Hermitian PSD square root.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = herm_eig(m)?;
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -PSD_CLAMP {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()))
}

/// Upper-trapezoidal factor `R` of a thin Householder QR, `m = Q R`, with
/// `min(rows, cols)` rows.
pub fn qr_r_factor(m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let steps = rows.min(cols);
    let mut a = m.clone();
    let mut v = vec![ZERO; rows];
    for k in 0..steps {
        let tail: f64 = (k + 1..rows).map(|r| a[(r, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[(k, k)];
        let sigma = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * sigma;
        for r in k..rows {
            v[r] = a[(r, k)];
        }
        v[k] -= alpha;
        let beta = 2.0 / (v[k].norm_sqr() + tail);
        for c in k..cols {
            let s: C64 = (k..rows).map(|r| v[r].conj() * a[(r, c)]).sum::<C64>() * beta;
            for r in k..rows {
                let t = v[r] * s;
                a[(r, c)] -= t;
            }
        }
        for r in k + 1..rows {
            a[(r, k)] = ZERO;
        }
    }
    ComplexMatrix::from_fn(steps, cols, |r, c| if c < r { ZERO } else { a[(r, c)] })
}

/// Singular values (descending) from the Hermitian embedding
/// `[[0, m], [m†, 0]]`, whose spectrum is `±σ_i`. Working on the embedding
/// instead of `m†m` keeps zero singular values at round-off level.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let (rows, cols) = (m.rows(), m.cols());
    let n = rows + cols;
    let mut h = ComplexMatrix::zeros(n, n);
    for r in 0..rows {
        for c in 0..cols {
            h[(r, rows + c)] = m[(r, c)];
            h[(rows + c, r)] = m[(r, c)].conj();
        }
    }
    let w = herm_eigvals(&h)?;
    Ok(w.iter().rev().take(rows.min(cols)).map(|&x| x.max(0.0)).collect())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Validates `dims` against a square matrix and returns the row strides.
fn subsystem_strides(m: &ComplexMatrix, dims: &[usize]) -> Result<Vec<usize>> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {:?} do not match a {}x{} matrix",
            dims,
            m.rows(),
            m.cols()
        )));
    }
    let mut strides = vec![1; dims.len()];
    for i in (0..dims.len() - 1).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    Ok(strides)
}

fn check_index(which: usize, dims: &[usize]) -> Result<()> {
    if which >= dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem index {which} out of range for {} subsystems",
            dims.len()
        )));
    }
    Ok(())
}

/// Transpose of tensor factor `which` (0-based).
pub fn partial_transpose(m: &ComplexMatrix, dims: &[usize], which: usize) -> Result<ComplexMatrix> {
    let strides = subsystem_strides(m, dims)?;
    check_index(which, dims)?;
    let (d, s) = (dims[which], strides[which]);
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        let dr = (r / s) % d;
        for c in 0..n {
            let dc = (c / s) % d;
            let nr = r - dr * s + dc * s;
            let nc = c - dc * s + dr * s;
            out[(nr, nc)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Reduced matrix on the subsystems in `keep` (0-based, in the given order).
pub fn partial_trace_multi(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let strides = subsystem_strides(m, dims)?;
    for &k in keep {
        check_index(k, dims)?;
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let n = m.rows();
    let digit = |idx: usize, sub: usize| (idx / strides[sub]) % dims[sub];
    let kept_index = |idx: usize| keep.iter().fold(0, |acc, &k| acc * dims[k] + digit(idx, k));
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for r in 0..n {
        let kr = kept_index(r);
        for c in 0..n {
            if traced.iter().all(|&t| digit(r, t) == digit(c, t)) {
                out[(kr, kept_index(c))] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Reduced matrix on subsystem `keep` (0-based).
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: usize) -> Result<ComplexMatrix> {
    partial_trace_multi(m, dims, &[keep])
}

/// Index map for reordering subsystems: new position `j` holds old
/// subsystem `order[j]`. Returns `map` with `new_index = map[old_index]`.
pub fn subsystem_permutation(dims: &[usize], order: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; dims.len()];
    if order.len() != dims.len()
        || order
            .iter()
            .any(|&o| o >= dims.len() || std::mem::replace(&mut seen[o], true))
    {
        return Err(Error::DimensionMismatch(format!(
            "{order:?} is not a permutation of {} subsystems",
            dims.len()
        )));
    }
    let total: usize = dims.iter().product();
    let n = dims.len();
    let mut old_strides = vec![1; n];
    for i in (0..n.saturating_sub(1)).rev() {
        old_strides[i] = old_strides[i + 1] * dims[i + 1];
    }
    Ok((0..total)
        .map(|old| {
            order
                .iter()
                .fold(0, |acc, &o| acc * dims[o] + (old / old_strides[o]) % dims[o])
        })
        .collect())
}

/// Reorders the tensor factors of `m`; new factor `j` is old factor `order[j]`.
pub fn permute_subsystems(m: &ComplexMatrix, dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    subsystem_strides(m, dims)?;
    let map = subsystem_permutation(dims, order)?;
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n, n);
        let h = (&a + &a.adjoint()).scale(c(0.5, 0.0));
        let s = h.max_norm();
        h.scale(c(1.0 / s, 0.0))
    }

    #[test]
    fn eig_of_diagonal_is_sorted() {
        let eig = herm_eig(&ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.eigenvalues.len(), 3);
        for (got, want) in eig.eigenvalues.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_of_pauli_y() {
        let y = ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap();
        let eig = herm_eig(&y).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(eig.reconstruct().max_abs_diff(&y) < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 6, 9, 17, 40] {
            for _ in 0..5 {
                let h = random_hermitian(&mut rng, n);
                let eig = herm_eig(&h).unwrap();
                assert!(eig.reconstruct().max_abs_diff(&h) < 1e-10, "n={n}");
                assert!(eig.eigenvectors.unitarity_deviation() < 1e-10, "n={n}");
                assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
                let vals = herm_eigvals(&h).unwrap();
                for (a, b) in vals.iter().zip(&eig.eigenvalues) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eig_handles_degenerate_and_zero_matrices() {
        let eig = herm_eig(&ComplexMatrix::zeros(4, 4)).unwrap();
        assert!(eig.eigenvalues.iter().all(|&x| x == 0.0));
        let eig = herm_eig(&ComplexMatrix::identity(5)).unwrap();
        assert!(eig.eigenvectors.unitarity_deviation() < 1e-14);
        // rank-one projector with a complex vector
        let v = vec![c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)];
        let p = ComplexMatrix::outer(&v, &v);
        let eig = herm_eig(&p).unwrap();
        assert!((eig.eigenvalues[3] - 1.0).abs() < 1e-14);
        assert!(eig.eigenvalues[..3].iter().all(|x| x.abs() < 1e-14));
        assert!(eig.reconstruct().max_abs_diff(&p) < 1e-14);
    }

    #[test]
    fn eig_rejects_bad_input() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(herm_eig(&m), Err(Error::NonSquare { .. })));
        let m = ComplexMatrix::from_vec(2, 2, vec![ONE, ONE, ZERO, ONE]).unwrap();
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
        // tiny asymmetry within tolerance is accepted
        let m = ComplexMatrix::from_vec(2, 2, vec![ONE, c(1e-11, 0.0), ZERO, ONE]).unwrap();
        assert!(herm_eig(&m).is_ok());
    }

    #[test]
    fn sqrt_examples() {
        let id = ComplexMatrix::identity(3);
        assert!(psd_sqrt(&id).unwrap().max_abs_diff(&id) < 1e-14);
        let r = psd_sqrt(&ComplexMatrix::from_real_diag(&[4.0, 9.0])).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_real_diag(&[2.0, 3.0])) < 1e-14);
        let bad = ComplexMatrix::from_real_diag(&[1.0, -1e-3]);
        assert!(matches!(psd_sqrt(&bad), Err(Error::NotPsd { .. })));
        let clamped = psd_sqrt(&ComplexMatrix::from_real_diag(&[1.0, -1e-9])).unwrap();
        assert_eq!(clamped[(1, 1)], ZERO);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 4, 9] {
            let a = random_matrix(&mut rng, n, n);
            let m = a.adjoint().matmul(&a);
            let r = psd_sqrt(&m).unwrap();
            assert!(r.hermitian_deviation() < 1e-12);
            assert!(r.matmul(&r).max_abs_diff(&m) < 1e-9);
        }
    }

    #[test]
    fn qr_r_factor_preserves_gram_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (rows, cols) in [(9, 4), (4, 4), (1, 4), (2, 4), (6, 3)] {
            let m = random_matrix(&mut rng, rows, cols);
            let r = qr_r_factor(&m);
            assert_eq!((r.rows(), r.cols()), (rows.min(cols), cols));
            for i in 0..r.rows() {
                for j in 0..i.min(cols) {
                    assert_eq!(r[(i, j)], ZERO);
                }
            }
            let gram = m.adjoint().matmul(&m);
            assert!(r.adjoint().matmul(&r).max_abs_diff(&gram) < 1e-12);
        }
    }

    #[test]
    fn singular_values_examples() {
        let m = ComplexMatrix::from_vec(2, 2, vec![ZERO, c(0.0, 3.0), c(-2.0, 0.0), ZERO]).unwrap();
        let s = singular_values(&m).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);

        // rank one: the zero singular values stay at round-off level
        let v = vec![c(0.6, 0.0), c(0.0, 0.8), ZERO];
        let s = singular_values(&ComplexMatrix::outer(&v, &v)).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-14);
        assert!(s[1] < 1e-15 && s[2] < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_matrix(&mut rng, 4, 4);
        let s = singular_values(&m).unwrap();
        let w = herm_eigvals(&m.adjoint().matmul(&m)).unwrap();
        for (sv, ev) in s.iter().zip(w.iter().rev()) {
            assert!((sv * sv - ev).abs() < 1e-12);
        }
    }

    #[test]
    fn kron_examples() {
        assert_eq!(
            kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)),
            ComplexMatrix::identity(4)
        );
        let k = kron(
            &ComplexMatrix::from_real_diag(&[1.0, 2.0]),
            &ComplexMatrix::from_real_diag(&[3.0, 4.0]),
        );
        assert_eq!(k, ComplexMatrix::from_real_diag(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_mixed_product_and_associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let [a, b, cm, d] = [0; 4].map(|_| random_matrix(&mut rng, 2, 2));
            let lhs = kron(&a, &b).matmul(&kron(&cm, &d));
            let rhs = kron(&a.matmul(&cm), &b.matmul(&d));
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            let e = random_matrix(&mut rng, 3, 2);
            assert!(kron(&kron(&a, &b), &e).max_abs_diff(&kron(&a, &kron(&b, &e))) < 1e-12);
        }
    }

    fn bell() -> ComplexMatrix {
        let s = 0.5f64.sqrt();
        let v = vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)];
        ComplexMatrix::outer(&v, &v)
    }

    #[test]
    fn partial_transpose_of_product_and_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 3, 3);
        let pt = partial_transpose(&kron(&a, &b), &[2, 3], 1).unwrap();
        assert!(pt.max_abs_diff(&kron(&a, &b.transpose())) < 1e-15);
        let pt = partial_transpose(&kron(&a, &b), &[2, 3], 0).unwrap();
        assert!(pt.max_abs_diff(&kron(&a.transpose(), &b)) < 1e-15);

        let m = random_matrix(&mut rng, 12, 12);
        for which in 0..3 {
            let twice =
                partial_transpose(&partial_transpose(&m, &[2, 3, 2], which).unwrap(), &[2, 3, 2], which).unwrap();
            assert_eq!(twice, m);
        }
        assert!(partial_transpose(&m, &[3, 3], 0).is_err());
        assert!(partial_transpose(&m, &[3, 4], 2).is_err());
    }

    #[test]
    fn bell_partial_transpose_min_eigenvalue() {
        let pt = partial_transpose(&bell(), &[2, 2], 1).unwrap();
        let w = herm_eigvals(&pt).unwrap();
        assert!((w[0] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 3);
        let red = partial_trace(&kron(&a, &b), &[2, 3], 0).unwrap();
        assert!(red.max_abs_diff(&a.scale(b.trace())) < 1e-14);
        let red = partial_trace(&kron(&a, &b), &[2, 3], 1).unwrap();
        assert!(red.max_abs_diff(&b.scale(a.trace())) < 1e-14);

        let half = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(partial_trace(&bell(), &[2, 2], 0).unwrap().max_abs_diff(&half) < 1e-15);

        // maximally entangled qutrits, by direct index contraction
        let s = 1.0 / 3f64.sqrt();
        let mut psi = vec![ZERO; 9];
        for i in 0..3 {
            psi[i * 3 + i] = c(s, 0.0);
        }
        let rho = ComplexMatrix::outer(&psi, &psi);
        let mut expected = ComplexMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    expected[(i, j)] += psi[i * 3 + k] * psi[j * 3 + k].conj();
                }
            }
        }
        let red = partial_trace(&rho, &[3, 3], 0).unwrap();
        assert!(red.max_abs_diff(&expected) < 1e-15);
        assert!(red.max_abs_diff(&ComplexMatrix::identity(3).scale(c(1.0 / 3.0, 0.0))) < 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_matrix(&mut rng, 24, 24);
        for keep in 0..3 {
            let red = partial_trace(&m, &[2, 3, 4], keep).unwrap();
            assert!((red.trace() - m.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn permutation_matches_kron_reordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 3, 3);
        let cm = random_matrix(&mut rng, 2, 2);
        let abc = kron(&kron(&a, &b), &cm);
        let cab = permute_subsystems(&abc, &[2, 3, 2], &[2, 0, 1]).unwrap();
        assert!(cab.max_abs_diff(&kron(&kron(&cm, &a), &b)) < 1e-15);
        assert!(permute_subsystems(&abc, &[2, 3, 2], &[0, 0, 1]).is_err());
    }
}
