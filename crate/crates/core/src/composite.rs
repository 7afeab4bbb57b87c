//! Composite parameterization of the unitary group U(d).
//!
//! A unitary is assembled from `d(d-1)/2` two-level factors
//! `Λ_{m,n} = exp(i P_n λ_{n,m}) exp(i σ_{m,n} λ_{m,n})` followed by `d`
//! diagonal phases `exp(i P_l λ_{l,l})`. All angles live in a d×d
//! [`ParamMatrix`]: the diagonal holds global phases, the upper triangle the
//! rotation angles and the lower triangle the relative phases.
//!
//! Basis labels in the public factor functions are 1-based (`|1⟩..|d⟩`);
//! array indexing (`ParamMatrix[(r, c)]`, [`ComplexMatrix`]) is 0-based.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Index, IndexMut};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, I, ONE, ZERO};

const TWO_PI: f64 = 2.0 * PI;

/// Accepted deviation `‖U†U − I‖_max` for externally supplied unitaries.
pub const UNITARY_INPUT_TOL: f64 = 1e-9;

/// Relative threshold below which `decompose` treats a coefficient as zero.
pub const ZERO_COEFF_TOL: f64 = 1e-12;

/// The d×d matrix of angles `λ_{m,n}`, stored row-major and indexed 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamMatrix {
    d: usize,
    lambda: Vec<f64>,
}

impl ParamMatrix {
    pub fn zeros(d: usize) -> Result<Self> {
        Self::from_vec(d, vec![0.0; d * d])
    }

    pub fn from_vec(d: usize, lambda: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {d}")));
        }
        if lambda.len() != d * d {
            return Err(Error::LengthMismatch {
                expected: d * d,
                actual: lambda.len(),
            });
        }
        Ok(Self { d, lambda })
    }

    /// Angles drawn uniformly from the canonical ranges: `[0, 2π)` on and
    /// below the diagonal, `[0, π/2]` above it.
    pub fn random(d: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut p = Self::zeros(d)?;
        for r in 0..d {
            for c in 0..d {
                p[(r, c)] = if r < c {
                    rng.gen_range(0.0..=FRAC_PI_2)
                } else {
                    rng.gen_range(0.0..TWO_PI)
                };
            }
        }
        Ok(p)
    }

    /// Matrix with the given values written at `positions` and zeros elsewhere.
    pub fn from_packed(d: usize, positions: &[(usize, usize)], values: &[f64]) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: positions.len(),
                actual: values.len(),
            });
        }
        let mut p = Self::zeros(d)?;
        for (&pos, &v) in positions.iter().zip(values) {
            p[pos] = v;
        }
        Ok(p)
    }

    pub fn pack(&self, positions: &[(usize, usize)]) -> Vec<f64> {
        positions.iter().map(|&pos| self[pos]).collect()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambda
    }

    /// Copy with the diagonal (global phase) entries set to zero.
    pub fn without_diagonal(&self) -> Self {
        let mut p = self.clone();
        for i in 0..self.d {
            p[(i, i)] = 0.0;
        }
        p
    }

    /// True when every angle lies in its canonical range.
    pub fn is_canonical(&self) -> bool {
        (0..self.d).all(|r| {
            (0..self.d).all(|c| {
                let x = self[(r, c)];
                if r < c {
                    (0.0..=FRAC_PI_2).contains(&x)
                } else {
                    (0.0..TWO_PI).contains(&x)
                }
            })
        })
    }
}

impl Index<(usize, usize)> for ParamMatrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        assert!(r < self.d && c < self.d, "parameter index out of range");
        &self.lambda[r * self.d + c]
    }
}

impl IndexMut<(usize, usize)> for ParamMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        assert!(r < self.d && c < self.d, "parameter index out of range");
        &mut self.lambda[r * self.d + c]
    }
}

/// A d×d unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(ComplexMatrix);

impl Unitary {
    /// Wraps `m` after checking `‖m†m − I‖_max ≤ 1e-9`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_INPUT_TOL)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NonSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let deviation = m.unitarity_deviation();
        if deviation.is_nan() || deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    pub fn identity(d: usize) -> Self {
        Self(ComplexMatrix::identity(d))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }
}

fn check_label(l: usize, d: usize) -> Result<()> {
    if l == 0 || l > d {
        return Err(Error::IndexOutOfRange { index: l, max: d });
    }
    Ok(())
}

fn check_pair(m: usize, n: usize, d: usize) -> Result<()> {
    check_label(m, d)?;
    check_label(n, d)?;
    if m >= n {
        return Err(Error::RequireMLessThanN { m, n });
    }
    Ok(())
}

/// One-dimensional projector `|l⟩⟨l|` (1-based label).
pub fn projector(l: usize, d: usize) -> Result<ComplexMatrix> {
    check_label(l, d)?;
    let mut p = ComplexMatrix::zeros(d, d);
    p[(l - 1, l - 1)] = ONE;
    Ok(p)
}

/// Generalized antisymmetric sigma matrix `−i|m⟩⟨n| + i|n⟩⟨m|` (1-based, m < n).
pub fn sigma(m: usize, n: usize, d: usize) -> Result<ComplexMatrix> {
    check_pair(m, n, d)?;
    let mut s = ComplexMatrix::zeros(d, d);
    s[(m - 1, n - 1)] = -I;
    s[(n - 1, m - 1)] = I;
    Ok(s)
}

/// Anything whose rows a two-level factor can act on.
pub trait FactorOperand {
    fn row_count(&self) -> usize;

    /// Replaces rows `(m, n)` (0-based) entrywise by `f(row_m, row_n)`.
    fn mix_rows(&mut self, m: usize, n: usize, f: impl Fn(C64, C64) -> (C64, C64));
}

impl FactorOperand for ComplexMatrix {
    fn row_count(&self) -> usize {
        self.rows()
    }

    fn mix_rows(&mut self, m: usize, n: usize, f: impl Fn(C64, C64) -> (C64, C64)) {
        let cols = self.cols();
        let data = self.data_mut();
        for c in 0..cols {
            let (a, b) = f(data[m * cols + c], data[n * cols + c]);
            data[m * cols + c] = a;
            data[n * cols + c] = b;
        }
    }
}

impl FactorOperand for Vec<C64> {
    fn row_count(&self) -> usize {
        self.len()
    }

    fn mix_rows(&mut self, m: usize, n: usize, f: impl Fn(C64, C64) -> (C64, C64)) {
        let (a, b) = f(self[m], self[n]);
        self[m] = a;
        self[n] = b;
    }
}

/// Which side of the factor to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorSide {
    /// `x ← Λ_{m,n} x`
    Left,
    /// `x ← Λ_{m,n}† x`
    LeftAdjoint,
}

/// Left-multiplies by `Λ_{m,n}` (or its adjoint) in closed form. On the
/// `(m, n)` plane the factor is `[[cos r, sin r], [−e^{iφ} sin r, e^{iφ} cos r]]`.
pub fn apply_factor<T: FactorOperand>(
    operand: &mut T,
    m: usize,
    n: usize,
    rot: f64,
    phase: f64,
    side: FactorSide,
) -> Result<()> {
    let d = operand.row_count();
    check_pair(m, n, d)?;
    apply_factor_raw(operand, m - 1, n - 1, rot, phase, side);
    Ok(())
}

#[inline]
fn apply_factor_raw<T: FactorOperand>(operand: &mut T, m: usize, n: usize, rot: f64, phase: f64, side: FactorSide) {
    let (s, c) = rot.sin_cos();
    let e = C64::from_polar(1.0, phase);
    match side {
        FactorSide::Left => operand.mix_rows(m, n, |a, b| (a * c + b * s, e * (b * c - a * s))),
        FactorSide::LeftAdjoint => {
            let ec = e.conj();
            operand.mix_rows(m, n, |a, b| (a * c - ec * b * s, a * s + ec * b * c))
        }
    }
}

/// Factor planes `(m, n)` (0-based) of the full product, in product order.
pub fn full_pairs(d: usize) -> Vec<(usize, usize)> {
    ucd_pairs(d, d)
}

/// Factor planes of the rank-k density form: `m < k`, `n > m`.
pub fn ucd_pairs(d: usize, k: usize) -> Vec<(usize, usize)> {
    (0..k.min(d)).flat_map(|m| (m + 1..d).map(move |n| (m, n))).collect()
}

/// Factor planes of the k-subspace form: `m < k ≤ n`.
pub fn ucs_pairs(d: usize, k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|m| (k..d).map(move |n| (m, n))).collect()
}

/// Parameter-matrix positions consumed by a list of factor planes, row-major.
pub fn positions_of(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut pos: Vec<(usize, usize)> = pairs.iter().flat_map(|&(m, n)| [(m, n), (n, m)]).collect();
    pos.sort_unstable();
    pos
}

/// `Λ_{p1} Λ_{p2} ⋯ Λ_{pN} · tail` for the given planes.
fn product_of_factors(p: &ParamMatrix, pairs: &[(usize, usize)], tail: ComplexMatrix) -> ComplexMatrix {
    let mut u = tail;
    for &(m, n) in pairs.iter().rev() {
        apply_factor_raw(&mut u, m, n, p[(m, n)], p[(n, m)], FactorSide::Left);
    }
    u
}

/// Full composite unitary: all two-level factors followed by the diagonal phases.
pub fn build_unitary(p: &ParamMatrix) -> Unitary {
    let d = p.dim();
    let mut diag = ComplexMatrix::zeros(d, d);
    for l in 0..d {
        diag[(l, l)] = C64::from_polar(1.0, p[(l, l)]);
    }
    Unitary(product_of_factors(p, &full_pairs(d), diag))
}

/// The product truncated to `m ≤ k` without diagonal phases; enough to
/// generate any rank-k density matrix.
pub fn build_ucd(p: &ParamMatrix, k: usize) -> Result<Unitary> {
    let d = p.dim();
    if k == 0 || k > d {
        return Err(Error::RankOutOfRange { k, d });
    }
    Ok(Unitary(product_of_factors(
        p,
        &ucd_pairs(d, k),
        ComplexMatrix::identity(d),
    )))
}

/// The product restricted to `m ≤ k < n`; its first k columns span an
/// arbitrary k-dimensional subspace.
pub fn build_ucs(p: &ParamMatrix, k: usize) -> Result<Unitary> {
    let d = p.dim();
    if k == 0 || k >= d {
        return Err(Error::RankOutOfRange { k, d });
    }
    Ok(Unitary(product_of_factors(
        p,
        &ucs_pairs(d, k),
        ComplexMatrix::identity(d),
    )))
}

/// Maps an angle into `[0, 2π)`.
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TWO_PI);
    if w >= TWO_PI {
        0.0
    } else {
        w
    }
}

/// Angles `(rot, phase)` of the factor whose adjoint zeroes `lower` against
/// `pivot`, following the degenerate-case conventions of the constructive
/// proof.
pub(crate) fn zeroing_angles(pivot: C64, lower: C64, scale: f64) -> (f64, f64) {
    let tol = ZERO_COEFF_TOL * scale;
    let pivot_zero = pivot.norm() <= tol;
    let lower_zero = lower.norm() <= tol;
    match (pivot_zero, lower_zero) {
        (_, true) => (0.0, 0.0),
        (true, false) => (FRAC_PI_2, 0.0),
        (false, false) => {
            let rot = lower.norm().atan2(pivot.norm());
            // arg(e^{-iφ} lower) = arg(-pivot)
            let phase = wrap_angle(lower.arg() - (-pivot).arg());
            (rot, phase)
        }
    }
}

/// Canonical parameters of a unitary, via the constructive sweep
/// `Λ†_{1,2}, Λ†_{1,3}, …, Λ†_{d−1,d}` that zeroes the strictly lower
/// triangle, followed by reading the phases off the remaining diagonal.
pub fn decompose(u: &Unitary) -> Result<ParamMatrix> {
    let d = u.dim();
    let mut p = ParamMatrix::zeros(d)?;
    let mut a = u.matrix().clone();
    for (m, n) in full_pairs(d) {
        let scale = (0..d).map(|r| a[(r, m)].norm_sqr()).sum::<f64>().sqrt();
        let (rot, phase) = zeroing_angles(a[(m, m)], a[(n, m)], scale);
        p[(m, n)] = rot;
        p[(n, m)] = phase;
        apply_factor_raw(&mut a, m, n, rot, phase, FactorSide::LeftAdjoint);
        a[(n, m)] = ZERO;
    }
    for l in 0..d {
        p[(l, l)] = wrap_angle(a[(l, l)].arg());
    }
    Ok(p)
}

/// Checks the input is unitary (1e-9) before decomposing.
pub fn decompose_matrix(m: &ComplexMatrix) -> Result<ParamMatrix> {
    decompose(&Unitary::new(m.clone())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::herm_eig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// exp(iH) through the eigendecomposition of H.
    fn expi(h: &ComplexMatrix) -> ComplexMatrix {
        let eig = herm_eig(h).unwrap();
        let v = &eig.eigenvectors;
        let n = v.rows();
        ComplexMatrix::from_fn(n, n, |r, col| {
            (0..n)
                .map(|k| v[(r, k)] * C64::from_polar(1.0, eig.eigenvalues[k]) * v[(col, k)].conj())
                .sum()
        })
    }

    #[test]
    fn projector_examples() {
        assert_eq!(projector(1, 2).unwrap(), ComplexMatrix::from_real_diag(&[1.0, 0.0]));
        assert_eq!(
            projector(3, 3).unwrap(),
            ComplexMatrix::from_real_diag(&[0.0, 0.0, 1.0])
        );
        for d in 1..=6 {
            for l in 1..=d {
                let p = projector(l, d).unwrap();
                assert_eq!(p.matmul(&p), p);
                assert_eq!(p.trace(), ONE);
            }
        }
        assert!(matches!(projector(0, 3), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(projector(4, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn sigma_examples() {
        let y = sigma(1, 2, 2).unwrap();
        assert_eq!(y, ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap());
        let s = sigma(1, 3, 3).unwrap();
        for r in 0..3 {
            for col in 0..3 {
                let want = match (r, col) {
                    (0, 2) => -I,
                    (2, 0) => I,
                    _ => ZERO,
                };
                assert_eq!(s[(r, col)], want);
            }
        }
        for d in 2..=6 {
            for m in 1..d {
                for n in m + 1..=d {
                    let s = sigma(m, n, d).unwrap();
                    assert_eq!(s.hermitian_deviation(), 0.0);
                    let pp = &projector(m, d).unwrap() + &projector(n, d).unwrap();
                    assert_eq!(s.matmul(&s), pp);
                }
            }
        }
        assert!(matches!(sigma(2, 1, 3), Err(Error::RequireMLessThanN { .. })));
        assert!(matches!(sigma(2, 2, 3), Err(Error::RequireMLessThanN { .. })));
        assert!(matches!(sigma(1, 4, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn factor_identity_and_rotation() {
        let mut m = ComplexMatrix::identity(3);
        apply_factor(&mut m, 1, 3, 0.0, 0.0, FactorSide::Left).unwrap();
        assert_eq!(m, ComplexMatrix::identity(3));

        let mut m = ComplexMatrix::identity(2);
        apply_factor(&mut m, 1, 2, FRAC_PI_2, 0.0, FactorSide::Left).unwrap();
        let want = ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, -ONE, ZERO]).unwrap();
        assert!(m.max_abs_diff(&want) < 1e-16);

        let mut v = vec![ONE, ZERO];
        assert!(apply_factor(&mut v, 1, 3, 0.1, 0.2, FactorSide::Left).is_err());
    }

    #[test]
    fn factor_adjoint_cancels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..=5 {
            let orig = ComplexMatrix::from_fn(d, 3, |_, _| c(rng.gen(), rng.gen()));
            for m in 1..d {
                for n in m + 1..=d {
                    let (r, ph) = (rng.gen_range(-7.0..7.0), rng.gen_range(-7.0..7.0));
                    let mut x = orig.clone();
                    apply_factor(&mut x, m, n, r, ph, FactorSide::Left).unwrap();
                    apply_factor(&mut x, m, n, r, ph, FactorSide::LeftAdjoint).unwrap();
                    assert!(x.max_abs_diff(&orig) < 1e-13);
                }
            }
        }
    }

    #[test]
    fn factor_matches_matrix_exponentials() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 2..=5 {
            for m in 1..d {
                for n in m + 1..=d {
                    let (r, ph) = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
                    let phase = expi(&projector(n, d).unwrap().scale(c(ph, 0.0)));
                    let rot = expi(&sigma(m, n, d).unwrap().scale(c(r, 0.0)));
                    let want = phase.matmul(&rot);
                    let mut got = ComplexMatrix::identity(d);
                    apply_factor(&mut got, m, n, r, ph, FactorSide::Left).unwrap();
                    assert!(got.max_abs_diff(&want) < 1e-12, "d={d} m={m} n={n}");
                    let mut got = ComplexMatrix::identity(d);
                    apply_factor(&mut got, m, n, r, ph, FactorSide::LeftAdjoint).unwrap();
                    assert!(got.max_abs_diff(&want.adjoint()) < 1e-12);
                }
            }
        }
    }

    /// Direct product of explicit exponentials, in the documented order.
    fn build_by_exponentials(p: &ParamMatrix) -> ComplexMatrix {
        let d = p.dim();
        let mut u = ComplexMatrix::identity(d);
        for (m, n) in full_pairs(d) {
            let ph = expi(&projector(n + 1, d).unwrap().scale(c(p[(n, m)], 0.0)));
            let rot = expi(&sigma(m + 1, n + 1, d).unwrap().scale(c(p[(m, n)], 0.0)));
            u = u.matmul(&ph).matmul(&rot);
        }
        for l in 0..d {
            u = u.matmul(&expi(&projector(l + 1, d).unwrap().scale(c(p[(l, l)], 0.0))));
        }
        u
    }

    #[test]
    fn build_matches_exponential_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=5 {
            let p = ParamMatrix::random(d, &mut rng).unwrap();
            let want = build_by_exponentials(&p);
            assert!(build_unitary(&p).matrix().max_abs_diff(&want) < 1e-12);
        }
    }

    #[test]
    fn build_examples() {
        for d in 2..=5 {
            let u = build_unitary(&ParamMatrix::zeros(d).unwrap());
            assert_eq!(u.matrix(), &ComplexMatrix::identity(d));
        }
        let mut p = ParamMatrix::zeros(2).unwrap();
        p[(0, 1)] = FRAC_PI_2;
        let want = ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, -ONE, ZERO]).unwrap();
        assert!(build_unitary(&p).matrix().max_abs_diff(&want) < 1e-16);

        let phi = 0.7;
        let mut p = ParamMatrix::zeros(2).unwrap();
        p[(0, 0)] = phi;
        let want = ComplexMatrix::from_vec(2, 2, vec![C64::from_polar(1.0, phi), ZERO, ZERO, ONE]).unwrap();
        assert!(build_unitary(&p).matrix().max_abs_diff(&want) < 1e-16);
    }

    #[test]
    fn build_is_unitary_for_arbitrary_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let d = rng.gen_range(2..=6);
            let vals = (0..d * d).map(|_| rng.gen_range(-20.0..20.0)).collect();
            let p = ParamMatrix::from_vec(d, vals).unwrap();
            assert!(build_unitary(&p).matrix().unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn ucd_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..=5 {
            let p = ParamMatrix::random(d, &mut rng).unwrap();
            let full = build_unitary(&p.without_diagonal());
            assert_eq!(build_ucd(&p, d - 1).unwrap(), full);
            assert_eq!(build_ucd(&p, d).unwrap(), full);
        }
        let p = ParamMatrix::random(3, &mut rng).unwrap();
        let u = build_ucd(&p, 1).unwrap();
        let mut q = p.clone();
        q[(1, 2)] += 0.3;
        q[(2, 1)] -= 1.1;
        assert_eq!(build_ucd(&q, 1).unwrap(), u);
        let mut m = ComplexMatrix::identity(3);
        apply_factor(&mut m, 1, 3, p[(0, 2)], p[(2, 0)], FactorSide::Left).unwrap();
        apply_factor(&mut m, 1, 2, p[(0, 1)], p[(1, 0)], FactorSide::Left).unwrap();
        assert!(u.matrix().max_abs_diff(&m) < 1e-15);
        assert!(u.matrix().unitarity_deviation() < 1e-12);
        assert!(matches!(build_ucd(&p, 0), Err(Error::RankOutOfRange { .. })));
        assert!(matches!(build_ucd(&p, 4), Err(Error::RankOutOfRange { .. })));
    }

    #[test]
    fn ucs_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert_eq!(
            build_ucs(&ParamMatrix::zeros(4).unwrap(), 2).unwrap(),
            Unitary::identity(4)
        );
        let p = ParamMatrix::random(2, &mut rng).unwrap();
        assert_eq!(build_ucs(&p, 1).unwrap(), build_ucd(&p, 1).unwrap());
        let p = ParamMatrix::random(5, &mut rng).unwrap();
        let u = build_ucs(&p, 3).unwrap();
        assert!(u.matrix().unitarity_deviation() < 1e-12);
        for m in 0..3 {
            for n in 0..3 {
                let mut q = p.clone();
                q[(m, n)] += 0.5;
                assert_eq!(build_ucs(&q, 3).unwrap(), u);
            }
        }
        assert!(matches!(build_ucs(&p, 5), Err(Error::RankOutOfRange { .. })));
    }

    #[test]
    fn decompose_examples() {
        for d in 2..=5 {
            let p = decompose(&Unitary::identity(d)).unwrap();
            assert!(p.as_slice().iter().all(|&x| x == 0.0));
        }
        let u = Unitary::new(ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, -ONE, ZERO]).unwrap()).unwrap();
        let p = decompose(&u).unwrap();
        assert!((p[(0, 1)] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(p[(1, 0)], 0.0);
        assert!(p[(0, 0)].abs() < 1e-15 && p[(1, 1)].abs() < 1e-15);
    }

    #[test]
    fn decompose_rejects_non_unitary() {
        let m = ComplexMatrix::from_real_diag(&[1.0, 0.5]);
        assert!(matches!(decompose_matrix(&m), Err(Error::NotUnitary { .. })));
        assert!(matches!(
            decompose_matrix(&ComplexMatrix::zeros(2, 3)),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn decompose_round_trip_and_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let d = rng.gen_range(2..=6);
            let u = build_unitary(&ParamMatrix::random(d, &mut rng).unwrap());
            let p = decompose(&u).unwrap();
            assert!(p.is_canonical());
            assert!(build_unitary(&p).matrix().max_abs_diff(u.matrix()) < 1e-10);
        }
    }

    #[test]
    fn decompose_handles_permutations_and_phases() {
        // Permutation matrices with phases hit every degenerate branch.
        let perms: [[usize; 4]; 4] = [[1, 0, 3, 2], [3, 2, 1, 0], [2, 3, 0, 1], [0, 3, 1, 2]];
        for (i, perm) in perms.iter().enumerate() {
            let mut m = ComplexMatrix::zeros(4, 4);
            for (col, &row) in perm.iter().enumerate() {
                m[(row, col)] = C64::from_polar(1.0, 0.4 * (i + col) as f64 - 1.0);
            }
            let p = decompose_matrix(&m).unwrap();
            assert!(p.is_canonical());
            assert!(build_unitary(&p).matrix().max_abs_diff(&m) < 1e-12);
        }
    }
}
