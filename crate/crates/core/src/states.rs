//! Rank-k density matrices and k-dimensional subspaces built from the
//! composite parameterization.
//!
//! A rank-k state needs `k − 1` simplex angles plus the `k(2d − k − 1)`
//! angles of the truncated product; a k-dimensional subspace needs only the
//! `2k(d − k)` angles of the off-block factors.

use rand::Rng;

use crate::composite::{self, build_ucd, build_ucs, ucs_pairs, FactorSide, ParamMatrix, UNITARY_INPUT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{herm_eigvals, ComplexMatrix, C64, ONE, ZERO};

/// Eigenvalues above this count towards the numerical rank.
pub const RANK_TOL: f64 = 1e-9;

/// Tolerances applied to density matrices built by this crate.
pub const STATE_TOL: f64 = 1e-12;

/// Smallest eigenvalue tolerated in a density matrix.
pub const PSD_TOL: f64 = 1e-10;

/// Probability vector from `k − 1` nested angles:
/// `p₁ = cos²θ₁`, `p_n = cos²θ_n ∏_{i<n} sin²θ_i`, `p_k = ∏ sin²θ_i`.
pub fn simplex_weights(theta: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 || theta.len() + 1 != k {
        return Err(Error::LengthMismatch {
            expected: k.saturating_sub(1),
            actual: theta.len(),
        });
    }
    let mut p = Vec::with_capacity(k);
    let mut remaining = 1.0;
    for &t in theta {
        let (s, c) = t.sin_cos();
        p.push(remaining * c * c);
        remaining *= s * s;
    }
    p.push(remaining);
    Ok(p)
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    /// Requires `|‖v‖ − 1| ≤ 1e-12`.
    pub fn new(v: Vec<C64>) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NormError { norm });
        }
        Ok(Self(v))
    }

    /// Rescales `v` to unit norm.
    pub fn normalized(v: Vec<C64>) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NormError { norm });
        }
        Ok(Self(v.into_iter().map(|z| z / norm).collect()))
    }

    /// Computational basis vector (0-based index).
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                index: index + 1,
                max: dim,
            });
        }
        let mut v = vec![ZERO; dim];
        v[index] = ONE;
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self(crate::linalg::kron_vec(&self.0, &other.0))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.0, &self.0),
            rank_bound: 1,
        }
    }
}

/// A density matrix together with a declared upper bound on its rank.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    rank_bound: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace within `tol` and a minimum
    /// eigenvalue of at least `−max(tol, 1e-10)`. The stored matrix is the
    /// Hermitian part rescaled to unit trace.
    pub fn new(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NonSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let deviation = m.hermitian_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = m.trace().re;
        if (trace - 1.0).abs() > tol {
            return Err(Error::TraceError { trace });
        }
        let h = m.hermitian_part().scale(C64::new(1.0 / trace, 0.0));
        let w = herm_eigvals(&h)?;
        let min = w.first().copied().unwrap_or(0.0);
        if min < -tol.max(PSD_TOL) {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        let rank_bound = h.rows();
        Ok(Self { matrix: h, rank_bound })
    }

    /// Convex mixture `Σ w_i ρ_i` of equally sized states.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let n = first.1.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (w, rho) in parts {
            if rho.dim() != n {
                return Err(Error::DimensionMismatch("mixture of different dimensions".into()));
            }
            m = &m + &rho.matrix.scale(C64::new(*w, 0.0));
        }
        Self::new(m, 1e-10)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)),
            rank_bound: d,
        }
    }

    /// Wraps a matrix produced by an exact construction, skipping validation.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, rank_bound: usize) -> Self {
        Self { matrix, rank_bound }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn rank_bound(&self) -> usize {
        self.rank_bound
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        herm_eigvals(&self.matrix)
    }

    pub fn numerical_rank(&self) -> Result<usize> {
        Ok(self.eigenvalues()?.iter().filter(|&&w| w > RANK_TOL).count())
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.data().iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `ρ = Σ p_n U_CD|n⟩⟨n|U_CD†` for `n = 1..k`, with `p` from
/// [`simplex_weights`]. Diagonal angles and every `λ_{m,n}` with both indices
/// above k are never read.
pub fn build_density(theta: &[f64], p: &ParamMatrix, k: usize) -> Result<DensityMatrix> {
    let d = p.dim();
    if k == 0 || k > d {
        return Err(Error::RankOutOfRange { k, d });
    }
    let weights = simplex_weights(theta, k)?;
    let u = build_ucd(p, k)?;
    let u = u.matrix();
    let mut rho = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        for c in r..d {
            let z: C64 = (0..k).map(|n| u[(r, n)] * u[(c, n)].conj() * weights[n]).sum();
            rho[(r, c)] = z;
            rho[(c, r)] = z.conj();
        }
    }
    Ok(DensityMatrix::from_trusted(rho, k))
}

/// A random rank-≤k state: uniform simplex angles in `[0, π/2]` and a
/// uniformly drawn parameter matrix. Not Haar distributed.
pub fn random_density(d: usize, k: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let theta: Vec<f64> = (0..k.saturating_sub(1))
        .map(|_| rng.gen_range(0.0..=std::f64::consts::FRAC_PI_2))
        .collect();
    let p = ParamMatrix::random(d, rng)?;
    build_density(&theta, &p, k)
}

/// Orthonormal basis of a k-dimensional subspace, stored as d×k columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    columns: ComplexMatrix,
}

impl SubspaceBasis {
    /// Requires orthonormal columns within `1e-9` and `1 ≤ k < d`.
    pub fn new(columns: ComplexMatrix) -> Result<Self> {
        let (d, k) = (columns.rows(), columns.cols());
        if k == 0 || k >= d {
            return Err(Error::RankOutOfRange { k, d });
        }
        let deviation = columns.unitarity_deviation();
        if deviation.is_nan() || deviation > UNITARY_INPUT_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &ComplexMatrix {
        &self.columns
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.rows()
    }

    pub fn dim(&self) -> usize {
        self.columns.cols()
    }

    /// Orthogonal projector `V V†` onto the span.
    pub fn projector(&self) -> ComplexMatrix {
        self.columns.matmul(&self.columns.adjoint())
    }
}

/// First k columns of `U_CS(p, k)`.
pub fn subspace_basis(p: &ParamMatrix, k: usize) -> Result<SubspaceBasis> {
    let u = build_ucs(p, k)?;
    Ok(SubspaceBasis {
        columns: u.matrix().leading_columns(k),
    })
}

/// Column mix `[ψ_a, ψ_b] ← [ψ_a, ψ_b]·[[c, s], [−e^{iφ}s, e^{iφ}c]]`.
fn mix_columns(m: &mut ComplexMatrix, a: usize, b: usize, rot: f64, phase: f64) {
    let (s, c) = rot.sin_cos();
    let e = C64::from_polar(1.0, phase);
    for r in 0..m.rows() {
        let (x, y) = (m[(r, a)], m[(r, b)]);
        m[(r, a)] = x * c - e * s * y;
        m[(r, b)] = x * s + e * c * y;
    }
}

/// Canonical off-block parameters of a subspace.
///
/// Returns `λ` populated only at the `2k(d − k)` subspace positions and the
/// k×k unitary `W` with `subspace_basis(λ, k) · W = v`. First, rotations
/// inside the subspace make the top k×k block upper triangular (row k, then
/// row k−1, …); then the adjoint off-block factors are peeled off in product
/// order, leaving a diagonal of phases.
pub fn canonicalize_subspace(v: &SubspaceBasis) -> Result<(ParamMatrix, ComplexMatrix)> {
    let (d, k) = (v.ambient_dim(), v.dim());
    let mut a = v.columns().clone();
    // a = v · G, tracked as g = G.
    let mut g = ComplexMatrix::identity(k);
    for row in (1..k).rev() {
        for col in 0..row {
            let target = a[(row, col)];
            let pivot = a[(row, row)];
            let tol = composite::ZERO_COEFF_TOL;
            let (rot, phase) = if target.norm() <= tol {
                (0.0, 0.0)
            } else if pivot.norm() <= tol {
                (std::f64::consts::FRAC_PI_2, 0.0)
            } else {
                (
                    target.norm().atan2(pivot.norm()),
                    composite::wrap_angle(target.arg() - pivot.arg()),
                )
            };
            mix_columns(&mut a, col, row, rot, phase);
            mix_columns(&mut g, col, row, rot, phase);
            a[(row, col)] = ZERO;
        }
    }

    let mut p = ParamMatrix::zeros(d)?;
    for (m, n) in ucs_pairs(d, k) {
        let scale = (0..d).map(|r| a[(r, m)].norm_sqr()).sum::<f64>().sqrt();
        let (rot, phase) = composite::zeroing_angles(a[(m, m)], a[(n, m)], scale);
        p[(m, n)] = rot;
        p[(n, m)] = phase;
        composite::apply_factor(&mut a, m + 1, n + 1, rot, phase, FactorSide::LeftAdjoint)?;
        a[(n, m)] = ZERO;
    }
    // Now a ≈ diag(phases) on top: v = B · Φ · G†.
    let phases = ComplexMatrix::from_fn(k, k, |r, c| if r == c { a[(r, r)] } else { ZERO });
    let w = phases.matmul(&g.adjoint());
    Ok((p, w))
}
