//! m-concurrence lower bounds, their optimization objectives, and the
//! supporting PPT and bipartition machinery.
//!
//! For a bipartite state ρ on `C^{dA} ⊗ C^{dB}` and sigma pairs
//! `(kA, lA)`, `(kB, lB)`, the term `X = max(2·max x^i − Σ x^i, 0)` uses the
//! square roots `x^i` of the eigenvalues of
//! `ρ (UA†σUA*)⊗(UB†σUB*) ρ* (UAᵀσUA)⊗(UBᵀσUB)`.
//!
//! Writing `M = (UA†σ_{kA,lA}UA*)⊗(UB†σ_{kB,lB}UB*)` one finds `M = Q Y Qᵀ`
//! with `Q = [u_k, u_l] ⊗ [v_k, v_l]` (isometry, d×4), `u_j = UA†|j⟩`,
//! `v_j = UB†|j⟩` and `Y = σ_y ⊗ σ_y`; the second sigma product equals `M†`.
//! With `ρ = L L†` the nonzero eigenvalues of `ρ M ρ* M†` are the squared
//! singular values of `T = (L†Q) Y (L†Q)ᵀ`, and with the thin QR
//! `L†Q = Q_h R` those of the (at most) 4×4 matrix `R Y Rᵀ`. That is the
//! route used below; it never forms the non-Hermitian product.

use crate::composite::{build_ucs, build_unitary, positions_of, ucs_pairs, ParamMatrix, Unitary};
use crate::error::{Error, Result};
use crate::linalg::{
    herm_eig, herm_eigvals, kron, partial_trace, partial_transpose, permute_subsystems, qr_r_factor, singular_values,
    ComplexMatrix, C64, ZERO,
};
use crate::states::{DensityMatrix, StateVector};

/// Eigenvalues of ρ at or below this are dropped from the factor `ρ = L L†`.
pub const FACTOR_RANK_TOL: f64 = 1e-13;

/// A partial transpose with a minimum eigenvalue below `−NPT_TOL` is NPT.
pub const NPT_TOL: f64 = 1e-10;

/// Default cap on the total dimension produced by [`n_copy_state`].
pub const DEFAULT_DIM_CAP: usize = 256;

/// `S_L(ρ) = d/(d−1)·(1 − Tr ρ²)`, clamped into `[0, 1]`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    let d = rho.dim() as f64;
    if rho.dim() < 2 {
        return 0.0;
    }
    (d / (d - 1.0) * (1.0 - rho.purity())).clamp(0.0, 1.0)
}

fn check_bipartite(total: usize, da: usize, db: usize) -> Result<()> {
    if da < 2 || db < 2 || da * db != total {
        return Err(Error::DimensionMismatch(format!(
            "local dims {da}x{db} do not factor dimension {total}"
        )));
    }
    Ok(())
}

/// Squared m-concurrence of a pure state, `2(d−1)/d · S_L(Tr_B |ψ⟩⟨ψ|)`.
///
/// This equals `2(1 − Tr ρ_A²)`, which is also how unequal local
/// dimensions are handled.
pub fn pure_m_concurrence_sq(psi: &StateVector, da: usize, db: usize) -> Result<f64> {
    check_bipartite(psi.dim(), da, db)?;
    let norm = psi.amplitudes().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NormError { norm });
    }
    let reduced = partial_trace(psi.density().matrix(), &[da, db], 0)?;
    let purity: f64 = reduced.data().iter().map(|z| z.norm_sqr()).sum();
    Ok((2.0 * (1.0 - purity)).max(0.0))
}

/// `C_m` of a maximally entangled state in `C^d ⊗ C^d`: `sqrt(2(d−1)/d)`.
pub fn max_entangled_norm(d: usize) -> f64 {
    (2.0 * (d as f64 - 1.0) / d as f64).sqrt()
}

/// `2·max x − Σ x`, before clamping at zero.
fn margin(x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(0.0, f64::max);
    let sum: f64 = x.iter().sum();
    2.0 * max - sum
}

/// `X = max(2·max x − Σ x, 0)`.
fn x_from_values(x: &[f64]) -> f64 {
    margin(x).max(0.0)
}

/// Search surrogate on margins shifted by `relax ≥ 0`: `−Σ max(m + relax, 0)²`
/// when some shifted margin is positive, otherwise `−max(m + relax)`.
/// Continuous; for `relax = 0` it equals `−B²` wherever `B > 0` and still
/// has a slope on the `B = 0` plateau. A positive `relax` also credits
/// terms that are close to turning positive.
fn guided(margins: impl Iterator<Item = f64> + Clone, relax: f64) -> f64 {
    let b2: f64 = margins.clone().map(|m| (m + relax).max(0.0).powi(2)).sum();
    if b2 > 0.0 {
        -b2
    } else {
        -margins.fold(f64::NEG_INFINITY, f64::max) - relax
    }
}

/// A state prepared for repeated bound evaluations: the factor `ρ = L L†`
/// is stored as the rows of `L†`, each reshaped to a dA×dB block.
#[derive(Debug, Clone)]
pub struct BoundEvaluator {
    da: usize,
    db: usize,
    factor_rows: Vec<Vec<C64>>,
}

impl BoundEvaluator {
    pub fn new(rho: &DensityMatrix, da: usize, db: usize) -> Result<Self> {
        check_bipartite(rho.dim(), da, db)?;
        let eig = herm_eig(rho.matrix())?;
        let v = &eig.eigenvectors;
        let n = rho.dim();
        let factor_rows = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > FACTOR_RANK_TOL)
            .map(|(j, &w)| {
                let s = w.sqrt();
                (0..n).map(|x| v[(x, j)].conj() * s).collect()
            })
            .collect();
        Ok(Self { da, db, factor_rows })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.da, self.db)
    }

    /// Numerical rank of the stored factor.
    pub fn rank(&self) -> usize {
        self.factor_rows.len()
    }

    /// Square roots `x^i` (descending) for the local frame vectors
    /// `a = (u_k, u_l)` on A and `b = (v_k, v_l)` on B.
    pub fn x_values(&self, a: (&[C64], &[C64]), b: (&[C64], &[C64])) -> Result<Vec<f64>> {
        match self.tau(a, b) {
            Some(tau) => singular_values(&tau),
            None => Ok(Vec::new()),
        }
    }

    /// Like [`Self::x_values`], but through the eigenvalues of `τ†τ`. Cheaper,
    /// with absolute error near `1e-8` on values close to zero; meant for
    /// driving searches, not for reporting.
    pub fn x_values_fast(&self, a: (&[C64], &[C64]), b: (&[C64], &[C64])) -> Result<Vec<f64>> {
        let Some(tau) = self.tau(a, b) else {
            return Ok(Vec::new());
        };
        let mut x: Vec<f64> = herm_eigvals(&tau.adjoint().matmul(&tau))?
            .into_iter()
            .map(|w| w.max(0.0).sqrt())
            .collect();
        x.reverse();
        Ok(x)
    }

    /// The at most 4×4 matrix `τ = R Y Rᵀ` whose singular values are the `x^i`.
    fn tau(&self, a: (&[C64], &[C64]), b: (&[C64], &[C64])) -> Option<ComplexMatrix> {
        let (da, db) = (self.da, self.db);
        let r = self.factor_rows.len();
        if r == 0 {
            return None;
        }
        let a_vecs = [a.0, a.1];
        let b_vecs = [b.0, b.1];
        // h = L† Q with Q columns ordered (kk, kl, lk, ll).
        let mut h = ComplexMatrix::zeros(r, 4);
        let mut tmp = [ZERO; 2];
        for (i, row) in self.factor_rows.iter().enumerate() {
            for (ia, av) in a_vecs.iter().enumerate() {
                for t in tmp.iter_mut() {
                    *t = ZERO;
                }
                for (x, &ax) in av.iter().enumerate() {
                    if ax == ZERO {
                        continue;
                    }
                    let block = &row[x * db..(x + 1) * db];
                    for (t, bv) in tmp.iter_mut().zip(b_vecs.iter()) {
                        let s: C64 = block.iter().zip(bv.iter()).map(|(l, bz)| l * bz).sum();
                        *t += ax * s;
                    }
                }
                h[(i, 2 * ia)] = tmp[0];
                h[(i, 2 * ia + 1)] = tmp[1];
            }
        }
        debug_assert_eq!(da * db, self.factor_rows[0].len());
        let rf = qr_r_factor(&h);
        // tau = R Y Rᵀ with Y = σ_y ⊗ σ_y = antidiag(−1, 1, 1, −1).
        let s = rf.rows();
        let ry = ComplexMatrix::from_fn(s, 4, |i, j| match j {
            0 => -rf[(i, 3)],
            1 => rf[(i, 2)],
            2 => rf[(i, 1)],
            _ => -rf[(i, 0)],
        });
        Some(ComplexMatrix::from_fn(s, s, |i, j| {
            (0..4).map(|c| ry[(i, c)] * rf[(j, c)]).sum()
        }))
    }
}

/// One term of the bound, with 1-based sigma labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerm {
    pub ka: usize,
    pub la: usize,
    pub kb: usize,
    pub lb: usize,
    pub x: f64,
    /// `2·max x − Σ x` before clamping; `x = max(margin, 0)`.
    pub margin: f64,
}

/// All `X` terms and `B = sqrt(Σ X²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub terms: Vec<BoundTerm>,
    pub bound_sq: f64,
    pub bound: f64,
    /// `C_m` of a maximally entangled state of the smaller local dimension.
    pub normalization: f64,
}

impl BoundReport {
    fn from_terms(terms: Vec<BoundTerm>, normalization: f64) -> Self {
        let bound_sq: f64 = terms.iter().map(|t| t.x * t.x).sum();
        Self {
            terms,
            bound_sq,
            bound: bound_sq.sqrt(),
            normalization,
        }
    }

    /// `B / C_m(max entangled)`.
    pub fn normalized(&self) -> f64 {
        self.bound / self.normalization
    }
}

/// Column `j` of `U†`, i.e. `U†|j⟩` (0-based).
fn adjoint_column(u: &Unitary, j: usize) -> Vec<C64> {
    u.matrix().row(j).iter().map(|z| z.conj()).collect()
}

fn sigma_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|k| (k + 1..d).map(move |l| (k, l))).collect()
}

fn check_sigma(k: usize, l: usize, d: usize) -> Result<()> {
    if k == 0 || l > d {
        return Err(Error::IndexOutOfRange {
            index: if k == 0 { k } else { l },
            max: d,
        });
    }
    if k >= l {
        return Err(Error::RequireMLessThanN { m: k, n: l });
    }
    Ok(())
}

/// A single term `X_{kA,lA,kB,lB}` (1-based labels) with local unitaries.
#[allow(clippy::too_many_arguments)]
pub fn bound_x(
    rho: &DensityMatrix,
    ka: usize,
    la: usize,
    kb: usize,
    lb: usize,
    ua: &Unitary,
    ub: &Unitary,
) -> Result<f64> {
    let (da, db) = (ua.dim(), ub.dim());
    check_sigma(ka, la, da)?;
    check_sigma(kb, lb, db)?;
    let eval = BoundEvaluator::new(rho, da, db)?;
    let a = (adjoint_column(ua, ka - 1), adjoint_column(ua, la - 1));
    let b = (adjoint_column(ub, kb - 1), adjoint_column(ub, lb - 1));
    Ok(x_from_values(&eval.x_values((&a.0, &a.1), (&b.0, &b.1))?))
}

/// All terms of the bound for local frames given as the columns
/// `frame_a[j] = UA†|j⟩`, `frame_b[j] = UB†|j⟩`.
fn bound_terms(
    eval: &BoundEvaluator,
    frame_a: &[Vec<C64>],
    frame_b: &[Vec<C64>],
    precise: bool,
) -> Result<Vec<BoundTerm>> {
    let pairs_b = sigma_pairs(frame_b.len());
    let mut terms = Vec::with_capacity(pairs_b.len() * frame_a.len() * frame_a.len() / 2);
    for (ka, la) in sigma_pairs(frame_a.len()) {
        for &(kb, lb) in &pairs_b {
            let (a, b) = (
                (&frame_a[ka][..], &frame_a[la][..]),
                (&frame_b[kb][..], &frame_b[lb][..]),
            );
            let x = if precise {
                eval.x_values(a, b)?
            } else {
                eval.x_values_fast(a, b)?
            };
            let m = margin(&x);
            terms.push(BoundTerm {
                ka: ka + 1,
                la: la + 1,
                kb: kb + 1,
                lb: lb + 1,
                x: m.max(0.0),
                margin: m,
            });
        }
    }
    Ok(terms)
}

fn normalization_for(da: usize, db: usize) -> f64 {
    max_entangled_norm(da.min(db))
}

/// `B(ρ)` with local unitaries `UA`, `UB`: all `dA(dA−1)/2 · dB(dB−1)/2` terms.
pub fn bound_b(rho: &DensityMatrix, ua: &Unitary, ub: &Unitary) -> Result<BoundReport> {
    let eval = BoundEvaluator::new(rho, ua.dim(), ub.dim())?;
    let fa: Vec<_> = (0..ua.dim()).map(|j| adjoint_column(ua, j)).collect();
    let fb: Vec<_> = (0..ub.dim()).map(|j| adjoint_column(ub, j)).collect();
    let terms = bound_terms(&eval, &fa, &fb, true)?;
    Ok(BoundReport::from_terms(terms, normalization_for(ua.dim(), ub.dim())))
}

/// `B(ρ)` with identity local unitaries.
pub fn bound_b_plain(rho: &DensityMatrix, da: usize, db: usize) -> Result<BoundReport> {
    bound_b(rho, &Unitary::identity(da), &Unitary::identity(db))
}

/// The same bound evaluated by rotating the state instead of the sigma
/// matrices: `B((UA⊗UB) ρ (UA⊗UB)†)` with identity frames.
pub fn bound_b_rotated_state(rho: &DensityMatrix, ua: &Unitary, ub: &Unitary) -> Result<BoundReport> {
    let u = kron(ua.matrix(), ub.matrix());
    let rotated = u.matmul(rho.matrix()).matmul(&u.adjoint());
    let rotated = DensityMatrix::new(rotated.hermitian_part(), 1e-9)?;
    bound_b_plain(&rotated, ua.dim(), ub.dim())
}

/// Row-major off-diagonal positions of a d×d parameter matrix; the packing
/// order of [`bopt_objective`] parameter vectors.
pub fn offdiag_positions(d: usize) -> Vec<(usize, usize)> {
    (0..d)
        .flat_map(|r| (0..d).filter(move |&c| c != r).map(move |c| (r, c)))
        .collect()
}

/// Row-major positions of the two-dimensional subspace factors (`k = 2`);
/// the packing order of [`distill_objective`] parameter vectors.
pub fn distill_positions(d: usize) -> Vec<(usize, usize)> {
    if d <= 2 {
        return Vec::new();
    }
    positions_of(&ucs_pairs(d, 2))
}

/// Columns of the composite unitary built from packed off-diagonal angles.
fn frame_from_offdiag(d: usize, params: &[f64]) -> Result<Vec<Vec<C64>>> {
    let pos = offdiag_positions(d);
    let p = ParamMatrix::from_packed(d, &pos, params)?;
    let u = build_unitary(&p);
    Ok((0..d).map(|j| u.matrix().column(j)).collect())
}

/// First two columns of the subspace unitary built from packed angles.
fn frame_from_distill(d: usize, params: &[f64]) -> Result<Vec<Vec<C64>>> {
    let pos = distill_positions(d);
    if params.len() != pos.len() {
        return Err(Error::LengthMismatch {
            expected: pos.len(),
            actual: params.len(),
        });
    }
    if d == 2 {
        let id = ComplexMatrix::identity(2);
        return Ok(vec![id.column(0), id.column(1)]);
    }
    let p = ParamMatrix::from_packed(d, &pos, params)?;
    let u = build_ucs(&p, 2)?;
    Ok(vec![u.matrix().column(0), u.matrix().column(1)])
}

/// The optimal-bound objective: `−B²` with `UA† = U_C(paramsA)`,
/// `UB† = U_C(paramsB)` built without diagonal phases. Parameter vectors
/// hold the `d² − d` off-diagonal angles in [`offdiag_positions`] order.
#[derive(Debug, Clone)]
pub struct BoptObjective {
    eval: BoundEvaluator,
}

impl BoptObjective {
    pub fn new(rho: &DensityMatrix, da: usize, db: usize) -> Result<Self> {
        Ok(Self {
            eval: BoundEvaluator::new(rho, da, db)?,
        })
    }

    /// Lengths of the A and B parameter blocks.
    pub fn param_lens(&self) -> (usize, usize) {
        let (da, db) = self.eval.dims();
        (da * da - da, db * db - db)
    }

    pub fn dim(&self) -> usize {
        let (a, b) = self.param_lens();
        a + b
    }

    pub fn report(&self, params_a: &[f64], params_b: &[f64]) -> Result<BoundReport> {
        let (da, db) = self.eval.dims();
        let (la, lb) = self.param_lens();
        if params_a.len() != la || params_b.len() != lb {
            return Err(Error::LengthMismatch {
                expected: la + lb,
                actual: params_a.len() + params_b.len(),
            });
        }
        let fa = frame_from_offdiag(da, params_a)?;
        let fb = frame_from_offdiag(db, params_b)?;
        let terms = bound_terms(&self.eval, &fa, &fb, true)?;
        Ok(BoundReport::from_terms(terms, normalization_for(da, db)))
    }

    pub fn value(&self, params_a: &[f64], params_b: &[f64]) -> Result<f64> {
        Ok(-self.report(params_a, params_b)?.bound_sq)
    }

    /// Objective on the concatenated vector `[paramsA, paramsB]`.
    pub fn value_joint(&self, params: &[f64]) -> Result<f64> {
        let (a, b) = split_joint(params, self.param_lens())?;
        self.value(a, b)
    }

    /// Search surrogate on the concatenated vector, with margins shifted by
    /// `relax`. For `relax = 0` it agrees with [`Self::value_joint`] (up to
    /// the fast singular-value path) wherever that is negative, and stays
    /// informative where the bound is zero.
    pub fn search_value(&self, params: &[f64], relax: f64) -> Result<f64> {
        let (a, b) = split_joint(params, self.param_lens())?;
        let (da, db) = self.eval.dims();
        let fa = frame_from_offdiag(da, a)?;
        let fb = frame_from_offdiag(db, b)?;
        let terms = bound_terms(&self.eval, &fa, &fb, false)?;
        Ok(guided(terms.iter().map(|t| t.margin), relax))
    }
}

fn split_joint(params: &[f64], (la, lb): (usize, usize)) -> Result<(&[f64], &[f64])> {
    if params.len() != la + lb {
        return Err(Error::LengthMismatch {
            expected: la + lb,
            actual: params.len(),
        });
    }
    Ok(params.split_at(la))
}

/// `−B²(ρ; UA, UB)` for packed off-diagonal parameter vectors.
pub fn bopt_objective(rho: &DensityMatrix, da: usize, db: usize, params_a: &[f64], params_b: &[f64]) -> Result<f64> {
    BoptObjective::new(rho, da, db)?.value(params_a, params_b)
}

/// The distillability objective: `−X²_{1,2,1,2}` with `UA† = U_CS(paramsA, 2)`
/// and `UB† = U_CS(paramsB, 2)`. Each block holds `4d − 8` angles in
/// [`distill_positions`] order (empty for `d = 2`).
#[derive(Debug, Clone)]
pub struct DistillObjective {
    eval: BoundEvaluator,
}

impl DistillObjective {
    pub fn new(rho: &DensityMatrix, da: usize, db: usize) -> Result<Self> {
        Ok(Self {
            eval: BoundEvaluator::new(rho, da, db)?,
        })
    }

    pub fn param_lens(&self) -> (usize, usize) {
        let (da, db) = self.eval.dims();
        (distill_positions(da).len(), distill_positions(db).len())
    }

    pub fn dim(&self) -> usize {
        let (a, b) = self.param_lens();
        a + b
    }

    fn margin(&self, params_a: &[f64], params_b: &[f64]) -> Result<f64> {
        let (da, db) = self.eval.dims();
        let fa = frame_from_distill(da, params_a)?;
        let fb = frame_from_distill(db, params_b)?;
        let x = self.eval.x_values((&fa[0], &fa[1]), (&fb[0], &fb[1]))?;
        Ok(margin(&x))
    }

    /// `X_{1,2,1,2}` for the given parameters.
    pub fn x(&self, params_a: &[f64], params_b: &[f64]) -> Result<f64> {
        Ok(self.margin(params_a, params_b)?.max(0.0))
    }

    pub fn value(&self, params_a: &[f64], params_b: &[f64]) -> Result<f64> {
        let x = self.x(params_a, params_b)?;
        Ok(-x * x)
    }

    pub fn value_joint(&self, params: &[f64]) -> Result<f64> {
        let (a, b) = split_joint(params, self.param_lens())?;
        self.value(a, b)
    }

    /// `−X²` where `X > 0`, otherwise `−margin`; see [`BoptObjective::search_value`].
    pub fn search_value(&self, params: &[f64]) -> Result<f64> {
        let (a, b) = split_joint(params, self.param_lens())?;
        Ok(guided(std::iter::once(self.margin(a, b)?), 0.0))
    }
}

pub fn distill_objective(rho: &DensityMatrix, da: usize, db: usize, params_a: &[f64], params_b: &[f64]) -> Result<f64> {
    DistillObjective::new(rho, da, db)?.value(params_a, params_b)
}

/// Smallest eigenvalue of the partial transpose on subsystem `which` (0-based).
pub fn ppt_min_eigenvalue(rho: &DensityMatrix, dims: &[usize], which: usize) -> Result<f64> {
    let pt = partial_transpose(rho.matrix(), dims, which)?;
    Ok(herm_eigvals(&pt)?[0])
}

/// True when the partial transpose has an eigenvalue below `−1e-10`.
pub fn is_npt(rho: &DensityMatrix, dims: &[usize], which: usize) -> Result<bool> {
    Ok(ppt_min_eigenvalue(rho, dims, which)? < -NPT_TOL)
}

/// A split `(α|β)` of `n` subsystems (0-based indices, ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub d_alpha: usize,
    pub d_beta: usize,
}

impl Bipartition {
    /// Subsystem order placing α before β.
    pub fn order(&self) -> Vec<usize> {
        self.alpha.iter().chain(&self.beta).copied().collect()
    }

    pub fn n(&self) -> usize {
        self.alpha.len() + self.beta.len()
    }
}

/// All `2^{n−1} − 1` unordered bipartitions. Subsystem 0 is always in α;
/// the order follows the α bitmask.
pub fn enumerate_bipartitions(dims: &[usize]) -> Result<Vec<Bipartition>> {
    let n = dims.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two subsystems".into()));
    }
    if n > 20 {
        return Err(Error::InvalidArgument("too many subsystems".into()));
    }
    let full = (1usize << n) - 1;
    Ok((0..full)
        .filter(|mask| mask & 1 == 1)
        .map(|mask| {
            let (alpha, beta): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| mask >> i & 1 == 1);
            let d_alpha = alpha.iter().map(|&i| dims[i]).product();
            let d_beta = beta.iter().map(|&i| dims[i]).product();
            Bipartition {
                alpha,
                beta,
                d_alpha,
                d_beta,
            }
        })
        .collect())
}

/// Per-bipartition bounds and their combined `B² = Σ_B Σ X²`.
#[derive(Debug, Clone)]
pub struct MultipartiteReport {
    pub parts: Vec<(Bipartition, BoundReport)>,
    pub bound_sq: f64,
    pub bound: f64,
}

/// Multipartite bound: for every bipartition the state is reordered to
/// `α ⊗ β` and the bipartite bound is taken with the given local unitaries
/// (identities when `unitaries` is `None`).
pub fn multipartite_bound_b(
    rho: &DensityMatrix,
    dims: &[usize],
    unitaries: Option<&[(Unitary, Unitary)]>,
) -> Result<MultipartiteReport> {
    let parts = enumerate_bipartitions(dims)?;
    if let Some(us) = unitaries {
        if us.len() != parts.len() {
            return Err(Error::LengthMismatch {
                expected: parts.len(),
                actual: us.len(),
            });
        }
    }
    let mut out = Vec::with_capacity(parts.len());
    for (i, bp) in parts.into_iter().enumerate() {
        let permuted = permute_subsystems(rho.matrix(), dims, &bp.order())?;
        let state = DensityMatrix::new(permuted, 1e-9)?;
        let report = match unitaries {
            Some(us) => {
                let (ua, ub) = &us[i];
                if ua.dim() != bp.d_alpha || ub.dim() != bp.d_beta {
                    return Err(Error::DimensionMismatch(format!(
                        "unitaries for bipartition {i} must be {}x{} and {}x{}",
                        bp.d_alpha, bp.d_alpha, bp.d_beta, bp.d_beta
                    )));
                }
                bound_b(&state, ua, ub)?
            }
            None => bound_b_plain(&state, bp.d_alpha, bp.d_beta)?,
        };
        out.push((bp, report));
    }
    let bound_sq = out.iter().map(|(_, r)| r.bound_sq).sum::<f64>();
    Ok(MultipartiteReport {
        parts: out,
        bound_sq,
        bound: bound_sq.sqrt(),
    })
}

/// `ρ^{⊗n}` regrouped as `(A₁…A_n | B₁…B_n)`, with local dims `(dA^n, dB^n)`.
pub fn n_copy_state(
    rho: &DensityMatrix,
    da: usize,
    db: usize,
    n: usize,
    cap: usize,
) -> Result<(DensityMatrix, usize, usize)> {
    check_bipartite(rho.dim(), da, db)?;
    if n == 0 {
        return Err(Error::InvalidArgument("copy count must be >= 1".into()));
    }
    let total = rho.dim().checked_pow(n as u32).unwrap_or(usize::MAX);
    if total > cap {
        return Err(Error::DimensionTooLarge { dim: total, cap });
    }
    if n == 1 {
        return Ok((rho.clone(), da, db));
    }
    let mut m = rho.matrix().clone();
    for _ in 1..n {
        m = kron(&m, rho.matrix());
    }
    let dims: Vec<usize> = (0..n).flat_map(|_| [da, db]).collect();
    let order: Vec<usize> = (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect();
    let m = permute_subsystems(&m, &dims, &order)?;
    let rank = rho.rank_bound().saturating_pow(n as u32).min(total);
    Ok((DensityMatrix::from_trusted(m, rank), da.pow(n as u32), db.pow(n as u32)))
}
