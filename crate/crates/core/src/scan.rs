//! Optimized bounds, distillability verdicts and the two-qutrit grid scan
//! over `ρ = α|Ψ₁⟩⟨Ψ₁| + β|Ψ₂⟩⟨Ψ₂| + (1−α−β)/9·𝟙`.

use rayon::prelude::*;

use crate::entanglement::{
    bound_b_plain, is_npt, max_entangled_norm, n_copy_state, BoptObjective, BoundReport, DistillObjective,
    DEFAULT_DIM_CAP,
};
use crate::error::{Error, Result};
use crate::linalg::{herm_eigvals, ComplexMatrix, C64, ONE, ZERO};
use crate::optimize::{minimize, minimize_from, OptimizerConfig, OptimizerResult};
use crate::states::{DensityMatrix, StateVector};

/// Minimum eigenvalue below which a grid matrix is not a state.
pub const STATE_EIG_TOL: f64 = 1e-10;

/// `max X²` above this counts as a distillability witness.
pub const WITNESS_TOL: f64 = 1e-8;

/// Optimized bound together with the optimizer run that produced it.
#[derive(Debug, Clone)]
pub struct OptimizedBound {
    pub report: BoundReport,
    pub run: OptimizerResult,
}

/// Margin shifts for the continuation in [`optimize_bound`], largest first.
pub const RELAX_SCHEDULE: [f64; 4] = [0.05, 0.01, 0.002, 0.0];

/// `B_opt(ρ)`: maximizes `B²` over `UA⊗UB`.
///
/// The bound is exactly zero on large open regions of parameter space and
/// its best configurations tend to have several terms positive at once, so
/// the search follows [`RELAX_SCHEDULE`]: all restarts run on margins
/// shifted by the first entry, then the best point is polished once per
/// remaining entry. The identity (all-zero parameters) is always a
/// candidate, so the result never falls below the plain bound.
pub fn optimize_bound(rho: &DensityMatrix, da: usize, db: usize, cfg: &OptimizerConfig) -> Result<OptimizedBound> {
    let obj = BoptObjective::new(rho, da, db)?;
    // evaluation errors only come from length checks, which `minimize` respects
    let obj_ref = &obj;
    let search = |relax: f64| move |p: &[f64]| obj_ref.search_value(p, relax).unwrap_or(f64::NAN);
    let mut run = minimize(search(RELAX_SCHEDULE[0]), obj.dim(), cfg);
    let polish = OptimizerConfig { restarts: 1, ..*cfg };
    for &relax in &RELAX_SCHEDULE[1..] {
        let next = minimize_from(search(relax), &run.best_params, &polish);
        run.iterations += next.iterations;
        run.evaluations += next.evaluations;
        run.converged = next.converged;
        run.best_params = next.best_params;
    }
    let (la, _) = obj.param_lens();
    let zero = vec![0.0; obj.dim()];
    let found = obj.report(&run.best_params[..la], &run.best_params[la..])?;
    let identity = obj.report(&zero[..la], &zero[la..])?;
    let report = if identity.bound_sq > found.bound_sq {
        run.best_params = zero;
        identity
    } else {
        found
    };
    run.best_value = -report.bound_sq;
    if !report.bound_sq.is_finite() {
        return Err(Error::ConvergenceFailure);
    }
    Ok(OptimizedBound { report, run })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistillVerdict {
    pub max_x_sq: f64,
    pub witness: bool,
    /// Total angle count `(4dA−8) + (4dB−8)` of the search.
    pub param_count: usize,
    pub copies: usize,
    pub local_dims: (usize, usize),
    pub best_params: Vec<f64>,
}

/// Searches for a 2×2 subspace with positive `X²_{1,2,1,2}` on `ρ^{⊗copies}`.
pub fn distill_verdict(
    rho: &DensityMatrix,
    da: usize,
    db: usize,
    copies: usize,
    cfg: &OptimizerConfig,
) -> Result<DistillVerdict> {
    let (state, da, db) = n_copy_state(rho, da, db, copies, DEFAULT_DIM_CAP)?;
    let obj = DistillObjective::new(&state, da, db)?;
    let run = minimize(|p| obj.search_value(p).unwrap_or(f64::NAN), obj.dim(), cfg);
    let max_x_sq = -obj.value_joint(&run.best_params)?;
    if !max_x_sq.is_finite() {
        return Err(Error::ConvergenceFailure);
    }
    Ok(DistillVerdict {
        max_x_sq,
        witness: max_x_sq > WITNESS_TOL,
        param_count: obj.dim(),
        copies,
        local_dims: (da, db),
        best_params: run.best_params,
    })
}

/// `w|Φ+⟩⟨Φ+| + (1−w)𝟙/4` on two qubits.
pub fn werner_state(w: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidArgument(format!("Werner weight {w} outside [0, 1]")));
    }
    let phi = StateVector::normalized(vec![ONE, ZERO, ZERO, ONE])?.density();
    DensityMatrix::mixture(&[(w, &phi), (1.0 - w, &DensityMatrix::maximally_mixed(4))])
}

/// `Ψ₁ = (|11⟩+|22⟩+|33⟩)/√3` (labels 1-based, so amplitudes at 0, 4, 8).
pub fn psi1() -> StateVector {
    qutrit_pairs(&[(0, 0), (1, 1), (2, 2)])
}

/// `Ψ₂ = (|12⟩+|23⟩+|31⟩)/√3`.
pub fn psi2() -> StateVector {
    qutrit_pairs(&[(0, 1), (1, 2), (2, 0)])
}

fn qutrit_pairs(pairs: &[(usize, usize)]) -> StateVector {
    let mut v = vec![ZERO; 9];
    for &(a, b) in pairs {
        v[3 * a + b] = ONE;
    }
    StateVector::normalized(v).expect("nonzero vector")
}

/// The grid matrix for weights `(α, β)`; not necessarily a state.
pub fn fig1_matrix(alpha: f64, beta: f64) -> ComplexMatrix {
    let p1 = psi1().density();
    let p2 = psi2().density();
    let noise = (1.0 - alpha - beta) / 9.0;
    ComplexMatrix::from_fn(9, 9, |r, c| {
        let id = if r == c { noise } else { 0.0 };
        p1.matrix()[(r, c)] * alpha + p2.matrix()[(r, c)] * beta + C64::new(id, 0.0)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub alpha: f64,
    pub beta: f64,
    pub is_state: bool,
    pub is_ppt: bool,
    /// `B / sqrt(4/3)`.
    pub bound_plain: f64,
    /// `B_opt / sqrt(4/3)` when optimization was requested.
    pub bound_opt: Option<f64>,
}

/// Grid points `(i·h, j·h)` with `i + j ≤ ⌊1/h⌋`, in row-major order of `(i, j)`.
pub fn fig1_grid(step: f64) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0 && step <= 0.25) {
        return Err(Error::InvalidArgument(format!("grid step {step} outside (0, 0.25]")));
    }
    // integer indices keep α+β ≤ 1 exact on the diagonal
    let n = (1.0 / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .flat_map(|i| (0..=n - i).map(move |j| (i as f64 * step, j as f64 * step)))
        .collect())
}

/// Evaluates one grid point.
pub fn fig1_row(alpha: f64, beta: f64, optimize: Option<&OptimizerConfig>) -> Result<ScanRow> {
    let m = fig1_matrix(alpha, beta);
    let min_eig = herm_eigvals(&m)?[0];
    let norm = max_entangled_norm(3);
    if min_eig < -STATE_EIG_TOL {
        return Ok(ScanRow {
            alpha,
            beta,
            is_state: false,
            is_ppt: false,
            bound_plain: f64::NAN,
            bound_opt: optimize.map(|_| f64::NAN),
        });
    }
    let rho = DensityMatrix::new(m, 1e-9)?;
    let is_ppt = !is_npt(&rho, &[3, 3], 1)?;
    let bound_plain = bound_b_plain(&rho, 3, 3)?.bound / norm;
    let bound_opt = match optimize {
        Some(cfg) => Some(optimize_bound(&rho, 3, 3, cfg)?.report.bound / norm),
        None => None,
    };
    Ok(ScanRow {
        alpha,
        beta,
        is_state: true,
        is_ppt,
        bound_plain,
        bound_opt,
    })
}

/// The full scan. Points run in parallel, each with the same optimizer
/// config; rows come back in grid order.
pub fn fig1_scan(step: f64, optimize: Option<&OptimizerConfig>) -> Result<Vec<ScanRow>> {
    fig1_grid(step)?
        .into_par_iter()
        .map(|(a, b)| fig1_row(a, b, optimize))
        .collect()
}
