//! Derivative-free minimization with restarts (Nelder–Mead).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Stop once `f_worst − f_best` falls below this.
    pub tolerance: f64,
    /// Edge length of the initial simplex.
    pub initial_scale: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 1e-10,
            initial_scale: 0.5,
            restarts: 12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    /// Iterations summed over all restarts.
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: usize,
    /// Whether any restart met the tolerance before running out of iterations.
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        // NaN never wins a comparison
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// One Nelder–Mead run from the given simplex; returns (point, value, iterations, converged).
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<F>,
    mut simplex: Vec<Vec<f64>>,
    cfg: &OptimizerConfig,
) -> (Vec<f64>, f64, usize, bool) {
    let n = simplex.len() - 1;
    let mut values: Vec<f64> = simplex.iter().map(|p| f.eval(p)).collect();
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    let point = |centroid: &[f64], worst: &[f64], coeff: f64, out: &mut [f64]| {
        for ((o, c), w) in out.iter_mut().zip(centroid).zip(worst) {
            *o = c + coeff * (c - w);
        }
    };

    for iter in 0..cfg.max_iterations {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);
        if values[worst] - values[best] < cfg.tolerance {
            return (simplex[best].clone(), values[best], iter, true);
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        point(&centroid, &simplex[worst], REFLECT, &mut trial);
        let fr = f.eval(&trial);
        if fr < values[best] {
            point(&centroid, &simplex[worst], REFLECT * EXPAND, &mut trial2);
            let fe = f.eval(&trial2);
            if fe < fr {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = fe;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = fr;
            continue;
        }
        // contraction: outside if the reflected point beats the worst, else inside
        let (coeff, reference) = if fr < values[worst] {
            (REFLECT * CONTRACT, fr)
        } else {
            (-CONTRACT, values[worst])
        };
        point(&centroid, &simplex[worst], coeff, &mut trial2);
        let fc = f.eval(&trial2);
        if fc < reference {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                *x = a + SHRINK * (*x - a);
            }
            values[i] = f.eval(&simplex[i]);
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    (simplex[best].clone(), values[best], cfg.max_iterations, false)
}

/// `start` plus `start + scale·e_i` for every axis.
fn axis_simplex(start: &[f64], scale: f64) -> Vec<Vec<f64>> {
    let mut simplex = vec![start.to_vec()];
    for i in 0..start.len() {
        let mut p = start.to_vec();
        p[i] += scale;
        simplex.push(p);
    }
    simplex
}

/// Minimizes `objective` over `R^dim`. The first run uses an axis simplex
/// of edge `initial_scale` at the origin; every later run draws all of its
/// `dim + 1` vertices uniformly from `[0, 2π)^dim` with a ChaCha8 generator
/// seeded from `cfg.seed`. The best point found is re-evaluated before
/// returning.
pub fn minimize<F: FnMut(&[f64]) -> f64>(objective: F, dim: usize, cfg: &OptimizerConfig) -> OptimizerResult {
    minimize_from(objective, &vec![0.0; dim], cfg)
}

/// [`minimize`] with the first run started at `start` instead of the origin.
pub fn minimize_from<F: FnMut(&[f64]) -> f64>(objective: F, start: &[f64], cfg: &OptimizerConfig) -> OptimizerResult {
    let dim = start.len();
    let mut f = Counted {
        f: objective,
        evaluations: 0,
    };
    if dim == 0 {
        let v = f.eval(&[]);
        return OptimizerResult {
            best_params: Vec::new(),
            best_value: v,
            iterations: 0,
            evaluations: f.evaluations,
            restarts: 0,
            converged: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best_params = start.to_vec();
    let mut best_value = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let restarts = cfg.restarts.max(1);
    for run in 0..restarts {
        let simplex = if run == 0 {
            axis_simplex(start, cfg.initial_scale)
        } else {
            (0..=dim)
                .map(|_| (0..dim).map(|_| rng.gen_range(0.0..TAU)).collect())
                .collect()
        };
        let (x, v, it, ok) = nelder_mead(&mut f, simplex, cfg);
        iterations += it;
        converged |= ok;
        if v < best_value {
            best_value = v;
            best_params = x;
        }
    }
    let best_value = f.eval(&best_params);
    OptimizerResult {
        best_params,
        best_value,
        iterations,
        evaluations: f.evaluations,
        restarts,
        converged,
    }
}
