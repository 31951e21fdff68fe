//! SMO solver for the linear epsilon-SVR dual.
//!
//! With `n` standardized rows `z_i`, targets `y_i` and kernel `K = Z Z^T`,
//! the dual is written over `2n` variables `beta = (alpha, alpha*)` with
//! signs `s = (+1.., -1..)`:
//!
//! ```text
//! min  1/2 beta^T Q beta + p^T beta
//! s.t. s^T beta = 0,  0 <= beta <= C
//! Q_tu = s_t s_u K(t mod n, u mod n)
//! p_t  = eps - y_i (alpha half),  eps + y_i (alpha* half)
//! ```
//!
//! Each iteration picks a maximal-violating pair with second-order working
//! set selection and solves the two-variable subproblem analytically. The
//! loop stops once `m(beta) - M(beta) < tolerance`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::SvrModel;
use super::standardize::{standardize_fit, Standardization};
use super::{SvrConfig, TrainingSet};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;
/// Rows above which kernel columns are computed on demand instead of cached.
const DENSE_KERNEL_LIMIT: usize = 4096;

/// A fitted model together with its dual solution and solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrFit {
    pub model: SvrModel,
    /// `alpha_i`, standardized units.
    pub alpha: Vec<f64>,
    /// `alpha*_i`, standardized units.
    pub alpha_star: Vec<f64>,
    /// Weights in standardized feature space.
    pub standardized_weights: Vec<f64>,
    /// Bias in standardized target space.
    pub standardized_bias: f64,
    pub iterations: usize,
    /// Final `m - M` gap (clamped at 0).
    pub violation: f64,
    pub converged: bool,
    /// Dual objective at the returned point.
    pub dual_objective: f64,
}

impl SvrFit {
    /// `alpha_i - alpha*_i`.
    pub fn dual_coefficients(&self) -> Vec<f64> {
        self.alpha.iter().zip(&self.alpha_star).map(|(a, b)| a - b).collect()
    }
}

enum Kernel<'a> {
    Dense { n: usize, values: Vec<f64> },
    Lazy { rows: &'a [Vec<f64>] },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl<'a> Kernel<'a> {
    fn new(rows: &'a [Vec<f64>]) -> Self {
        let n = rows.len();
        if n <= DENSE_KERNEL_LIMIT {
            let mut values = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let k = dot(&rows[i], &rows[j]);
                    values[i * n + j] = k;
                    values[j * n + i] = k;
                }
            }
            Kernel::Dense { n, values }
        } else {
            Kernel::Lazy { rows }
        }
    }

    fn row_into(&self, i: usize, out: &mut [f64]) {
        match self {
            Kernel::Dense { n, values } => out.copy_from_slice(&values[i * n..(i + 1) * n]),
            Kernel::Lazy { rows } => {
                for (o, r) in out.iter_mut().zip(rows.iter()) {
                    *o = dot(&rows[i], r);
                }
            }
        }
    }

    fn diag(&self, i: usize) -> f64 {
        match self {
            Kernel::Dense { n, values } => values[i * n + i],
            Kernel::Lazy { rows } => dot(&rows[i], &rows[i]),
        }
    }
}

struct Solver<'a> {
    n: usize,
    c: f64,
    kernel: Kernel<'a>,
    kdiag: Vec<f64>,
    beta: Vec<f64>,
    grad: Vec<f64>,
    order: Vec<usize>,
    row_i: Vec<f64>,
    row_j: Vec<f64>,
}

impl Solver<'_> {
    #[inline]
    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    fn at_upper(&self, t: usize) -> bool {
        self.beta[t] >= self.c
    }

    #[inline]
    fn at_lower(&self, t: usize) -> bool {
        self.beta[t] <= 0.0
    }

    /// Returns `(i, j, gap)`; `j` is `None` when no pair can make progress.
    fn select_working_set(&mut self) -> (Option<usize>, Option<usize>, f64) {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmax_idx = None;
        for &t in &self.order {
            if self.sign(t) > 0.0 {
                if !self.at_upper(t) && -self.grad[t] >= gmax {
                    gmax = -self.grad[t];
                    gmax_idx = Some(t);
                }
            } else if !self.at_lower(t) && self.grad[t] >= gmax {
                gmax = self.grad[t];
                gmax_idx = Some(t);
            }
        }
        let Some(i) = gmax_idx else {
            return (None, None, 0.0);
        };
        let n = self.n;
        let ii = i % n;
        let mut row_i = std::mem::take(&mut self.row_i);
        self.kernel.row_into(ii, &mut row_i);

        let mut gmax2 = f64::NEG_INFINITY;
        let mut gmin_idx = None;
        let mut obj_diff_min = f64::INFINITY;
        for &t in &self.order {
            let tt = t % n;
            let quad = {
                let q = self.kdiag[ii] + self.kdiag[tt] - 2.0 * row_i[tt];
                if q > 0.0 {
                    q
                } else {
                    TAU
                }
            };
            if self.sign(t) > 0.0 {
                if !self.at_lower(t) {
                    let grad_diff = gmax + self.grad[t];
                    if self.grad[t] >= gmax2 {
                        gmax2 = self.grad[t];
                    }
                    if grad_diff > 0.0 {
                        let obj_diff = -(grad_diff * grad_diff) / quad;
                        if obj_diff <= obj_diff_min {
                            gmin_idx = Some(t);
                            obj_diff_min = obj_diff;
                        }
                    }
                }
            } else if !self.at_upper(t) {
                let grad_diff = gmax - self.grad[t];
                if -self.grad[t] >= gmax2 {
                    gmax2 = -self.grad[t];
                }
                if grad_diff > 0.0 {
                    let obj_diff = -(grad_diff * grad_diff) / quad;
                    if obj_diff <= obj_diff_min {
                        gmin_idx = Some(t);
                        obj_diff_min = obj_diff;
                    }
                }
            }
        }
        self.row_i = row_i;
        (Some(i), gmin_idx, gmax + gmax2)
    }

    /// Solves the two-variable subproblem on `(i, j)` and updates gradients.
    /// `row_i` must hold kernel row `i mod n`.
    fn update_pair(&mut self, i: usize, j: usize) {
        let n = self.n;
        let c = self.c;
        let (ii, jj) = (i % n, j % n);
        let mut row_j = std::mem::take(&mut self.row_j);
        self.kernel.row_into(jj, &mut row_j);
        let (si, sj) = (self.sign(i), self.sign(j));
        let q_ij = si * sj * self.row_i[jj];
        let (old_i, old_j) = (self.beta[i], self.beta[j]);
        let (mut ai, mut aj) = (old_i, old_j);

        if si != sj {
            let mut quad = self.kdiag[ii] + self.kdiag[jj] + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let mut quad = self.kdiag[ii] + self.kdiag[jj] - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        // sums like `sum - c` can land an ulp off a bound
        let snap = |a: f64| {
            let slack = 4.0 * f64::EPSILON * c;
            if a <= slack {
                0.0
            } else if a >= c - slack {
                c
            } else {
                a
            }
        };
        let (ai, aj) = (snap(ai), snap(aj));
        self.beta[i] = ai;
        self.beta[j] = aj;

        let (d_i, d_j) = (ai - old_i, aj - old_j);
        for t in 0..2 * n {
            let st = self.sign(t);
            let tt = t % n;
            self.grad[t] += st * (si * self.row_i[tt] * d_i + sj * row_j[tt] * d_j);
        }
        self.row_j = row_j;
    }

    /// Bias from free variables, or the midpoint of the feasible interval.
    fn bias(&self) -> f64 {
        let mut ub = f64::INFINITY;
        let mut lb = f64::NEG_INFINITY;
        let mut free = 0usize;
        let mut sum_free = 0.0;
        for t in 0..2 * self.n {
            let s = self.sign(t);
            let yg = s * self.grad[t];
            if self.at_upper(t) {
                if s < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.at_lower(t) {
                if s > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum_free += yg;
            }
        }
        let rho = if free > 0 {
            sum_free / free as f64
        } else {
            0.5 * (ub + lb)
        };
        -rho
    }
}

/// Maximal KKT violation `m - M` (clamped at 0) of a dual point, given its
/// gradient.
fn gap(alpha: &[f64], alpha_star: &[f64], grad_a: &[f64], grad_s: &[f64], c: f64) -> f64 {
    let mut m_up = f64::NEG_INFINITY;
    let mut m_low = f64::INFINITY;
    for i in 0..alpha.len() {
        // alpha half: sign +1, -s*G = -G
        if alpha[i] < c {
            m_up = m_up.max(-grad_a[i]);
        }
        if alpha[i] > 0.0 {
            m_low = m_low.min(-grad_a[i]);
        }
        // alpha* half: sign -1, -s*G = G
        if alpha_star[i] > 0.0 {
            m_up = m_up.max(grad_s[i]);
        }
        if alpha_star[i] < c {
            m_low = m_low.min(grad_s[i]);
        }
    }
    (m_up - m_low).max(0.0)
}

fn dual_objective(alpha: &[f64], alpha_star: &[f64], z_targets: &[f64], w: &[f64], epsilon: f64) -> f64 {
    let quad = 0.5 * dot(w, w);
    let lin: f64 = alpha
        .iter()
        .zip(alpha_star)
        .zip(z_targets)
        .map(|((a, s), y)| epsilon * (a + s) - y * (a - s))
        .sum();
    quad + lin
}

fn collapse(rows: &[Vec<f64>], coef: &[f64], d: usize) -> Vec<f64> {
    let mut w = vec![0.0; d];
    for (row, c) in rows.iter().zip(coef) {
        if *c != 0.0 {
            for (wj, x) in w.iter_mut().zip(row) {
                *wj += c * x;
            }
        }
    }
    w
}

/// Fits the model and returns the full dual solution, whether or not the
/// solver reached `tolerance` within `max_iterations`.
pub fn svr_fit_detailed(data: &TrainingSet, config: &SvrConfig) -> Result<SvrFit> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Empty { what: "training set" });
    }
    let (params, z_rows, z_targets) = standardize_fit(data)?;
    let n = z_rows.len();
    let d = data.n_features();

    let kernel = Kernel::new(&z_rows);
    let kdiag: Vec<f64> = (0..n).map(|i| kernel.diag(i)).collect();
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let grad: Vec<f64> = (0..2 * n)
        .map(|t| {
            if t < n {
                config.epsilon - z_targets[t]
            } else {
                config.epsilon + z_targets[t - n]
            }
        })
        .collect();
    let mut solver = Solver {
        n,
        c: config.complexity_c,
        kernel,
        kdiag,
        beta: vec![0.0; 2 * n],
        grad,
        order,
        row_i: vec![0.0; n],
        row_j: vec![0.0; n],
    };

    let mut iterations = 0usize;
    let (converged, violation) = loop {
        let (i, j, gap) = solver.select_working_set();
        let gap = gap.max(0.0);
        match (i, j) {
            (Some(i), Some(j)) if gap >= config.tolerance => {
                if iterations >= config.max_iterations {
                    break (false, gap);
                }
                solver.update_pair(i, j);
                iterations += 1;
            }
            _ => break (gap < config.tolerance, gap),
        }
    };

    let b = solver.bias();
    let alpha = solver.beta[..n].to_vec();
    let alpha_star = solver.beta[n..].to_vec();
    let coef: Vec<f64> = alpha.iter().zip(&alpha_star).map(|(a, s)| a - s).collect();
    let w = collapse(&z_rows, &coef, d);
    let objective = dual_objective(&alpha, &alpha_star, &z_targets, &w, config.epsilon);
    let model = SvrModel::from_standardized(data, &params, &w, b, *config);
    Ok(SvrFit {
        model,
        alpha,
        alpha_star,
        standardized_weights: w,
        standardized_bias: b,
        iterations,
        violation,
        converged,
        dual_objective: objective,
    })
}

/// Fits the model, failing with [`Error::NotConverged`] when the solver hits
/// `max_iterations` before the KKT gap drops below `tolerance`.
pub fn svr_fit(data: &TrainingSet, config: &SvrConfig) -> Result<SvrModel> {
    let fit = svr_fit_detailed(data, config)?;
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
            violation: fit.violation,
        });
    }
    Ok(fit.model)
}

fn standardization_of(model: &SvrModel) -> Standardization {
    Standardization {
        feature_means: model.feature_means().to_vec(),
        feature_stds: model.feature_stds().to_vec(),
        target_mean: model.target_mean(),
        target_std: model.target_std(),
    }
}

/// Recomputes the KKT residuals of `fit` on `data` from scratch: the
/// `m - M` optimality gap, box-constraint excess and equality-constraint
/// residual. Returns the largest.
pub fn kkt_violations(fit: &SvrFit, data: &TrainingSet, config: &SvrConfig) -> f64 {
    let params = standardization_of(&fit.model);
    let z_rows: Vec<Vec<f64>> = data.rows().iter().map(|r| params.features(r)).collect();
    let z_targets: Vec<f64> = data.targets().iter().map(|&y| params.target(y)).collect();
    let coef = fit.dual_coefficients();
    let w = collapse(&z_rows, &coef, data.n_features());
    let f: Vec<f64> = z_rows.iter().map(|r| dot(&w, r)).collect();
    let grad_a: Vec<f64> = f.iter().zip(&z_targets).map(|(f, y)| config.epsilon - y + f).collect();
    let grad_s: Vec<f64> = f.iter().zip(&z_targets).map(|(f, y)| config.epsilon + y - f).collect();
    let c = config.complexity_c;
    let optimality = gap(&fit.alpha, &fit.alpha_star, &grad_a, &grad_s, c);
    let box_excess = fit
        .alpha
        .iter()
        .chain(&fit.alpha_star)
        .map(|&b| (-b).max(b - c).max(0.0))
        .fold(0.0, f64::max);
    let equality = coef.iter().sum::<f64>().abs();
    optimality.max(box_excess).max(equality)
}
