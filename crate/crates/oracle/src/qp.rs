//! Reference solver for the linear epsilon-SVR dual.
//!
//! Variables `theta = (alpha, alpha*)` in `[0, C]^2n` with
//! `sum(alpha) = sum(alpha*)`; minimizes
//! `0.5 |sum (alpha - alpha*) x|^2 + eps sum(alpha + alpha*) - y . (alpha - alpha*)`
//! on z-scored data by accelerated projected gradient, then re-solves the
//! equality-constrained problem on the detected free set.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::stats::{mean, sample_std};

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub alpha: Vec<f64>,
    pub alpha_star: Vec<f64>,
    /// Weights and bias on the standardized scale.
    pub w: Vec<f64>,
    pub b: f64,
    pub objective: f64,
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
}

impl QpSolution {
    /// Prediction in original target units.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let z: f64 = x
            .iter()
            .zip(&self.w)
            .zip(self.feature_means.iter().zip(&self.feature_stds))
            .map(|((x, w), (m, s))| w * (x - m) / s)
            .sum();
        self.target_mean + self.target_std * (z + self.b)
    }
}

fn zscore(values: &[f64]) -> (f64, f64) {
    let constant = values.iter().all(|v| *v == values[0]);
    let m = if constant { values[0] } else { mean(values) };
    let s = sample_std(values);
    (m, if constant || s <= 0.0 { 1.0 } else { s })
}

struct Problem {
    k: DMatrix<f64>,
    y: Vec<f64>,
    eps: f64,
    c: f64,
    n: usize,
    step: f64,
}

impl Problem {
    fn beta(&self, theta: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| theta[i] - theta[i + self.n])
    }

    fn objective(&self, theta: &[f64]) -> f64 {
        let beta = self.beta(theta);
        let quad = 0.5 * beta.dot(&(&self.k * &beta));
        let lin: f64 = (0..self.n)
            .map(|i| self.eps * (theta[i] + theta[i + self.n]) - self.y[i] * beta[i])
            .sum();
        quad + lin
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let kb = &self.k * self.beta(theta);
        let mut g = vec![0.0; 2 * self.n];
        for i in 0..self.n {
            g[i] = kb[i] + self.eps - self.y[i];
            g[i + self.n] = -kb[i] + self.eps + self.y[i];
        }
        g
    }

    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    /// Euclidean projection onto the box intersected with `sum a_t theta_t = 0`.
    /// `theta_t(lambda) = clip(v_t - lambda a_t, 0, C)` makes the constraint
    /// residual piecewise linear and non-increasing in `lambda`; the root is
    /// bracketed between sorted breakpoints and interpolated.
    fn project(&self, v: &[f64]) -> Vec<f64> {
        let c = self.c;
        let at = |lambda: f64| -> Vec<f64> {
            v.iter()
                .enumerate()
                .map(|(t, x)| (x - lambda * self.sign(t)).clamp(0.0, c))
                .collect()
        };
        let g = |lambda: f64| -> f64 { at(lambda).iter().enumerate().map(|(t, x)| self.sign(t) * x).sum() };
        let mut knots: Vec<f64> = v
            .iter()
            .enumerate()
            .flat_map(|(t, x)| [self.sign(t) * x, self.sign(t) * (x - c)])
            .collect();
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (mut lo, mut hi) = (0usize, knots.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if g(knots[mid]) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (l0, l1) = (knots[lo], knots[hi]);
        let (g0, g1) = (g(l0), g(l1));
        let lambda = if g0 == g1 { l0 } else { l0 + (l1 - l0) * g0 / (g0 - g1) };
        at(lambda)
    }

    /// Largest violation of the KKT conditions: some multiplier `lambda`
    /// must satisfy `g_t + lambda a_t >= 0` where `theta_t < C` and `<= 0`
    /// where `theta_t > 0`.
    fn kkt_gap(&self, theta: &[f64]) -> f64 {
        let g = self.gradient(theta);
        let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
        for (t, (&x, &gt)) in theta.iter().zip(&g).enumerate() {
            let a = self.sign(t);
            // g_t + lambda a >= 0  <=>  lambda >= -g_t (a = 1), lambda <= g_t (a = -1)
            if x < self.c {
                if a > 0.0 {
                    lower = lower.max(-gt);
                } else {
                    upper = upper.min(gt);
                }
            }
            if x > 0.0 {
                if a > 0.0 {
                    upper = upper.min(-gt);
                } else {
                    lower = lower.max(gt);
                }
            }
        }
        (lower - upper).max(0.0)
    }

    fn fista(&self, start: Vec<f64>, max_iter: usize) -> Vec<f64> {
        let mut x = start;
        let mut yk = x.clone();
        let mut t = 1.0f64;
        let mut f_prev = self.objective(&x);
        for _ in 0..max_iter {
            let g = self.gradient(&yk);
            let trial: Vec<f64> = yk.iter().zip(&g).map(|(a, b)| a - self.step * b).collect();
            let x_next = self.project(&trial);
            let f_next = self.objective(&x_next);
            if f_next > f_prev {
                // adaptive restart
                t = 1.0;
                yk = x.clone();
                continue;
            }
            let moved = x_next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let mom = (t - 1.0) / t_next;
            yk = x_next.iter().zip(&x).map(|(a, b)| a + mom * (a - b)).collect();
            x = x_next;
            t = t_next;
            f_prev = f_next;
            if moved <= 1e-14 * self.c {
                break;
            }
        }
        x
    }

    fn solve(&self) -> Vec<f64> {
        let mut theta = vec![0.0; 2 * self.n];
        let mut best = theta.clone();
        for _ in 0..200 {
            theta = self.fista(theta, 2000);
            let polished = self.polish(&theta);
            if self.kkt_gap(&polished) < self.kkt_gap(&best) {
                best = polished.clone();
            }
            if self.kkt_gap(&best) <= 1e-11 {
                break;
            }
            theta = polished;
        }
        best
    }

    /// Re-solve on the free set with bounds fixed; keeps the result only if
    /// it stays feasible and does not raise the objective.
    fn polish(&self, theta: &[f64]) -> Vec<f64> {
        let m = 2 * self.n;
        let tol = 1e-9 * self.c;
        let free: Vec<usize> = (0..m).filter(|&t| theta[t] > tol && theta[t] < self.c - tol).collect();
        let mut fixed = theta.to_vec();
        for t in 0..m {
            if !free.contains(&t) {
                fixed[t] = if theta[t] >= self.c - tol { self.c } else { 0.0 };
            }
        }
        if free.is_empty() {
            return theta.to_vec();
        }
        let q = |s: usize, t: usize| -> f64 { self.sign(s) * self.sign(t) * self.k[(s % self.n, t % self.n)] };
        let lin = |t: usize| -> f64 { self.eps - self.sign(t) * self.y[t % self.n] };
        let f = free.len();
        let mut a = DMatrix::<f64>::zeros(f + 1, f + 1);
        let mut rhs = DVector::<f64>::zeros(f + 1);
        for (r, &s) in free.iter().enumerate() {
            for (col, &t) in free.iter().enumerate() {
                a[(r, col)] = q(s, t);
            }
            a[(r, f)] = self.sign(s);
            a[(f, r)] = self.sign(s);
            let bound: f64 = (0..m).filter(|t| !free.contains(t)).map(|t| q(s, t) * fixed[t]).sum();
            rhs[r] = -lin(s) - bound;
        }
        rhs[f] = -(0..m)
            .filter(|t| !free.contains(t))
            .map(|t| self.sign(t) * fixed[t])
            .sum::<f64>();
        let Ok(sol) = a.svd(true, true).solve(&rhs, 1e-13) else {
            return theta.to_vec();
        };
        let mut out = fixed;
        for (r, &t) in free.iter().enumerate() {
            out[t] = sol[r];
        }
        let feasible = out.iter().all(|v| *v >= -1e-12 && *v <= self.c + 1e-12);
        if !feasible {
            return theta.to_vec();
        }
        for v in out.iter_mut() {
            *v = v.clamp(0.0, self.c);
        }
        if self.objective(&out) <= self.objective(theta) + 1e-14 * self.objective(theta).abs().max(1.0) {
            out
        } else {
            theta.to_vec()
        }
    }

    fn bias(&self, theta: &[f64], w_dot: &[f64]) -> f64 {
        let tol = 1e-7 * self.c;
        let mut free = Vec::new();
        let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..self.n {
            let r = self.y[i] - w_dot[i];
            let (a, s) = (theta[i], theta[i + self.n]);
            if a > tol && a < self.c - tol {
                free.push(r - self.eps);
            }
            if s > tol && s < self.c - tol {
                free.push(r + self.eps);
            }
            if a <= tol {
                lower = lower.max(r - self.eps);
            } else if a >= self.c - tol {
                upper = upper.min(r - self.eps);
            }
            if s <= tol {
                upper = upper.min(r + self.eps);
            } else if s >= self.c - tol {
                lower = lower.max(r + self.eps);
            }
        }
        if !free.is_empty() {
            free.iter().sum::<f64>() / free.len() as f64
        } else {
            0.5 * (lower + upper)
        }
    }
}

/// Solves the dual for raw `rows`/`targets` with the internal z-scoring the
/// production trainer applies.
pub fn solve(rows: &[Vec<f64>], targets: &[f64], c: f64, eps: f64) -> QpSolution {
    let n = rows.len();
    let d = rows[0].len();
    let (feature_means, feature_stds): (Vec<f64>, Vec<f64>) = (0..d)
        .map(|j| zscore(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .unzip();
    let (target_mean, target_std) = zscore(targets);
    let z = DMatrix::from_fn(n, d, |i, j| (rows[i][j] - feature_means[j]) / feature_stds[j]);
    let y: Vec<f64> = targets.iter().map(|t| (t - target_mean) / target_std).collect();
    let k = &z * z.transpose();
    let lmax = SymmetricEigen::new(k.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, e| m.max(*e));
    let problem = Problem {
        k,
        y,
        eps,
        c,
        n,
        step: 1.0 / (2.0 * lmax).max(1e-3),
    };
    let theta = problem.solve();
    let beta = problem.beta(&theta);
    let w_vec = z.transpose() * &beta;
    let w_dot = &z * &w_vec;
    let b = problem.bias(&theta, w_dot.as_slice());
    QpSolution {
        alpha: theta[..n].to_vec(),
        alpha_star: theta[n..].to_vec(),
        w: w_vec.as_slice().to_vec(),
        b,
        objective: problem.objective(&theta),
        feature_means,
        feature_stds,
        target_mean,
        target_std,
    }
}
