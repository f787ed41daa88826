//! Deterministic quasi-Newton minimisation with finite-difference gradients.

/// Stopping rules for [`bfgs`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct BfgsOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Largest change of any coordinate in one line search.
    pub max_step: Option<f64>,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-9,
            max_iter: 500,
            fd_step: 1e-6,
            max_step: None,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn central_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// BFGS with an inverse-Hessian update and Armijo backtracking.
///
/// Non-finite objective values are treated as +∞ by the line search.
pub(crate) fn bfgs<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = central_gradient(&f, &x, opts.fd_step);
    let mut h = identity(n);
    let mut iterations = 0;
    let mut stalls = 0;
    while iterations < opts.max_iter {
        if inf_norm(&g) < opts.grad_tol {
            return Minimum {
                grad_norm: inf_norm(&g),
                x,
                value: fx,
                iterations,
                converged: true,
            };
        }
        iterations += 1;
        let mut p: Vec<f64> = (0..n).map(|i| -dot(&h[i], &g)).collect();
        let mut slope = dot(&p, &g);
        if slope >= 0.0 {
            h = identity(n);
            p = g.iter().map(|v| -v).collect();
            slope = dot(&p, &g);
        }
        let mut step = match opts.max_step {
            Some(cap) => (cap / inf_norm(&p).max(1e-300)).min(1.0),
            None => 1.0,
        };
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + step * pi).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // No descent along the quasi-Newton direction: restart once from
            // steepest descent, then give up.
            stalls += 1;
            if stalls > 1 {
                break;
            }
            h = identity(n);
            continue;
        };
        stalls = 0;
        let g_new = central_gradient(&f, &x_new, opts.fd_step);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i][j] +=
                        rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let tiny = (fx - f_new).abs() <= 1e-16 * fx.abs().max(1e-300) && inf_norm(&s) < 1e-14;
        x = x_new;
        fx = f_new;
        g = g_new;
        if tiny {
            break;
        }
    }
    let grad_norm = inf_norm(&g);
    Minimum {
        converged: grad_norm < opts.grad_tol,
        grad_norm,
        x,
        value: fx,
        iterations,
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect()
}

/// Minimum of a `2π`-periodic function: a uniform grid of `samples` points
/// followed by golden-section refinement inside the best grid cell.
pub(crate) fn minimize_periodic<F: Fn(f64) -> f64>(f: F, samples: usize, tol: f64) -> (f64, f64) {
    let h = std::f64::consts::TAU / samples as f64;
    let (mut best_x, mut best_f) = (0.0, f(0.0));
    for k in 1..samples {
        let x = k as f64 * h - std::f64::consts::PI;
        let v = f(x);
        if v < best_f {
            (best_x, best_f) = (x, v);
        }
    }
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (best_x - h, best_x + h);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            (hi, x2, f2) = (x2, x1, f1);
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            (lo, x1, f1) = (x1, x2, f2);
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v < best_f {
            (best_x, best_f) = (x, v);
        }
    }
    (best_x, best_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_minimum() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = bfgs(
            f,
            &[-1.2, 1.0],
            BfgsOptions {
                grad_tol: 1e-7,
                ..Default::default()
            },
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn quadratic_in_many_dimensions() {
        let f = |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| (i as f64 + 1.0) * (v - 0.3).powi(2))
                .sum::<f64>()
        };
        let m = bfgs(f, &[0.0; 15], BfgsOptions::default());
        assert!(m.converged);
        assert!(m.x.iter().all(|v| (v - 0.3).abs() < 1e-8));
    }
}
