//! BFGS with a weak Wolfe line search.
//!
//! Also used on piecewise smooth convex functions such as the largest
//! singular value of an affine matrix family.

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop once a full iteration moves `x` by less than this (∞-norm,
    /// relative to `1 + |x|`).
    pub x_tol: f64,
    /// Stop once the gradient norm falls below this.
    pub g_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            x_tol: 1e-15,
            g_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const LINE_SEARCH_STEPS: usize = 60;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, which returns the value and writes the gradient.
pub fn minimize<F>(f: F, start: &[f64], opts: &BfgsOptions) -> BfgsResult
where
    F: Fn(&[f64], &mut [f64]) -> f64,
{
    let n = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], g: &mut [f64]| {
        evaluations += 1;
        f(x, g)
    };
    let mut x = start.to_vec();
    let mut g = vec![0.0; n];
    let mut value = eval(&x, &mut g);
    if n == 0 {
        return BfgsResult {
            x,
            value,
            iterations: 0,
            evaluations,
        };
    }
    // inverse Hessian approximation, row-major
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    let mut scaled = false;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        if dot(&g, &g).sqrt() <= opts.g_tol {
            break;
        }
        for i in 0..n {
            d[i] = -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>();
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            // lost descent: fall back to steepest descent with a fresh model
            h.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n {
                h[i * n + i] = 1.0;
                d[i] = -g[i];
            }
            slope = -dot(&g, &g);
            scaled = false;
        }

        let (mut lo, mut hi, mut t) = (0.0_f64, f64::INFINITY, 1.0_f64);
        let mut accepted = None;
        for _ in 0..LINE_SEARCH_STEPS {
            for i in 0..n {
                x_new[i] = x[i] + t * d[i];
            }
            let v = eval(&x_new, &mut g_new);
            if !(v <= value + C1 * t * slope) {
                hi = t;
            } else if dot(&g_new, &d) < C2 * slope {
                lo = t;
            } else {
                accepted = Some(v);
                break;
            }
            t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo };
        }
        let v = match accepted {
            Some(v) => v,
            // no weak Wolfe point: keep the best sufficient-decrease point if any
            None if lo > 0.0 => {
                for i in 0..n {
                    x_new[i] = x[i] + lo * d[i];
                }
                let v = eval(&x_new, &mut g_new);
                if v < value {
                    v
                } else {
                    break;
                }
            }
            None => break,
        };

        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let moved = s.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let size = 1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        value = v;
        if moved <= opts.x_tol * size {
            break;
        }

        let sy = dot(&s, &y);
        if sy > 0.0 {
            if !scaled {
                let gamma = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= gamma);
                scaled = true;
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
    }
    BfgsResult {
        x,
        value,
        iterations,
        evaluations,
    }
}
