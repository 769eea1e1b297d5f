//! Derivative-free Nelder-Mead simplex minimization.

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iter: usize,
    /// Stop when the spread of simplex values falls below `f_tol`.
    pub f_tol: f64,
    /// Stop when the simplex diameter falls below `x_tol`.
    pub x_tol: f64,
    /// Number of times the search restarts from its own best vertex with a
    /// fresh simplex. Restarting breaks the stalls that non-smooth
    /// objectives cause.
    pub polish_rounds: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iter: 4000,
            f_tol: 1e-13,
            x_tol: 1e-12,
            polish_rounds: 6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn run_once<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    step: f64,
    opts: &SimplexOptions,
    evaluations: &mut usize,
) -> (Vec<f64>, f64, bool) {
    let dim = start.len();
    let mut eval = |x: &[f64]| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if dim == 0 {
        return (Vec::new(), eval(start), true);
    }
    // adaptive coefficients (Gao & Han) keep the simplex healthy in higher dimension
    let n = dim as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / n, 0.75 - 1.0 / (2.0 * n), 1.0 - 1.0 / n);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for k in 0..dim {
        let mut v = start.to_vec();
        v[k] += if v[k].abs() > 1e-12 { step.max(0.05 * v[k].abs()) } else { step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let mut converged = false;
    for _ in 0..opts.max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[dim] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol * values[0].abs().max(1.0) && diameter <= opts.x_tol * (1.0 + norm_inf(&simplex[0])) {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|v| v[k]).sum::<f64>() / n)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(alpha * gamma);
            let fe = eval(&xe);
            if fe < fr {
                simplex[dim] = xe;
                values[dim] = fe;
            } else {
                simplex[dim] = xr;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            simplex[dim] = xr;
            values[dim] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[dim] {
            let xc = along(alpha * rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[dim].min(fr) {
            simplex[dim] = xc;
            values[dim] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=dim {
            simplex[i] = best
                .iter()
                .zip(&simplex[i])
                .map(|(b, v)| b + sigma * (v - b))
                .collect();
            values[i] = eval(&simplex[i]);
        }
    }
    let (i, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty simplex");
    (simplex[i].clone(), values[i], converged)
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Minimizes `f` from `start`, restarting from the best vertex with a
/// shrinking simplex until a restart no longer improves the value.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: F, start: &[f64], step: f64, opts: &SimplexOptions) -> SimplexResult {
    let mut evaluations = 0;
    let (mut x, mut value, mut converged) = run_once(&f, start, step, opts, &mut evaluations);
    let mut step = step;
    for _ in 0..opts.polish_rounds {
        step = (step * 0.1).max(1e-9);
        let (x2, v2, c2) = run_once(&f, &x, step, opts, &mut evaluations);
        let gain = value - v2;
        if v2 <= value {
            x = x2;
            value = v2;
            converged = c2;
        }
        if gain <= opts.f_tol * value.abs().max(1.0) {
            break;
        }
    }
    SimplexResult {
        x,
        value,
        evaluations,
        converged,
    }
}
