//! Derivative-free local minimizers used by the discord search.

/// Outcome of a local minimization.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOptions {
    /// Initial simplex edge length along each coordinate.
    pub initial_step: f64,
    /// Stop when the largest vertex distance from the best vertex drops below this.
    pub diameter_tol: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { initial_step: 0.1, diameter_tol: 1e-7, max_evaluations: 5000 }
    }
}

/// Nelder-Mead simplex search with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
pub fn nelder_mead(f: &mut impl FnMut(&[f64]) -> f64, x0: &[f64], opts: NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| dist(x, &simplex[0].0))
            .fold(0.0, f64::max);
        if diameter < opts.diameter_tol {
            converged = true;
            break;
        }
        if evals >= opts.max_evaluations {
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|i| centroid[i] + t * (worst.0[i] - centroid[i])).collect() };

        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = (0..n).map(|i| best[i] + 0.5 * (vertex.0[i] - best[i])).collect();
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, evaluations: evals, converged }
}

#[derive(Clone, Copy, Debug)]
pub struct CoordinateDescentOptions {
    pub initial_step: f64,
    /// Stop once the step has been halved below this.
    pub step_tol: f64,
    /// Improvements smaller than this fraction of the current value are ignored.
    pub rel_improvement: f64,
    pub max_evaluations: usize,
}

impl Default for CoordinateDescentOptions {
    fn default() -> Self {
        CoordinateDescentOptions { initial_step: 0.5, step_tol: 1e-7, rel_improvement: 4.0 * f64::EPSILON, max_evaluations: 20_000 }
    }
}

/// Compass search: try +-step along each coordinate, keep any improvement
/// above `rel_improvement` of the current value, halve the step after a sweep
/// without one.
pub fn coordinate_descent(
    f: &mut impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: CoordinateDescentOptions,
) -> Minimum {
    let mut x = x0.to_vec();
    let mut best = f(&x);
    let mut evals = 1;
    let mut step = opts.initial_step;
    while step >= opts.step_tol {
        if evals >= opts.max_evaluations {
            return Minimum { x, value: best, evaluations: evals, converged: false };
        }
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let old = x[i];
                x[i] = old + dir * step;
                let v = f(&x);
                evals += 1;
                if v < best - opts.rel_improvement * best.abs() {
                    best = v;
                    improved = true;
                    break;
                }
                x[i] = old;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Minimum { x, value: best, evaluations: evals, converged: true }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
