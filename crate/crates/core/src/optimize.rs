//! Derivative-free minimizers used by the ratio estimators.
//!
//! Objectives may return `f64::INFINITY` (or NaN, treated as +∞) for
//! infeasible points.

use crate::prelude::*;

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_evals: usize,
    /// Relative spread of simplex values at which iteration stops.
    pub ftol: f64,
    /// Initial edge length of the simplex.
    pub step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_evals: 2000,
            ftol: 1e-12,
            step: 0.1,
        }
    }
}

impl NelderMead {
    /// Adaptive Nelder–Mead (coefficients scaled with dimension).
    pub fn minimize(&self, mut f: impl FnMut(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            sanitize(f(x))
        };
        if n == 0 {
            let v = eval(x0, &mut evals);
            return Minimum {
                x: Vec::new(),
                value: v,
                evaluations: evals,
                converged: true,
            };
        }
        let nf = n as f64;
        let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut x = x0.to_vec();
            let h = if x[i].abs() > 1e-8 { self.step * x[i].abs().max(1.0) } else { self.step };
            x[i] += h;
            simplex.push(x);
        }
        let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();
        let mut converged = false;

        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let best = values[0];
            let worst = values[n];
            if worst.is_finite() && (worst - best).abs() <= self.ftol * (best.abs() + 1e-300) {
                converged = true;
                break;
            }

            let mut centroid = vec![0.0; n];
            for x in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < values[0] {
                let xe = along(beta);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let xc = along(gamma);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-gamma);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            // shrink towards the best vertex
            let x_best = simplex[0].clone();
            for i in 1..=n {
                for (xi, bi) in simplex[i].iter_mut().zip(&x_best) {
                    *xi = bi + delta * (*xi - bi);
                }
                values[i] = eval(&simplex[i], &mut evals);
            }
        }

        let (mut bi, mut bv) = (0, values[0]);
        for (i, &v) in values.iter().enumerate() {
            if v < bv {
                bi = i;
                bv = v;
            }
        }
        Minimum {
            x: simplex.swap_remove(bi),
            value: bv,
            evaluations: evals,
            converged,
        }
    }
}

/// Pattern search along coordinate axes with halving steps.
pub fn coordinate_refine(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    f0: f64,
    initial_step: f64,
    min_step: f64,
    max_evals: usize,
) -> Minimum {
    let mut x = x0.to_vec();
    let mut fx = sanitize(f0);
    let mut step = initial_step;
    let mut evals = 0;
    while step > min_step && evals < max_evals {
        let mut improved = false;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                let old = x[i];
                x[i] = old + sign * step;
                let v = sanitize(f(&x));
                evals += 1;
                if v < fx {
                    fx = v;
                    improved = true;
                    break;
                }
                x[i] = old;
            }
            if evals >= max_evals {
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Minimum {
        x,
        value: fx,
        evaluations: evals,
        converged: step <= min_step,
    }
}

/// Golden-section search for a minimum of a unimodal function on [a, b].
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = sanitize(f(x1));
    let mut f2 = sanitize(f(x2));
    while (b - a).abs() > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = sanitize(f(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = sanitize(f(x2));
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Scans `g` on `grid` and polishes the best bracket with golden section.
pub fn grid_then_golden(mut g: impl FnMut(f64) -> f64, grid: &[f64], tol: f64) -> (f64, f64) {
    let vals: Vec<f64> = grid.iter().map(|&t| sanitize(g(t))).collect();
    let mut k = 0;
    for i in 1..vals.len() {
        if vals[i] < vals[k] {
            k = i;
        }
    }
    if grid.len() < 3 {
        return (grid[k], vals[k]);
    }
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let (t, v) = golden_section(&mut g, lo, hi, tol);
    if v < vals[k] {
        (t, v)
    } else {
        (grid[k], vals[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nelder_mead_finds_rosenbrock_minimum() {
        let nm = NelderMead {
            max_evals: 5000,
            ftol: 1e-16,
            step: 0.5,
        };
        let m = nm.minimize(rosenbrock, &[-1.2, 1.0]);
        assert!(m.value < 1e-10, "{}", m.value);
        assert!((m.x[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn nelder_mead_handles_infeasible_region() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 2.0).powi(2) + x[1] * x[1] };
        let m = NelderMead::default().minimize(f, &[0.5, 0.5]);
        assert!((m.x[0] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn coordinate_refine_polishes_quadratic() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.7).powi(2);
        let m = coordinate_refine(f, &[0.0, 0.0], f(&[0.0, 0.0]), 0.5, 1e-9, 10_000);
        assert!(m.value < 1e-15);
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, v) = golden_section(|t| (t - 1.25).powi(2) + 3.0, -4.0, 4.0, 1e-10);
        assert!((x - 1.25).abs() < 1e-6);
        assert!((v - 3.0).abs() < 1e-14);
    }
}
