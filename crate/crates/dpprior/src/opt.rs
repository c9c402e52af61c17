//! Small dense optimizers: a Nelder-Mead simplex for the KL fits and a
//! damped Newton iteration for low-dimensional root finding.

pub(crate) struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Classic Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) on an unconstrained parameter vector.
pub(crate) fn nelder_mead<F>(
    f: F,
    start: &[f64],
    step: f64,
    tol: f64,
    max_iter: usize,
) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let d = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    simplex.push(start.to_vec());
    for i in 0..d {
        let mut v = start.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        // order best..worst
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = idx[0];
        let worst = idx[d];
        let second_worst = idx[d - 1];

        if (values[worst] - values[best]).abs() <= tol * (1.0 + values[best].abs()) {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; d];
        for &i in idx.iter().take(d) {
            for j in 0..d {
                centroid[j] += simplex[i][j] / d as f64;
            }
        }
        let blend = |from: &[f64], coeff: f64| -> Vec<f64> {
            (0..d)
                .map(|j| centroid[j] + coeff * (from[j] - centroid[j]))
                .collect()
        };

        let reflected = blend(&simplex[worst], -1.0);
        let f_reflected = f(&reflected);
        if f_reflected < values[best] {
            let expanded = blend(&simplex[worst], -2.0);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            let contracted = if f_reflected < values[worst] {
                blend(&reflected, 0.5)
            } else {
                blend(&simplex[worst], 0.5)
            };
            let f_contracted = f(&contracted);
            if f_contracted < values[worst].min(f_reflected) {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // shrink toward best
                for &i in idx.iter().skip(1) {
                    for j in 0..d {
                        simplex[i][j] = 0.5 * (simplex[i][j] + simplex[best][j]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let (arg_best, &value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    SimplexResult {
        x: simplex[arg_best].clone(),
        value,
        iterations,
        converged,
    }
}

pub(crate) struct NewtonResult {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Newton with a central-difference Jacobian and backtracking line
/// search, for 1 or 2 unknowns.
pub(crate) fn damped_newton<F>(f: F, x0: &[f64], tol: f64, max_iter: usize) -> NewtonResult
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let d = x0.len();
    assert!(d == 1 || d == 2, "damped_newton supports 1 or 2 unknowns");
    let norm = |r: &[f64]| r.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        if norm(&r) <= tol {
            return NewtonResult {
                x,
                residual_norm: norm(&r),
                iterations,
                converged: true,
            };
        }
        // central-difference Jacobian
        let h = 1e-6;
        let mut jac = vec![vec![0.0; d]; d];
        for j in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let rp = f(&xp);
            let rm = f(&xm);
            for i in 0..d {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let delta = match d {
            1 => {
                if jac[0][0] == 0.0 {
                    break;
                }
                vec![r[0] / jac[0][0]]
            }
            _ => {
                let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                if det.abs() < 1e-300 {
                    break;
                }
                vec![
                    (r[0] * jac[1][1] - r[1] * jac[0][1]) / det,
                    (r[1] * jac[0][0] - r[0] * jac[1][0]) / det,
                ]
            }
        };
        // backtracking
        let r_norm = norm(&r);
        let mut t = 1.0;
        let mut moved = false;
        while t >= 1.0 / 1024.0 {
            let cand: Vec<f64> = (0..d).map(|j| x[j] - t * delta[j]).collect();
            let rc = f(&cand);
            if norm(&rc) < r_norm {
                x = cand;
                r = rc;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let residual_norm = norm(&r);
    NewtonResult {
        converged: residual_norm <= tol,
        x,
        residual_norm,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2) + 2.0;
        let r = nelder_mead(f, &[0.0, 0.0], 0.5, 1e-12, 500);
        assert!(r.converged);
        assert!((r.x[0] - 1.5).abs() < 1e-5 && (r.x[1] + 0.5).abs() < 1e-5);
        assert!((r.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn simplex_handles_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], 0.5, 1e-14, 2000);
        assert!((r.x[0] - 1.0).abs() < 1e-4, "{:?}", r.x);
        assert!((r.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn newton_solves_two_by_two() {
        // x^2 + y = 3, x + y^2 = 5 has a root near (1.09, 1.81) ... solve and verify
        let f = |x: &[f64]| vec![x[0] * x[0] + x[1] - 3.0, x[0] + x[1] * x[1] - 5.0];
        let r = damped_newton(f, &[1.0, 1.0], 1e-12, 50);
        assert!(r.converged);
        let res = f(&r.x);
        assert!(res[0].abs() < 1e-12 && res[1].abs() < 1e-12);
    }

    #[test]
    fn newton_scalar() {
        let f = |x: &[f64]| vec![x[0].exp() - 2.0];
        let r = damped_newton(f, &[0.0], 1e-13, 50);
        assert!(r.converged);
        assert!((r.x[0] - 2.0f64.ln()).abs() < 1e-12);
    }
}
