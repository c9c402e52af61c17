//! Double-exponential quadrature over (0, inf) parameterized by ln(alpha),
//! plus a finite-interval variant.
//!
//! The half-line rule substitutes `ln(alpha) = (pi/2) sinh(t)` and applies the
//! trapezoid rule in `t`, halving the step until successive estimates agree.
//! Integrands are supplied in log scale as functions of `ln(alpha)`, so mass
//! sitting far below the smallest positive double (as with near-degenerate
//! gamma priors) is still seen by the rule.

/// Nodes whose log-contribution falls this far under the running maximum are
/// treated as dead when expanding the integration window.
const LOG_CUTOFF: f64 = 46.0;
/// Minimum half-width of the level-0 scan in `t`.
const T_MIN_SCAN: f64 = 6.0;
/// Hard cap on |t|; ln(alpha) reaches +-4e10 here.
const T_MAX: f64 = 24.0;
const H0: f64 = 0.5;
const MAX_LEVELS: usize = 6;

#[inline]
fn ln_alpha_of(t: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 * t.sinh()
}

/// ln(d alpha / d t) = ln(alpha) + ln((pi/2) cosh t)
#[inline]
fn ln_jacobian(t: f64, ln_alpha: f64) -> f64 {
    ln_alpha + (std::f64::consts::FRAC_PI_2 * t.cosh()).ln()
}

/// Streaming log-sum-exp accumulator.
#[derive(Clone, Copy)]
struct LogAcc {
    max: f64,
    sum: f64,
}

impl LogAcc {
    fn new() -> Self {
        LogAcc {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    #[inline]
    fn add(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.max {
            self.sum += (v - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    #[inline]
    fn log_total(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

pub(crate) struct VecQuadResult {
    /// Log of each component integral.
    pub log_values: Vec<f64>,
    pub converged: bool,
}

/// Vector-valued half-line integral: component `k` is
/// `int_0^inf f_k(alpha) d alpha` with `fill(ln_alpha, buf)` writing
/// `ln f_k(alpha)` into `buf`.
///
/// All components share nodes, so the per-node work amortizes across the
/// vector. Convergence is judged on the whole vector at once.
pub(crate) fn integrate_half_line_vec<F>(dim: usize, fill: F, rel_tol: f64) -> VecQuadResult
where
    F: Fn(f64, &mut [f64]),
{
    let mut accs = vec![LogAcc::new(); dim];
    let mut buf = vec![0.0f64; dim];
    let mut node_max = f64::NEG_INFINITY;

    let eval = |t: f64, accs: &mut [LogAcc], buf: &mut [f64], node_max: &mut f64| -> f64 {
        let la = ln_alpha_of(t);
        let jac = ln_jacobian(t, la);
        fill(la, buf);
        let mut best = f64::NEG_INFINITY;
        for (acc, &lf) in accs.iter_mut().zip(buf.iter()) {
            let contrib = lf + jac;
            debug_assert!(!contrib.is_nan(), "integrand produced NaN at t={t}");
            acc.add(contrib);
            if contrib > best {
                best = contrib;
            }
        }
        if best > *node_max {
            *node_max = best;
        }
        best
    };

    // Level 0: scan outward from t = 0 at step H0.
    let mut h = H0;
    eval(0.0, &mut accs, &mut buf, &mut node_max);
    let mut i_hi: i64 = 0;
    let mut i_lo: i64 = 0;
    for dir in [1i64, -1] {
        let mut dead = 0;
        let mut i = 0i64;
        loop {
            i += dir;
            let t = i as f64 * h;
            if t.abs() > T_MAX {
                break;
            }
            let c = eval(t, &mut accs, &mut buf, &mut node_max);
            if c < node_max - LOG_CUTOFF && t.abs() >= T_MIN_SCAN {
                dead += 1;
                if dead >= 4 {
                    break;
                }
            } else {
                dead = 0;
            }
            if dir > 0 {
                i_hi = i;
            } else {
                i_lo = i;
            }
        }
    }

    let mut prev: Option<Vec<f64>> = None;
    let mut converged = false;
    for _level in 0..MAX_LEVELS {
        let values: Vec<f64> = accs
            .iter()
            .map(|a| {
                let lv = a.log_total();
                if lv == f64::NEG_INFINITY {
                    0.0
                } else {
                    (lv + h.ln()).exp()
                }
            })
            .collect();
        if let Some(p) = &prev {
            let total: f64 = values.iter().sum();
            let scale = total.abs().max(1e-300);
            let worst = values
                .iter()
                .zip(p.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if worst <= rel_tol * scale {
                converged = true;
                prev = Some(values);
                break;
            }
        }
        prev = Some(values);

        // Refine: halve the step, filling in the odd nodes.
        h *= 0.5;
        i_lo *= 2;
        i_hi *= 2;
        let mut i = i_lo + 1;
        while i < i_hi {
            eval(i as f64 * h, &mut accs, &mut buf, &mut node_max);
            i += 2;
        }
        // Re-extend at the new resolution in case the tails still contribute.
        for dir in [1i64, -1] {
            let mut dead = 0;
            loop {
                let i_next = if dir > 0 { i_hi + 1 } else { i_lo - 1 };
                let t = i_next as f64 * h;
                if t.abs() > T_MAX {
                    break;
                }
                let c = eval(t, &mut accs, &mut buf, &mut node_max);
                if dir > 0 {
                    i_hi = i_next;
                } else {
                    i_lo = i_next;
                }
                if c < node_max - LOG_CUTOFF {
                    dead += 1;
                    if dead >= 2 {
                        break;
                    }
                } else {
                    dead = 0;
                }
            }
        }
    }

    let final_vals = prev.unwrap();
    VecQuadResult {
        log_values: final_vals
            .iter()
            .map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY })
            .collect(),
        converged,
    }
}

pub(crate) struct QuadResult {
    pub value: f64,
    pub converged: bool,
}

/// Scalar half-line integral of `exp(log_f(ln_alpha))` over alpha in (0, inf).
pub(crate) fn integrate_half_line<F>(log_f: F, rel_tol: f64) -> QuadResult
where
    F: Fn(f64) -> f64,
{
    let r = integrate_half_line_vec(1, |la, buf| buf[0] = log_f(la), rel_tol);
    QuadResult {
        value: r.log_values[0].exp(),
        converged: r.converged,
    }
}

/// Finite-interval tanh-sinh rule for bounded smooth integrands in linear
/// scale. Refines the trapezoid step until successive estimates agree to
/// `rel_tol`.
pub(crate) fn integrate_finite<F>(f: F, a: f64, b: f64, rel_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let c = 0.5 * (a + b);
    let d = 0.5 * (b - a);
    let t_max = 4.5f64;

    let node = |t: f64| -> (f64, f64) {
        let s = std::f64::consts::FRAC_PI_2 * t.sinh();
        let x = c + d * s.tanh();
        let sech = 1.0 / s.cosh();
        let w = d * std::f64::consts::FRAC_PI_2 * t.cosh() * sech * sech;
        (x, w)
    };

    let mut h = 0.5f64;
    let mut sum = {
        let (x, w) = node(0.0);
        f(x) * w
    };
    let mut n_side = (t_max / h) as i64;
    for i in 1..=n_side {
        for t in [i as f64 * h, -(i as f64) * h] {
            let (x, w) = node(t);
            if w > 0.0 && x > a && x < b {
                sum += f(x) * w;
            }
        }
    }
    let mut prev = sum * h;
    for _ in 0..7 {
        h *= 0.5;
        n_side *= 2;
        let mut i = 1;
        while i <= n_side {
            for t in [i as f64 * h, -(i as f64) * h] {
                let (x, w) = node(t);
                if w > 0.0 && x > a && x < b {
                    sum += f(x) * w;
                }
            }
            i += 2;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= rel_tol * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}
