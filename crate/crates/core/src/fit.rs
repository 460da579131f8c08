//! Least-squares fit of `A e^{-(τ/τ_c)²} cos(ωτ + φ) + c` to a sampled
//! oscillation. For fixed `(τ_c, ω)` the model is linear in
//! `(A cos φ, -A sin φ, c)`, so only the two nonlinear parameters are
//! searched (Nelder–Mead on `(ln τ_c, ω)`).

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, tolerance, Result};

/// Fitted Gaussian-damped oscillation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub amplitude: f64,
    /// 1/e time of the envelope.
    pub tau_c: f64,
    pub omega: f64,
    pub phase: f64,
    pub offset: f64,
    pub rms_residual: f64,
}

impl EnvelopeFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (-(t / self.tau_c).powi(2)).exp() * (self.omega * t + self.phase).cos() + self.offset
    }
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            let pivot_row = a[col];
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Best linear coefficients and residual sum of squares for fixed `(τ_c, ω)`.
fn project(times: &[f64], values: &[f64], tau_c: f64, omega: f64) -> Option<([f64; 3], f64)> {
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (&t, &y) in times.iter().zip(values) {
        let env = (-(t / tau_c).powi(2)).exp();
        let basis = [env * (omega * t).cos(), env * (omega * t).sin(), 1.0];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += basis[i] * basis[j];
            }
            atb[i] += basis[i] * y;
        }
    }
    let coef = solve3(ata, atb)?;
    let rss = times
        .iter()
        .zip(values)
        .map(|(&t, &y)| {
            let env = (-(t / tau_c).powi(2)).exp();
            let m = env * (coef[0] * (omega * t).cos() + coef[1] * (omega * t).sin()) + coef[2];
            (y - m).powi(2)
        })
        .sum();
    Some((coef, rss))
}

/// Angular frequency from the mean spacing of mean-level crossings.
fn crossing_frequency(times: &[f64], values: &[f64]) -> Option<f64> {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut crossings = Vec::new();
    for k in 1..values.len() {
        let (a, b) = (values[k - 1] - mean, values[k] - mean);
        if a == 0.0 || a.signum() != b.signum() {
            let f = if a == b { 0.0 } else { a / (a - b) };
            crossings.push(times[k - 1] + f * (times[k] - times[k - 1]));
        }
    }
    if crossings.len() < 3 {
        return None;
    }
    // use the early crossings, where the oscillation is still strong
    let take = crossings.len().min(12);
    let span = crossings[take - 1] - crossings[0];
    Some(core::f64::consts::PI * (take - 1) as f64 / span)
}

fn nelder_mead(f: &dyn Fn([f64; 2]) -> f64, start: [f64; 2], step: [f64; 2], iters: usize) -> ([f64; 2], f64) {
    let mut simplex = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut vals = simplex.map(f);
    for _ in 0..iters {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        simplex = order.map(|i| simplex[i]);
        vals = order.map(|i| vals[i]);
        let spread = (vals[2] - vals[0]).abs();
        if spread <= 1e-15 * vals[0].abs().max(1e-300) {
            break;
        }
        let c = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let along = |s: f64| [c[0] + s * (simplex[2][0] - c[0]), c[1] + s * (simplex[2][1] - c[1])];
        let r = along(-1.0);
        let fr = f(r);
        if fr < vals[0] {
            let e = along(-2.0);
            let fe = f(e);
            if fe < fr {
                simplex[2] = e;
                vals[2] = fe;
            } else {
                simplex[2] = r;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            simplex[2] = r;
            vals[2] = fr;
        } else {
            let k = if fr < vals[2] { along(-0.5) } else { along(0.5) };
            let fk = f(k);
            if fk < vals[2].min(fr) {
                simplex[2] = k;
                vals[2] = fk;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        simplex[0][0] + 0.5 * (simplex[i][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[i][1] - simplex[0][1]),
                    ];
                    vals[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    (simplex[best], vals[best])
}

/// Fits the damped oscillation to `values` sampled at `times`.
///
/// The envelope time is seeded from a coarse scan over `[span/50, 5 span]`
/// and the frequency from mean-level crossings.
pub fn fit_gaussian_envelope(times: &[f64], values: &[f64]) -> Result<EnvelopeFit> {
    if times.len() != values.len() || times.len() < 8 {
        return Err(domain!("envelope fit needs at least 8 paired samples"));
    }
    if values.iter().chain(times).any(|v| !v.is_finite()) {
        return Err(domain!("envelope fit input contains non-finite values"));
    }
    let span = times[times.len() - 1] - times[0];
    if !(span > 0.0) {
        return Err(domain!("envelope fit needs an increasing time grid"));
    }
    let omega0 = crossing_frequency(times, values).ok_or_else(|| tolerance!("too few oscillations to seed the fit"))?;
    let cost = |p: [f64; 2]| project(times, values, p[0].exp(), p[1]).map_or(f64::INFINITY, |(_, rss)| rss);

    let mut best = ([0.0, omega0], f64::INFINITY);
    for k in 0..=60 {
        let ln_tau = (span / 50.0).ln() + (250.0f64).ln() * k as f64 / 60.0;
        let c = cost([ln_tau, omega0]);
        if c < best.1 {
            best = ([ln_tau, omega0], c);
        }
    }
    let mut point = best.0;
    for _ in 0..4 {
        point = nelder_mead(&cost, point, [0.1, 0.02 * omega0], 2000).0;
    }
    let tau_c = point[0].exp();
    let (coef, rss) = project(times, values, tau_c, point[1]).ok_or_else(|| tolerance!("envelope fit is singular"))?;
    let amplitude = coef[0].hypot(coef[1]);
    Ok(EnvelopeFit {
        amplitude,
        tau_c,
        omega: point[1],
        phase: (-coef[1]).atan2(coef[0]),
        offset: coef[2],
        rms_residual: (rss / times.len() as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::uniform_grid;

    #[test]
    fn recovers_synthetic_parameters() {
        let t = uniform_grid(0.0, 4.0, 800);
        let truth = EnvelopeFit { amplitude: 0.5, tau_c: 1.3, omega: 9.7, phase: 0.2, offset: 0.5, rms_residual: 0.0 };
        let y: Vec<f64> = t.iter().map(|&s| truth.eval(s)).collect();
        let fit = fit_gaussian_envelope(&t, &y).unwrap();
        assert!((fit.tau_c - 1.3).abs() < 1e-6, "{:?}", fit);
        assert!((fit.omega - 9.7).abs() < 1e-6);
        assert!((fit.amplitude - 0.5).abs() < 1e-6);
        assert!(fit.rms_residual < 1e-8);
    }

    #[test]
    fn rejects_short_input() {
        assert!(fit_gaussian_envelope(&[0.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
