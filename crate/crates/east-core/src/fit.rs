//! Curve fitting: ordinary least squares (linear, power-law) with
//! t-distribution confidence intervals, and a small Levenberg-Marquardt
//! driver for Lorentzian and Gaussian shapes.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{EastError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    Linear,
    PowerLaw,
    Lorentzian,
    Gaussian,
}

/// Fitted parameters with 95% confidence intervals (one per parameter) and
/// the root-mean-square residual.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<f64>,
    pub ci95: Vec<f64>,
    pub residual: f64,
}

pub(crate) fn t_quantile_975(dof: usize) -> f64 {
    if dof == 0 {
        return f64::INFINITY;
    }
    StudentsT::new(0.0, 1.0, dof as f64)
        .expect("valid dof")
        .inverse_cdf(0.975)
}

/// Ordinary least squares line `y = intercept + slope x`.
///
/// `params = [intercept, slope]`.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<FitResult> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(EastError::TooFewSizes { needed: 3, got: n });
    }
    let nf = n as f64;
    let x_mean = x.iter().sum::<f64>() / nf;
    let y_mean = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&v| (v - x_mean) * (v - x_mean)).sum();
    if sxx <= 0.0 {
        return Err(EastError::SingularDesign);
    }
    let sxy: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(&a, &b)| (a - x_mean) * (b - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rss: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(&a, &b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let dof = n - 2;
    let s2 = rss / dof as f64;
    let t = t_quantile_975(dof);
    let se_slope = (s2 / sxx).sqrt();
    let se_intercept = (s2 * (1.0 / nf + x_mean * x_mean / sxx)).sqrt();
    Ok(FitResult {
        model: FitModel::Linear,
        params: vec![intercept, slope],
        ci95: vec![t * se_intercept, t * se_slope],
        residual: (rss / nf).sqrt(),
    })
}

/// Power law `y = amplitude * x^exponent`, fit in log-log space.
///
/// `params = [amplitude, exponent]`; the amplitude interval is the mapped
/// log-amplitude interval.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<FitResult> {
    if x.iter().chain(y.iter()).any(|&v| v <= 0.0) {
        return Err(EastError::NonPositiveData);
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let lin = fit_linear(&lx, &ly)?;
    let amplitude = lin.params[0].exp();
    let exponent = lin.params[1];
    Ok(FitResult {
        model: FitModel::PowerLaw,
        params: vec![amplitude, exponent],
        ci95: vec![amplitude * (lin.ci95[0].exp() - 1.0), lin.ci95[1]],
        residual: lin.residual,
    })
}

/// Coefficient of determination of a prediction.
pub fn r_squared(y: &[f64], predicted: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let tss: f64 = y.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let rss: f64 = y
        .iter()
        .zip(predicted.iter())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    if tss == 0.0 {
        return if rss == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - rss / tss
}

fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn invert_small(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve_small(a.to_vec(), e)?);
    }
    let mut inv = vec![vec![0.0; n]; n];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Levenberg-Marquardt over a model `f(params, x) -> (value, d value/d params)`.
/// Returns (params, rss, converged).
pub fn levenberg_marquardt<F>(
    model: F,
    x: &[f64],
    y: &[f64],
    p0: &[f64],
    max_iter: usize,
) -> (Vec<f64>, f64, bool)
where
    F: Fn(&[f64], f64) -> (f64, Vec<f64>),
{
    let np = p0.len();
    let mut p = p0.to_vec();
    let rss_of = |p: &[f64]| -> f64 {
        x.iter()
            .zip(y.iter())
            .map(|(&xi, &yi)| {
                let (v, _) = model(p, xi);
                (v - yi) * (v - yi)
            })
            .sum()
    };
    let mut rss = rss_of(&p);
    let mut lambda = 1e-3;
    let mut converged = false;

    for _ in 0..max_iter {
        // assemble J^T J and J^T r
        let mut jtj = vec![vec![0.0; np]; np];
        let mut jtr = vec![0.0; np];
        for (&xi, &yi) in x.iter().zip(y.iter()) {
            let (v, g) = model(&p, xi);
            let r = yi - v;
            for a in 0..np {
                jtr[a] += g[a] * r;
                for b in 0..np {
                    jtj[a][b] += g[a] * g[b];
                }
            }
        }
        let mut stepped = false;
        for _ in 0..16 {
            let mut damped = jtj.clone();
            for (a, row) in damped.iter_mut().enumerate() {
                row[a] += lambda * jtj[a][a].max(1e-12);
            }
            if let Some(step) = solve_small(damped, jtr.clone()) {
                let p_new: Vec<f64> = p.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
                let rss_new = rss_of(&p_new);
                if rss_new.is_finite() && rss_new < rss {
                    let rel = (rss - rss_new) / rss.max(1e-300);
                    p = p_new;
                    rss = rss_new;
                    lambda = (lambda * 0.3).max(1e-12);
                    stepped = true;
                    if rel < 1e-12 {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= 8.0;
        }
        if converged || !stepped {
            converged = converged || stepped;
            break;
        }
    }
    (p, rss, converged)
}

fn lm_confidence(
    model: impl Fn(&[f64], f64) -> (f64, Vec<f64>),
    x: &[f64],
    p: &[f64],
    rss: f64,
) -> Vec<f64> {
    let np = p.len();
    let n = x.len();
    if n <= np {
        return vec![f64::INFINITY; np];
    }
    let mut jtj = vec![vec![0.0; np]; np];
    for &xi in x {
        let (_, g) = model(p, xi);
        for a in 0..np {
            for b in 0..np {
                jtj[a][b] += g[a] * g[b];
            }
        }
    }
    let s2 = rss / (n - np) as f64;
    let t = t_quantile_975(n - np);
    match invert_small(&jtj) {
        Some(cov) => (0..np)
            .map(|a| t * (cov[a][a].max(0.0) * s2).sqrt())
            .collect(),
        None => vec![f64::INFINITY; np],
    }
}

/// Lorentzian `(z/pi) gamma / ((x - x0)^2 + gamma^2)`;
/// params `[x0, gamma, z]`.
pub fn lorentzian(p: &[f64], x: f64) -> (f64, Vec<f64>) {
    let (x0, gamma, z) = (p[0], p[1], p[2]);
    let dx = x - x0;
    let d = dx * dx + gamma * gamma;
    let v = z / std::f64::consts::PI * gamma / d;
    let dv_dx0 = z / std::f64::consts::PI * gamma * 2.0 * dx / (d * d);
    let dv_dgamma = z / std::f64::consts::PI * (dx * dx - gamma * gamma) / (d * d);
    let dv_dz = gamma / (std::f64::consts::PI * d);
    (v, vec![dv_dx0, dv_dgamma, dv_dz])
}

/// Gaussian `amp exp(-(x - mean)^2 / (2 sigma^2))`;
/// params `[amp, mean, sigma]`.
pub fn gaussian(p: &[f64], x: f64) -> (f64, Vec<f64>) {
    let (amp, mean, sigma) = (p[0], p[1], p[2]);
    let u = (x - mean) / sigma;
    let e = (-0.5 * u * u).exp();
    let v = amp * e;
    (
        v,
        vec![e, amp * e * u / sigma, amp * e * u * u / sigma],
    )
}

/// Fit a Lorentzian to (x, y); initial guess from the peak and half-width.
pub fn fit_lorentzian_curve(x: &[f64], y: &[f64]) -> Result<FitResult> {
    let p0 = lorentzian_guess(x, y)?;
    let (mut p, rss, _converged) = levenberg_marquardt(lorentzian, x, y, &p0, 200);
    p[1] = p[1].abs(); // gamma enters squared, fold the sign
    p[2] = p[2].abs();
    let ci = lm_confidence(lorentzian, x, &p, rss);
    Ok(FitResult {
        model: FitModel::Lorentzian,
        params: p,
        ci95: ci,
        residual: (rss / x.len() as f64).sqrt(),
    })
}

pub(crate) fn lorentzian_guess(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let (k_max, &peak) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .ok_or(EastError::NoPeak)?;
    if !(peak > 0.0) {
        return Err(EastError::NoPeak);
    }
    let x0 = x[k_max];
    // half-width at half maximum from the nearest crossings
    let half = peak / 2.0;
    let mut left = x[0];
    for k in (0..k_max).rev() {
        if y[k] <= half {
            left = x[k];
            break;
        }
    }
    let mut right = x[x.len() - 1];
    for k in k_max..x.len() {
        if y[k] <= half {
            right = x[k];
            break;
        }
    }
    let gamma = (0.5 * (right - left)).max(1e-6);
    let z = peak * std::f64::consts::PI * gamma;
    Ok(vec![x0, gamma, z])
}

/// Fit a Gaussian pdf-like bump to (x, y) with moment-based initialization.
pub fn fit_gaussian_curve(x: &[f64], y: &[f64]) -> Result<FitResult> {
    let total: f64 = y.iter().sum();
    if !(total > 0.0) {
        return Err(EastError::NoPeak);
    }
    let mean: f64 = x.iter().zip(y.iter()).map(|(&a, &b)| a * b).sum::<f64>() / total;
    let var: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(&a, &b)| (a - mean) * (a - mean) * b)
        .sum::<f64>()
        / total;
    let sigma = var.sqrt().max(1e-9);
    let amp = y.iter().cloned().fold(f64::MIN, f64::max);
    let (mut p, rss, _converged) =
        levenberg_marquardt(gaussian, x, y, &[amp, mean, sigma], 200);
    p[2] = p[2].abs();
    let ci = lm_confidence(gaussian, x, &p, rss);
    Ok(FitResult {
        model: FitModel::Gaussian,
        params: p,
        ci95: ci,
        residual: (rss / x.len() as f64).sqrt(),
    })
}

/// Kolmogorov-Smirnov distance between sorted samples and a normal CDF.
pub fn ks_distance_to_normal(sorted: &[f64], mean: f64, sigma: f64) -> f64 {
    let n = sorted.len() as f64;
    let cdf = |v: f64| 0.5 * (1.0 + statrs::function::erf::erf((v - mean) / (sigma * 2f64.sqrt())));
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (f - lo).abs().max((hi - f).abs())
        })
        .fold(0.0, f64::max)
}
