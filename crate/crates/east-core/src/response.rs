//! Boundary response: spectral function of the edge pi-pulse perturbation
//! and the Lorentzian edge-mode fit.
//!
//! The perturbation is O = -i sigma^y_L, the pi pulse that turns the
//! polarized ansatz into the edge-mode ansatz. The retarded Green's function
//! of O over the ground state gives, in Lehmann form with broadening eta,
//!
//!   A(w) = (1/pi) sum_n |<Psi_n|O|GS>|^2 eta / ((w + E_GS - E_n)^2 + eta^2).

use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;
use num_complex::Complex64;

use crate::eigen::EigenDecomposition;
use crate::error::{EastError, Result};
use crate::fit::{self, FitResult};
use crate::operators::{apply_pi_pulse_y, OperatorMatrix};

/// A(omega) on a grid, with the broadening used.
#[derive(Debug, Clone)]
pub struct SpectralCurve {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub eta: f64,
}

impl SpectralCurve {
    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        self.omega
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| 0.5 * (v[0] + v[1]) * (w[1] - w[0]))
            .sum()
    }

    pub fn peak(&self) -> (f64, f64) {
        let (k, &v) = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("non-empty curve");
        (self.omega[k], v)
    }
}

/// Lorentzian edge-mode parameters from Eq.-of-motion form
/// `A(w) ~ (Z/pi) Gamma / ((w - w0)^2 + Gamma^2)`.
#[derive(Debug, Clone)]
pub struct EdgeModeFit {
    pub omega0: f64,
    pub gamma: f64,
    pub weight: f64,
    pub residual: f64,
    pub window: (f64, f64),
}

/// Lehmann spectral function of the edge perturbation over eigenstate
/// `gs_index` (normally the ground state).
pub fn greens_spectral(
    decomp: &EigenDecomposition,
    gs_index: usize,
    omega: &[f64],
    eta: f64,
) -> Result<SpectralCurve> {
    if eta <= 0.0 {
        return Err(EastError::NonPositiveBroadening(eta));
    }
    if !decomp.is_complete() {
        return Err(EastError::PartialDecomposition);
    }
    let dim = decomp.dim();
    let l = dim.trailing_zeros() as usize;
    let gs: Vec<f64> = decomp.vector(gs_index).iter().copied().collect();
    let e_gs = decomp.eigenvalue(gs_index);
    let perturbed = apply_pi_pulse_y(&gs, l, l);

    // weights |<Psi_n|O|GS>|^2
    let pert_view = Array1::from_vec(perturbed);
    let weights: Vec<f64> = (0..decomp.len())
        .map(|n| {
            let w: f64 = decomp
                .vector(n)
                .iter()
                .zip(pert_view.iter())
                .map(|(a, b)| a * b)
                .sum();
            w * w
        })
        .collect();

    let values: Vec<f64> = omega
        .iter()
        .map(|&w| {
            let mut acc = 0.0;
            for (&wt, &e_n) in weights.iter().zip(decomp.eigenvalues().iter()) {
                let d = w + e_gs - e_n;
                acc += wt * eta / (d * d + eta * eta);
            }
            acc / std::f64::consts::PI
        })
        .collect();

    Ok(SpectralCurve {
        omega: omega.to_vec(),
        values,
        eta,
    })
}

/// Default grid for the edge response: covers all excitation energies of the
/// decomposition with margin, spacing fine enough to resolve `eta`.
pub fn default_omega_grid(decomp: &EigenDecomposition, gs_index: usize, eta: f64) -> Vec<f64> {
    let e_gs = decomp.eigenvalue(gs_index);
    let top = decomp.eigenvalues().last().copied().unwrap_or(e_gs);
    let bandwidth = top - e_gs;
    let lo = -0.25 * bandwidth - 10.0 * eta;
    let hi = 1.25 * bandwidth + 10.0 * eta;
    let step = (eta / 4.0).min(bandwidth / 400.0).max(1e-4);
    let count = ((hi - lo) / step).ceil() as usize + 1;
    (0..count).map(|k| lo + step * k as f64).collect()
}

/// Direct resolvent evaluation
/// `-Im <GS|O^t (w + i eta + E_GS - H)^{-1} O|GS> / pi` by a dense complex
/// solve; cross-check for the Lehmann form at small sizes.
pub fn resolvent_spectral_value(
    h: &OperatorMatrix,
    gs: &[f64],
    e_gs: f64,
    omega: f64,
    eta: f64,
) -> Result<f64> {
    if eta <= 0.0 {
        return Err(EastError::NonPositiveBroadening(eta));
    }
    let n = h.dim();
    let l = n.trailing_zeros() as usize;
    let rhs_re = apply_pi_pulse_y(gs, l, l);
    let dense = h.to_dense();
    let shift = Complex64::new(omega + e_gs, eta);
    let mut a = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            a[[i, j]] = Complex64::new(-dense[[i, j]], 0.0);
        }
        a[[i, i]] += shift;
    }
    let b = Array1::from_iter(rhs_re.iter().map(|&x| Complex64::new(x, 0.0)));
    let x = a.solve(&b)?;
    let g: Complex64 = b.iter().zip(x.iter()).map(|(r, v)| r.conj() * v).sum();
    Ok(-g.im / std::f64::consts::PI)
}

/// Fit the Lorentzian form over a window of peak +- 3 half-widths.
pub fn fit_lorentzian(curve: &SpectralCurve) -> Result<EdgeModeFit> {
    let guess = fit::lorentzian_guess(&curve.omega, &curve.values)?;
    let (omega0_guess, hwhm) = (guess[0], guess[1]);
    let window = (omega0_guess - 3.0 * hwhm, omega0_guess + 3.0 * hwhm);
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .omega
        .iter()
        .zip(curve.values.iter())
        .filter(|(&w, _)| w >= window.0 && w <= window.1)
        .map(|(&w, &v)| (w, v))
        .unzip();
    if xs.len() < 8 {
        return Err(EastError::NoPeak);
    }
    let fit = fit::fit_lorentzian_curve(&xs, &ys)?;
    Ok(EdgeModeFit {
        omega0: fit.params[0],
        gamma: fit.params[1],
        weight: fit.params[2],
        residual: fit.residual,
        window,
    })
}

/// Convenience wrapper returning the raw [`FitResult`] as well.
pub fn fit_lorentzian_full(curve: &SpectralCurve) -> Result<(EdgeModeFit, FitResult)> {
    let guess = fit::lorentzian_guess(&curve.omega, &curve.values)?;
    let (omega0_guess, hwhm) = (guess[0], guess[1]);
    let window = (omega0_guess - 3.0 * hwhm, omega0_guess + 3.0 * hwhm);
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .omega
        .iter()
        .zip(curve.values.iter())
        .filter(|(&w, _)| w >= window.0 && w <= window.1)
        .map(|(&w, &v)| (w, v))
        .unzip();
    let fit = fit::fit_lorentzian_curve(&xs, &ys)?;
    Ok((
        EdgeModeFit {
            omega0: fit.params[0],
            gamma: fit.params[1],
            weight: fit.params[2],
            residual: fit.residual,
            window,
        },
        fit,
    ))
}
