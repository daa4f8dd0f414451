//! Quench dynamics by spectral decomposition: time evolution, survival
//! probability, the site-averaged X magnetization, and the Heisenberg time.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::basis::SpinBasis;
use crate::eigen::EigenDecomposition;
use crate::error::{EastError, Result};
use crate::state::{BasisTag, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Logarithmic,
}

/// Strictly increasing evaluation times.
#[derive(Debug, Clone)]
pub struct TimeGrid {
    times: Vec<f64>,
    spacing: Spacing,
}

impl TimeGrid {
    pub fn linear(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(start >= 0.0) || !(stop > start) || points < 2 {
            return Err(EastError::InvalidTimeGrid(format!(
                "linear({start}, {stop}, {points})"
            )));
        }
        let times = (0..points)
            .map(|k| start + (stop - start) * k as f64 / (points - 1) as f64)
            .collect();
        Ok(Self {
            times,
            spacing: Spacing::Linear,
        })
    }

    pub fn logarithmic(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(start > 0.0) || !(stop > start) || points < 2 {
            return Err(EastError::InvalidTimeGrid(format!(
                "logarithmic({start}, {stop}, {points})"
            )));
        }
        let (a, b) = (start.ln(), stop.ln());
        let times = (0..points)
            .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
            .collect();
        Ok(Self {
            times,
            spacing: Spacing::Logarithmic,
        })
    }

    /// Default window for survival plots: logarithmic from 0.1 to ten
    /// Heisenberg times, 400 points.
    pub fn default_for(t_heisenberg: f64) -> Result<Self> {
        Self::logarithmic(1e-1, 10.0 * t_heisenberg, 400)
    }

    pub fn from_times(times: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if times.len() < 1
            || times[0] < 0.0
            || times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(EastError::InvalidTimeGrid("not strictly increasing".into()));
        }
        Ok(Self { times, spacing })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn require_complete(decomp: &EigenDecomposition) -> Result<()> {
    if !decomp.is_complete() {
        return Err(EastError::PartialDecomposition);
    }
    Ok(())
}

/// `e^{-iHt}|psi>` through the eigendecomposition.
pub fn evolve(state: &PureState, decomp: &EigenDecomposition, t: f64) -> Result<PureState> {
    require_complete(decomp)?;
    let coeffs = decomp.project(state);
    let phased: Vec<Complex64> = coeffs
        .iter()
        .zip(decomp.eigenvalues().iter())
        .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t))
        .collect();
    // psi(t) = V (c .* phases); split into real and imaginary gemv
    let re = Array1::from_iter(phased.iter().map(|z| z.re));
    let im = Array1::from_iter(phased.iter().map(|z| z.im));
    let vre = decomp.vectors().dot(&re);
    let vim = decomp.vectors().dot(&im);
    let amps = Array1::from_iter(
        vre.iter()
            .zip(vim.iter())
            .map(|(&a, &b)| Complex64::new(a, b)),
    );
    PureState::normalized(amps, BasisTag::Z)
}

/// States at every grid time, as columns of an (N x T) complex matrix.
/// One real matrix product per real/imaginary part.
pub fn evolve_grid(
    state: &PureState,
    decomp: &EigenDecomposition,
    grid: &TimeGrid,
) -> Result<Array2<Complex64>> {
    require_complete(decomp)?;
    let coeffs = decomp.project(state);
    let n = decomp.len();
    let t_len = grid.len();
    let mut phased_re = Array2::zeros((n, t_len));
    let mut phased_im = Array2::zeros((n, t_len));
    for (j, &t) in grid.times().iter().enumerate() {
        for (k, (&e, c)) in decomp
            .eigenvalues()
            .iter()
            .zip(coeffs.iter())
            .enumerate()
        {
            let z = c * Complex64::from_polar(1.0, -e * t);
            phased_re[[k, j]] = z.re;
            phased_im[[k, j]] = z.im;
        }
    }
    let vre = decomp.vectors().dot(&phased_re);
    let vim = decomp.vectors().dot(&phased_im);
    Ok(Array2::from_shape_fn((decomp.dim(), t_len), |(i, j)| {
        Complex64::new(vre[[i, j]], vim[[i, j]])
    }))
}

/// Survival probability `R(t) = |sum_n w_n e^{-iE_n t}|^2` from the overlap
/// weights `w_n = |<Psi_n|psi>|^2` (no state reassembly).
pub fn survival_probability(
    state: &PureState,
    decomp: &EigenDecomposition,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    require_complete(decomp)?;
    let weights = decomp.overlap_weights(state);
    Ok(grid
        .times()
        .iter()
        .map(|&t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&w, &e) in weights.iter().zip(decomp.eigenvalues().iter()) {
                acc += w * Complex64::from_polar(1.0, -e * t);
            }
            acc.norm_sqr()
        })
        .collect())
}

/// Infinite-time average of the survival probability, `sum_n w_n^2`
/// (non-degenerate spectrum).
pub fn survival_infinite_time_average(state: &PureState, decomp: &EigenDecomposition) -> f64 {
    decomp
        .overlap_weights(state)
        .iter()
        .map(|w| w * w)
        .sum()
}

/// Trajectory of the site-averaged X magnetization
/// `<sum_j sigma^x_j>(t) / L`.
pub fn mean_sx_trajectory(
    state: &PureState,
    decomp: &EigenDecomposition,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    let states = evolve_grid(state, decomp, grid)?;
    let dim = decomp.dim();
    let l = dim.trailing_zeros() as usize;
    let basis = SpinBasis::new(l)?;
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let col = states.column(j);
        let mut total = 0.0;
        for site in 1..=l {
            let mask = basis.site_mask(site);
            let mut acc = 0.0;
            for c in 0..dim {
                acc += (col[c].conj() * col[c ^ mask]).re;
            }
            total += acc;
        }
        out.push(total / l as f64);
    }
    Ok(out)
}

/// Heisenberg time `2 pi / mean spacing` over the middle 50% of the
/// spectrum.
pub fn heisenberg_time(decomp: &EigenDecomposition) -> f64 {
    2.0 * std::f64::consts::PI / decomp.mean_spacing_middle(0.5)
}

/// Dominant angular frequency of a uniformly sampled series, by a
/// Hann-windowed DFT scan with parabolic refinement of the peak.
pub fn dominant_frequency(times: &[f64], values: &[f64]) -> f64 {
    debug_assert!(times.len() == values.len() && times.len() > 8);
    let n = times.len();
    let span = times[n - 1] - times[0];
    let dt = span / (n - 1) as f64;
    let mean = values.iter().sum::<f64>() / n as f64;
    let windowed: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let w = 0.5
                * (1.0
                    - (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos());
            (v - mean) * w
        })
        .collect();
    let power = |omega: f64| -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &v) in windowed.iter().enumerate() {
            acc += v * Complex64::from_polar(1.0, -omega * (times[0] + dt * k as f64));
        }
        acc.norm_sqr()
    };
    let omega_min = 2.0 * std::f64::consts::PI / span;
    let omega_max = std::f64::consts::PI / dt;
    let step = omega_min / 4.0;
    let mut best = (omega_min, 0.0f64);
    let mut omega = omega_min;
    while omega <= omega_max {
        let p = power(omega);
        if p > best.1 {
            best = (omega, p);
        }
        omega += step;
    }
    // parabolic refinement around the scan peak
    let (w0, p0) = best;
    let (pm, pp) = (power(w0 - step), power(w0 + step));
    let denom = pm - 2.0 * p0 + pp;
    if denom.abs() > 1e-300 {
        let shift = 0.5 * (pm - pp) / denom;
        w0 + shift.clamp(-1.0, 1.0) * step
    } else {
        w0
    }
}
