//! State diagnostics: local expectation values, bipartite entanglement,
//! IPR-based fractal dimensions with finite-size extrapolation, projections,
//! and the eigenstate hybridization measures K(omega) and f^2(omega).

use ndarray::{Array1, Array2};
use ndarray_linalg::SVD;

use crate::basis::SpinBasis;
use crate::eigen::EigenDecomposition;
use crate::error::{EastError, Result};
use crate::fit::{fit_linear, t_quantile_975};
use crate::specstats::GaussianDos;
use crate::state::{kahan_sum, BasisTag, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalObservable {
    /// Occupation `n_j`.
    Density,
    /// `sigma^x_j`.
    SigmaX,
}

/// `<n_j>` or `<sigma^x_j>` of a Z-basis state; `site` is 1-based.
pub fn local_expectation(
    state: &PureState,
    site: usize,
    which: LocalObservable,
) -> Result<f64> {
    if state.basis() != BasisTag::Z {
        return Err(EastError::BasisMismatch {
            expected: BasisTag::Z,
            found: state.basis(),
        });
    }
    let l = state.l();
    if site < 1 || site > l {
        return Err(EastError::SiteOutOfRange { site, l });
    }
    let basis = SpinBasis::new(l)?;
    let mask = basis.site_mask(site);
    let amps = state.amplitudes();
    Ok(match which {
        LocalObservable::Density => kahan_sum(
            amps.iter()
                .enumerate()
                .filter(|(c, _)| c & mask != 0)
                .map(|(_, a)| a.norm_sqr()),
        ),
        LocalObservable::SigmaX => kahan_sum(
            amps.iter()
                .enumerate()
                .map(|(c, a)| (a.conj() * amps[c ^ mask]).re),
        ),
    })
}

/// Von Neumann entropy (nats) across the cut after site `cut`: subsystem A is
/// sites 1..=cut. Schmidt values come from the SVD of the amplitude matrix;
/// weights below 1e-14 are dropped.
pub fn entanglement_entropy(state: &PureState, cut: usize) -> Result<f64> {
    let l = state.l();
    if cut < 1 || cut >= l {
        return Err(EastError::InvalidCut { cut, l });
    }
    let dim_a = 1usize << cut;
    let dim_b = 1usize << (l - cut);
    let amps = state.amplitudes();
    let m = Array2::from_shape_fn((dim_a, dim_b), |(a, b)| amps[a + (b << cut)]);
    let (_, sv, _) = m.svd(false, false)?;
    Ok(kahan_sum(sv.iter().filter_map(|&s| {
        let p = s * s;
        if p > 1e-14 {
            Some(-p * p.ln())
        } else {
            None
        }
    })))
}

/// Asymptotic Page value `ln d_A - d_A / (2 d_B)` for subsystem dimensions
/// `2^la`, `2^lb` with `la <= lb`. Reference curve only.
pub fn page_value(la: usize, lb: usize) -> f64 {
    debug_assert!(la <= lb);
    if la == 0 {
        return 0.0;
    }
    let da = (1u64 << la) as f64;
    let db = (1u64 << lb) as f64;
    da.ln() - da / (2.0 * db)
}

/// Inverse participation ratio `I_q = sum |psi(c)|^{2q}` (support count at
/// q = 0).
pub fn ipr(state: &PureState, q: f64) -> f64 {
    kahan_sum(state.amplitudes().iter().filter_map(|a| {
        let p = a.norm_sqr();
        if p > 0.0 {
            Some(p.powf(q))
        } else {
            None
        }
    }))
}

/// Shannon participation entropy `-sum p ln p`.
pub fn participation_entropy(state: &PureState) -> f64 {
    kahan_sum(state.amplitudes().iter().filter_map(|a| {
        let p = a.norm_sqr();
        if p > 0.0 {
            Some(-p * p.ln())
        } else {
            None
        }
    }))
}

/// Finite-size fractal dimension `D_q^{(N)} = ln I_q / ((1 - q) ln N)`; the
/// q = 1 case uses the participation entropy `S_1 / ln N`.
pub fn finite_size_dimension(state: &PureState, q: f64) -> f64 {
    let ln_n = (state.dim() as f64).ln();
    if q == 1.0 {
        participation_entropy(state) / ln_n
    } else {
        ipr(state, q).ln() / ((1.0 - q) * ln_n)
    }
}

/// Per-size fractal dimensions with a linear extrapolation in 1/L.
#[derive(Debug, Clone)]
pub struct FractalDimensionEstimate {
    pub q: f64,
    pub basis: BasisTag,
    pub sizes: Vec<usize>,
    pub per_size: Vec<f64>,
    /// Intercept of the 1/L fit: the thermodynamic estimate.
    pub extrapolated: f64,
    /// 95% half-width of the intercept.
    pub ci95: f64,
}

/// Fractal dimensions from states at three or more sizes (common basis tag).
pub fn fractal_dimensions(
    states: &[PureState],
    q_list: &[f64],
) -> Result<Vec<FractalDimensionEstimate>> {
    if states.len() < 3 {
        return Err(EastError::TooFewSizes {
            needed: 3,
            got: states.len(),
        });
    }
    let basis = states[0].basis();
    for s in states {
        if s.basis() != basis {
            return Err(EastError::BasisMismatch {
                expected: basis,
                found: s.basis(),
            });
        }
    }
    let sizes: Vec<usize> = states.iter().map(|s| s.l()).collect();
    let inv_l: Vec<f64> = sizes.iter().map(|&l| 1.0 / l as f64).collect();
    q_list
        .iter()
        .map(|&q| {
            let per_size: Vec<f64> = states
                .iter()
                .map(|s| finite_size_dimension(s, q))
                .collect();
            let fit = fit_linear(&inv_l, &per_size)?;
            Ok(FractalDimensionEstimate {
                q,
                basis,
                sizes: sizes.clone(),
                per_size,
                extrapolated: fit.params[0],
                ci95: fit.ci95[0],
            })
        })
        .collect()
}

/// `D_infinity` from the scaling of the maximum intensity: per-size values
/// `-ln max |psi|^2 / ln N` plus the slope of `-ln max |psi|^2` against
/// `ln N` across sizes (the slope is the quoted estimate).
pub struct MaxIntensityDimension {
    pub sizes: Vec<usize>,
    pub per_size: Vec<f64>,
    pub slope: f64,
    pub ci95: f64,
}

pub fn max_intensity_dimension(states: &[PureState]) -> Result<MaxIntensityDimension> {
    if states.len() < 3 {
        return Err(EastError::TooFewSizes {
            needed: 3,
            got: states.len(),
        });
    }
    let sizes: Vec<usize> = states.iter().map(|s| s.l()).collect();
    let ln_n: Vec<f64> = states.iter().map(|s| (s.dim() as f64).ln()).collect();
    let neg_ln_max: Vec<f64> = states
        .iter()
        .map(|s| {
            let max = s
                .amplitudes()
                .iter()
                .map(|a| a.norm_sqr())
                .fold(0.0, f64::max);
            -max.ln()
        })
        .collect();
    let per_size: Vec<f64> = neg_ln_max
        .iter()
        .zip(ln_n.iter())
        .map(|(&a, &b)| a / b)
        .collect();
    let fit = fit_linear(&ln_n, &neg_ln_max)?;
    Ok(MaxIntensityDimension {
        sizes,
        per_size,
        slope: fit.params[1],
        ci95: fit.ci95[1],
    })
}

/// Normalized `(1 - |c><c|) |state>`; fails when the two are parallel.
pub fn project_out(state: &PureState, component: &PureState) -> Result<PureState> {
    let c = component.overlap(state);
    if c.norm() >= 1.0 - 1e-12 {
        return Err(EastError::ParallelStates);
    }
    let amps = Array1::from_iter(
        state
            .amplitudes()
            .iter()
            .zip(component.amplitudes().iter())
            .map(|(&a, &b)| a - c * b),
    );
    PureState::normalized(amps, state.basis())
}

/// Hybridization kernel `K = N sum_c |Psi_m(c)|^2 |Psi_n(c)|^2` averaged over
/// eigenpairs binned by their gap. `bin_edges` are ascending; the output has
/// one mean per bin (NaN for empty bins). Pairs with m = n enter the bin
/// containing zero. The decomposition must cover `[e_ref, e_ref + max gap]`.
pub fn overlap_kernel(
    decomp: &EigenDecomposition,
    e_ref: f64,
    bin_edges: &[f64],
) -> Result<Vec<f64>> {
    if bin_edges.len() < 2 {
        return Err(EastError::InsufficientLevels {
            needed: 2,
            got: bin_edges.len(),
        });
    }
    let (lo, hi) = (
        decomp.eigenvalues()[0],
        decomp.eigenvalues()[decomp.len() - 1],
    );
    let max_gap = *bin_edges.last().unwrap();
    if e_ref < lo - 1e-9 || e_ref + max_gap > hi + 1e-9 {
        return Err(EastError::WindowNotCovered {
            lo,
            hi,
            need_lo: e_ref,
            need_hi: e_ref + max_gap,
        });
    }
    let n_states = decomp.len();
    let dim = decomp.dim() as f64;
    let intensity: Vec<Vec<f64>> = (0..n_states)
        .map(|k| decomp.vector(k).iter().map(|v| v * v).collect())
        .collect();

    let nbins = bin_edges.len() - 1;
    let mut sums = vec![0.0f64; nbins];
    let mut counts = vec![0usize; nbins];
    let locate = |omega: f64| -> Option<usize> {
        if omega < bin_edges[0] || omega > bin_edges[nbins] {
            return None;
        }
        let mut k = bin_edges.partition_point(|&e| e <= omega);
        if k == 0 {
            k = 1;
        }
        Some((k - 1).min(nbins - 1))
    };
    for m in 0..n_states {
        for n in m..n_states {
            let omega = decomp.eigenvalue(n) - decomp.eigenvalue(m);
            if let Some(b) = locate(omega) {
                let k: f64 = intensity[m]
                    .iter()
                    .zip(intensity[n].iter())
                    .map(|(a, c)| a * c)
                    .sum();
                sums[b] += dim * k;
                counts[b] += 1;
            }
        }
    }
    Ok(sums
        .iter()
        .zip(counts.iter())
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect())
}

/// Spectral function of the occupation at `site`:
/// `f^2(omega) = mean over eigenpairs in the bin of e^{S(E)} |O_mn|^2` with
/// `S(E) = ln(N rho(E))` at the mean pair energy. Diagonal elements enter
/// the bin containing zero; empty bins report NaN.
pub fn observable_spectral_function(
    decomp: &EigenDecomposition,
    site: usize,
    bin_edges: &[f64],
    dos: &GaussianDos,
) -> Result<Vec<f64>> {
    if bin_edges.len() < 2 {
        return Err(EastError::InsufficientLevels {
            needed: 2,
            got: bin_edges.len(),
        });
    }
    let dim = decomp.dim();
    let l = dim.trailing_zeros() as usize;
    if site < 1 || site > l {
        return Err(EastError::SiteOutOfRange { site, l });
    }
    let basis = SpinBasis::new(l)?;
    let mask = basis.site_mask(site);
    let n_states = decomp.len();

    // O = V^T diag(n_site) V over the window states
    let mut masked = Array2::zeros((dim, n_states));
    for k in 0..n_states {
        let col = decomp.vector(k);
        for c in 0..dim {
            if c & mask != 0 {
                masked[[c, k]] = col[c];
            }
        }
    }
    let o = decomp.vectors().t().dot(&masked);

    let nbins = bin_edges.len() - 1;
    let mut sums = vec![0.0f64; nbins];
    let mut counts = vec![0usize; nbins];
    let locate = |omega: f64| -> Option<usize> {
        if omega < bin_edges[0] || omega > bin_edges[nbins] {
            return None;
        }
        let k = bin_edges.partition_point(|&e| e <= omega).max(1);
        Some((k - 1).min(nbins - 1))
    };
    for m in 0..n_states {
        for n in m..n_states {
            let (em, en) = (decomp.eigenvalue(m), decomp.eigenvalue(n));
            let omega = (en - em).abs();
            if let Some(b) = locate(omega) {
                let e_mid = 0.5 * (em + en);
                let weight = dim as f64 * dos.density(e_mid);
                sums[b] += weight * o[[m, n]] * o[[m, n]];
                counts[b] += 1;
            }
        }
    }
    Ok(sums
        .iter()
        .zip(counts.iter())
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect())
}

/// 95% half-width of a mean from its samples (t-distribution).
pub fn mean_ci95(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let var = samples.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    (mean, t_quantile_975(n - 1) * se)
}
