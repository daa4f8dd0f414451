//! Spectral statistics: density-of-states moments, unfolding, level-spacing
//! ratios, number variance, Thouless-scale extraction, and the sampled
//! random-matrix references they are compared against.

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erf;

use crate::error::{EastError, Result};
use crate::lapack;

/// Gaussian model of the density of states (probability density).
#[derive(Debug, Clone, Copy)]
pub struct GaussianDos {
    pub mean: f64,
    pub sigma: f64,
}

impl GaussianDos {
    pub fn density(&self, e: f64) -> f64 {
        let u = (e - self.mean) / self.sigma;
        (-0.5 * u * u).exp() / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    pub fn cdf(&self, e: f64) -> f64 {
        0.5 * (1.0 + erf((e - self.mean) / (self.sigma * 2f64.sqrt())))
    }
}

/// Sample moments of a spectrum plus the max-likelihood Gaussian fit.
#[derive(Debug, Clone, Copy)]
pub struct DosStatistics {
    pub mean: f64,
    /// Raw second moment `<E^2>`.
    pub second_moment: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub gaussian: GaussianDos,
}

/// Moments and Gaussian fit of a set of levels.
pub fn dos_statistics(eigenvalues: &[f64]) -> DosStatistics {
    let n = eigenvalues.len() as f64;
    let mean = eigenvalues.iter().sum::<f64>() / n;
    let second_moment = eigenvalues.iter().map(|e| e * e).sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &e in eigenvalues {
        let d = e - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    DosStatistics {
        mean,
        second_moment,
        variance: m2,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        gaussian: GaussianDos {
            mean,
            sigma: m2.sqrt(),
        },
    }
}

/// Rescale East-limit levels to zero mean and unit variance using the exact
/// moment identities: `E -> (E + 1/2) / sqrt(L/2 + 3/4)`.
pub fn east_limit_rescale(eigenvalues: &[f64], l: usize) -> Vec<f64> {
    let denom = (l as f64 / 2.0 + 0.75).sqrt();
    eigenvalues.iter().map(|&e| (e + 0.5) / denom).collect()
}

/// The unfolding map that produced an [`UnfoldedSpectrum`].
#[derive(Debug, Clone)]
pub enum UnfoldMap {
    Gaussian(GaussianDos),
    Polynomial(Vec<f64>),
    /// Levels were already unfolded (synthetic ensembles).
    Identity,
}

/// Spectrum mapped so the local mean level spacing is one.
#[derive(Debug, Clone)]
pub struct UnfoldedSpectrum {
    pub levels: Vec<f64>,
    pub map: UnfoldMap,
    /// Number of raw spacings below 1e-12 (degenerate collapse flag).
    pub degenerate_pairs: usize,
}

impl UnfoldedSpectrum {
    /// Mean nearest-neighbor spacing over the middle fraction of the levels.
    pub fn mean_spacing_middle(&self, fraction: f64) -> f64 {
        let n = self.levels.len();
        let keep = ((n as f64 * fraction).round() as usize).clamp(2, n);
        let lo = (n - keep) / 2;
        let hi = lo + keep - 1;
        (self.levels[hi] - self.levels[lo]) / (hi - lo) as f64
    }

    /// Range of the middle fraction.
    pub fn middle_range(&self, fraction: f64) -> (f64, f64) {
        let n = self.levels.len();
        let keep = ((n as f64 * fraction).round() as usize).clamp(2, n);
        let lo = (n - keep) / 2;
        let hi = lo + keep - 1;
        (self.levels[lo], self.levels[hi])
    }
}

fn count_degenerate(sorted: &[f64]) -> usize {
    sorted.windows(2).filter(|w| w[1] - w[0] < 1e-12).count()
}

/// Unfold by a fitted-Gaussian CDF: `e_i -> N F(E_i)`. The Gaussian DOS of
/// the East chain makes this the natural staircase model. The Gaussian
/// parameters are calibrated by least squares against the empirical
/// staircase (starting from the sample moments), which keeps the unfolded
/// mean spacing at one even where the DOS has residual kurtosis.
pub fn unfold(eigenvalues: &[f64]) -> Result<UnfoldedSpectrum> {
    if eigenvalues.len() < 4 {
        return Err(EastError::InsufficientLevels {
            needed: 4,
            got: eigenvalues.len(),
        });
    }
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let stats = dos_statistics(&sorted);
    let n = sorted.len() as f64;

    // staircase targets i + 1/2; model N * Phi((E - mu)/sigma)
    let targets: Vec<f64> = (0..sorted.len()).map(|i| i as f64 + 0.5).collect();
    let model = |p: &[f64], e: f64| -> (f64, Vec<f64>) {
        let (mu, sigma) = (p[0], p[1].abs().max(1e-12));
        let u = (e - mu) / sigma;
        let value = n * 0.5 * (1.0 + erf(u / 2f64.sqrt()));
        let pdf = (-0.5 * u * u).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        (value, vec![-n * pdf, -n * pdf * u])
    };
    let p0 = [stats.gaussian.mean, stats.gaussian.sigma];
    let (p, _rss, _) = crate::fit::levenberg_marquardt(model, &sorted, &targets, &p0, 60);
    let gauss = GaussianDos {
        mean: p[0],
        sigma: p[1].abs().max(1e-12),
    };

    let levels: Vec<f64> = sorted.iter().map(|&e| n * gauss.cdf(e)).collect();
    Ok(UnfoldedSpectrum {
        degenerate_pairs: count_degenerate(&sorted),
        levels,
        map: UnfoldMap::Gaussian(gauss),
    })
}

/// Polynomial-staircase fallback for spectra whose DOS is not Gaussian:
/// least-squares fit of the cumulative count by a degree-`degree` polynomial
/// in the scaled energy.
pub fn unfold_polynomial(eigenvalues: &[f64], degree: usize) -> Result<UnfoldedSpectrum> {
    let n = eigenvalues.len();
    if n < degree + 2 {
        return Err(EastError::InsufficientLevels {
            needed: degree + 2,
            got: n,
        });
    }
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    let scale = |e: f64| 2.0 * (e - lo) / (hi - lo) - 1.0;

    // normal equations in the scaled variable
    let p = degree + 1;
    let mut ata = vec![vec![0.0f64; p]; p];
    let mut atb = vec![0.0f64; p];
    for (i, &e) in sorted.iter().enumerate() {
        let x = scale(e);
        let mut pow = vec![1.0; p];
        for k in 1..p {
            pow[k] = pow[k - 1] * x;
        }
        let target = i as f64 + 0.5;
        for a in 0..p {
            atb[a] += pow[a] * target;
            for b in 0..p {
                ata[a][b] += pow[a] * pow[b];
            }
        }
    }
    let coeffs = solve_dense(ata, atb).ok_or(EastError::SingularDesign)?;
    let eval = |e: f64| {
        let x = scale(e);
        let mut acc = 0.0;
        let mut pow = 1.0;
        for &c in &coeffs {
            acc += c * pow;
            pow *= x;
        }
        acc
    };
    let levels: Vec<f64> = sorted.iter().map(|&e| eval(e)).collect();
    Ok(UnfoldedSpectrum {
        degenerate_pairs: count_degenerate(&sorted),
        levels,
        map: UnfoldMap::Polynomial(coeffs),
    })
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-200 {
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

/// Which part of the spectrum a statistic is taken over.
#[derive(Debug, Clone, Copy)]
pub enum Window {
    All,
    /// Central fraction of the sorted levels (0.5 = middle 50%).
    MiddleFraction(f64),
}

fn window_slice<'a>(sorted: &'a [f64], window: Window) -> &'a [f64] {
    match window {
        Window::All => sorted,
        Window::MiddleFraction(f) => {
            let n = sorted.len();
            let keep = ((n as f64 * f).round() as usize).clamp(2, n);
            let lo = (n - keep) / 2;
            &sorted[lo..lo + keep]
        }
    }
}

/// Consecutive-spacing ratio statistics; no unfolding required.
#[derive(Debug, Clone)]
pub struct SpacingRatioStats {
    pub mean_r: f64,
    pub count: usize,
    /// Histogram of r over [0,1]: (bin centers, probability density).
    pub histogram: (Vec<f64>, Vec<f64>),
}

/// `r_n = min(s_n, s_{n+1}) / max(s_n, s_{n+1})` over the window.
pub fn spacing_ratio_stats(eigenvalues: &[f64], window: Window) -> Result<SpacingRatioStats> {
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let slice = window_slice(&sorted, window);
    if slice.len() < 100 {
        return Err(EastError::InsufficientLevels {
            needed: 100,
            got: slice.len(),
        });
    }
    let spacings: Vec<f64> = slice.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<f64> = spacings
        .windows(2)
        .filter(|w| w[0].max(w[1]) > 0.0)
        .map(|w| w[0].min(w[1]) / w[0].max(w[1]))
        .collect();
    let mean_r = ratios.iter().sum::<f64>() / ratios.len() as f64;

    const BINS: usize = 50;
    let mut counts = vec![0usize; BINS];
    for &r in &ratios {
        let k = ((r * BINS as f64) as usize).min(BINS - 1);
        counts[k] += 1;
    }
    let width = 1.0 / BINS as f64;
    let centers: Vec<f64> = (0..BINS).map(|k| (k as f64 + 0.5) * width).collect();
    let density: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / (ratios.len() as f64 * width))
        .collect();
    Ok(SpacingRatioStats {
        mean_r,
        count: ratios.len(),
        histogram: (centers, density),
    })
}

/// Level number variance over unfolded windows of length `ell`, with window
/// centers spread uniformly over the middle fraction of the spectrum.
pub fn number_variance(
    unfolded: &UnfoldedSpectrum,
    ell_grid: &[f64],
    window: Window,
) -> Result<Vec<f64>> {
    const CENTERS: usize = 4001;
    let fraction = match window {
        Window::All => 1.0,
        Window::MiddleFraction(f) => f,
    };
    let (mid_lo, mid_hi) = unfolded.middle_range(fraction);
    let levels = &unfolded.levels;
    let max_ell = ell_grid.iter().cloned().fold(0.0, f64::max);
    if max_ell > mid_hi - mid_lo {
        return Err(EastError::WindowNotCovered {
            lo: mid_lo,
            hi: mid_hi,
            need_lo: mid_lo,
            need_hi: mid_lo + max_ell,
        });
    }
    let mut out = Vec::with_capacity(ell_grid.len());
    for &ell in ell_grid {
        if ell == 0.0 {
            out.push(0.0);
            continue;
        }
        let c_lo = mid_lo + ell / 2.0;
        let c_hi = mid_hi - ell / 2.0;
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for k in 0..CENTERS {
            let c = c_lo + (c_hi - c_lo) * k as f64 / (CENTERS - 1) as f64;
            let a = levels.partition_point(|&v| v < c - ell / 2.0);
            let b = levels.partition_point(|&v| v < c + ell / 2.0);
            let count = (b - a) as f64;
            sum += count;
            sum_sq += count * count;
        }
        let mean = sum / CENTERS as f64;
        out.push((sum_sq / CENTERS as f64 - mean * mean).max(0.0));
    }
    Ok(out)
}

/// Thouless scale from the departure of a number-variance curve from its GOE
/// reference: the smallest `ell` where the curve exceeds the reference by
/// 20%, sustained over 3 consecutive grid points.
#[derive(Debug, Clone, Copy)]
pub struct ThoulessResult {
    pub ell: f64,
    /// False when no sustained crossing was found; `ell` is then the upper
    /// end of the grid.
    pub crossed: bool,
    pub threshold_rel: f64,
    pub sustain: usize,
}

pub fn thouless_energy(ell_grid: &[f64], sigma2: &[f64], reference: &[f64]) -> ThoulessResult {
    const THRESHOLD: f64 = 0.2;
    const SUSTAIN: usize = 3;
    debug_assert_eq!(ell_grid.len(), sigma2.len());
    debug_assert_eq!(ell_grid.len(), reference.len());
    let exceeds: Vec<bool> = sigma2
        .iter()
        .zip(reference.iter())
        .map(|(&s, &r)| r > 0.0 && s > r * (1.0 + THRESHOLD))
        .collect();
    for start in 0..exceeds.len() {
        if start + SUSTAIN <= exceeds.len() && exceeds[start..start + SUSTAIN].iter().all(|&b| b)
        {
            return ThoulessResult {
                ell: ell_grid[start],
                crossed: true,
                threshold_rel: THRESHOLD,
                sustain: SUSTAIN,
            };
        }
    }
    ThoulessResult {
        ell: ell_grid.last().copied().unwrap_or(f64::NAN),
        crossed: false,
        threshold_rel: THRESHOLD,
        sustain: SUSTAIN,
    }
}

/// Eigenvalues of one GOE draw: `(A + A^T)/2` with standard normal entries
/// (off-diagonal variance 1/2).
pub fn sample_goe_eigenvalues(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut a = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..=i {
            let g: f64 = rng.sample(StandardNormal);
            let v = if i == j {
                g
            } else {
                g * std::f64::consts::FRAC_1_SQRT_2
            };
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    lapack::symmetric_eigenvalues(a).expect("GOE eigenvalues")
}

/// Unfold GOE levels with the exact semicircle CDF for matrix dimension `n`
/// (off-diagonal variance 1/2 convention: radius `sqrt(2n)`).
pub fn unfold_goe_semicircle(eigenvalues: &[f64], dim: usize) -> UnfoldedSpectrum {
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let r = (2.0 * dim as f64).sqrt();
    let n = sorted.len() as f64;
    let cdf = |e: f64| {
        let x = (e / r).clamp(-1.0, 1.0);
        0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / std::f64::consts::PI
    };
    let levels: Vec<f64> = sorted.iter().map(|&e| n * cdf(e)).collect();
    UnfoldedSpectrum {
        degenerate_pairs: count_degenerate(&sorted),
        levels,
        map: UnfoldMap::Identity,
    }
}

/// Poisson-ensemble levels: unit-mean exponential spacings (already
/// unfolded).
pub fn sample_poisson_levels(count: usize, rng: &mut ChaCha8Rng) -> UnfoldedSpectrum {
    let mut levels = Vec::with_capacity(count);
    let mut acc = 0.0f64;
    for _ in 0..count {
        let u: f64 = rng.random();
        acc += -(1.0 - u).ln();
        levels.push(acc);
    }
    UnfoldedSpectrum {
        levels,
        map: UnfoldMap::Identity,
        degenerate_pairs: 0,
    }
}

/// Monte-Carlo GOE number-variance reference: mean over `draws` matrices of
/// dimension `dim`, semicircle-unfolded, middle 50%.
pub fn goe_number_variance_reference(
    ell_grid: &[f64],
    dim: usize,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut acc = vec![0.0f64; ell_grid.len()];
    for d in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(d as u64));
        let eigs = sample_goe_eigenvalues(dim, &mut rng);
        let unfolded = unfold_goe_semicircle(&eigs, dim);
        let s2 = number_variance(&unfolded, ell_grid, Window::MiddleFraction(0.5))?;
        for (a, v) in acc.iter_mut().zip(s2.iter()) {
            *a += v;
        }
    }
    for a in acc.iter_mut() {
        *a /= draws as f64;
    }
    Ok(acc)
}

/// Asymptotic GOE number variance, for reference plots.
pub fn goe_number_variance_asymptotic(ell: f64) -> f64 {
    if ell <= 0.0 {
        return 0.0;
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    const EULER_GAMMA: f64 = 0.5772156649015329;
    2.0 / pi2 * ((2.0 * std::f64::consts::PI * ell).ln() + EULER_GAMMA + 1.0 - pi2 / 8.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::full_diagonalize;
    use crate::operators::{build_hamiltonian, HamiltonianSpec};

    fn limit_spectrum(l: usize) -> Vec<f64> {
        let h = build_hamiltonian(&HamiltonianSpec::limit(l).unwrap());
        full_diagonalize(&h).unwrap().eigenvalues().to_vec()
    }

    #[test]
    fn east_limit_moments_are_exact() {
        for l in [8usize, 10] {
            let stats = dos_statistics(&limit_spectrum(l));
            assert!((stats.mean + 0.5).abs() < 1e-9);
            assert!((stats.second_moment - (1.0 + l as f64 / 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn shape_moments_shrink_with_size() {
        let s8 = dos_statistics(&limit_spectrum(8));
        let s12 = dos_statistics(&limit_spectrum(12));
        // the E -> -E-1 pairing makes the spectrum symmetric about -1/2:
        // odd moments vanish identically, kurtosis shrinks toward Gaussian
        assert!(s8.skewness.abs() < 1e-9);
        assert!(s12.skewness.abs() < 1e-9);
        assert!(s12.excess_kurtosis.abs() < s8.excess_kurtosis.abs());
    }

    #[test]
    fn gaussian_fit_recovers_synthetic_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 40_000;
        let (mu, sigma) = (-0.3, 1.7);
        let sample: Vec<f64> = (0..n)
            .map(|_| mu + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let stats = dos_statistics(&sample);
        let se_mean = sigma / (n as f64).sqrt();
        assert!((stats.gaussian.mean - mu).abs() < 4.0 * se_mean);
        let se_sigma = sigma / (2.0 * n as f64).sqrt();
        assert!((stats.gaussian.sigma - sigma).abs() < 4.0 * se_sigma);
    }

    #[test]
    fn uniform_spectrum_unfolds_to_unit_spacing() {
        // near-uniform levels: unfolding is approximately affine
        let levels: Vec<f64> = (0..2000).map(|k| 0.005 * k as f64).collect();
        let u = unfold_polynomial(&levels, 11).unwrap();
        let mean = u.mean_spacing_middle(0.5);
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn gaussian_sample_unfolds_to_unit_spacing() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sample: Vec<f64> = (0..20_000)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let u = unfold(&sample).unwrap();
        let mean = u.mean_spacing_middle(0.5);
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn east_limit_unfolds_to_unit_spacing() {
        let u = unfold(&limit_spectrum(12)).unwrap();
        let mean = u.mean_spacing_middle(0.5);
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn poisson_ratio_benchmark() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let levels = sample_poisson_levels(200_000, &mut rng);
        let stats = spacing_ratio_stats(&levels.levels, Window::All).unwrap();
        assert!((stats.mean_r - 0.386).abs() < 0.01, "{}", stats.mean_r);
    }

    #[test]
    fn ratios_are_affine_invariant() {
        let spectrum = limit_spectrum(10);
        let shifted: Vec<f64> = spectrum.iter().map(|e| 3.0 * e - 7.0).collect();
        let a = spacing_ratio_stats(&spectrum, Window::MiddleFraction(0.5)).unwrap();
        let b = spacing_ratio_stats(&shifted, Window::MiddleFraction(0.5)).unwrap();
        assert!((a.mean_r - b.mean_r).abs() < 1e-12);
    }

    #[test]
    fn window_size_is_enforced() {
        let levels: Vec<f64> = (0..50).map(|k| k as f64).collect();
        assert!(matches!(
            spacing_ratio_stats(&levels, Window::All),
            Err(EastError::InsufficientLevels { .. })
        ));
    }

    #[test]
    fn poisson_number_variance_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let levels = sample_poisson_levels(500_000, &mut rng);
        let ells: Vec<f64> = (1..=10).map(|k| 5.0 * k as f64).collect();
        let s2 = number_variance(&levels, &ells, Window::MiddleFraction(0.5)).unwrap();
        for (&ell, &v) in ells.iter().zip(s2.iter()) {
            assert!((v / ell - 1.0).abs() < 0.05, "ell={ell} sigma2={v}");
        }
    }

    #[test]
    fn sigma2_starts_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let levels = sample_poisson_levels(10_000, &mut rng);
        let s2 = number_variance(&levels, &[0.0, 1.0], Window::MiddleFraction(0.5)).unwrap();
        assert_eq!(s2[0], 0.0);
        assert!(s2[1] >= 0.0);
    }

    #[test]
    fn thouless_detection() {
        let ells: Vec<f64> = (1..=40).map(|k| k as f64).collect();
        let goe: Vec<f64> = ells
            .iter()
            .map(|&l| goe_number_variance_asymptotic(l))
            .collect();
        // self-reference never crosses
        let same = thouless_energy(&ells, &goe, &goe);
        assert!(!same.crossed);
        // linear Poisson curve crosses early
        let poisson: Vec<f64> = ells.clone();
        let t = thouless_energy(&ells, &poisson, &goe);
        assert!(t.crossed);
        assert!(t.ell <= 3.0, "{}", t.ell);
    }
}
