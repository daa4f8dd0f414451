//! Eigensolvers: dense full diagonalization, a Chebyshev-filtered projector
//! for the ground state, a Lanczos cross-check, and interior energy windows.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{EastError, Result};
use crate::lapack;
use crate::operators::OperatorMatrix;
use crate::state::{BasisTag, PureState};

/// Dense diagonalization refuses dimensions above this unless overridden.
/// 2^14 keeps the eigenvector matrix around 2 GB.
pub const DEFAULT_DENSE_CEILING: usize = 1 << 14;

/// Ascending eigenvalues with orthonormal eigenvectors in matching columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    vectors: Array2<f64>,
    complete: bool,
}

impl EigenDecomposition {
    /// Wrap precomputed eigenpairs. The caller asserts that the values are
    /// ascending and that column k of `vectors` belongs to `eigenvalues[k]`.
    pub fn new(eigenvalues: Vec<f64>, vectors: Array2<f64>, complete: bool) -> Self {
        debug_assert_eq!(eigenvalues.len(), vectors.ncols());
        Self {
            eigenvalues,
            vectors,
            complete,
        }
    }

    /// Number of eigenpairs held.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> ndarray::ArrayView1<'_, f64> {
        self.vectors.column(k)
    }

    /// Eigenstate `k` as a Z-basis pure state.
    pub fn state(&self, k: usize) -> PureState {
        let amps = Array1::from_iter(
            self.vectors
                .column(k)
                .iter()
                .map(|&x| Complex64::new(x, 0.0)),
        );
        PureState::normalized(amps, BasisTag::Z).expect("eigenvector norm")
    }

    /// Coefficients `c_n = <Psi_n|psi>` of a state in this eigenbasis.
    pub fn project(&self, state: &PureState) -> Vec<Complex64> {
        let amps = state.amplitudes();
        (0..self.len())
            .map(|k| {
                let col = self.vectors.column(k);
                let mut acc = Complex64::new(0.0, 0.0);
                for (v, a) in col.iter().zip(amps.iter()) {
                    acc += v * a;
                }
                acc
            })
            .collect()
    }

    /// Overlap weights `|<Psi_n|psi>|^2`.
    pub fn overlap_weights(&self, state: &PureState) -> Vec<f64> {
        self.project(state).iter().map(|c| c.norm_sqr()).collect()
    }

    /// Index of the eigenvalue nearest `e`.
    pub fn index_nearest(&self, e: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, &v) in self.eigenvalues.iter().enumerate() {
            let d = (v - e).abs();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }

    /// Mean nearest-neighbor spacing over the middle fraction of the levels.
    pub fn mean_spacing_middle(&self, fraction: f64) -> f64 {
        let n = self.eigenvalues.len();
        let keep = ((n as f64 * fraction).round() as usize).clamp(2, n);
        let lo = (n - keep) / 2;
        let hi = lo + keep - 1;
        (self.eigenvalues[hi] - self.eigenvalues[lo]) / (hi - lo) as f64
    }

    /// Largest residual `|Hv - ev|` (relative to the spectral norm estimate)
    /// and largest orthonormality defect, for validation.
    pub fn verify(&self, h: &OperatorMatrix) -> (f64, f64) {
        let norm_h = self
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &e| m.max(e.abs()))
            .max(1e-300);
        let mut max_resid = 0.0f64;
        for k in 0..self.len() {
            let v: Vec<f64> = self.vectors.column(k).iter().copied().collect();
            let hv = h.matvec_alloc(&v);
            let e = self.eigenvalues[k];
            let r: f64 = hv
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (a - e * b) * (a - e * b))
                .sum::<f64>()
                .sqrt();
            max_resid = max_resid.max(r / norm_h);
        }
        let mut max_ortho = 0.0f64;
        for i in 0..self.len() {
            for j in i..self.len() {
                let dot: f64 = self
                    .vectors
                    .column(i)
                    .iter()
                    .zip(self.vectors.column(j).iter())
                    .map(|(a, b)| a * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                max_ortho = max_ortho.max((dot - target).abs());
            }
        }
        (max_resid, max_ortho)
    }
}

/// Complete spectrum and eigenbasis via LAPACK, refusing dimensions above
/// [`DEFAULT_DENSE_CEILING`].
pub fn full_diagonalize(h: &OperatorMatrix) -> Result<EigenDecomposition> {
    full_diagonalize_capped(h, DEFAULT_DENSE_CEILING)
}

/// As [`full_diagonalize`] with an explicit dense ceiling.
pub fn full_diagonalize_capped(h: &OperatorMatrix, ceiling: usize) -> Result<EigenDecomposition> {
    let n = h.dim();
    if n > ceiling {
        return Err(EastError::DenseCeilingExceeded { dim: n, ceiling });
    }
    let (w, v) = lapack::symmetric_eigen(h.to_dense())?;
    Ok(EigenDecomposition::new(w, v, true))
}

/// Result of the filtered ground-state solver.
#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub energy: f64,
    pub state: PureState,
    /// Final residual `|Hv - Ev|`.
    pub residual: f64,
    pub sweeps: usize,
    /// Lowest Ritz value after each sweep (the converged energy never
    /// exceeds any entry beyond roundoff).
    pub history: Vec<f64>,
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut v);
    v
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

fn rayleigh_and_residual(h: &OperatorMatrix, v: &[f64]) -> (f64, f64) {
    let hv = h.matvec_alloc(v);
    let rho: f64 = v.iter().zip(hv.iter()).map(|(a, b)| a * b).sum();
    let res: f64 = hv
        .iter()
        .zip(v.iter())
        .map(|(a, b)| (a - rho * b) * (a - rho * b))
        .sum::<f64>()
        .sqrt();
    (rho, res)
}

/// Lowest eigenpair by Chebyshev-filtered subspace projection.
///
/// A two-vector block is run through a degree-m Chebyshev filter mapped onto
/// the unwanted interval `[wall, upper]`: components above the wall are
/// damped into the Chebyshev box while the ground component grows like
/// `cosh(m acosh |x0|)`. Rayleigh-Ritz in the block gives the ground
/// estimate and, from the second Ritz value, a self-correcting wall
/// position. The degree is chosen each sweep so the gain at the current
/// ground estimate exceeds ~10^3; the upper bound is a Gershgorin estimate.
/// Up to 50 sweeps; `Err(NotConverged)` reports the best residual reached.
pub fn ground_state(h: &OperatorMatrix, tol: f64, seed: u64) -> Result<GroundStateResult> {
    const MAX_SWEEPS: usize = 50;
    let n = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if n == 1 {
        let e = h.matvec_alloc(&[1.0])[0];
        return Ok(GroundStateResult {
            energy: e,
            state: PureState::from_real(&[1.0], BasisTag::Z)?,
            residual: 0.0,
            sweeps: 0,
            history: vec![e],
        });
    }

    let (g_lo, g_hi) = h.gershgorin_bounds();
    let scale = g_hi.abs().max(g_lo.abs()).max(1.0);
    let upper = g_hi + 1e-8 * scale;

    let mut v1 = random_unit(n, &mut rng);
    let mut v2 = random_unit(n, &mut rng);
    orthonormalize_pair(&mut v2, &v1);

    let (mut theta1, mut theta2, mut res1) = block_rayleigh_ritz(h, &mut v1, &mut v2);
    let mut best: (f64, Vec<f64>, f64) = (theta1, v1.clone(), res1);
    let mut history = vec![theta1];

    for sweep in 0..=MAX_SWEEPS {
        if res1 <= tol * scale {
            return Ok(GroundStateResult {
                energy: theta1,
                state: PureState::from_real(&v1, BasisTag::Z)?,
                residual: res1,
                sweeps: sweep,
                history,
            });
        }
        if sweep == MAX_SWEEPS {
            break;
        }

        // wall from the second Ritz value; keep a floor above theta1 so a
        // degenerate block still amplifies the ground pair
        let mut wall = theta2;
        let floor = theta1 + (1e-8 * scale).max(0.5 * res1);
        if wall < floor {
            wall = floor;
        }
        if wall >= upper {
            wall = 0.5 * (theta1 + upper);
        }
        let half_width = 0.5 * (upper - wall);
        let center = 0.5 * (upper + wall);
        let lam_ref = theta1 - res1;
        let x0 = ((lam_ref - center) / half_width).abs().max(1.0 + 1e-12);
        let gain_target: f64 = 2.0e3;
        let degree = ((gain_target.ln() / x0.acosh()).ceil() as usize).clamp(8, 3000);

        chebyshev_filter(h, &mut v1, degree, center, half_width);
        chebyshev_filter(h, &mut v2, degree, center, half_width);
        if normalize(&mut v1) == 0.0 {
            v1 = random_unit(n, &mut rng);
        }
        orthonormalize_pair(&mut v2, &v1);

        let (t1, t2, r1) = block_rayleigh_ritz(h, &mut v1, &mut v2);
        theta1 = t1;
        theta2 = t2;
        res1 = r1;
        history.push(theta1);
        if res1 < best.2 {
            best = (theta1, v1.clone(), res1);
        }
    }

    Err(EastError::NotConverged {
        residual: best.2,
        iterations: MAX_SWEEPS,
    })
}

/// Apply the degree-m Chebyshev polynomial of the mapped operator to `v`
/// in place (unnormalized).
fn chebyshev_filter(h: &OperatorMatrix, v: &mut Vec<f64>, degree: usize, center: f64, half_width: f64) {
    let n = v.len();
    let mut t_prev = v.clone();
    let mut work = vec![0.0; n];
    h.matvec(v, &mut work);
    let mut t_cur: Vec<f64> = work
        .iter()
        .zip(v.iter())
        .map(|(hv, x)| (hv - center * x) / half_width)
        .collect();
    let mut t_next = vec![0.0; n];
    for _ in 2..=degree {
        h.matvec(&t_cur, &mut work);
        for i in 0..n {
            t_next[i] = 2.0 * (work[i] - center * t_cur[i]) / half_width - t_prev[i];
        }
        std::mem::swap(&mut t_prev, &mut t_cur);
        std::mem::swap(&mut t_cur, &mut t_next);
    }
    *v = t_cur;
}

/// Gram-Schmidt `v` against the unit vector `against`, then normalize;
/// re-randomizes deterministically if the pair collapses.
fn orthonormalize_pair(v: &mut Vec<f64>, against: &[f64]) {
    for _ in 0..2 {
        let d: f64 = against.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        for (x, a) in v.iter_mut().zip(against.iter()) {
            *x -= d * a;
        }
    }
    if normalize(v) < 1e-12 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5bd1_e995);
        *v = random_unit(against.len(), &mut rng);
        let d: f64 = against.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        for (x, a) in v.iter_mut().zip(against.iter()) {
            *x -= d * a;
        }
        normalize(v);
    }
}

/// Rayleigh-Ritz in span{v1, v2}: rotates the pair onto the Ritz vectors and
/// returns (theta1, theta2, residual of the lower pair).
fn block_rayleigh_ritz(h: &OperatorMatrix, v1: &mut [f64], v2: &mut [f64]) -> (f64, f64, f64) {
    let n = v1.len();
    let hv1 = h.matvec_alloc(v1);
    let hv2 = h.matvec_alloc(v2);
    let s11: f64 = v1.iter().zip(hv1.iter()).map(|(a, b)| a * b).sum();
    let s12: f64 = v1.iter().zip(hv2.iter()).map(|(a, b)| a * b).sum();
    let s22: f64 = v2.iter().zip(hv2.iter()).map(|(a, b)| a * b).sum();
    let mid = 0.5 * (s11 + s22);
    let delta = 0.5 * (s11 - s22);
    let rad = delta.hypot(s12);
    let (theta1, theta2) = (mid - rad, mid + rad);
    // eigenvector of the 2x2 form for theta1: (s12, theta1 - s11), with the
    // numerically safer branch when s12 is tiny
    let (c, s) = if s12.abs() > 1e-300 {
        let norm = s12.hypot(theta1 - s11);
        (s12 / norm, (theta1 - s11) / norm)
    } else if s11 <= s22 {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let mut res_sq = 0.0;
    for i in 0..n {
        let a = v1[i];
        let b = v2[i];
        let new1 = c * a + s * b;
        let new2 = -s * a + c * b;
        v1[i] = new1;
        v2[i] = new2;
        let h1 = c * hv1[i] + s * hv2[i];
        let r = h1 - theta1 * new1;
        res_sq += r * r;
    }
    (theta1, theta2, res_sq.sqrt())
}

/// Lowest eigenpair by Lanczos with full reorthogonalization. Cross-check
/// implementation for [`ground_state`].
pub fn lanczos_lowest(
    h: &OperatorMatrix,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    let n = h.dim();
    let m_max = max_iter.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max);
    basis.push(random_unit(n, &mut rng));
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let scale = {
        let (lo, hi) = h.gershgorin_bounds();
        lo.abs().max(hi.abs()).max(1.0)
    };

    for k in 0..m_max {
        h.matvec(&basis[k], &mut w);
        let a: f64 = basis[k].iter().zip(w.iter()).map(|(x, y)| x * y).sum();
        alphas.push(a);
        // full reorthogonalization, twice for stability
        for _ in 0..2 {
            for q in &basis {
                let d: f64 = q.iter().zip(w.iter()).map(|(x, y)| x * y).sum();
                for i in 0..n {
                    w[i] -= d * q[i];
                }
            }
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();

        // check convergence of the lowest Ritz pair
        let (theta, y) = lowest_ritz(&alphas, &betas);
        let resid_est = b * y.last().copied().unwrap_or(1.0).abs();
        if resid_est <= tol * scale || b < 1e-14 || k + 1 == m_max {
            let mut v = vec![0.0; n];
            for (c, q) in y.iter().zip(basis.iter()) {
                for i in 0..n {
                    v[i] += c * q[i];
                }
            }
            normalize(&mut v);
            let (rho, res) = rayleigh_and_residual(h, &v);
            if res <= tol * scale || b < 1e-14 {
                return Ok((rho, v));
            }
            if k + 1 == m_max {
                return Err(EastError::NotConverged {
                    residual: res,
                    iterations: m_max,
                });
            }
            let _ = theta;
        }
        betas.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    unreachable!("loop returns");
}

fn lowest_ritz(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let mut t = Array2::zeros((m, m));
    for i in 0..m {
        t[[i, i]] = alphas[i];
        if i < betas.len() && i + 1 < m {
            t[[i, i + 1]] = betas[i];
            t[[i + 1, i]] = betas[i];
        }
    }
    let (w, v) = lapack::symmetric_eigen(t).expect("small tridiagonal");
    (w[0], v.column(0).iter().copied().collect())
}

/// The `count` eigenpairs nearest `center`, via dense diagonalization.
///
/// Sparse-only sizes are refused: window extraction falls back to the dense
/// path, so the dense ceiling applies.
pub fn interior_window(
    h: &OperatorMatrix,
    center: f64,
    count: usize,
) -> Result<EigenDecomposition> {
    interior_window_capped(h, center, count, DEFAULT_DENSE_CEILING)
}

/// As [`interior_window`] with an explicit dense ceiling.
pub fn interior_window_capped(
    h: &OperatorMatrix,
    center: f64,
    count: usize,
    ceiling: usize,
) -> Result<EigenDecomposition> {
    let n = h.dim();
    if count == 0 || count > n {
        return Err(EastError::InsufficientLevels {
            needed: 1,
            got: count,
        });
    }
    let full = full_diagonalize_capped(h, ceiling)?;
    if count == n {
        return Ok(full);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let da = (full.eigenvalue(a) - center).abs();
        let db = (full.eigenvalue(b) - center).abs();
        da.partial_cmp(&db).unwrap().then(a.cmp(&b))
    });
    let mut selected: Vec<usize> = order[..count].to_vec();
    selected.sort_unstable();
    let eigenvalues: Vec<f64> = selected.iter().map(|&k| full.eigenvalue(k)).collect();
    let mut vectors = Array2::zeros((n, count));
    for (dst, &src) in selected.iter().enumerate() {
        vectors.column_mut(dst).assign(&full.vector(src));
    }
    Ok(EigenDecomposition::new(eigenvalues, vectors, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_hamiltonian, HamiltonianSpec};

    #[test]
    fn single_site_limit_spectrum() {
        let h = build_hamiltonian(&HamiltonianSpec::limit(1).unwrap());
        let d = full_diagonalize(&h).unwrap();
        let s5 = 5.0f64.sqrt();
        assert!((d.eigenvalue(0) - (-1.0 - s5) / 2.0).abs() < 1e-12);
        assert!((d.eigenvalue(1) - (-1.0 + s5) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_site_rk_point_spectrum() {
        let h = build_hamiltonian(&HamiltonianSpec::finite(1, 0.0).unwrap());
        let d = full_diagonalize(&h).unwrap();
        assert!(d.eigenvalue(0).abs() < 1e-12);
        assert!((d.eigenvalue(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residuals_and_orthonormality() {
        let h = build_hamiltonian(&HamiltonianSpec::limit(8).unwrap());
        let d = full_diagonalize(&h).unwrap();
        let (resid, ortho) = d.verify(&h);
        assert!(resid < 1e-8, "relative residual {resid:.3e}");
        assert!(ortho < 1e-10, "orthonormality defect {ortho:.3e}");
    }

    #[test]
    fn limit_spectrum_moments() {
        for l in [6usize, 10] {
            let h = build_hamiltonian(&HamiltonianSpec::limit(l).unwrap());
            let d = full_diagonalize(&h).unwrap();
            let n = d.len() as f64;
            let mean: f64 = d.eigenvalues().iter().sum::<f64>() / n;
            let second: f64 = d.eigenvalues().iter().map(|e| e * e).sum::<f64>() / n;
            assert!((mean + 0.5).abs() < 1e-9);
            assert!((second - (1.0 + l as f64 / 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn dense_ceiling_is_enforced() {
        let h = build_hamiltonian(&HamiltonianSpec::limit(6).unwrap());
        assert!(matches!(
            full_diagonalize_capped(&h, 32),
            Err(EastError::DenseCeilingExceeded { .. })
        ));
    }

    #[test]
    fn ground_state_at_rk_point() {
        // s = 0: ground state |+>^L with zero energy
        let l = 10;
        let h = build_hamiltonian(&HamiltonianSpec::finite(l, 0.0).unwrap());
        let gs = ground_state(&h, 1e-10, 11).unwrap();
        assert!(gs.energy.abs() < 1e-8, "energy {:.3e}", gs.energy);
        let n = 1usize << l;
        let plus = PureState::from_real(&vec![(n as f64).powf(-0.5); n], BasisTag::Z).unwrap();
        assert!((gs.state.overlap_sq(&plus) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ground_state_matches_dense() {
        let h = build_hamiltonian(&HamiltonianSpec::limit(10).unwrap());
        let dense = full_diagonalize(&h).unwrap();
        let gs = ground_state(&h, 1e-10, 3).unwrap();
        assert!((gs.energy - dense.eigenvalue(0)).abs() < 1e-8);
        assert!((gs.state.overlap_sq(&dense.state(0)) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn lanczos_cross_check() {
        let h = build_hamiltonian(&HamiltonianSpec::limit(9).unwrap());
        let (e_l, _) = lanczos_lowest(&h, 300, 1e-10, 5).unwrap();
        let gs = ground_state(&h, 1e-10, 5).unwrap();
        assert!((e_l - gs.energy).abs() < 1e-8);
    }

    #[test]
    fn window_equals_full_when_exhaustive() {
        let h = build_hamiltonian(&HamiltonianSpec::limit(5).unwrap());
        let full = full_diagonalize(&h).unwrap();
        let win = interior_window(&h, 0.3, full.len()).unwrap();
        assert!(win.is_complete());
        for k in 0..full.len() {
            assert_eq!(full.eigenvalue(k), win.eigenvalue(k));
        }
    }

    #[test]
    fn window_below_spectrum_returns_ground_pair() {
        let h = build_hamiltonian(&HamiltonianSpec::limit(6).unwrap());
        let full = full_diagonalize(&h).unwrap();
        let win = interior_window(&h, -1e6, 1).unwrap();
        assert!(!win.is_complete());
        assert_eq!(win.len(), 1);
        assert_eq!(win.eigenvalue(0), full.eigenvalue(0));
    }

    #[test]
    fn window_selects_nearest_levels() {
        let h = build_hamiltonian(&HamiltonianSpec::limit(8).unwrap());
        let full = full_diagonalize(&h).unwrap();
        let count = 64;
        let center = -0.5;
        let win = interior_window(&h, center, count).unwrap();
        let mut dist: Vec<f64> = full
            .eigenvalues()
            .iter()
            .map(|e| (e - center).abs())
            .collect();
        dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let radius = dist[count - 1];
        for &e in win.eigenvalues() {
            assert!((e - center).abs() <= radius + 1e-12);
        }
    }
}
