//! Spin-coherent product states and the variational machinery built on them:
//! closed-form energies, the uniform-angle optimum across s, overlap
//! maximization against a target state, and the analytic fractal dimensions
//! of the tilted product state.

use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64;

use crate::error::{EastError, Result};
use crate::operators::{HamiltonianSpec, Regime};
use crate::state::{BasisTag, PureState};

const TWO_PI: f64 = 2.0 * PI;

/// Polar angles of an L-site spin-coherent product state, reduced mod 2pi.
///
/// Site j carries `cos(theta_j/2)|1> + sin(theta_j/2)|0>`; the ansatz is
/// real, so there is no azimuthal phase.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentAngles {
    angles: Vec<f64>,
}

impl CoherentAngles {
    pub fn new(angles: Vec<f64>) -> Self {
        let angles = angles.into_iter().map(|a| a.rem_euclid(TWO_PI)).collect();
        Self { angles }
    }

    /// All sites at the same angle.
    pub fn uniform(l: usize, theta: f64) -> Self {
        Self::new(vec![theta; l])
    }

    /// The ground-state ansatz `|pi/3>^L`.
    pub fn polarized_ground(l: usize) -> Self {
        Self::uniform(l, PI / 3.0)
    }

    /// The edge-mode ansatz: `pi/3` everywhere except `4pi/3` at the last
    /// site.
    pub fn edge_mode(l: usize) -> Self {
        let mut angles = vec![PI / 3.0; l];
        angles[l - 1] = 4.0 * PI / 3.0;
        Self::new(angles)
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    pub fn get(&self, site: usize) -> f64 {
        self.angles[site - 1]
    }
}

/// Assemble the product state in the Z basis.
pub fn coherent_state(angles: &CoherentAngles) -> PureState {
    let l = angles.len();
    let mut amps: Vec<f64> = Vec::with_capacity(1 << l);
    amps.push(1.0);
    for (bit, &theta) in angles.as_slice().iter().enumerate() {
        let c = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        let half = 1usize << bit;
        let mut next = vec![0.0; half << 1];
        for (idx, &a) in amps.iter().enumerate() {
            next[idx] = a * s; // site empty
            next[idx + half] = a * c; // site occupied
        }
        amps = next;
    }
    let v = Array1::from_iter(amps.iter().map(|&x| Complex64::new(x, 0.0)));
    PureState::normalized(v, BasisTag::Z).expect("product state norm")
}

/// Closed-form energy `<psi(theta)|H|psi(theta)>`.
///
/// Uses `<n_j> = (1 + cos th_j)/2` and `<sx_j> = sin th_j`; the product
/// structure factorizes the constrained term.
pub fn ansatz_energy(angles: &CoherentAngles, spec: &HamiltonianSpec) -> Result<f64> {
    let l = spec.l();
    if angles.len() != l {
        return Err(EastError::DimensionMismatch {
            expected: l,
            found: angles.len(),
        });
    }
    let th = angles.as_slice();
    let occ = |t: f64| 0.5 * (1.0 + t.cos());
    let mut bracket = th[0].sin();
    for j in 0..l - 1 {
        bracket += occ(th[j]) * th[j + 1].sin();
    }
    bracket += occ(th[l - 1]);
    Ok(match spec.regime() {
        Regime::Limit => -bracket,
        Regime::FiniteS(s) => {
            let diag: f64 = 0.5 * (1.0 + th.iter().map(|&t| occ(t)).sum::<f64>());
            diag - 0.5 * (-s).exp() * bracket
        }
    })
}

/// Per-site energy of the uniform-angle ansatz under periodic boundary
/// conditions, used as the variational functional for the optimum angle.
fn uniform_energy_density(theta: f64, regime: Regime) -> f64 {
    let packing = theta.sin() * (1.0 + theta.cos());
    match regime {
        Regime::Limit => -0.5 * packing,
        Regime::FiniteS(s) => 0.25 * (1.0 + theta.cos()) - 0.25 * (-s).exp() * packing,
    }
}

fn uniform_energy_density_deriv(theta: f64, regime: Regime) -> f64 {
    // d/dth [sin th (1 + cos th)] = cos th + cos 2th
    let dpacking = theta.cos() + (2.0 * theta).cos();
    match regime {
        Regime::Limit => -0.5 * dpacking,
        Regime::FiniteS(s) => -0.25 * theta.sin() - 0.25 * (-s).exp() * dpacking,
    }
}

/// Angle minimizing the uniform-ansatz energy density on (0, pi).
///
/// A coarse scan collects the interior local minima, each is refined by
/// bisection on the analytic derivative, and the lowest refined energy wins
/// (ties break toward the smaller angle, the branch continuous in s). For
/// the limit this is exactly pi/3; at s = 0 it is pi/2. For s > 0 no
/// interior stationary point exists: the infimum sits at the boundary
/// theta = pi (the empty chain) which is returned as-is; the ansatz is a
/// known-poor description of the exponentially localized ground state there.
pub fn optimal_uniform_angle(regime: Regime) -> f64 {
    const GRID: usize = 8192;
    let theta_at = |k: usize| PI * (k as f64 + 0.5) / GRID as f64;
    let e: Vec<f64> = (0..GRID)
        .map(|k| uniform_energy_density(theta_at(k), regime))
        .collect();

    let refine = |mut lo: f64, mut hi: f64| -> Option<f64> {
        if uniform_energy_density_deriv(lo, regime) >= 0.0
            || uniform_energy_density_deriv(hi, regime) <= 0.0
        {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if uniform_energy_density_deriv(mid, regime) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    };

    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for k in 1..GRID - 1 {
        if e[k] <= e[k - 1] && e[k] <= e[k + 1] {
            let theta = refine(theta_at(k - 1), theta_at(k + 1)).unwrap_or(theta_at(k));
            candidates.push((theta, uniform_energy_density(theta, regime)));
        }
    }
    // boundary infimum at theta -> pi (relevant for s > 0)
    candidates.push((PI, uniform_energy_density(PI, regime)));

    let best_e = candidates
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    candidates
        .iter()
        .filter(|&&(_, v)| v <= best_e + 1e-12)
        .map(|&(t, _)| t)
        .fold(f64::INFINITY, f64::min)
}

/// Outcome of the coordinate-ascent overlap maximization.
#[derive(Debug, Clone)]
pub struct OverlapMax {
    pub angles: CoherentAngles,
    /// `|<target|psi(theta)>|^2` at the returned angles.
    pub overlap: f64,
    pub converged: bool,
    pub sweeps: usize,
}

/// Maximize `|<target|psi(theta)>|^2` by coordinate ascent over the angles.
///
/// With every other site fixed the overlap is `A cos(t) + B sin(t)` in
/// `t = theta_j/2`, so each coordinate update is the exact arg-max
/// `t = atan2(B, A)`; sweeps repeat until the largest angle update drops
/// below 1e-10 (budget 10^4 sweeps). Deterministic given the initial angles.
/// On budget exhaustion the best angles found are returned with
/// `converged = false`.
pub fn maximize_overlap(target: &PureState, init: &CoherentAngles) -> Result<OverlapMax> {
    const TOL: f64 = 1e-10;
    const MAX_SWEEPS: usize = 10_000;

    if target.basis() != BasisTag::Z {
        return Err(EastError::BasisMismatch {
            expected: BasisTag::Z,
            found: target.basis(),
        });
    }
    let l = target.l();
    if init.len() != l {
        return Err(EastError::DimensionMismatch {
            expected: l,
            found: init.len(),
        });
    }
    let n = target.dim();
    // the target enters linearly; only its real and imaginary parts are needed
    let tre: Vec<f64> = target.amplitudes().iter().map(|a| a.re).collect();
    let tim: Vec<f64> = target.amplitudes().iter().map(|a| a.im).collect();

    let mut theta: Vec<f64> = init.as_slice().to_vec();
    let mut cos_half: Vec<f64> = theta.iter().map(|t| (t / 2.0).cos()).collect();
    let mut sin_half: Vec<f64> = theta.iter().map(|t| (t / 2.0).sin()).collect();

    let overlap_sq = |ch: &[f64], sh: &[f64]| -> f64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for c in 0..n {
            let mut w = 1.0;
            for (bit, (cj, sj)) in ch.iter().zip(sh.iter()).enumerate() {
                w *= if c >> bit & 1 == 1 { *cj } else { *sj };
            }
            re += tre[c] * w;
            im += tim[c] * w;
        }
        re * re + im * im
    };

    let mut best = overlap_sq(&cos_half, &sin_half);
    let mut sweeps = 0;
    let mut converged = false;

    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut max_update = 0.0f64;
        for site in 0..l {
            // contract the target against every site but `site`
            let (mut a_re, mut a_im, mut b_re, mut b_im) = (0.0, 0.0, 0.0, 0.0);
            for c in 0..n {
                let mut w = 1.0;
                for bit in 0..l {
                    if bit == site {
                        continue;
                    }
                    w *= if c >> bit & 1 == 1 {
                        cos_half[bit]
                    } else {
                        sin_half[bit]
                    };
                }
                if c >> site & 1 == 1 {
                    a_re += tre[c] * w;
                    a_im += tim[c] * w;
                } else {
                    b_re += tre[c] * w;
                    b_im += tim[c] * w;
                }
            }
            // |A cos t + B sin t|^2 is maximized at the principal axis of the
            // 2x2 Gram form; for a real target this is atan2(B, A)
            let aa = a_re * a_re + a_im * a_im;
            let bb = b_re * b_re + b_im * b_im;
            let ab = a_re * b_re + a_im * b_im;
            let t_new = 0.5 * (2.0 * ab).atan2(aa - bb);
            // two stationary axes per period; pick the maximizing one
            let val = |t: f64| {
                let (ct, st) = (t.cos(), t.sin());
                aa * ct * ct + bb * st * st + 2.0 * ab * ct * st
            };
            let cand = [t_new, t_new + PI / 2.0];
            let t_best = if val(cand[0]) >= val(cand[1]) {
                cand[0]
            } else {
                cand[1]
            };
            let theta_new = (2.0 * t_best).rem_euclid(TWO_PI);
            let delta = {
                let raw = (theta_new - theta[site]).abs();
                raw.min(TWO_PI - raw)
            };
            max_update = max_update.max(delta);
            theta[site] = theta_new;
            cos_half[site] = (theta_new / 2.0).cos();
            sin_half[site] = (theta_new / 2.0).sin();
        }
        let now = overlap_sq(&cos_half, &sin_half);
        best = best.max(now);
        if max_update < TOL {
            converged = true;
            break;
        }
    }

    Ok(OverlapMax {
        angles: CoherentAngles::new(theta),
        overlap: best,
        converged,
        sweeps,
    })
}

const LOG2_3: f64 = 1.584962500721156; // log2(3)

/// Analytic fractal dimension of the `|pi/3>` product state.
///
/// Z basis: `D_q = (log2(1 + 3^q) - 2q)/(1 - q)`; X basis:
/// `D_q = (2 (log2(sqrt3 + 1) - 3/2) q + log2(1 + (sqrt3 - 2)^{2q}))/(1 - q)`.
/// `q` may be infinite (the max-intensity exponent). `q = 1` is rejected;
/// use [`analytic_fractal_dimension_q1`].
pub fn analytic_fractal_dimension(q: f64, basis: BasisTag) -> Result<f64> {
    if q == 1.0 {
        return Err(EastError::QEqualsOne);
    }
    if !(q >= 0.0) {
        return Err(EastError::NonFiniteS(q));
    }
    if q.is_infinite() {
        return Ok(match basis {
            BasisTag::Z => 2.0 - LOG2_3,
            BasisTag::X => 3.0 - 2.0 * (3.0f64.sqrt() + 1.0).log2(),
        });
    }
    Ok(match basis {
        BasisTag::Z => ((1.0 + 3.0f64.powf(q)).log2() - 2.0 * q) / (1.0 - q),
        BasisTag::X => {
            let s3 = 3.0f64.sqrt();
            let lead = 2.0 * ((s3 + 1.0).log2() - 1.5) * q;
            // (sqrt3 - 2)^{2q} = (2 - sqrt3)^{2q}
            let tail = (1.0 + (2.0 - s3).powf(2.0 * q)).log2();
            (lead + tail) / (1.0 - q)
        }
    })
}

/// The q -> 1 limit of [`analytic_fractal_dimension`], by symmetric
/// differencing with h = 1e-5.
pub fn analytic_fractal_dimension_q1(basis: BasisTag) -> f64 {
    let h = 1e-5;
    let above = analytic_fractal_dimension(1.0 + h, basis).expect("q != 1");
    let below = analytic_fractal_dimension(1.0 - h, basis).expect("q != 1");
    0.5 * (above + below)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::HamiltonianSpec;

    #[test]
    fn polarized_states_hit_single_configurations() {
        let l = 4;
        let n = 1usize << l;
        let all_up = coherent_state(&CoherentAngles::uniform(l, 0.0));
        assert!((all_up.amplitude(n - 1).re - 1.0).abs() < 1e-15);
        let all_down = coherent_state(&CoherentAngles::uniform(l, PI));
        assert!((all_down.amplitude(0).re - 1.0).abs() < 1e-15);
        let even = coherent_state(&CoherentAngles::uniform(l, PI / 2.0));
        for c in 0..n {
            assert!((even.amplitude(c).re - (n as f64).powf(-0.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn ansatz_energy_closed_forms() {
        // uniform pi at the limit: every term vanishes
        let spec = HamiltonianSpec::limit(6).unwrap();
        let e = ansatz_energy(&CoherentAngles::uniform(6, PI), &spec).unwrap();
        assert!(e.abs() < 1e-15);

        // edge-mode ansatz: 5 sqrt3/8 - 1/4 - 3 sqrt3 L / 8
        let s3 = 3.0f64.sqrt();
        for l in 4..=12 {
            let spec = HamiltonianSpec::limit(l).unwrap();
            let e = ansatz_energy(&CoherentAngles::edge_mode(l), &spec).unwrap();
            let expect = 5.0 * s3 / 8.0 - 0.25 - 3.0 * s3 * l as f64 / 8.0;
            assert!((e - expect).abs() < 1e-12, "L themselves = {l}");
        }

        // uniform pi/3 at L = 4
        let spec = HamiltonianSpec::limit(4).unwrap();
        let e = ansatz_energy(&CoherentAngles::uniform(4, PI / 3.0), &spec).unwrap();
        assert!((e - (-13.0 * s3 / 8.0 - 0.75)).abs() < 1e-12);
    }

    #[test]
    fn uniform_angle_optima() {
        let limit = optimal_uniform_angle(Regime::Limit);
        assert!((limit - PI / 3.0).abs() < 1e-9, "{limit}");
        let rk = optimal_uniform_angle(Regime::FiniteS(0.0));
        assert!((rk - PI / 2.0).abs() < 1e-9, "{rk}");
    }

    #[test]
    fn optimum_angle_monotone_in_s() {
        let mut prev = optimal_uniform_angle(Regime::FiniteS(-6.0));
        let mut s = -5.5;
        while s <= 0.0 + 1e-12 {
            let now = optimal_uniform_angle(Regime::FiniteS(s));
            assert!(now > prev - 1e-12, "theta*({s}) = {now} < {prev}");
            prev = now;
            s += 0.5;
        }
    }

    #[test]
    fn overlap_recovers_self_target() {
        let l = 6;
        let truth = CoherentAngles::new(vec![0.7, 1.1, 0.2, 2.9, 1.4, 0.55]);
        let target = coherent_state(&truth);
        let init = CoherentAngles::uniform(l, 1.5);
        let out = maximize_overlap(&target, &init).unwrap();
        assert!(out.converged);
        assert!(out.overlap > 1.0 - 1e-10, "overlap {:.12}", out.overlap);
        for site in 1..=l {
            let d = (out.angles.get(site) - truth.get(site)).abs();
            let d = d.min(TWO_PI - d);
            assert!(d < 1e-5, "site {site}: {d:.2e}");
        }
    }

    #[test]
    fn overlap_never_drops_below_init() {
        let l = 5;
        let target = coherent_state(&CoherentAngles::new(vec![0.9, 2.2, 0.4, 1.8, 3.0]));
        let init = CoherentAngles::uniform(l, 2.0);
        let init_overlap = target.overlap_sq(&coherent_state(&init));
        let out = maximize_overlap(&target, &init).unwrap();
        assert!(out.overlap >= init_overlap - 1e-14);
    }

    #[test]
    fn analytic_dimensions_at_landmarks() {
        // D_0 = 1 in the Z basis
        let d0 = analytic_fractal_dimension(0.0, BasisTag::Z).unwrap();
        assert!((d0 - 1.0).abs() < 1e-14);
        // q -> infinity plateaus: 2 - log2(3) and 3 - 2 log2(sqrt3 + 1)
        let dz = analytic_fractal_dimension(f64::INFINITY, BasisTag::Z).unwrap();
        assert!((dz - 0.41503749927884392).abs() < 1e-12);
        let dx = analytic_fractal_dimension(f64::INFINITY, BasisTag::X).unwrap();
        assert!((dx - 0.10003137304700838).abs() < 1e-12);
        // large finite q approaches the plateau from above
        let dz50 = analytic_fractal_dimension(50.0, BasisTag::Z).unwrap();
        assert!(dz50 > dz && dz50 - dz < 0.02);
    }

    #[test]
    fn q_one_is_rejected_and_limited() {
        assert!(matches!(
            analytic_fractal_dimension(1.0, BasisTag::Z),
            Err(EastError::QEqualsOne)
        ));
        let d1 = analytic_fractal_dimension_q1(BasisTag::Z);
        // between D_0.9 and D_1.1
        let hi = analytic_fractal_dimension(0.9, BasisTag::Z).unwrap();
        let lo = analytic_fractal_dimension(1.1, BasisTag::Z).unwrap();
        assert!(d1 < hi && d1 > lo);
    }
}
