//! Desk-scale physics checks: ground-state structure, the edge mode, quench
//! dynamics, boundary response, and middle-spectrum hybridization. Heavy
//! eigendecompositions are cached on disk between runs.

mod common;

use east_core::coherent::{
    ansatz_energy, coherent_state, maximize_overlap, CoherentAngles,
};
use east_core::dynamics::{
    dominant_frequency, heisenberg_time, mean_sx_trajectory, survival_probability, TimeGrid,
};
use east_core::eigen::ground_state;
use east_core::observables::{
    entanglement_entropy, finite_size_dimension, local_expectation, overlap_kernel,
    page_value, project_out, LocalObservable,
};
use east_core::operators::{apply_parity, build_hamiltonian, HamiltonianSpec};
use east_core::response::{default_omega_grid, fit_lorentzian, greens_spectral};
use east_core::specstats::dos_statistics;
use std::f64::consts::PI;

#[test]
fn ground_state_structure_in_the_limit() {
    let l = 12;
    let d = common::limit_decomposition(l);
    let gs = d.state(0);
    let theta = coherent_state(&CoherentAngles::polarized_ground(l));
    let overlap = gs.overlap_sq(&theta);
    assert!(overlap > 0.5, "GS overlap {overlap}");

    // ansatz energy tracks the exact ground energy to O(1) accuracy
    let e_ansatz = ansatz_energy(
        &CoherentAngles::polarized_ground(l),
        &HamiltonianSpec::limit(l).unwrap(),
    )
    .unwrap();
    assert!((e_ansatz - d.eigenvalue(0)).abs() < 0.5);

    // half-cut entanglement entropy, small and nearly size-independent
    let s12 = entanglement_entropy(&gs, l / 2).unwrap();
    assert!((s12 - 0.0472).abs() < 0.005, "S_vN = {s12}");
    let mut previous = s12;
    for bigger in [14usize, 16] {
        let h = build_hamiltonian(&HamiltonianSpec::limit(bigger).unwrap());
        let sol = ground_state(&h, 1e-10, 7).unwrap();
        let s = entanglement_entropy(&sol.state, bigger / 2).unwrap();
        assert!((s - previous).abs() < 0.005, "L={bigger}: {s} vs {previous}");
        previous = s;
    }
}

#[test]
fn anti_ground_state_from_parity() {
    let l = 12;
    let d = common::limit_decomposition(l);
    let conj = apply_parity(&coherent_state(&CoherentAngles::polarized_ground(l))).unwrap();
    let overlap = d.state(d.len() - 1).overlap_sq(&conj);
    assert!(overlap > 0.3, "anti-ground overlap {overlap}");
}

#[test]
fn edge_mode_is_a_low_entropy_outlier() {
    let l = 12;
    let d = common::limit_decomposition(l);
    let bullet = coherent_state(&CoherentAngles::edge_mode(l));
    let weights = d.overlap_weights(&bullet);
    let (idx, &w) = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    assert!(w > 0.5, "edge-mode carrier weight {w}");
    assert!(idx > 0, "the edge mode lies above the ground state");

    let es = d.state(idx);
    let s = entanglement_entropy(&es, l / 2).unwrap();
    assert!((s - 0.109).abs() < 0.02, "S_vN(ES1) = {s}");
    assert!(s < 0.2 * page_value(l / 2, l / 2));

    // local observables: bulk sites match the tilted product values, the
    // last site is flipped
    let s3h = 3.0f64.sqrt() / 2.0;
    for j in 1..l {
        let n = local_expectation(&es, j, LocalObservable::Density).unwrap();
        let sx = local_expectation(&es, j, LocalObservable::SigmaX).unwrap();
        assert!((n - 0.75).abs() < 0.1, "site {j} density {n}");
        assert!((sx - s3h).abs() < 0.12, "site {j} sx {sx}");
    }
    let n_last = local_expectation(&es, l, LocalObservable::Density).unwrap();
    let sx_last = local_expectation(&es, l, LocalObservable::SigmaX).unwrap();
    assert!(n_last < 0.5, "edge density {n_last}");
    assert!(sx_last < 0.0, "edge sx {sx_last}");

    // its ansatz energy formula
    let e_formula = 5.0 * 3.0f64.sqrt() / 8.0 - 0.25 - 3.0 * 3.0f64.sqrt() * l as f64 / 8.0;
    assert!((d.eigenvalue(idx) - e_formula).abs() < 0.5);
}

#[test]
fn overlap_optimizer_finds_the_edge_pattern() {
    let l = 10;
    let d = common::limit_decomposition(l);
    let bullet = coherent_state(&CoherentAngles::edge_mode(l));
    let weights = d.overlap_weights(&bullet);
    let idx = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    let target = d.state(idx);

    // start from the uniform ground ansatz; the optimizer must discover the
    // flipped edge spin on its own
    let out = maximize_overlap(&target, &CoherentAngles::polarized_ground(l)).unwrap();
    assert!(out.overlap > 0.55, "optimized overlap {}", out.overlap);
    let bulk: Vec<f64> = (1..l).map(|j| out.angles.get(j)).collect();
    for w in bulk.windows(2) {
        assert!((w[0] - w[1]).abs() < 0.05, "bulk angles {bulk:?}");
    }
    let edge_diff = (out.angles.get(l) - out.angles.get(1)).abs();
    let edge_diff = edge_diff.min(2.0 * PI - edge_diff);
    assert!((edge_diff - PI).abs() < 0.35, "edge angle offset {edge_diff}");
}

#[test]
fn survival_of_the_polarized_state_stays_high() {
    let l = 12;
    let d = common::limit_decomposition(l);
    let theta = coherent_state(&CoherentAngles::polarized_ground(l));
    let t_h = heisenberg_time(&d);
    let grid = TimeGrid::logarithmic(t_h, 10.0 * t_h, 64).unwrap();
    let r = survival_probability(&theta, &d, &grid).unwrap();
    for (&t, &v) in grid.times().iter().zip(r.iter()) {
        assert!(v > 0.3, "R({t}) = {v}");
        assert!(v <= 1.0 + 1e-12);
    }
}

#[test]
fn two_carrier_oscillations_at_intermediate_s() {
    let l = 12;
    let d = common::finite_decomposition(l, -0.5);
    let bullet = coherent_state(&CoherentAngles::edge_mode(l));
    let mut weights: Vec<(usize, f64)> = d
        .overlap_weights(&bullet)
        .into_iter()
        .enumerate()
        .collect();
    weights.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let combined = weights[0].1 + weights[1].1;
    assert!(combined > 0.7, "two-carrier weight {combined}");
    assert!(weights[2].1 < 0.1, "third weight {}", weights[2].1);

    let gap = (d.eigenvalue(weights[0].0) - d.eigenvalue(weights[1].0)).abs();
    let span = 30.0 * 2.0 * PI / gap;
    let grid = TimeGrid::linear(0.0, span, 4096).unwrap();
    let r = survival_probability(&bullet, &d, &grid).unwrap();
    let omega_r = dominant_frequency(grid.times(), &r);
    assert!((omega_r - gap).abs() / gap < 0.02, "R freq {omega_r} vs gap {gap}");

    let sx = mean_sx_trajectory(&bullet, &d, &grid).unwrap();
    let omega_sx = dominant_frequency(grid.times(), &sx);
    assert!(
        (omega_sx - gap).abs() / gap < 0.02,
        "sx freq {omega_sx} vs gap {gap}"
    );

    // initial magnetization of the edge ansatz: (L-1)/L * sqrt(3)/2 - 1/L * sqrt(3)/2
    let expect_sx0 = 3.0f64.sqrt() / 2.0 * (l as f64 - 2.0) / l as f64;
    assert!((sx[0] - expect_sx0).abs() < 1e-10);
}

#[test]
fn polarized_state_magnetization_at_time_zero() {
    let l = 10;
    let d = common::limit_decomposition(l);
    let theta = coherent_state(&CoherentAngles::polarized_ground(l));
    let grid = TimeGrid::linear(0.0, 1.0, 4).unwrap();
    let sx = mean_sx_trajectory(&theta, &d, &grid).unwrap();
    assert!((sx[0] - 3.0f64.sqrt() / 2.0).abs() < 1e-10);
}

#[test]
fn edge_response_peak_is_size_stable() {
    let eta = 0.15;
    let mut peaks = Vec::new();
    for l in [8usize, 10, 12] {
        let d = common::limit_decomposition(l);
        let grid = default_omega_grid(&d, 0, eta);
        let curve = greens_spectral(&d, 0, &grid, eta).unwrap();
        let total = curve.integral();
        assert!((total - 1.0).abs() < 0.01, "L={l} sum rule {total}");
        let fit = fit_lorentzian(&curve).unwrap();
        assert!(fit.gamma > 0.0 && fit.weight > 0.0);
        peaks.push(fit.omega0);
    }
    let p12 = peaks[2];
    assert!((p12 - 0.88).abs() < 0.15, "omega0 at L=12: {p12}");
    for &p in &peaks {
        assert!((p - p12).abs() / p12 < 0.1, "peaks {peaks:?}");
    }
}

#[test]
fn projected_ground_state_is_more_entangled_and_delocalized() {
    let l = 12;
    let d = common::limit_decomposition(l);
    let gs = d.state(0);
    let theta = coherent_state(&CoherentAngles::polarized_ground(l));
    let projected = project_out(&gs, &theta).unwrap();
    assert!(projected.overlap(&theta).norm() < 1e-12);

    let s_gs = entanglement_entropy(&gs, l / 2).unwrap();
    let s_proj = entanglement_entropy(&projected, l / 2).unwrap();
    assert!(s_proj > s_gs, "{s_proj} vs {s_gs}");

    for q in [0.5, 2.0] {
        let d_proj = finite_size_dimension(&projected, q);
        let d_theta = finite_size_dimension(&theta, q);
        assert!(d_proj > d_theta, "q={q}: {d_proj} vs {d_theta}");
    }
}

#[test]
fn middle_window_states_hybridize() {
    let l = 12;
    let d = common::limit_decomposition(l);
    let stats = dos_statistics(d.eigenvalues());
    let h = build_hamiltonian(&HamiltonianSpec::limit(l).unwrap());
    let window = east_core::eigen::interior_window(&h, -0.5, 256).unwrap();
    assert!(!window.is_complete());

    // K(omega) ~ 1 across the window
    let (lo, hi) = (window.eigenvalue(0), window.eigenvalue(window.len() - 1));
    let edges: Vec<f64> = (0..=24).map(|k| (hi - lo) * k as f64 / 24.0).collect();
    let k = overlap_kernel(&window, lo, &edges).unwrap();
    let finite: Vec<f64> = k.iter().copied().filter(|v| v.is_finite()).collect();
    assert!(!finite.is_empty());
    for &v in &finite {
        assert!(v > 0.6 && v < 1.6, "K = {v}");
    }

    // f^2(omega) flat within a factor 3 over the window
    let f2 = east_core::observables::observable_spectral_function(
        &window,
        l / 2,
        &edges,
        &stats.gaussian,
    )
    .unwrap();
    let finite: Vec<f64> = f2.into_iter().filter(|v| v.is_finite() && *v > 0.0).collect();
    assert!(finite.len() > 12);
    let max = finite.iter().cloned().fold(f64::MIN, f64::max);
    let min = finite.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max / min < 3.0, "f2 spread {min}..{max}");
}
