//! Second-implementation oracles: a self-contained cyclic Jacobi eigensolver
//! checks the production solver at small sizes, and the exact spectral
//! identities of the limit chain are verified end to end.

mod common;

use east_core::eigen::full_diagonalize;
use east_core::operators::{build_hamiltonian, HamiltonianSpec};

/// Cyclic Jacobi rotations on a dense symmetric matrix. Deliberately naive
/// and independent of the LAPACK path.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vals
}

fn dense_rows(spec: &HamiltonianSpec) -> Vec<Vec<f64>> {
    let d = build_hamiltonian(spec).to_dense();
    (0..d.nrows())
        .map(|i| (0..d.ncols()).map(|j| d[[i, j]]).collect())
        .collect()
}

#[test]
fn spectra_match_jacobi_oracle() {
    for l in 1..=6 {
        for spec in [
            HamiltonianSpec::limit(l).unwrap(),
            HamiltonianSpec::finite(l, -0.5).unwrap(),
            HamiltonianSpec::finite(l, 0.3).unwrap(),
        ] {
            let oracle = jacobi_eigenvalues(dense_rows(&spec));
            let d = full_diagonalize(&build_hamiltonian(&spec)).unwrap();
            for (a, b) in oracle.iter().zip(d.eigenvalues().iter()) {
                assert!((a - b).abs() < 1e-9, "L={l} spec={spec:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn spectral_pairing_of_the_limit_chain() {
    // chiral structure maps the sorted spectrum onto itself under E -> -E-1
    for l in 2..=6 {
        let d = common::limit_decomposition(l);
        let mut mapped: Vec<f64> = d.eigenvalues().iter().map(|&e| -e - 1.0).collect();
        mapped.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in d.eigenvalues().iter().zip(mapped.iter()) {
            assert!((a - b).abs() < 1e-9, "L={l}");
        }
    }
}

#[test]
fn exact_trace_identities_through_the_spectrum() {
    for l in 4..=10 {
        let h = build_hamiltonian(&HamiltonianSpec::limit(l).unwrap());
        let n = h.dim() as f64;
        assert_eq!(h.trace(), -(n / 2.0));
        assert_eq!(h.trace_of_square(), n * (1.0 + l as f64 / 2.0));
    }
}

#[test]
fn finite_s_decomposition_invariants() {
    let spec = HamiltonianSpec::finite(8, -0.7).unwrap();
    let h = build_hamiltonian(&spec);
    let d = full_diagonalize(&h).unwrap();
    let (resid, ortho) = d.verify(&h);
    assert!(resid < 1e-8);
    assert!(ortho < 1e-10);
}

#[test]
fn chebyshev_ground_state_invariants() {
    let h = build_hamiltonian(&HamiltonianSpec::limit(11).unwrap());
    let gs = east_core::eigen::ground_state(&h, 1e-10, 23).unwrap();
    // the converged energy never exceeds any Ritz value seen on the way
    let min_seen = gs.history.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(gs.energy <= min_seen + 1e-10);
    // running best estimate is monotone non-increasing by construction
    let mut best = f64::INFINITY;
    for &theta in &gs.history {
        let new_best = best.min(theta);
        assert!(new_best <= best);
        best = new_best;
    }
    // cross-check against the Lanczos implementation
    let (e_lanczos, _) = east_core::eigen::lanczos_lowest(&h, 400, 1e-10, 23).unwrap();
    assert!((gs.energy - e_lanczos).abs() < 1e-8);
}
