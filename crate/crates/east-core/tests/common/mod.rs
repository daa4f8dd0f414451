//! Shared helpers for the integration suites: eigendecompositions are cached
//! on disk under the target dir so repeated test runs skip the heavy solves.

use std::path::PathBuf;

use east_core::eigen::{self, EigenDecomposition};
use east_core::operators::{build_hamiltonian, HamiltonianSpec};
use east_core::{cache, Regime};

pub fn cache_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("east-cache");
    std::fs::create_dir_all(&dir).expect("create cache dir");
    dir
}

pub fn decomposition(spec: &HamiltonianSpec) -> EigenDecomposition {
    let dir = cache_dir();
    if let Ok(Some(d)) = cache::load_decomposition(&dir, spec) {
        return d;
    }
    let h = build_hamiltonian(spec);
    let d = eigen::full_diagonalize(&h).expect("dense solve");
    let _ = cache::save_decomposition(&dir, spec, &d);
    d
}

#[allow(dead_code)]
pub fn limit_decomposition(l: usize) -> EigenDecomposition {
    decomposition(&HamiltonianSpec::limit(l).expect("valid l"))
}

#[allow(dead_code)]
pub fn finite_decomposition(l: usize, s: f64) -> EigenDecomposition {
    decomposition(&HamiltonianSpec::finite(l, s).expect("valid spec"))
}

#[allow(dead_code)]
pub fn spec_of(l: usize, regime: Regime) -> HamiltonianSpec {
    match regime {
        Regime::Limit => HamiltonianSpec::limit(l).unwrap(),
        Regime::FiniteS(s) => HamiltonianSpec::finite(l, s).unwrap(),
    }
}
