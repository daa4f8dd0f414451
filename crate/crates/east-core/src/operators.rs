//! East-chain Hamiltonians, the Z parity operator, and basis rotations.
//!
//! The chain couples site j to a flip of site j+1 only when site j is
//! occupied; site 1 flips unconditionally. With chemical potential mu = 1 the
//! finite-s Hamiltonian reads
//!
//!   H(s) = (I + N)/2 - (e^{-s}/2) (sx_1 + sum_{j<L} n_j sx_{j+1} + n_L)
//!
//! and the s -> -infinity limit keeps only the bracket with unit strength:
//!
//!   H_lim = -sx_1 - sum_{j<L} n_j sx_{j+1} - n_L.
//!
//! The limit form is a distinct regime, not a large-s float: it drops the
//! diagonal (I + N)/2 instead of rescaling it.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::basis::SpinBasis;
use crate::error::{EastError, Result};
use crate::state::{BasisTag, PureState};

/// Coupling regime of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// The s -> -infinity reduced operator.
    Limit,
    /// Finite control parameter s (flip strength e^{-s}).
    FiniteS(f64),
}

/// Everything needed to build one Hamiltonian: size and regime (mu = 1 fixed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    basis: SpinBasis,
    regime: Regime,
}

impl HamiltonianSpec {
    pub fn limit(l: usize) -> Result<Self> {
        Ok(Self {
            basis: SpinBasis::new(l)?,
            regime: Regime::Limit,
        })
    }

    pub fn finite(l: usize, s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(EastError::NonFiniteS(s));
        }
        Ok(Self {
            basis: SpinBasis::new(l)?,
            regime: Regime::FiniteS(s),
        })
    }

    pub fn l(&self) -> usize {
        self.basis.l()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> SpinBasis {
        self.basis
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Canonical string used for cache keys; exact in the s bits.
    pub fn key_string(&self) -> String {
        match self.regime {
            Regime::Limit => format!("l={};regime=limit", self.l()),
            Regime::FiniteS(s) => {
                format!("l={};regime=s:{:016x}", self.l(), s.to_bits())
            }
        }
    }
}

/// Row-compressed symmetric sparse matrix (full pattern stored).
#[derive(Debug, Clone)]
pub struct SparseSym {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseSym {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, y_r) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *y_r = acc;
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| (self.cols[k] as usize, self.vals[k]))
    }
}

/// Real symmetric operator on the 2^L space, sparse or dense.
#[derive(Debug, Clone)]
pub enum OperatorMatrix {
    Sparse(SparseSym),
    Dense(Array2<f64>),
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        match self {
            OperatorMatrix::Sparse(s) => s.dim,
            OperatorMatrix::Dense(d) => d.nrows(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, OperatorMatrix::Sparse(_))
    }

    /// `y = H x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        match self {
            OperatorMatrix::Sparse(s) => s.matvec(x, y),
            OperatorMatrix::Dense(d) => {
                let xv = ndarray::ArrayView1::from(x);
                let out = d.dot(&xv);
                y.copy_from_slice(out.as_slice().expect("contiguous"));
            }
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.matvec(x, &mut y);
        y
    }

    /// Explicit dense materialization.
    pub fn to_dense(&self) -> Array2<f64> {
        match self {
            OperatorMatrix::Dense(d) => d.clone(),
            OperatorMatrix::Sparse(s) => {
                let mut d = Array2::zeros((s.dim, s.dim));
                for r in 0..s.dim {
                    for (c, v) in s.row(r) {
                        d[[r, c]] = v;
                    }
                }
                d
            }
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            OperatorMatrix::Dense(d) => d.diag().sum(),
            OperatorMatrix::Sparse(s) => (0..s.dim)
                .map(|r| s.row(r).find(|&(c, _)| c == r).map_or(0.0, |(_, v)| v))
                .sum(),
        }
    }

    /// Trace of H^2; for a symmetric matrix this is the sum of all squared
    /// entries.
    pub fn trace_of_square(&self) -> f64 {
        match self {
            OperatorMatrix::Dense(d) => d.iter().map(|v| v * v).sum(),
            OperatorMatrix::Sparse(s) => s.vals.iter().map(|v| v * v).sum(),
        }
    }

    /// Gershgorin bound: every eigenvalue lies in [lo, hi].
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        match self {
            OperatorMatrix::Sparse(s) => {
                for r in 0..s.dim {
                    let mut diag = 0.0;
                    let mut radius = 0.0;
                    for (c, v) in s.row(r) {
                        if c == r {
                            diag = v;
                        } else {
                            radius += v.abs();
                        }
                    }
                    lo = lo.min(diag - radius);
                    hi = hi.max(diag + radius);
                }
            }
            OperatorMatrix::Dense(d) => {
                for r in 0..d.nrows() {
                    let diag = d[[r, r]];
                    let radius: f64 = (0..d.ncols())
                        .filter(|&c| c != r)
                        .map(|c| d[[r, c]].abs())
                        .sum();
                    lo = lo.min(diag - radius);
                    hi = hi.max(diag + radius);
                }
            }
        }
        (lo, hi)
    }

    /// `<bra|H|ket>` for real vectors.
    pub fn expectation(&self, v: &[f64]) -> f64 {
        let hv = self.matvec_alloc(v);
        crate::state::kahan_sum(v.iter().zip(hv.iter()).map(|(a, b)| a * b))
    }
}

/// Assemble the East Hamiltonian for `spec` in sparse row-compressed form.
///
/// Row entries are sorted by column, so the assembly is deterministic.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> OperatorMatrix {
    let basis = spec.basis();
    let l = basis.l();
    let n = basis.dim();

    let (flip_amp, diagonal): (f64, Box<dyn Fn(usize) -> f64>) = match spec.regime() {
        Regime::Limit => (
            -1.0,
            Box::new(move |c| {
                // only -n_L contributes on the diagonal
                if basis.occupied(c, l) {
                    -1.0
                } else {
                    0.0
                }
            }),
        ),
        Regime::FiniteS(s) => {
            let g = 0.5 * (-s).exp();
            (
                -g,
                Box::new(move |c| {
                    let occ = basis.occupation_count(c) as f64;
                    let n_l = basis.occupied(c, l) as u8 as f64;
                    0.5 * (1.0 + occ) - g * n_l
                }),
            )
        }
    };

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols: Vec<u32> = Vec::with_capacity(n * (l + 1));
    let mut vals: Vec<f64> = Vec::with_capacity(n * (l + 1));
    let mut entries: Vec<(u32, f64)> = Vec::with_capacity(l + 1);

    row_ptr.push(0);
    for c in 0..n {
        entries.clear();
        let d = diagonal(c);
        if d != 0.0 {
            entries.push((c as u32, d));
        }
        // unconditional boundary flip at site 1
        entries.push((basis.flip(c, 1) as u32, flip_amp));
        // constrained flips: site j occupied gates a flip at site j+1
        for j in 1..l {
            if basis.occupied(c, j) {
                entries.push((basis.flip(c, j + 1) as u32, flip_amp));
            }
        }
        entries.sort_unstable_by_key(|&(col, _)| col);
        for &(col, v) in &entries {
            cols.push(col);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }

    OperatorMatrix::Sparse(SparseSym {
        dim: n,
        row_ptr,
        cols,
        vals,
    })
}

/// Apply the Z parity operator: the amplitude at configuration `c` picks up
/// the sign (-1)^(number of empty sites in c). Requires a Z-basis state.
pub fn apply_parity(state: &PureState) -> Result<PureState> {
    if state.basis() != BasisTag::Z {
        return Err(EastError::BasisMismatch {
            expected: BasisTag::Z,
            found: state.basis(),
        });
    }
    let l = state.l();
    let amps = Array1::from_iter(state.amplitudes().iter().enumerate().map(|(c, &a)| {
        let zeros = l as u32 - (c as u64).count_ones();
        if zeros % 2 == 1 {
            -a
        } else {
            a
        }
    }));
    PureState::new(amps, BasisTag::Z)
}

/// Normalized Hadamard on every site, in place over an amplitude buffer.
fn walsh_hadamard(amps: &mut Array1<Complex64>, l: usize) {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let a = amps.as_slice_mut().expect("contiguous");
    for bit in 0..l {
        let mask = 1usize << bit;
        let mut base = 0usize;
        while base < a.len() {
            for low in 0..mask {
                let i = base + low;
                let j = i + mask;
                let (x, y) = (a[i], a[j]);
                a[i] = (x + y) * inv_sqrt2;
                a[j] = (x - y) * inv_sqrt2;
            }
            base += mask << 1;
        }
    }
}

/// Rotate a Z-basis state into the X basis (Hadamard at every site).
///
/// In the X tag, bit 0 of a configuration indexes `|+>`; applying the
/// rotation twice returns the input, so [`to_z_basis`] is the same transform
/// with the tags swapped.
pub fn to_x_basis(state: &PureState) -> Result<PureState> {
    if state.basis() != BasisTag::Z {
        return Err(EastError::BasisMismatch {
            expected: BasisTag::Z,
            found: state.basis(),
        });
    }
    let l = state.l();
    let mut amps = state.clone().into_amplitudes();
    walsh_hadamard(&mut amps, l);
    PureState::new(amps, BasisTag::X)
}

/// Inverse direction of [`to_x_basis`].
pub fn to_z_basis(state: &PureState) -> Result<PureState> {
    if state.basis() != BasisTag::X {
        return Err(EastError::BasisMismatch {
            expected: BasisTag::X,
            found: state.basis(),
        });
    }
    let l = state.l();
    let mut amps = state.clone().into_amplitudes();
    walsh_hadamard(&mut amps, l);
    PureState::new(amps, BasisTag::Z)
}

/// Apply the boundary pi pulse O = -i sigma^y_site to real amplitudes:
/// `|0> -> |1>`, `|1> -> -|0>` on the chosen site.
pub fn apply_pi_pulse_y(amps: &[f64], l: usize, site: usize) -> Vec<f64> {
    let basis = SpinBasis::new(l).expect("valid l");
    let mask = basis.site_mask(site);
    let mut out = vec![0.0; amps.len()];
    for (c, &a) in amps.iter().enumerate() {
        if c & mask != 0 {
            out[c ^ mask] -= a;
        } else {
            out[c ^ mask] += a;
        }
    }
    out
}
