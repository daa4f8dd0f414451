//! Pure states of the chain: complex amplitude vectors over a product basis.

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64;

use crate::error::{EastError, Result};

/// Which single-site product basis the amplitudes refer to.
///
/// `Z` is the occupation basis (bit 1 = occupied). `X` is the sigma-x
/// eigenbasis reached by a Hadamard on every site; in the X tag, bit 0 of a
/// configuration indexes the `|+>` state of that site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    Z,
    X,
}

const NORM_TOL: f64 = 1e-12;

/// Normalized state vector tagged with its basis.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: Array1<Complex64>,
    basis: BasisTag,
}

impl PureState {
    /// Wrap an amplitude vector, checking normalization to 1e-12 and that the
    /// length is a power of two.
    pub fn new(amplitudes: Array1<Complex64>, basis: BasisTag) -> Result<Self> {
        let n = amplitudes.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(EastError::DimensionMismatch {
                expected: n.next_power_of_two().max(2),
                found: n,
            });
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(EastError::NormViolation((norm_sq - 1.0).abs()));
        }
        Ok(Self { amplitudes, basis })
    }

    /// Wrap real amplitudes (normalization checked).
    pub fn from_real(amplitudes: &[f64], basis: BasisTag) -> Result<Self> {
        let v = Array1::from_iter(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::new(v, basis)
    }

    /// Normalize an arbitrary vector and wrap it.
    pub fn normalized(mut amplitudes: Array1<Complex64>, basis: BasisTag) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(EastError::NormViolation(1.0));
        }
        amplitudes.mapv_inplace(|a| a / norm);
        Self::new(amplitudes, basis)
    }

    /// Basis vector `|config>` of an `2^l`-dimensional space.
    pub fn basis_vector(l: usize, config: usize, basis: BasisTag) -> Result<Self> {
        let n = 1usize << l;
        let mut v = Array1::zeros(n);
        v[config] = Complex64::new(1.0, 0.0);
        Self::new(v, basis)
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Number of sites (`log2` of the dimension).
    pub fn l(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> ArrayView1<'_, Complex64> {
        self.amplitudes.view()
    }

    pub fn amplitude(&self, config: usize) -> Complex64 {
        self.amplitudes[config]
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`.
    pub fn overlap_sq(&self, other: &PureState) -> f64 {
        self.overlap(other).norm_sqr()
    }

    /// Intensities `|psi(c)|^2`.
    pub fn intensities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub(crate) fn into_amplitudes(self) -> Array1<Complex64> {
        self.amplitudes
    }

    /// Real parts of the amplitudes (valid for states built from real data).
    pub fn real_parts(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.re).collect()
    }
}

/// Compensated (Kahan) sum; keeps long accumulations near machine precision.
pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
