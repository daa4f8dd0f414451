//! Thin wrapper over the LAPACK divide-and-conquer symmetric eigensolver.
//!
//! `dsyevd` is considerably faster than the QR driver for the dense sizes
//! used here (2^12 and up). The symbols come from the openblas library that
//! `ndarray-linalg` already links.

use ndarray::{Array2, ShapeBuilder};
use std::os::raw::c_char;

use crate::error::{EastError, Result};

#[link(name = "openblas")]
extern "C" {
    fn dsyevd_(
        jobz: *const c_char,
        uplo: *const c_char,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );
}

fn run_dsyevd(jobz: c_char, a: &mut [f64], n: usize, w: &mut [f64]) -> Result<()> {
    let n_i = n as i32;
    let uplo = b'L' as c_char;
    let mut info = 0i32;

    // workspace query
    let (mut wkopt, mut iwkopt) = (0.0f64, 0i32);
    let m1 = -1i32;
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &n_i,
            a.as_mut_ptr(),
            &n_i,
            w.as_mut_ptr(),
            &mut wkopt,
            &m1,
            &mut iwkopt,
            &m1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(EastError::Lapack {
            routine: "dsyevd(query)",
            info,
        });
    }
    let lwork = wkopt as i32;
    let liwork = iwkopt;
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &n_i,
            a.as_mut_ptr(),
            &n_i,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(EastError::Lapack {
            routine: "dsyevd",
            info,
        });
    }
    Ok(())
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a symmetric matrix.
/// The input is consumed; its buffer is reused for the eigenvectors.
pub fn symmetric_eigen(a: Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    // A symmetric matrix has the same buffer in row- and column-major order,
    // so the ndarray (row-major) data can go to LAPACK directly. The output
    // buffer is column-major with eigenvectors in columns.
    let mut buf = a.into_raw_vec_and_offset().0;
    let mut w = vec![0.0f64; n];
    run_dsyevd(b'V' as c_char, &mut buf, n, &mut w)?;
    let vecs = Array2::from_shape_vec((n, n).f(), buf).expect("shape");
    Ok((w, vecs))
}

/// Eigenvalues only (ascending) of a symmetric matrix.
pub fn symmetric_eigenvalues(a: Array2<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    let mut buf = a.into_raw_vec_and_offset().0;
    let mut w = vec![0.0f64; n];
    run_dsyevd(b'N' as c_char, &mut buf, n, &mut w)?;
    Ok(w)
}
