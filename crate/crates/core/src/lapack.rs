//! Thin safe wrappers over the handful of LAPACK drivers the crate needs.
//!
//! All matrices are column-major, which matches `nalgebra`'s storage, so
//! buffers are handed to LAPACK without copies beyond the one each driver
//! destroys.

use std::os::raw::{c_char, c_int};

use lapack_sys::__BindgenComplex;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{KreinError, Result};

type LapackComplex = __BindgenComplex<f64>;

fn flag(c: u8) -> *const c_char {
    match c {
        b'V' => c"V".as_ptr(),
        b'N' => c"N".as_ptr(),
        b'A' => c"A".as_ptr(),
        b'I' => c"I".as_ptr(),
        b'L' => c"L".as_ptr(),
        _ => unreachable!("unsupported LAPACK flag"),
    }
}

fn as_lapack(ptr: *mut Complex64) -> *mut LapackComplex {
    // `Complex<f64>` is `#[repr(C)] { re, im }`, layout-identical to the bindgen type.
    ptr as *mut LapackComplex
}

fn to_int(n: usize) -> Result<c_int> {
    c_int::try_from(n).map_err(|_| KreinError::InvalidInput(format!("dimension {n} too large for LAPACK")))
}

fn tridiagonal_norm(diag: &[f64], off: &[f64]) -> f64 {
    let mut norm = 0.0f64;
    for (i, d) in diag.iter().enumerate() {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = off.get(i).map_or(0.0, |e| e.abs());
        norm = norm.max(d.abs() + left + right);
    }
    norm
}

fn dense_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// All eigenpairs of a real symmetric tridiagonal matrix (`dstemr`).
///
/// Returns ascending eigenvalues and the column-major eigenvector matrix.
pub(crate) fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = diag.len();
    check_tridiagonal(diag, off)?;
    let ni = to_int(n)?;
    let mut d = diag.to_vec();
    // dstemr wants E of length n; the last entry is workspace.
    let mut e = off.to_vec();
    e.push(0.0);
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n * n];
    let mut m: c_int = 0;
    let mut isuppz = vec![0 as c_int; 2 * n];
    let mut tryrac: c_int = 1;
    let mut info: c_int = 0;
    let (vl, vu, il, iu) = (0.0f64, 0.0f64, 0 as c_int, 0 as c_int);

    let mut work_query = 0.0f64;
    let mut iwork_query: c_int = 0;
    let query: c_int = -1;
    unsafe {
        lapack_sys::dstemr_(
            flag(b'V'), flag(b'A'), &ni, d.as_mut_ptr(), e.as_mut_ptr(), &vl, &vu, &il, &iu,
            &mut m, w.as_mut_ptr(), z.as_mut_ptr(), &ni, &ni, isuppz.as_mut_ptr(), &mut tryrac,
            &mut work_query, &query, &mut iwork_query, &query, &mut info,
        );
    }
    if info != 0 {
        return Err(nonconvergence("dstemr", info, n, tridiagonal_norm(diag, off)));
    }
    let lwork = (work_query as usize).max(18 * n).max(1);
    let liwork = (iwork_query as usize).max(10 * n).max(1);
    let mut work = vec![0.0f64; lwork];
    let mut iwork = vec![0 as c_int; liwork];
    let (lw, liw) = (to_int(lwork)?, to_int(liwork)?);
    unsafe {
        lapack_sys::dstemr_(
            flag(b'V'), flag(b'A'), &ni, d.as_mut_ptr(), e.as_mut_ptr(), &vl, &vu, &il, &iu,
            &mut m, w.as_mut_ptr(), z.as_mut_ptr(), &ni, &ni, isuppz.as_mut_ptr(), &mut tryrac,
            work.as_mut_ptr(), &lw, iwork.as_mut_ptr(), &liw, &mut info,
        );
    }
    if info != 0 || m as usize != n {
        return Err(nonconvergence("dstemr", info, n, tridiagonal_norm(diag, off)));
    }
    Ok((w, DMatrix::from_vec(n, n, z)))
}

/// Eigenvalues with (0-based, inclusive) indices `first..=last` of a symmetric
/// tridiagonal matrix, no vectors.
pub(crate) fn tridiagonal_eigenvalues_range(
    diag: &[f64],
    off: &[f64],
    first: usize,
    last: usize,
) -> Result<Vec<f64>> {
    let n = diag.len();
    check_tridiagonal(diag, off)?;
    if first > last || last >= n {
        return Err(KreinError::InvalidInput(format!(
            "eigenvalue index range {first}..={last} invalid for dimension {n}"
        )));
    }
    let ni = to_int(n)?;
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut w = vec![0.0; n];
    let mut z = [0.0f64; 1];
    let one: c_int = 1;
    let mut m: c_int = 0;
    let mut isuppz = vec![0 as c_int; 2 * n];
    let mut tryrac: c_int = 1;
    let mut info: c_int = 0;
    let (vl, vu) = (0.0f64, 0.0f64);
    let (il, iu) = (to_int(first + 1)?, to_int(last + 1)?);
    let lwork = 12 * n.max(1);
    let liwork = 8 * n.max(1);
    let mut work = vec![0.0f64; lwork];
    let mut iwork = vec![0 as c_int; liwork];
    let (lw, liw) = (to_int(lwork)?, to_int(liwork)?);
    unsafe {
        lapack_sys::dstemr_(
            flag(b'N'), flag(b'I'), &ni, d.as_mut_ptr(), e.as_mut_ptr(), &vl, &vu, &il, &iu,
            &mut m, w.as_mut_ptr(), z.as_mut_ptr(), &one, &one, isuppz.as_mut_ptr(), &mut tryrac,
            work.as_mut_ptr(), &lw, iwork.as_mut_ptr(), &liw, &mut info,
        );
    }
    if info != 0 || m as usize != last - first + 1 {
        return Err(nonconvergence("dstemr", info, n, tridiagonal_norm(diag, off)));
    }
    w.truncate(m as usize);
    Ok(w)
}

/// All eigenpairs of a complex Hermitian matrix (`zheevr`, lower triangle read).
pub(crate) fn hermitian_eigen(a: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let (w, z) = zheevr(a, true)?;
    Ok((w, z.expect("vectors requested")))
}

/// Eigenvalues only of a complex Hermitian matrix.
pub(crate) fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    zheevr(a, false).map(|(w, _)| w)
}

fn zheevr(a: &DMatrix<Complex64>, vectors: bool) -> Result<(Vec<f64>, Option<DMatrix<Complex64>>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(KreinError::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if n == 0 {
        return Ok((Vec::new(), vectors.then(|| DMatrix::zeros(0, 0))));
    }
    let ni = to_int(n)?;
    let mut buf = a.clone();
    let mut w = vec![0.0f64; n];
    let ldz = if vectors { n } else { 1 };
    let mut z = vec![Complex64::new(0.0, 0.0); if vectors { n * n } else { 1 }];
    let ldzi = to_int(ldz)?;
    let mut m: c_int = 0;
    let mut isuppz = vec![0 as c_int; 2 * n];
    let mut info: c_int = 0;
    let (vl, vu, il, iu, abstol) = (0.0f64, 0.0f64, 0 as c_int, 0 as c_int, 0.0f64);
    let jobz = flag(if vectors { b'V' } else { b'N' });

    let mut work_query = Complex64::new(0.0, 0.0);
    let mut rwork_query = 0.0f64;
    let mut iwork_query: c_int = 0;
    let query: c_int = -1;
    unsafe {
        lapack_sys::zheevr_(
            jobz, flag(b'A'), flag(b'L'), &ni, as_lapack(buf.as_mut_ptr()), &ni, &vl, &vu, &il, &iu,
            &abstol, &mut m, w.as_mut_ptr(), as_lapack(z.as_mut_ptr()), &ldzi, isuppz.as_mut_ptr(),
            as_lapack(&mut work_query), &query, &mut rwork_query, &query, &mut iwork_query, &query,
            &mut info,
        );
    }
    if info != 0 {
        return Err(nonconvergence("zheevr", info, n, dense_norm(a)));
    }
    let lwork = (work_query.re as usize).max(2 * n).max(1);
    let lrwork = (rwork_query as usize).max(24 * n).max(1);
    let liwork = (iwork_query as usize).max(10 * n).max(1);
    let mut work = vec![Complex64::new(0.0, 0.0); lwork];
    let mut rwork = vec![0.0f64; lrwork];
    let mut iwork = vec![0 as c_int; liwork];
    let (lw, lrw, liw) = (to_int(lwork)?, to_int(lrwork)?, to_int(liwork)?);
    unsafe {
        lapack_sys::zheevr_(
            jobz, flag(b'A'), flag(b'L'), &ni, as_lapack(buf.as_mut_ptr()), &ni, &vl, &vu, &il, &iu,
            &abstol, &mut m, w.as_mut_ptr(), as_lapack(z.as_mut_ptr()), &ldzi, isuppz.as_mut_ptr(),
            as_lapack(work.as_mut_ptr()), &lw, rwork.as_mut_ptr(), &lrw, iwork.as_mut_ptr(), &liw,
            &mut info,
        );
    }
    if info != 0 || m as usize != n {
        return Err(nonconvergence("zheevr", info, n, dense_norm(a)));
    }
    Ok((w, vectors.then(|| DMatrix::from_vec(n, n, z))))
}

/// Eigenvalues and unit right eigenvectors of a general complex matrix (`zgeev`).
pub(crate) fn general_eigen(a: &DMatrix<Complex64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(KreinError::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let ni = to_int(n)?;
    let one: c_int = 1;
    let mut buf = a.clone();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut vl = [Complex64::new(0.0, 0.0); 1];
    let mut vr = vec![Complex64::new(0.0, 0.0); n * n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info: c_int = 0;

    let mut work_query = Complex64::new(0.0, 0.0);
    let query: c_int = -1;
    unsafe {
        lapack_sys::zgeev_(
            flag(b'N'), flag(b'V'), &ni, as_lapack(buf.as_mut_ptr()), &ni, as_lapack(w.as_mut_ptr()),
            as_lapack(vl.as_mut_ptr()), &one, as_lapack(vr.as_mut_ptr()), &ni,
            as_lapack(&mut work_query), &query, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(nonconvergence("zgeev", info, n, dense_norm(a)));
    }
    let lwork = (work_query.re as usize).max(2 * n).max(1);
    let mut work = vec![Complex64::new(0.0, 0.0); lwork];
    let lw = to_int(lwork)?;
    unsafe {
        lapack_sys::zgeev_(
            flag(b'N'), flag(b'V'), &ni, as_lapack(buf.as_mut_ptr()), &ni, as_lapack(w.as_mut_ptr()),
            as_lapack(vl.as_mut_ptr()), &one, as_lapack(vr.as_mut_ptr()), &ni,
            as_lapack(work.as_mut_ptr()), &lw, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(nonconvergence("zgeev", info, n, dense_norm(a)));
    }
    Ok((w, DMatrix::from_vec(n, n, vr)))
}

extern "C" {
    // Provided by the linked BLAS.
    fn zgemm_(
        transa: *const c_char,
        transb: *const c_char,
        m: *const c_int,
        n: *const c_int,
        k: *const c_int,
        alpha: *const LapackComplex,
        a: *const LapackComplex,
        lda: *const c_int,
        b: *const LapackComplex,
        ldb: *const c_int,
        beta: *const LapackComplex,
        c: *mut LapackComplex,
        ldc: *const c_int,
    );
}

/// `op(a) · b` where `op` is the identity or, with `adjoint_a`, the conjugate transpose.
pub(crate) fn complex_matmul(a: &DMatrix<Complex64>, adjoint_a: bool, b: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let (m, k) = if adjoint_a { (a.ncols(), a.nrows()) } else { (a.nrows(), a.ncols()) };
    if b.nrows() != k {
        return Err(KreinError::DimensionMismatch { expected: k, got: b.nrows() });
    }
    let n = b.ncols();
    let mut c = DMatrix::<Complex64>::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return Ok(c);
    }
    let (mi, ni, ki) = (to_int(m)?, to_int(n)?, to_int(k)?);
    let (lda, ldb, ldc) = (to_int(a.nrows())?, to_int(b.nrows())?, mi);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let transa = if adjoint_a { c"C".as_ptr() } else { c"N".as_ptr() };
    unsafe {
        zgemm_(
            transa, flag(b'N'), &mi, &ni, &ki,
            &one as *const Complex64 as *const LapackComplex,
            a.as_ptr() as *const LapackComplex, &lda,
            b.as_ptr() as *const LapackComplex, &ldb,
            &zero as *const Complex64 as *const LapackComplex,
            as_lapack(c.as_mut_ptr()), &ldc,
        );
    }
    Ok(c)
}

fn check_tridiagonal(diag: &[f64], off: &[f64]) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Err(KreinError::InvalidInput("empty tridiagonal matrix".into()));
    }
    if off.len() + 1 != n {
        return Err(KreinError::DimensionMismatch { expected: n - 1, got: off.len() });
    }
    if diag.iter().chain(off).any(|v| !v.is_finite()) {
        return Err(KreinError::InvalidInput("non-finite tridiagonal entry".into()));
    }
    Ok(())
}

fn nonconvergence(routine: &'static str, info: c_int, dimension: usize, norm: f64) -> KreinError {
    KreinError::NonConvergence { routine, info, dimension, norm }
}
