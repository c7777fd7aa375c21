// Raw LAPACK calls. Every buffer handed to LAPACK is a column-major
// nalgebra matrix or a Vec whose length matches the documented workspace.

use std::os::raw::{c_char, c_int};

use lapack_sys as lp;

use super::{Matrix, C64};

// Pull in the OpenBLAS link directives.
extern crate openblas_src;

fn ch(b: u8) -> *const c_char {
    // LAPACK reads a single character through the pointer.
    match b {
        b'N' => c"N".as_ptr(),
        b'V' => c"V".as_ptr(),
        b'A' => c"A".as_ptr(),
        b'C' => c"C".as_ptr(),
        b'1' => c"1".as_ptr(),
        _ => unreachable!("unsupported LAPACK flag"),
    }
}

fn zptr(m: &mut Matrix) -> *mut lp::__BindgenComplex<f64> {
    m.as_mut_slice().as_mut_ptr().cast()
}

fn vptr(v: &mut [C64]) -> *mut lp::__BindgenComplex<f64> {
    v.as_mut_ptr().cast()
}

fn ld(n: usize) -> c_int {
    n.max(1) as c_int
}

/// In-place LU factorization with partial pivoting. Returns LAPACK info.
pub(super) fn zgetrf(a: &mut Matrix, ipiv: &mut [c_int]) -> i32 {
    let (m, n) = (a.nrows() as c_int, a.ncols() as c_int);
    let lda = ld(a.nrows());
    let mut info = 0;
    unsafe { lp::zgetrf_(&m, &n, zptr(a), &lda, ipiv.as_mut_ptr(), &mut info) };
    info
}

/// Solves with the factors from `zgetrf`; `trans` is `b'N'` or `b'C'`.
pub(super) fn zgetrs(trans: u8, lu: &Matrix, ipiv: &[c_int], b: &mut Matrix) -> i32 {
    let n = lu.nrows() as c_int;
    let nrhs = b.ncols() as c_int;
    let lda = ld(lu.nrows());
    let ldb = ld(b.nrows());
    let mut info = 0;
    unsafe {
        lp::zgetrs_(
            ch(trans),
            &n,
            &nrhs,
            lu.as_slice().as_ptr().cast(),
            &lda,
            ipiv.as_ptr(),
            zptr(b),
            &ldb,
            &mut info,
        )
    };
    info
}

/// Reciprocal 1-norm condition estimate from LU factors.
pub(super) fn zgecon(lu: &Matrix, anorm: f64) -> (f64, i32) {
    let n = lu.nrows();
    let nn = n as c_int;
    let lda = ld(n);
    let mut rcond = 0.0;
    let mut work = vec![C64::new(0.0, 0.0); 2 * n.max(1)];
    let mut rwork = vec![0.0; 2 * n.max(1)];
    let mut info = 0;
    unsafe {
        lp::zgecon_(
            ch(b'1'),
            &nn,
            lu.as_slice().as_ptr().cast(),
            &lda,
            &anorm,
            &mut rcond,
            vptr(&mut work),
            rwork.as_mut_ptr(),
            &mut info,
        )
    };
    (rcond, info)
}

pub(super) struct SvdRaw {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub vt: Matrix,
    pub info: i32,
}

/// Full SVD (`JOBU = JOBVT = 'A'`). Destroys `a`.
pub(super) fn zgesvd(a: &mut Matrix) -> SvdRaw {
    let (m, n) = (a.nrows(), a.ncols());
    let k = m.min(n);
    let mut u = Matrix::zeros(m, m);
    let mut vt = Matrix::zeros(n, n);
    let mut s = vec![0.0; k];
    let mut rwork = vec![0.0; 5 * k.max(1)];
    let (mm, nn) = (m as c_int, n as c_int);
    let (lda, ldu, ldvt) = (ld(m), ld(m), ld(n));
    let mut info = 0;
    let mut query = [C64::new(0.0, 0.0)];
    let minus1: c_int = -1;
    unsafe {
        lp::zgesvd_(
            ch(b'A'),
            ch(b'A'),
            &mm,
            &nn,
            zptr(a),
            &lda,
            s.as_mut_ptr(),
            zptr(&mut u),
            &ldu,
            zptr(&mut vt),
            &ldvt,
            vptr(&mut query),
            &minus1,
            rwork.as_mut_ptr(),
            &mut info,
        )
    };
    let lwork = (query[0].re as usize).max(1);
    let mut work = vec![C64::new(0.0, 0.0); lwork];
    let lw = lwork as c_int;
    unsafe {
        lp::zgesvd_(
            ch(b'A'),
            ch(b'A'),
            &mm,
            &nn,
            zptr(a),
            &lda,
            s.as_mut_ptr(),
            zptr(&mut u),
            &ldu,
            zptr(&mut vt),
            &ldvt,
            vptr(&mut work),
            &lw,
            rwork.as_mut_ptr(),
            &mut info,
        )
    };
    SvdRaw { u, s, vt, info }
}

pub(super) struct QzRaw {
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
    pub q: Matrix,
    pub z: Matrix,
    pub info: i32,
}

/// Generalized Schur form without sorting. `a` and `b` are overwritten by `T` and `S`.
pub(super) fn zgges(a: &mut Matrix, b: &mut Matrix) -> QzRaw {
    let n = a.nrows();
    let nn = n as c_int;
    let l = ld(n);
    let mut sdim = 0;
    let mut alpha = vec![C64::new(0.0, 0.0); n];
    let mut beta = vec![C64::new(0.0, 0.0); n];
    let mut q = Matrix::zeros(n, n);
    let mut z = Matrix::zeros(n, n);
    let mut rwork = vec![0.0; 8 * n.max(1)];
    let mut bwork = vec![0 as c_int; n.max(1)];
    let mut info = 0;
    let mut query = [C64::new(0.0, 0.0)];
    let minus1: c_int = -1;
    unsafe {
        lp::zgges_(
            ch(b'V'),
            ch(b'V'),
            ch(b'N'),
            None,
            &nn,
            zptr(a),
            &l,
            zptr(b),
            &l,
            &mut sdim,
            vptr(&mut alpha),
            vptr(&mut beta),
            zptr(&mut q),
            &l,
            zptr(&mut z),
            &l,
            vptr(&mut query),
            &minus1,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            &mut info,
        )
    };
    let lwork = (query[0].re as usize).max(2 * n).max(1);
    let mut work = vec![C64::new(0.0, 0.0); lwork];
    let lw = lwork as c_int;
    unsafe {
        lp::zgges_(
            ch(b'V'),
            ch(b'V'),
            ch(b'N'),
            None,
            &nn,
            zptr(a),
            &l,
            zptr(b),
            &l,
            &mut sdim,
            vptr(&mut alpha),
            vptr(&mut beta),
            zptr(&mut q),
            &l,
            zptr(&mut z),
            &l,
            vptr(&mut work),
            &lw,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            &mut info,
        )
    };
    QzRaw {
        alpha,
        beta,
        q,
        z,
        info,
    }
}

/// Reorders a generalized Schur form so that selected pairs lead. Updates everything in place.
#[allow(clippy::too_many_arguments)]
pub(super) fn ztgsen(
    select: &[bool],
    t: &mut Matrix,
    s: &mut Matrix,
    alpha: &mut [C64],
    beta: &mut [C64],
    q: &mut Matrix,
    z: &mut Matrix,
) -> i32 {
    let n = t.nrows();
    let nn = n as c_int;
    let l = ld(n);
    let sel: Vec<c_int> = select.iter().map(|&b| b as c_int).collect();
    let (ijob, wantq, wantz): (c_int, c_int, c_int) = (0, 1, 1);
    let mut m_out = 0;
    let (mut pl, mut pr) = (0.0, 0.0);
    let mut dif = [0.0; 2];
    let lwork = (n * n).max(1) as c_int;
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    let liwork = (n + 2) as c_int;
    let mut iwork = vec![0 as c_int; liwork as usize];
    let mut info = 0;
    unsafe {
        lp::ztgsen_(
            &ijob,
            &wantq,
            &wantz,
            sel.as_ptr(),
            &nn,
            zptr(t),
            &l,
            zptr(s),
            &l,
            vptr(alpha),
            vptr(beta),
            zptr(q),
            &l,
            zptr(z),
            &l,
            &mut m_out,
            &mut pl,
            &mut pr,
            dif.as_mut_ptr(),
            vptr(&mut work),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        )
    };
    info
}
