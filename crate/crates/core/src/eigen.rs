//! Symmetric tridiagonal eigensolvers backed by LAPACK.
//!
//! `dstedc` (divide and conquer) for complete decompositions, `dstebz` +
//! `dstein` (bisection and inverse iteration) for the eigenpairs below a
//! threshold.

use std::os::raw::{c_char, c_int};

use crate::error::{invalid, Error, Result};
use crate::lattice::SymmetricOperator;

/// Eigenvalues in ascending order with orthonormal eigenvectors stored
/// column-major: entry `i` of vector `k` is `vectors[k * n + i]`.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub dimension: usize,
}

impl TridiagonalEigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dimension..(k + 1) * self.dimension]
    }
}

fn as_lapack_dim(n: usize) -> Result<c_int> {
    c_int::try_from(n).map_err(|_| Error::ResourceLimit {
        what: "eigenproblem dimension",
        needed: n,
        cap: c_int::MAX as usize,
    })
}

/// Full eigendecomposition of a symmetric tridiagonal operator.
///
/// Uses the MRRR driver `dstemr`, which needs no level-3 BLAS: some OpenBLAS
/// builds return non-orthogonal vectors from the divide-and-conquer driver.
pub fn decompose(op: &SymmetricOperator) -> Result<TridiagonalEigen> {
    let n = op.dimension();
    let n_lapack = as_lapack_dim(n)?;
    let mut d = op.diagonal().to_vec();
    let mut e = op.off_diagonal().to_vec();
    e.push(0.0);
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n * n];
    let mut isuppz: Vec<c_int> = vec![0; 2 * n];
    let mut work = vec![0.0; 18 * n];
    let mut iwork: Vec<c_int> = vec![0; 10 * n];
    let (lwork, liwork) = (as_lapack_dim(work.len())?, as_lapack_dim(iwork.len())?);
    let (jobz, range) = (b'V' as c_char, b'A' as c_char);
    let (vl, vu, il, iu): (f64, f64, c_int, c_int) = (0.0, 0.0, 0, 0);
    let mut tryrac: c_int = 1;
    let mut m: c_int = 0;
    let mut info: c_int = 0;
    unsafe {
        lapack_sys::dstemr_(
            &jobz,
            &range,
            &n_lapack,
            d.as_mut_ptr(),
            e.as_mut_ptr(),
            &vl,
            &vu,
            &il,
            &iu,
            &mut m,
            w.as_mut_ptr(),
            z.as_mut_ptr(),
            &n_lapack,
            &n_lapack,
            isuppz.as_mut_ptr(),
            &mut tryrac,
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 || m as usize != n {
        return Err(Error::Numerical(format!(
            "dstemr failed: info = {info}, {m} of {n} eigenpairs"
        )));
    }
    Ok(TridiagonalEigen {
        values: w,
        vectors: z,
        dimension: n,
    })
}

/// Eigenpairs with eigenvalue in `(lower, upper]`, ascending; the vectors are
/// orthonormal in the plain Euclidean inner product.
pub fn eigenpairs_in(diag: &[f64], off: &[f64], lower: f64, upper: f64) -> Result<TridiagonalEigen> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(invalid("tridiagonal shape mismatch"));
    }
    if !(lower < upper) {
        return Err(invalid(format!("empty spectral window ({lower}, {upper}]")));
    }
    let n_lapack = as_lapack_dim(n)?;
    let range = b'V' as c_char;
    let order = b'B' as c_char;
    let (il, iu): (c_int, c_int) = (0, 0);
    let abstol = 2.0 * f64::MIN_POSITIVE;
    let mut m: c_int = 0;
    let mut nsplit: c_int = 0;
    let mut w = vec![0.0; n];
    let mut iblock: Vec<c_int> = vec![0; n];
    let mut isplit: Vec<c_int> = vec![0; n];
    let mut work = vec![0.0; 5 * n];
    let mut iwork: Vec<c_int> = vec![0; 3 * n];
    let mut info: c_int = 0;
    unsafe {
        lapack_sys::dstebz_(
            &range,
            &order,
            &n_lapack,
            &lower,
            &upper,
            &il,
            &iu,
            &abstol,
            diag.as_ptr(),
            off.as_ptr(),
            &mut m,
            &mut nsplit,
            w.as_mut_ptr(),
            iblock.as_mut_ptr(),
            isplit.as_mut_ptr(),
            work.as_mut_ptr(),
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("dstebz failed, info = {info}")));
    }
    let count = m as usize;
    w.truncate(count);
    if count == 0 {
        return Ok(TridiagonalEigen {
            values: w,
            vectors: Vec::new(),
            dimension: n,
        });
    }
    let mut z = vec![0.0; n * count];
    let mut ifail: Vec<c_int> = vec![0; count];
    unsafe {
        lapack_sys::dstein_(
            &n_lapack,
            diag.as_ptr(),
            off.as_ptr(),
            &m,
            w.as_ptr(),
            iblock.as_ptr(),
            isplit.as_ptr(),
            z.as_mut_ptr(),
            &n_lapack,
            work.as_mut_ptr(),
            iwork.as_mut_ptr(),
            ifail.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!(
            "dstein: {info} eigenvectors failed to converge"
        )));
    }
    Ok(TridiagonalEigen {
        values: w,
        vectors: z,
        dimension: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dirichlet_laplacian(n: usize) -> SymmetricOperator {
        SymmetricOperator::new(vec![-2.0; n], vec![1.0; n - 1]).unwrap()
    }

    #[test]
    fn dirichlet_laplacian_spectrum() {
        let n = 50;
        let eig = decompose(&dirichlet_laplacian(n)).unwrap();
        for (k, lambda) in eig.values.iter().enumerate() {
            // Ascending: −4sin²((n−k)π / (2(n+1))).
            let s = (((n - k) as f64) * PI / (2.0 * (n as f64 + 1.0))).sin();
            assert!((lambda + 4.0 * s * s).abs() < 1e-13);
        }
        let op = dirichlet_laplacian(n);
        for k in [0, 7, 49] {
            let v = eig.vector(k);
            let norm: f64 = v.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-13);
            let x: Vec<_> = v.iter().map(|&r| num_complex::Complex64::new(r, 0.0)).collect();
            let av = op.apply(&x);
            for i in 0..n {
                assert!((av[i].re - eig.values[k] * v[i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn large_decomposition_is_orthonormal() {
        for n in [400, 1500] {
            let op = dirichlet_laplacian(n);
            let eig = decompose(&op).unwrap();
            let mut worst = 0.0f64;
            for i in (0..n).step_by(37) {
                for j in (0..n).step_by(41) {
                    let s: f64 = (0..n).map(|k| eig.vector(k)[i] * eig.vector(k)[j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((s - want).abs());
                }
            }
            assert!(worst < 1e-12, "n={n}: {worst}");
        }
    }

    #[test]
    fn windowed_solver_finds_requested_part() {
        let n = 40;
        let full = decompose(&dirichlet_laplacian(n)).unwrap();
        let part = eigenpairs_in(&vec![-2.0; n], &vec![1.0; n - 1], -5.0, -3.0).unwrap();
        let expected: Vec<f64> = full.values.iter().copied().filter(|&l| l <= -3.0).collect();
        assert_eq!(part.values.len(), expected.len());
        for (a, b) in part.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-13);
        }
        let none = eigenpairs_in(&vec![-2.0; n], &vec![1.0; n - 1], 0.5, 3.0).unwrap();
        assert!(none.values.is_empty());
    }
}
