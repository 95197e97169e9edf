//! Dense linear-algebra helpers shared by the model layers.

use alloc::vec::Vec;
use nalgebra::{Matrix3, Schur, Vector3, SVD};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type Mat = nalgebra::DMatrix<f64>;
pub type CMat = nalgebra::DMatrix<Complex64>;

/// Cross-product matrix: `skew(a) * b == a x b`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// `diag(R, R)` acting on a stacked (linear, angular) 6-vector.
pub fn frame6(r: &Matrix3<f64>) -> Mat {
    let mut m = Mat::zeros(6, 6);
    m.view_mut((0, 0), (3, 3)).copy_from(r);
    m.view_mut((3, 3), (3, 3)).copy_from(r);
    m
}

pub fn to_dyn3(m: &Matrix3<f64>) -> Mat {
    Mat::from_fn(3, 3, |i, j| m[(i, j)])
}

pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let c: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(r, c);
    let (mut i, mut j) = (0, 0);
    for b in blocks {
        out.view_mut((i, j), (b.nrows(), b.ncols())).copy_from(*b);
        i += b.nrows();
        j += b.ncols();
    }
    out
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

fn schur_iters(n: usize) -> usize {
    200 * n + 1000
}

/// Real Schur form `A = Q T Q^T`.
pub fn real_schur(a: &Mat) -> Result<(Mat, Mat)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Mat::zeros(0, 0), Mat::zeros(0, 0)));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenFailure("non-finite matrix entry".into()));
    }
    let s = Schur::try_new(a.clone(), f64::EPSILON, schur_iters(n))
        .ok_or_else(|| Error::EigenFailure("real Schur iteration did not converge".into()))?;
    Ok(s.unpack())
}

pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenFailure("non-finite matrix entry".into()));
    }
    let s = Schur::try_new(a.clone(), f64::EPSILON, schur_iters(n))
        .ok_or_else(|| Error::EigenFailure("real Schur iteration did not converge".into()))?;
    Ok(s.complex_eigenvalues().iter().copied().collect())
}

/// Largest real part of the spectrum; `-inf` for an empty matrix.
pub fn spectral_abscissa(a: &Mat) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn complex_eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(alloc::vec![m[(0, 0)]]);
    }
    if n == 2 {
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let tr = a + d;
        let det = a * d - b * c;
        let disc = (tr * tr - det * 4.0).sqrt();
        return Ok(alloc::vec![(tr + disc) * 0.5, (tr - disc) * 0.5]);
    }
    let s = Schur::try_new(m.clone(), f64::EPSILON, schur_iters(n))
        .ok_or_else(|| Error::EigenFailure("complex Schur iteration did not converge".into()))?;
    let (_, t) = s.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

pub fn spectral_radius(m: &CMat) -> Result<f64> {
    Ok(complex_eigenvalues(m)?
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max))
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn sigma_max(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.ncols() == 1 || m.nrows() == 1 {
        return m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |a: f64, &b| a.max(b))
}

pub fn sigma_max_real(m: &Mat) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Orthonormal basis of the range of `w`, keeping directions whose singular
/// value exceeds `tol`.
pub fn range_basis(w: &Mat, tol: f64) -> Mat {
    let n = w.nrows();
    if w.ncols() == 0 || n == 0 {
        return Mat::zeros(n, 0);
    }
    let svd = SVD::new(w.clone(), true, false);
    let u = match svd.u {
        Some(u) => u,
        None => return Mat::zeros(n, 0),
    };
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > tol)
        .map(|(i, _)| i)
        .collect();
    let mut out = Mat::zeros(n, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}

/// Solves `A X + X A^T + Q = 0` by Bartels–Stewart on the real Schur form.
pub fn lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let (u, t) = real_schur(a)?;
    let f = u.transpose() * q * &u;

    // diagonal blocks of the quasi-triangular factor
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut size = 1;
        while i + size < n {
            let sub = t[(i + size, i + size - 1)].abs();
            let scale = t[(i + size, i + size)].abs() + t[(i + size - 1, i + size - 1)].abs();
            if sub > f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
                size += 1;
            } else {
                break;
            }
        }
        blocks.push((i, size));
        i += size;
    }

    let mut y = Mat::zeros(n, n);
    for &(i0, p) in blocks.iter().rev() {
        for &(j0, qd) in blocks.iter().rev() {
            let mut rhs = -f.view((i0, j0), (p, qd)).into_owned();
            let iend = i0 + p;
            if iend < n {
                rhs -= t.view((i0, iend), (p, n - iend)) * y.view((iend, j0), (n - iend, qd));
            }
            let jend = j0 + qd;
            if jend < n {
                rhs -= y.view((i0, jend), (p, n - jend))
                    * t.view((j0, jend), (qd, n - jend)).transpose();
            }
            let tii = t.view((i0, i0), (p, p)).into_owned();
            let tjj = t.view((j0, j0), (qd, qd)).into_owned();
            let k = Mat::identity(qd, qd).kronecker(&tii) + tjj.kronecker(&Mat::identity(p, p));
            let v = Mat::from_column_slice(p * qd, 1, rhs.as_slice());
            let sol = k
                .lu()
                .solve(&v)
                .ok_or_else(|| Error::EigenFailure("Lyapunov operator is singular".into()))?;
            y.view_mut((i0, j0), (p, qd))
                .copy_from_slice(sol.as_slice());
        }
    }
    let x = &u * y * u.transpose();
    Ok((&x + x.transpose()) * 0.5)
}

/// Diagonal similarity scaling (powers of two) that equalises row and column
/// norms of `a`. Returns the scaling vector `d` with `A_bal = D^-1 A D`.
pub fn balance_scaling(a: &Mat) -> Vec<f64> {
    let n = a.nrows();
    let mut d = alloc::vec![1.0; n];
    let mut m = a.clone();
    let radix = 2.0_f64;
    for _ in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
    d
}
