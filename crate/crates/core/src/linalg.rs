//! Dense linear-algebra helpers: a cyclic Jacobi eigensolver for Hermitian
//! matrices (LAPACK-free, deterministic) and eigenpair extraction for general
//! real matrices via real Schur eigenvalues plus inverse iteration.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{CoreError, Result};

pub fn to_complex_matrix(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m[(i, j)], 0.0))
}

pub fn to_complex_vector(v: &DVector<f64>) -> DVector<Complex64> {
    DVector::from_fn(v.len(), |i, _| Complex64::new(v[i], 0.0))
}

fn off_diagonal_norm(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues (ascending) and, optionally, an orthonormal eigenbasis of a
/// Hermitian matrix, by cyclic Jacobi rotations. Input is symmetrized first;
/// asymmetry beyond roundoff is the caller's responsibility to detect.
pub fn hermitian_eigen(
    mat: &DMatrix<Complex64>,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<DMatrix<Complex64>>)> {
    let n = mat.nrows();
    if n != mat.ncols() {
        return Err(CoreError::DimensionMismatch {
            expected: n,
            got: mat.ncols(),
        });
    }
    if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CoreError::NonFinite("hermitian_eigen input".into()));
    }
    let mut a = DMatrix::from_fn(n, n, |i, j| 0.5 * (mat[(i, j)] + mat[(j, i)].conj()));
    let mut v = if want_vectors {
        Some(DMatrix::<Complex64>::identity(n, n))
    } else {
        None
    };
    let scale = a.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1e-300);
    let tol = 1e-15 * scale * n as f64;

    for _sweep in 0..60 {
        if off_diagonal_norm(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = a[(p, q)];
                let gn = g.norm();
                if gn <= 1e-18 * scale {
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                // Phase u makes the 2x2 block real; then a standard real
                // Jacobi rotation annihilates it.
                let u = g / gn;
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let tau = (beta - alpha) / (2.0 * gn);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Rotation R: columns p, q; R[p,p]=c, R[p,q]=s*u, R[q,p]=-s*conj(u)... built
                // so that R^H A R zeroes the (p,q) entry. Column update A <- A R:
                let (cs, su) = (Complex64::new(c, 0.0), s * u);
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * cs - aiq * su.conj();
                    a[(i, q)] = aip * su + aiq * cs;
                }
                // Row update A <- R^H A:
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * cs - aqj * su;
                    a[(q, j)] = apj * su.conj() + aqj * cs;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                if let Some(v) = v.as_mut() {
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = vip * cs - viq * su.conj();
                        v[(i, q)] = vip * su + viq * cs;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = v.map(|v| {
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            out.set_column(dst, &v.column(src));
        }
        out
    });
    Ok((values, vectors))
}

/// Eigenvalues (ascending) of a real symmetric matrix.
pub fn symmetric_eigen_real(mat: &DMatrix<f64>) -> Result<Vec<f64>> {
    hermitian_eigen(&to_complex_matrix(mat), false).map(|(vals, _)| vals)
}

/// Sorted complex eigenvalues of a general real matrix (real Schur form).
pub fn eigenvalues_real_matrix(mat: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if mat.nrows() != mat.ncols() {
        return Err(CoreError::DimensionMismatch {
            expected: mat.nrows(),
            got: mat.ncols(),
        });
    }
    if mat.iter().any(|x| !x.is_finite()) {
        return Err(CoreError::NonFinite("eigenvalue input".into()));
    }
    let eig = mat.clone().complex_eigenvalues();
    let mut vals: Vec<Complex64> = eig.iter().copied().collect();
    vals.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(vals)
}

/// Eigenvectors for precomputed eigenvalues of a (complexified) matrix, by
/// shifted inverse iteration. Eigenvalues within `cluster_tol` are treated as
/// one cluster and their vectors re-orthogonalized, which handles semisimple
/// repeated eigenvalues; defective matrices surface as a large residual in the
/// caller's validation.
pub fn eigenvectors_by_inverse_iteration(
    mat: &DMatrix<Complex64>,
    eigenvalues: &[Complex64],
) -> Result<DMatrix<Complex64>> {
    let n = mat.nrows();
    if eigenvalues.len() != n {
        return Err(CoreError::DimensionMismatch {
            expected: n,
            got: eigenvalues.len(),
        });
    }
    // Cluster detection scales with the eigenvalues themselves; scaling with
    // matrix entries would merge well-separated eigenvalues of badly
    // balanced matrices.
    let eig_scale = eigenvalues.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    let cluster_tol = 1e-7 * (1.0 + eig_scale);
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    let mut rng = ChaCha12Rng::seed_from_u64(0x5EED_1D0F_ACED_CAFE);

    let mut idx = 0;
    while idx < n {
        // Collect the cluster [idx, end) of nearby eigenvalues.
        let mut end = idx + 1;
        while end < n && (eigenvalues[end] - eigenvalues[idx]).norm() <= cluster_tol {
            end += 1;
        }
        let mut cluster_vecs: Vec<DVector<Complex64>> = Vec::with_capacity(end - idx);
        for &lambda in &eigenvalues[idx..end] {
            let mut shifted = mat.clone();
            for d in 0..n {
                shifted[(d, d)] -= lambda;
            }
            // A tiny diagonal jitter keeps the LU factorization usable when the
            // shift is numerically exact.
            let eps = 1e-13 * (1.0 + lambda.norm());
            let jitter = Complex64::new(eps, eps);
            for d in 0..n {
                shifted[(d, d)] += jitter;
            }
            let lu = shifted.lu();
            let mut v = DVector::<Complex64>::from_fn(n, |_, _| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            v /= Complex64::new(v.norm(), 0.0);
            for _ in 0..4 {
                let mut next = lu.solve(&v).ok_or(CoreError::DefectiveMatrix {
                    residual: f64::INFINITY,
                    tol: 0.0,
                })?;
                // Deflate against vectors already found in this cluster.
                for prev in &cluster_vecs {
                    let coeff = prev.dotc(&next);
                    next -= prev * coeff;
                }
                if next.norm() < 1e-280 {
                    // Restart from a fresh random direction.
                    next = DVector::from_fn(n, |_, _| {
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                    });
                }
                let nrm = next.norm();
                v = next / Complex64::new(nrm, 0.0);
            }
            cluster_vecs.push(v);
        }
        for (offset, v) in cluster_vecs.into_iter().enumerate() {
            vectors.set_column(idx + offset, &v);
        }
        idx = end;
    }
    Ok(vectors)
}

pub fn frobenius_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
