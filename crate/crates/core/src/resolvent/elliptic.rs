//! Second-order central-difference discretization of the 1-D operator
//! `A u = a(x) u'' + b(x) u' + c(x) u` with Dirichlet or periodic boundary,
//! for building concrete sectorial test operators.

use nalgebra::DMatrix;

use crate::error::{CoreError, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
    Periodic,
}

/// Discretized elliptic operator and the half-plane its numerical range was
/// measured to lie in (`Re <= half_plane_bound`).
#[derive(Debug, Clone)]
pub struct EllipticOperator {
    pub matrix: DMatrix<f64>,
    pub half_plane_bound: f64,
    pub grid_points: Vec<f64>,
    pub spacing: f64,
}

/// Build the finite-difference matrix from coefficient samples on the grid.
/// For Dirichlet the slices hold the `m` interior points of `[x0, x1]`; for
/// periodic they hold all `m` points with `x1` identified with `x0`.
pub fn build_discrete_elliptic(
    diffusion: &[f64],
    drift: &[f64],
    reaction: &[f64],
    domain: (f64, f64),
    boundary: BoundaryCondition,
) -> Result<EllipticOperator> {
    let m = diffusion.len();
    if m < 3 {
        return Err(CoreError::InvalidArgument(format!(
            "need at least 3 grid points, got {m}"
        )));
    }
    if drift.len() != m || reaction.len() != m {
        return Err(CoreError::DimensionMismatch {
            expected: m,
            got: drift.len().max(reaction.len()),
        });
    }
    let (x0, x1) = domain;
    if !(x1 > x0) || !x0.is_finite() || !x1.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "invalid domain [{x0}, {x1}]"
        )));
    }
    let h = match boundary {
        BoundaryCondition::Dirichlet => (x1 - x0) / (m as f64 + 1.0),
        BoundaryCondition::Periodic => (x1 - x0) / m as f64,
    };
    let grid_points: Vec<f64> = (0..m)
        .map(|i| match boundary {
            BoundaryCondition::Dirichlet => x0 + (i as f64 + 1.0) * h,
            BoundaryCondition::Periodic => x0 + i as f64 * h,
        })
        .collect();
    for (i, &a) in diffusion.iter().enumerate() {
        if !(a > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "ellipticity violated at x = {}: diffusion coefficient {a}",
                grid_points[i]
            )));
        }
    }

    let h2 = h * h;
    let mut matrix = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let (a, b, c) = (diffusion[i], drift[i], reaction[i]);
        matrix[(i, i)] = -2.0 * a / h2 + c;
        let lower = a / h2 - b / (2.0 * h);
        let upper = a / h2 + b / (2.0 * h);
        match boundary {
            BoundaryCondition::Dirichlet => {
                if i > 0 {
                    matrix[(i, i - 1)] = lower;
                }
                if i + 1 < m {
                    matrix[(i, i + 1)] = upper;
                }
            }
            BoundaryCondition::Periodic => {
                matrix[(i, (i + m - 1) % m)] += lower;
                matrix[(i, (i + 1) % m)] += upper;
            }
        }
    }

    // Numerical range: max Re <z, Az> / <z, z> = lambda_max of the symmetric
    // part.
    let sym = (&matrix + matrix.transpose()) * 0.5;
    let eig = linalg::symmetric_eigen_real(&sym)?;
    let half_plane_bound = *eig.last().expect("m >= 3");
    Ok(EllipticOperator {
        matrix,
        half_plane_bound,
        grid_points,
        spacing: h,
    })
}

/// Convenience: the classical `m`-point discrete Dirichlet Laplacian on
/// `[0, length]`.
pub fn dirichlet_laplacian(m: usize, length: f64) -> Result<EllipticOperator> {
    build_discrete_elliptic(
        &vec![1.0; m],
        &vec![0.0; m],
        &vec![0.0; m],
        (0.0, length),
        BoundaryCondition::Dirichlet,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_laplacian_spectrum_matches_closed_form() {
        // eigenvalues -(2/h^2)(1 - cos(j pi / (m+1))), j = 1..m
        let m = 16;
        let op = dirichlet_laplacian(m, PI).unwrap();
        let eig = linalg::symmetric_eigen_real(&op.matrix).unwrap();
        let h = op.spacing;
        let mut expected: Vec<f64> = (1..=m)
            .map(|j| -(2.0 / (h * h)) * (1.0 - (j as f64 * PI / (m as f64 + 1.0)).cos()))
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in eig.iter().zip(&expected) {
            assert!(
                (got - want).abs() / want.abs() < 1e-10,
                "eigenvalue {got} vs {want}"
            );
        }
        assert!(op.half_plane_bound < 0.0);
    }

    #[test]
    fn constant_reaction_shifts_spectrum() {
        let m = 8;
        let base = dirichlet_laplacian(m, 1.0).unwrap();
        let shifted = build_discrete_elliptic(
            &vec![1.0; m],
            &vec![0.0; m],
            &vec![2.5; m],
            (0.0, 1.0),
            BoundaryCondition::Dirichlet,
        )
        .unwrap();
        let e0 = linalg::symmetric_eigen_real(&base.matrix).unwrap();
        let e1 = linalg::symmetric_eigen_real(&shifted.matrix).unwrap();
        for (a, b) in e0.iter().zip(&e1) {
            assert!((b - a - 2.5).abs() < 1e-9);
        }
    }

    #[test]
    fn drift_makes_matrix_nonsymmetric_but_sectorial() {
        let m = 12;
        let op = build_discrete_elliptic(
            &vec![1.0; m],
            &vec![0.4; m],
            &vec![0.0; m],
            (0.0, 1.0),
            BoundaryCondition::Dirichlet,
        )
        .unwrap();
        assert!((op.matrix[(0, 1)] - op.matrix[(1, 0)]).abs() > 1e-12);
        // spectrum stays in the left half-plane near the negative reals
        let eig = linalg::eigenvalues_real_matrix(&op.matrix).unwrap();
        for lambda in eig {
            assert!(lambda.re < 0.0, "eigenvalue {lambda} not in left half-plane");
            let angle_from_negative_axis = (PI - lambda.arg().abs()).abs();
            assert!(angle_from_negative_axis < 0.3, "eigenvalue {lambda}");
        }
        assert!(op.half_plane_bound < 0.0);
    }

    #[test]
    fn ellipticity_violation_is_reported_with_location() {
        let mut a = vec![1.0; 8];
        a[3] = -0.5;
        let err = build_discrete_elliptic(
            &a,
            &[0.0; 8],
            &[0.0; 8],
            (0.0, 1.0),
            BoundaryCondition::Dirichlet,
        )
        .unwrap_err();
        match err {
            CoreError::InvalidArgument(msg) => assert!(msg.contains("ellipticity")),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn periodic_rows_sum_to_reaction() {
        let m = 6;
        let op = build_discrete_elliptic(
            &vec![2.0; m],
            &vec![0.3; m],
            &vec![0.7; m],
            (0.0, 2.0),
            BoundaryCondition::Periodic,
        )
        .unwrap();
        for i in 0..m {
            let row_sum: f64 = (0..m).map(|j| op.matrix[(i, j)]).sum();
            assert!((row_sum - 0.7).abs() < 1e-10);
        }
    }

    #[test]
    fn too_small_grid_is_rejected() {
        let err = build_discrete_elliptic(
            &[1.0, 1.0],
            &[0.0, 0.0],
            &[0.0, 0.0],
            (0.0, 1.0),
            BoundaryCondition::Dirichlet,
        );
        assert!(err.is_err());
    }
}
