//! Property tests for the representation-level invariants: determinism in the
//! seed, linearity of the convolution, weight row sums, and tolerance
//! monotonicity.

mod common;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use volterra_core::grid::TimeGrid;
use volterra_core::kernels::{builtin_kernel, BuiltinKernel, KernelGrid};
use volterra_core::linalg::to_complex_matrix;
use volterra_core::positivity::{equispaced_indices, gram_positivity_check};
use volterra_core::resolvent::matrix_resolvent;
use volterra_core::stochastic::{
    simulate_brownian, simulate_compound_poisson, stochastic_convolution, JumpLaw,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Identical seeds reproduce paths bit-for-bit; different seeds do not.
    #[test]
    fn seeded_paths_are_deterministic(seed in any::<u64>(), rate in 0.5f64..8.0) {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let law = JumpLaw::Rademacher { scale: 1.0 };
        let a = simulate_compound_poisson(rate, &law, 2, &grid, seed).unwrap();
        let b = simulate_compound_poisson(rate, &law, 2, &grid, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let c = simulate_compound_poisson(rate, &law, 2, &grid, seed ^ 0x9E3779B97F4A7C15).unwrap();
        prop_assert_ne!(&a, &c);
    }

    /// The convolution is linear in the driving path at roundoff scale.
    #[test]
    fn convolution_linearity(seed in any::<u64>(), alpha in -3.0f64..3.0) {
        let kernel = builtin_kernel(BuiltinKernel::ConstantOne).unwrap();
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let a = to_complex_matrix(&DMatrix::from_row_slice(2, 2, &[-1.0, 0.3, 0.0, -2.0]));
        let table = matrix_resolvent(&a, &kernel, 0.0, 0.0, &grid).unwrap();
        let q = DMatrix::<f64>::identity(2, 2);
        let l1 = simulate_brownian(&q, &grid, seed).unwrap();
        let l2 = simulate_compound_poisson(
            4.0,
            &JumpLaw::Gaussian { sigma: 0.8 },
            2,
            &grid,
            seed.wrapping_add(1),
        )
        .unwrap();
        let combined = l1.scale_add(alpha, &l2).unwrap();
        let u0 = DVector::from_vec(vec![Complex64::new(0.0, 0.0); 2]);
        let u1 = stochastic_convolution(&table, &l1, &u0).unwrap();
        let u2 = stochastic_convolution(&table, &l2, &u0).unwrap();
        let u12 = stochastic_convolution(&table, &combined, &u0).unwrap();
        let mut worst = 0.0_f64;
        let mut scale = 1.0_f64;
        for k in 0..=64 {
            let expect = &u1.values[k] * Complex64::new(alpha, 0.0) + &u2.values[k];
            scale = scale.max(expect.norm());
            worst = worst.max((&u12.values[k] - expect).norm());
        }
        prop_assert!(worst <= 1e-11 * scale, "linearity defect {} at scale {}", worst, scale);
    }

    /// Product-weight row sums reproduce the fractional integral for any
    /// order in (0, 2).
    #[test]
    fn row_sums_match_fractional_integral(beta in 0.35f64..1.95) {
        let kernel = builtin_kernel(BuiltinKernel::Fractional { beta }).unwrap();
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let gk = KernelGrid::sample(&kernel, &grid).unwrap();
        let gamma_inc = volterra_core::kernels::gamma(beta + 1.0);
        for k in 1..=64 {
            let t = grid.point(k);
            let expect = t.powf(beta) / gamma_inc;
            let got = gk.weights().row_sum(k);
            prop_assert!(
                (got - expect).abs() <= 1e-8 * expect.max(1e-6),
                "beta {} k {}: {} vs {}", beta, k, got, expect
            );
        }
    }

    /// Passing at a tolerance implies passing at any larger tolerance.
    #[test]
    fn gram_tolerance_monotonicity(tol_exp in -12.0f64..-4.0, entry in -4.0f64..-0.2) {
        let kernel = builtin_kernel(BuiltinKernel::Fractional { beta: 0.5 }).unwrap();
        let grid = TimeGrid::new(1.0, 128).unwrap();
        let a = to_complex_matrix(&DMatrix::from_row_slice(1, 1, &[entry]));
        let table = matrix_resolvent(&a, &kernel, 0.0, 0.0, &grid).unwrap();
        let idx = equispaced_indices(128, 5);
        let tight = gram_positivity_check(&table, 0.0, &idx, Some(10f64.powf(tol_exp))).unwrap();
        if tight.passed {
            let loose = gram_positivity_check(&table, 0.0, &idx, Some(10f64.powf(tol_exp) * 100.0)).unwrap();
            prop_assert!(loose.passed);
        }
    }

    /// Jump lists merged by scale_add stay time-sorted and value-exact.
    #[test]
    fn scale_add_preserves_jump_bookkeeping(seed in any::<u64>(), alpha in -2.0f64..2.0) {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let law = JumpLaw::Rademacher { scale: 1.0 };
        let l1 = simulate_compound_poisson(6.0, &law, 1, &grid, seed).unwrap();
        let l2 = simulate_compound_poisson(3.0, &law, 1, &grid, seed.wrapping_add(7)).unwrap();
        let merged = l1.scale_add(alpha, &l2).unwrap();
        prop_assert_eq!(merged.jumps.len(), l1.jumps.len() + l2.jumps.len());
        for pair in merged.jumps.windows(2) {
            prop_assert!(pair[0].time <= pair[1].time);
        }
        // every original jump appears, scaled for l1
        for j in &l1.jumps {
            prop_assert!(merged
                .jumps
                .iter()
                .any(|m| m.time == j.time && (m.size[0] - alpha * j.size[0]).abs() < 1e-15));
        }
        for j in &l2.jumps {
            prop_assert!(merged.jumps.iter().any(|m| m.time == j.time && m.size == j.size));
        }
    }
}
