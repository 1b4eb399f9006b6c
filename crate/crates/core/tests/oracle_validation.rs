//! Validation of the test-tree oracles against closed forms from outside the
//! crate (libm's erfc, the exponential) before any solver is judged by them.

mod common;

use common::{mittag_leffler_neg_real, mittag_leffler_series};
use num_complex::Complex64;

#[test]
fn series_reduces_to_exponential_at_beta_one() {
    for x in [-2.0, -0.5, 0.3, 1.7] {
        let got = mittag_leffler_series(1.0, Complex64::new(x, 0.0));
        assert!((got.re - x.exp()).abs() < 1e-13, "x = {x}");
        assert!(got.im.abs() < 1e-15);
    }
    let z = Complex64::new(0.4, -1.1);
    let got = mittag_leffler_series(1.0, z);
    assert!((got - z.exp()).norm() < 1e-13);
}

#[test]
fn half_order_matches_erfc_identity() {
    // E_{1/2}(-x) = e^{x^2} erfc(x); the series cancels like e^{x^2}, so
    // series checks stay at moderate x.
    for x in [0.25, 1.0, 2.0] {
        let got = mittag_leffler_series(0.5, Complex64::new(-x, 0.0)).re;
        let expect = (x * x).exp() * libm::erfc(x);
        assert!(
            (got - expect).abs() < 1e-11 * expect.max(1e-3),
            "x = {x}: {got} vs {expect}"
        );
    }
}

#[test]
fn spectral_integral_agrees_with_erfc() {
    for x in [3.0, 4.5, 6.0, 10.0, 25.0] {
        let got = mittag_leffler_neg_real(0.5, x);
        let expect = (x * x).exp() * libm::erfc(x);
        assert!(
            ((got - expect) / expect).abs() < 1e-8,
            "x = {x}: {got} vs {expect}"
        );
    }
}

#[test]
fn spectral_integral_agrees_with_series_on_overlap() {
    // Overlap points chosen where the series cancellation floor is well below
    // the comparison tolerance.
    let cases: [(f64, &[f64]); 3] = [
        (0.4, &[1.0, 2.5]),
        (0.5, &[1.0, 2.0]),
        (0.8, &[1.0, 3.0, 4.9]),
    ];
    for (beta, xs) in cases {
        for &x in xs {
            let a = mittag_leffler_series(beta, Complex64::new(-x, 0.0)).re;
            let b = mittag_leffler_neg_real(beta, x);
            assert!(
                (a - b).abs() < 5e-8,
                "beta = {beta}, x = {x}: series {a} vs integral {b}"
            );
        }
    }
}

#[test]
fn cosh_identity_for_beta_two_boundary() {
    // E_2(z^2) = cosh(z); beta = 2 is outside the kernel range but inside the
    // oracle's series domain, a free cross-check of the gamma handling.
    for z in [0.3, 1.0, 2.0] {
        let got = mittag_leffler_series(2.0, Complex64::new(z * z, 0.0)).re;
        assert!((got - z.cosh()).abs() < 1e-12, "z = {z}");
    }
}
