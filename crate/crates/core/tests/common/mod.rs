//! Independent numerical oracles for the integration tests. Nothing here
//! calls into the solver paths under test: the Mittag-Leffler evaluator uses
//! its own series / spectral-integral code, and quadrature is a plain
//! composite Simpson rule.

#![allow(dead_code)]

use num_complex::Complex64;

/// `E_beta(z) = sum_j z^j / Gamma(beta j + 1)`, evaluated through log-gamma so
/// large indices neither overflow nor lose the tail. Valid for |z| <= ~5.
pub fn mittag_leffler_series(beta: f64, z: Complex64) -> Complex64 {
    assert!(beta > 0.0, "beta must be positive");
    assert!(
        z.norm() <= 5.0 + 1e-12,
        "series oracle restricted to |z| <= 5, got {}",
        z.norm()
    );
    if z.norm() == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let ln_mod = z.norm().ln();
    let phase = z.arg();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0); // Kahan compensation
    for j in 0..400 {
        let jf = j as f64;
        let ln_term = jf * ln_mod - libm::lgamma(beta * jf + 1.0);
        let magnitude = ln_term.exp();
        let term = Complex64::from_polar(magnitude, phase * jf);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if j > 10 && magnitude < 1e-18 * sum.norm().max(1e-30) {
            break;
        }
    }
    sum
}

/// Spectral-integral evaluation of `E_beta(-x)` for real `x > 0` and
/// `0 < beta < 1`. From the complete-monotonicity representation of
/// `t -> E_beta(-t^beta)`:
/// `E_beta(-x) = sin(beta pi)/(beta pi) * int_0^inf e^{-(x u)^{1/beta}} / (u^2 + 2 u cos(beta pi) + 1) du`.
pub fn mittag_leffler_neg_real(beta: f64, x: f64) -> f64 {
    assert!(beta > 0.0 && beta < 1.0);
    assert!(x > 0.0);
    let c = (beta * std::f64::consts::PI).cos();
    let f = |u: f64| (-(x * u).powf(1.0 / beta)).exp() / (u * u + 2.0 * c * u + 1.0);
    // e^{-(x u)^{1/beta}} < 1e-18 beyond this point
    let upper = 41.5_f64.powf(beta) / x;
    let integral = simpson(&f, 0.0, upper, 40_000);
    (beta * std::f64::consts::PI).sin() / (beta * std::f64::consts::PI) * integral
}

/// `E_beta(z)` over the range the tests need. The raw series cancels like
/// `e^{Re(z^2)}` along the negative axis for small beta, so real negative
/// arguments of magnitude > 2.5 with beta < 1 go through the spectral
/// integral instead.
pub fn mittag_leffler(beta: f64, z: Complex64) -> Complex64 {
    if beta < 1.0 && z.im == 0.0 && z.re < -2.5 {
        return Complex64::new(mittag_leffler_neg_real(beta, -z.re), 0.0);
    }
    mittag_leffler_series(beta, z)
}

/// Composite Simpson rule; `n` is rounded up to even.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// The scalar resolvent oracle: `s(t) = E_beta(-mu t^beta)` solves
/// `s = 1 - mu (g_beta * s)` with the fractional kernel of order beta.
pub fn fractional_resolvent_oracle(beta: f64, mu: Complex64, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    mittag_leffler(beta, -mu * t.powf(beta))
}

