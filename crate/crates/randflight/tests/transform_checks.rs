//! Checks for the radial transform machinery against closed-form pairs.

use randflight::transform::{
    diffusion_mode_kernel, even_moment, forward_ft, inverse_ft, jhat, jhat_imag, omega_d,
    DecayHint, RadialFunction,
};

const PI: f64 = std::f64::consts::PI;

fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want.abs().max(1e-300)).abs()
}

macro_rules! check {
    ($got:expr, $want:expr, $tol:expr) => {{
        let (g, w) = ($got, $want);
        assert!(
            rel(g, w) <= $tol,
            "got {g:.16e}, want {w:.16e}, rel {:.2e} > {:.1e}",
            rel(g, w),
            $tol
        );
    }};
}

#[test]
fn shell_surface_measures() {
    check!(omega_d(1.0, 0.7), 2.0, 1e-14);
    check!(omega_d(2.0, 0.7), 2.0 * PI * 0.7, 1e-14);
    check!(omega_d(3.0, 0.7), 4.0 * PI * 0.7 * 0.7, 1e-14);
    check!(omega_d(4.0, 0.7), 2.0 * PI * PI * 0.7_f64.powi(3), 1e-14);
}

#[test]
fn shell_transform_closed_forms() {
    for &x in &[0.3_f64, 2.5, 11.0, 40.0] {
        check!(jhat(1.0, x).unwrap(), x.cos(), 1e-12);
        check!(jhat(3.0, x).unwrap(), x.sin() / x, 1e-12);
        // d = 5: 3 (sin x - x cos x) / x^3
        check!(
            jhat(5.0, x).unwrap(),
            3.0 * (x.sin() - x * x.cos()) / (x * x * x),
            1e-11
        );
        check!(jhat_imag(1.0, x).unwrap(), x.cosh(), 1e-12);
        check!(jhat_imag(3.0, x).unwrap(), x.sinh() / x, 1e-12);
    }
    check!(jhat(2.7, 0.0).unwrap(), 1.0, 0.0);
    check!(jhat_imag(2.7, 0.0).unwrap(), 1.0, 0.0);
}

/// Forward transform of the exponential point-source density in 3D:
/// F{ e^{-r} / (4 pi r^2) } = arctan(z) / z.
#[test]
fn forward_transform_of_uncollided_density() {
    let f = RadialFunction {
        evaluator: Box::new(|r: f64| (-r).exp() / omega_d(3.0, r)),
        d: 3.0,
        decay_hint: DecayHint::Exponential,
    };
    for &z in &[0.0_f64, 0.5, 2.0, 10.0, 40.0] {
        let rep = forward_ft(&f, z).unwrap();
        let want = if z == 0.0 { 1.0 } else { z.atan() / z };
        check!(rep.value, want, 1e-10);
        assert!(rep.est_error < 1e-8, "error estimate too large: {}", rep.est_error);
    }
}

/// Inversion of the Lorentzian in 3D gives the Yukawa profile
/// e^{-r} / (4 pi r), the simplest diffusion mode.
#[test]
fn inverse_transform_yukawa() {
    let fbar = |z: f64| 1.0 / (1.0 + z * z);
    for &r in &[0.3_f64, 1.0, 4.0] {
        let rep = inverse_ft(&fbar, 3.0, r).unwrap();
        check!(rep.value, (-r).exp() / (4.0 * PI * r), 1e-10);
    }
}

/// Round trip: transform the 2D profile e^{-r} r / (2 pi r) forward on a
/// grid, then invert the interpolant-free closed form back.
#[test]
fn forward_inverse_round_trip() {
    // f(r) = e^{-r} / (2 pi): fbar(z) = Int r e^{-r} J_0(z r) dr
    // has the closed form (1 + z^2)^{-3/2}.
    let g = RadialFunction {
        evaluator: Box::new(|r: f64| (-r).exp() / (2.0 * PI)),
        d: 2.0,
        decay_hint: DecayHint::Exponential,
    };
    for &z in &[0.4_f64, 1.7] {
        let fwd = forward_ft(&g, z).unwrap();
        check!(fwd.value, (1.0 + z * z).powf(-1.5), 1e-10);
    }
    let fbar = |z: f64| (1.0 + z * z).powf(-1.5);
    for &r in &[0.5_f64, 2.0] {
        let inv = inverse_ft(&fbar, 2.0, r).unwrap();
        check!(inv.value, (-r).exp() / (2.0 * PI), 1e-9);
    }
}

/// The closed diffusion-mode kernel must agree with brute-force inversion of
/// 1 / (1 + (z nu)^2) in every dimension it will be used in.
#[test]
fn mode_kernel_matches_numeric_inversion() {
    // Above d = 4 a bare Lorentzian decays too slowly to invert numerically
    // (that is the point of having the kernel in closed form), so the
    // numeric cross-check stops there.
    for &d in &[1.0, 2.0, 3.0, 4.0] {
        for &nu in &[0.6_f64, 1.9] {
            for &r in &[0.7_f64, 3.0] {
                let fbar = move |z: f64| 1.0 / (1.0 + (z * nu) * (z * nu));
                let want = inverse_ft(&fbar, d, r).unwrap().value;
                let got = diffusion_mode_kernel(d, nu, r).unwrap();
                check!(got, want, 1e-9);
            }
        }
    }
    // d = 5: K_{3/2} is elementary, kernel = (2 pi)^{-5/2} r^{-3/2} nu^{-7/2} K_{3/2}(r/nu).
    for &(nu, r) in &[(0.6_f64, 0.7_f64), (1.9, 3.0)] {
        let x: f64 = r / nu;
        let k32 = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x);
        let want = (2.0 * PI).powf(-2.5) * r.powf(-1.5) * nu.powf(-3.5) * k32;
        check!(diffusion_mode_kernel(5.0, nu, r).unwrap(), want, 1e-12);
    }
    // 1D and 3D have elementary forms.
    check!(
        diffusion_mode_kernel(1.0, 0.8, 1.3).unwrap(),
        (-1.3_f64 / 0.8).exp() / (2.0 * 0.8),
        1e-13
    );
    check!(
        diffusion_mode_kernel(3.0, 0.8, 1.3).unwrap(),
        (-1.3_f64 / 0.8).exp() / (4.0 * PI * 1.3 * 0.8 * 0.8),
        1e-13
    );
}

/// Spatial even moments read off a transform at the origin: the classical
/// 3D exponential random walk at c = 1/2 has total-collision moments
/// m0 = 2, m2 = 8, m4 = 448/3, m6 = 18944/3.
#[test]
fn even_moments_of_collision_transform() {
    let c = 0.5;
    let cbar = move |z: f64| {
        let zb = if z == 0.0 { 1.0 } else { z.atan() / z };
        zb / (1.0 - c * zb)
    };
    let want = [2.0, 8.0, 448.0 / 3.0, 18944.0 / 3.0];
    for (i, &m) in [0u32, 2, 4, 6].iter().enumerate() {
        let (value, est) = even_moment(&cbar, 3.0, m).unwrap();
        check!(value, want[i], 1e-7);
        assert!(est.is_finite() && est >= 0.0);
    }
}

/// Transforms whose oscillation never decays (a bare delta-shell kernel)
/// must be rejected by the envelope guard instead of being misintegrated.
#[test]
fn inversion_rejects_non_decaying_transforms() {
    let fbar = |z: f64| jhat(2.0, z).unwrap();
    assert!(inverse_ft(&fbar, 2.0, 1.0).is_err());
}
