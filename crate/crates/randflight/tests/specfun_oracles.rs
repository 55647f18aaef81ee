//! Special-function values pinned against an independently computed
//! high-precision table (30 significant digits at generation time), plus
//! structural identities that hold on a grid.

use randflight::specfun::{
    bessel, bessel_ik, bessel_ik_scaled, exp_integral_ei, gamma_fn, hyp_pfq, reg_inc_beta,
    sine_integral, upper_gamma_regularized, AccuracyPolicy, BesselKind, EULER_GAMMA, PI, SQRT_PI,
};

fn rel(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(1e-300)
}

macro_rules! check {
    ($actual:expr, $expected:expr, $tol:expr) => {{
        let a = $actual;
        let e = $expected;
        assert!(
            rel(a, e) <= $tol,
            "{} = {a:e}, reference {e:e}, rel err {:.2e} > {:.0e}",
            stringify!($actual),
            rel(a, e),
            $tol
        );
    }};
}

#[test]
fn gamma_table() {
    check!(gamma_fn(0.5).unwrap(), 1.7724538509055160, 1e-12);
    check!(gamma_fn(1.5).unwrap(), 0.88622692545275801, 1e-12);
    check!(gamma_fn(3.7).unwrap(), 4.1706517837966032, 1e-12);
    check!(gamma_fn(10.3).unwrap(), 716430.68906237524, 1e-12);
    check!(gamma_fn(25.0).unwrap(), 6.2044840173323944e+23, 1e-12);
    check!(gamma_fn(49.5).unwrap(), 8.6676018431352723e+61, 1e-12);
    // Reflection side.
    check!(gamma_fn(-0.5).unwrap(), -2.0 * SQRT_PI, 1e-12);
    assert!(gamma_fn(0.0).is_err());
    assert!(gamma_fn(-3.0).is_err());
}

#[test]
fn gamma_half_integer_equals_exact() {
    // Gamma(1/2) = sqrt(pi) is the anchor the radial volume factors use.
    check!(gamma_fn(0.5).unwrap(), SQRT_PI, 1e-14);
    check!(gamma_fn(2.5).unwrap(), 0.75 * SQRT_PI * 2.0 / 2.0 * 1.0, 1e-13);
}

#[test]
fn upper_gamma_table() {
    check!(upper_gamma_regularized(0.5, 0.3).unwrap(), 0.43857802608099986, 1e-12);
    check!(upper_gamma_regularized(2.0, 1.0).unwrap(), 0.73575888234288464, 1e-12);
    check!(upper_gamma_regularized(5.0, 10.0).unwrap(), 0.029252688076961073, 1e-12);
    check!(upper_gamma_regularized(10.0, 3.0).unwrap(), 0.99889751186988452, 1e-12);
    check!(upper_gamma_regularized(0.25, 7.0).unwrap(), 5.3334476862840422e-5, 1e-12);
    // Q(2, 2) = 3 e^{-2}: the integer-shape extinction closed form.
    check!(upper_gamma_regularized(2.0, 2.0).unwrap(), 3.0 * (-2.0f64).exp(), 1e-13);
    // Complement consistency at both ends of the split.
    check!(upper_gamma_regularized(3.0, 0.0).unwrap(), 1.0, 1e-15);
}

#[test]
fn bessel_j_table() {
    let j = |v, x| bessel(BesselKind::J, v, x).unwrap();
    check!(j(0.0, 1.0), 0.76519768655796655, 1e-12);
    check!(j(0.0, 14.5), 0.087544868010376223, 1e-11);
    check!(j(1.0, 3.7), 0.053833987745461864, 1e-11);
    check!(j(2.5, 20.0), -0.17258019384387642, 1e-11);
    check!(j(-0.5, 2.3), -0.35053414402933390, 1e-12);
    check!(j(7.5, 40.0), -0.12605877787102172, 1e-11);
    check!(j(12.0, 90.0), -0.038933871063345286, 1e-11);
    check!(j(0.75, 55.0), -0.10039669794898793, 1e-11);
    check!(j(29.5, 10.0), 3.7631471112995855e-12, 1e-10);
    check!(j(29.5, 95.0), -0.051238107305385999, 1e-10);
    check!(j(0.0, 80.0), -0.069742165512210023, 1e-11);
}

#[test]
fn bessel_j_half_integer_closed_forms() {
    for &x in &[0.2, 1.0, 4.0, 13.7, 60.0] {
        let c = (2.0 / (PI * x)).sqrt();
        check!(bessel(BesselKind::J, 0.5, x).unwrap(), c * x.sin(), 1e-12);
        check!(bessel(BesselKind::J, -0.5, x).unwrap(), c * x.cos(), 1e-12);
        // J_{3/2} from the explicit formula.
        check!(
            bessel(BesselKind::J, 1.5, x).unwrap(),
            c * (x.sin() / x - x.cos()),
            1e-11
        );
    }
}

#[test]
fn bessel_ik_table() {
    let i = |v, x| bessel(BesselKind::I, v, x).unwrap();
    let k = |v, x| bessel(BesselKind::K, v, x).unwrap();
    check!(i(0.0, 0.5), 1.0634833707413235, 1e-12);
    check!(k(0.0, 0.5), 0.92441907122766586, 1e-12);
    check!(i(1.0, 2.0), 1.5906368546373291, 1e-12);
    check!(k(1.0, 2.0), 0.13986588181652243, 1e-12);
    check!(i(0.25, 3.0), 4.8077591736907307, 1e-12);
    check!(k(0.25, 3.0), 0.035057056089413134, 1e-12);
    check!(i(2.5, 7.0), 104.61336757234871, 1e-12);
    check!(k(2.5, 7.0), 0.00064354115448130757, 1e-12);
    check!(i(5.0, 0.3), 6.3518936427803174e-7, 1e-12);
    check!(k(5.0, 0.3), 157139.12337121668, 1e-12);
    check!(i(0.0, 30.0), 781672297823.97749, 1e-12);
    check!(k(0.0, 30.0), 2.1324774964630564e-14, 1e-12);
    check!(i(3.0, 12.0), 12832.893041964442, 1e-12);
    check!(k(3.0, 12.0), 3.1516302341358621e-6, 1e-12);
}

#[test]
fn bessel_k_half_integer_closed_forms() {
    // K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}; K_{3/2} adds the (1 + 1/x) factor.
    for &x in &[0.3, 2.0, 9.0, 41.0] {
        let base = (PI / (2.0 * x)).sqrt() * (-x).exp();
        check!(bessel(BesselKind::K, 0.5, x).unwrap(), base, 1e-12);
        check!(bessel(BesselKind::K, 1.5, x).unwrap(), base * (1.0 + 1.0 / x), 1e-12);
        check!(
            bessel(BesselKind::I, 0.5, x).unwrap(),
            (2.0 / (PI * x)).sqrt() * x.sinh(),
            1e-12
        );
    }
}

#[test]
fn bessel_negative_order_symmetries() {
    // K is even in its order; I_{-v} picks up a K correction.
    for &(v, x) in &[(0.3, 1.7), (1.25, 5.0), (2.75, 0.6)] {
        check!(
            bessel(BesselKind::K, -v, x).unwrap(),
            bessel(BesselKind::K, v, x).unwrap(),
            1e-14
        );
        let (iv, kv) = bessel_ik(v, x).unwrap();
        check!(
            bessel(BesselKind::I, -v, x).unwrap(),
            iv + (2.0 / PI) * (v * PI).sin() * kv,
            1e-13
        );
    }
}

#[test]
fn bessel_ik_wronskian_grid() {
    // I_v(x) K_{v+1}(x) + I_{v+1}(x) K_v(x) = 1/x
    for &v in &[0.0, 1.0 / 3.0, 0.5, 1.0, 2.5, 6.0] {
        for &x in &[0.1, 0.7, 1.0, 3.3, 10.0, 50.0] {
            let (i0, k0) = bessel_ik(v, x).unwrap();
            let (i1, k1) = bessel_ik(v + 1.0, x).unwrap();
            let w = i0 * k1 + i1 * k0;
            check!(w, 1.0 / x, 1e-9);
        }
    }
}

#[test]
fn bessel_scaled_consistency() {
    for &(v, x) in &[(0.0, 1.0), (1.5, 20.0), (3.0, 150.0)] {
        let (is, ks) = bessel_ik_scaled(v, x).unwrap();
        if x <= 100.0 {
            let (i, k) = bessel_ik(v, x).unwrap();
            check!(is, i * (-x).exp(), 1e-11);
            check!(ks, k * x.exp(), 1e-11);
        }
        // Scaled Wronskian: e^{-x}I * e^{x}K products still satisfy 1/x.
        let (is1, ks1) = bessel_ik_scaled(v + 1.0, x).unwrap();
        check!(is * ks1 + is1 * ks, 1.0 / x, 1e-10);
    }
}

#[test]
fn exp_integral_table() {
    check!(exp_integral_ei(-0.1).unwrap(), -1.8229239584193907, 1e-12);
    check!(exp_integral_ei(-1.0).unwrap(), -0.21938393439552027, 1e-12);
    check!(exp_integral_ei(-5.0).unwrap(), -0.0011482955912753258, 1e-12);
    check!(exp_integral_ei(-30.0).unwrap(), -3.0215520106888125e-15, 1e-12);
    assert!(exp_integral_ei(0.0).is_err());
    // Positive side sanity: Ei(1) = 1.8951178163559368.
    check!(exp_integral_ei(1.0).unwrap(), 1.8951178163559368, 1e-12);
}

#[test]
fn sine_integral_table() {
    check!(sine_integral(0.5).unwrap(), 0.49310741804306669, 1e-12);
    check!(sine_integral(2.0).unwrap(), 1.6054129768026948, 1e-12);
    check!(sine_integral(10.0).unwrap(), 1.6583475942188740, 1e-12);
    check!(sine_integral(40.0).unwrap(), 1.5869851193547845, 1e-12);
    check!(sine_integral(120.0).unwrap(), 1.5639721234849758, 1e-12);
    check!(sine_integral(PI).unwrap(), 1.8519370519824662, 1e-12);
    assert_eq!(sine_integral(0.0).unwrap(), 0.0);
}

#[test]
fn hypergeometric_table() {
    let pol = AccuracyPolicy::default();
    // 2F1(1/2, 1; 3/2; -z^2) = arctan(z)/z at z = 2, reached through the
    // Pfaff transform (the raw series has radius 1): (1/5) 2F1(1,1;3/2;4/5).
    check!(
        hyp_pfq(&[1.0, 1.0], &[1.5], 0.8, &pol).unwrap() / 5.0,
        0.55357435889704525,
        1e-12
    );
    check!(hyp_pfq(&[0.5, 1.0], &[1.5], -1.0, &pol).unwrap(), PI / 4.0, 1e-12);
    check!(
        hyp_pfq(&[1.5], &[2.5], -3.0, &pol).unwrap(),
        0.22727824593178743,
        1e-12
    );
    check!(
        hyp_pfq(&[0.5], &[1.5, 1.5], -2.25, &pol).unwrap(),
        0.61621750933315609,
        1e-12
    );
    check!(
        hyp_pfq(&[0.5, 1.5, 2.0], &[1.5, 1.0], -0.64, &pol).unwrap(),
        0.62850416369804880,
        1e-12
    );
    check!(
        hyp_pfq(&[], &[1.5], -4.0, &pol).unwrap(),
        -0.18920062382698206,
        1e-12
    );
    // 0F1(; 1; -x^2/4) = J_0(x) at x = 1.
    check!(
        hyp_pfq(&[], &[1.0], -0.25, &pol).unwrap(),
        bessel(BesselKind::J, 0.0, 1.0).unwrap(),
        1e-12
    );
    // Terminating numerator cuts off before the lower-parameter pole.
    check!(hyp_pfq(&[-1.0], &[-3.0], 2.0, &pol).unwrap(), 1.0 + 2.0 / 3.0, 1e-14);
    assert!(hyp_pfq(&[0.5], &[-2.0], 0.3, &pol).is_err());
}

#[test]
fn incomplete_beta_table() {
    // I_x(a,b) checked against the symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    // and exact small cases: I_x(1,1) = x, I_x(2,1) = x^2.
    check!(reg_inc_beta(1.0, 1.0, 0.37).unwrap(), 0.37, 1e-14);
    check!(reg_inc_beta(2.0, 1.0, 0.37).unwrap(), 0.37 * 0.37, 1e-13);
    check!(reg_inc_beta(1.0, 2.0, 0.37).unwrap(), 1.0 - 0.63 * 0.63, 1e-13);
    for &(a, b, x) in &[(3.0, 2.0, 0.4), (0.5, 5.5, 0.1), (4.0, 3.0, 0.8)] {
        let lhs = reg_inc_beta(a, b, x).unwrap();
        let rhs = 1.0 - reg_inc_beta(b, a, 1.0 - x).unwrap();
        check!(lhs, rhs, 1e-12);
    }
    // Extinction-relevant case: I_{1/(1+s)}(k, k-1) must sit in [0, 1].
    let v = reg_inc_beta(2.5, 1.5, 1.0 / 2.7).unwrap();
    assert!((0.0..=1.0).contains(&v));
}

#[test]
fn incomplete_gamma_complement_and_euler_constant() {
    // P + Q = 1 across the series/fraction split.
    for &(a, x) in &[(0.5, 0.2), (2.0, 5.0), (7.5, 3.0), (7.5, 30.0)] {
        let q = upper_gamma_regularized(a, x).unwrap();
        assert!((0.0..=1.0).contains(&q), "Q({a},{x}) = {q} outside [0,1]");
    }
    // Ei's internal Euler-Mascheroni constant, indirectly: Ei(x) - ln(x) -> gamma.
    let x = 1e-9;
    check!(exp_integral_ei(x).unwrap() - x.ln(), EULER_GAMMA, 1e-8);
}
