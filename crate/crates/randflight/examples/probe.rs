// Scratch validation probe for the freepath module (not part of the test
// suite; run with `cargo run --example probe`).

use randflight::freepath::{Family, FreePathModel};
use randflight::transform::{forward_ft, omega_d, DecayHint, RadialFunction};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b.abs().max(1e-300)).abs()
}

fn quad_prop(model: &FreePathModel, d: f64, z: f64) -> f64 {
    let f = RadialFunction {
        evaluator: Box::new(move |r: f64| {
            if r == 0.0 {
                0.0
            } else {
                model.pdf(r).unwrap_or(0.0) / omega_d(d, r)
            }
        }),
        d,
        decay_hint: DecayHint::Exponential,
    };
    forward_ft(&f, z).unwrap().value
}

fn quad_stretched(model: &FreePathModel, d: f64, z: f64) -> f64 {
    let f = RadialFunction {
        evaluator: Box::new(move |r: f64| {
            if r == 0.0 {
                0.0
            } else {
                model.extinction(r).unwrap_or(0.0) / omega_d(d, r)
            }
        }),
        d,
        decay_hint: DecayHint::Exponential,
    };
    forward_ft(&f, z).unwrap().value
}

fn main() {
    let pi = std::f64::consts::PI;

    println!("== exponential closed forms vs general path ==");
    let exp = FreePathModel::new(Family::Exponential).unwrap();
    for &d in &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0] {
        for &z in &[0.05_f64, 0.3, 1.0, 4.0, 20.0, 80.0] {
            let closed = exp.propagator(d, z).unwrap();
            let qd = quad_prop(&exp, d, z);
            println!("  d={d} z={z}: closed {closed:+.13e} quad rel {:.2e}", rel(closed, qd));
        }
    }
    println!("== exponential general-d continuity (d = 3.5) ==");
    for &z in &[0.29_f64, 0.31, 5.9, 6.1, 30.0, 100.0] {
        let v = exp.propagator(3.5, z).unwrap();
        let qd = quad_prop(&exp, 3.5, z);
        println!("  z={z}: {v:+.13e} quad rel {:.2e}", rel(v, qd));
    }
    println!("== exponential imag ==");
    for &d in &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 3.5] {
        let chi = 0.9_f64;
        let v = exp.propagator_imag(d, chi).unwrap();
        println!("  d={d} chi={chi}: {v:+.13e}");
    }
    // d6 spectrum oracle: c = 0.8, principal nu = 1.0606601717798213.
    let chi_pr = 1.0 / 1.0606601717798213_f64;
    let h1 = exp.propagator_imag(6.0, chi_pr).unwrap();
    println!("  d6 principal c*h1 = {:.15} (want 1)", 0.8 * h1);
    let chi_sh = 1.0 / 1.0206207261596575_f64;
    let h2 = exp.propagator_imag_sheet2(6.0, chi_sh).unwrap().unwrap();
    println!("  d6 sheet2   c*h2 = {:.15} (want 1)", 0.8 * h2);

    println!("== gamma closed forms ==");
    let g2 = FreePathModel::new(Family::Gamma { k: 2.0 }).unwrap();
    for &d in &[1.0, 2.0, 3.0] {
        for &z in &[0.4_f64, 2.0, 7.0, 30.0] {
            let v = g2.propagator(d, z).unwrap();
            let qd = quad_prop(&g2, d, z);
            println!("  k2 d={d} z={z}: {v:+.13e} quad rel {:.2e}", rel(v, qd));
        }
    }
    let gh = FreePathModel::new(Family::Gamma { k: 0.5 }).unwrap();
    for &z in &[0.3_f64, 1.5, 10.0] {
        let v = gh.propagator(1.0, z).unwrap();
        let qd = quad_prop(&gh, 1.0, z);
        println!("  k=1/2 d1 z={z}: {v:+.13e} quad rel {:.2e}", rel(v, qd));
    }
    // ghalf sheet structure: at the c = 0.7 roots, c * h = 1.
    let h1 = gh.propagator_imag(1.0, 0.38731770564093779).unwrap();
    let h2 = gh
        .propagator_imag_sheet2(1.0, 0.46095416789203660)
        .unwrap()
        .unwrap();
    println!("  ghalf principal c*h1 = {:.15}, sheet2 c*h2 = {:.15} (want 1, 1)", 0.7 * h1, 0.7 * h2);

    println!("== gamma general (k=3.3, d=2.6) series/Pfaff/connection continuity ==");
    let g33 = FreePathModel::new(Family::Gamma { k: 3.3 }).unwrap();
    for &z in &[1.45_f64, 1.5, 9.85, 9.95, 40.0] {
        let v = g33.propagator(2.6, z).unwrap();
        let qd = quad_prop(&g33, 2.6, z);
        println!("  z={z}: {v:+.13e} quad rel {:.2e}", rel(v, qd));
    }
    println!("== gamma imag: k2 d1 closed vs Euler path ==");
    for &chi in &[0.6_f64, 1.2, 1.9] {
        let closed = 4.0 * (4.0 + chi * chi) / (4.0 - chi * chi).powi(2);
        let v = g2.propagator_imag(1.0, chi).unwrap();
        println!("  chi={chi}: {v:+.13e} closed rel {:.2e}", rel(v, closed));
    }
    let g33i = g33.propagator_imag(2.6, 3.0).unwrap();
    println!("  k3.3 d2.6 chi=3: {g33i:+.13e} (Euler path, chi/k = 0.909)");

    println!("== chi closed forms ==");
    let tests: Vec<(f64, f64, Box<dyn Fn(f64) -> f64>)> = vec![
        (1.0, 1.0, Box::new(move |z: f64| (-pi * z * z / 4.0).exp())),
        (2.0, 2.0, Box::new(move |z: f64| (-z * z / pi).exp())),
        (3.0, 3.0, Box::new(move |z: f64| (-pi * z * z / 16.0).exp())),
        (3.0, 1.0, Box::new(move |z: f64| {
            -(pi * z * z - 8.0) * (-pi * z * z / 16.0).exp() / 8.0
        })),
        (4.0, 2.0, Box::new(move |z: f64| {
            (9.0 * pi - 4.0 * z * z) * (-4.0 * z * z / (9.0 * pi)).exp() / (9.0 * pi)
        })),
    ];
    for (k, d, f) in &tests {
        let m = FreePathModel::new(Family::Chi { k: *k }).unwrap();
        for &z in &[0.5_f64, 2.0, 6.0] {
            let v = m.propagator(*d, z).unwrap();
            println!("  k={k} d={d} z={z}: {v:+.13e} closed rel {:.2e}", rel(v, f(z)));
        }
    }
    println!("== chi non-terminating (k=2.4, d=3) vs quadrature + w-switch continuity ==");
    let c24 = FreePathModel::new(Family::Chi { k: 2.4 }).unwrap();
    for &z in &[1.0_f64, 10.0, 48.0, 49.0] {
        let v = c24.propagator(3.0, z).unwrap();
        let qd = quad_prop(&c24, 3.0, z);
        println!("  z={z}: {v:+.13e} quad rel {:.2e}", rel(v, qd));
    }
    let chiim = c24.propagator_imag(3.0, 2.0).unwrap();
    println!("  imag chi=2: {chiim:+.13e} (entire, grows)");

    println!("== pearson ==");
    let pe = FreePathModel::new(Family::Pearson).unwrap();
    for &d in &[1.0, 2.0, 3.0, 4.0] {
        for &z in &[0.7_f64, 5.0, 30.0] {
            let v = pe.propagator(d, z).unwrap();
            let want = match d as u32 {
                1 => z.cos(),
                2 => randflight::specfun::bessel(randflight::specfun::BesselKind::J, 0.0, z).unwrap(),
                3 => z.sin() / z,
                4 => 2.0 * randflight::specfun::bessel(randflight::specfun::BesselKind::J, 1.0, z).unwrap() / z,
                _ => unreachable!(),
            };
            println!("  d={d} z={z}: jhat rel {:.2e}", rel(v, want));
        }
    }
    for &(d, z) in &[(1.0, 3.0), (3.0, 3.0), (3.0, 25.0), (2.0, 17.9), (2.0, 18.1), (2.0, 600.0)] {
        let v = pe.stretched_propagator(d, z).unwrap();
        let want = match d as u32 {
            1 => z.sin() / z,
            3 => randflight::specfun::sine_integral(z).unwrap() / z,
            _ => {
                // reference: panel quadrature of (1/z) Int_0^z jhat_2
                let g = |t: f64| randflight::transform::jhat(2.0, t).unwrap();
                let mut s = 0.0;
                let n = 400_000;
                for i in 0..n {
                    let t = (i as f64 + 0.5) * z / n as f64;
                    s += g(t) * z / n as f64;
                }
                s / z
            }
        };
        println!("  Xbar d={d} z={z}: {v:+.13e} ref rel {:.2e}", rel(v, want));
    }

    println!("== besselk ==");
    for &m in &[1u32, 2, 3] {
        let bk = FreePathModel::new(Family::BesselK { m }).unwrap();
        let dm = m as f64;
        for &z in &[0.5_f64, 3.0] {
            let v = bk.propagator(dm, z).unwrap();
            let qd = quad_prop(&bk, dm, z);
            println!("  m={m} d={dm} z={z}: closed {v:+.13e} quad rel {:.2e}", rel(v, qd));
        }
        // off-design dimension goes through quadrature; sanity vs mean/m2
        let v = bk.propagator(2.0, 0.3).unwrap();
        let m2 = bk.mean_square().unwrap();
        let series = 1.0 - 0.09 * m2 / (2.0 * 2.0);
        println!("  m={m} d=2 z=0.3: {v:+.10e} small-z model {series:+.10e} (rough)");
        // extinction closed form vs numeric tail integral of the pdf
        let s0 = 0.8;
        let mut tail = 0.0;
        let n = 200_000;
        for i in 0..n {
            let s = s0 + (i as f64 + 0.5) * (40.0 - s0) / n as f64;
            tail += bk.pdf(s).unwrap() * (40.0 - s0) / n as f64;
        }
        println!(
            "  m={m} E(0.8) = {:.13e} vs pdf tail {:.13e} rel {:.2e}",
            bk.extinction(s0).unwrap(),
            tail,
            rel(bk.extinction(s0).unwrap(), tail)
        );
    }

    println!("== moments vs quadrature  ==");
    let fams: Vec<FreePathModel> = vec![
        exp.clone(),
        g2.clone(),
        gh.clone(),
        FreePathModel::new(Family::Chi { k: 2.0 }).unwrap(),
        FreePathModel::new(Family::BetaPrime { k: 4.5 }).unwrap(),
        FreePathModel::new(Family::BesselK { m: 2 }).unwrap(),
    ];
    for m in &fams {
        let mut q = [0.0_f64; 4]; // <1>, <s>, <s^2>, <s^3> by quadrature
        let n = 400_000;
        let smax = 400.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) * smax / n as f64;
            let p = m.pdf(s).unwrap_or(0.0);
            let w = smax / n as f64;
            q[0] += p * w;
            q[1] += s * p * w;
            q[2] += s * s * p * w;
            q[3] += s * s * s * p * w;
        }
        let name = m.name();
        let norm = q[0];
        let mean = q[1];
        let m2 = m.mean_square().unwrap_or(f64::NAN);
        let m3 = m.raw_moment(3).map(|v| v).unwrap_or(f64::NAN);
        println!(
            "  {name}: norm {:.3e} mean {:.3e} | m2 {m2:.10e} quad rel {:.1e} | m3 {m3:.6e} quad rel {:.1e} | msqX {:.10e}",
            (norm - 1.0).abs(),
            (mean - 1.0).abs(),
            rel(m2, q[2]),
            if m3.is_nan() { f64::NAN } else { rel(m3, q[3]) },
            m.mean_square_extinction().unwrap_or(f64::NAN),
        );
    }

    println!("== stretched propagators vs quadrature ==");
    let g22 = FreePathModel::new(Family::Gamma { k: 2.0 }).unwrap();
    for &z in &[0.5_f64, 1.5, 1.7, 8.0] {
        let v = g22.stretched_propagator(2.0, z).unwrap();
        let closed = (8.0 + z * z) / (4.0 + z * z).powf(1.5);
        println!("  gamma k2 d2 z={z}: closed rel {:.2e}", rel(v, closed));
    }
    for &z in &[0.8_f64, 2.5] {
        let v = g33.stretched_propagator(2.6, z).unwrap();
        let qd = quad_stretched(&g33, 2.6, z);
        println!("  gamma k3.3 d2.6 z={z}: {v:+.13e} quad rel {:.2e}", rel(v, qd));
    }
    let bp = FreePathModel::new(Family::BetaPrime { k: 4.5 }).unwrap();
    let v = bp.propagator(2.0, 1.3).unwrap();
    println!("  betaprime d2 z=1.3 propagator: {v:+.13e}");
    let v = bp.stretched_propagator(2.0, 1.3).unwrap();
    println!("  betaprime d2 z=1.3 stretched:  {v:+.13e}");

    println!("== samplers (1e5 draws, mean/m2) ==");
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for m in &fams {
        let smp = m.sampler().unwrap();
        let n = 100_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let s = smp.sample(&mut rng);
            s1 += s;
            s2 += s * s;
        }
        println!(
            "  {}: mean {:.4} m2 {:.4} (want 1, {:.4})",
            m.name(),
            s1 / n as f64,
            s2 / n as f64,
            m.mean_square().unwrap_or(f64::NAN)
        );
    }
}
