//! Catalogue of closed-form collision densities, scalar fluxes, and spatial
//! moments, plus the Case/Davison benchmark for classical 3D transport.
//!
//! Dispatch is exact-key: a query returns `Ok(Some(v))` when a closed form
//! (or benchmark-quality quadrature) exists for the family/dimension/order,
//! `Ok(None)` when none is known, and `Err` only for invalid inputs or
//! numerical failure. `None` is a statement about the catalogue, not about
//! the physics; callers fall back to `transform::inverse_ft` or Monte Carlo.

use crate::freepath::{Family, FreePathModel, TransportProblem};
use crate::specfun::{
    bessel_ik, bessel_ik_scaled, exp_integral_ei, hyp_pfq, ln_gamma, AccuracyPolicy, PI, SQRT_PI,
};
use crate::transform::{diffusion_mode_kernel, inverse_ft, omega_d};
use crate::{Error, Result};

/// Which distribution a catalogue query targets. Moments carry the order m
/// and the collision order (`None` = summed over all orders).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    CollisionNth(u32),
    CollisionTotal,
    FluxNth(u32),
    FluxTotal,
    MomentCollision { m: u32, n: Option<u32> },
    MomentFlux { m: u32, n: Option<u32> },
}

/// A fully specified catalogue lookup: the transport setting plus the
/// quantity asked of it.
#[derive(Clone, Debug)]
pub struct SolutionKey {
    pub problem: TransportProblem,
    pub quantity: Quantity,
}

impl SolutionKey {
    pub fn new(problem: TransportProblem, quantity: Quantity) -> Result<Self> {
        match quantity {
            Quantity::CollisionNth(0) | Quantity::MomentCollision { n: Some(0), .. } => {
                return Err(Error::Domain("collision orders start at n = 1".into()));
            }
            Quantity::MomentCollision { m, .. } | Quantity::MomentFlux { m, .. } if m % 2 == 1 => {
                return Err(Error::Domain(format!(
                    "odd spatial moments vanish by symmetry; m must be even, got {m}"
                )));
            }
            _ => {}
        }
        Ok(SolutionKey { problem, quantity })
    }

    /// Evaluate a radial quantity of this key at radius `r`. Moment
    /// quantities are not radial profiles; use [`exact_moment`] for those.
    pub fn evaluate(&self, r: f64) -> Result<Option<f64>> {
        match self.quantity {
            Quantity::CollisionNth(n) => nth_collision_density(&self.problem, n, r),
            Quantity::CollisionTotal => total_collision_density(&self.problem, r),
            Quantity::FluxNth(n) => nth_scalar_flux(&self.problem, n, r),
            Quantity::FluxTotal => total_scalar_flux(&self.problem, r),
            Quantity::MomentCollision { .. } | Quantity::MomentFlux { .. } => Err(
                Error::Unsupported("moment quantities have no radial profile; call exact_moment".into()),
            ),
        }
    }
}

const KEY_TOL: f64 = 1e-12;

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= KEY_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Gamma(k = 1) and the m = 1 Bessel-K family are the exponential
/// distribution in disguise; fold them so such problems see the full
/// exponential catalogue.
fn canonical(family: &Family) -> Family {
    match family {
        Family::Gamma { k } if near(*k, 1.0) => Family::Exponential,
        Family::BesselK { m: 1 } => Family::Exponential,
        other => other.clone(),
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!("radius must be finite and >= 0, got {r}")));
    }
    Ok(())
}

/// K_v(x) with the K_{-v} = K_v symmetry folded in.
fn kv(order: f64, x: f64) -> Result<f64> {
    Ok(bessel_ik(order.abs(), x)?.1)
}

/// ln K_v(x), stable against underflow of K itself at large x.
fn ln_kv(order: f64, x: f64) -> Result<f64> {
    let (_, ks) = bessel_ik_scaled(order.abs(), x)?;
    Ok(ks.ln() - x)
}

/// sgn with sgn(0) = 0, which is what the jump-midpoint formulas mean
/// (f64::signum treats +0.0 as positive).
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

// ---------------------------------------------------------------------------
// collision densities
// ---------------------------------------------------------------------------

/// Density of n-th collisions at radius r, where a closed form is known.
pub fn nth_collision_density(problem: &TransportProblem, n: u32, r: f64) -> Result<Option<f64>> {
    if n == 0 {
        return Err(Error::Domain("collision orders start at n = 1".into()));
    }
    check_radius(r)?;
    let (c, d) = (problem.c, problem.d);
    match canonical(&problem.model.family) {
        Family::Exponential => exp_nth_collision(c, d, n, r, problem),
        Family::Gamma { k } if near(k, 2.0) => gamma2_nth_collision(c, d, n, r, problem),
        Family::Gamma { k } if near(k, 0.5) => gamma_half_nth_collision(c, d, n, r, problem),
        Family::Chi { k } => chi_nth_collision(c, d, k, n, r, problem),
        Family::Pearson => pearson_nth_collision(c, d, n, r),
        _ => fallback_first(problem, n, r),
    }
}

/// n = 1 is the single-step propagator pdf(r) / Omega_d(r) whenever the
/// family has a density; otherwise the catalogue has nothing to offer.
fn fallback_first(problem: &TransportProblem, n: u32, r: f64) -> Result<Option<f64>> {
    if n != 1 {
        return Ok(None);
    }
    first_collision(problem, r)
}

fn first_collision(problem: &TransportProblem, r: f64) -> Result<Option<f64>> {
    if !problem.model.has_density() {
        return Ok(None);
    }
    if r == 0.0 {
        if near(problem.d, 1.0) {
            let p0 = problem.model.pdf(0.0)?;
            if p0.is_finite() {
                return Ok(Some(p0 / 2.0));
            }
        }
        return Err(Error::Divergence(
            "first-collision density is singular or indeterminate at r = 0".into(),
        ));
    }
    let v = problem.model.pdf(r)? / omega_d(problem.d, r);
    if !v.is_finite() {
        return Err(Error::Divergence(format!("first-collision density diverges at r = {r}")));
    }
    Ok(Some(v))
}

fn exp_nth_collision(c: f64, d: f64, n: u32, r: f64, problem: &TransportProblem) -> Result<Option<f64>> {
    let nf = n as f64;
    if near(d, 1.0) {
        // C(r|n) = 2^{1/2-n} sqrt(r) (c r)^{n-1} K_{1/2-n}(r) / (sqrt(pi) Gamma(n))
        if r == 0.0 {
            let v = c.powi(n as i32 - 1) * gamma(nf - 0.5) / (2.0 * SQRT_PI * gamma(nf));
            return Ok(Some(v));
        }
        let mut ln = (0.5 - nf) * std::f64::consts::LN_2 + 0.5 * r.ln() - 0.5 * PI.ln()
            - ln_gamma(nf)
            + ln_kv(nf - 0.5, r)?;
        if n > 1 {
            ln += (nf - 1.0) * (c * r).ln();
        }
        return Ok(Some(ln.exp()));
    }
    if near(d, 2.0) {
        // C(r|n) = 2^{-n/2-1} n c^{n-1} r^{n/2-1} K_{1-n/2}(r) / (pi Gamma(n/2+1))
        if r == 0.0 {
            if n <= 2 {
                return Err(Error::Divergence(format!(
                    "flatland exponential C(r|{n}) diverges at r = 0"
                )));
            }
            let v = nf * c.powi(n as i32 - 1) * gamma(0.5 * nf - 1.0)
                / (8.0 * PI * gamma(0.5 * nf + 1.0));
            return Ok(Some(v));
        }
        let mut ln = -(0.5 * nf + 1.0) * std::f64::consts::LN_2 + nf.ln() - PI.ln()
            - ln_gamma(0.5 * nf + 1.0)
            + (0.5 * nf - 1.0) * r.ln()
            + ln_kv(1.0 - 0.5 * nf, r)?;
        if n > 1 {
            ln += (nf - 1.0) * c.ln();
        }
        return Ok(Some(ln.exp()));
    }
    if near(d, 4.0) && n == 2 {
        return exp4_double_collision(c, r).map(Some);
    }
    fallback_first(problem, n, r)
}

/// 4D exponential double-collision density,
/// C(r|2) = -c (r^2 Ei(-r) + e^{-r}(r-1)) / (pi^2 r^2), with the large-r
/// cancellation between the two terms resummed asymptotically.
fn exp4_double_collision(c: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::Divergence("4D exponential C(r|2) diverges at r = 0".into()));
    }
    // bracket = r^2 e^r E_1(r) - r + 1 = 2/r - 6/r^2 + 24/r^3 - ...
    let bracket = if r <= 30.0 {
        let e1 = -exp_integral_ei(-r)?;
        r * r * (r.exp() * e1) - r + 1.0
    } else {
        let mut term = 2.0 / r;
        let mut sum = term;
        for j in 3..60 {
            let next = -term * j as f64 / r;
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    };
    Ok(c * (-r).exp() * bracket / (PI * PI * r * r))
}

fn gamma2_nth_collision(c: f64, d: f64, n: u32, r: f64, problem: &TransportProblem) -> Result<Option<f64>> {
    let nf = n as f64;
    if near(d, 3.0) {
        // C(r|n) = 2 (c r)^{n-1} K_{3/2-n}(2r) / (pi^{3/2} sqrt(r) Gamma(n))
        if r == 0.0 {
            return match n {
                1 => Err(Error::Divergence("gamma k=2 3D C(r|1) diverges at r = 0".into())),
                2 => Ok(Some(c / PI)),
                _ => Ok(Some(0.0)),
            };
        }
        let mut ln = std::f64::consts::LN_2 - 1.5 * PI.ln() - 0.5 * r.ln() - ln_gamma(nf)
            + ln_kv(1.5 - nf, 2.0 * r)?;
        if n > 1 {
            ln += (nf - 1.0) * (c * r).ln();
        }
        return Ok(Some(ln.exp()));
    }
    if near(d, 2.0) {
        // C(r|n) = 2 c^{n-1} r^{3n/2-1} K_{3n/2-1}(2r) / (pi Gamma(3n/2))
        if r == 0.0 {
            let v = 2.0 * c.powi(n as i32 - 1) / (PI * (3.0 * nf - 2.0));
            return Ok(Some(v));
        }
        let mut ln = std::f64::consts::LN_2 - PI.ln() - ln_gamma(1.5 * nf)
            + (1.5 * nf - 1.0) * r.ln()
            + ln_kv(1.5 * nf - 1.0, 2.0 * r)?;
        if n > 1 {
            ln += (nf - 1.0) * c.ln();
        }
        return Ok(Some(ln.exp()));
    }
    if near(d, 1.0) {
        return match n {
            2 => Ok(Some(c * (-2.0 * r).exp() * (8.0 * r.powi(3) + 6.0 * r + 3.0) / 12.0)),
            3 => Ok(Some(
                c * c * (-2.0 * r).exp()
                    * (2.0 * r * (r * (8.0 * r.powi(3) + 30.0 * r + 45.0) + 45.0) + 45.0)
                    / 240.0,
            )),
            _ => fallback_first(problem, n, r),
        };
    }
    fallback_first(problem, n, r)
}

fn gamma_half_nth_collision(c: f64, d: f64, n: u32, r: f64, problem: &TransportProblem) -> Result<Option<f64>> {
    if near(d, 1.0) {
        return match n {
            2 => {
                if r == 0.0 {
                    return Err(Error::Divergence("gamma k=1/2 rod C(r|2) diverges at r = 0".into()));
                }
                Ok(Some(c * ((-0.5 * r).exp() / 8.0 + kv(0.0, 0.5 * r)? / (4.0 * PI))))
            }
            4 => {
                let tail = if r == 0.0 { 16.0 } else { 8.0 * r * kv(1.0, 0.5 * r)? };
                Ok(Some(c.powi(3) * (PI * (-0.5 * r).exp() * (r + 6.0) + tail) / (64.0 * PI)))
            }
            _ => fallback_first(problem, n, r),
        };
    }
    fallback_first(problem, n, r)
}

fn chi_nth_collision(c: f64, d: f64, k: f64, n: u32, r: f64, problem: &TransportProblem) -> Result<Option<f64>> {
    let nf = n as f64;
    if near(k, d) {
        // For k = d every collision order is Gaussian:
        // C(r|n) = c^{n-1} (pi n / sigma^2)^{-d/2} e^{-sigma^2 r^2 / n}
        let sigma = FreePathModel::chi_sigma(k);
        let s2 = sigma * sigma;
        let v = c.powi(n as i32 - 1) * (s2 / (PI * nf)).powf(0.5 * d) * (-s2 * r * r / nf).exp();
        return Ok(Some(v));
    }
    if near(k, 3.0) && near(d, 1.0) && n == 2 {
        let poly = 16.0 * r.powi(4) - 8.0 * PI * r * r + 3.0 * PI * PI;
        let v = c * (-2.0 * r * r / PI).exp() * poly / (2.0 * std::f64::consts::SQRT_2 * PI.powi(3));
        return Ok(Some(v));
    }
    if near(k, 4.0) && near(d, 2.0) && n == 2 {
        let poly = 81.0 * PI * PI * r.powi(4) + 2048.0;
        let v = 9.0 * c * (-9.0 * PI * r * r / 32.0).exp() * poly / 131072.0;
        return Ok(Some(v));
    }
    fallback_first(problem, n, r)
}

fn pearson_nth_collision(c: f64, d: f64, n: u32, r: f64) -> Result<Option<f64>> {
    if near(d, 2.0) {
        return match n {
            2 => {
                if r == 0.0 {
                    return Err(Error::Divergence(
                        "flatland two-step density diverges at r = 0".into(),
                    ));
                }
                if near(r, 2.0) {
                    return Err(Error::Domain(
                        "flatland two-step density is singular at the support edge r = 2".into(),
                    ));
                }
                if r > 2.0 {
                    return Ok(Some(0.0));
                }
                Ok(Some(c / (PI * PI * r * (4.0 - r * r).sqrt())))
            }
            3 => {
                if near(r, 1.0) {
                    return Err(Error::Domain(
                        "flatland three-step density has a logarithmic singularity at r = 1".into(),
                    ));
                }
                if r >= 3.0 {
                    return Ok(Some(0.0));
                }
                let w = r * r * (9.0 - r * r).powi(2) / (r * r + 3.0).powi(3);
                let f = hyp2f1_log_case(1.0 / 3.0, 2.0 / 3.0, w)?;
                Ok(Some(c * c * 3.0_f64.sqrt() * f / (PI * PI * (r * r + 3.0))))
            }
            _ => Ok(None),
        };
    }
    if near(d, 3.0) {
        return match n {
            2 => {
                if r == 0.0 {
                    return Err(Error::Divergence("3D two-step density diverges at r = 0".into()));
                }
                Ok(Some(c * (sgn(2.0 - r) + 1.0) / (16.0 * PI * r)))
            }
            3 => {
                if r == 0.0 {
                    return Ok(Some(c * c / (8.0 * PI)));
                }
                if r >= 3.0 {
                    return Ok(Some(0.0));
                }
                let num = (r - 3.0).abs() - 3.0 * (r - 1.0).abs() + 2.0 * r;
                Ok(Some(c * c * num / (32.0 * PI * r)))
            }
            4 => {
                if r == 0.0 {
                    return Ok(Some(c.powi(3) / (8.0 * PI)));
                }
                if r >= 4.0 {
                    return Ok(Some(0.0));
                }
                let num = -(r - 4.0) * (r - 4.0).abs() + 4.0 * (r - 2.0) * (r - 2.0).abs()
                    + (8.0 - 3.0 * r) * r;
                Ok(Some(c.powi(3) * num / (128.0 * PI * r)))
            }
            _ => Ok(None),
        };
    }
    Ok(None)
}

/// Total collision density where a closed form (or exact mode sum) is known.
pub fn total_collision_density(problem: &TransportProblem, r: f64) -> Result<Option<f64>> {
    check_radius(r)?;
    let (c, d) = (problem.c, problem.d);
    match canonical(&problem.model.family) {
        Family::Exponential => {
            if near(d, 1.0) {
                return Ok(Some(exp_rod_total(c, r)));
            }
            if near(d, 2.0) {
                return flatland_exp_total(problem, r).map(Some);
            }
            if near(d, 3.0) {
                return davison_total_flux(c, r).map(Some);
            }
            if near(d, 4.0) && near(c, 0.5) {
                return exp4_half_albedo_total(r).map(Some);
            }
            Ok(None)
        }
        Family::Gamma { k } if near(k, 2.0) => {
            if near(d, 3.0) {
                if r == 0.0 {
                    return Err(Error::Divergence("gamma k=2 3D C(r) diverges at r = 0".into()));
                }
                return Ok(Some((-2.0 * (1.0 - c).sqrt() * r).exp() / (PI * r)));
            }
            if near(d, 1.0) {
                return Ok(Some(gamma2_rod_total(c, r)));
            }
            Ok(None)
        }
        Family::BesselK { m } if near(d, m as f64) => {
            // Designed family: the total collision density is exactly one
            // diffusion mode, C(r) = F^{-1}{1/(1+(z nu)^2)} / (1-c) with
            // nu = 1/(mu sqrt(1-c)).
            let mu = FreePathModel::besselk_mu(m);
            let nu = 1.0 / (mu * (1.0 - c).sqrt());
            Ok(Some(diffusion_mode_kernel(d, nu, r)? / (1.0 - c)))
        }
        _ => Ok(None),
    }
}

fn exp_rod_total(c: f64, r: f64) -> f64 {
    (-r * (1.0 - c).sqrt()).exp() / (2.0 * (1.0 - c).sqrt())
}

fn exp4_half_albedo_total(r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::Divergence("4D exponential C(r) diverges at r = 0".into()));
    }
    Ok((-r).exp() * (1.0 + r) / (2.0 * PI * PI * r.powi(3)))
}

/// Exact two-mode total for gamma k = 2 in the rod:
/// C(r) = sum over chi of -(chi^4 - 16) e^{-chi r} / (2 c chi (chi^2 + 12)),
/// chi^2 = 2 (2 + c +- sqrt(c (c + 8))).
fn gamma2_rod_total(c: f64, r: f64) -> f64 {
    let s = (c * (c + 8.0)).sqrt();
    let mut total = 0.0;
    for chi2 in [2.0 * (2.0 + c + s), 2.0 * (2.0 + c - s)] {
        let chi = chi2.sqrt();
        total -= (chi2 * chi2 - 16.0) * (-chi * r).exp() / (2.0 * c * chi * (chi2 + 12.0));
    }
    total
}

// ---------------------------------------------------------------------------
// scalar flux
// ---------------------------------------------------------------------------

/// Flux carried by particles that have scattered exactly n times; n = 0 is
/// the uncollided flux E(r) / Omega_d(r).
pub fn nth_scalar_flux(problem: &TransportProblem, n: u32, r: f64) -> Result<Option<f64>> {
    check_radius(r)?;
    if n == 0 {
        return uncollided_flux(problem, r).map(Some);
    }
    let (c, d) = (problem.c, problem.d);
    match canonical(&problem.model.family) {
        // Exponential paths have Xbar = zetabar, so phi(r|n) = C(r|n+1)
        // identically (c^n zeta^{n+1} both ways).
        Family::Exponential => nth_collision_density(problem, n + 1, r),
        Family::Gamma { k } if near(k, 2.0) && near(d, 2.0) => {
            gamma22_flatland_flux(c, n, r).map(Some)
        }
        Family::Pearson if near(d, 1.0) && (2..=5).contains(&n) => {
            pearson_rod_flux(c, n, r).map(Some)
        }
        _ => Ok(None),
    }
}

fn uncollided_flux(problem: &TransportProblem, r: f64) -> Result<f64> {
    let d = problem.d;
    if let Family::Pearson = problem.model.family {
        if near(r, 1.0) {
            return Err(Error::Domain(
                "uncollided Pearson flux is distributional at the step radius r = 1".into(),
            ));
        }
        if r > 1.0 {
            return Ok(0.0);
        }
        if r == 0.0 {
            if near(d, 1.0) {
                return Ok(0.5);
            }
            return Err(Error::Divergence("uncollided flux diverges at r = 0".into()));
        }
        return Ok(1.0 / omega_d(d, r));
    }
    if r == 0.0 {
        if near(d, 1.0) {
            return Ok(0.5);
        }
        return Err(Error::Divergence("uncollided flux diverges at r = 0".into()));
    }
    let v = problem.model.extinction(r)? / omega_d(d, r);
    if !v.is_finite() {
        return Err(Error::Divergence(format!("uncollided flux diverges at r = {r}")));
    }
    Ok(v)
}

/// Gamma k = 2 flatland n-th flux. The printed Bessel-I bracket with its
/// removable sec(3 pi n / 2) singularity reduces, through
/// I_{v-1} - I_{v+1} = (2v/x) I_v and I_{-v} = I_v + (2/pi) sin(v pi) K_v,
/// to a K-only form regular in n:
/// phi(r|n) = c^n r^{(3n-1)/2} [2 r K_{(3n-3)/2}(2r) + 6 n K_{(3n-1)/2}(2r)]
///            / (2 pi Gamma((3n+3)/2)).
fn gamma22_flatland_flux(c: f64, n: u32, r: f64) -> Result<f64> {
    let nf = n as f64;
    if r == 0.0 {
        let v = c.powi(n as i32) * 3.0 * nf * gamma(1.5 * nf - 0.5)
            / (2.0 * PI * gamma(1.5 * nf + 1.5));
        return Ok(v);
    }
    let ln_pref = nf * c.ln() + (1.5 * nf - 0.5) * r.ln()
        - (2.0 * PI).ln()
        - ln_gamma(1.5 * nf + 1.5);
    let t1 = (ln_pref + (2.0 * r).ln() + ln_kv(1.5 * nf - 1.5, 2.0 * r)?).exp();
    let t2 = (ln_pref + (6.0 * nf).ln() + ln_kv(1.5 * nf - 0.5, 2.0 * r)?).exp();
    Ok(t1 + t2)
}

/// Pearson rod fluxes for n = 2..5, each a staircase in r. Queries exactly
/// at a jump radius are rejected: the density there is distributional.
fn pearson_rod_flux(c: f64, n: u32, r: f64) -> Result<f64> {
    let jumps: &[f64] = match n {
        2 => &[1.0, 3.0],
        3 => &[2.0, 4.0],
        4 => &[1.0, 3.0, 5.0],
        5 => &[2.0, 4.0, 6.0],
        _ => unreachable!("caller restricts n to 2..=5"),
    };
    if jumps.iter().any(|j| near(r, *j)) {
        return Err(Error::Domain(format!(
            "Pearson rod flux phi(r|{n}) is distributional at the jump radius r = {r}"
        )));
    }
    let v = match n {
        2 => c.powi(2) / 16.0 * (sgn(1.0 - r) + sgn(3.0 - r) + 2.0),
        3 => c.powi(3) / 32.0 * (2.0 * sgn(2.0 - r) + sgn(4.0 - r) + 3.0),
        4 => c.powi(4) / 64.0 * (2.0 * sgn(1.0 - r) + 3.0 * sgn(3.0 - r) + sgn(5.0 - r) + 6.0),
        5 => c.powi(5) / 128.0 * (5.0 * sgn(2.0 - r) + 4.0 * sgn(4.0 - r) + sgn(6.0 - r) + 10.0),
        _ => unreachable!(),
    };
    Ok(v)
}

/// Total scalar flux where an exact or benchmark-quality form exists.
pub fn total_scalar_flux(problem: &TransportProblem, r: f64) -> Result<Option<f64>> {
    check_radius(r)?;
    let (c, d) = (problem.c, problem.d);
    match canonical(&problem.model.family) {
        Family::Exponential => {
            if near(d, 1.0) {
                return Ok(Some(exp_rod_total(c, r)));
            }
            if near(d, 2.0) {
                return flatland_exp_total(problem, r).map(Some);
            }
            if near(d, 3.0) {
                return davison_total_flux(c, r).map(Some);
            }
            if near(d, 4.0) && near(c, 0.5) {
                return exp4_half_albedo_total(r).map(Some);
            }
            Ok(None)
        }
        _ => Ok(None),
    }
}

// ---------------------------------------------------------------------------
// flatland exponential total
// ---------------------------------------------------------------------------

/// Flatland exponential total (collision density and scalar flux coincide
/// here): uncollided term plus numerical inversion of the scattered
/// transform. The Liemert series [`liemert_flatland_total`] is the
/// independent benchmark this is cross-checked against.
fn flatland_exp_total(problem: &TransportProblem, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::Divergence("flatland exponential total diverges at r = 0".into()));
    }
    let uncollided = (-r).exp() / (2.0 * PI * r);
    let scattered = inverse_ft(
        &|z| problem.collision_scattered_transform(z).unwrap_or(f64::NAN),
        2.0,
        r,
    )?;
    Ok(uncollided + scattered.value)
}

/// Liemert's series for the flatland exponential total,
/// phi(r) = e^{-r}/(2 pi r) + c K_0(sqrt(1-c^2) r)/(2 pi) + (1/2 pi) sum t_n,
/// t_n = 2^{n+1/2} n! c^{2n} r^{n-1/2} K_{n-1/2}(r) / (sqrt(pi) (2n)!),
/// evaluated by the term-ratio recurrence
/// t_{n+1}/t_n = c^2 r rho_n/(2n+1), rho_n = K_{n+1/2}/K_{n-1/2},
/// rho_1 = 1 + 1/r, rho_{n+1} = (2n+1)/r + 1/rho_n.
pub fn liemert_flatland_total(c: f64, r: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("albedo must lie in (0, 1), got {c}")));
    }
    if r <= 0.0 {
        return Err(Error::Divergence("flatland exponential total diverges at r = 0".into()));
    }
    let uncollided = (-r).exp() / (2.0 * PI * r);
    let chi0 = (1.0 - c * c).sqrt();
    let discrete = c * kv(0.0, chi0 * r)? / (2.0 * PI);
    let c2 = c * c;
    let mut term = c2 * (-r).exp();
    let mut rho = 1.0 + 1.0 / r;
    let mut sum = term;
    let mut converged = false;
    for n in 1..200_000u64 {
        let ratio = c2 * r * rho / (2.0 * n as f64 + 1.0);
        term *= ratio;
        sum += term;
        // Once the ratio has fallen below q < 1 the tail is bounded by the
        // geometric series term * q / (1 - q).
        if ratio < 1.0 && term * ratio / (1.0 - ratio) < 1e-15 * sum.max(uncollided) {
            converged = true;
            break;
        }
        rho = (2.0 * n as f64 + 1.0) / r + 1.0 / rho;
    }
    if !converged {
        return Err(Error::Convergence("flatland exponential series stalled".into()));
    }
    Ok(uncollided + discrete + sum / (2.0 * PI))
}

// ---------------------------------------------------------------------------
// classical 3D benchmark (Case / Davison)
// ---------------------------------------------------------------------------

/// Discrete-mode constants of classical 3D transport: the root nu0 > 1 of
/// 1 = c nu0 artanh(1/nu0), the discrete-mode normalization N0+, and the
/// continuum normalization N_nu over 0 < nu < 1.
#[derive(Clone, Debug)]
pub struct CaseologyConstants {
    pub c: f64,
    pub nu0: f64,
    pub n0_plus: f64,
}

impl CaseologyConstants {
    pub fn for_albedo(c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::Domain(format!("albedo must lie in (0, 1), got {c}")));
        }
        // In chi = 1/nu0 the characteristic equation reads
        // g(chi) = 1 - (c/chi) artanh(chi) = 0 with a single root in (0, 1):
        // g(0+) = 1 - c > 0 and g -> -inf at chi -> 1.
        let g = |chi: f64| 1.0 - c * chi.atanh() / chi;
        let (mut lo, mut hi) = (1e-300_f64, 1.0 - 1e-16);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let chi = 0.5 * (lo + hi);
        let nu0 = 1.0 / chi;
        let residual = (1.0 - c * nu0 * (1.0 / nu0).atanh()).abs();
        if residual > 1e-12 {
            return Err(Error::Convergence(format!(
                "characteristic root failed to converge (residual {residual:.3e})"
            )));
        }
        let n0_plus = 0.5 * c * nu0.powi(3) * (c / (nu0 * nu0 - 1.0) - 1.0 / (nu0 * nu0));
        Ok(CaseologyConstants { c, nu0, n0_plus })
    }

    /// lambda(nu) = 1 - c nu artanh(nu) on the continuum 0 <= nu < 1.
    pub fn lambda(&self, nu: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&nu) {
            return Err(Error::Domain(format!("continuum requires 0 <= nu < 1, got {nu}")));
        }
        Ok(1.0 - self.c * nu * nu.atanh())
    }

    /// N_nu = nu [lambda(nu)^2 + pi^2 c^2 nu^2 / 4].
    pub fn continuum_norm(&self, nu: f64) -> Result<f64> {
        let l = self.lambda(nu)?;
        Ok(nu * (l * l + 0.25 * PI * PI * self.c * self.c * nu * nu))
    }
}

/// Davison's benchmark for the classical 3D point source,
/// phi(r) = (1/4 pi r) [ e^{-r/nu0}/(nu0 N0+)
///          + int_1^inf e^{-r y} / (pi^2 c^2/(4y^2) + (1 - (c/2y) ln((y+1)/(y-1)))^2) dy ].
fn davison_total_flux(c: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::Divergence("classical 3D flux diverges at r = 0".into()));
    }
    let k = CaseologyConstants::for_albedo(c)?;
    let discrete = (-r / k.nu0).exp() / (k.nu0 * k.n0_plus);
    let integrand = |y: f64| {
        let l = 1.0 - 0.5 * c / y * ((y + 1.0) / (y - 1.0)).ln();
        (-r * y).exp() / (0.25 * PI * PI * c * c / (y * y) + l * l)
    };
    let integral = integrate_decaying_tail(&integrand, 1.0, r, 1e-11)?;
    Ok((discrete + integral) / (4.0 * PI * r))
}

/// Integrate f over [a, inf) for integrands decaying like e^{-rate y},
/// by fixed-width panels each handled with tanh-sinh quadrature (the first
/// panel tolerates the integrable endpoint behavior at a).
fn integrate_decaying_tail(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    rate: f64,
    tol: f64,
) -> Result<f64> {
    let width = (4.0 / rate.max(0.05)).min(8.0).max(0.25);
    let mut total = 0.0;
    let mut left = a;
    for _ in 0..10_000 {
        let right = left + width;
        let piece = tanh_sinh_panel(f, left, right, tol)?;
        total += piece;
        if piece.abs() < tol * total.abs().max(1e-300) && left > a {
            return Ok(total);
        }
        left = right;
    }
    Err(Error::Convergence("semi-infinite quadrature did not settle".into()))
}

/// Tanh-sinh quadrature on [a, b]: x = mid + half tanh((pi/2) sinh t),
/// doubling the node density until two refinements agree to tol.
fn tanh_sinh_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let x = mid + half * u.tanh();
        if x <= a || x >= b {
            return 0.0;
        }
        let w = 0.5 * PI * t.cosh() / u.cosh().powi(2);
        half * w * f(x)
    };
    let t_max = 4.0;
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1.0;
    while k * h <= t_max {
        sum += eval(k * h) + eval(-k * h);
        k += 1.0;
    }
    let mut value = h * sum;
    for _ in 0..12 {
        h *= 0.5;
        // Add the odd multiples of the new h.
        let mut t = h;
        let mut extra = 0.0;
        while t <= t_max {
            extra += eval(t) + eval(-t);
            t += 2.0 * h;
        }
        sum += extra;
        let refined = h * sum;
        if (refined - value).abs() <= tol * refined.abs().max(1e-300) {
            return Ok(refined);
        }
        value = refined;
    }
    Err(Error::Convergence("tanh-sinh panel did not converge".into()))
}

// ---------------------------------------------------------------------------
// spatial moments
// ---------------------------------------------------------------------------

/// Closed-form spatial moment int_0^inf Omega_d(r) r^m f(r) dr for the
/// distribution selected by the key. Returns None where the catalogue has
/// no printed row.
pub fn exact_moment(key: &SolutionKey) -> Result<Option<f64>> {
    match key.quantity {
        Quantity::MomentCollision { m, n } => collision_moment(&key.problem, m, n),
        Quantity::MomentFlux { m, n } => flux_moment(&key.problem, m, n),
        _ => Err(Error::Domain("exact_moment requires a moment quantity".into())),
    }
}

fn check_even(m: u32) -> Result<()> {
    if m % 2 == 1 {
        return Err(Error::Domain(format!(
            "odd spatial moments vanish by symmetry; m must be even, got {m}"
        )));
    }
    Ok(())
}

fn collision_moment(problem: &TransportProblem, m: u32, n: Option<u32>) -> Result<Option<f64>> {
    check_even(m)?;
    if n == Some(0) {
        return Err(Error::Domain("collision orders start at n = 1".into()));
    }
    let (c, d) = (problem.c, problem.d);
    let mf = m as f64;
    match canonical(&problem.model.family) {
        Family::Exponential => {
            if near(d, 1.0) {
                let v = match n {
                    Some(n) => {
                        let nf = n as f64;
                        2.0_f64.powi(m as i32) * c.powi(n as i32 - 1)
                            * gamma(0.5 * (mf + 1.0)) * gamma(0.5 * mf + nf)
                            / (SQRT_PI * gamma(nf))
                    }
                    None => gamma(mf + 1.0) * (1.0 - c).powf(-0.5 * mf - 1.0),
                };
                return Ok(Some(v));
            }
            if near(d, 2.0) {
                let v = match n {
                    Some(n) => {
                        let nf = n as f64;
                        2.0_f64.powi(m as i32) * c.powi(n as i32 - 1)
                            * gamma(0.5 * mf + 1.0) * gamma(0.5 * (mf + nf))
                            / gamma(0.5 * nf)
                    }
                    None => {
                        let f = hyp_pfq(
                            &[-0.5, -0.5 * mf],
                            &[0.5],
                            c * c,
                            &AccuracyPolicy::default(),
                        )?;
                        (1.0 - c * c).powf(-0.5 * mf - 1.0)
                            * (gamma(mf + 1.0) * f
                                + c * 2.0_f64.powi(m as i32) * gamma(0.5 * mf + 1.0).powi(2))
                    }
                };
                return Ok(Some(v));
            }
            let v = match (m, n) {
                (0, Some(n)) => c.powi(n as i32 - 1),
                (0, None) => 1.0 / (1.0 - c),
                (2, Some(n)) => 2.0 * n as f64 * c.powi(n as i32 - 1),
                (2, None) => 2.0 / (1.0 - c).powi(2),
                (4, Some(n)) => {
                    let nf = n as f64;
                    4.0 * nf * c.powi(n as i32 - 1) * ((d + 2.0) * nf + 5.0 * d - 2.0) / d
                }
                (4, None) => 8.0 * (3.0 * d - 2.0 * c * (d - 1.0)) / (d * (1.0 - c).powi(3)),
                (6, Some(n)) => {
                    let nf = n as f64;
                    8.0 * nf * c.powi(n as i32 - 1)
                        * (d * d * (nf * (nf + 15.0) + 74.0)
                            + 6.0 * d * (nf - 1.0) * (nf + 10.0)
                            + 8.0 * (nf - 2.0) * (nf - 1.0))
                        / (d * d)
                }
                (6, None) => {
                    48.0 * (2.0 * c * c * (d - 1.0) * (5.0 * d - 4.0) - 24.0 * c * (d - 1.0) * d
                        + 15.0 * d * d)
                        / (d * d * (1.0 - c).powi(4))
                }
                _ => return Ok(None),
            };
            Ok(Some(v))
        }
        Family::Gamma { k } => {
            let v = match (m, n) {
                (0, Some(n)) => c.powi(n as i32 - 1),
                (0, None) => 1.0 / (1.0 - c),
                (2, Some(n)) => (k + 1.0) * n as f64 * c.powi(n as i32 - 1) / k,
                (2, None) => (k + 1.0) / ((1.0 - c).powi(2) * k),
                (4, Some(n)) => {
                    let nf = n as f64;
                    (k + 1.0) * nf * c.powi(n as i32 - 1)
                        * (d * (k * (k * nf + nf + 4.0) + 6.0) + 2.0 * k * (k + 1.0) * (nf - 1.0))
                        / (d * k.powi(3))
                }
                (4, None) => {
                    (k + 1.0)
                        * (d * (c * ((k - 3.0) * k - 6.0) + (k + 2.0) * (k + 3.0))
                            + 4.0 * c * k * (k + 1.0))
                        / ((1.0 - c).powi(3) * d * k.powi(3))
                }
                _ => return Ok(None),
            };
            Ok(Some(v))
        }
        Family::Chi { k } => {
            if near(k, 1.0) && near(d, 1.0) {
                // Half-normal rod: every even order is printed.
                let v = match n {
                    Some(n) => {
                        PI.powf(0.5 * (mf - 1.0)) * c.powi(n as i32 - 1)
                            * (n as f64).powf(0.5 * mf) * gamma(0.5 * (mf + 1.0))
                    }
                    None => {
                        PI.powf(0.5 * (mf - 1.0)) * gamma(0.5 * (mf + 1.0))
                            * polylog_neg(m / 2, c) / c
                    }
                };
                return Ok(Some(v));
            }
            let g = gamma(0.5 * k).powi(2) / gamma(0.5 * (k + 1.0)).powi(2);
            let v = match (m, n) {
                (0, Some(n)) => c.powi(n as i32 - 1),
                (0, None) => 1.0 / (1.0 - c),
                (2, Some(n)) => 0.5 * k * n as f64 * c.powi(n as i32 - 1) * g,
                (2, None) => 0.5 * k * g / (1.0 - c).powi(2),
                (4, Some(n)) => {
                    let nf = n as f64;
                    k * nf * c.powi(n as i32 - 1) * g * g
                        * (d * (k * nf + 2.0) + 2.0 * k * (nf - 1.0))
                        / (4.0 * d)
                }
                (4, None) => {
                    k * g * g * (d * (c * (k - 2.0) + k + 2.0) + 4.0 * c * k)
                        / (4.0 * (1.0 - c).powi(3) * d)
                }
                _ => return Ok(None),
            };
            Ok(Some(v))
        }
        Family::Pearson => {
            let v = match (m, n) {
                (0, Some(n)) => c.powi(n as i32 - 1),
                (0, None) => 1.0 / (1.0 - c),
                (2, Some(n)) => n as f64 * c.powi(n as i32 - 1),
                (2, None) => 1.0 / (1.0 - c).powi(2),
                (4, Some(n)) => {
                    let nf = n as f64;
                    nf * c.powi(n as i32 - 1) * ((d + 2.0) * nf - 2.0) / d
                }
                (4, None) => (c * (d + 4.0) + d) / ((1.0 - c).powi(3) * d),
                (6, Some(n)) => {
                    let nf = n as f64;
                    nf * c.powi(n as i32 - 1)
                        * ((d + 4.0) * nf * ((d + 2.0) * nf - 6.0) + 16.0)
                        / (d * d)
                }
                (6, None) => {
                    (c * c * (d * (d + 12.0) + 48.0) + 4.0 * c * d * (d + 6.0) + d * d)
                        / ((1.0 - c).powi(4) * d * d)
                }
                _ => return Ok(None),
            };
            Ok(Some(v))
        }
        // Only the universal first two even moments hold for the remaining
        // families ("the first two even moments are dimension independent").
        _ => {
            let s2 = problem.model.mean_square()?;
            let v = match (m, n) {
                (0, Some(n)) => c.powi(n as i32 - 1),
                (0, None) => 1.0 / (1.0 - c),
                (2, Some(n)) => n as f64 * s2 * c.powi(n as i32 - 1),
                (2, None) => s2 / (1.0 - c).powi(2),
                _ => return Ok(None),
            };
            Ok(Some(v))
        }
    }
}

fn flux_moment(problem: &TransportProblem, m: u32, n: Option<u32>) -> Result<Option<f64>> {
    check_even(m)?;
    let (c, d) = (problem.c, problem.d);
    match canonical(&problem.model.family) {
        // phi(r|n) = C(r|n+1) and phi(r) = C(r) for exponential paths, so
        // the flux moments are the collision rows shifted by one order.
        Family::Exponential => collision_moment(problem, m, n.map(|n| n + 1)),
        Family::Gamma { k } => {
            let v = match (m, n) {
                (0, Some(n)) => c.powi(n as i32),
                (0, None) => 1.0 / (1.0 - c),
                (2, Some(n)) => {
                    let nf = n as f64;
                    (k + 1.0) * c.powi(n as i32) * (3.0 * k * nf + k + 2.0) / (3.0 * k * k)
                }
                (2, None) => {
                    (k + 1.0) * (2.0 * c * (k - 1.0) + k + 2.0)
                        / (3.0 * (1.0 - c).powi(2) * k * k)
                }
                _ => return Ok(None),
            };
            Ok(Some(v))
        }
        Family::Chi { k } => {
            let g = gamma(0.5 * k).powi(2) / gamma(0.5 * (k + 1.0)).powi(2);
            let v = match (m, n) {
                (0, Some(n)) => c.powi(n as i32),
                (0, None) => 1.0 / (1.0 - c),
                (2, Some(n)) => {
                    let nf = n as f64;
                    c.powi(n as i32) * (3.0 * k * nf + k + 1.0) * g / 6.0
                }
                (2, None) => (c * (2.0 * k - 1.0) + k + 1.0) * g / (6.0 * (1.0 - c).powi(2)),
                (4, Some(n)) => {
                    let nf = n as f64;
                    c.powi(n as i32) * g * g
                        * (15.0 * (d + 2.0) * k * k * nf * nf
                            + 10.0 * k * nf * (d * (k + 4.0) - k + 2.0)
                            + 3.0 * d * (k + 1.0) * (k + 3.0))
                        / (60.0 * d)
                }
                _ => return Ok(None),
            };
            Ok(Some(v))
        }
        Family::Pearson => {
            let v = match (m, n) {
                (0, Some(n)) => c.powi(n as i32),
                (0, None) => 1.0 / (1.0 - c),
                (2, Some(n)) => (3.0 * n as f64 + 1.0) * c.powi(n as i32) / 3.0,
                (2, None) => (2.0 * c + 1.0) / (3.0 * (1.0 - c).powi(2)),
                (4, Some(n)) => {
                    let nf = n as f64;
                    c.powi(n as i32)
                        * (15.0 * (d + 2.0) * nf * nf + 10.0 * (d - 1.0) * nf + 3.0 * d)
                        / (15.0 * d)
                }
                _ => return Ok(None),
            };
            Ok(Some(v))
        }
        // Universal rows; the m = 2 entries need the mean square extinction,
        // which is a hard domain constraint (beta-prime requires k > 3).
        _ => {
            let v = match (m, n) {
                (0, Some(n)) => c.powi(n as i32),
                (0, None) => 1.0 / (1.0 - c),
                (2, Some(n)) => {
                    let s2 = problem.model.mean_square()?;
                    let x2 = problem.model.mean_square_extinction()?;
                    c.powi(n as i32) * (x2 + n as f64 * s2)
                }
                (2, None) => {
                    let s2 = problem.model.mean_square()?;
                    let x2 = problem.model.mean_square_extinction()?;
                    x2 / (1.0 - c) + c * s2 / (1.0 - c).powi(2)
                }
                _ => return Ok(None),
            };
            Ok(Some(v))
        }
    }
}

/// Li_{-j}(x) for j >= 0 via the Eulerian-number closed form,
/// Li_{-j}(x) = sum_k A(j, k) x^{j-k} / (1-x)^{j+1}, Li_0(x) = x/(1-x).
fn polylog_neg(j: u32, x: f64) -> f64 {
    if j == 0 {
        return x / (1.0 - x);
    }
    let j = j as usize;
    let mut row = vec![1.0_f64];
    for n in 2..=j {
        let mut next = vec![0.0; n];
        for k in 0..n {
            let a = if k < n - 1 { (k as f64 + 1.0) * row[k] } else { 0.0 };
            let b = if k > 0 { (n - k) as f64 * row[k - 1] } else { 0.0 };
            next[k] = a + b;
        }
        row = next;
    }
    let mut sum = 0.0;
    for (k, a) in row.iter().enumerate() {
        sum += a * x.powi((j - k) as i32);
    }
    sum / (1.0 - x).powi(j as i32 + 1)
}

// ---------------------------------------------------------------------------
// hypergeometric support for the flatland three-step density
// ---------------------------------------------------------------------------

/// 2F1(a, b; a+b; w) on [0, 1). The plain Gauss series is hopeless near the
/// logarithmic point w = 1, so past w = 0.9 we switch to the standard
/// connection formula in powers of (1 - w).
fn hyp2f1_log_case(a: f64, b: f64, w: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&w) {
        return Err(Error::Domain(format!("argument must lie in [0, 1), got {w}")));
    }
    if w <= 0.9 {
        return hyp_pfq(&[a, b], &[a + b], w, &AccuracyPolicy::default());
    }
    let one_minus = 1.0 - w;
    let ln1m = one_minus.ln();
    let pref = gamma(a + b) / (gamma(a) * gamma(b));
    let mut poch_a = 1.0;
    let mut poch_b = 1.0;
    let mut fact = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for kk in 0..200 {
        let kf = kk as f64;
        let coeff = poch_a * poch_b / (fact * fact) * pow;
        let term = coeff * (2.0 * digamma(kf + 1.0) - digamma(a + kf) - digamma(b + kf) - ln1m);
        sum += term;
        if kk > 2 && term.abs() < 1e-16 * sum.abs() {
            return Ok(pref * sum);
        }
        poch_a *= a + kf;
        poch_b *= b + kf;
        fact *= kf + 1.0;
        pow *= one_minus;
    }
    Err(Error::Convergence("log-case 2F1 series stalled".into()))
}

fn digamma(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    // recurrence up to 20 so the truncated asymptotic tail stays below 1e-15
    while x < 20.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + x.ln() - 0.5 * inv
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)))
}
