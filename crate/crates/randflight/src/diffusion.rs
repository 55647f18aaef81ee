//! Diffusion approximations for the point-source collision density and
//! scalar flux: classical P1, Grosjean's modified (separated-uncollided)
//! form, and the rigorous asymptotic built from the discrete spectrum of the
//! transport operator.
//!
//! All three share one shape: an optional uncollided term plus a sum of
//! diffusion modes `w * k_d(r; nu)`, where `k_d` is the d-dimensional
//! inverse transform of `1 / (1 + (z nu)^2)`. They differ only in how the
//! diffusion lengths nu and weights w are chosen:
//!
//! - P1 matches the 0th and 2nd spatial moments of the full quantity with a
//!   single mode.
//! - Grosjean keeps the uncollided part exact and moment-matches only the
//!   collided remainder, which is markedly more accurate at high absorption.
//! - The rigorous version places one mode at every pole `z = i chi` of the
//!   transformed quantity on (the continuation of) the imaginary axis, with
//!   the exact residue as weight. It is the true r -> infinity asymptotic
//!   whenever the spectrum is non-empty, and `is_breakdown` reports when it
//!   is not (heavy-tailed free paths, or absorption past the point where the
//!   pole retreats from the physical sheet).

use crate::freepath::{Family, TransportProblem};
use crate::transform::{diffusion_mode_kernel, omega_d};
use crate::{Error, Result};

/// Default eigenvalue search window for [`rigorous_approximation`]: diffusion
/// lengths up to this value are representable, i.e. chi down to its inverse.
pub const DEFAULT_SEARCH_NU_MAX: f64 = 1e8;

/// Hard upper cap on chi during root scans, for families whose transform
/// continues along the whole imaginary axis.
const CHI_CAP: f64 = 50.0;

/// Points in the geometric scan grid per branch.
const SCAN_POINTS: usize = 1600;

/// Characteristic-equation residual every reported eigenvalue must meet.
const RESIDUAL_TOL: f64 = 1e-12;

/// Which radial profile is being approximated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffusionQuantity {
    /// Collision-rate density C(r).
    Collision,
    /// Scalar flux phi(r).
    Flux,
}

/// The approximation family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    P1,
    Grosjean,
    Rigorous,
}

/// Which continuation of zetabar_d(i chi) a spectral root was found on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Principal,
    /// Second sheet or beyond-pole continuation, where the family has one.
    Second,
}

/// A single diffusion mode: weight times the mode kernel at length nu.
#[derive(Clone, Copy, Debug)]
pub struct Mode {
    pub nu: f64,
    pub weight: f64,
}

/// Diagnostics for one root of the characteristic equation
/// `1 = c zetabar_d(i chi)`.
#[derive(Clone, Debug)]
pub struct RootReport {
    pub chi: f64,
    pub nu: f64,
    /// `|1 - c zetabar_d(i chi)|` at the reported root.
    pub residual: f64,
    /// Scan bracket the bisection started from (degenerate for endpoint roots).
    pub bracket: (f64, f64),
    pub iterations: u32,
    pub branch: Branch,
}

/// The discrete spectrum of the transport operator for one problem:
/// eigenvalues expressed as diffusion lengths nu = 1/chi, largest first.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigen_lengths: Vec<f64>,
    pub search_report: Vec<RootReport>,
}

impl Spectrum {
    pub fn is_empty(&self) -> bool {
        self.eigen_lengths.is_empty()
    }
}

/// A concrete diffusion approximation, ready to evaluate pointwise.
#[derive(Clone, Debug)]
pub struct DiffusionApproximation {
    pub problem: TransportProblem,
    pub quantity: DiffusionQuantity,
    pub flavor: Flavor,
    /// When set, `evaluate` adds the exact uncollided term before the modes.
    pub include_uncollided: bool,
    pub modes: Vec<Mode>,
    /// Human-readable caveats attached during construction.
    pub notes: Vec<String>,
}

impl DiffusionApproximation {
    /// The approximated profile at radius r > 0.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        let d = self.problem.d;
        let mut total = 0.0;
        if self.include_uncollided {
            let omega = omega_d(d, r);
            total += match self.quantity {
                DiffusionQuantity::Collision => self.problem.model.pdf(r)? / omega,
                DiffusionQuantity::Flux => self.problem.model.extinction(r)? / omega,
            };
        }
        for mode in &self.modes {
            if mode.weight != 0.0 {
                total += mode.weight * diffusion_mode_kernel(d, mode.nu, r)?;
            }
        }
        Ok(total)
    }

    /// True when a rigorous approximation found no discrete eigenvalue, so
    /// there is no exponential large-r asymptotic of this form.
    pub fn is_breakdown(&self) -> bool {
        self.flavor == Flavor::Rigorous && self.modes.is_empty()
    }
}

/// Second moment of the free path, <s^2>.
fn path_second_moment(problem: &TransportProblem) -> Result<f64> {
    problem.model.raw_moment(2)
}

/// Second moment of the extinction profile, <s^3>/3; this is what replaces
/// <s^2> when the target is the scalar flux rather than the collision rate.
fn extinction_second_moment(problem: &TransportProblem) -> Result<f64> {
    problem.model.mean_square_extinction()
}

/// Classical P1 (single-mode, moments 0 and 2 of the full quantity).
pub fn p1_approximation(
    problem: &TransportProblem,
    quantity: DiffusionQuantity,
) -> Result<DiffusionApproximation> {
    let (d, c) = (problem.d, problem.c);
    let s2 = path_second_moment(problem)?;
    let nu_sq = match quantity {
        DiffusionQuantity::Collision => s2 / (2.0 * d * (1.0 - c)),
        DiffusionQuantity::Flux => {
            let x2 = extinction_second_moment(problem)?;
            (x2 * (1.0 - c) + c * s2) / (2.0 * d * (1.0 - c))
        }
    };
    let mut notes = Vec::new();
    if let Family::Gamma { k } = problem.model.family {
        if quantity == DiffusionQuantity::Collision {
            notes.push(format!(
                "gamma collision P1 length uses (k+1)/(2dk(1-c)) with k = {k}; \
                 the (k+2) variant sometimes quoted fails the small-z moment match"
            ));
        }
    }
    Ok(DiffusionApproximation {
        problem: problem.clone(),
        quantity,
        flavor: Flavor::P1,
        include_uncollided: false,
        modes: vec![Mode {
            nu: nu_sq.sqrt(),
            weight: 1.0 / (1.0 - c),
        }],
        notes,
    })
}

/// Grosjean's modified diffusion: exact uncollided term plus one mode that
/// moment-matches the collided remainder.
pub fn grosjean_approximation(
    problem: &TransportProblem,
    quantity: DiffusionQuantity,
) -> Result<DiffusionApproximation> {
    let (d, c) = (problem.d, problem.c);
    let s2 = path_second_moment(problem)?;
    let nu_sq = match quantity {
        DiffusionQuantity::Collision => s2 * (2.0 - c) / (2.0 * d * (1.0 - c)),
        DiffusionQuantity::Flux => {
            let x2 = extinction_second_moment(problem)?;
            (x2 * (1.0 - c) + s2) / (2.0 * d * (1.0 - c))
        }
    };
    Ok(DiffusionApproximation {
        problem: problem.clone(),
        quantity,
        flavor: Flavor::Grosjean,
        include_uncollided: true,
        modes: vec![Mode {
            nu: nu_sq.sqrt(),
            weight: c / (1.0 - c),
        }],
        notes: Vec::new(),
    })
}

/// zetabar_d(i chi) on the requested branch. Errors are mapped to None so
/// scan grids can skip unevaluable points.
fn branch_value(problem: &TransportProblem, branch: Branch, chi: f64) -> Option<f64> {
    let res = match branch {
        Branch::Principal => problem.model.propagator_imag(problem.d, chi),
        Branch::Second => problem.model.propagator_imag_sheet2(problem.d, chi)?,
    };
    res.ok().filter(|v| v.is_finite())
}

/// Same, but as a hard Result for residue work at an already-located root.
fn branch_value_strict(problem: &TransportProblem, branch: Branch, chi: f64) -> Result<f64> {
    match branch {
        Branch::Principal => problem.model.propagator_imag(problem.d, chi),
        Branch::Second => problem
            .model
            .propagator_imag_sheet2(problem.d, chi)
            .ok_or_else(|| {
                Error::Unsupported(format!(
                    "{} has no catalogued second branch in d = {}",
                    problem.model.name(),
                    problem.d
                ))
            })?,
    }
}

/// Scan one branch of g(chi) = 1 - c zetabar_d(i chi) on a geometric grid and
/// bisect every sign change down to machine precision.
fn scan_branch(
    problem: &TransportProblem,
    branch: Branch,
    lo: f64,
    hi: f64,
    out: &mut Vec<RootReport>,
) {
    if !(hi > lo) || lo <= 0.0 {
        return;
    }
    let c = problem.c;
    let g = |chi: f64| branch_value(problem, branch, chi).map(|z| 1.0 - c * z);
    let ratio = (hi / lo).powf(1.0 / (SCAN_POINTS as f64 - 1.0));
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..SCAN_POINTS {
        let chi = if i + 1 == SCAN_POINTS {
            hi
        } else {
            lo * ratio.powi(i as i32)
        };
        let Some(gi) = g(chi) else {
            prev = None;
            continue;
        };
        if gi == 0.0 {
            out.push(RootReport {
                chi,
                nu: 1.0 / chi,
                residual: 0.0,
                bracket: (chi, chi),
                iterations: 0,
                branch,
            });
            prev = None;
            continue;
        }
        if let Some((a, ga)) = prev {
            if ga.signum() != gi.signum() {
                if let Some(root) = bisect(&g, a, chi, branch) {
                    out.push(root);
                }
            }
        }
        prev = Some((chi, gi));
    }
}

fn bisect(
    g: &dyn Fn(f64) -> Option<f64>,
    mut a: f64,
    mut b: f64,
    branch: Branch,
) -> Option<RootReport> {
    let bracket = (a, b);
    let mut ga = g(a)?;
    let mut gb = g(b)?;
    let mut iterations = 0;
    for _ in 0..120 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        iterations += 1;
        match g(mid) {
            Some(gm) if gm == 0.0 => {
                a = mid;
                b = mid;
                ga = 0.0;
                gb = 0.0;
                break;
            }
            Some(gm) if gm.signum() == ga.signum() => {
                a = mid;
                ga = gm;
            }
            Some(gm) => {
                b = mid;
                gb = gm;
            }
            // an unevaluable midpoint: shrink towards the evaluable side
            None => b = 0.5 * (mid + b),
        }
    }
    // secant polish from the final bracket, keeping the best residual seen
    let mut chi = 0.5 * (a + b);
    let mut residual = g(chi).map(f64::abs)?;
    if gb != ga {
        let x = b - gb * (b - a) / (gb - ga);
        if x > bracket.0 && x < bracket.1 {
            if let Some(gx) = g(x) {
                iterations += 1;
                if gx.abs() < residual {
                    chi = x;
                    residual = gx.abs();
                }
            }
        }
    }
    Some(RootReport {
        chi,
        nu: 1.0 / chi,
        residual,
        bracket,
        iterations,
        branch,
    })
}

/// Locate every root of `1 = c zetabar_d(i chi)` with chi in
/// `[1/search_limit, min(0.999 * abscissa, 50)]`, on the principal branch and
/// on any catalogued second branch, plus an explicit check for a root sitting
/// exactly at the continuation endpoint. `search_limit` is the largest
/// diffusion length the scan can resolve.
pub fn discrete_spectrum(problem: &TransportProblem, search_limit: f64) -> Result<Spectrum> {
    if !(search_limit > 0.0) {
        return Err(Error::Domain(format!(
            "search_limit must be positive, got {search_limit}"
        )));
    }
    let chi_min = 1.0 / search_limit;
    let absc = problem.model.imag_abscissa();
    let mut roots: Vec<RootReport> = Vec::new();

    if absc > 0.0 {
        let hi = (0.999 * absc).min(CHI_CAP);
        scan_branch(problem, Branch::Principal, chi_min, hi, &mut roots);

        // The characteristic equation can close exactly at the abscissa
        // (e.g. the exponential family in d = 4 at c = 1/2).
        if absc.is_finite() && absc <= CHI_CAP {
            if let Ok(z) = problem.model.propagator_imag(problem.d, absc) {
                let g_end = 1.0 - problem.c * z;
                if g_end.abs() < RESIDUAL_TOL {
                    roots.push(RootReport {
                        chi: absc,
                        nu: 1.0 / absc,
                        residual: g_end.abs(),
                        bracket: (absc, absc),
                        iterations: 0,
                        branch: Branch::Principal,
                    });
                }
            }
        }
    }

    if let Some((blo, bhi)) = problem.model.second_branch_domain(problem.d) {
        let lo = if blo == 0.0 {
            chi_min
        } else {
            blo * (1.0 + 1e-9) + 1e-12
        };
        let hi = (bhi * (1.0 - 1e-9)).min(CHI_CAP);
        scan_branch(problem, Branch::Second, lo, hi, &mut roots);
    }

    roots.sort_by(|x, y| x.chi.total_cmp(&y.chi));
    roots.dedup_by(|x, y| (x.chi - y.chi).abs() < 1e-8 * (1.0 + y.chi));
    let eigen_lengths = roots.iter().map(|r| r.nu).collect();
    Ok(Spectrum {
        eigen_lengths,
        search_report: roots,
    })
}

/// d zetabar / d chi on a branch, by Richardson-extrapolated central
/// differences with the step kept inside the branch domain.
fn branch_derivative(
    problem: &TransportProblem,
    branch: Branch,
    chi: f64,
    domain: (f64, f64),
) -> Result<f64> {
    let room = (domain.1 - chi).min(chi - domain.0);
    if !(room > 0.0) {
        return Err(Error::Numeric(format!(
            "no differencing room around chi = {chi}"
        )));
    }
    let mut h = (1e-3 * chi.max(0.1)).min(0.2 * room);
    let mut last: Option<f64> = None;
    for _ in 0..4 {
        let central = |step: f64| -> Result<f64> {
            let plus = branch_value_strict(problem, branch, chi + step)?;
            let minus = branch_value_strict(problem, branch, chi - step)?;
            Ok((plus - minus) / (2.0 * step))
        };
        let d1 = central(h)?;
        let d2 = central(0.5 * h)?;
        let d3 = central(0.25 * h)?;
        let r1 = (4.0 * d2 - d1) / 3.0;
        let r2 = (4.0 * d3 - d2) / 3.0;
        let value = (16.0 * r2 - r1) / 15.0;
        if (value - r2).abs() <= 1e-9 * value.abs().max(1e-300) {
            return Ok(value);
        }
        last = Some(value);
        h *= 0.25;
    }
    last.ok_or_else(|| Error::Numeric("derivative estimate did not stabilize".into()))
}

/// The rigorous asymptotic diffusion approximation: one mode per discrete
/// eigenvalue, weighted by the exact residue of the transformed quantity at
/// its pole,
///
///   w = 2 N(i chi) / (c chi zetabar'(chi)),
///
/// with N = zetabar for the collision rate (so N = 1/c at a root) and
/// N = Xbar for the flux. An empty spectrum yields a mode-less result with
/// `is_breakdown() == true` rather than an error; a root at the continuation
/// endpoint carries vanishing weight.
pub fn rigorous_approximation(
    problem: &TransportProblem,
    quantity: DiffusionQuantity,
) -> Result<DiffusionApproximation> {
    let spectrum = discrete_spectrum(problem, DEFAULT_SEARCH_NU_MAX)?;
    let (d, c) = (problem.d, problem.c);
    let absc = problem.model.imag_abscissa();
    let mut modes = Vec::new();
    let mut notes = Vec::new();

    for report in &spectrum.search_report {
        let chi = report.chi;
        if report.branch == Branch::Principal && (chi - absc).abs() < 1e-9 * absc.max(1.0) {
            // zetabar' blows up at the abscissa, so the residue vanishes
            modes.push(Mode {
                nu: report.nu,
                weight: 0.0,
            });
            notes.push(format!(
                "eigenvalue at the continuation endpoint chi = {chi} carries \
                 vanishing residue weight"
            ));
            continue;
        }
        let numerator = match quantity {
            DiffusionQuantity::Collision => branch_value_strict(problem, report.branch, chi)?,
            DiffusionQuantity::Flux => match report.branch {
                Branch::Principal => problem.model.stretched_propagator_imag(d, chi)?,
                // Xbar = zetabar only for the exponential family, where path
                // and extinction profiles coincide.
                Branch::Second => {
                    if problem.model.family == Family::Exponential {
                        branch_value_strict(problem, report.branch, chi)?
                    } else {
                        return Err(Error::Unsupported(format!(
                            "flux residue on the second branch is only available \
                             for the exponential family, not {}",
                            problem.model.name()
                        )));
                    }
                }
            },
        };
        let domain = match report.branch {
            Branch::Principal => (0.0, absc),
            Branch::Second => problem.model.second_branch_domain(d).unwrap_or((0.0, absc)),
        };
        let deriv = branch_derivative(problem, report.branch, chi, domain)?;
        modes.push(Mode {
            nu: report.nu,
            weight: 2.0 * numerator / (c * chi * deriv),
        });
    }

    if modes.is_empty() {
        notes.push(
            "no discrete eigenvalue in the search window: the transformed quantity \
             has no pole on the physical sheet and the exponential large-r \
             asymptotic breaks down"
                .into(),
        );
    }

    // largest diffusion length (smallest chi) first, to match eigen_lengths
    modes.sort_by(|x, y| y.nu.total_cmp(&x.nu));
    Ok(DiffusionApproximation {
        problem: problem.clone(),
        quantity,
        flavor: Flavor::Rigorous,
        include_uncollided: false,
        modes,
        notes,
    })
}
