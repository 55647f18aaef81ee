//! Steady-state monoenergetic transport about an isotropic point source in an
//! infinite d-dimensional medium, for general (non-exponential) free-path
//! distributions.
//!
//! The crate is organized bottom-up:
//!
//! - [`specfun`]: self-contained real-argument special functions (gamma,
//!   incomplete gamma, Bessel J/I/K, Ei, Si, generalized hypergeometric
//!   series).
//! - [`transform`]: radially symmetric Fourier (Hankel-type) transforms in
//!   d dimensions, numerical inversion, the diffusion-mode kernel, and
//!   even-moment extraction from transform derivatives at the origin.
//! - [`freepath`]: the free-path distribution families (exponential, gamma,
//!   chi, beta-prime, Pearson delta, and the Bessel-K "designed" family),
//!   their extinction functions, samplers, and transformed propagators.
//! - [`analytic`]: the catalogue of closed-form collision densities, scalar
//!   fluxes, and moment formulas, plus the Case/Davison benchmark for
//!   classical 3D transport.
//! - [`diffusion`]: P1, Grosjean, and rigorous-asymptotic (discrete spectrum
//!   + residue weight) diffusion approximations for collision density and
//!   scalar flux.
//! - [`montecarlo`]: a survival-weighted random-flight Monte Carlo oracle
//!   with shell tallies, track-length flux estimation, and spatial moments.
//! - [`cli`]: the command-line surface tying it all together.

pub mod analytic;
pub mod cli;
pub mod diffusion;
pub mod freepath;
pub mod montecarlo;
pub mod specfun;
pub mod transform;

pub use freepath::{Family, FreePathModel, TransportProblem};
pub use specfun::AccuracyPolicy;

/// Crate-wide error type. Variants mirror the failure classes of the
/// numerical layers: domain violations, series/quadrature non-convergence,
/// genuine divergences, and invalid state.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("unsupported query: {0}")]
    Unsupported(String),
    #[error("invalid state: {0}")]
    State(String),
}

pub type Result<T> = std::result::Result<T, Error>;
