//! Quantum Fisher information (QFI) for estimating the conical-deficit
//! parameter `nu` of a cosmic-string spacetime with a static two-level
//! detector coupled to electromagnetic vacuum fluctuations.
//!
//! A straight cosmic string turns the transverse plane into a cone: the
//! azimuthal angle runs over `2*pi/nu` with `nu = 1/(1 - 4*G*mu) >= 1`, where
//! `mu` is the string's mass per unit length. A detector held at distance `r`
//! from the string sees modified vacuum fluctuations, and its spontaneous
//! emission rate picks up a polarization-dependent factor `f_i(r_tilde, nu)`
//! (`i` in {radial, tangential, parallel}) relative to flat space. Everything
//! measurable about `nu` flows through these response functions, so the best
//! achievable estimation precision is governed by the QFI of the detector's
//! state after an evolution time `tau`.
//!
//! # Units and conventions
//!
//! All quantities are dimensionless:
//!
//! - distance `r_tilde = omega0 * r / c` (reduced transition wavelengths),
//! - time `tau_tilde = gamma0 * tau` (inverse free-space decay rates),
//! - all rates are in units of the free-space decay rate `gamma0`.
//!
//! Rate convention: the total decay rate is `gamma_total = f` in units of
//! `gamma0`. Transverse Bloch components decay as `exp(-f*tau_tilde/2)`, the
//! longitudinal one as `exp(-f*tau_tilde)`. The Kossakowski coefficients are
//! `A = B = f/4` in vacuum; the dissipator normalization in
//! [`dynamics::lindblad_integrate`] is fixed so that these conventions are
//! mutually consistent (longitudinal rate `4A = f`).
//!
//! Validated input ranges: `r_tilde` in `(0, 30]`, `nu` in `[1, 3]`.
//! Operations return domain errors outside them rather than degrading
//! silently.
//!
//! # Modules
//!
//! - [`specfun`]: Bessel `J` at real non-negative order and the Gamma
//!   function, with stated accuracy contracts.
//! - [`response`]: the response functions `f_i` (mode sums over singular
//!   quadratures), their `nu`-derivatives, small-`r_tilde` asymptotics,
//!   thermal occupation, Kossakowski coefficients, and an optional
//!   evaluation cache.
//! - [`dynamics`]: closed-form Bloch-vector evolution under the Lindblad
//!   master equation, plus an independent density-matrix integrator used as
//!   an oracle.
//! - [`metrology`]: the Bloch-sphere QFI, the closed-form QFI for `nu`, the
//!   theta-derivative extremum law, and the Cramer-Rao bound.
//! - [`optimize`]: grid scans and derivative-free maximization of the QFI
//!   over `(tau_tilde, theta, r_tilde, nu)` slices.

pub mod dynamics;
pub mod metrology;
pub mod optimize;
pub mod response;
pub mod specfun;

pub use dynamics::{BlochState, DynamicsError, EvolutionParams, InitialState};
pub use metrology::{qfi_at, MetrologyError, QfiPoint, QfiResult};
pub use optimize::{maximize, scan, Axis, MaxResult, OptimizeError, ScanCell, ScanGrid, Var};
pub use response::{
    response_eval, Component, KossakowskiCoeffs, Polarization, ResponseCache, ResponseError,
    ResponseValue,
};
