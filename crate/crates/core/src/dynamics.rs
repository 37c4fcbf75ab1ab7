//! Open-system dynamics of the two-level detector: the closed-form Bloch
//! vector under the Lindblad master equation, its analytic `nu`-derivative,
//! and an independent fixed-step integrator used as a numerical oracle.
//!
//! # Rate convention
//!
//! All rates are expressed in units of the flat-space spontaneous-emission
//! rate `gamma_0`, and times as `tau_tilde = gamma_0 * tau`. The canonical
//! convention, fixed once for the whole crate: with total decay rate
//! `g = gamma_total` (equal to the weighted response `f` for a vacuum
//! environment), transverse Bloch components decay as `exp(-g tau/2)`,
//! the longitudinal one as `exp(-g tau)`, and the equilibrium polarization
//! is `omega_3 -> -b_over_a`. In dissipator language this corresponds to
//! Kossakowski coefficients `A = g/4`, `B = b_over_a * g/4` with
//! transverse/longitudinal relaxation rates `2A` and `4A`.
//!
//! The detector starts in `|psi> = cos(theta/2)|+> + e^{i phi} sin(theta/2)|->`,
//! i.e. the Bloch vector `(sin theta cos phi, sin theta sin phi, cos theta)`.
//! The effective level spacing `omega_eff` only rotates the transverse
//! plane and cancels from every quantity downstream.

use std::f64::consts::PI;

use thiserror::Error;

/// Errors from constructing dynamics inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("theta must be in [0, pi], got {0}")]
    BadTheta(f64),
    #[error("phi must be finite, got {0}")]
    BadPhi(f64),
    #[error("tau_tilde must be non-negative and finite, got {0}")]
    BadTau(f64),
    #[error("gamma_total must be positive and finite, got {0}")]
    BadGamma(f64),
    #[error("b_over_a must be in (0, 1], got {0}")]
    BadBRatio(f64),
    #[error("omega_eff must be finite, got {0}")]
    BadOmegaEff(f64),
    #[error("steps must be at least 1")]
    BadSteps,
}

/// Initial detector state `|psi> = cos(theta/2)|+> + e^{i phi} sin(theta/2)|->`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub(crate) theta: f64,
    pub(crate) phi: f64,
}

impl InitialState {
    /// Validates `theta ∈ [0, pi]` and wraps `phi` into `[0, 2 pi)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self, DynamicsError> {
        if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(DynamicsError::BadTheta(theta));
        }
        if !phi.is_finite() {
            return Err(DynamicsError::BadPhi(phi));
        }
        Ok(InitialState {
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Evolution inputs: duration, rates, and the effective level spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionParams {
    pub(crate) tau_tilde: f64,
    pub(crate) gamma_total: f64,
    pub(crate) b_over_a: f64,
    pub(crate) omega_eff: f64,
}

impl EvolutionParams {
    /// Validates `tau_tilde ≥ 0`, `gamma_total > 0`, `b_over_a ∈ (0, 1]`,
    /// finite `omega_eff`.
    pub fn new(
        tau_tilde: f64,
        gamma_total: f64,
        b_over_a: f64,
        omega_eff: f64,
    ) -> Result<Self, DynamicsError> {
        if !tau_tilde.is_finite() || tau_tilde < 0.0 {
            return Err(DynamicsError::BadTau(tau_tilde));
        }
        if !gamma_total.is_finite() || gamma_total <= 0.0 {
            return Err(DynamicsError::BadGamma(gamma_total));
        }
        if !b_over_a.is_finite() || !(b_over_a > 0.0 && b_over_a <= 1.0) {
            return Err(DynamicsError::BadBRatio(b_over_a));
        }
        if !omega_eff.is_finite() {
            return Err(DynamicsError::BadOmegaEff(omega_eff));
        }
        Ok(EvolutionParams {
            tau_tilde,
            gamma_total,
            b_over_a,
            omega_eff,
        })
    }

    pub fn tau_tilde(&self) -> f64 {
        self.tau_tilde
    }

    pub fn gamma_total(&self) -> f64 {
        self.gamma_total
    }

    pub fn b_over_a(&self) -> f64 {
        self.b_over_a
    }

    pub fn omega_eff(&self) -> f64 {
        self.omega_eff
    }
}

/// Bloch vector at the end of the evolution, with its `nu`-derivative.
/// The derivative components are populated by [`bloch_evolve_with_dnu`] and
/// zero everywhere else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    /// `(omega_1, omega_2, omega_3)`.
    pub omega: [f64; 3],
    /// `(d omega_1 / d nu, d omega_2 / d nu, d omega_3 / d nu)`.
    pub d_omega: [f64; 3],
}

impl BlochState {
    /// Euclidean norm of the Bloch vector (1 for pure states).
    pub fn norm(&self) -> f64 {
        self.omega.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// `sin(theta)` with the endpoint pinned: `theta = pi` is the ground state
/// and must yield exactly zero transverse amplitude, not `sin(pi) ~ 1e-16`.
fn sin_pinned(theta: f64) -> f64 {
    if theta == PI {
        0.0
    } else {
        theta.sin()
    }
}

/// Closed-form Bloch vector after time `params.tau_tilde`:
///
/// ```text
/// omega_perp = sin(theta) e^{-g tau/2} (cos(Omega tau + phi), sin(Omega tau + phi))
/// omega_3    = (cos(theta) + b) e^{-g tau} - b,   b = b_over_a
/// ```
///
/// `tau_tilde = 0` reproduces the initial vector exactly, and the ground
/// state `theta = pi` in vacuum (`b = 1`) is an exact fixed point.
pub fn bloch_evolve(init: InitialState, params: EvolutionParams) -> BlochState {
    bloch_evolve_with_dnu(init, params, 0.0)
}

/// [`bloch_evolve`] plus the analytic derivative of the Bloch vector with
/// respect to the deficit parameter, which enters only through the decay
/// rate: `dg_dnu = d gamma_total / d nu` (the level spacing is treated as
/// `nu`-independent). Differentiating the closed form:
///
/// ```text
/// d omega_perp / d nu = -(tau dg/2) omega_perp
/// d omega_3    / d nu = -tau dg (cos(theta) + b) e^{-g tau}
/// ```
pub fn bloch_evolve_with_dnu(
    init: InitialState,
    params: EvolutionParams,
    dg_dnu: f64,
) -> BlochState {
    let tau = params.tau_tilde;
    let s = sin_pinned(init.theta);
    let c = init.theta.cos();
    if tau == 0.0 {
        return BlochState {
            omega: [s * init.phi.cos(), s * init.phi.sin(), c],
            d_omega: [0.0; 3],
        };
    }
    let g = params.gamma_total;
    let b = params.b_over_a;
    let decay_t = (-0.5 * g * tau).exp();
    let decay_l = (-g * tau).exp();
    let phase = params.omega_eff * tau + init.phi;
    let omega_1 = s * phase.cos() * decay_t;
    let omega_2 = s * phase.sin() * decay_t;
    let omega_3 = (c + b) * decay_l - b;
    let d_omega = if dg_dnu == 0.0 {
        [0.0; 3]
    } else {
        [
            -0.5 * tau * dg_dnu * omega_1,
            -0.5 * tau * dg_dnu * omega_2,
            -tau * dg_dnu * (c + b) * decay_l,
        ]
    };
    BlochState {
        omega: [omega_1, omega_2, omega_3],
        d_omega,
    }
}

/// Independent oracle: integrates the Bloch equations implied by the
/// Lindblad dissipator with fixed-step classical Runge-Kutta, never touching
/// the closed-form exponentials. The Kossakowski coefficients follow the
/// canonical mapping `A = g/4`, `B = b_over_a g/4`, giving
///
/// ```text
/// d omega_1 / d tau = -2A omega_1 - Omega omega_2
/// d omega_2 / d tau =  Omega omega_1 - 2A omega_2
/// d omega_3 / d tau = -4A omega_3 - 4B
/// ```
///
/// Derivative fields of the result are zero. Accuracy improves as
/// `steps^-4`; the oracle-equivalence tests use enough steps to reach
/// 1e-8 in max norm.
pub fn lindblad_integrate(
    init: InitialState,
    params: EvolutionParams,
    steps: u32,
) -> Result<BlochState, DynamicsError> {
    if steps == 0 {
        return Err(DynamicsError::BadSteps);
    }
    let a = 0.25 * params.gamma_total;
    let b = 0.25 * params.b_over_a * params.gamma_total;
    let omega_eff = params.omega_eff;
    let rhs = |w: [f64; 3]| -> [f64; 3] {
        [
            -2.0 * a * w[0] - omega_eff * w[1],
            omega_eff * w[0] - 2.0 * a * w[1],
            -4.0 * a * w[2] - 4.0 * b,
        ]
    };

    let h = params.tau_tilde / steps as f64;
    let mut w = [
        init.theta.sin() * init.phi.cos(),
        init.theta.sin() * init.phi.sin(),
        init.theta.cos(),
    ];
    for _ in 0..steps {
        let k1 = rhs(w);
        let k2 = rhs(advance(w, k1, 0.5 * h));
        let k3 = rhs(advance(w, k2, 0.5 * h));
        let k4 = rhs(advance(w, k3, h));
        for i in 0..3 {
            w[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(BlochState {
        omega: w,
        d_omega: [0.0; 3],
    })
}

fn advance(w: [f64; 3], k: [f64; 3], h: f64) -> [f64; 3] {
    [w[0] + h * k[0], w[1] + h * k[1], w[2] + h * k[2]]
}
