//! Quantum Fisher information for the deficit parameter and the
//! Cramer-Rao variance bound.
//!
//! Two routes to the same number, kept deliberately separate so each can
//! check the other:
//!
//! - [`qfi_bloch`]: the general two-level formula
//!   `F = |d omega|^2 + (omega . d omega)^2 / (1 - |omega|^2)` applied to an
//!   evolved Bloch vector and its `nu`-derivative (the second term is
//!   dropped for pure states, where it is a vanishing 0/0);
//! - [`qfi_closed_form`]: the analytic result of composing that formula
//!   with the closed-form evolution,
//!   `F = (df)^2 tau^2 cos^2(theta/2) (2 - (1 - cos theta) e^{-f tau}) / (2 (e^{f tau} - 1))`,
//!   written with `expm1` so large and small `f tau` stay accurate.
//!
//! `theta` is the initial-state weight parameter; `theta = 0` (excited
//! state) maximizes the information and `theta = pi` (ground state) carries
//! none at any time, which [`dqfi_dtheta`] expresses as an everywhere
//! non-positive slope vanishing exactly at both ends.

use std::f64::consts::PI;

use thiserror::Error;

use crate::dynamics::BlochState;
use crate::response::{response_combined_eval, Polarization, ResponseCache, ResponseError};

/// Relative distance from the unit sphere below which a Bloch vector is
/// treated as pure. At `tau_tilde = 0` the state is exactly pure; slightly
/// inside, the mixed-state correction term is a catastrophic 0/0.
const PURITY_THRESHOLD: f64 = 1e-9;

/// Errors from QFI evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetrologyError {
    /// Bloch vector sticks out of the unit sphere beyond tolerance.
    #[error("Bloch vector norm {0} exceeds 1; not a physical state")]
    InvalidState(f64),
    /// Total decay rate `f` must be positive.
    #[error("decay rate f must be positive and finite, got {0}")]
    BadRate(f64),
    /// `df_dnu` must be finite.
    #[error("df_dnu must be finite, got {0}")]
    BadRateDerivative(f64),
    /// Negative or non-finite evolution time (the theta-derivative
    /// additionally requires strictly positive time).
    #[error("tau_tilde out of range, got {0}")]
    BadTau(f64),
    /// Initial-state parameter outside `[0, pi]`.
    #[error("theta must be in [0, pi], got {0}")]
    BadTheta(f64),
    /// Response-function failure while composing the QFI.
    #[error(transparent)]
    Response(#[from] ResponseError),
}

/// Full parameter tuple of a QFI evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiPoint {
    pub pol: Polarization,
    pub r_tilde: f64,
    pub nu: f64,
    pub tau_tilde: f64,
    pub theta: f64,
}

/// A QFI value with its parameter point and single-shot variance bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiResult {
    /// Fisher information for `nu` (dimensionless, ≥ 0).
    pub fisher: f64,
    pub point: QfiPoint,
    /// `1 / fisher`, or `+inf` when the state carries no information.
    pub crlb_single: f64,
}

/// QFI of a two-level state from its Bloch vector and the vector's
/// parameter derivative. States with `|omega| ≥ 1 - 1e-9` use the
/// pure-state branch `|d omega|^2`; norms beyond `1 + 1e-9` are rejected.
pub fn qfi_bloch(state: &BlochState) -> Result<f64, MetrologyError> {
    let w = state.omega;
    let dw = state.d_omega;
    let norm2: f64 = w.iter().map(|x| x * x).sum();
    let norm = norm2.sqrt();
    if norm > 1.0 + PURITY_THRESHOLD {
        return Err(MetrologyError::InvalidState(norm));
    }
    let d2: f64 = dw.iter().map(|x| x * x).sum();
    if norm >= 1.0 - PURITY_THRESHOLD {
        return Ok(d2);
    }
    let wd: f64 = w.iter().zip(&dw).map(|(a, b)| a * b).sum();
    Ok(d2 + wd * wd / (1.0 - norm2))
}

fn validate_closed_form_inputs(
    f: f64,
    df_dnu: f64,
    tau_tilde: f64,
    theta: f64,
) -> Result<(), MetrologyError> {
    if !f.is_finite() || f <= 0.0 {
        return Err(MetrologyError::BadRate(f));
    }
    if !df_dnu.is_finite() {
        return Err(MetrologyError::BadRateDerivative(df_dnu));
    }
    if !tau_tilde.is_finite() || tau_tilde < 0.0 {
        return Err(MetrologyError::BadTau(tau_tilde));
    }
    if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
        return Err(MetrologyError::BadTheta(theta));
    }
    Ok(())
}

/// Closed-form QFI for the deficit parameter, given the decay rate `f`
/// (in units of `gamma_0`) and its derivative `df_dnu`. Returns exactly 0
/// at `tau_tilde = 0` (the `tau^2` prefactor limit) and at `theta = pi`
/// (the ground state).
pub fn qfi_closed_form(
    f: f64,
    df_dnu: f64,
    tau_tilde: f64,
    theta: f64,
) -> Result<f64, MetrologyError> {
    validate_closed_form_inputs(f, df_dnu, tau_tilde, theta)?;
    if tau_tilde == 0.0 || theta == PI {
        return Ok(0.0);
    }
    let ft = f * tau_tilde;
    let half = 0.5 * theta;
    let cos_half_sq = half.cos() * half.cos();
    let shape = 2.0 - (1.0 - theta.cos()) * (-ft).exp();
    let d = df_dnu * tau_tilde;
    Ok(d * d * cos_half_sq * shape / (2.0 * ft.exp_m1()))
}

/// Derivative of the closed-form QFI with respect to `theta`:
///
/// ```text
/// dF/dtheta = -(df)^2 tau^2 sin(theta) (1 + cos(theta) e^{-f tau}) / (2 (e^{f tau} - 1))
/// ```
///
/// Non-positive on `[0, pi]`, exactly zero at both endpoints. Requires
/// `tau_tilde > 0` (at zero time the QFI is identically zero in `theta`).
pub fn dqfi_dtheta(f: f64, df_dnu: f64, tau_tilde: f64, theta: f64) -> Result<f64, MetrologyError> {
    validate_closed_form_inputs(f, df_dnu, tau_tilde, theta)?;
    if tau_tilde == 0.0 {
        return Err(MetrologyError::BadTau(tau_tilde));
    }
    if theta == 0.0 || theta == PI {
        return Ok(0.0);
    }
    let ft = f * tau_tilde;
    let d = df_dnu * tau_tilde;
    Ok(-d * d * theta.sin() * (1.0 + theta.cos() * (-ft).exp()) / (2.0 * ft.exp_m1()))
}

/// Cramer-Rao bound on the estimator variance after `n_measurements`
/// independent shots: `1 / (n F)`, or `+inf` for a state carrying no
/// information.
pub fn crlb(fisher: f64, n_measurements: u32) -> f64 {
    assert!(n_measurements >= 1, "n_measurements must be at least 1");
    assert!(
        fisher.is_finite() && fisher >= 0.0,
        "fisher must be finite and non-negative"
    );
    if fisher == 0.0 {
        return f64::INFINITY;
    }
    1.0 / (n_measurements as f64 * fisher)
}

/// QFI at a full detector configuration: evaluates the polarization-weighted
/// response and its `nu`-derivative (through `cache` when provided), then
/// applies the closed form. This is the quantity scanned and maximized
/// downstream.
pub fn qfi_at(
    pol: Polarization,
    r_tilde: f64,
    nu: f64,
    tau_tilde: f64,
    theta: f64,
    cache: Option<&ResponseCache>,
) -> Result<QfiResult, MetrologyError> {
    if !tau_tilde.is_finite() || tau_tilde < 0.0 {
        return Err(MetrologyError::BadTau(tau_tilde));
    }
    if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
        return Err(MetrologyError::BadTheta(theta));
    }
    let rv = response_combined_eval(cache, pol, r_tilde, nu, true)?;
    let df_dnu = rv.dvalue_dnu.expect("derivative was requested");
    let fisher = qfi_closed_form(rv.value, df_dnu, tau_tilde, theta)?;
    Ok(QfiResult {
        fisher,
        point: QfiPoint {
            pol,
            r_tilde,
            nu,
            tau_tilde,
            theta,
        },
        crlb_single: crlb(fisher, 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{bloch_evolve_with_dnu, EvolutionParams, InitialState};
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn closed_form_reference_point() {
        // f = df = tau = 1, theta = 0: F = 1 / (e - 1).
        let f = qfi_closed_form(1.0, 1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(f, (E - 1.0).recip(), max_relative = 1e-14);
    }

    #[test]
    fn closed_form_frozen_values() {
        // From an independent implementation of the unsimplified formula
        // e^{-ft} (df t)^2 cos^2(t/2) (2 e^{ft} - 1 + cos t) / (2 (e^{ft}-1)).
        let a = qfi_closed_form(1.2, -0.8, 2.5, 1.1).unwrap();
        assert_relative_eq!(a, 0.150_252_458_053_906_83, max_relative = 1e-12);
        let b = qfi_closed_form(0.3, 0.5, 7.0, 2.6).unwrap();
        assert_relative_eq!(b, 0.108_411_774_907_678_64, max_relative = 1e-12);
    }

    #[test]
    fn closed_form_exact_zeros() {
        assert_eq!(qfi_closed_form(1.0, 1.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(qfi_closed_form(1.0, 1.0, 3.0, PI).unwrap(), 0.0);
        assert_eq!(qfi_closed_form(17.0, -2.0, 0.0, PI).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_rejects_bad_inputs() {
        assert!(qfi_closed_form(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(qfi_closed_form(-1.0, 1.0, 1.0, 0.0).is_err());
        assert!(qfi_closed_form(f64::NAN, 1.0, 1.0, 0.0).is_err());
        assert!(qfi_closed_form(1.0, f64::NAN, 1.0, 0.0).is_err());
        assert!(qfi_closed_form(1.0, 1.0, -0.5, 0.0).is_err());
        assert!(qfi_closed_form(1.0, 1.0, 1.0, -0.1).is_err());
        assert!(qfi_closed_form(1.0, 1.0, 1.0, 3.2).is_err());
    }

    #[test]
    fn closed_form_even_in_rate_derivative() {
        let plus = qfi_closed_form(0.9, 0.64, 2.0, 0.8).unwrap();
        let minus = qfi_closed_form(0.9, -0.64, 2.0, 0.8).unwrap();
        assert_eq!(plus.to_bits(), minus.to_bits());
        assert!(plus >= 0.0);
    }

    #[test]
    fn closed_form_vanishes_in_both_time_limits() {
        // tau -> 0: the tau^2 prefactor wins.
        let early = qfi_closed_form(1.0, 1.0, 1e-9, 0.0).unwrap();
        assert!(early > 0.0 && early < 1e-8);
        // tau -> inf: the decayed state forgets nu.
        let late = qfi_closed_form(1.0, 1.0, 500.0, 0.0).unwrap();
        assert!(late > 0.0 && late < 1e-200);
        // Past the overflow of e^{f tau} the limit is reached exactly.
        let gone = qfi_closed_form(1.0, 1.0, 800.0, 0.0).unwrap();
        assert_eq!(gone, 0.0);
    }

    #[test]
    fn closed_form_non_increasing_in_theta() {
        for &f in &[0.5, 1.0, 2.3] {
            for &tau in &[0.4, 2.0, 6.0] {
                let mut prev = f64::INFINITY;
                for i in 0..=40 {
                    let theta = PI * i as f64 / 40.0;
                    let v = qfi_closed_form(f, 0.7, tau, theta).unwrap();
                    assert!(
                        v <= prev + 1e-12,
                        "F increased in theta at f={f}, tau={tau}, theta={theta}"
                    );
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn theta_derivative_reference_point() {
        // f = df = tau = 1, theta = pi/2: dF/dtheta = -1 / (2 (e - 1)).
        let d = dqfi_dtheta(1.0, 1.0, 1.0, PI / 2.0).unwrap();
        assert_relative_eq!(d, -0.5 / (E - 1.0), max_relative = 1e-14);
    }

    #[test]
    fn theta_derivative_zeros_are_exact() {
        assert_eq!(dqfi_dtheta(1.0, 1.0, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(dqfi_dtheta(1.0, 1.0, 1.0, PI).unwrap(), 0.0);
        assert_eq!(dqfi_dtheta(2.7, -0.3, 0.4, PI).unwrap(), 0.0);
    }

    #[test]
    fn theta_derivative_requires_positive_time() {
        assert!(dqfi_dtheta(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn theta_derivative_is_nonpositive() {
        for &f in &[0.5, 1.0, 2.0] {
            for &tau in &[0.5, 2.0] {
                for i in 0..=24 {
                    let theta = PI * i as f64 / 24.0;
                    let d = dqfi_dtheta(f, 0.9, tau, theta).unwrap();
                    assert!(d <= 0.0, "dF/dtheta = {d} > 0 at f={f}, tau={tau}, theta={theta}");
                }
            }
        }
    }

    #[test]
    fn theta_derivative_matches_finite_differences() {
        let (f, df, tau) = (1.3, 0.8, 2.1);
        let h = 1e-5;
        for &theta in &[0.4, 1.2, 2.2] {
            let analytic = dqfi_dtheta(f, df, tau, theta).unwrap();
            let up = qfi_closed_form(f, df, tau, theta + h).unwrap();
            let dn = qfi_closed_form(f, df, tau, theta - h).unwrap();
            let numeric = (up - dn) / (2.0 * h);
            assert_relative_eq!(analytic, numeric, max_relative = 1e-6);
        }
    }

    #[test]
    fn bloch_formula_trivial_cases() {
        // Pure state: only |d omega|^2 survives.
        let pure = BlochState {
            omega: [0.0, 0.0, 1.0],
            d_omega: [1.0, 0.0, 0.0],
        };
        assert_eq!(qfi_bloch(&pure).unwrap(), 1.0);
        // Maximally mixed: the correction term vanishes with omega.
        let mixed = BlochState {
            omega: [0.0, 0.0, 0.0],
            d_omega: [0.3, -0.4, 1.2],
        };
        assert_relative_eq!(
            qfi_bloch(&mixed).unwrap(),
            0.09 + 0.16 + 1.44,
            max_relative = 1e-15
        );
        // Unphysical norm is rejected.
        let bad = BlochState {
            omega: [1.0, 1.0, 1.0],
            d_omega: [0.0; 3],
        };
        assert!(matches!(
            qfi_bloch(&bad),
            Err(MetrologyError::InvalidState(_))
        ));
    }

    #[test]
    fn bloch_path_equals_closed_form() {
        let (theta, tau, f, df) = (0.9, 2.0, 0.7, -0.51);
        let init = InitialState::new(theta, 0.7).unwrap();
        let params = EvolutionParams::new(tau, f, 1.0, 1.0).unwrap();
        let state = bloch_evolve_with_dnu(init, params, df);
        let via_bloch = qfi_bloch(&state).unwrap();
        let closed = qfi_closed_form(f, df, tau, theta).unwrap();
        assert_relative_eq!(via_bloch, closed, max_relative = 1e-9);
    }

    #[test]
    fn bloch_path_ignores_phase_and_level_spacing() {
        let (theta, tau, f, df) = (1.4, 1.1, 1.6, 0.33);
        let reference = {
            let init = InitialState::new(theta, 0.0).unwrap();
            let params = EvolutionParams::new(tau, f, 1.0, 0.0).unwrap();
            qfi_bloch(&bloch_evolve_with_dnu(init, params, df)).unwrap()
        };
        for &phi in &[0.0, 1.3, 5.9] {
            for &omega_eff in &[0.0, 1.0, 2.7] {
                let init = InitialState::new(theta, phi).unwrap();
                let params = EvolutionParams::new(tau, f, 1.0, omega_eff).unwrap();
                let v = qfi_bloch(&bloch_evolve_with_dnu(init, params, df)).unwrap();
                assert_relative_eq!(v, reference, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn unimodal_in_time_soft_check() {
        // The time profile at theta = 0 is expected to rise to a single
        // maximum and then fall. Not proven, so a violation reports
        // instead of failing the suite.
        let (f, df) = (1.0, 1.0);
        let values: Vec<f64> = (1..=120)
            .map(|i| qfi_closed_form(f, df, 0.1 * i as f64, 0.0).unwrap())
            .collect();
        let peak = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        let rising = values[..peak].windows(2).all(|w| w[1] >= w[0] - 1e-12);
        let falling = values[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-12);
        if !(rising && falling) {
            eprintln!(
                "note: QFI time profile not unimodal on the sampled grid (peak index {peak})"
            );
        }
    }

    #[test]
    fn crlb_values() {
        assert_eq!(crlb(4.0, 1), 0.25);
        assert_relative_eq!(crlb(8.513, 100), 1.1747e-3, max_relative = 1e-4);
        assert_eq!(crlb(0.0, 10), f64::INFINITY);
    }

    #[test]
    fn qfi_at_reference_points() {
        // Radial polarization near its optimal distance.
        let radial = qfi_at(Polarization::radial(), 0.14, 1.5, 4.0, 0.0, None).unwrap();
        assert_relative_eq!(radial.fisher, 8.513_233_344_995_404, max_relative = 1e-8);
        assert_eq!(radial.crlb_single, 1.0 / radial.fisher);

        // Parallel polarization near its own optimum.
        let parallel = qfi_at(Polarization::parallel(), 2.29, 2.0, 4.0, 0.0, None).unwrap();
        assert_relative_eq!(parallel.fisher, 0.228_540_889_238_855_5, max_relative = 1e-8);
    }

    #[test]
    fn qfi_at_ground_state_carries_no_information() {
        let res = qfi_at(Polarization::radial(), 0.5, 1.5, 2.0, PI, None).unwrap();
        assert_eq!(res.fisher, 0.0);
        assert_eq!(res.crlb_single, f64::INFINITY);
    }

    #[test]
    fn qfi_at_uses_cache_transparently() {
        let cache = ResponseCache::new();
        let a = qfi_at(Polarization::tangential(), 0.8, 1.7, 3.0, 0.4, Some(&cache)).unwrap();
        let b = qfi_at(Polarization::tangential(), 0.8, 1.7, 3.0, 0.4, Some(&cache)).unwrap();
        let c = qfi_at(Polarization::tangential(), 0.8, 1.7, 3.0, 0.4, None).unwrap();
        assert_eq!(a.fisher.to_bits(), b.fisher.to_bits());
        assert_eq!(a.fisher.to_bits(), c.fisher.to_bits());
    }

    #[test]
    fn qfi_at_rejects_bad_inputs() {
        let pol = Polarization::radial();
        assert!(qfi_at(pol, 0.5, 1.5, -1.0, 0.0, None).is_err());
        assert!(qfi_at(pol, 0.5, 1.5, 1.0, 4.0, None).is_err());
        assert!(matches!(
            qfi_at(pol, -0.5, 1.5, 1.0, 0.0, None),
            Err(MetrologyError::Response(_))
        ));
    }
}
