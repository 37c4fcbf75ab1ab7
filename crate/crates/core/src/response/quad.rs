//! Gauss-Legendre quadrature rules for the polar-angle integrals.
//!
//! The response integrands live on `phi ∈ [0, pi/2]` and depend on the angle
//! only through `eta = sin(phi)`, so each rule stores the mapped nodes as
//! `eta_i` together with weights that already include the interval scaling.
//! Rules are built once per node count and cached for the doubling schedule
//! used by the adaptive driver.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Node counts tried in order by the adaptive integrator.
pub(crate) const NODE_SCHEDULE: [usize; 4] = [16, 32, 64, 128];

/// A Gauss-Legendre rule mapped onto `phi ∈ [0, pi/2]`.
pub(crate) struct GlRule {
    /// `sin(phi_i)` at the mapped nodes, ascending in `phi`.
    pub eta: Vec<f64>,
    /// Mapped weights, including the `pi/4` interval factor.
    pub weight: Vec<f64>,
}

impl GlRule {
    pub fn len(&self) -> usize {
        self.eta.len()
    }
}

static RULES: OnceLock<[GlRule; NODE_SCHEDULE.len()]> = OnceLock::new();

/// Returns the cached rule with `n` nodes; `n` must be in [`NODE_SCHEDULE`].
pub(crate) fn rule(n: usize) -> &'static GlRule {
    let rules = RULES.get_or_init(|| NODE_SCHEDULE.map(build_rule));
    let idx = NODE_SCHEDULE
        .iter()
        .position(|&m| m == n)
        .expect("node count outside the fixed schedule");
    &rules[idx]
}

/// Evaluates the Legendre polynomial `P_n` and its derivative at `t`.
fn legendre_pair(n: usize, t: f64) -> (f64, f64) {
    let mut p_prev = 1.0; // P_0
    let mut p = t; // P_1
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * t * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    // P'_n(t) from the standard derivative identity, valid for |t| < 1.
    let dp = (n as f64) * (t * p - p_prev) / (t * t - 1.0);
    (p, dp)
}

/// Builds the `n`-point rule: Newton iteration on `P_n` from the Chebyshev
/// initial guess, then maps `t ∈ [-1, 1]` to `phi = (t + 1) pi/4`.
fn build_rule(n: usize) -> GlRule {
    let mut nodes_t = vec![0.0_f64; n];
    let mut weights_t = vec![0.0_f64; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, t);
            dp = d;
            let dt = -p / d;
            t += dt;
            if dt.abs() < 1e-15 {
                let (_, d) = legendre_pair(n, t);
                dp = d;
                break;
            }
        }
        // The Chebyshev guess enumerates roots from the positive end; store
        // the mirrored pair so the final node list ascends.
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes_t[i] = -t;
        weights_t[i] = w;
        nodes_t[n - 1 - i] = t;
        weights_t[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // Odd rules have a root exactly at the origin.
        let (_, dp) = legendre_pair(n, 0.0);
        nodes_t[m - 1] = 0.0;
        weights_t[m - 1] = 2.0 / (dp * dp);
    }

    let mut eta = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    for i in 0..n {
        let phi = (nodes_t[i] + 1.0) * PI / 4.0;
        eta.push(phi.sin());
        weight.push(weights_t[i] * PI / 4.0);
    }
    GlRule { eta, weight }
}
