//! Closed forms for the ground state of the constant-coupling Hamiltonian.
//!
//! With the coupling held at η the gauge α_g = 1/(1+δ) brings the
//! Hamiltonian to the number-conserving form
//!
//! ```text
//! H^g = ω_{m,g}(d†d + ½) + ω_g(c†c + ½) + (coupling) i(d†c − dc†)
//! ```
//!
//! whose ground state is the c, d vacuum. Every other gauge is reached by a
//! unitary that is local to neither subsystem, which is what produces the
//! α-dependent correlations and photon numbers below. All expressions use
//! e²/(mv) = η²ω² and ω_m = 1.

use serde::Serialize;

use crate::model::{jc_gauge, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedFrequencies {
    /// ω_α = ω √(1 + η²(1 − α)²).
    pub omega_alpha: f64,
    pub alpha_g: f64,
    /// ω_g = ω_{α_g}.
    pub omega_g: f64,
    /// ω_{m,g} = √(ω_m² + η²ω²α_g²).
    pub omega_mg: f64,
}

pub fn derived_frequencies(params: &ModelParams, alpha: f64) -> DerivedFrequencies {
    let omega = params.omega();
    let eta = params.eta_max;
    let alpha_g = jc_gauge(params.delta).expect("validated delta");
    let dressed = |a: f64| omega * (1.0 + eta * eta * (1.0 - a) * (1.0 - a)).sqrt();
    let om = params.omega_m();
    DerivedFrequencies {
        omega_alpha: dressed(alpha),
        alpha_g,
        omega_g: dressed(alpha_g),
        omega_mg: (om * om + params.coupling_squared(1.0) * alpha_g * alpha_g).sqrt(),
    }
}

/// μ_α = √(1 + (ω/ω_g)² η²δ (α − α_g)²).
fn mu_alpha(params: &ModelParams, alpha: f64) -> f64 {
    let f = derived_frequencies(params, alpha);
    let ratio = params.omega() / f.omega_g;
    let d = alpha - f.alpha_g;
    (1.0 + ratio * ratio * params.eta_max * params.eta_max * params.delta * d * d).sqrt()
}

/// Ground-state mutual information I_G(α) in nats.
pub fn ground_state_mutual_information(params: &ModelParams, alpha: f64) -> f64 {
    let mu = mu_alpha(params, alpha);
    let lower = if mu > 1.0 {
        (mu - 1.0) * ((mu - 1.0) / 2.0).ln()
    } else {
        0.0
    };
    ((mu + 1.0) * ((mu + 1.0) / 2.0).ln() - lower).max(0.0)
}

/// Common bracket ω_g + η²ω²(α − α_g)²/ω_{m,g} of the two photon numbers.
fn bracket(params: &ModelParams, f: &DerivedFrequencies, alpha: f64) -> f64 {
    let d = alpha - f.alpha_g;
    f.omega_g + params.coupling_squared(1.0) * d * d / f.omega_mg
}

/// n_a(α) = ⟨a†a⟩ in the ground state.
pub fn ground_state_photon_number(params: &ModelParams, alpha: f64) -> f64 {
    let f = derived_frequencies(params, alpha);
    let omega = params.omega();
    let n = (bracket(params, &f, alpha) + omega * omega / f.omega_g) / (4.0 * omega) - 0.5;
    n.max(0.0)
}

/// n_c(α) = ⟨c†c⟩ for the diamagnetically dressed cavity mode.
pub fn ground_state_renormalized_number(params: &ModelParams, alpha: f64) -> f64 {
    let f = derived_frequencies(params, alpha);
    let wa = f.omega_alpha;
    let n = (bracket(params, &f, alpha) + wa * wa / f.omega_g) / (4.0 * wa) - 0.5;
    n.max(0.0)
}
