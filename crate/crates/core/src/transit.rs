//! A dipole moving uniformly through a Gaussian cavity mode.
//!
//! The dipole follows R(t) = (h − νt) x̂ in the plane of the mode waist, so
//! the coupling envelope is μ(t) = exp(−(h − νt)²/w_c²). Only the ratios
//! w_c·ω_m/ν and h/w_c matter; lengths are measured in units of w_c here.
//!
//! Treating the gross motion as external before quantization gives the
//! gauge-covariant family H̃^α(t), which differs from H^α(t) by
//! −e μ̇ r A(0) (α − cos²θ) for a dipole along the mode polarization, where θ
//! is the angle between the polarization and the direction of motion.

use serde::{Deserialize, Serialize};

use crate::dynamics::Variant;
use crate::error::{Error, Result};
use crate::model::{envelope_derivative, envelope_value, CouplingEnvelope, ModelParams};

/// Largest admissible coupling at t = 0; the dipole has to start outside
/// the mode.
pub const MAX_INITIAL_COUPLING: f64 = 1e-10;
pub const DEFAULT_OFFSET_H: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitScenario {
    /// w_c·ω_m/ν: beam transit time t_b in units of 1/ω_m.
    pub ratio_wc: f64,
    /// h/w_c: starting distance from the mode axis in beam waists.
    #[serde(default = "default_offset_h")]
    pub offset_h: f64,
    /// Angle between mode polarization and direction of motion.
    #[serde(default = "default_theta")]
    pub theta: f64,
}

fn default_offset_h() -> f64 {
    DEFAULT_OFFSET_H
}

fn default_theta() -> f64 {
    std::f64::consts::FRAC_PI_2
}

impl TransitScenario {
    pub fn new(ratio_wc: f64, offset_h: f64, theta: f64) -> Result<Self> {
        let s = TransitScenario {
            ratio_wc,
            offset_h,
            theta,
        };
        s.validate()?;
        Ok(s)
    }

    /// Scenario from a beam waist (m), a dipole speed (m/s) and the matter
    /// angular frequency (rad/s).
    pub fn from_si(w_c: f64, speed: f64, omega_m: f64, offset_h: f64, theta: f64) -> Result<Self> {
        if !(w_c > 0.0 && speed > 0.0 && omega_m > 0.0) {
            return Err(Error::param("si", "w_c, speed and omega_m must be > 0"));
        }
        TransitScenario::new(w_c * omega_m / speed, offset_h, theta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio_wc.is_finite() && self.ratio_wc > 0.0) {
            return Err(Error::param(
                "ratio_wc",
                format!("must be > 0, got {}", self.ratio_wc),
            ));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(Error::param(
                "theta",
                format!("must lie in [0, π], got {}", self.theta),
            ));
        }
        let mu0 = (-self.offset_h * self.offset_h).exp();
        if !(mu0 < MAX_INITIAL_COUPLING) {
            return Err(Error::param(
                "offset_h",
                format!("initial coupling μ(0) = {mu0:.3e} must be below {MAX_INITIAL_COUPLING:e}"),
            ));
        }
        Ok(())
    }

    /// Beam transit time t_b = w_c/ν in units of 1/ω_m.
    pub fn transit_time(&self) -> f64 {
        self.ratio_wc
    }

    /// Time at which the dipole crosses the mode axis.
    pub fn crossing_time(&self) -> f64 {
        self.offset_h * self.ratio_wc
    }

    /// End of a protocol symmetric about the crossing.
    pub fn exit_time(&self) -> f64 {
        2.0 * self.crossing_time()
    }

    /// Position R(t)/w_c along x̂.
    pub fn position(&self, t: f64) -> f64 {
        self.offset_h - t / self.ratio_wc
    }
}

/// Envelope of the scenario, with w_c as the unit of length.
pub fn transit_envelope(sc: &TransitScenario) -> Result<CouplingEnvelope> {
    sc.validate()?;
    CouplingEnvelope::gaussian_transit(sc.offset_h, 1.0 / sc.ratio_wc, 1.0)
}

/// Gauge α* = cos²θ for which H̃^α(t) = H^α(t).
pub fn equality_gauge(theta: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::param(
            "theta",
            format!("must lie in [0, π], got {theta}"),
        ));
    }
    Ok(theta.cos().powi(2))
}

/// Equality gauge averaged over orientations uniformly distributed in θ.
pub fn orientation_averaged_equality_gauge() -> f64 {
    0.5
}

/// Coefficient κ(t) of (a† + a)(b† + b) in H̃^α(t) − H^α(t):
/// κ = −(η_max μ̇ √δ / 2)(α − cos²θ).
pub fn tilde_correction_coefficient(
    params: &ModelParams,
    env: &CouplingEnvelope,
    t: f64,
    alpha: f64,
    theta: f64,
) -> f64 {
    correction_with_gauge(params, env, t, alpha, theta.cos().powi(2))
}

fn correction_with_gauge(
    params: &ModelParams,
    env: &CouplingEnvelope,
    t: f64,
    alpha: f64,
    alpha_star: f64,
) -> f64 {
    let mu_dot = envelope_derivative(env, t);
    -0.5 * params.eta_max * mu_dot * params.delta.sqrt() * (alpha - alpha_star)
}

/// κ(t) for a dynamics variant at the gauge stored in `params`.
pub fn variant_correction(
    params: &ModelParams,
    env: &CouplingEnvelope,
    t: f64,
    variant: Variant,
) -> f64 {
    match variant {
        Variant::Standard => 0.0,
        Variant::Tilde { theta } => {
            tilde_correction_coefficient(params, env, t, params.alpha, theta)
        }
        Variant::TildeAveraged => correction_with_gauge(
            params,
            env,
            t,
            params.alpha,
            orientation_averaged_equality_gauge(),
        ),
    }
}

/// Envelope value along a scenario, for reporting.
pub fn coupling_at(sc: &TransitScenario, t: f64) -> Result<f64> {
    Ok(envelope_value(&transit_envelope(sc)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn equality_gauge_values() {
        assert!(equality_gauge(FRAC_PI_2).unwrap() < 1e-30);
        assert_eq!(equality_gauge(0.0).unwrap(), 1.0);
        assert!((equality_gauge(PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(equality_gauge(-0.1).is_err());
        // uniform θ: mean of cos²θ over [0, π]
        let n = 10_000;
        let avg: f64 = (0..n)
            .map(|k| ((k as f64 + 0.5) * PI / n as f64).cos().powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((avg - orientation_averaged_equality_gauge()).abs() < 1e-12);
    }

    #[test]
    fn envelope_of_scenario() {
        let sc = TransitScenario::new(1.3, 5.0, FRAC_PI_2).unwrap();
        let env = transit_envelope(&sc).unwrap();
        assert_eq!(envelope_value(&env, sc.crossing_time()), 1.0);
        assert!((envelope_value(&env, 0.0) - (-25.0f64).exp()).abs() < 1e-24);
        assert!((envelope_value(&env, 0.0) - 1.3888e-11).abs() < 1e-14);
        assert!(TransitScenario::new(1.0, 4.0, 0.0).is_err());
        assert!(TransitScenario::new(0.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn si_preset_is_order_one() {
        // 20 µm waist, 10⁻³ c, ħω_m = 10 µeV
        let hbar_ev = 6.582_119_569e-16;
        let omega_m = 10e-6 / hbar_ev;
        let sc = TransitScenario::from_si(20e-6, 1e-3 * 2.997_924_58e8, omega_m, 5.0, FRAC_PI_2)
            .unwrap();
        assert!(sc.ratio_wc > 0.5 && sc.ratio_wc < 2.0, "{}", sc.ratio_wc);
    }

    #[test]
    fn correction_vanishes_at_equality_gauge_and_for_constant_coupling() {
        let p = ModelParams::new(0.5, 1.0, 0.3).unwrap();
        let sc = TransitScenario::new(1.0, 5.0, 0.7).unwrap();
        let env = transit_envelope(&sc).unwrap();
        let a_star = equality_gauge(0.7).unwrap();
        let flat = CouplingEnvelope::constant(0.8).unwrap();
        for k in 0..50 {
            let t = 0.2 * k as f64;
            assert_eq!(tilde_correction_coefficient(&p, &env, t, a_star, 0.7), 0.0);
            assert_eq!(tilde_correction_coefficient(&p, &flat, t, 0.1, 0.7), 0.0);
        }
    }

    /// Röntgen coupling e r·(Ṙ × B) for polarization ⟂ motion, written in
    /// terms of the transit geometry: −e r (a†+a)/√(2ωv) · (2νR/w_c²) φ(R).
    #[test]
    fn multipolar_correction_is_the_rontgen_term() {
        let p = ModelParams::new(0.5, 0.8, 1.0).unwrap();
        let sc = TransitScenario::new(1.7, 5.0, FRAC_PI_2).unwrap();
        let env = transit_envelope(&sc).unwrap();
        let (w_c, nu) = (1.0, 1.0 / sc.ratio_wc);
        for k in 0..60 {
            let t = 0.3 * k as f64;
            let r = sc.position(t) * w_c;
            let phi = (-(r * r) / (w_c * w_c)).exp();
            // e r A(0) = η_max √δ/2 · (a†+a)(b†+b)
            let rontgen = -p.eta_max * p.delta.sqrt() / 2.0 * (2.0 * nu * r / (w_c * w_c)) * phi;
            let kappa = tilde_correction_coefficient(&p, &env, t, 1.0, FRAC_PI_2);
            assert!(
                (kappa - rontgen).abs() < 1e-14,
                "t={t}: {kappa} vs {rontgen}"
            );
        }
    }

    #[test]
    fn averaged_variant_uses_half() {
        let p = ModelParams::new(1.0, 1.0, 0.5).unwrap();
        let env = transit_envelope(&TransitScenario::new(1.0, 5.0, 0.0).unwrap()).unwrap();
        for k in 0..20 {
            assert_eq!(
                variant_correction(&p, &env, 0.5 * k as f64, Variant::TildeAveraged),
                0.0
            );
        }
        let p0 = p.with_alpha(0.0);
        let t = 3.0;
        let avg = variant_correction(&p0, &env, t, Variant::TildeAveraged);
        let perp = variant_correction(&p0, &env, t, Variant::Tilde { theta: FRAC_PI_2 });
        let par = variant_correction(&p0, &env, t, Variant::Tilde { theta: 0.0 });
        assert!((avg - 0.5 * (perp + par)).abs() < 1e-15);
    }
}
