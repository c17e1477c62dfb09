//! Model parameters, coupling envelopes and the interaction coefficients of
//! the α-gauge Hamiltonian family
//!
//! ```text
//! H^α(t) = ω(a†a + ½) + ω_m(b†b + ½)
//!        + c_a(t) (a† + a)² + c_b(t) (b† + b)²
//!        + u⁻(t) i(ab† − a†b) + u⁺(t) i(a†b† − ab)
//! ```
//!
//! Units: ħ = 1 and ω_m = 1, so every time is measured in 1/ω_m and every
//! energy in ω_m. The cavity frequency is ω = δ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensionless configuration of the two-mode model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Frequency ratio δ = ω/ω_m.
    pub delta: f64,
    /// Peak dimensionless coupling η.
    pub eta_max: f64,
    /// Gauge parameter α. Any real value is accepted.
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(delta: f64, eta_max: f64, alpha: f64) -> Result<Self> {
        let p = ModelParams {
            delta,
            eta_max,
            alpha,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::param(
                "delta",
                format!("must be > 0, got {}", self.delta),
            ));
        }
        if !(self.eta_max.is_finite() && self.eta_max >= 0.0) {
            return Err(Error::param(
                "eta_max",
                format!("must be >= 0, got {}", self.eta_max),
            ));
        }
        if !self.alpha.is_finite() {
            return Err(Error::param("alpha", "must be finite"));
        }
        Ok(())
    }

    /// Same physical configuration in another gauge.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        ModelParams { alpha, ..*self }
    }

    /// Cavity frequency ω.
    #[inline]
    pub fn omega(&self) -> f64 {
        self.delta
    }

    /// Matter frequency, fixed to one.
    #[inline]
    pub fn omega_m(&self) -> f64 {
        1.0
    }

    /// The coupling combination e²/(mv) = η²ω² at a given envelope level.
    pub fn coupling_squared(&self, level: f64) -> f64 {
        let eta = self.eta_max * level;
        eta * eta * self.omega() * self.omega()
    }
}

/// Time profile μ(t) of the light-matter coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingEnvelope {
    Constant {
        level: f64,
    },
    /// Smoothed box switched on near `t0` and off near `t0 + tau`;
    /// `s` sets the steepness of both edges.
    SmoothedBox {
        t0: f64,
        tau: f64,
        s: f64,
    },
    /// Uniform transit of the dipole through a Gaussian mode profile,
    /// μ(t) = exp(−(h − νt)²/w_c²).
    GaussianTransit {
        h: f64,
        nu: f64,
        w_c: f64,
    },
}

impl CouplingEnvelope {
    pub fn constant(level: f64) -> Result<Self> {
        let e = CouplingEnvelope::Constant { level };
        e.validate()?;
        Ok(e)
    }

    pub fn smoothed_box(t0: f64, tau: f64, s: f64) -> Result<Self> {
        let e = CouplingEnvelope::SmoothedBox { t0, tau, s };
        e.validate()?;
        Ok(e)
    }

    pub fn gaussian_transit(h: f64, nu: f64, w_c: f64) -> Result<Self> {
        let e = CouplingEnvelope::GaussianTransit { h, nu, w_c };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be > 0, got {v}")))
            }
        }
        match *self {
            CouplingEnvelope::Constant { level } => {
                if !(0.0..=1.0).contains(&level) {
                    return Err(Error::param(
                        "level",
                        format!("must lie in [0, 1], got {level}"),
                    ));
                }
            }
            CouplingEnvelope::SmoothedBox { t0, tau, s } => {
                positive("t0", t0)?;
                positive("tau", tau)?;
                positive("s", s)?;
            }
            CouplingEnvelope::GaussianTransit { h, nu, w_c } => {
                if !h.is_finite() {
                    return Err(Error::param("h", "must be finite"));
                }
                positive("nu", nu)?;
                positive("w_c", w_c)?;
            }
        }
        Ok(())
    }

    /// Time at which μ reaches its maximum, if the envelope has one.
    pub fn peak_time(&self) -> Option<f64> {
        match *self {
            CouplingEnvelope::Constant { .. } => None,
            CouplingEnvelope::SmoothedBox { t0, tau, .. } => Some(t0 + 0.5 * tau),
            CouplingEnvelope::GaussianTransit { h, nu, .. } => Some(h / nu),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        envelope_value(self, t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        envelope_derivative(self, t)
    }
}

/// Denominator shared by the smoothed-box value and derivative, scaled by
/// e^{-m} with m = max(|y|, b) so nothing overflows:
/// 2(cosh y + cosh b) e^{-m}.
#[inline]
fn scaled_cosh_sum(ay: f64, b: f64, m: f64) -> f64 {
    (ay - m).exp() + (-ay - m).exp() + (b - m).exp() + (-b - m).exp()
}

/// μ(t) for the given envelope.
///
/// The smoothed box is evaluated through the identity
/// `sinh²(y/2) / (cosh(v) cosh(w)) = (cosh y − 1)/(cosh y + cosh(sτ/2))`
/// with `y = s(t − t0 − τ/2)`, which stays finite for any `t`.
pub fn envelope_value(env: &CouplingEnvelope, t: f64) -> f64 {
    match *env {
        CouplingEnvelope::Constant { level } => level,
        CouplingEnvelope::SmoothedBox { t0, tau, s } => {
            let y = s * (t - t0 - 0.5 * tau);
            let ay = y.abs();
            let b = 0.5 * s * tau;
            let m = ay.max(b);
            let one_minus = -(-ay).exp_m1();
            let ratio = (ay - m).exp() * one_minus * one_minus / scaled_cosh_sum(ay, b, m);
            let v = 1.0 - (0.5 * s * t0).tanh() * ratio;
            v.clamp(0.0, 1.0)
        }
        CouplingEnvelope::GaussianTransit { h, nu, w_c } => {
            let z = (h - nu * t) / w_c;
            (-z * z).exp()
        }
    }
}

/// Analytic time derivative μ̇(t).
pub fn envelope_derivative(env: &CouplingEnvelope, t: f64) -> f64 {
    match *env {
        CouplingEnvelope::Constant { .. } => 0.0,
        CouplingEnvelope::SmoothedBox { t0, tau, s } => {
            // d/dy (cosh y − 1)/(cosh y + C) = sinh y (C + 1)/(cosh y + C)²
            let y = s * (t - t0 - 0.5 * tau);
            let ay = y.abs();
            let b = 0.5 * s * tau;
            let m = ay.max(b);
            let den = scaled_cosh_sum(ay, b, m);
            let sinh_part = y.signum() * (ay - m).exp() * (-(-2.0 * ay).exp_m1()) / den;
            let c_plus_one = ((b - m).exp() + (-b - m).exp() + 2.0 * (-m).exp()) / den;
            -(0.5 * s * t0).tanh() * s * sinh_part * c_plus_one
        }
        CouplingEnvelope::GaussianTransit { h, nu, w_c } => {
            let z = (h - nu * t) / w_c;
            2.0 * z * nu / w_c * (-z * z).exp()
        }
    }
}

/// The gauge α_g = 1/(1 + δ) in which the linear coupling conserves
/// excitation number.
pub fn jc_gauge(delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::param("delta", format!("must be > 0, got {delta}")));
    }
    Ok(1.0 / (1.0 + delta))
}

/// Coefficients of the four interaction operators at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InteractionCoefficients {
    /// Coefficient of (a† + a)².
    pub c_quad_a: f64,
    /// Coefficient of (b† + b)².
    pub c_quad_b: f64,
    /// Coefficient of i(ab† − a†b).
    pub u_minus: f64,
    /// Coefficient of i(a†b† − ab).
    pub u_plus: f64,
}

impl InteractionCoefficients {
    /// Coefficients for an explicit coupling level η(t)/η_max.
    pub fn at_level(params: &ModelParams, level: f64) -> Self {
        let eta = params.eta_max * level;
        let omega = params.omega();
        let delta = params.delta;
        let alpha = params.alpha;
        let one_minus = 1.0 - alpha;
        let lin = 0.5 * eta * params.omega_m() * delta.sqrt();
        InteractionCoefficients {
            c_quad_a: 0.25 * eta * eta * omega * one_minus * one_minus,
            c_quad_b: 0.25 * eta * eta * omega * delta * alpha * alpha,
            u_minus: lin * (one_minus + delta * alpha),
            u_plus: lin * (one_minus - delta * alpha),
        }
    }
}

pub fn interaction_coefficients(
    params: &ModelParams,
    env: &CouplingEnvelope,
    t: f64,
) -> InteractionCoefficients {
    InteractionCoefficients::at_level(params, envelope_value(env, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal smoothed-box formula, kept apart from the stable evaluation.
    fn smoothed_box_literal(t0: f64, tau: f64, s: f64, t: f64) -> f64 {
        1.0 - (s * t0 / 2.0).tanh() * (s / 2.0 * (t - tau / 2.0 - t0)).sinh().powi(2)
            / ((s / 2.0 * (t - t0)).cosh() * (s / 2.0 * (tau + t0 - t)).cosh())
    }

    #[test]
    fn smoothed_box_peak_and_half_point() {
        let env = CouplingEnvelope::smoothed_box(5.0, 10.0, 2.0).unwrap();
        assert!((envelope_value(&env, 10.0) - 1.0).abs() < 1e-15);
        // s·min(t0, τ) = 10, tolerance e^{-5}
        assert!((envelope_value(&env, 5.0) - 0.5).abs() < (-5.0f64).exp());
        assert!(envelope_derivative(&env, 10.0).abs() < 1e-15);
    }

    #[test]
    fn smoothed_box_matches_literal_formula() {
        let cases = [
            (5.0, 10.0, 2.0),
            (1.0, 3.0, 0.7),
            (125.0, 250.0, 0.08),
            (0.3, 0.5, 9.0),
        ];
        for &(t0, tau, s) in &cases {
            let env = CouplingEnvelope::smoothed_box(t0, tau, s).unwrap();
            for k in 0..200 {
                let t = -t0 + k as f64 * (3.0 * t0 + 2.0 * tau) / 200.0;
                let lit = smoothed_box_literal(t0, tau, s, t);
                assert!((envelope_value(&env, t) - lit).abs() < 1e-12, "t={t}");
            }
        }
    }

    #[test]
    fn smoothed_box_is_finite_far_from_window() {
        let env = CouplingEnvelope::smoothed_box(5.0, 10.0, 2.0).unwrap();
        for &t in &[-1e6, -700.0, 700.0, 1e6] {
            let v = envelope_value(&env, t);
            let d = envelope_derivative(&env, t);
            assert!(v.is_finite() && (0.0..=1.0).contains(&v));
            assert!(d.is_finite() && d.abs() < 1e-12);
        }
        // tends to 1 − tanh(s t0 / 2)
        let tail = 1.0 - (5.0f64).tanh();
        assert!((envelope_value(&env, 1e4) - tail).abs() < 1e-15);
    }

    #[test]
    fn transit_peak() {
        let env = CouplingEnvelope::gaussian_transit(5.0, 1.0, 1.0).unwrap();
        assert_eq!(envelope_value(&env, 5.0), 1.0);
        assert_eq!(envelope_derivative(&env, 5.0), 0.0);
        assert!((envelope_value(&env, 0.0) - (-25.0f64).exp()).abs() < 1e-25);
    }

    #[test]
    fn constant_has_zero_derivative() {
        let env = CouplingEnvelope::constant(0.3).unwrap();
        assert_eq!(envelope_derivative(&env, 12.0), 0.0);
        assert_eq!(envelope_value(&env, -4.0), 0.3);
    }

    #[test]
    fn envelope_validation() {
        assert!(CouplingEnvelope::constant(1.5).is_err());
        assert!(CouplingEnvelope::smoothed_box(0.0, 1.0, 1.0).is_err());
        assert!(CouplingEnvelope::smoothed_box(1.0, -1.0, 1.0).is_err());
        assert!(CouplingEnvelope::gaussian_transit(1.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn jc_gauge_values() {
        assert_eq!(jc_gauge(1.0).unwrap(), 0.5);
        assert!((jc_gauge(0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(jc_gauge(3.0).unwrap(), 0.25);
        assert!(jc_gauge(0.0).is_err());
        assert!(jc_gauge(-2.0).is_err());
    }

    #[test]
    fn coefficient_limits() {
        let p = ModelParams::new(0.5, 1.0, 0.0).unwrap();
        let c = InteractionCoefficients::at_level(&p, 0.0);
        assert_eq!(c, InteractionCoefficients::default());

        let g = p.with_alpha(jc_gauge(0.5).unwrap());
        assert!(InteractionCoefficients::at_level(&g, 0.8).u_plus.abs() < 1e-15);

        let m = p.with_alpha(1.0);
        assert_eq!(InteractionCoefficients::at_level(&m, 0.8).c_quad_a, 0.0);
    }

    #[test]
    fn rotating_coefficient_is_gauge_independent_at_resonance() {
        let base = ModelParams::new(1.0, 0.7, 0.0).unwrap();
        let u0 = InteractionCoefficients::at_level(&base, 1.0).u_minus;
        for &a in &[-0.5, 0.25, 0.5, 1.0, 2.0] {
            let u = InteractionCoefficients::at_level(&base.with_alpha(a), 1.0).u_minus;
            assert!((u - u0).abs() < 1e-15);
        }
    }

    #[test]
    fn coefficients_from_physical_constants() {
        // e, m, v enter only through e²/(mv) = η²ω²
        let (e, m, v, omega_m) = (0.37_f64, 2.3_f64, 0.9_f64, 1.0_f64);
        let omega = 0.6;
        let eta = e / (omega * (m * v).sqrt());
        let p = ModelParams::new(omega / omega_m, eta, 0.3).unwrap();
        let c = InteractionCoefficients::at_level(&p, 1.0);
        let alpha = 0.3_f64;
        // e²(1−α)²A²/2m with A = (a†+a)/√(2ωv)
        let c_a = e * e * (1.0 - alpha).powi(2) / (2.0 * m) / (2.0 * omega * v);
        // e²α²r²/2v with r = (b†+b)/√(2mω_m)
        let c_b = e * e * alpha * alpha / (2.0 * v) / (2.0 * m * omega_m);
        assert!((c.c_quad_a - c_a).abs() < 1e-14);
        assert!((c.c_quad_b - c_b).abs() < 1e-14);
        assert!((p.coupling_squared(1.0) - e * e / (m * v)).abs() < 1e-14);
        // p-A term: e(1−α) p A / m, p = i√(mω_m/2)(b†−b)
        let k_pa = e * (1.0 - alpha) / m * (m * omega_m / 2.0).sqrt() / (2.0 * omega * v).sqrt();
        // r-Π term: −eα r Π, Π = i√(ω/2v)(a†−a)
        let k_rp = e * alpha * (omega / (2.0 * v)).sqrt() / (2.0 * m * omega_m).sqrt();
        assert!((c.u_minus - (k_pa + k_rp)).abs() < 1e-14);
        assert!((c.u_plus - (k_pa - k_rp)).abs() < 1e-14);
    }
}
