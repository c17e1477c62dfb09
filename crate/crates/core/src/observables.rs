//! Physical quantities extracted from Gaussian states.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{GaussianState, Mode};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::symplectic::{entropy_function, symplectic_eigenvalues};

/// Populations above −1e−9 are treated as zero.
pub const POPULATION_CLIP: f64 = 1e-9;
/// Symplectic eigenvalues below ½ by more than this are rejected.
pub const EIGENVALUE_SLACK: f64 = 1e-7;
/// Contract slack for the entropy-production bound.
pub const BOUND_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    Cavity,
    Matter,
    Both,
}

fn clip_population(n: f64) -> f64 {
    if (-POPULATION_CLIP..0.0).contains(&n) {
        0.0
    } else {
        n
    }
}

/// ⟨a†a⟩ or ⟨b†b⟩.
pub fn photon_number(state: &GaussianState, mode: Mode) -> f64 {
    let m = state.mode_mean(mode);
    let c = state.mode_cov(mode);
    clip_population(0.5 * (c[(0, 0)] + c[(1, 1)] + m[0] * m[0] + m[1] * m[1] - 1.0))
}

/// Cavity frequency ω_α = ω √(1 + η²(1 − α)²) dressed by the diamagnetic
/// term, with η = η_max·coupling_level.
pub fn dressed_cavity_frequency(params: &ModelParams, alpha: f64, coupling_level: f64) -> f64 {
    let eta = params.eta_max * coupling_level;
    let one_minus = 1.0 - alpha;
    params.omega() * (1.0 + eta * eta * one_minus * one_minus).sqrt()
}

/// ⟨c†c⟩ for the cavity mode c that diagonalizes ω(a†a + ½) plus the
/// diamagnetic term, i.e. a single-mode squeeze of a from ω to ω_α:
/// x' = √(ω_α/ω) x, p' = √(ω/ω_α) p.
pub fn renormalized_photon_number(
    state: &GaussianState,
    params: &ModelParams,
    alpha: f64,
    coupling_level: f64,
) -> Result<f64> {
    if !(coupling_level.is_finite() && coupling_level >= 0.0) {
        return Err(Error::param("coupling_level", "must be finite and >= 0"));
    }
    let r = dressed_cavity_frequency(params, alpha, coupling_level) / params.omega();
    let m = state.mode_mean(Mode::Cavity);
    let c = state.mode_cov(Mode::Cavity);
    let xx = c[(0, 0)] + m[0] * m[0];
    let pp = c[(1, 1)] + m[1] * m[1];
    Ok(clip_population(0.5 * (r * xx + pp / r - 1.0)))
}

fn sub_covariance(state: &GaussianState, subset: Subsystem) -> DMatrix<f64> {
    match subset {
        Subsystem::Both => state.cov_dyn(),
        Subsystem::Cavity | Subsystem::Matter => {
            let mode = if subset == Subsystem::Cavity {
                Mode::Cavity
            } else {
                Mode::Matter
            };
            let c = state.mode_cov(mode);
            DMatrix::from_fn(2, 2, |i, j| c[(i, j)])
        }
    }
}

/// Von Neumann entropy in nats, Σ_k f(ν_k) over the symplectic
/// eigenvalues of the selected covariance block.
pub fn entropy(state: &GaussianState, subset: Subsystem) -> Result<f64> {
    let nus = symplectic_eigenvalues(&sub_covariance(state, subset))?;
    let mut s = 0.0;
    for nu in nus {
        if nu < 0.5 - EIGENVALUE_SLACK {
            return Err(Error::InvalidState(format!(
                "symplectic eigenvalue {nu:.9} below 1/2"
            )));
        }
        s += entropy_function(nu.max(0.5));
    }
    Ok(s)
}

/// I = S(cavity) + S(matter) − S(both), clipped at −1e−9 to zero.
pub fn mutual_information(state: &GaussianState) -> Result<f64> {
    let i = entropy(state, Subsystem::Cavity)? + entropy(state, Subsystem::Matter)?
        - entropy(state, Subsystem::Both)?;
    Ok(clip_population(i))
}

/// Bare subsystem energies and their changes against a reference state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub e_c: f64,
    pub e_m: f64,
    pub de_c: f64,
    pub de_m: f64,
    /// Net work ΔE_c + ΔE_m.
    pub work: f64,
}

fn bare_energies(state: &GaussianState, params: &ModelParams) -> (f64, f64) {
    let nc = photon_number(state, Mode::Cavity);
    let nm = photon_number(state, Mode::Matter);
    (params.omega() * (nc + 0.5), params.omega_m() * (nm + 0.5))
}

pub fn energy_report(
    state: &GaussianState,
    reference: &GaussianState,
    params: &ModelParams,
) -> EnergyReport {
    let (e_c, e_m) = bare_energies(state, params);
    let (r_c, r_m) = bare_energies(reference, params);
    let de_c = e_c - r_c;
    let de_m = e_m - r_m;
    EnergyReport {
        e_c,
        e_m,
        de_c,
        de_m,
        work: de_c + de_m,
    }
}

/// β_mΔE_m + β_cΔE_c − I. Non-negative for unitary dynamics started from a
/// product of Gibbs states at inverse temperatures β_m and β_c.
pub fn thermo_bound_residual(
    report: &EnergyReport,
    beta_m: f64,
    beta_c: f64,
    i_final: f64,
) -> Result<f64> {
    for (name, v) in [("beta_m", beta_m), ("beta_c", beta_c)] {
        if !(v > 0.0) {
            return Err(Error::param(name, format!("must be > 0, got {v}")));
        }
    }
    Ok(beta_m * report.de_m + beta_c * report.de_c - i_final)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{thermal_product_state, vacuum_state};
    use nalgebra::{Matrix4, Vector4};

    /// Two-mode squeezed vacuum with squeezing r.
    fn tmsv(r: f64) -> GaussianState {
        let (c, s) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        let cov = Matrix4::new(
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        );
        GaussianState::new(Vector4::zeros(), cov).unwrap()
    }

    #[test]
    fn vacuum_observables() {
        let v = vacuum_state();
        assert_eq!(photon_number(&v, Mode::Cavity), 0.0);
        assert_eq!(photon_number(&v, Mode::Matter), 0.0);
        for s in [Subsystem::Cavity, Subsystem::Matter, Subsystem::Both] {
            assert!(entropy(&v, s).unwrap().abs() < 1e-12);
        }
        assert_eq!(mutual_information(&v).unwrap(), 0.0);
    }

    #[test]
    fn thermal_mode_values() {
        let s = thermal_product_state(2f64.ln(), 1.3).unwrap();
        assert!((photon_number(&s, Mode::Cavity) - 1.0).abs() < 1e-14);
        assert!((entropy(&s, Subsystem::Cavity).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!(mutual_information(&s).unwrap().abs() < 1e-12);
        let nbar = 1.0 / 1.3f64.exp_m1();
        let closed = (nbar + 1.0) * (nbar + 1.0).ln() - nbar * nbar.ln();
        assert!((entropy(&s, Subsystem::Matter).unwrap() - closed).abs() < 1e-12);
    }

    #[test]
    fn pure_two_mode_state_entropies() {
        let r: f64 = 0.6;
        let s = tmsv(r);
        let sc = entropy(&s, Subsystem::Cavity).unwrap();
        let sm = entropy(&s, Subsystem::Matter).unwrap();
        assert!((sc - sm).abs() < 1e-12);
        assert!(entropy(&s, Subsystem::Both).unwrap().abs() < 1e-9);
        assert!((mutual_information(&s).unwrap() - 2.0 * sc).abs() < 1e-9);
        // reduced state is thermal with n̄ = sinh² r
        let n = r.sinh().powi(2);
        assert!((photon_number(&s, Mode::Cavity) - n).abs() < 1e-12);
        let closed = (n + 1.0) * (n + 1.0).ln() - n * n.ln();
        assert!((sc - closed).abs() < 1e-12);
    }

    #[test]
    fn renormalized_number_without_coupling() {
        let p = ModelParams::new(0.5, 1.0, 0.0).unwrap();
        let s = tmsv(0.3);
        let n = photon_number(&s, Mode::Cavity);
        assert!((renormalized_photon_number(&s, &p, 0.0, 0.0).unwrap() - n).abs() < 1e-15);
        assert!((renormalized_photon_number(&s, &p, 1.0, 1.0).unwrap() - n).abs() < 1e-15);
    }

    #[test]
    fn energy_bookkeeping() {
        let p = ModelParams::new(3.0, 1.0, 0.2).unwrap();
        let a = thermal_product_state(1.0, 2.0).unwrap();
        let b = tmsv(0.4);
        let same = energy_report(&a, &a, &p);
        assert_eq!((same.de_c, same.de_m, same.work), (0.0, 0.0, 0.0));
        let r = energy_report(&b, &a, &p);
        assert_eq!(r.work, r.de_c + r.de_m);
        assert!((r.e_c - 3.0 * (photon_number(&b, Mode::Cavity) + 0.5)).abs() < 1e-14);
        assert!(thermo_bound_residual(&r, 0.0, 1.0, 0.0).is_err());
        assert_eq!(thermo_bound_residual(&same, 1.0, 2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn invalid_state_reports_error() {
        let bad = GaussianState {
            mean: Vector4::zeros(),
            cov: Matrix4::identity() * 0.3,
        };
        assert!(entropy(&bad, Subsystem::Cavity).is_err());
    }
}
