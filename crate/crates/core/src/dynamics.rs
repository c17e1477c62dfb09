//! Gaussian-moment dynamics of the two-mode model.
//!
//! Quadratures are ordered r = (x_c, p_c, x_m, p_m) with
//! a = (x_c + i p_c)/√2 and b = (x_m + i p_m)/√2. A quadratic Hamiltonian
//! H = ½ rᵀ G r evolves first and second moments through
//!
//! ```text
//! d⟨r⟩/dt = A ⟨r⟩,    dσ/dt = A σ + σ Aᵀ,    A = Ω G
//! ```
//!
//! with σ_ij = ½⟨{r_i − ⟨r_i⟩, r_j − ⟨r_j⟩}⟩ (vacuum σ = I/2).

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{envelope_value, CouplingEnvelope, InteractionCoefficients, ModelParams};
use crate::ode::{dopri5, StepControl};
use crate::symplectic::{heisenberg_min_eigenvalue, sym_sqrt, symplectic_eigenvalues};
use crate::transit;

/// Positivity slack for a state handed in by the caller.
pub const STATE_POSITIVITY_TOL: f64 = 1e-9;
/// Positivity slack beyond which integration is declared broken.
pub const BREAKDOWN_POSITIVITY_TOL: f64 = 1e-6;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cavity,
    Matter,
}

impl Mode {
    fn offset(self) -> usize {
        match self {
            Mode::Cavity => 0,
            Mode::Matter => 2,
        }
    }
}

/// Which Hamiltonian family drives the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Variant {
    /// H^α(t): coupling imposed as an external function of time.
    Standard,
    /// H̃^α(t) for a dipole whose polarization makes angle `theta` with the
    /// direction of motion.
    Tilde { theta: f64 },
    /// H̃^α(t) averaged over uniformly random orientations.
    TildeAveraged,
}

/// First and second moments of a two-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl GaussianState {
    /// Validated constructor: `cov` must be symmetric and satisfy the
    /// uncertainty relation σ + (i/2)Ω ⪰ 0.
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>) -> Result<Self> {
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite moment".into()));
        }
        let asym = (cov - cov.transpose()).amax();
        if asym > 1e-12 * cov.amax().max(1.0) {
            return Err(Error::InvalidState(format!(
                "covariance not symmetric ({asym:.2e})"
            )));
        }
        let s = GaussianState {
            mean,
            cov: symmetrized(&cov),
        };
        let m = s.heisenberg_min_eigenvalue();
        if m < -STATE_POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "uncertainty relation violated (min eigenvalue {m:.3e})"
            )));
        }
        Ok(s)
    }

    pub fn cov_dyn(&self) -> DMatrix<f64> {
        DMatrix::from_fn(4, 4, |i, j| self.cov[(i, j)])
    }

    pub fn mode_mean(&self, mode: Mode) -> Vector2<f64> {
        let o = mode.offset();
        Vector2::new(self.mean[o], self.mean[o + 1])
    }

    pub fn mode_cov(&self, mode: Mode) -> Matrix2<f64> {
        let o = mode.offset();
        Matrix2::new(
            self.cov[(o, o)],
            self.cov[(o, o + 1)],
            self.cov[(o + 1, o)],
            self.cov[(o + 1, o + 1)],
        )
    }

    /// Minimum eigenvalue of σ + (i/2)Ω.
    pub fn heisenberg_min_eigenvalue(&self) -> f64 {
        heisenberg_min_eigenvalue(&self.cov_dyn())
    }

    /// det(2σ); equal to one for pure states.
    pub fn det_2sigma(&self) -> f64 {
        (self.cov * 2.0).determinant()
    }

    /// Both symplectic eigenvalues, ascending.
    pub fn symplectic_eigenvalues(&self) -> Result<[f64; 2]> {
        let v = symplectic_eigenvalues(&self.cov_dyn())?;
        Ok([v[0], v[1]])
    }

    /// Apply the symplectic-affine map r → S r + d.
    pub fn transformed(&self, s: &Matrix4<f64>, shift: &Vector4<f64>) -> GaussianState {
        GaussianState {
            mean: s * self.mean + shift,
            cov: symmetrized(&(s * self.cov * s.transpose())),
        }
    }
}

fn symmetrized(m: &Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

/// The product vacuum |0, 0⟩.
pub fn vacuum_state() -> GaussianState {
    GaussianState {
        mean: Vector4::zeros(),
        cov: Matrix4::identity() * 0.5,
    }
}

/// Mean occupation of a thermal mode, n̄ = 1/(e^{βω} − 1).
pub fn thermal_occupation(beta_omega: f64) -> f64 {
    1.0 / beta_omega.exp_m1()
}

/// Product of two Gibbs states, parameterized by the dimensionless
/// products βω for the cavity and the matter oscillator.
pub fn thermal_product_state(beta_omega_c: f64, beta_omega_m: f64) -> Result<GaussianState> {
    for (name, v) in [
        ("beta_omega_c", beta_omega_c),
        ("beta_omega_m", beta_omega_m),
    ] {
        if v.is_nan() || v <= 0.0 {
            return Err(Error::param(name, format!("must be > 0, got {v}")));
        }
    }
    let nc = thermal_occupation(beta_omega_c) + 0.5;
    let nm = thermal_occupation(beta_omega_m) + 0.5;
    Ok(GaussianState {
        mean: Vector4::zeros(),
        cov: Matrix4::from_diagonal(&Vector4::new(nc, nc, nm, nm)),
    })
}

/// H = ½ rᵀ G r + offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticGenerator {
    pub g: Matrix4<f64>,
    /// Scalar energy shift. The quadrature form above reproduces every
    /// operator term including the zero-point energies, so this is zero for
    /// the models built here.
    pub offset: f64,
}

impl QuadraticGenerator {
    /// Drift matrix A = ΩG.
    pub fn drift(&self) -> Matrix4<f64> {
        omega4() * self.g
    }

    /// ⟨H⟩ in the given state.
    pub fn expectation(&self, state: &GaussianState) -> f64 {
        0.5 * (self.g * state.cov).trace()
            + 0.5 * state.mean.dot(&(self.g * state.mean))
            + self.offset
    }
}

pub(crate) fn omega4() -> Matrix4<f64> {
    let mut om = Matrix4::zeros();
    om[(0, 1)] = 1.0;
    om[(1, 0)] = -1.0;
    om[(2, 3)] = 1.0;
    om[(3, 2)] = -1.0;
    om
}

/// Generator for explicit interaction coefficients plus a
/// (a† + a)(b† + b) coupling of strength `kappa`.
///
/// In quadratures:
/// (a†+a)² = 2x_c², i(ab†−a†b) = x_c p_m − p_c x_m,
/// i(a†b†−ab) = x_c p_m + p_c x_m, (a†+a)(b†+b) = 2 x_c x_m.
pub fn generator_from_coefficients(
    params: &ModelParams,
    c: &InteractionCoefficients,
    kappa: f64,
) -> QuadraticGenerator {
    let omega = params.omega();
    let omega_m = params.omega_m();
    let mut g = Matrix4::from_diagonal(&Vector4::new(
        omega + 4.0 * c.c_quad_a,
        omega,
        omega_m + 4.0 * c.c_quad_b,
        omega_m,
    ));
    let xc_pm = c.u_minus + c.u_plus;
    let pc_xm = c.u_plus - c.u_minus;
    g[(0, 3)] = xc_pm;
    g[(3, 0)] = xc_pm;
    g[(1, 2)] = pc_xm;
    g[(2, 1)] = pc_xm;
    g[(0, 2)] = 2.0 * kappa;
    g[(2, 0)] = 2.0 * kappa;
    QuadraticGenerator { g, offset: 0.0 }
}

/// Quadratic generator of H^α(t) or H̃^α(t) at time `t`.
pub fn build_generator(
    params: &ModelParams,
    env: &CouplingEnvelope,
    t: f64,
    variant: Variant,
) -> QuadraticGenerator {
    let c = InteractionCoefficients::at_level(params, envelope_value(env, t));
    let kappa = transit::variant_correction(params, env, t, variant);
    generator_from_coefficients(params, &c, kappa)
}

/// A sampled trajectory together with the inputs that produced it.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<GaussianState>,
    pub params: ModelParams,
    pub envelope: CouplingEnvelope,
    pub variant: Variant,
}

impl TrajectoryRecord {
    pub fn final_state(&self) -> &GaussianState {
        self.states
            .last()
            .expect("trajectory holds at least one state")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub tol: f64,
    /// Overrides the default cap 1/(50·max(ω, ω_m)) on the internal step.
    pub max_step: Option<f64>,
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        EvolveOptions {
            tol,
            max_step: None,
        }
    }
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions::with_tol(DEFAULT_TOL)
    }
}

pub fn default_max_step(params: &ModelParams) -> f64 {
    1.0 / (50.0 * params.omega().max(params.omega_m()))
}

/// Integrate the moment equations from `state0` at `t_grid[0]` through
/// every grid time.
pub fn evolve(
    state0: &GaussianState,
    params: &ModelParams,
    env: &CouplingEnvelope,
    variant: Variant,
    t_grid: &[f64],
    tol: f64,
) -> Result<TrajectoryRecord> {
    evolve_with(
        state0,
        params,
        env,
        variant,
        t_grid,
        &EvolveOptions::with_tol(tol),
    )
}

pub fn evolve_with(
    state0: &GaussianState,
    params: &ModelParams,
    env: &CouplingEnvelope,
    variant: Variant,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<TrajectoryRecord> {
    params.validate()?;
    env.validate()?;
    if !(opts.tol > 1e-14 && opts.tol < 1e-3) {
        return Err(Error::param(
            "tol",
            format!("must lie in (1e-14, 1e-3), got {}", opts.tol),
        ));
    }
    if t_grid.is_empty() {
        return Err(Error::param("t_grid", "must not be empty"));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(
            "t_grid",
            "must be finite and strictly increasing",
        ));
    }
    if let Variant::Tilde { theta } = variant {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::param(
                "theta",
                format!("must lie in [0, π], got {theta}"),
            ));
        }
    }
    let max_step = opts.max_step.unwrap_or_else(|| default_max_step(params));
    if !(max_step > 0.0) {
        return Err(Error::param("max_step", "must be > 0"));
    }

    let mut y0 = vec![0.0; 20];
    y0[..4].copy_from_slice(state0.mean.as_slice());
    for i in 0..4 {
        for j in 0..4 {
            y0[4 + 4 * i + j] = state0.cov[(i, j)];
        }
    }

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let a = build_generator(params, env, t, variant).drift();
        let m = Vector4::from_column_slice(&y[..4]);
        let s = Matrix4::from_row_slice(&y[4..]);
        let dm = a * m;
        let as_ = a * s;
        let ds = as_ + as_.transpose();
        dy[..4].copy_from_slice(dm.as_slice());
        for i in 0..4 {
            for j in 0..4 {
                dy[4 + 4 * i + j] = ds[(i, j)];
            }
        }
    };
    let symmetrize = |_t: f64, y: &mut [f64]| {
        for i in 0..4 {
            for j in (i + 1)..4 {
                let v = 0.5 * (y[4 + 4 * i + j] + y[4 + 4 * j + i]);
                y[4 + 4 * i + j] = v;
                y[4 + 4 * j + i] = v;
            }
        }
    };
    let span = t_grid[t_grid.len() - 1] - t_grid[0];
    let ctl = StepControl {
        tol: opts.tol,
        max_step,
        max_steps: 1000 + 50 * (span / max_step).ceil() as usize,
    };
    let ys = dopri5(rhs, symmetrize, t_grid[0], &y0, t_grid, &ctl)?;

    let mut states = Vec::with_capacity(ys.len());
    for (t, y) in t_grid.iter().zip(ys) {
        let s = GaussianState {
            mean: Vector4::from_column_slice(&y[..4]),
            cov: Matrix4::from_row_slice(&y[4..]),
        };
        let m = s.heisenberg_min_eigenvalue();
        if !(m >= -BREAKDOWN_POSITIVITY_TOL) {
            return Err(Error::Integration {
                t: *t,
                reason: format!("uncertainty relation violated (min eigenvalue {m:.3e})"),
            });
        }
        states.push(s);
    }
    Ok(TrajectoryRecord {
        times: t_grid.to_vec(),
        states,
        params: *params,
        envelope: *env,
        variant,
    })
}

/// Uniform grid of `samples` points on [t_start, t_end].
pub fn uniform_grid(t_start: f64, t_end: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 || !(t_end > t_start) {
        return Err(Error::param(
            "grid",
            format!("need samples >= 2 and t_end > t_start (got {samples}, [{t_start}, {t_end}])"),
        ));
    }
    let dt = (t_end - t_start) / (samples - 1) as f64;
    let mut g: Vec<f64> = (0..samples).map(|k| t_start + k as f64 * dt).collect();
    g[samples - 1] = t_end;
    Ok(g)
}

/// Normal-mode frequencies of a static quadratic Hamiltonian, ascending.
/// Fails if the Hamiltonian is not bounded below.
pub fn normal_mode_frequencies(gen: &QuadraticGenerator) -> Result<[f64; 2]> {
    let (_, freqs) = ground_covariance(gen)?;
    Ok(freqs)
}

/// Ground-state covariance σ = ½ G^{-1/2} (G^{1/2} Ωᵀ G Ω G^{1/2})^{1/2} G^{-1/2}
/// together with the normal-mode frequencies.
fn ground_covariance(gen: &QuadraticGenerator) -> Result<(Matrix4<f64>, [f64; 2])> {
    let g = DMatrix::from_fn(4, 4, |i, j| gen.g[(i, j)]);
    let eig = SymmetricEigen::new(g.clone());
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(Error::Instability(format!(
            "static Hamiltonian is not bounded below (smallest eigenvalue of G is {min:.3e})"
        )));
    }
    let root = sym_sqrt(&g).expect("positive definite");
    let inv_root = {
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        &eig.eigenvectors * d * eig.eigenvectors.transpose()
    };
    let om = DMatrix::from_fn(4, 4, |i, j| omega4()[(i, j)]);
    let m = &root * &om * &root;
    let mmt = &m * m.transpose();
    let meig = SymmetricEigen::new(mmt.clone());
    let mut sq: Vec<f64> = meig.eigenvalues.iter().copied().collect();
    sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sq[0] <= 0.0 {
        return Err(Error::Instability("non-real normal-mode frequency".into()));
    }
    let freqs = [sq[0].sqrt(), sq[2].sqrt()];
    let abs_m = sym_sqrt(&mmt).expect("positive semidefinite");
    let cov = (&inv_root * abs_m * &inv_root) * 0.5;
    let cov4 = Matrix4::from_fn(|i, j| cov[(i, j)]);
    Ok((symmetrized(&cov4), freqs))
}

/// Ground state of the static Hamiltonian with the coupling held at
/// `coupling_level` (so η = η_max·coupling_level).
pub fn interacting_ground_state(
    params: &ModelParams,
    coupling_level: f64,
) -> Result<GaussianState> {
    params.validate()?;
    if !(coupling_level.is_finite() && coupling_level >= 0.0) {
        return Err(Error::param("coupling_level", "must be finite and >= 0"));
    }
    let c = InteractionCoefficients::at_level(params, coupling_level);
    let gen = generator_from_coefficients(params, &c, 0.0);
    let (cov, _) = ground_covariance(&gen)?;
    Ok(GaussianState {
        mean: Vector4::zeros(),
        cov,
    })
}
