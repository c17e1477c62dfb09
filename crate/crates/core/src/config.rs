//! Run configuration for the command-line tool and its named presets.
//!
//! A configuration is a TOML document; unknown keys are rejected. Example:
//!
//! ```toml
//! scenario = "generic_envelope"
//! delta = 0.5
//! eta_max = 1.0
//! alphas = [0.0, "jc", 1.0]
//!
//! [envelope]
//! kind = "smoothed_box"
//! t0 = 5.0
//! tau = 10.0
//! s = 2.0
//!
//! [grid]
//! t_end = 20.0
//! samples = 401
//! ```

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Variant, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::fock::{OracleConfig, DEFAULT_STEPS_PER_CYCLE};
use crate::model::{jc_gauge, CouplingEnvelope, ModelParams};
use crate::transit::{transit_envelope, TransitScenario};

pub const DEFAULT_SAMPLES: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    GenericEnvelope,
    Transit,
    GroundState,
    OracleCompare,
}

/// One gauge value: a number or `"jc"` for α_g = 1/(1+δ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaValue {
    Value(f64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    List(Vec<AlphaValue>),
    Grid(AlphaGrid),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    /// Also evaluate at α_g.
    #[serde(default)]
    pub include_jc: bool,
}

/// A (δ, η_max) pair for multi-curve sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Curve {
    pub delta: f64,
    pub eta_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    #[default]
    Vacuum,
    Thermal {
        beta_omega_c: f64,
        beta_omega_m: f64,
    },
    /// Ground state of the Hamiltonian at the initial coupling.
    InteractingGround,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Defaults to the end of the protocol for transit and box envelopes.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            t_end: None,
            samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    #[serde(default = "default_dims")]
    pub dims: usize,
    #[serde(default = "default_max_dims")]
    pub max_dims: usize,
    #[serde(default = "default_spc")]
    pub steps_per_cycle: usize,
    /// Allowed drift under step doubling and basis doubling.
    #[serde(default = "default_gate_tol")]
    pub gate_tol: f64,
    /// Allowed Gaussian-vs-oracle deviation, raised to the oracle drift
    /// when that is larger.
    #[serde(default = "default_compare_tol")]
    pub compare_tol: f64,
    /// Minimum Boltzmann weight kept when a thermal state is expanded in
    /// Fock states.
    #[serde(default = "default_min_weight")]
    pub min_weight: f64,
}

fn default_dims() -> usize {
    30
}
fn default_max_dims() -> usize {
    60
}
fn default_spc() -> usize {
    DEFAULT_STEPS_PER_CYCLE
}
fn default_gate_tol() -> f64 {
    1e-7
}
fn default_compare_tol() -> f64 {
    1e-6
}
fn default_min_weight() -> f64 {
    1e-12
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            dims: default_dims(),
            max_dims: default_max_dims(),
            steps_per_cycle: default_spc(),
            gate_tol: default_gate_tol(),
            compare_tol: default_compare_tol(),
            min_weight: default_min_weight(),
        }
    }
}

impl OracleSettings {
    pub fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            dims: self.dims,
            max_dims: self.max_dims,
            steps_per_cycle: self.steps_per_cycle,
            gate_tol: self.gate_tol,
        }
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    /// Free-form label used in output headers and fixture keys.
    #[serde(default)]
    pub name: Option<String>,
    pub delta: f64,
    pub eta_max: f64,
    /// Extra (δ, η_max) pairs; when present they replace the top-level pair.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<Curve>,
    pub alphas: AlphaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<CouplingEnvelope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transit: Option<TransitScenario>,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub oracle: OracleSettings,
}

fn default_variant() -> Variant {
    Variant::Standard
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("custom")
    }

    pub fn validate(&self) -> Result<()> {
        for c in self.curves() {
            ModelParams::new(c.delta, c.eta_max, 0.0)?;
            self.alpha_values(c.delta)?;
        }
        if !(self.tol > 1e-14 && self.tol < 1e-3) {
            return Err(Error::Config(format!(
                "tol must lie in (1e-14, 1e-3), got {}",
                self.tol
            )));
        }
        if self.scenario != ScenarioKind::GroundState {
            self.dynamic_envelope()?;
            if self.grid.samples < 2 {
                return Err(Error::Config("grid.samples must be >= 2".into()));
            }
            self.t_end()?;
        }
        match self.variant {
            Variant::Tilde { theta } if !(0.0..=std::f64::consts::PI).contains(&theta) => {
                return Err(Error::Config(format!(
                    "variant.theta must lie in [0, π], got {theta}"
                )));
            }
            _ => {}
        }
        if let InitialSpec::Thermal {
            beta_omega_c,
            beta_omega_m,
        } = self.initial
        {
            if !(beta_omega_c > 0.0 && beta_omega_m > 0.0) {
                return Err(Error::Config(
                    "initial thermal βω values must be > 0".into(),
                ));
            }
        }
        let o = &self.oracle;
        if o.dims < 2 || o.max_dims < o.dims || o.steps_per_cycle == 0 {
            return Err(Error::Config(
                "oracle needs 2 <= dims <= max_dims and steps_per_cycle > 0".into(),
            ));
        }
        if !(o.gate_tol > 0.0 && o.compare_tol > 0.0 && o.min_weight >= 0.0 && o.min_weight < 1.0) {
            return Err(Error::Config(
                "oracle tolerances must be > 0 and min_weight in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// The (δ, η_max) pairs to run.
    pub fn curves(&self) -> Vec<Curve> {
        if self.curves.is_empty() {
            vec![Curve {
                delta: self.delta,
                eta_max: self.eta_max,
            }]
        } else {
            self.curves.clone()
        }
    }

    /// Gauge values for detuning δ, sorted ascending without duplicates.
    pub fn alpha_values(&self, delta: f64) -> Result<Vec<f64>> {
        let ag = jc_gauge(delta)?;
        let mut out = match &self.alphas {
            AlphaSpec::List(items) => {
                if items.is_empty() {
                    return Err(Error::Config("alphas must not be empty".into()));
                }
                items
                    .iter()
                    .map(|v| match v {
                        AlphaValue::Value(a) => Ok(*a),
                        AlphaValue::Named(s) if s == "jc" => Ok(ag),
                        AlphaValue::Named(s) => Err(Error::Config(format!(
                            "unknown alpha name `{s}` (expected \"jc\")"
                        ))),
                    })
                    .collect::<Result<Vec<f64>>>()?
            }
            AlphaSpec::Grid(g) => {
                if g.points == 0
                    || !(g.start.is_finite() && g.end.is_finite())
                    || (g.points == 1 && g.start != g.end)
                {
                    return Err(Error::Config(
                        "alpha grid needs finite bounds and points >= 1".into(),
                    ));
                }
                let mut v: Vec<f64> = if g.points == 1 {
                    vec![g.start]
                } else {
                    (0..g.points)
                        .map(|k| g.start + (g.end - g.start) * k as f64 / (g.points - 1) as f64)
                        .collect()
                };
                if g.include_jc {
                    v.push(ag);
                }
                v
            }
        };
        if out.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("alpha values must be finite".into()));
        }
        out.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        out.dedup();
        Ok(out)
    }

    /// Envelope for dynamical scenarios: from `[transit]` if present,
    /// otherwise from `[envelope]`.
    pub fn dynamic_envelope(&self) -> Result<CouplingEnvelope> {
        match (&self.transit, &self.envelope) {
            (Some(_), Some(_)) => Err(Error::Config(
                "give either [transit] or [envelope], not both".into(),
            )),
            (Some(sc), None) => transit_envelope(sc),
            (None, Some(env)) => {
                if self.scenario == ScenarioKind::Transit {
                    return Err(Error::Config(
                        "transit scenario needs a [transit] table".into(),
                    ));
                }
                env.validate()?;
                Ok(*env)
            }
            (None, None) => Err(Error::Config(
                "dynamical scenarios need [envelope] or [transit]".into(),
            )),
        }
    }

    /// End of the time grid; the grid always starts at t = 0.
    pub fn t_end(&self) -> Result<f64> {
        let t = match self.grid.t_end {
            Some(t) => t,
            None => match (&self.transit, self.dynamic_envelope()?) {
                (Some(sc), _) => sc.exit_time(),
                (None, CouplingEnvelope::SmoothedBox { t0, tau, .. }) => 2.0 * t0 + tau,
                _ => {
                    return Err(Error::Config(
                        "grid.t_end is required for this envelope".into(),
                    ))
                }
            },
        };
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!("grid.t_end must be > 0, got {t}")));
        }
        Ok(t)
    }
}

/// Names accepted by `--preset`.
pub const PRESET_NAMES: [&str; 7] = [
    "fig2",
    "fig3",
    "fig4",
    "fig5",
    "fig6",
    "supp-fig7",
    "supp-fig8",
];

/// Smoothed box used by the box presets: on for τ = 10/ω_m, edges
/// rising over roughly 4/ω_m.
pub fn preset_box() -> CouplingEnvelope {
    CouplingEnvelope::SmoothedBox {
        t0: 5.0,
        tau: 10.0,
        s: 2.0,
    }
}

/// The preset box slowed down by `factor`: t0 and τ scaled up, edge
/// steepness s scaled down, so the switching time grows by `factor`.
pub fn stretched_box(factor: f64) -> Result<CouplingEnvelope> {
    match preset_box() {
        CouplingEnvelope::SmoothedBox { t0, tau, s } => {
            CouplingEnvelope::smoothed_box(t0 * factor, tau * factor, s / factor)
        }
        _ => unreachable!("preset box is a smoothed box"),
    }
}

/// Transit with beam transit time w_c/ν = 1/ω_m, starting five waists out.
pub fn preset_transit(theta: f64) -> TransitScenario {
    TransitScenario {
        ratio_wc: 1.0,
        offset_h: 5.0,
        theta,
    }
}

/// Inverse temperature of the cavity in the thermal preset, as βω_m.
pub const PRESET_BETA_C: f64 = 0.5;

fn base(
    scenario: ScenarioKind,
    name: &str,
    delta: f64,
    eta_max: f64,
    alphas: AlphaSpec,
) -> RunConfig {
    RunConfig {
        scenario,
        name: Some(name.to_string()),
        delta,
        eta_max,
        curves: Vec::new(),
        alphas,
        envelope: None,
        transit: None,
        initial: InitialSpec::Vacuum,
        variant: Variant::Standard,
        grid: GridSpec::default(),
        tol: DEFAULT_TOL,
        output: None,
        oracle: OracleSettings::default(),
    }
}

fn three_gauges() -> AlphaSpec {
    AlphaSpec::List(vec![
        AlphaValue::Value(0.0),
        AlphaValue::Named("jc".into()),
        AlphaValue::Value(1.0),
    ])
}

fn unit_grid(points: usize) -> AlphaSpec {
    AlphaSpec::Grid(AlphaGrid {
        start: 0.0,
        end: 1.0,
        points,
        include_jc: true,
    })
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let cfg = match name {
        "fig2" => RunConfig {
            transit: Some(preset_transit(FRAC_PI_2)),
            ..base(ScenarioKind::Transit, name, 0.5, 1.0, three_gauges())
        },
        "fig3" => RunConfig {
            transit: Some(preset_transit(FRAC_PI_2)),
            variant: Variant::Tilde { theta: FRAC_PI_2 },
            ..base(ScenarioKind::Transit, name, 0.5, 1.0, three_gauges())
        },
        "fig4" => RunConfig {
            envelope: Some(preset_box()),
            ..base(
                ScenarioKind::GenericEnvelope,
                name,
                0.5,
                1.0,
                three_gauges(),
            )
        },
        "fig5" => RunConfig {
            envelope: Some(preset_box()),
            curves: [(0.5, 0.5), (0.5, 1.0), (1.0, 1.0), (2.0, 0.5), (2.0, 1.0)]
                .iter()
                .map(|&(delta, eta_max)| Curve { delta, eta_max })
                .collect(),
            ..base(ScenarioKind::GenericEnvelope, name, 0.5, 1.0, unit_grid(41))
        },
        "fig6" => RunConfig {
            envelope: Some(preset_box()),
            initial: InitialSpec::Thermal {
                beta_omega_c: PRESET_BETA_C * 3.0,
                beta_omega_m: 2.0 * PRESET_BETA_C,
            },
            ..base(ScenarioKind::GenericEnvelope, name, 3.0, 1.0, unit_grid(41))
        },
        "supp-fig7" => RunConfig {
            curves: [0.1, 0.5, 1.0]
                .iter()
                .map(|&eta_max| Curve {
                    delta: 0.5,
                    eta_max,
                })
                .collect(),
            ..base(ScenarioKind::GroundState, name, 0.5, 1.0, unit_grid(101))
        },
        "supp-fig8" => RunConfig {
            curves: [0.1, 0.5, 1.0]
                .iter()
                .map(|&eta_max| Curve {
                    delta: 2.0,
                    eta_max,
                })
                .collect(),
            ..base(ScenarioKind::GroundState, name, 2.0, 1.0, unit_grid(101))
        },
        _ => {
            return Err(Error::Config(format!(
                "unknown preset `{name}`; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
