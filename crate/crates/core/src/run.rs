//! Batch drivers behind the command-line subcommands.
//!
//! Every driver is deterministic: jobs run on the ambient rayon pool but
//! results are collected in input order, so output bytes do not depend on
//! the degree of parallelism.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{InitialSpec, RunConfig, ScenarioKind};
use crate::dynamics::{
    evolve, interacting_ground_state, thermal_product_state, uniform_grid, vacuum_state,
    GaussianState, Mode,
};
use crate::error::{Error, Result};
use crate::fock::{
    converged_ground_state, ground_state_at_level, propagate_converged, FixtureEntry, Fixtures,
    FockSystem, InitialState, OracleSample, FIXTURE_VERSION,
};
use crate::ground_state::{
    derived_frequencies, ground_state_mutual_information, ground_state_photon_number,
    ground_state_renormalized_number,
};
use crate::model::{envelope_value, ModelParams};
use crate::observables::{
    energy_report, mutual_information, photon_number, renormalized_photon_number,
    thermo_bound_residual,
};

/// A CSV table with a commented provenance header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub provenance: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// 17 significant digits; non-finite values print as `NaN`/`inf`.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in &self.provenance {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Header lines shared by every output: tool version, units, tolerance,
/// fixture version and the full resolved configuration.
pub fn provenance(command: &str, cfg: &RunConfig) -> Vec<String> {
    let mut lines = vec![
        format!("tdgauge {} {command}", env!("CARGO_PKG_VERSION")),
        "units: hbar = omega_m = 1; times in 1/omega_m; energies in omega_m".to_string(),
        format!("tolerance: {:e}", cfg.tol),
        format!("fixture_version: {FIXTURE_VERSION}"),
    ];
    if let Some(sc) = &cfg.transit {
        lines.push(format!(
            "transit: t_b = {} / omega_m, offset h/w_c = {}, mu(0) = {:e}",
            sc.ratio_wc,
            sc.offset_h,
            (-sc.offset_h * sc.offset_h).exp()
        ));
    }
    lines.push("config:".to_string());
    for l in cfg.to_toml().lines() {
        lines.push(format!("  {l}"));
    }
    lines
}

fn initial_state(cfg: &RunConfig, params: &ModelParams) -> Result<GaussianState> {
    match cfg.initial {
        InitialSpec::Vacuum => Ok(vacuum_state()),
        InitialSpec::Thermal {
            beta_omega_c,
            beta_omega_m,
        } => thermal_product_state(beta_omega_c, beta_omega_m),
        InitialSpec::InteractingGround => {
            interacting_ground_state(params, envelope_value(&cfg.dynamic_envelope()?, 0.0))
        }
    }
}

fn require_dynamics(cfg: &RunConfig, command: &str) -> Result<()> {
    match cfg.scenario {
        ScenarioKind::GroundState => Err(Error::Config(format!(
            "`{command}` needs a dynamical scenario; use `groundstate` for ground-state curves"
        ))),
        _ => Ok(()),
    }
}

/// (δ, η_max, α) jobs in output order.
fn jobs(cfg: &RunConfig) -> Result<Vec<ModelParams>> {
    let mut out = Vec::new();
    for c in cfg.curves() {
        for a in cfg.alpha_values(c.delta)? {
            out.push(ModelParams::new(c.delta, c.eta_max, a)?);
        }
    }
    Ok(out)
}

struct Trajectory {
    params: ModelParams,
    times: Vec<f64>,
    states: Vec<GaussianState>,
}

fn run_trajectories(cfg: &RunConfig) -> Result<Vec<Trajectory>> {
    let env = cfg.dynamic_envelope()?;
    let grid = uniform_grid(0.0, cfg.t_end()?, cfg.grid.samples)?;
    let jobs = jobs(cfg)?;
    jobs.par_iter()
        .map(|p| {
            let s0 = initial_state(cfg, p)?;
            let tr = evolve(&s0, p, &env, cfg.variant, &grid, cfg.tol)?;
            Ok(Trajectory {
                params: *p,
                times: tr.times,
                states: tr.states,
            })
        })
        .collect()
}

pub const SIMULATE_COLUMNS: [&str; 9] =
    ["t", "alpha", "mu", "n_a", "n_b", "I", "E_c", "E_m", "work"];

/// Time series for each gauge of a single (δ, η_max) pair.
pub fn run_simulate(cfg: &RunConfig) -> Result<Table> {
    require_dynamics(cfg, "simulate")?;
    if cfg.curves.len() > 1 {
        return Err(Error::Config(
            "`simulate` takes a single (delta, eta_max) pair; use `sweep` for curves".into(),
        ));
    }
    let env = cfg.dynamic_envelope()?;
    let mut rows = Vec::new();
    for tr in run_trajectories(cfg)? {
        let s0 = tr.states[0];
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let r = energy_report(s, &s0, &tr.params);
            rows.push(vec![
                *t,
                tr.params.alpha,
                envelope_value(&env, *t),
                photon_number(s, Mode::Cavity),
                photon_number(s, Mode::Matter),
                mutual_information(s)?,
                r.e_c,
                r.e_m,
                r.work,
            ]);
        }
    }
    Ok(Table {
        provenance: provenance("simulate", cfg),
        columns: SIMULATE_COLUMNS.to_vec(),
        rows,
    })
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "delta",
    "eta_max",
    "alpha",
    "n_a_final",
    "I_final",
    "dE_c",
    "dE_m",
    "work",
    "bound_residual",
];

/// Final-time quantities for every (δ, η_max, α). The bound residual
/// β_mΔE_m + β_cΔE_c − I is reported for thermal initial states only.
pub fn run_sweep(cfg: &RunConfig) -> Result<Table> {
    require_dynamics(cfg, "sweep")?;
    let mut rows = Vec::new();
    for tr in run_trajectories(cfg)? {
        let p = &tr.params;
        let s0 = &tr.states[0];
        let s = tr.states.last().expect("non-empty trajectory");
        let r = energy_report(s, s0, p);
        let i = mutual_information(s)?;
        let residual = match cfg.initial {
            InitialSpec::Thermal {
                beta_omega_c,
                beta_omega_m,
            } => {
                thermo_bound_residual(&r, beta_omega_m / p.omega_m(), beta_omega_c / p.omega(), i)?
            }
            _ => f64::NAN,
        };
        rows.push(vec![
            p.delta,
            p.eta_max,
            p.alpha,
            photon_number(s, Mode::Cavity),
            i,
            r.de_c,
            r.de_m,
            r.work,
            residual,
        ]);
    }
    Ok(Table {
        provenance: provenance("sweep", cfg),
        columns: SWEEP_COLUMNS.to_vec(),
        rows,
    })
}

pub const GROUNDSTATE_COLUMNS: [&str; 7] = [
    "delta",
    "eta_max",
    "alpha",
    "I_G",
    "n_a",
    "n_c",
    "omega_alpha",
];

/// Closed-form ground-state curves.
pub fn run_groundstate(cfg: &RunConfig) -> Result<Table> {
    if cfg.scenario != ScenarioKind::GroundState {
        return Err(Error::Config(
            "`groundstate` needs scenario = \"ground_state\"".into(),
        ));
    }
    let rows = jobs(cfg)?
        .iter()
        .map(|p| {
            vec![
                p.delta,
                p.eta_max,
                p.alpha,
                ground_state_mutual_information(p, p.alpha),
                ground_state_photon_number(p, p.alpha),
                ground_state_renormalized_number(p, p.alpha),
                derived_frequencies(p, p.alpha).omega_alpha,
            ]
        })
        .collect();
    Ok(Table {
        provenance: provenance("groundstate", cfg),
        columns: GROUNDSTATE_COLUMNS.to_vec(),
        rows,
    })
}

/// Gaussian-vs-oracle comparison for one (δ, η_max, α).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareEntry {
    pub delta: f64,
    pub eta_max: f64,
    pub alpha: f64,
    pub dims: Option<usize>,
    pub steps_per_cycle: Option<usize>,
    pub step_drift: Option<f64>,
    pub dim_drift: Option<f64>,
    /// Max |Gaussian − oracle| per observable.
    pub deviations: BTreeMap<String, f64>,
    /// Oracle values at the final time (dynamics) or in the ground state.
    pub oracle_values: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub label: String,
    pub description: String,
    pub scenario: ScenarioKind,
    pub entries: Vec<CompareEntry>,
    pub passed: bool,
}

impl OracleReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("oracle comparison `{}` ({:?})\n", self.label, self.scenario);
        for e in &self.entries {
            out.push_str(&format!(
                "delta={} eta_max={} alpha={:.6}: {}",
                e.delta,
                e.eta_max,
                e.alpha,
                if e.passed { "PASS" } else { "FAIL" }
            ));
            if let Some(d) = e.dims {
                out.push_str(&format!(" dims={d}x{d}"));
            }
            if let (Some(sd), Some(dd)) = (e.step_drift, e.dim_drift) {
                out.push_str(&format!(" step_drift={sd:.3e} dim_drift={dd:.3e}"));
            }
            for (k, v) in &e.deviations {
                out.push_str(&format!(" max|d {k}|={v:.3e}"));
            }
            out.push_str(&format!(" tol={:.1e}", e.tolerance));
            if let Some(err) = &e.error {
                out.push_str(&format!(" error: {err}"));
            }
            out.push('\n');
        }
        out.push_str(if self.passed {
            "overall: PASS\n"
        } else {
            "overall: FAIL\n"
        });
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixture entries keyed `label/delta=…/eta_max=…/alpha=…` for every
    /// converged entry.
    pub fn fixtures(&self) -> Fixtures {
        let mut f = Fixtures::new();
        for e in self.entries.iter().filter(|e| e.error.is_none()) {
            let key = fixture_key(&self.label, e.delta, e.eta_max, e.alpha);
            f.entries.insert(
                key,
                FixtureEntry {
                    description: self.description.clone(),
                    dims: e.dims.unwrap_or(0),
                    steps_per_cycle: e.steps_per_cycle.unwrap_or(0),
                    step_drift: e.step_drift.unwrap_or(0.0),
                    dim_drift: e.dim_drift.unwrap_or(0.0),
                    values: e.oracle_values.clone(),
                },
            );
        }
        f
    }
}

pub fn fixture_key(label: &str, delta: f64, eta_max: f64, alpha: f64) -> String {
    format!("{label}/delta={delta}/eta_max={eta_max}/alpha={alpha}")
}

fn failed_entry(p: &ModelParams, tolerance: f64, err: &Error) -> CompareEntry {
    CompareEntry {
        delta: p.delta,
        eta_max: p.eta_max,
        alpha: p.alpha,
        dims: None,
        steps_per_cycle: None,
        step_drift: None,
        dim_drift: None,
        deviations: BTreeMap::new(),
        oracle_values: BTreeMap::new(),
        tolerance,
        passed: false,
        error: Some(err.to_string()),
    }
}

fn oracle_initial(cfg: &RunConfig, sys: &FockSystem, p: &ModelParams) -> Result<InitialState> {
    match cfg.initial {
        InitialSpec::Vacuum => Ok(InitialState::Pure(sys.basis_state(0, 0))),
        InitialSpec::Thermal {
            beta_omega_c,
            beta_omega_m,
        } => InitialState::thermal(sys, beta_omega_c, beta_omega_m, cfg.oracle.min_weight),
        InitialSpec::InteractingGround => {
            let level = envelope_value(&cfg.dynamic_envelope()?, 0.0);
            Ok(InitialState::Pure(ground_state_at_level(sys, p, level)?.0))
        }
    }
}

fn compare_dynamics(cfg: &RunConfig, p: &ModelParams) -> Result<CompareEntry> {
    let env = cfg.dynamic_envelope()?;
    let grid = uniform_grid(0.0, cfg.t_end()?, cfg.grid.samples)?;
    let s0 = initial_state(cfg, p)?;
    let tr = evolve(&s0, p, &env, cfg.variant, &grid, cfg.tol)?;
    let run = propagate_converged(
        &cfg.oracle.oracle_config(),
        |sys| oracle_initial(cfg, sys, p),
        p,
        &env,
        cfg.variant,
        &grid,
    )?;
    let gaussian: Vec<OracleSample> = tr
        .states
        .iter()
        .zip(&tr.times)
        .map(|(s, &t)| -> Result<OracleSample> {
            let m = s.mode_mean(Mode::Cavity);
            let mb = s.mode_mean(Mode::Matter);
            Ok(OracleSample {
                t,
                n_a: photon_number(s, Mode::Cavity),
                n_b: photon_number(s, Mode::Matter),
                mutual_information: mutual_information(s)?,
                mean_a: num_complex::Complex64::new(m[0], m[1]) / std::f64::consts::SQRT_2,
                mean_b: num_complex::Complex64::new(mb[0], mb[1]) / std::f64::consts::SQRT_2,
                norm: 1.0,
            })
        })
        .collect::<Result<_>>()?;
    let dev = |f: &dyn Fn(&OracleSample) -> f64| {
        gaussian
            .iter()
            .zip(&run.samples)
            .map(|(g, o)| (f(g) - f(o)).abs())
            .fold(0.0, f64::max)
    };
    let mut deviations = BTreeMap::new();
    deviations.insert("n_a".to_string(), dev(&|s| s.n_a));
    deviations.insert("n_b".to_string(), dev(&|s| s.n_b));
    deviations.insert("I".to_string(), dev(&|s| s.mutual_information));
    deviations.insert("mean_a".to_string(), dev(&|s| s.mean_a.norm()));
    let last = run.samples.last().expect("non-empty");
    let mut oracle_values = BTreeMap::new();
    oracle_values.insert("t_final".to_string(), last.t);
    oracle_values.insert("n_a".to_string(), last.n_a);
    oracle_values.insert("n_b".to_string(), last.n_b);
    oracle_values.insert("I".to_string(), last.mutual_information);
    let tolerance = cfg
        .oracle
        .compare_tol
        .max(run.step_drift)
        .max(run.dim_drift);
    let passed = deviations.values().all(|&d| d <= tolerance);
    Ok(CompareEntry {
        delta: p.delta,
        eta_max: p.eta_max,
        alpha: p.alpha,
        dims: Some(run.dims.0),
        steps_per_cycle: Some(run.steps_per_cycle),
        step_drift: Some(run.step_drift),
        dim_drift: Some(run.dim_drift),
        deviations,
        oracle_values,
        tolerance,
        passed,
        error: None,
    })
}

fn compare_ground_state(cfg: &RunConfig, p: &ModelParams) -> Result<CompareEntry> {
    let run = converged_ground_state(&cfg.oracle.oracle_config(), p)?;
    let o = &run.observables;
    let r = derived_frequencies(p, p.alpha).omega_alpha / p.omega();
    let n_c = 0.5 * (r * o.x_c2 + o.p_c2 / r - 1.0);
    let g = interacting_ground_state(p, 1.0)?;
    let mut deviations = BTreeMap::new();
    deviations.insert(
        "I_G".to_string(),
        (ground_state_mutual_information(p, p.alpha) - o.mutual_information).abs(),
    );
    deviations.insert(
        "n_a".to_string(),
        (ground_state_photon_number(p, p.alpha) - o.n_a).abs(),
    );
    deviations.insert(
        "n_c".to_string(),
        (ground_state_renormalized_number(p, p.alpha) - n_c).abs(),
    );
    deviations.insert(
        "gaussian_I".to_string(),
        (mutual_information(&g)? - o.mutual_information).abs(),
    );
    deviations.insert(
        "gaussian_n_c".to_string(),
        (renormalized_photon_number(&g, p, p.alpha, 1.0)? - n_c).abs(),
    );
    let mut oracle_values = BTreeMap::new();
    oracle_values.insert("energy".to_string(), run.energy);
    oracle_values.insert("n_a".to_string(), o.n_a);
    oracle_values.insert("n_b".to_string(), o.n_b);
    oracle_values.insert("n_c".to_string(), n_c);
    oracle_values.insert("I".to_string(), o.mutual_information);
    let tolerance = cfg.oracle.compare_tol.max(run.dim_drift);
    let passed = deviations.values().all(|&d| d <= tolerance);
    Ok(CompareEntry {
        delta: p.delta,
        eta_max: p.eta_max,
        alpha: p.alpha,
        dims: Some(run.system.dim_a),
        steps_per_cycle: None,
        step_drift: None,
        dim_drift: Some(run.dim_drift),
        deviations,
        oracle_values,
        tolerance,
        passed,
        error: None,
    })
}

/// Compare the Gaussian path (or the closed forms, for ground-state
/// scenarios) with the truncated-Fock oracle for every job in `cfg`.
/// Numerical failures of individual jobs are recorded in the report.
pub fn run_oracle_compare(cfg: &RunConfig) -> Result<OracleReport> {
    let entries: Vec<CompareEntry> = jobs(cfg)?
        .par_iter()
        .map(|p| {
            let res = if cfg.scenario == ScenarioKind::GroundState {
                compare_ground_state(cfg, p)
            } else {
                compare_dynamics(cfg, p)
            };
            match res {
                Ok(e) => Ok(e),
                Err(e) if e.is_numerical() => Ok(failed_entry(p, cfg.oracle.compare_tol, &e)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let passed = entries.iter().all(|e| e.passed);
    let description = if cfg.scenario == ScenarioKind::GroundState {
        "exact ground state at constant coupling".to_string()
    } else {
        format!(
            "oracle values at t = {}, {:?} initial state, {:?} dynamics",
            cfg.t_end()?,
            cfg.initial,
            cfg.variant
        )
    };
    Ok(OracleReport {
        label: cfg.label().to_string(),
        description,
        scenario: cfg.scenario,
        entries,
        passed,
    })
}
