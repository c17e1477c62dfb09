//! Brute-force reference for the two-mode model on a truncated Fock basis.
//!
//! Basis index of |n_a, n_b⟩ is `n_a * dim_b + n_b`. Operator products such
//! as (a† + a)² are formed from the truncated single-mode matrices, so
//! [a, a†] = 1 holds everywhere except on the top level of each mode.
//!
//! States are propagated with fixed-step classical RK4. The Hamiltonian is
//! stored as a handful of sparse term matrices sharing one sparsity pattern;
//! `build_hamiltonian` assembles the dense matrix for inspection.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Variant;
use crate::error::{Error, Result};
use crate::model::{envelope_value, CouplingEnvelope, InteractionCoefficients, ModelParams};
use crate::transit::variant_correction;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Term order: a†a, b†b, identity, (a†+a)², (b†+b)², i(ab†−a†b),
/// i(a†b†−ab), (a†+a)(b†+b).
const N_TERMS: usize = 8;

#[derive(Debug, Clone)]
pub struct FockSystem {
    pub dim_a: usize,
    pub dim_b: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    terms: [Vec<Complex64>; N_TERMS],
    /// Max absolute row sum of each term, for step-size bounds.
    term_norms: [f64; N_TERMS],
}

type Entries = Vec<(usize, usize, Complex64)>;

fn lowering(dim: usize) -> Entries {
    (1..dim)
        .map(|n| (n - 1, n, Complex64::new((n as f64).sqrt(), 0.0)))
        .collect()
}

fn raising(dim: usize) -> Entries {
    (1..dim)
        .map(|n| (n, n - 1, Complex64::new((n as f64).sqrt(), 0.0)))
        .collect()
}

fn number(dim: usize) -> Entries {
    (0..dim)
        .map(|n| (n, n, Complex64::new(n as f64, 0.0)))
        .collect()
}

fn identity(dim: usize) -> Entries {
    (0..dim).map(|n| (n, n, Complex64::new(1.0, 0.0))).collect()
}

fn position(dim: usize) -> Entries {
    let mut e = lowering(dim);
    e.extend(raising(dim));
    e
}

fn to_dense(dim: usize, e: &Entries) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(dim, dim);
    for &(i, j, v) in e {
        m[(i, j)] += v;
    }
    m
}

fn from_dense(m: &DMatrix<Complex64>) -> Entries {
    let mut e = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != ZERO {
                e.push((i, j, m[(i, j)]));
            }
        }
    }
    e
}

fn square(dim: usize, e: &Entries) -> Entries {
    let d = to_dense(dim, e);
    from_dense(&(&d * &d))
}

impl FockSystem {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a < 2 || dim_b < 2 {
            return Err(Error::param(
                "dims",
                format!("need at least 2 levels per mode, got {dim_a}x{dim_b}"),
            ));
        }
        let dim = dim_a * dim_b;
        let (aa, ad_a) = (lowering(dim_a), raising(dim_a));
        let (bb, bd_b) = (lowering(dim_b), raising(dim_b));
        let xa = position(dim_a);
        let xb = position(dim_b);
        let one = Complex64::new(1.0, 0.0);
        // (factor on a, factor on b, coefficient)
        let products: [Vec<(Entries, Entries, Complex64)>; N_TERMS] = [
            vec![(number(dim_a), identity(dim_b), one)],
            vec![(identity(dim_a), number(dim_b), one)],
            vec![(identity(dim_a), identity(dim_b), one)],
            vec![(square(dim_a, &xa), identity(dim_b), one)],
            vec![(identity(dim_a), square(dim_b, &xb), one)],
            vec![
                (aa.clone(), bd_b.clone(), I),
                (ad_a.clone(), bb.clone(), -I),
            ],
            vec![(ad_a, bd_b, I), (aa, bb, -I)],
            vec![(xa, xb, one)],
        ];
        let mut map: BTreeMap<(usize, usize), [Complex64; N_TERMS]> = BTreeMap::new();
        for (k, list) in products.iter().enumerate() {
            for (fa, fb, c) in list {
                for &(ia, ja, va) in fa {
                    for &(ib, jb, vb) in fb {
                        let key = (ia * dim_b + ib, ja * dim_b + jb);
                        map.entry(key).or_insert([ZERO; N_TERMS])[k] += c * va * vb;
                    }
                }
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(map.len());
        let mut terms: [Vec<Complex64>; N_TERMS] = Default::default();
        for (&(r, c), vals) in &map {
            row_ptr[r + 1] += 1;
            cols.push(c);
            for k in 0..N_TERMS {
                terms[k].push(vals[k]);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut term_norms = [0.0f64; N_TERMS];
        for k in 0..N_TERMS {
            for r in 0..dim {
                let s: f64 = (row_ptr[r]..row_ptr[r + 1])
                    .map(|z| terms[k][z].norm())
                    .sum();
                term_norms[k] = term_norms[k].max(s);
            }
        }
        Ok(FockSystem {
            dim_a,
            dim_b,
            row_ptr,
            cols,
            terms,
            term_norms,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * self.dim_b + n_b
    }

    /// Product basis state |n_a, n_b⟩.
    pub fn basis_state(&self, n_a: usize, n_b: usize) -> DVector<Complex64> {
        let mut v = DVector::zeros(self.dim());
        v[self.index(n_a, n_b)] = Complex64::new(1.0, 0.0);
        v
    }

    /// Truncated product coherent state |β_a⟩|β_b⟩, renormalized.
    pub fn coherent_state(&self, beta_a: Complex64, beta_b: Complex64) -> DVector<Complex64> {
        fn amplitudes(dim: usize, beta: Complex64) -> Vec<Complex64> {
            let mut out = Vec::with_capacity(dim);
            let mut c = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
            for n in 0..dim {
                if n > 0 {
                    c = c * beta / (n as f64).sqrt();
                }
                out.push(c);
            }
            out
        }
        let ca = amplitudes(self.dim_a, beta_a);
        let cb = amplitudes(self.dim_b, beta_b);
        let mut v = DVector::from_fn(self.dim(), |i, _| ca[i / self.dim_b] * cb[i % self.dim_b]);
        let n = v.norm();
        v /= Complex64::new(n, 0.0);
        v
    }

    fn coefficients(
        &self,
        params: &ModelParams,
        env: &CouplingEnvelope,
        t: f64,
        variant: Variant,
    ) -> [f64; N_TERMS] {
        let c = InteractionCoefficients::at_level(params, envelope_value(env, t));
        let kappa = variant_correction(params, env, t, variant);
        self.coefficients_from(params, &c, kappa)
    }

    fn coefficients_from(
        &self,
        params: &ModelParams,
        c: &InteractionCoefficients,
        kappa: f64,
    ) -> [f64; N_TERMS] {
        let (w, wm) = (params.omega(), params.omega_m());
        [
            w,
            wm,
            0.5 * (w + wm),
            c.c_quad_a,
            c.c_quad_b,
            c.u_minus,
            c.u_plus,
            kappa,
        ]
    }

    fn norm_bound(&self, coeffs: &[f64; N_TERMS]) -> f64 {
        coeffs
            .iter()
            .zip(&self.term_norms)
            .map(|(c, n)| c.abs() * n)
            .sum()
    }

    fn assemble(&self, coeffs: &[f64; N_TERMS], vals: &mut Vec<Complex64>) {
        vals.clear();
        vals.resize(self.cols.len(), ZERO);
        for (k, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                for (v, t) in vals.iter_mut().zip(&self.terms[k]) {
                    *v += t * c;
                }
            }
        }
    }

    /// out = −i H ψ with H given by assembled values.
    fn apply_minus_i(&self, vals: &[Complex64], psi: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate().take(self.dim()) {
            let mut acc = ZERO;
            for z in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += vals[z] * psi[self.cols[z]];
            }
            *o = Complex64::new(acc.im, -acc.re);
        }
    }

    fn apply(&self, vals: &[Complex64], psi: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate().take(self.dim()) {
            let mut acc = ZERO;
            for z in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += vals[z] * psi[self.cols[z]];
            }
            *o = acc;
        }
    }

    fn dense_from_values(&self, vals: &[Complex64]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for r in 0..self.dim() {
            for z in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[z])] += vals[z];
            }
        }
        m
    }

    /// Dense matrix of a*, b*-independent single terms, for tests and reports.
    pub fn free_hamiltonian(&self, params: &ModelParams) -> DMatrix<Complex64> {
        let mut coeffs = [0.0; N_TERMS];
        coeffs[0] = params.omega();
        coeffs[1] = params.omega_m();
        coeffs[2] = 0.5 * (params.omega() + params.omega_m());
        let mut vals = Vec::new();
        self.assemble(&coeffs, &mut vals);
        self.dense_from_values(&vals)
    }

    /// Dense matrix of one interaction operator, selected by name:
    /// `"xa2"`, `"xb2"`, `"rotating"`, `"counter_rotating"`, `"xaxb"`.
    pub fn operator(&self, name: &str) -> Result<DMatrix<Complex64>> {
        let k = match name {
            "na" => 0,
            "nb" => 1,
            "xa2" => 3,
            "xb2" => 4,
            "rotating" => 5,
            "counter_rotating" => 6,
            "xaxb" => 7,
            _ => {
                return Err(Error::param(
                    "operator",
                    format!("unknown operator `{name}`"),
                ))
            }
        };
        Ok(self.dense_from_values(&self.terms[k]))
    }
}

/// Dense Hermitian matrix of H^α(t) (standard) or H̃^α(t) (tilde variants).
pub fn build_hamiltonian(
    sys: &FockSystem,
    params: &ModelParams,
    env: &CouplingEnvelope,
    t: f64,
    variant: Variant,
) -> DMatrix<Complex64> {
    let mut vals = Vec::new();
    sys.assemble(&sys.coefficients(params, env, t, variant), &mut vals);
    sys.dense_from_values(&vals)
}

/// Initial data for propagation.
#[derive(Debug, Clone)]
pub enum InitialState {
    Pure(DVector<Complex64>),
    /// Incoherent mixture Σ_k p_k |ψ_k⟩⟨ψ_k| of normalized vectors.
    Mixture(Vec<(f64, DVector<Complex64>)>),
}

impl InitialState {
    /// Product of truncated Gibbs states, keeping Fock components with
    /// weight above `min_weight`; weights are renormalized.
    pub fn thermal(
        sys: &FockSystem,
        beta_omega_c: f64,
        beta_omega_m: f64,
        min_weight: f64,
    ) -> Result<Self> {
        if !(beta_omega_c > 0.0 && beta_omega_m > 0.0) {
            return Err(Error::param("beta_omega", "must be > 0"));
        }
        let boltz = |x: f64, dim: usize| -> Vec<f64> {
            let w: Vec<f64> = (0..dim).map(|n| (-x * n as f64).exp()).collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|v| v / z).collect()
        };
        let pa = boltz(beta_omega_c, sys.dim_a);
        let pb = boltz(beta_omega_m, sys.dim_b);
        let mut items = Vec::new();
        for (n, &wa) in pa.iter().enumerate() {
            for (k, &wb) in pb.iter().enumerate() {
                if wa * wb >= min_weight {
                    items.push((wa * wb, sys.basis_state(n, k)));
                }
            }
        }
        let total: f64 = items.iter().map(|(p, _)| p).sum();
        for it in items.iter_mut() {
            it.0 /= total;
        }
        Ok(InitialState::Mixture(items))
    }

    fn components(&self) -> Vec<(f64, &DVector<Complex64>)> {
        match self {
            InitialState::Pure(v) => vec![(1.0, v)],
            InitialState::Mixture(items) => items.iter().map(|(p, v)| (*p, v)).collect(),
        }
    }

    /// Entropy of the initial mixture, which unitary dynamics conserves.
    fn global_entropy(&self) -> f64 {
        match self {
            InitialState::Pure(_) => 0.0,
            InitialState::Mixture(items) => shannon(items.iter().map(|(p, _)| *p)),
        }
    }
}

fn shannon(ps: impl Iterator<Item = f64>) -> f64 {
    ps.filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum()
}

/// Observables of the oracle at one grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSample {
    pub t: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub mutual_information: f64,
    pub mean_a: Complex64,
    pub mean_b: Complex64,
    pub norm: f64,
}

/// Reduced density matrices of a weighted ensemble.
fn reduced_states(
    sys: &FockSystem,
    comps: &[(f64, &[Complex64])],
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let mut ra = DMatrix::zeros(sys.dim_a, sys.dim_a);
    let mut rb = DMatrix::zeros(sys.dim_b, sys.dim_b);
    for &(p, psi) in comps {
        let m = DMatrix::from_fn(sys.dim_a, sys.dim_b, |i, j| psi[i * sys.dim_b + j]);
        let pc = Complex64::new(p, 0.0);
        ra += (&m * m.adjoint()) * pc;
        rb += (m.transpose() * m.map(|z| z.conj())) * pc;
    }
    (ra, rb)
}

/// Entries this small are flushed to zero before diagonalizing: they carry
/// no entropy, and subnormal values can break the eigensolver.
const FLUSH: f64 = 1e-30;

pub(crate) fn von_neumann(rho: &DMatrix<Complex64>) -> f64 {
    let clean = rho.map(|z| if z.norm() < FLUSH { ZERO } else { z });
    let eig = SymmetricEigen::new(clean);
    shannon(eig.eigenvalues.iter().copied())
}

fn observe(sys: &FockSystem, t: f64, comps: &[(f64, &[Complex64])], s_global: f64) -> OracleSample {
    // RK4 does not conserve the norm exactly and the loss differs between
    // ensemble members, so each member is normalized on its own; rescaling
    // only the total would reweight the mixture
    let member_norms: Vec<f64> = comps
        .iter()
        .map(|(_, psi)| psi.iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let norm: f64 = comps
        .iter()
        .zip(&member_norms)
        .map(|((p, _), n)| p * n)
        .sum();
    let comps: Vec<(f64, &[Complex64])> = comps
        .iter()
        .zip(&member_norms)
        .map(|(&(p, psi), &n)| (p / n, psi))
        .collect();
    let weight_sum: f64 = comps
        .iter()
        .zip(&member_norms)
        .map(|((p, _), n)| p * n)
        .sum();
    let (mut n_a, mut n_b) = (0.0, 0.0);
    let (mut mean_a, mut mean_b) = (ZERO, ZERO);
    let db = sys.dim_b;
    for &(p, psi) in &comps {
        for na in 0..sys.dim_a {
            for nb in 0..db {
                let z = psi[na * db + nb];
                let w = z.norm_sqr() * p;
                n_a += w * na as f64;
                n_b += w * nb as f64;
                if na > 0 {
                    mean_a += psi[(na - 1) * db + nb].conj() * z * (na as f64).sqrt() * p;
                }
                if nb > 0 {
                    mean_b += psi[na * db + nb - 1].conj() * z * (nb as f64).sqrt() * p;
                }
            }
        }
    }
    let (ra, rb) = reduced_states(sys, &comps);
    let scale = Complex64::new(1.0 / weight_sum, 0.0);
    let mut i = von_neumann(&(ra * scale)) + von_neumann(&(rb * scale)) - s_global;
    if i < 0.0 && i > -1e-9 {
        i = 0.0;
    }
    OracleSample {
        t,
        n_a: n_a / weight_sum,
        n_b: n_b / weight_sum,
        mutual_information: i,
        mean_a: mean_a / weight_sum,
        mean_b: mean_b / weight_sum,
        norm,
    }
}

/// Largest RK4 step that keeps |hλ| inside the stability interval on the
/// imaginary axis, with margin.
const RK4_STABILITY: f64 = 2.5;

#[allow(clippy::too_many_arguments)]
fn rk4_step(
    sys: &FockSystem,
    params: &ModelParams,
    env: &CouplingEnvelope,
    variant: Variant,
    t: f64,
    h: f64,
    psi: &mut [Complex64],
    work: &mut Rk4Work,
) {
    let n = psi.len();
    let Rk4Work {
        vals,
        k1,
        k2,
        k3,
        k4,
        tmp,
    } = work;
    sys.assemble(&sys.coefficients(params, env, t, variant), vals);
    sys.apply_minus_i(vals, psi, k1);
    sys.assemble(&sys.coefficients(params, env, t + 0.5 * h, variant), vals);
    for i in 0..n {
        tmp[i] = psi[i] + k1[i] * (0.5 * h);
    }
    sys.apply_minus_i(vals, tmp, k2);
    for i in 0..n {
        tmp[i] = psi[i] + k2[i] * (0.5 * h);
    }
    sys.apply_minus_i(vals, tmp, k3);
    sys.assemble(&sys.coefficients(params, env, t + h, variant), vals);
    for i in 0..n {
        tmp[i] = psi[i] + k3[i] * h;
    }
    sys.apply_minus_i(vals, tmp, k4);
    let h6 = h / 6.0;
    for i in 0..n {
        psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * h6;
    }
}

struct Rk4Work {
    vals: Vec<Complex64>,
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4Work {
    fn new(n: usize) -> Self {
        Rk4Work {
            vals: Vec::new(),
            k1: vec![ZERO; n],
            k2: vec![ZERO; n],
            k3: vec![ZERO; n],
            k4: vec![ZERO; n],
            tmp: vec![ZERO; n],
        }
    }
}

/// Propagate `initial` through `t_grid` (the first grid time is the
/// initial time) with fixed-step RK4.
///
/// The nominal step is one `steps_per_cycle`-th of the fastest bare cycle
/// 2π/max(ω, ω_m); it is reduced further when needed to keep RK4 stable on
/// the truncated spectrum.
pub fn propagate(
    sys: &FockSystem,
    initial: &InitialState,
    params: &ModelParams,
    env: &CouplingEnvelope,
    variant: Variant,
    t_grid: &[f64],
    steps_per_cycle: usize,
) -> Result<Vec<OracleSample>> {
    params.validate()?;
    env.validate()?;
    if steps_per_cycle == 0 {
        return Err(Error::param("steps_per_cycle", "must be > 0"));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(
            "t_grid",
            "must be non-empty and strictly increasing",
        ));
    }
    let comps = initial.components();
    for (p, v) in &comps {
        if v.len() != sys.dim() {
            return Err(Error::param(
                "initial",
                "state dimension does not match the Fock system",
            ));
        }
        if !(*p >= 0.0) || (v.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::param(
                "initial",
                "components must be normalized with non-negative weights",
            ));
        }
    }
    let total: f64 = comps.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::param("initial", "weights must sum to one"));
    }
    let s_global = initial.global_entropy();
    let cycle = 2.0 * PI / params.omega().max(params.omega_m());
    let h_nominal = cycle / steps_per_cycle as f64;

    let mut states: Vec<Vec<Complex64>> =
        comps.iter().map(|(_, v)| v.as_slice().to_vec()).collect();
    let weights: Vec<f64> = comps.iter().map(|(p, _)| *p).collect();
    let mut work = Rk4Work::new(sys.dim());
    let mut out = Vec::with_capacity(t_grid.len());
    let snapshot = |states: &Vec<Vec<Complex64>>, t: f64| {
        let view: Vec<(f64, &[Complex64])> = weights
            .iter()
            .zip(states)
            .map(|(p, s)| (*p, s.as_slice()))
            .collect();
        observe(sys, t, &view, s_global)
    };
    out.push(snapshot(&states, t_grid[0]));
    for w in t_grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        // stability bound from the largest coefficients on this interval
        let probes = 16;
        let mut bound: f64 = 0.0;
        for j in 0..=probes {
            let t = t0 + (t1 - t0) * j as f64 / probes as f64;
            bound = bound.max(sys.norm_bound(&sys.coefficients(params, env, t, variant)));
        }
        let h_max = h_nominal.min(RK4_STABILITY / (1.1 * bound));
        let n_sub = ((t1 - t0) / h_max).ceil().max(1.0) as usize;
        let h = (t1 - t0) / n_sub as f64;
        for psi in states.iter_mut() {
            for s in 0..n_sub {
                rk4_step(
                    sys,
                    params,
                    env,
                    variant,
                    t0 + s as f64 * h,
                    h,
                    psi,
                    &mut work,
                );
            }
        }
        let sample = snapshot(&states, t1);
        if !sample.norm.is_finite() || (sample.norm - 1.0).abs() > 1e-6 {
            return Err(Error::Integration {
                t: t1,
                reason: format!("oracle norm drifted to {}", sample.norm),
            });
        }
        if !(sample.mutual_information >= 0.0 && sample.mutual_information.is_finite()) {
            return Err(Error::Integration {
                t: t1,
                reason: format!("oracle mutual information is {}", sample.mutual_information),
            });
        }
        out.push(sample);
    }
    Ok(out)
}

/// Result of a propagation checked against step doubling and a larger basis.
#[derive(Debug, Clone)]
pub struct ConvergedRun {
    pub samples: Vec<OracleSample>,
    pub dims: (usize, usize),
    pub steps_per_cycle: usize,
    /// Max change of (n_a, n_b, I) when steps_per_cycle is doubled.
    pub step_drift: f64,
    /// Max change of (n_a, n_b, I) between the last two basis sizes.
    pub dim_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub dims: usize,
    pub max_dims: usize,
    pub steps_per_cycle: usize,
    pub gate_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            dims: 30,
            max_dims: 60,
            steps_per_cycle: DEFAULT_STEPS_PER_CYCLE,
            gate_tol: 1e-7,
        }
    }
}

pub const DEFAULT_STEPS_PER_CYCLE: usize = 500;

pub fn max_drift(a: &[OracleSample], b: &[OracleSample]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            (x.n_a - y.n_a)
                .abs()
                .max((x.n_b - y.n_b).abs())
                .max((x.mutual_information - y.mutual_information).abs())
        })
        .fold(0.0, f64::max)
}

/// Pure-state propagation with the convergence gate: the basis is doubled
/// (up to `max_dims` per mode) until enlarging it changes no observable by
/// more than `gate_tol`; the time step is checked by doubling
/// `steps_per_cycle` at the final basis. `make_initial` builds the initial
/// state for a given basis.
pub fn propagate_converged<F>(
    cfg: &OracleConfig,
    make_initial: F,
    params: &ModelParams,
    env: &CouplingEnvelope,
    variant: Variant,
    t_grid: &[f64],
) -> Result<ConvergedRun>
where
    F: Fn(&FockSystem) -> Result<InitialState>,
{
    if cfg.dims < 2 || cfg.max_dims < cfg.dims {
        return Err(Error::param("dims", "need 2 <= dims <= max_dims"));
    }
    let run = |d: usize, spc: usize| -> Result<Vec<OracleSample>> {
        let sys = FockSystem::new(d, d)?;
        propagate(
            &sys,
            &make_initial(&sys)?,
            params,
            env,
            variant,
            t_grid,
            spc,
        )
    };
    let mut d = cfg.dims;
    let mut current = run(d, cfg.steps_per_cycle)?;
    loop {
        let next_d = (2 * d).min(cfg.max_dims);
        if next_d == d {
            return Err(Error::ConvergenceNotReached {
                drift: f64::INFINITY,
                tolerance: cfg.gate_tol,
                dim_a: d,
                dim_b: d,
            });
        }
        let next = run(next_d, cfg.steps_per_cycle)?;
        let dim_drift = max_drift(&current, &next);
        d = next_d;
        current = next;
        if dim_drift <= cfg.gate_tol {
            let fine = run(d, 2 * cfg.steps_per_cycle)?;
            let step_drift = max_drift(&current, &fine);
            if step_drift > cfg.gate_tol {
                return Err(Error::ConvergenceNotReached {
                    drift: step_drift,
                    tolerance: cfg.gate_tol,
                    dim_a: d,
                    dim_b: d,
                });
            }
            return Ok(ConvergedRun {
                samples: fine,
                dims: (d, d),
                steps_per_cycle: 2 * cfg.steps_per_cycle,
                step_drift,
                dim_drift,
            });
        }
        if d == cfg.max_dims {
            return Err(Error::ConvergenceNotReached {
                drift: dim_drift,
                tolerance: cfg.gate_tol,
                dim_a: d,
                dim_b: d,
            });
        }
    }
}

/// Lowest eigenpair of the constant-coupling Hamiltonian (coupling level 1,
/// gauge `params.alpha`), by Lanczos iteration with full
/// reorthogonalization on the sparse matrix.
pub fn exact_ground_state(
    sys: &FockSystem,
    params: &ModelParams,
) -> Result<(DVector<Complex64>, f64)> {
    ground_state_at_level(sys, params, 1.0)
}

/// Lowest eigenpair with the coupling held at `level`·η_max.
pub fn ground_state_at_level(
    sys: &FockSystem,
    params: &ModelParams,
    level: f64,
) -> Result<(DVector<Complex64>, f64)> {
    params.validate()?;
    if !(level.is_finite() && level >= 0.0) {
        return Err(Error::param("level", "must be finite and >= 0"));
    }
    let c = InteractionCoefficients::at_level(params, level);
    let mut vals = Vec::new();
    sys.assemble(&sys.coefficients_from(params, &c, 0.0), &mut vals);
    lanczos_lowest(sys, &vals, 1e-11, 2000)
}

#[derive(Debug, Clone)]
pub struct GroundStateRun {
    pub system: FockSystem,
    pub state: DVector<Complex64>,
    pub energy: f64,
    pub observables: PureStateObservables,
    /// Max change of (energy, n_a, n_b, I) between the last two basis sizes.
    pub dim_drift: f64,
}

/// Ground state with the basis doubled from `cfg.dims` until the
/// observables stop changing by more than `cfg.gate_tol`.
pub fn converged_ground_state(cfg: &OracleConfig, params: &ModelParams) -> Result<GroundStateRun> {
    if cfg.dims < 2 || cfg.max_dims < cfg.dims {
        return Err(Error::param("dims", "need 2 <= dims <= max_dims"));
    }
    let solve = |d: usize| -> Result<(FockSystem, DVector<Complex64>, f64, PureStateObservables)> {
        let sys = FockSystem::new(d, d)?;
        let (v, e) = exact_ground_state(&sys, params)?;
        let o = pure_state_observables(&sys, &v);
        Ok((sys, v, e, o))
    };
    let mut d = cfg.dims;
    let mut prev = solve(d)?;
    loop {
        let next_d = (2 * d).min(cfg.max_dims);
        if next_d == d {
            return Err(Error::ConvergenceNotReached {
                drift: f64::INFINITY,
                tolerance: cfg.gate_tol,
                dim_a: d,
                dim_b: d,
            });
        }
        let next = solve(next_d)?;
        let drift = (prev.2 - next.2)
            .abs()
            .max((prev.3.n_a - next.3.n_a).abs())
            .max((prev.3.n_b - next.3.n_b).abs())
            .max((prev.3.mutual_information - next.3.mutual_information).abs());
        d = next_d;
        if drift <= cfg.gate_tol {
            let (system, state, energy, observables) = next;
            return Ok(GroundStateRun {
                system,
                state,
                energy,
                observables,
                dim_drift: drift,
            });
        }
        if d == cfg.max_dims {
            return Err(Error::ConvergenceNotReached {
                drift,
                tolerance: cfg.gate_tol,
                dim_a: d,
                dim_b: d,
            });
        }
        prev = next;
    }
}

/// Lowest eigenpair of the dense matrix, for small bases.
pub fn dense_ground_state(sys: &FockSystem, params: &ModelParams) -> (DVector<Complex64>, f64) {
    let env = CouplingEnvelope::Constant { level: 1.0 };
    let h = build_hamiltonian(sys, params, &env, 0.0, Variant::Standard);
    let eig = SymmetricEigen::new(h);
    let (k, e) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
        );
    (eig.eigenvectors.column(k).into_owned(), e)
}

fn lanczos_lowest(
    sys: &FockSystem,
    vals: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<(DVector<Complex64>, f64)> {
    let n = sys.dim();
    // generic start vector concentrated on low excitations
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| {
            let (na, nb) = (i / sys.dim_b, i % sys.dim_b);
            let jitter = 1.0 + 0.1 * ((i * 7919) % 13) as f64 / 13.0;
            Complex64::new((-0.5 * (na + nb) as f64).exp() * jitter, 0.0)
        })
        .collect();
    normalize(&mut v);
    let mut basis: Vec<Vec<Complex64>> = vec![v];
    let mut diag: Vec<f64> = Vec::new();
    let mut off: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; n];
    let max_iter = max_iter.min(n);
    let mut best: Option<(f64, DVector<f64>)> = None;
    for j in 0..max_iter {
        sys.apply(vals, &basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        diag.push(a);
        for i in 0..n {
            w[i] -= basis[j][i] * a;
            if j > 0 {
                w[i] -= basis[j - 1][i] * off[j - 1];
            }
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for i in 0..n {
                    w[i] -= q[i] * c;
                }
            }
        }
        let b = norm(&w);
        let m = j + 1;
        if m % 10 == 0 || b < 1e-13 || m == max_iter {
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    diag[r]
                } else if r + 1 == c {
                    off[r]
                } else if c + 1 == r {
                    off[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let (k, theta) =
                eig.eigenvalues
                    .iter()
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
                    );
            let s = eig.eigenvectors.column(k).into_owned();
            let resid = b * s[m - 1].abs();
            best = Some((theta, s));
            if resid < tol * theta.abs().max(1.0) || b < 1e-13 {
                break;
            }
            if m == max_iter {
                return Err(Error::ConvergenceNotReached {
                    drift: resid,
                    tolerance: tol,
                    dim_a: sys.dim_a,
                    dim_b: sys.dim_b,
                });
            }
        }
        off.push(b);
        let next: Vec<Complex64> = w.iter().map(|z| z / b).collect();
        basis.push(next);
    }
    let (theta, s) = best.expect("at least one Ritz step");
    let mut x = vec![ZERO; n];
    for (k, q) in basis.iter().enumerate().take(s.len()) {
        for i in 0..n {
            x[i] += q[i] * s[k];
        }
    }
    normalize(&mut x);
    Ok((DVector::from_vec(x), theta))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) {
    let n = norm(a);
    for z in a.iter_mut() {
        *z /= n;
    }
}

/// Ground-state observables of a pure Fock state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureStateObservables {
    pub n_a: f64,
    pub n_b: f64,
    /// ⟨x_c²⟩ and ⟨p_c²⟩ with x_c = (a + a†)/√2, p_c = (a − a†)/(i√2).
    pub x_c2: f64,
    pub p_c2: f64,
    pub mutual_information: f64,
}

pub fn pure_state_observables(sys: &FockSystem, psi: &DVector<Complex64>) -> PureStateObservables {
    let s = observe(sys, 0.0, &[(1.0, psi.as_slice())], 0.0);
    // ⟨a²⟩ for the quadrature second moments
    let db = sys.dim_b;
    let mut a2 = ZERO;
    for na in 2..sys.dim_a {
        for nb in 0..db {
            a2 += psi[(na - 2) * db + nb].conj()
                * psi[na * db + nb]
                * ((na * (na - 1)) as f64).sqrt();
        }
    }
    // x² = (a² + a†² + 2a†a + 1)/2, p² = (−a² − a†² + 2a†a + 1)/2
    let x_c2 = a2.re + s.n_a + 0.5;
    let p_c2 = -a2.re + s.n_a + 0.5;
    PureStateObservables {
        n_a: s.n_a,
        n_b: s.n_b,
        x_c2,
        p_c2,
        mutual_information: s.mutual_information,
    }
}

/// Versioned table of converged oracle values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixtures {
    pub version: u32,
    pub entries: BTreeMap<String, FixtureEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub description: String,
    pub dims: usize,
    pub steps_per_cycle: usize,
    pub step_drift: f64,
    pub dim_drift: f64,
    pub values: BTreeMap<String, f64>,
}

pub const FIXTURE_VERSION: u32 = 1;

impl Fixtures {
    pub fn new() -> Self {
        Fixtures {
            version: FIXTURE_VERSION,
            entries: BTreeMap::new(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        let body = toml::to_string(self).map_err(|e| Error::Io(e.to_string()))?;
        Ok(format!(
            "# Converged truncated-Fock reference values (ω_m = 1).\n{body}"
        ))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let f: Fixtures = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        if f.version != FIXTURE_VERSION {
            return Err(Error::Config(format!(
                "fixture version {} does not match expected {FIXTURE_VERSION}",
                f.version
            )));
        }
        Ok(f)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Fixtures::from_toml(&std::fs::read_to_string(path)?)
    }
}

impl Default for Fixtures {
    fn default() -> Self {
        Fixtures::new()
    }
}
