//! Time stepping for `d_t psi = -c (H_Omega psi + g|psi|^{2 sigma} psi - mu psi)`,
//! `c = (i + gamma) / (1 + gamma^2)`.
//!
//! One step is the Strang composition `L(dt/2) K(dt) L(dt/2)` of two exactly
//! solvable flows:
//!
//! * `K`, kinetic energy plus rotation, split once more along the axes
//!   (`x1` half, `x2` full, `x1` half, then `x3`). Each factor is diagonal in a
//!   mixed representation: Fourier along its own axis, physical across.
//! * `L`, potential plus nonlinearity minus a frozen `mu_hat`, solved pointwise
//!   in closed form through the Bernoulli equation for the density.
//!
//! The chemical potential is frozen at its step-start value inside `L`. What
//! remains of the `mu` term over the step is a scalar factor, applied at the
//! end either as an exact rescaling to the target mass (`Projection`) or as
//! the trapezoid factor `exp(c (mu_mid - mu_n) dt)` solved self-consistently
//! (`ExplicitMu`).

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::{density_power, gradient_operator, DiagRecord, Moments};
use crate::grid::{ComplexField, Grid, Space};
use crate::params::PhysParams;

/// Mass escaping its reference by more than this fraction counts as blow-up.
pub const MASS_BLOWUP_FRACTION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Evolve without the `mu` term and rescale to the target mass.
    Projection,
    /// Keep the `mu[psi]` term, no rescaling.
    ExplicitMu,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(Scheme::Projection),
            "explicit_mu" => Ok(Scheme::ExplicitMu),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme {other:?} (expected projection or explicit_mu)"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Projection => "projection",
            Scheme::ExplicitMu => "explicit_mu",
        })
    }
}

/// Time-stepping controls.
///
/// `t_final / dt` must be an integer number of steps, and that number a
/// multiple of `record_every`, so the last record sits exactly at `t_final`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub record_every: usize,
    /// Steps between stored states, 0 for none.
    pub snapshot_every: usize,
}

impl EvolveConfig {
    pub fn new(dt: f64, t_final: f64, scheme: Scheme) -> Self {
        Self {
            dt,
            t_final,
            scheme,
            record_every: 1,
            snapshot_every: 0,
        }
    }

    pub fn with_record_every(mut self, n: usize) -> Self {
        self.record_every = n;
        self
    }

    pub fn with_snapshot_every(mut self, n: usize) -> Self {
        self.snapshot_every = n;
        self
    }

    /// Number of steps, after validation.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.dt) {
            return Err(Error::InvalidConfig(format!(
                "T must be >= dt, got T = {} and dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be >= 1".into()));
        }
        let ratio = self.t_final / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "T = {} is not a whole number of steps of dt = {}",
                self.t_final, self.dt
            )));
        }
        let steps = steps as usize;
        if !steps.is_multiple_of(self.record_every) {
            return Err(Error::InvalidConfig(format!(
                "{steps} steps is not a multiple of record_every = {}",
                self.record_every
            )));
        }
        Ok(steps)
    }
}

/// Result of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<DiagRecord>,
    pub final_state: ComplexField,
    pub snapshots: Vec<(f64, ComplexField)>,
    /// `sum_n dt ||psi_{n+1} - psi_n||^2 / dt^2`, the discrete `int ||d_t psi||^2`.
    pub dissipation: f64,
}

impl Trajectory {
    pub fn last(&self) -> &DiagRecord {
        self.records.last().expect("trajectory has at least the initial record")
    }

    /// `E(0) - E(T) - 2 gamma int ||d_t psi||^2`.
    pub fn energy_balance_residual(&self, gamma: f64) -> f64 {
        self.records[0].energy - self.last().energy - 2.0 * gamma * self.dissipation
    }
}

/// Exact factors of the kinetic-rotation flow for one duration.
struct KineticRotationFlow {
    grid: Arc<Grid>,
    /// `[x2 index][xi1]` for the `x1` half step.
    axis0: Vec<Complex64>,
    /// `[x1 index][xi2]` for the `x2` full step.
    axis1: Vec<Complex64>,
    /// `[xi3]`, 3D only.
    axis2: Vec<Complex64>,
}

impl KineticRotationFlow {
    fn new(grid: &Arc<Grid>, p: &PhysParams, tau: f64) -> Self {
        let c = p.flow_coefficient();
        let rot = p.rotation();
        let table = |axis: usize, across: usize, sign: f64, dur: f64| {
            let xs = grid.coords(across);
            let ks = grid.wavenumbers(axis);
            let mut out = Vec::with_capacity(xs.len() * ks.len());
            for &x in xs {
                for &k in ks {
                    out.push((-c * dur * (0.5 * k * k + sign * rot * x * k)).exp());
                }
            }
            out
        };
        let axis0 = table(0, 1, 1.0, 0.5 * tau);
        let axis1 = table(1, 0, -1.0, tau);
        let axis2 = if grid.dim() == 3 {
            grid.wavenumbers(2)
                .iter()
                .map(|&k| (-c * tau * 0.5 * k * k).exp())
                .collect()
        } else {
            Vec::new()
        };
        Self {
            grid: Arc::clone(grid),
            axis0,
            axis1,
            axis2,
        }
    }

    fn apply(&self, data: &mut [Complex64]) {
        let g = &self.grid;
        let n = g.shape();
        // line ids: axis 0 -> x2 * n3 + x3, axis 1 -> x1 * n3 + x3
        let n3 = if g.dim() == 3 { n[2] } else { 1 };
        let half = |data: &mut [Complex64]| {
            g.axis_spectral_map(data, 0, |id, line| {
                let row = &self.axis0[(id / n3) * n[0]..(id / n3 + 1) * n[0]];
                line.iter_mut().zip(row).for_each(|(z, f)| *z *= f);
            })
        };
        half(data);
        g.axis_spectral_map(data, 1, |id, line| {
            let row = &self.axis1[(id / n3) * n[1]..(id / n3 + 1) * n[1]];
            line.iter_mut().zip(row).for_each(|(z, f)| *z *= f);
        });
        half(data);
        if g.dim() == 3 {
            g.axis_spectral_map(data, 2, |_, line| {
                line.iter_mut().zip(&self.axis2).for_each(|(z, f)| *z *= f);
            });
        }
    }
}

/// Cached factors of the local flow for one duration.
struct LocalFlow {
    tau: f64,
    v: Vec<f64>,
    /// `exp(-c V tau)`
    lin: Vec<Complex64>,
    /// `exp(-sigma a V tau)`, empty for the linear flow
    decay: Vec<f64>,
}

impl LocalFlow {
    fn new(grid: &Grid, p: &PhysParams, tau: f64) -> Self {
        let d = grid.dim();
        let c = p.flow_coefficient();
        let sa = p.sigma() * 2.0 * c.re;
        let v: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| p.potential(&grid.point(i)[..d]))
            .collect();
        let lin = v.par_iter().map(|&x| (-c * x * tau).exp()).collect();
        let decay = if p.g() != 0.0 && p.sigma() != 0.0 {
            v.par_iter().map(|&x| (-sa * x * tau).exp()).collect()
        } else {
            Vec::new()
        };
        Self { tau, v, lin, decay }
    }

    /// Flow of `d_t f = -c (V + g|f|^{2 sigma} - mu_hat) f`; `false` when the
    /// density diverges somewhere.
    ///
    /// With `W = V - mu_hat` the density obeys `rho' = -a (W + g rho^sigma) rho`,
    /// so `w = rho^-sigma` solves the linear `w' = sigma a (W w + g)`, and the
    /// phase moves by `ln(rho / rho0) / (2 gamma)`.
    fn apply(&self, f: &mut ComplexField, p: &PhysParams, mu_hat: f64) -> bool {
        let tau = self.tau;
        if tau == 0.0 {
            return true;
        }
        let c = p.flow_coefficient();
        let (g, sigma, gamma) = (p.g(), p.sigma(), p.gamma());
        let mut shift = (c * mu_hat * tau).exp();
        if self.decay.is_empty() {
            if g != 0.0 {
                shift *= (-c * g * tau).exp();
            }
            f.data_mut()
                .par_iter_mut()
                .zip(self.lin.par_iter())
                .for_each(|(z, l)| *z *= l * shift);
            return shift.is_finite();
        }
        let sa = sigma * 2.0 * c.re;
        let e_mu = (sa * mu_hat * tau).exp();
        let scale = sa * g * tau;
        f.data_mut()
            .par_iter_mut()
            .zip(self.v.par_iter().zip(self.lin.par_iter().zip(self.decay.par_iter())))
            .map(|(z, (&v, (l, &dec)))| {
                let rho0 = z.norm_sqr();
                if rho0 == 0.0 {
                    return true;
                }
                // q = sigma a g tau rho0^sigma (1 - e^-k) / k, k = sigma a W tau
                let k = sa * (v - mu_hat) * tau;
                let phi = if k == 0.0 {
                    1.0
                } else if k.abs() < 1e-3 {
                    -(-k).exp_m1() / k
                } else {
                    (1.0 - dec * e_mu) / k
                };
                let q = scale * density_power(rho0, sigma) * phi;
                if !(q > -1.0) {
                    return false;
                }
                let ln1q = q.ln_1p();
                let amp = if sigma == 1.0 {
                    1.0 / (1.0 + q).sqrt()
                } else {
                    (-ln1q / (2.0 * sigma)).exp()
                };
                *z *= l * shift * Complex64::from_polar(amp, -ln1q / (2.0 * gamma * sigma));
                z.is_finite()
            })
            .reduce(|| true, |x, y| x && y)
    }
}

fn check_state(f: &ComplexField, p: &PhysParams) -> Result<()> {
    f.require_space(Space::Physical)?;
    p.require_dim(f.grid().dim())
}

/// Exact flow of `d_t f = -c (-1/2 Laplacian - Omega L) f` for duration `tau`,
/// up to the second-order ADI splitting of the rotation between the axes.
pub fn subflow_kinetic_rotation(f: &ComplexField, p: &PhysParams, tau: f64) -> Result<ComplexField> {
    check_state(f, p)?;
    let mut out = f.clone();
    if tau != 0.0 {
        KineticRotationFlow::new(f.grid(), p, tau).apply(out.data_mut());
    }
    Ok(out)
}

/// Exact pointwise flow of `d_t f = -c (V + g|f|^{2 sigma} - mu_hat) f`.
pub fn subflow_local(f: &ComplexField, p: &PhysParams, tau: f64, mu_hat: f64) -> Result<ComplexField> {
    check_state(f, p)?;
    let mut out = f.clone();
    if !LocalFlow::new(f.grid(), p, tau).apply(&mut out, p, mu_hat) {
        return Err(Error::BlowUp {
            t: tau,
            reason: "density of the local flow diverged".into(),
        });
    }
    Ok(out)
}

/// Linear interpolant of a time series, held constant outside its range.
#[derive(Clone, Debug)]
pub struct PiecewiseLinear {
    ts: Vec<f64>,
    vs: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(ts: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if ts.is_empty() || ts.len() != vs.len() || ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("interpolation needs increasing, matching samples".into()));
        }
        Ok(Self { ts, vs })
    }

    pub fn constant(v: f64) -> Self {
        Self {
            ts: vec![0.0],
            vs: vec![v],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.ts.len();
        if t <= self.ts[0] {
            return self.vs[0];
        }
        if t >= self.ts[n - 1] {
            return self.vs[n - 1];
        }
        let j = self.ts.partition_point(|&s| s <= t);
        let (t0, t1) = (self.ts[j - 1], self.ts[j]);
        let w = (t - t0) / (t1 - t0);
        self.vs[j - 1] * (1.0 - w) + self.vs[j] * w
    }
}

/// What the `mu` term of the equation is replaced by.
#[derive(Clone, Copy)]
enum Drive<'a> {
    Projection,
    ExplicitMu,
    /// `g = 0`, no `mu` term at all.
    Linear,
    /// `mu[psi]` replaced by a prescribed function of time.
    Frozen(&'a PiecewiseLinear),
}

/// Reusable one-step propagator for fixed `p` and `dt`.
struct Stepper {
    p: PhysParams,
    dt: f64,
    kin: KineticRotationFlow,
    local: LocalFlow,
}

/// State after a step together with its moments.
struct Stepped {
    state: ComplexField,
    moments: Moments,
}

impl Stepper {
    fn new(grid: &Arc<Grid>, p: &PhysParams, dt: f64) -> Self {
        Self {
            p: p.clone(),
            dt,
            kin: KineticRotationFlow::new(grid, p, dt),
            local: LocalFlow::new(grid, p, 0.5 * dt),
        }
    }

    fn strang(&self, f: &ComplexField, mu_hat: f64, t: f64) -> Result<ComplexField> {
        let blown = || Error::BlowUp {
            t,
            reason: "density of the local flow diverged".into(),
        };
        let mut out = f.clone();
        if !self.local.apply(&mut out, &self.p, mu_hat) {
            return Err(blown());
        }
        self.kin.apply(out.data_mut());
        if !self.local.apply(&mut out, &self.p, mu_hat) {
            return Err(blown());
        }
        Ok(out)
    }

    /// One step from `(t, f)` whose moments are `m` and whose `mu` (or frozen
    /// `lambda`) at step start is `mu_n`.
    fn step(&self, f: &ComplexField, mu_n: f64, t: f64, drive: Drive<'_>) -> Result<Stepped> {
        let p = &self.p;
        let dt = self.dt;
        let t1 = t + dt;
        let non_finite = |_| Error::BlowUp {
            t: t1,
            reason: "non-finite amplitudes".into(),
        };
        let inner_mu = match drive {
            Drive::Linear => 0.0,
            _ => mu_n,
        };
        let mut chi = self.strang(f, inner_mu, t)?;
        let m_chi = Moments::compute(&chi, p).map_err(non_finite)?;
        if m_chi.mass <= 0.0 {
            return Err(Error::BlowUp {
                t: t1,
                reason: "state collapsed to zero".into(),
            });
        }
        let c = p.flow_coefficient();
        let a = 2.0 * c.re;
        let (g, sigma) = (p.g(), p.sigma());
        let quad = m_chi.quadratic() / m_chi.mass;
        let inter = m_chi.interaction / m_chi.mass;
        // mu of s chi as a function of |s|^2
        let mu_of = |s2: f64| quad + g * s2.powf(sigma) * inter;

        let factor = match drive {
            Drive::Linear => Complex64::new(1.0, 0.0),
            Drive::Projection => {
                let s2 = p.mass_target() / m_chi.mass;
                let mu1 = mu_of(s2);
                let phase = (mu1 - mu_n) * dt * 0.5 * c.im;
                Complex64::from_polar(s2.sqrt(), phase)
            }
            Drive::ExplicitMu => {
                let mut mid = mu_n;
                for _ in 0..200 {
                    let s2 = (a * (mid - mu_n) * dt).exp();
                    let next = 0.5 * (mu_n + mu_of(s2));
                    let done = (next - mid).abs() <= 1e-15 * (1.0 + next.abs());
                    mid = next;
                    if done {
                        break;
                    }
                }
                (c * (mid - mu_n) * dt).exp()
            }
            Drive::Frozen(lambda) => (c * (lambda.eval(t + 0.5 * dt) - mu_n) * dt).exp(),
        };
        if !factor.is_finite() {
            return Err(Error::BlowUp {
                t: t1,
                reason: "chemical potential diverged".into(),
            });
        }
        chi.scale(factor);
        let moments = m_chi.scaled(factor.norm_sqr(), sigma);
        Ok(Stepped { state: chi, moments })
    }
}

/// Projection stepper reused across many steps.
pub(crate) struct ProjectionStepper(Stepper);

impl ProjectionStepper {
    pub(crate) fn new(grid: &Arc<Grid>, p: &PhysParams, dt: f64) -> Self {
        Self(Stepper::new(grid, p, dt))
    }

    /// Next state and its moments, given the `mu` of `f`.
    pub(crate) fn step(&self, f: &ComplexField, mu: f64, t: f64) -> Result<(ComplexField, Moments)> {
        let s = self.0.step(f, mu, t, Drive::Projection)?;
        Ok((s.state, s.moments))
    }
}

/// One projection step: Strang step with `mu` frozen at its start value, then
/// rescaling to `mass_target`.
pub fn step_projection(f: &ComplexField, p: &PhysParams, dt: f64) -> Result<ComplexField> {
    check_state(f, p)?;
    let mu = Moments::compute(f, p)?.chemical_potential(p)?;
    Ok(Stepper::new(f.grid(), p, dt).step(f, mu, 0.0, Drive::Projection)?.state)
}

/// One explicit-`mu` step: Strang step with `mu` frozen at its start value,
/// then the trapezoid correction of the remaining `mu` drift.
pub fn step_explicit_mu(f: &ComplexField, p: &PhysParams, dt: f64) -> Result<ComplexField> {
    check_state(f, p)?;
    let mu = Moments::compute(f, p)?.chemical_potential(p)?;
    Ok(Stepper::new(f.grid(), p, dt).step(f, mu, 0.0, Drive::ExplicitMu)?.state)
}

/// `||(H + g|f|^{2 sigma} - mu_hat) f||^2 / (1 + gamma^2)`, the value of
/// `||d_t psi||^2` at the start of a run.
fn initial_rate(f: &ComplexField, p: &PhysParams, mu_hat: f64) -> Result<f64> {
    let r = gradient_operator(f, p)?.axpy(Complex64::new(-mu_hat, 0.0), f)?;
    Ok(r.norm_sqr() / (1.0 + p.gamma() * p.gamma()))
}

/// Extra per-run bookkeeping of the frozen iteration.
struct FrozenLog<'a> {
    lambda: &'a PiecewiseLinear,
    lambdas: Vec<f64>,
}

fn run(
    psi0: &ComplexField,
    p: &PhysParams,
    cfg: &EvolveConfig,
    drive: Drive<'_>,
    mut log: Option<&mut FrozenLog<'_>>,
) -> Result<Trajectory> {
    check_state(psi0, p)?;
    let steps = cfg.steps()?;
    let m0 = Moments::compute(psi0, p)?;
    let mut mu = m0.chemical_potential(p)?;
    let mass_ref = match drive {
        Drive::Projection => p.mass_target(),
        _ => m0.mass,
    };
    let stepper = Stepper::new(psi0.grid(), p, cfg.dt);
    let dt = cfg.dt;

    let step_mu = |mu: f64, t: f64| match drive {
        Drive::Frozen(l) => l.eval(t),
        _ => mu,
    };
    let mu_hat0 = match drive {
        Drive::Linear => 0.0,
        _ => step_mu(mu, 0.0),
    };

    let mut records = Vec::with_capacity(steps / cfg.record_every + 1);
    records.push(m0.record(p, 0.0, initial_rate(psi0, p, mu_hat0)?)?);
    if let Some(log) = log.as_deref_mut() {
        log.lambdas.push(log.lambda.eval(0.0));
    }
    let mut snapshots = Vec::new();
    if cfg.snapshot_every > 0 {
        snapshots.push((0.0, psi0.clone()));
    }

    let mut state = psi0.clone();
    let mut dissipation = crate::sum::Accumulator::default();
    for n in 0..steps {
        let t = n as f64 * dt;
        let t1 = (n + 1) as f64 * dt;
        let next = stepper.step(&state, step_mu(mu, t), t, drive)?;
        let rate = next.state.sub(&state)?.norm_sqr() / (dt * dt);
        if !rate.is_finite() {
            return Err(Error::BlowUp {
                t: t1,
                reason: "non-finite amplitudes".into(),
            });
        }
        dissipation.add(rate * dt);
        state = next.state;
        let m = next.moments;
        if !matches!(drive, Drive::Linear) && (m.mass - mass_ref).abs() > MASS_BLOWUP_FRACTION * mass_ref {
            return Err(Error::BlowUp {
                t: t1,
                reason: format!("mass drifted from {mass_ref:.6e} to {:.6e}", m.mass),
            });
        }
        mu = m.chemical_potential(p).map_err(|_| Error::BlowUp {
            t: t1,
            reason: "state collapsed to zero".into(),
        })?;
        if (n + 1) % cfg.record_every == 0 {
            records.push(m.record(p, t1, rate)?);
            if let Some(log) = log.as_deref_mut() {
                log.lambdas.push(log.lambda.eval(t1));
            }
        }
        if cfg.snapshot_every > 0 && (n + 1) % cfg.snapshot_every == 0 {
            snapshots.push((t1, state.clone()));
        }
    }
    Ok(Trajectory {
        records,
        final_state: state,
        snapshots,
        dissipation: dissipation.total(),
    })
}

/// Runs the damped flow with the configured scheme.
pub fn evolve(psi0: &ComplexField, p: &PhysParams, cfg: &EvolveConfig) -> Result<Trajectory> {
    let drive = match cfg.scheme {
        Scheme::Projection => Drive::Projection,
        Scheme::ExplicitMu => Drive::ExplicitMu,
    };
    run(psi0, p, cfg, drive, None)
}

/// The linear semigroup `exp(-c t H_Omega)`: `g` is set to zero and there is
/// no `mu` term, so the mass decays. `cfg.scheme` is ignored.
pub fn evolve_linear_semigroup(psi0: &ComplexField, p: &PhysParams, cfg: &EvolveConfig) -> Result<Trajectory> {
    let lin = p.with_g(0.0)?;
    run(psi0, &lin, cfg, Drive::Linear, None)
}

/// Output of [`frozen_mu_iteration`].
#[derive(Clone, Debug)]
pub struct FrozenIteration {
    /// Iterate `k` evolved with `lambda = mu` of iterate `k - 1`; iterate 0
    /// with the constant `mu[psi0]`.
    pub iterates: Vec<Trajectory>,
    /// `lambda` at the record times of each iterate.
    pub lambdas: Vec<Vec<f64>>,
    /// `max_t ||psi^(k)(t) - psi^(k-1)(t)||` over the stored states, for k >= 1.
    pub increments: Vec<f64>,
}

impl FrozenIteration {
    /// Largest per-unit-mass residual of `d/dt ||psi||^2 = a (lambda - mu) ||psi||^2`,
    /// `a = 2 gamma / (1 + gamma^2)`, by central differences of the records of
    /// iterate `k`.
    pub fn mass_law_residual(&self, k: usize, gamma: f64) -> f64 {
        mass_law_residual(&self.iterates[k].records, &self.lambdas[k], gamma)
    }
}

/// See [`FrozenIteration::mass_law_residual`].
pub fn mass_law_residual(records: &[DiagRecord], lambdas: &[f64], gamma: f64) -> f64 {
    let a = 2.0 * gamma / (1.0 + gamma * gamma);
    records
        .windows(3)
        .zip(&lambdas[1..])
        .map(|(w, &lam)| {
            let d = (w[2].mass - w[0].mass) / (w[2].t - w[0].t);
            let r = a * (lam - w[1].mu) * w[1].mass;
            (d - r).abs() / w[1].mass
        })
        .fold(0.0, f64::max)
}

/// Snapshot spacing used when the config asks for none: the smallest divisor
/// of `steps` giving at most 50 stored states.
fn comparison_stride(steps: usize) -> usize {
    (1..=steps).find(|&d| steps.is_multiple_of(d) && steps / d <= 50).unwrap_or(steps)
}

/// The iteration in which each iterate solves the frozen-`lambda` equation
/// `d_t psi = -c (H psi + g|psi|^{2 sigma} psi - lambda(t) psi)` with
/// `lambda` the chemical-potential history of the previous iterate,
/// interpolated linearly between its records. `cfg.scheme` is ignored.
pub fn frozen_mu_iteration(
    psi0: &ComplexField,
    p: &PhysParams,
    cfg: &EvolveConfig,
    iterations: usize,
) -> Result<FrozenIteration> {
    if iterations == 0 {
        return Err(Error::InvalidConfig("need at least one iterate".into()));
    }
    let steps = cfg.steps()?;
    let mut cfg = cfg.clone();
    if cfg.snapshot_every == 0 {
        cfg.snapshot_every = comparison_stride(steps);
    }
    let mu0 = Moments::compute(psi0, p)?.chemical_potential(p)?;
    let mut lambda = PiecewiseLinear::constant(mu0);
    let mut iterates: Vec<Trajectory> = Vec::with_capacity(iterations);
    let mut lambdas = Vec::with_capacity(iterations);
    let mut increments = Vec::new();
    for _ in 0..iterations {
        let mut log = FrozenLog {
            lambda: &lambda,
            lambdas: Vec::new(),
        };
        let traj = run(psi0, p, &cfg, Drive::Frozen(&lambda), Some(&mut log))?;
        let lam = log.lambdas;
        if let Some(prev) = iterates.last() {
            let mut inc = prev
                .snapshots
                .iter()
                .zip(&traj.snapshots)
                .map(|((_, a), (_, b))| a.sub(b).map(|d| d.norm_sqr().sqrt()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            inc = inc.max(prev.final_state.sub(&traj.final_state)?.norm_sqr().sqrt());
            increments.push(inc);
        }
        lambda = PiecewiseLinear::new(
            traj.records.iter().map(|r| r.t).collect(),
            traj.records.iter().map(|r| r.mu).collect(),
        )?;
        iterates.push(traj);
        lambdas.push(lam);
    }
    Ok(FrozenIteration {
        iterates,
        lambdas,
        increments,
    })
}
