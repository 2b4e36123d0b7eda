//! Analytic eigenpairs of `H_Omega` for isotropic traps, projections onto
//! them, and the mode ODE of the linear flow.
//!
//! Modes are indexed by the level `k >= 1`, the angular number `m` (the
//! eigenvalue of `L_z = -i d_theta`) and, in 3D, the number `nz` of quanta
//! along the rotation axis. The eigenvalue is
//! `omega (d/2 + k - 1) - m Omega`, so the vortex `(x1 + i x2) e^{-r^2/2}`
//! (`k = 2`, `m = 1`) sits at `2 omega - Omega`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid, Space};
use crate::params::PhysParams;

/// Sign of `m Omega` in the eigenvalue, fixed by applying `H_Omega` to the
/// explicit modes.
pub const ROTATION_SIGN: f64 = -1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EigenIndex {
    pub k: usize,
    pub m: i64,
    /// Quanta along the third axis; always 0 in 2D.
    pub nz: usize,
}

impl EigenIndex {
    pub fn new(k: usize, m: i64) -> Self {
        Self { k, m, nz: 0 }
    }

    pub fn new_3d(k: usize, m: i64, nz: usize) -> Self {
        Self { k, m, nz }
    }

    /// Level of the planar factor.
    fn planar_level(&self) -> usize {
        self.k - self.nz
    }

    /// Radial quantum number `(k_planar - 1 - |m|) / 2`.
    pub fn radial(&self) -> usize {
        (self.planar_level() - 1 - self.m.unsigned_abs() as usize) / 2
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidIndex(msg));
        if self.k == 0 {
            return bad("level k starts at 1".into());
        }
        if d == 2 && self.nz != 0 {
            return bad("nz must be 0 in 2D".into());
        }
        if self.nz >= self.k {
            return bad(format!("nz = {} needs k > nz, got k = {}", self.nz, self.k));
        }
        let kp = self.planar_level() as i64;
        let am = self.m.abs();
        if am > kp - 1 || (kp - 1 - am) % 2 != 0 {
            return bad(format!(
                "m = {} is not admissible on planar level {kp} (|m| <= {} with matching parity)",
                self.m,
                kp - 1
            ));
        }
        Ok(())
    }
}

impl std::fmt::Display for EigenIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.nz == 0 {
            write!(f, "({}, {})", self.k, self.m)
        } else {
            write!(f, "({}, {}, {})", self.k, self.m, self.nz)
        }
    }
}

fn require_isotropic(p: &PhysParams) -> Result<f64> {
    if !p.is_isotropic() {
        return Err(Error::Unsupported("analytic eigenpairs need an isotropic trap".into()));
    }
    Ok(p.omega()[0])
}

/// `omega (d/2 + k - 1) - m Omega`.
pub fn eigenvalue(idx: EigenIndex, p: &PhysParams) -> Result<f64> {
    let w = require_isotropic(p)?;
    idx.validate(p.dim())?;
    let d = p.dim() as f64;
    Ok(w * (d / 2.0 + idx.k as f64 - 1.0) + ROTATION_SIGN * idx.m as f64 * p.rotation())
}

/// All admissible indices with level `k <= levels`, ordered by level, then
/// `nz`, then decreasing `m`.
pub fn modes_up_to_level(levels: usize, d: usize) -> Vec<EigenIndex> {
    let mut out = Vec::new();
    for k in 1..=levels {
        let max_nz = if d == 3 { k - 1 } else { 0 };
        for nz in 0..=max_nz {
            let kp = (k - nz) as i64;
            let mut m = kp - 1;
            while m >= -(kp - 1) {
                out.push(EigenIndex { k, m, nz });
                m -= 2;
            }
        }
    }
    out
}

/// `(index, eigenvalue)` for every mode up to `levels`, sorted by level and
/// then eigenvalue.
pub fn spectrum_table(levels: usize, p: &PhysParams) -> Result<Vec<(EigenIndex, f64)>> {
    let mut rows = modes_up_to_level(levels, p.dim())
        .into_iter()
        .map(|i| Ok((i, eigenvalue(i, p)?)))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.0.k.cmp(&b.0.k).then(a.1.total_cmp(&b.1)));
    Ok(rows)
}

/// Generalized Laguerre polynomial `L_n^alpha(x)` by its three-term recurrence.
fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Physicists' Hermite polynomial `H_n(x)`.
fn hermite(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for j in 1..n {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Tail margin, in oscillator lengths, demanded beyond the classical turning
/// point in both position and wavenumber.
pub const RESOLUTION_MARGIN: f64 = 4.0;

/// Rejects modes whose classical region plus [`RESOLUTION_MARGIN`] does not
/// fit in the box or below the Nyquist wavenumber.
///
/// For energy `E = omega (d/2 + k - 1)` the turning radius is
/// `sqrt(2E) / omega` in position and `sqrt(2E)` in wavenumber.
pub fn check_resolution(idx: EigenIndex, grid: &Grid, p: &PhysParams) -> Result<()> {
    let w = require_isotropic(p)?;
    let e = w * (grid.dim() as f64 / 2.0 + idx.k as f64 - 1.0);
    let need_l = (2.0 * e).sqrt() / w + RESOLUTION_MARGIN / w.sqrt();
    let need_k = (2.0 * e).sqrt() + RESOLUTION_MARGIN * w.sqrt();
    for axis in 0..grid.dim() {
        let l = grid.half_lengths()[axis];
        let kmax = std::f64::consts::PI / grid.spacing()[axis];
        if l < need_l || kmax < need_k {
            return Err(Error::UnderResolved(format!(
                "mode {idx} needs L >= {need_l:.2} and pi/h >= {need_k:.2}, axis {axis} has L = {l} and pi/h = {kmax:.2}"
            )));
        }
    }
    Ok(())
}

/// The eigenfunction
/// `(sqrt(omega) (x1 + i sgn(m) x2))^|m| L_nr^|m|(omega r^2) e^{-omega r^2 / 2}`,
/// times `H_nz(sqrt(omega) x3) e^{-omega x3^2 / 2}` in 3D, with unit mass on
/// the grid.
pub fn eigenfunction(idx: EigenIndex, grid: &Arc<Grid>, p: &PhysParams) -> Result<ComplexField> {
    let w = require_isotropic(p)?;
    p.require_dim(grid.dim())?;
    idx.validate(grid.dim())?;
    check_resolution(idx, grid, p)?;
    let am = idx.m.unsigned_abs() as u32;
    let sgn = if idx.m < 0 { -1.0 } else { 1.0 };
    let nr = idx.radial();
    let sw = w.sqrt();
    let d = grid.dim();
    let mut f = ComplexField::from_fn(grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let planar = Complex64::new(sw * x[0], sgn * sw * x[1]).powu(am)
            * laguerre(nr, am as f64, w * r2)
            * (-0.5 * w * r2).exp();
        if d == 3 {
            planar * hermite(idx.nz, sw * x[2]) * (-0.5 * w * x[2] * x[2]).exp()
        } else {
            planar
        }
    });
    let mass = f.norm_sqr();
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::UnderResolved(format!("mode {idx} has no resolvable mass")));
    }
    f.scale(Complex64::new(1.0 / mass.sqrt(), 0.0));
    Ok(f)
}

/// Eigenfunctions for several indices, built in parallel.
pub fn basis(modes: &[EigenIndex], grid: &Arc<Grid>, p: &PhysParams) -> Result<Vec<ComplexField>> {
    modes.par_iter().map(|&i| eigenfunction(i, grid, p)).collect()
}

/// Coefficients of a state on finitely many modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeState {
    pub indices: Vec<EigenIndex>,
    pub b: Vec<Complex64>,
    pub lambdas: Vec<f64>,
    pub gamma: f64,
}

impl ModeState {
    pub fn new(indices: Vec<EigenIndex>, b: Vec<Complex64>, lambdas: Vec<f64>, gamma: f64) -> Result<Self> {
        if indices.len() != b.len() || b.len() != lambdas.len() || b.is_empty() {
            return Err(Error::InvalidConfig("mode state needs matching, non-empty vectors".into()));
        }
        Ok(Self {
            indices,
            b,
            lambdas,
            gamma,
        })
    }

    /// `sum |b|^2`.
    pub fn norm_sqr(&self) -> f64 {
        crate::sum::sum_iter(self.b.iter().map(|z| z.norm_sqr()))
    }

    /// `sum lambda |b|^2 / sum |b|^2`, the chemical potential of the mix.
    pub fn mu(&self) -> f64 {
        mode_mu(&self.b, &self.lambdas)
    }

    /// `sum |b|^2` restricted to modes with eigenvalue `lambda` (within `tol`).
    pub fn eigenspace_mass(&self, lambda: f64, tol: f64) -> f64 {
        crate::sum::sum_iter(
            self.b
                .iter()
                .zip(&self.lambdas)
                .filter(|(_, &l)| (l - lambda).abs() <= tol)
                .map(|(z, _)| z.norm_sqr()),
        )
    }

    pub fn coefficient(&self, idx: EigenIndex) -> Option<Complex64> {
        self.indices.iter().position(|&i| i == idx).map(|j| self.b[j])
    }
}

fn mode_mu(b: &[Complex64], lambdas: &[f64]) -> f64 {
    let mut num = crate::sum::Accumulator::default();
    let mut den = crate::sum::Accumulator::default();
    for (z, l) in b.iter().zip(lambdas) {
        num.add(l * z.norm_sqr());
        den.add(z.norm_sqr());
    }
    num.total() / den.total()
}

/// Projection of a state onto `modes`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub modes: ModeState,
    /// `sum |b|^2 / ||f||^2`.
    pub captured_mass: f64,
}

/// `b_i = (phi_i, f)` by quadrature.
pub fn decompose(f: &ComplexField, modes: &[EigenIndex], p: &PhysParams) -> Result<Decomposition> {
    f.require_space(Space::Physical)?;
    let phis = basis(modes, f.grid(), p)?;
    decompose_on(f, modes, &phis, p)
}

/// [`decompose`] with precomputed eigenfunctions.
pub fn decompose_on(
    f: &ComplexField,
    modes: &[EigenIndex],
    phis: &[ComplexField],
    p: &PhysParams,
) -> Result<Decomposition> {
    let b = phis.iter().map(|phi| phi.inner(f)).collect::<Result<Vec<_>>>()?;
    let lambdas = modes.iter().map(|&i| eigenvalue(i, p)).collect::<Result<Vec<_>>>()?;
    let mass = f.norm_sqr();
    if mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let modes = ModeState::new(modes.to_vec(), b, lambdas, p.gamma())?;
    let captured_mass = modes.norm_sqr() / mass;
    Ok(Decomposition {
        modes,
        captured_mass,
    })
}

/// Smallest eigenvalue among modes with `|b| > eps (sum |b|^2)^{1/2}`.
pub fn smallest_eigenvalue_in_datum(ms: &ModeState, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig("threshold must be positive".into()));
    }
    let cut = eps * ms.norm_sqr().sqrt();
    ms.b
        .iter()
        .zip(&ms.lambdas)
        .filter(|(z, _)| z.norm() > cut)
        .map(|(_, &l)| l)
        .min_by(f64::total_cmp)
        .ok_or(Error::EmptyDecomposition)
}

/// Largest RK4 step of the oracle: `1e-3 min(1, 1 / max lambda)`.
pub fn oracle_max_step(ms: &ModeState) -> f64 {
    let lmax = ms.lambdas.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    1e-3 * f64::min(1.0, 1.0 / lmax.max(f64::MIN_POSITIVE))
}

/// Solution of `b_n' = -c (lambda_n - mu(b)) b_n`, `c = (i + gamma) / (1 + gamma^2)`,
/// `mu(b) = sum lambda |b|^2 / sum |b|^2`, sampled every `dt` up to `t_final`.
///
/// RK4 is run with substeps no longer than [`oracle_max_step`].
pub fn ode_oracle(ms0: &ModeState, t_final: f64, dt: f64) -> Result<Vec<(f64, ModeState)>> {
    if !(dt > 0.0 && t_final >= 0.0) {
        return Err(Error::InvalidConfig("oracle needs dt > 0 and T >= 0".into()));
    }
    if ms0.norm_sqr() <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let samples = (t_final / dt).round() as usize;
    let sub = (dt / oracle_max_step(ms0)).ceil().max(1.0) as usize;
    let h = dt / sub as f64;
    let g = ms0.gamma;
    let c = Complex64::new(g, 1.0) / (1.0 + g * g);
    let lam = &ms0.lambdas;
    let rhs = |b: &[Complex64], out: &mut [Complex64]| {
        let mu = mode_mu(b, lam);
        for ((o, z), l) in out.iter_mut().zip(b).zip(lam) {
            *o = -c * (l - mu) * z;
        }
    };
    let n = lam.len();
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut b = ms0.b.clone();
    let mut out = Vec::with_capacity(samples + 1);
    out.push((0.0, ms0.clone()));
    for s in 1..=samples {
        for _ in 0..sub {
            rhs(&b, &mut k1);
            for j in 0..n {
                tmp[j] = b[j] + 0.5 * h * k1[j];
            }
            rhs(&tmp, &mut k2);
            for j in 0..n {
                tmp[j] = b[j] + 0.5 * h * k2[j];
            }
            rhs(&tmp, &mut k3);
            for j in 0..n {
                tmp[j] = b[j] + h * k3[j];
            }
            rhs(&tmp, &mut k4);
            for j in 0..n {
                b[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        let mut ms = ms0.clone();
        ms.b = b.clone();
        out.push((s as f64 * dt, ms));
    }
    Ok(out)
}
