//! Scalar observables of a state. Every integral is the uniform quadrature
//! `sum(...) h^d`, accumulated in a fixed order with compensated summation.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{spectral_derivative, ComplexField, Space};
use crate::operators::apply_h;
use crate::params::PhysParams;
use crate::sum::Accumulator;

/// `rho^sigma` with `0^sigma := 0`.
#[inline]
pub(crate) fn density_power(rho: f64, sigma: f64) -> f64 {
    if rho == 0.0 {
        0.0
    } else if sigma == 1.0 {
        rho
    } else {
        rho.powf(sigma)
    }
}

/// One row of time-series diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub mu: f64,
    /// `(Omega L psi, psi) / |Omega|`, zero without rotation.
    pub lz: f64,
    pub sigma_norm: f64,
    /// `||d_t psi||^2`, estimated from the last step's difference quotient.
    pub diss_rate: f64,
    pub mass_drift: f64,
}

/// The quadratures every diagnostic is assembled from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    /// `||f||^2`
    pub mass: f64,
    /// `||grad f||^2`
    pub grad_sq: f64,
    /// `||x f||^2`
    pub x_sq: f64,
    /// `int V |f|^2`
    pub potential: f64,
    /// `Re (Omega L f, f)`
    pub rotation: f64,
    /// `int |f|^{2 sigma + 2}`
    pub interaction: f64,
}

impl Moments {
    pub fn compute(f: &ComplexField, p: &PhysParams) -> Result<Self> {
        f.require_space(Space::Physical)?;
        p.require_dim(f.grid().dim())?;
        if !f.is_finite() {
            return Err(Error::NonFinite("state"));
        }
        let grid = Arc::clone(f.grid());
        let w = grid.cell_volume();
        let d = grid.dim();
        let last = d - 1;
        let nl = grid.shape()[last];
        let xl = grid.coords(last);
        let wl2 = p.omega()[last].powi(2);
        let sigma = p.sigma();

        // rows run along the last axis; the leading coordinates are fixed per row
        let lead = |row: usize| -> [f64; 3] { grid.point(row * nl) };

        let mut mass = Accumulator::default();
        let mut x_sq = Accumulator::default();
        let mut potential = Accumulator::default();
        let mut interaction = Accumulator::default();
        for (row, chunk) in f.data().chunks_exact(nl).enumerate() {
            let base = lead(row);
            let base_x2: f64 = base[..last].iter().map(|v| v * v).sum();
            let base_v = p.potential(&base[..last]);
            for (z, &x) in chunk.iter().zip(xl) {
                let rho = z.norm_sqr();
                mass.add(rho);
                x_sq.add((base_x2 + x * x) * rho);
                potential.add((base_v + 0.5 * wl2 * x * x) * rho);
                interaction.add(rho * density_power(rho, sigma));
            }
        }

        // single-axis transforms are cheaper than a full spectrum here
        let derivs = (0..d)
            .map(|axis| spectral_derivative(f, axis))
            .collect::<Result<Vec<_>>>()?;
        let mut grad_sq = Accumulator::default();
        for dj in &derivs {
            for z in dj.data() {
                grad_sq.add(z.norm_sqr());
            }
        }

        let rotation = if p.rotation() == 0.0 {
            0.0
        } else {
            let (d1, d2) = (&derivs[0], &derivs[1]);
            let mut acc = Accumulator::default();
            let rows = f.data().chunks_exact(nl).zip(d1.data().chunks_exact(nl)).zip(d2.data().chunks_exact(nl));
            for (row, ((fr, ar), br)) in rows.enumerate() {
                let base = lead(row);
                for (j, ((z, a), b)) in fr.iter().zip(ar).zip(br).enumerate() {
                    let x2 = if d == 2 { xl[j] } else { base[1] };
                    // conj(f) * (-i Omega)(x1 d2 f - x2 d1 f)
                    let lf = Complex64::new(0.0, -p.rotation()) * (base[0] * b - x2 * a);
                    acc.add((z.conj() * lf).re);
                }
            }
            acc.total() * w
        };

        Ok(Self {
            mass: mass.total() * w,
            grad_sq: grad_sq.total() * w,
            x_sq: x_sq.total() * w,
            potential: potential.total() * w,
            rotation,
            interaction: interaction.total() * w,
        })
    }

    /// Moments of `s f` for a scalar with `|s|^2 = s2`.
    pub fn scaled(&self, s2: f64, sigma: f64) -> Self {
        Self {
            mass: self.mass * s2,
            grad_sq: self.grad_sq * s2,
            x_sq: self.x_sq * s2,
            potential: self.potential * s2,
            rotation: self.rotation * s2,
            interaction: self.interaction * s2.powf(sigma + 1.0),
        }
    }

    /// Quadratic part `(H_Omega f, f)`.
    pub fn quadratic(&self) -> f64 {
        0.5 * self.grad_sq + self.potential - self.rotation
    }

    pub fn energy(&self, p: &PhysParams) -> f64 {
        self.quadratic() + p.g() / (p.sigma() + 1.0) * self.interaction
    }

    pub fn chemical_potential(&self, p: &PhysParams) -> Result<f64> {
        if self.mass <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok((self.quadratic() + p.g() * self.interaction) / self.mass)
    }

    pub fn sigma_norm(&self) -> f64 {
        self.grad_sq + self.x_sq
    }

    pub fn lz(&self, p: &PhysParams) -> f64 {
        if p.rotation() == 0.0 {
            0.0
        } else {
            self.rotation / p.rotation().abs()
        }
    }

    pub fn record(&self, p: &PhysParams, t: f64, diss_rate: f64) -> Result<DiagRecord> {
        Ok(DiagRecord {
            t,
            mass: self.mass,
            energy: self.energy(p),
            mu: self.chemical_potential(p)?,
            lz: self.lz(p),
            sigma_norm: self.sigma_norm(),
            diss_rate,
            mass_drift: self.mass - p.mass_target(),
        })
    }
}

pub fn mass(f: &ComplexField) -> Result<f64> {
    f.require_space(Space::Physical)?;
    Ok(f.norm_sqr())
}

pub fn energy(f: &ComplexField, p: &PhysParams) -> Result<f64> {
    Ok(Moments::compute(f, p)?.energy(p))
}

pub fn chemical_potential(f: &ComplexField, p: &PhysParams) -> Result<f64> {
    Moments::compute(f, p)?.chemical_potential(p)
}

/// `||grad f||^2 + ||x f||^2`.
pub fn sigma_norm(f: &ComplexField) -> Result<f64> {
    // the parameters only enter through the rotation term, which is skipped here
    let d = f.grid().dim();
    let p = PhysParams::new(vec![1.0; d], 0.0, 0.0, 1.0, 1.0, 1.0)?;
    Ok(Moments::compute(f, &p)?.sigma_norm())
}

/// `Re (Omega L f, f)`.
pub fn rotation_expectation(f: &ComplexField, p: &PhysParams) -> Result<f64> {
    Ok(Moments::compute(f, p)?.rotation)
}

/// `int |f|^{2 sigma + 2}`.
pub fn interaction_integral(f: &ComplexField, sigma: f64) -> f64 {
    let w = f.grid().cell_volume();
    crate::sum::sum_iter(f.data().iter().map(|z| {
        let rho = z.norm_sqr();
        rho * density_power(rho, sigma)
    })) * w
}

/// `H_Omega f + g |f|^{2 sigma} f`.
pub fn gradient_operator(f: &ComplexField, p: &PhysParams) -> Result<ComplexField> {
    let mut out = apply_h(f, p)?;
    if p.g() != 0.0 {
        let (g, sigma) = (p.g(), p.sigma());
        out.data_mut()
            .par_iter_mut()
            .zip(f.data().par_iter())
            .for_each(|(o, z)| *o += g * density_power(z.norm_sqr(), sigma) * z);
    }
    Ok(out)
}

/// `||H_Omega f + g|f|^{2 sigma} f - mu[f] f|| / ||f||`.
pub fn stationary_residual(f: &ComplexField, p: &PhysParams) -> Result<f64> {
    let m = Moments::compute(f, p)?;
    let mu = m.chemical_potential(p)?;
    let r = gradient_operator(f, p)?.axpy(Complex64::new(-mu, 0.0), f)?;
    Ok((r.norm_sqr() / m.mass).sqrt())
}

/// Diagnostics row for `f` at time `t`.
pub fn diagnostics(f: &ComplexField, p: &PhysParams, t: f64, diss_rate: f64) -> Result<DiagRecord> {
    Moments::compute(f, p)?.record(p, t, diss_rate)
}

/// Instantaneous `||d_t psi||^2 = ||(H + g|psi|^{2 sigma} - mu) psi||^2 / (1 + gamma^2)`.
pub fn dissipation_rate(f: &ComplexField, p: &PhysParams) -> Result<f64> {
    let res = stationary_residual(f, p)?;
    Ok(res * res * f.norm_sqr() / (1.0 + p.gamma() * p.gamma()))
}
