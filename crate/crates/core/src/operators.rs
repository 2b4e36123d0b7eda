//! The linear Hamiltonian `H_Omega = -1/2 Laplacian + V - Omega L_z` and its
//! pieces, with spectral derivatives and exact coordinate multiplication.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{derivative_from_spectrum, spectral_derivative, ComplexField, Grid, Space};
use crate::params::PhysParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn check_input(f: &ComplexField, p: &PhysParams) -> Result<()> {
    f.require_space(Space::Physical)?;
    p.require_dim(f.grid().dim())
}

fn zip_map<F>(a: &ComplexField, b: &ComplexField, op: F) -> ComplexField
where
    F: Fn(usize, Complex64, Complex64) -> Complex64 + Sync,
{
    let mut out = a.clone();
    out.data_mut()
        .par_iter_mut()
        .zip(b.data().par_iter())
        .enumerate()
        .for_each(|(i, (x, &y))| *x = op(i, *x, y));
    out
}

/// `V(x) f(x)`.
pub fn apply_potential(f: &ComplexField, p: &PhysParams) -> Result<ComplexField> {
    check_input(f, p)?;
    let grid = Arc::clone(f.grid());
    let d = grid.dim();
    let mut out = f.clone();
    out.data_mut()
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, z)| *z *= p.potential(&grid.point(i)[..d]));
    Ok(out)
}

/// `-1/2 Laplacian f`, spectrally.
pub fn apply_kinetic(f: &ComplexField) -> Result<ComplexField> {
    f.require_space(Space::Physical)?;
    let mut spec = f.fft_forward()?;
    let grid = Arc::clone(f.grid());
    spec.apply_symbol(|i| Complex64::new(0.5 * grid.k_squared(i), 0.0));
    spec.fft_inverse()
}

/// `(Omega . L) f = -i Omega (x1 d2 f - x2 d1 f)`, rotation about the third axis.
pub fn apply_rotation(f: &ComplexField, p: &PhysParams) -> Result<ComplexField> {
    check_input(f, p)?;
    if p.rotation() == 0.0 {
        return Ok(ComplexField::zeros(f.grid()));
    }
    let d1 = spectral_derivative(f, 0)?;
    let d2 = spectral_derivative(f, 1)?;
    Ok(rotation_from_derivatives(f.grid(), p.rotation(), &d1, &d2))
}

fn rotation_from_derivatives(
    grid: &Arc<Grid>,
    rotation: f64,
    d1: &ComplexField,
    d2: &ComplexField,
) -> ComplexField {
    let g = Arc::clone(grid);
    zip_map(d1, d2, move |i, a, b| {
        let x = g.point(i);
        -I * rotation * (x[0] * b - x[1] * a)
    })
}

/// `H_Omega f`.
pub fn apply_h(f: &ComplexField, p: &PhysParams) -> Result<ComplexField> {
    check_input(f, p)?;
    if !f.is_finite() {
        return Err(Error::NonFinite("input to H_Omega"));
    }
    let grid = Arc::clone(f.grid());
    let spec = f.fft_forward()?;
    let mut kin = spec.clone();
    kin.apply_symbol(|i| Complex64::new(0.5 * grid.k_squared(i), 0.0));
    let mut out = kin.fft_inverse()?;
    let d = grid.dim();
    out.data_mut()
        .par_iter_mut()
        .zip(f.data().par_iter())
        .enumerate()
        .for_each(|(i, (o, &fi))| *o += p.potential(&grid.point(i)[..d]) * fi);
    if p.rotation() != 0.0 {
        let d1 = derivative_from_spectrum(&spec, 0);
        let d2 = derivative_from_spectrum(&spec, 1);
        let rot = rotation_from_derivatives(&grid, p.rotation(), &d1, &d2);
        out = out.sub(&rot)?;
    }
    if !out.is_finite() {
        return Err(Error::NonFinite("H_Omega f"));
    }
    Ok(out)
}

/// Maximal pointwise residuals of the commutator identities
/// `[grad, H] = grad V + i grad x Omega` and `[x, H] = grad - i Omega x x`.
#[derive(Clone, Debug)]
pub struct CommutatorReport {
    /// Per-axis residual of `[d_j, H] u`.
    pub gradient: Vec<f64>,
    /// Per-axis residual of `[x_j, H] u`.
    pub position: Vec<f64>,
}

impl CommutatorReport {
    pub fn max_residual(&self) -> f64 {
        self.gradient
            .iter()
            .chain(&self.position)
            .copied()
            .fold(0.0, f64::max)
    }
}

fn multiply_coordinate(f: &ComplexField, axis: usize) -> ComplexField {
    let grid = Arc::clone(f.grid());
    let mut out = f.clone();
    out.data_mut()
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, z)| *z *= grid.point(i)[axis]);
    out
}

pub fn check_commutators(p: &PhysParams, trial: &ComplexField) -> Result<CommutatorReport> {
    check_input(trial, p)?;
    let d = trial.grid().dim();
    let omega = p.rotation();
    let h_u = apply_h(trial, p)?;
    let grads: Vec<ComplexField> = (0..d)
        .map(|a| spectral_derivative(trial, a))
        .collect::<Result<_>>()?;

    let mut gradient = Vec::with_capacity(d);
    let mut position = Vec::with_capacity(d);
    for axis in 0..d {
        let w2 = p.omega()[axis].powi(2);

        // d_j (H u) - H (d_j u)
        let lhs = spectral_derivative(&h_u, axis)?.sub(&apply_h(&grads[axis], p)?)?;
        // omega_j^2 x_j u + i (grad x Omega)_j u, with (grad x Omega) = (Omega d2, -Omega d1, 0)
        let mut rhs = multiply_coordinate(trial, axis).scaled(Complex64::new(w2, 0.0));
        match axis {
            0 => rhs = rhs.axpy(I * omega, &grads[1])?,
            1 => rhs = rhs.axpy(-I * omega, &grads[0])?,
            _ => {}
        }
        gradient.push(lhs.max_abs_diff(&rhs)?);

        // x_j (H u) - H (x_j u)
        let lhs = multiply_coordinate(&h_u, axis).sub(&apply_h(&multiply_coordinate(trial, axis), p)?)?;
        // d_j u - i (Omega x x)_j u, with (Omega x x) = (-Omega x2, Omega x1, 0)
        let mut rhs = grads[axis].clone();
        match axis {
            0 => rhs = rhs.axpy(I * omega, &multiply_coordinate(trial, 1))?,
            1 => rhs = rhs.axpy(-I * omega, &multiply_coordinate(trial, 0))?,
            _ => {}
        }
        position.push(lhs.max_abs_diff(&rhs)?);
    }
    Ok(CommutatorReport { gradient, position })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid2(n: usize, l: f64) -> Arc<Grid> {
        Arc::new(Grid::new(&[n, n], &[l, l]).unwrap())
    }

    fn gaussian(g: &Arc<Grid>) -> ComplexField {
        let norm = 1.0 / PI.sqrt();
        ComplexField::from_fn(g, |x| {
            Complex64::new(norm * (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp(), 0.0)
        })
    }

    fn vortex(g: &Arc<Grid>) -> ComplexField {
        ComplexField::from_fn(g, |x| {
            Complex64::new(x[0], x[1]) * (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp() / PI.sqrt()
        })
    }

    fn rel_l2(a: &ComplexField, b: &ComplexField) -> f64 {
        (a.sub(b).unwrap().norm_sqr() / b.norm_sqr()).sqrt()
    }

    #[test]
    fn potential_pointwise() {
        let g = grid2(8, 4.0);
        let one = ComplexField::from_fn(&g, |_| Complex64::new(1.0, 0.0));
        let p = PhysParams::isotropic_2d(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let v = apply_potential(&one, &p).unwrap();
        // x = (1, 1) sits at index (5, 5) on [-4, 4) with h = 1
        assert_eq!(v.data()[5 * 8 + 5], Complex64::new(1.0, 0.0));
        assert_eq!(v.data()[4 * 8 + 4], Complex64::new(0.0, 0.0));
        let q = PhysParams::new(vec![1.0, 2.0], 0.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let v = apply_potential(&one, &q).unwrap();
        assert_eq!(v.data()[6 * 8 + 5], Complex64::new(4.0, 0.0));
    }

    #[test]
    fn rotation_annihilates_radial_states() {
        let g = grid2(128, 8.0);
        let p = PhysParams::isotropic_2d(1.0, 0.7, 0.0, 1.0, 1.0).unwrap();
        assert!(apply_rotation(&gaussian(&g), &p).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn rotation_eigenvalue_of_vortex() {
        let g = grid2(128, 8.0);
        let p = PhysParams::isotropic_2d(1.0, 0.5, 0.0, 1.0, 1.0).unwrap();
        let f = vortex(&g);
        let rot = apply_rotation(&f, &p).unwrap();
        assert!(rel_l2(&rot, &f.scaled(Complex64::new(0.5, 0.0))) < 1e-8);
    }

    #[test]
    fn zero_rotation_is_exactly_zero() {
        let g = grid2(32, 8.0);
        let p = PhysParams::isotropic_2d(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let r = apply_rotation(&vortex(&g), &p).unwrap();
        assert!(r.data().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn oscillator_eigenstates() {
        let g = grid2(128, 8.0);
        let p = PhysParams::isotropic_2d(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let f = gaussian(&g);
        assert!(rel_l2(&apply_h(&f, &p).unwrap(), &f) < 1e-10);

        // m = +1 mode: lambda = 2 - Omega under H = H_0 - Omega L_z
        let p = PhysParams::isotropic_2d(1.0, 0.5, 0.0, 1.0, 1.0).unwrap();
        let v = vortex(&g);
        assert!(rel_l2(&apply_h(&v, &p).unwrap(), &v.scaled(Complex64::new(1.5, 0.0))) < 1e-10);
    }

    #[test]
    fn oscillator_ground_state_3d() {
        let g = Arc::new(Grid::new(&[64, 64, 64], &[8.0, 8.0, 8.0]).unwrap());
        let p = PhysParams::new(vec![1.0; 3], 0.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let f = ComplexField::from_fn(&g, |x| {
            Complex64::new(PI.powf(-0.75) * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp(), 0.0)
        });
        let hf = apply_h(&f, &p).unwrap();
        assert!(rel_l2(&hf, &f.scaled(Complex64::new(1.5, 0.0))) < 1e-10);
    }

    #[test]
    fn h_rejects_non_finite() {
        let g = grid2(8, 4.0);
        let mut f = ComplexField::zeros(&g);
        f.data_mut()[3] = Complex64::new(f64::NAN, 0.0);
        let p = PhysParams::isotropic_2d(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(apply_h(&f, &p), Err(Error::NonFinite(_))));
    }

    #[test]
    fn commutators_on_gaussian_and_plane_wave() {
        let g = grid2(128, 8.0);
        let p = PhysParams::isotropic_2d(1.0, 0.3, 0.0, 1.0, 1.0).unwrap();
        let r = check_commutators(&p, &gaussian(&g)).unwrap();
        assert!(r.max_residual() < 1e-8, "{r:?}");
        let wave = ComplexField::from_fn(&g, |x| {
            Complex64::new(0.0, 1.3 * x[0] - 0.7 * x[1]).exp()
                * (-((x[0] - 0.5).powi(2) + x[1] * x[1]) / 2.0).exp()
        });
        let r = check_commutators(&p, &wave).unwrap();
        assert!(r.max_residual() < 1e-8, "{r:?}");
    }

    #[test]
    fn commutator_residual_shrinks_under_refinement() {
        let p = PhysParams::new(vec![1.0, 1.3], 0.3, 0.0, 1.0, 1.0, 1.0).unwrap();
        let trial = |g: &Arc<Grid>| {
            ComplexField::from_fn(g, |x| {
                Complex64::new(0.0, 2.0 * x[0]).exp() * (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp()
            })
        };
        let coarse = check_commutators(&p, &trial(&grid2(32, 8.0))).unwrap().max_residual();
        let fine = check_commutators(&p, &trial(&grid2(64, 8.0))).unwrap().max_residual();
        assert!(fine < coarse, "coarse {coarse}, fine {fine}");
    }
}
