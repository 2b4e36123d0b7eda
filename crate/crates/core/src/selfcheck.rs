//! Invariant suite over random Gaussian-enveloped fields.
//!
//! Every sample draws trap frequencies, a rotation inside the coercive range,
//! a coupling `g >= 0` and two random fields, then checks
//!
//! - `(H u, u) >= c (||grad u||^2 + ||x u||^2)` with
//!   [`PhysParams::coercivity_constant`], and `E[u] >= c ||u||_Sigma^2`,
//! - `|(Omega L u, u)| <= |Omega| ||x u|| ||grad u||`,
//! - the commutator identities of [`check_commutators`],
//! - `(H u, v) = (u, H v)`,
//! - FFT round trip and Parseval.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::functionals::Moments;
use crate::grid::{ComplexField, Grid};
use crate::operators::{apply_h, apply_rotation, check_commutators};
use crate::params::PhysParams;

#[derive(Clone, Debug)]
pub struct SelfCheckConfig {
    pub samples: usize,
    pub n: usize,
    pub half_length: f64,
    pub seed: u64,
}

impl Default for SelfCheckConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            n: 128,
            half_length: 8.0,
            seed: 20,
        }
    }
}

/// Worst value of one invariant over all samples.
///
/// `worst` is a signed violation measure, the check passes when
/// `worst <= tolerance`. Negative values are margins.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            worst: f64::NEG_INFINITY,
            tolerance,
        }
    }

    fn observe(&mut self, v: f64) {
        // NaN counts as a failure
        if !(v <= self.worst) {
            self.worst = if v.is_nan() { f64::INFINITY } else { v };
        }
    }

    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

#[derive(Clone, Debug)]
pub struct SelfCheckReport {
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl SelfCheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for SelfCheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<22} worst {:+.3e}  tol {:.0e}  ({} samples)",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.worst,
                c.tolerance,
                self.samples
            )?;
        }
        Ok(())
    }
}

/// `sum_j a_j exp(i k_j . x)` under `exp(-|x - x0|^2 / (2 s^2))`, unit mass.
///
/// Widths, centers and wavevectors stay well inside what the grid resolves.
pub fn random_field(grid: &Arc<Grid>, rng: &mut impl Rng) -> ComplexField {
    let d = grid.dim();
    let l = grid.half_lengths().iter().copied().fold(f64::INFINITY, f64::min);
    let s = rng.gen_range(0.6..1.0) * (l / 8.0).min(1.0);
    let x0: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.75..0.75)).collect();
    let waves: Vec<(Complex64, Vec<f64>)> = (0..3)
        .map(|_| {
            let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (a, (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect())
        })
        .collect();
    let mut f = ComplexField::from_fn(grid, |x| {
        let r2: f64 = (0..d).map(|j| (x[j] - x0[j]).powi(2)).sum();
        let env = (-r2 / (2.0 * s * s)).exp();
        let mut z = Complex64::new(0.0, 0.0);
        for (a, k) in &waves {
            let phase: f64 = (0..d).map(|j| k[j] * x[j]).sum();
            z += a * Complex64::from_polar(1.0, phase);
        }
        z * env
    });
    let m = f.norm_sqr();
    f.scale(Complex64::new(1.0 / m.sqrt(), 0.0));
    f
}

fn random_params(rng: &mut impl Rng) -> Result<PhysParams> {
    let w: [f64; 2] = [rng.gen_range(0.8..1.25), rng.gen_range(0.8..1.25)];
    let wmin = w[0].min(w[1]);
    let rotation = rng.gen_range(-0.95..0.95) * wmin;
    let g = rng.gen_range(0.0..10.0);
    let sigma = rng.gen_range(0.5..2.0);
    PhysParams::new(w.to_vec(), rotation, g, sigma, 1.0, 1.0)
}

pub fn run_selfcheck(cfg: &SelfCheckConfig) -> Result<SelfCheckReport> {
    let grid = Arc::new(Grid::new(&[cfg.n, cfg.n], &[cfg.half_length, cfg.half_length])?);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut coercive = Check::new("coercivity", 1e-12);
    let mut energy = Check::new("energy_lower_bound", 1e-12);
    let mut rotation = Check::new("rotation_bound", 1e-12);
    let mut commutators = Check::new("commutators", 1e-8);
    let mut adjoint = Check::new("self_adjointness", 1e-8);
    let mut fft = Check::new("fft_round_trip", 1e-13);
    let mut parseval = Check::new("parseval", 1e-12);

    for _ in 0..cfg.samples {
        let p = random_params(&mut rng)?;
        let u = random_field(&grid, &mut rng);
        let v = random_field(&grid, &mut rng);
        let c = p.coercivity_constant().expect("rotation drawn inside the coercive range");
        let m = Moments::compute(&u, &p)?;

        let hu = apply_h(&u, &p)?;
        let q = u.inner(&hu)?.re;
        // violations are reported relative to the bound
        coercive.observe((c * m.sigma_norm() - q) / (c * m.sigma_norm()));
        energy.observe((c * m.sigma_norm() - m.energy(&p)) / (c * m.sigma_norm()));

        let rot = u.inner(&apply_rotation(&u, &p)?)?.re.abs();
        let bound = p.rotation().abs() * m.x_sq.sqrt() * m.grad_sq.sqrt();
        rotation.observe((rot - bound) / bound.max(f64::MIN_POSITIVE));

        commutators.observe(check_commutators(&p, &u)?.max_residual());

        let hv = apply_h(&v, &p)?;
        let lhs = hu.inner(&v)?;
        let rhs = u.inner(&hv)?;
        adjoint.observe((lhs - rhs).norm() / (hu.norm_sqr() * v.norm_sqr()).sqrt());

        let spec = u.fft_forward()?;
        fft.observe(spec.fft_inverse()?.max_abs_diff(&u)?);
        // unitary transform, same cell weight on both sides
        let k_mass: f64 = spec.data().iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_volume();
        parseval.observe((k_mass - u.norm_sqr()).abs() / u.norm_sqr());
    }
    Ok(SelfCheckReport {
        samples: cfg.samples,
        checks: vec![coercive, energy, rotation, commutators, adjoint, fft, parseval],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let r = run_selfcheck(&SelfCheckConfig {
            samples: 8,
            n: 64,
            half_length: 8.0,
            seed: 1,
        })
        .unwrap();
        assert!(r.all_passed(), "{r}");
        assert_eq!(r.checks.len(), 7);
    }

    #[test]
    fn nan_fails_a_check() {
        let mut c = Check::new("x", 1.0);
        c.observe(0.5);
        assert!(c.passed());
        c.observe(f64::NAN);
        assert!(!c.passed());
        c.observe(0.1);
        assert!(!c.passed());
    }

    #[test]
    fn fields_are_deterministic() {
        let g = Arc::new(Grid::new(&[32, 32], &[8.0, 8.0]).unwrap());
        let a = random_field(&g, &mut ChaCha8Rng::seed_from_u64(5));
        let b = random_field(&g, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a.data(), b.data());
        assert!((a.norm_sqr() - 1.0).abs() < 1e-13);
    }
}
