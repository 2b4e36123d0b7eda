use std::sync::Arc;

use gpflow::evolution::{step_explicit_mu, step_projection};
use gpflow::functionals::{chemical_potential, energy, mass, stationary_residual, Moments};
use gpflow::io::{parse_config, read_snapshot, write_snapshot, RunConfig};
use gpflow::operators::apply_h;
use gpflow::selfcheck::random_field;
use gpflow::spectral_basis::{eigenvalue, modes_up_to_level, ode_oracle, EigenIndex, ModeState};
use gpflow::{ComplexField, Grid, PhysParams};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> Arc<Grid> {
    Arc::new(Grid::new(&[32, 32], &[8.0, 8.0]).unwrap())
}

fn field(seed: u64) -> ComplexField {
    random_field(&grid(), &mut ChaCha8Rng::seed_from_u64(seed))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fft_is_linear_and_invertible(s1 in 0u64..1000, s2 in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (u, v) = (field(s1), field(s2));
        let ca = Complex64::new(a, 0.5 * b);
        let combo = u.scaled(ca).axpy(Complex64::new(b, 0.0), &v).unwrap();
        let lhs = combo.fft_forward().unwrap();
        let rhs = u.fft_forward().unwrap().scaled(ca).axpy(Complex64::new(b, 0.0), &v.fft_forward().unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        prop_assert!(lhs.fft_inverse().unwrap().max_abs_diff(&combo).unwrap() < 1e-13);
    }

    #[test]
    fn observables_ignore_global_phase(seed in 0u64..1000, theta in 0.0f64..6.3, rot in -0.9f64..0.9, g in 0.0f64..10.0) {
        let p = PhysParams::isotropic_2d(1.0, rot, g, 1.0, 1.0).unwrap();
        let u = field(seed);
        let v = u.scaled(Complex64::from_polar(1.0, theta));
        prop_assert!(rel(energy(&v, &p).unwrap(), energy(&u, &p).unwrap()) < 1e-12);
        prop_assert!(rel(chemical_potential(&v, &p).unwrap(), chemical_potential(&u, &p).unwrap()) < 1e-12);
        prop_assert!(rel(stationary_residual(&v, &p).unwrap(), stationary_residual(&u, &p).unwrap()) < 1e-10);
    }

    #[test]
    fn moments_scale_with_the_field(seed in 0u64..1000, s in 0.2f64..3.0, sigma in 0.0f64..2.0) {
        let p = PhysParams::isotropic_2d(1.0, 0.3, 2.0, sigma, 1.0).unwrap();
        let u = field(seed);
        let m = Moments::compute(&u, &p).unwrap().scaled(s * s, sigma);
        let direct = Moments::compute(&u.scaled(Complex64::new(0.0, s)), &p).unwrap();
        prop_assert!(rel(m.mass, direct.mass) < 1e-12);
        prop_assert!(rel(m.grad_sq, direct.grad_sq) < 1e-12);
        prop_assert!(rel(m.interaction, direct.interaction) < 1e-12);
        prop_assert!((m.rotation - direct.rotation).abs() < 1e-12 * m.grad_sq);
    }

    #[test]
    fn h_is_symmetric(s1 in 0u64..1000, s2 in 0u64..1000, rot in -2.0f64..2.0) {
        let p = PhysParams::isotropic_2d(1.0, rot, 0.0, 1.0, 1.0).unwrap();
        let (u, v) = (field(s1), field(s2));
        let a = apply_h(&u, &p).unwrap().inner(&v).unwrap();
        let b = u.inner(&apply_h(&v, &p).unwrap()).unwrap();
        prop_assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn projection_step_keeps_mass_and_lowers_energy(seed in 0u64..1000, g in 0.0f64..8.0, rot in -0.8f64..0.8) {
        let p = PhysParams::isotropic_2d(1.0, rot, g, 1.0, 1.0).unwrap();
        let u = field(seed);
        let v = step_projection(&u, &p, 1e-3).unwrap();
        prop_assert!((mass(&v).unwrap() - 1.0).abs() < 1e-13);
        prop_assert!(energy(&v, &p).unwrap() <= energy(&u, &p).unwrap() + 1e-10);
    }

    #[test]
    fn explicit_step_mass_error_is_small(seed in 0u64..1000, g in 0.0f64..8.0) {
        let p = PhysParams::isotropic_2d(1.0, 0.2, g, 1.0, 1.0).unwrap();
        let v = step_explicit_mu(&field(seed), &p, 1e-3).unwrap();
        prop_assert!((mass(&v).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn snapshot_round_trip(seed in 0u64..1000, t in -1e3f64..1e3) {
        let u = field(seed);
        let (t2, v) = read_snapshot(&write_snapshot(&u, t).unwrap()).unwrap();
        prop_assert_eq!(t2.to_bits(), t.to_bits());
        prop_assert!(u.data().iter().zip(v.data()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    }

    #[test]
    fn config_text_round_trip(
        rot in -2.0f64..2.0, g in -1.0f64..50.0, gamma in 0.01f64..10.0, mass in 0.1f64..10.0,
        steps in 1usize..50, every in 1usize..5, seed in any::<u64>(),
    ) {
        let mut c: RunConfig = parse_config("").unwrap();
        c.rotation = rot;
        c.g = g;
        c.sigma = 0.5;
        c.gamma = gamma;
        c.mass = mass;
        c.t_final = c.dt * (steps * every) as f64;
        c.record_every = every;
        c.seed = seed;
        prop_assert_eq!(parse_config(&c.to_config_text()).unwrap(), c);
    }

    #[test]
    fn mode_ode_conserves_norm_and_lowers_mu(
        re in proptest::collection::vec(-1.0f64..1.0, 6),
        im in proptest::collection::vec(-1.0f64..1.0, 6),
        gamma in 0.1f64..3.0,
    ) {
        let p = PhysParams::isotropic_2d(1.0, 0.3, 0.0, 1.0, gamma).unwrap();
        let idx: Vec<EigenIndex> = modes_up_to_level(3, 2);
        let lam: Vec<f64> = idx.iter().map(|&i| eigenvalue(i, &p).unwrap()).collect();
        let b: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &c)| Complex64::new(a, c)).collect();
        prop_assume!(b.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
        let ms = ModeState::new(idx, b, lam, gamma).unwrap();
        let tr = ode_oracle(&ms, 1.0, 0.1).unwrap();
        let n0 = ms.norm_sqr();
        let mut prev = f64::INFINITY;
        for (_, s) in &tr {
            prop_assert!(rel(s.norm_sqr(), n0) < 1e-10);
            prop_assert!(s.mu() <= prev + 1e-12);
            prev = s.mu();
        }
    }
}

#[test]
fn spectrum_levels_are_ordered_without_rotation() {
    let p = PhysParams::isotropic_2d(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
    for i in modes_up_to_level(8, 2) {
        assert_eq!(eigenvalue(i, &p).unwrap(), i.k as f64);
    }
}
