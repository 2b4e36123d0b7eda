//! Damped rotating flow from an off-center datum, both schemes.
//!
//! `cargo run --release --example evolve`

use std::sync::Arc;

use gpflow::evolution::{evolve, EvolveConfig, Scheme};
use gpflow::{ComplexField, Grid, PhysParams};
use num_complex::Complex64;

fn main() -> gpflow::Result<()> {
    let grid = Arc::new(Grid::new(&[64, 64], &[8.0, 8.0])?);
    let p = PhysParams::isotropic_2d(1.0, 0.4, 5.0, 1.0, 0.5)?;
    let mut psi0 = ComplexField::from_fn(&grid, |x| {
        Complex64::new(1.0 + 0.4 * x[0], 0.3 * x[1]) * (-((x[0] - 0.5).powi(2) + 1.3 * x[1] * x[1]) / 2.0).exp()
    });
    psi0.scale(Complex64::new(1.0 / psi0.norm_sqr().sqrt(), 0.0));

    for scheme in [Scheme::Projection, Scheme::ExplicitMu] {
        let cfg = EvolveConfig::new(2e-3, 4.0, scheme).with_record_every(250);
        let tr = evolve(&psi0, &p, &cfg)?;
        println!("{scheme}");
        println!("{:>6} {:>18} {:>18} {:>18} {:>10}", "t", "energy", "mu", "mass - 1", "lz");
        for r in &tr.records {
            println!("{:6.2} {:18.12} {:18.12} {:18.3e} {:10.6}", r.t, r.energy, r.mu, r.mass - 1.0, r.lz);
        }
        println!("energy balance residual {:.3e}\n", tr.energy_balance_residual(p.gamma()));
    }
    Ok(())
}
