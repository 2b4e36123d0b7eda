//! Iterating the frozen-lambda equation towards the full flow.
//!
//! `cargo run --release --example frozen_iteration`

use std::sync::Arc;

use gpflow::evolution::{evolve, frozen_mu_iteration, EvolveConfig, Scheme};
use gpflow::{ComplexField, Grid, PhysParams};
use num_complex::Complex64;

fn main() -> gpflow::Result<()> {
    let grid = Arc::new(Grid::new(&[64, 64], &[8.0, 8.0])?);
    let p = PhysParams::isotropic_2d(1.0, 0.4, 5.0, 1.0, 0.5)?;
    let mut psi0 = ComplexField::from_fn(&grid, |x| {
        Complex64::new(1.0 + 0.4 * x[0], 0.3 * x[1]) * (-((x[0] - 0.5).powi(2) + x[1] * x[1]) / 2.0).exp()
    });
    psi0.scale(Complex64::new(1.0 / psi0.norm_sqr().sqrt(), 0.0));

    let cfg = EvolveConfig::new(1e-3, 0.5, Scheme::ExplicitMu);
    let fi = frozen_mu_iteration(&psi0, &p, &cfg, 6)?;
    for (k, inc) in fi.increments.iter().enumerate() {
        println!(
            "k = {}  increment {inc:.3e}  mass-law residual {:.2e}",
            k + 1,
            fi.mass_law_residual(k + 1, p.gamma())
        );
    }
    let direct = evolve(&psi0, &p, &cfg)?;
    let gap = fi.iterates.last().expect("six iterates").final_state.sub(&direct.final_state)?;
    println!("last iterate vs direct solver: {:.3e}", gap.norm_sqr().sqrt());
    Ok(())
}
