//! Ground states of the repulsive condensate with and without rotation.
//!
//! `cargo run --release --example ground_state`

use std::sync::Arc;

use gpflow::ground_state::{compute_ground_state, default_max_time};
use gpflow::{ComplexField, Grid, PhysParams};
use num_complex::Complex64;

fn main() -> gpflow::Result<()> {
    let grid = Arc::new(Grid::new(&[64, 64], &[8.0, 8.0])?);
    let init = ComplexField::from_fn(&grid, |x| {
        Complex64::new(1.0 + 0.3 * x[0], 0.2 * x[1]) * (-(x[0] * x[0] + x[1] * x[1]) / 3.0).exp()
    });
    for (g, rotation) in [(0.0, 0.0), (10.0, 0.0), (10.0, 0.5)] {
        let p = PhysParams::isotropic_2d(1.0, rotation, g, 1.0, 1.0)?;
        let gs = compute_ground_state(&p, &grid, &init, 1e-7, default_max_time(&p))?;
        println!(
            "g = {g:4}  Omega = {rotation}  E = {:.10}  mu = {:.10}  residual = {:.2e}  t = {:.1}  converged = {}",
            gs.energy, gs.mu, gs.residual, gs.time, gs.converged
        );
    }
    Ok(())
}
