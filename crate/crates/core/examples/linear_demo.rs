//! Linear flow of a two-mode mix against the mode ODE.
//!
//! The higher mode dies out at rate `gamma (lambda_3 - lambda_1) / (1 + gamma^2)`
//! and `mu` falls to the smallest eigenvalue in the datum.
//!
//! `cargo run --release --example linear_demo`

use std::sync::Arc;

use gpflow::evolution::{evolve, EvolveConfig, Scheme};
use gpflow::spectral_basis::{decompose_on, eigenfunction, ode_oracle, EigenIndex};
use gpflow::{Grid, PhysParams};
use num_complex::Complex64;

fn main() -> gpflow::Result<()> {
    let grid = Arc::new(Grid::new(&[64, 64], &[8.0, 8.0])?);
    let p = PhysParams::isotropic_2d(1.0, 0.0, 0.0, 1.0, 1.0)?;
    let modes = [EigenIndex::new(1, 0), EigenIndex::new(3, 0)];
    let phis = modes.iter().map(|&i| eigenfunction(i, &grid, &p)).collect::<gpflow::Result<Vec<_>>>()?;
    let psi0 = phis[0].scaled(Complex64::new(0.8, 0.0)).axpy(Complex64::new(0.6, 0.0), &phis[1])?;

    let cfg = EvolveConfig::new(1e-3, 6.0, Scheme::Projection)
        .with_record_every(500)
        .with_snapshot_every(500);
    let tr = evolve(&psi0, &p, &cfg)?;
    let d0 = decompose_on(&psi0, &modes, &phis, &p)?;
    let oracle = ode_oracle(&d0.modes, 6.0, 0.5)?;

    println!("{:>5} {:>12} {:>12} {:>12} {:>12} {:>10}", "t", "|b1| field", "|b1| ode", "|b3| field", "|b3| ode", "|b3/b1|");
    for ((t, f), (_, ms)) in tr.snapshots.iter().zip(&oracle) {
        let d = decompose_on(f, &modes, &phis, &p)?;
        let (b1, b3) = (d.modes.b[0].norm(), d.modes.b[1].norm());
        println!(
            "{t:5.2} {b1:12.9} {:12.9} {b3:12.9} {:12.9} {:10.3e}",
            ms.b[0].norm(),
            ms.b[1].norm(),
            b3 / b1
        );
    }
    println!("mu(T) = {:.12}", tr.last().mu);
    Ok(())
}
