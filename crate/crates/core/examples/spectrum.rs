//! Eigenvalues of H_Omega and a check of the analytic modes on the grid.
//!
//! `cargo run --release --example spectrum`

use std::sync::Arc;

use gpflow::operators::apply_h;
use gpflow::spectral_basis::{eigenfunction, spectrum_table};
use gpflow::{Grid, PhysParams};
use num_complex::Complex64;

fn main() -> gpflow::Result<()> {
    let grid = Arc::new(Grid::new(&[128, 128], &[8.0, 8.0])?);
    let p = PhysParams::isotropic_2d(1.0, 0.5, 0.0, 1.0, 1.0)?;
    println!("{:>3} {:>3} {:>8} {:>12}", "k", "m", "lambda", "||H phi - lambda phi||");
    for (idx, lambda) in spectrum_table(4, &p)? {
        let phi = eigenfunction(idx, &grid, &p)?;
        let r = apply_h(&phi, &p)?.axpy(Complex64::new(-lambda, 0.0), &phi)?;
        println!("{:3} {:3} {:8.3} {:12.3e}", idx.k, idx.m, lambda, r.norm_sqr().sqrt());
    }
    Ok(())
}
