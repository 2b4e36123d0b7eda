//! Writing and reading the CSV time series and GPSN snapshots.
//!
//! `cargo run --release --example snapshot_io -- [DIR]`

use std::path::PathBuf;
use std::sync::Arc;

use gpflow::evolution::{evolve, EvolveConfig, Scheme};
use gpflow::io::{read_snapshot_file, read_timeseries, write_snapshot_file, write_timeseries_file};
use gpflow::spectral_basis::{eigenfunction, EigenIndex};
use gpflow::{Grid, PhysParams};

fn main() -> gpflow::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;
    let grid = Arc::new(Grid::new(&[32, 32], &[7.0, 7.0])?);
    let p = PhysParams::isotropic_2d(1.0, 0.5, 2.0, 1.0, 1.0)?;
    let psi0 = eigenfunction(EigenIndex::new(2, 1), &grid, &p)?;
    let tr = evolve(&psi0, &p, &EvolveConfig::new(0.01, 0.5, Scheme::Projection).with_record_every(10))?;

    let csv = dir.join("vortex.csv");
    let snap = dir.join("vortex.gpsn");
    write_timeseries_file(&csv, &tr.records)?;
    write_snapshot_file(&snap, &tr.final_state, 0.5)?;

    let records = read_timeseries(&std::fs::read_to_string(&csv)?)?;
    let (t, back) = read_snapshot_file(&snap)?;
    println!("{}: {} records, last energy {:.12}", csv.display(), records.len(), records.last().map_or(f64::NAN, |r| r.energy));
    println!(
        "{}: {} bytes, t = {t}, identical = {}",
        snap.display(),
        std::fs::metadata(&snap)?.len(),
        back.data() == tr.final_state.data()
    );
    Ok(())
}
