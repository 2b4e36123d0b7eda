//! Fast rotation from a noisy Gaussian. Qualitative only: watch `lz` grow as
//! vortices enter the cloud.
//!
//! `cargo run --release --example vortex_seed`

use gpflow::evolution::evolve;
use gpflow::io::parse_config;

const CONFIG: &str = "
[grid]
n = 128
L = 10
[phys]
Omega = 0.8
g = 500
gamma = 0.03
[evolve]
dt = 2e-3
T = 40
scheme = projection
record_every = 1000
[init]
kind = vortex_seed 0.5
seed = 1
";

fn main() -> gpflow::Result<()> {
    let cfg = parse_config(CONFIG)?;
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let tr = evolve(&cfg.initial_state(&grid)?, &p, &cfg.evolve_config())?;
    println!("{:>6} {:>14} {:>10}", "t", "energy", "lz");
    for r in &tr.records {
        println!("{:6.1} {:14.8} {:10.4}", r.t, r.energy, r.lz);
    }
    Ok(())
}
