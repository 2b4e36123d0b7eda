//! `gpflow` subcommands.
//!
//! Every subcommand reads an optional `--config FILE` and then applies
//! `--key value` overrides for any config key. Exit codes: 0 success,
//! 1 runtime failure (blow-up, no convergence, failed self-check),
//! 2 configuration error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::evolution::{evolve, frozen_mu_iteration};
use crate::ground_state::{compute_ground_state, default_max_time, DEFAULT_TOL};
use crate::io::{parse_config_with, write_snapshot_file, write_timeseries_file, RunConfig};
use crate::selfcheck::{run_selfcheck, SelfCheckConfig};
use crate::spectral_basis::{basis, decompose_on, modes_up_to_level, ode_oracle, smallest_eigenvalue_in_datum, spectrum_table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "gpflow", version, about = "Damped rotating Gross-Pitaevskii flow on a periodic spectral grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve the initial datum, write the time series and snapshots
    Evolve(Common),
    /// Relax to the ground state with the projection scheme
    Groundstate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Flow time limit, default 200 / gamma
        #[arg(long = "max-time")]
        max_time: Option<f64>,
    },
    /// Eigenvalues of H_Omega up to a level
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Linear run (g = 0) compared against the mode ODE
    LinearDemo {
        #[command(flatten)]
        common: Common,
        /// Modes up to this level enter the comparison
        #[arg(long, default_value_t = 6)]
        levels: usize,
    },
    /// Frozen-mu iteration, prints the Cauchy increments
    Iterate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        iterations: usize,
    },
    /// Invariant suite over random fields
    Selfcheck {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        n: usize,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Config file, defaults fill what it leaves out
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

macro_rules! overrides {
    ($($field:ident => $key:literal),* $(,)?) => {
        /// One flag per config key, each beating the file.
        #[derive(Args, Debug)]
        struct Overrides {
            $(
                #[arg(long = $key, value_name = "VALUE", allow_hyphen_values = true)]
                $field: Option<String>,
            )*
        }

        impl Overrides {
            fn pairs(&self) -> Vec<(String, String)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push(($key.to_string(), v.clone()));
                    }
                )*
                out
            }
        }
    };
}

overrides! {
    d => "d",
    n => "n",
    half_length => "L",
    omega => "omega",
    rotation => "Omega",
    g => "g",
    sigma => "sigma",
    gamma => "gamma",
    mass => "mass",
    dt => "dt",
    t_final => "T",
    scheme => "scheme",
    record_every => "record_every",
    snapshot_every => "snapshot_every",
    kind => "kind",
    seed => "seed",
    dir => "dir",
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?,
            None => String::new(),
        };
        parse_config_with(&text, &self.overrides.pairs())
    }
}

/// Runs the CLI on `args` (program name first) with the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_config_error() {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Evolve(c) => cmd_evolve(&c.load()?, out),
        Command::Groundstate { common, tol, max_time } => cmd_groundstate(&common.load()?, tol, max_time, out),
        Command::Spectrum { common, levels } => cmd_spectrum(&common.load()?, levels, out),
        Command::LinearDemo { common, levels } => cmd_linear_demo(&common.load()?, levels, out),
        Command::Iterate { common, iterations } => cmd_iterate(&common.load()?, iterations, out),
        Command::Selfcheck { samples, seed, n } => {
            let report = run_selfcheck(&SelfCheckConfig {
                samples,
                n,
                seed,
                ..Default::default()
            })?;
            write!(out, "{report}")?;
            Ok(if report.all_passed() { EXIT_OK } else { EXIT_RUNTIME })
        }
    }
}

fn prepare_dir(cfg: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    std::fs::write(cfg.output_dir.join("run.cfg"), cfg.to_config_text())?;
    Ok(&cfg.output_dir)
}

fn cmd_evolve(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let ec = cfg.evolve_config();
    let steps = ec.steps()?;
    let psi0 = cfg.initial_state(&grid)?;
    let tr = evolve(&psi0, &p, &ec)?;
    let dir = prepare_dir(cfg)?;
    write_timeseries_file(&dir.join("timeseries.csv"), &tr.records)?;
    for (t, f) in &tr.snapshots {
        let step = (t / cfg.dt).round() as usize;
        write_snapshot_file(&dir.join(format!("snapshot_{step:08}.gpsn")), f, *t)?;
    }
    write_snapshot_file(&dir.join("final.gpsn"), &tr.final_state, cfg.t_final)?;
    let last = tr.last();
    writeln!(out, "scheme {} steps {steps} records {}", cfg.scheme, tr.records.len())?;
    writeln!(out, "T {:.6} mass {:.16e} energy {:.16e} mu {:.16e}", last.t, last.mass, last.energy, last.mu)?;
    writeln!(
        out,
        "energy balance residual {:.3e}  wrote {}",
        tr.energy_balance_residual(p.gamma()),
        dir.display()
    )?;
    Ok(EXIT_OK)
}

fn cmd_groundstate(cfg: &RunConfig, tol: f64, max_time: Option<f64>, out: &mut dyn Write) -> Result<i32> {
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let psi0 = cfg.initial_state(&grid)?;
    let max_time = max_time.unwrap_or_else(|| default_max_time(&p));
    let gs = compute_ground_state(&p, &grid, &psi0, tol, max_time)?;
    let dir = prepare_dir(cfg)?;
    write_snapshot_file(&dir.join("ground_state.gpsn"), &gs.state, gs.time)?;
    writeln!(out, "energy {:.16e}", gs.energy)?;
    writeln!(out, "mu {:.16e}", gs.mu)?;
    writeln!(out, "residual {:.3e} tol {tol:.1e}", gs.residual)?;
    writeln!(out, "flow time {:.3} final dt {:.3e}", gs.time, gs.dt_final)?;
    if gs.converged {
        writeln!(out, "converged, wrote {}", dir.join("ground_state.gpsn").display())?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "not converged by t = {max_time}")?;
        Ok(EXIT_RUNTIME)
    }
}

fn cmd_spectrum(cfg: &RunConfig, levels: usize, out: &mut dyn Write) -> Result<i32> {
    let p = cfg.params()?;
    let rows = spectrum_table(levels, &p)?;
    if cfg.d == 3 {
        writeln!(out, "k,m,nz,lambda")?;
        for (i, l) in rows {
            writeln!(out, "{},{},{},{l}", i.k, i.m, i.nz)?;
        }
    } else {
        writeln!(out, "k,m,lambda")?;
        for (i, l) in rows {
            writeln!(out, "{},{},{l}", i.k, i.m)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_linear_demo(cfg: &RunConfig, levels: usize, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = cfg.clone();
    cfg.g = 0.0;
    if cfg.snapshot_every == 0 {
        cfg.snapshot_every = cfg.record_every;
    }
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let psi0 = cfg.initial_state(&grid)?;
    let modes = modes_up_to_level(levels, cfg.d);
    let phis = basis(&modes, &grid, &p)?;
    let d0 = decompose_on(&psi0, &modes, &phis, &p)?;
    let lambda_star = smallest_eigenvalue_in_datum(&d0.modes, 1e-8)?;
    let tr = evolve(&psi0, &p, &cfg.evolve_config())?;
    let oracle = ode_oracle(&d0.modes, cfg.t_final, cfg.dt * cfg.snapshot_every as f64)?;

    writeln!(out, "captured mass of the datum {:.12}", d0.captured_mass)?;
    writeln!(out, "smallest eigenvalue in the datum {lambda_star}")?;
    writeln!(out, "t,max_modulus_gap,mu_field,mu_modes")?;
    let mut worst = 0.0f64;
    for ((t, f), (_, ms)) in tr.snapshots.iter().zip(&oracle) {
        let d = decompose_on(f, &modes, &phis, &p)?;
        let gap = d
            .modes
            .b
            .iter()
            .zip(&ms.b)
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max);
        worst = worst.max(gap);
        let mu = crate::functionals::chemical_potential(f, &p)?;
        writeln!(out, "{t:.6},{gap:.3e},{mu:.12},{:.12}", ms.mu())?;
    }
    let last = tr.last();
    writeln!(out, "max modulus gap {worst:.3e}")?;
    writeln!(out, "mu(T) - lambda* = {:.3e}", last.mu - lambda_star)?;
    let dir = prepare_dir(&cfg)?;
    write_timeseries_file(&dir.join("timeseries.csv"), &tr.records)?;
    Ok(EXIT_OK)
}

fn cmd_iterate(cfg: &RunConfig, iterations: usize, out: &mut dyn Write) -> Result<i32> {
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let psi0 = cfg.initial_state(&grid)?;
    let fi = frozen_mu_iteration(&psi0, &p, &cfg.evolve_config(), iterations)?;
    writeln!(out, "k,increment,ratio,mass_law_residual")?;
    for (k, inc) in fi.increments.iter().enumerate() {
        let ratio = if k == 0 { f64::NAN } else { inc / fi.increments[k - 1] };
        writeln!(out, "{},{inc:.6e},{ratio:.4},{:.3e}", k + 1, fi.mass_law_residual(k + 1, p.gamma()))?;
    }
    Ok(EXIT_OK)
}
