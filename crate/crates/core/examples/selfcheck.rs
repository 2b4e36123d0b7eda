//! The invariant suite behind `gpflow selfcheck`.
//!
//! `cargo run --release --example selfcheck`

use gpflow::selfcheck::{run_selfcheck, SelfCheckConfig};

fn main() -> gpflow::Result<()> {
    let report = run_selfcheck(&SelfCheckConfig::default())?;
    print!("{report}");
    std::process::exit(if report.all_passed() { 0 } else { 1 });
}
