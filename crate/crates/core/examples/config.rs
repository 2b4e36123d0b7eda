//! Parsing a run configuration with command-line style overrides.
//!
//! `cargo run --example config`

use gpflow::io::{parse_config, parse_config_with};

const TEXT: &str = "
[grid]
n = 64
L = 8
[phys]
Omega = 0.3   # rotation about the third axis
g = 10
[init]
kind = mix 1 0 0.8, 2 1 0.6
";

fn main() {
    let base = parse_config(TEXT).expect("valid config");
    println!("{}", base.to_config_text());
    let over = parse_config_with(TEXT, &[("g".into(), "2".into()), ("phys.gamma".into(), "0.5".into())]).expect("valid");
    println!("overridden: g = {}, gamma = {}", over.g, over.gamma);
    match parse_config("[phys]\ngamma = 0\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!("gamma = 0 must fail"),
    }
}
