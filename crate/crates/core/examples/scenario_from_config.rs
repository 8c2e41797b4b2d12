//! Run a scenario file and list its outputs.
//!
//! `cargo run --example scenario_from_config -- examples/configs/heat.toml out/heat`

use std::path::PathBuf;

use entroflow::report::{run_scenario, ScenarioConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let config = args.next().unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/heat.toml").to_string()
    });
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("entroflow-heat"));
    let config = match ScenarioConfig::load(config.as_ref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let outcome = run_scenario(&config, &out);
    for c in &outcome.summary.checks {
        println!("{:<24} {:<5} worst {:.3e}", c.name, if c.pass { "pass" } else { "FAIL" }, c.worst_residual);
    }
    println!("files in {}: {:?}", out.display(), outcome.summary.files);
    std::process::exit(outcome.status.code());
}
