//! Drive the command-line pipeline from a TOML config: build a lattice on
//! 4 arctan e^x1, then verify it. Outputs go to a temporary directory.
//!
//! cargo run --release --example cli_config

use blc_lab::cli::{cmd_superpose, cmd_verify, CommandKind, RunConfig};

fn main() -> blc_lab::Result<()> {
    let dir = std::env::temp_dir().join("blc-lab-cli-config");
    let text = format!(
        r#"
seed = "example4-alpha"
phi = [0.0, 0.881373587019543]
grid = "-2:2:0.01,-0.5:0.5:0.01"
tol-pde = 5e-3
tol-bt = 5e-3
out = "{}"
"#,
        dir.display()
    );
    let cfg = RunConfig::from_toml(&text).map_err(blc_lab::Error::Config)?;
    let built = cmd_superpose(&cfg.resolve(CommandKind::Superpose)?)?;
    let checked = cmd_verify(&cfg.resolve(CommandKind::Verify)?)?;
    for line in built.lines.iter().chain(&checked.lines) {
        println!("{line}");
    }
    println!("{} tolerance violations", checked.violations.len());
    Ok(())
}
