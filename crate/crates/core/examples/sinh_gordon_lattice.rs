//! Three kinks of the sinh-Gordon equation (case 4, tau = -1) combined into a
//! Bianchi lattice: alpha_1, alpha_2, alpha_3, alpha_12, alpha_23, alpha_123.
//! Pass a directory to write every node as CSV.
//!
//! cargo run --release --example sinh_gordon_lattice -- [out-dir]

use std::f64::consts::PI;

use blc_lab::io::write_field_csv;
use blc_lab::{bianchi_lattice, kink_seed, CaseConfig, CaseId, Grid, ScalarField, SuperposeOptions};

fn main() -> blc_lab::Result<()> {
    let case = CaseConfig::new(CaseId::Four, -1);
    let grid = Grid::parse("-4:0:0.01,-4:4:0.01")?;
    let phis = [PI / 2.0, PI / 3.0, PI / 8.0];
    let kinks = phis
        .iter()
        .map(|&p| Ok(kink_seed(&case, p, 0.0)?.sample(&grid)))
        .collect::<blc_lab::Result<Vec<_>>>()?;
    let seed = ScalarField::constant(grid, 0.0);
    let lat = bianchi_lattice(&case, &seed, &phis, 3, kinks, &SuperposeOptions::default())?;

    for node in &lat.nodes {
        let parents = match node.parents {
            Some((b, l, r)) => format!("from {} and {} over {}", lat.nodes[l].label, lat.nodes[r].label, lat.nodes[b].label),
            None => String::new(),
        };
        println!(
            "{:<10} level {}  {:>6} valid nodes  {parents}",
            node.label,
            node.level,
            node.field.valid_count()
        );
    }
    if let Some(dir) = std::env::args().nth(1) {
        for node in &lat.nodes {
            write_field_csv(&std::path::Path::new(&dir).join(format!("{}.csv", node.label)), &node.field)?;
        }
        println!("wrote {} fields to {dir}", lat.nodes.len());
    }
    Ok(())
}
