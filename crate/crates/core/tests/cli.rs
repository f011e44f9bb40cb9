use std::path::Path;
use std::process::{Command, Output};

use blc_lab::cli::Manifest;
use blc_lab::io::{read_field_csv, write_field_csv};
use blc_lab::{example_solution, CaseId, Grid, ScalarField, SeedKind, SeedSpec};
use rand::{Rng, SeedableRng};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blc-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn seed_csv_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["seed", "--case", "4", "--tau", "-1", "--phi", "1.2", "--grid", "-2:0:0.05,-1:1:0.05"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = dir.path().join("seed.csv");
    let field = read_field_csv(&first).unwrap();
    let again = dir.path().join("again.csv");
    write_field_csv(&again, &field).unwrap();
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&again).unwrap());
    assert!(dir.path().join("seed.json").exists());
}

#[test]
fn noisy_seed_fails_transform() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::parse("-1:1:0.01,-1:1:0.01").unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut noisy = ScalarField::constant(grid, 0.0);
    for v in noisy.values.iter_mut() {
        *v = rng.random_range(-1e-2..1e-2);
    }
    let input = dir.path().join("noisy.csv");
    write_field_csv(&input, &noisy).unwrap();
    let args = [
        "transform",
        "--case",
        "4",
        "--tau",
        "-1",
        "--phi",
        "1",
        "--grid",
        "-1:1:0.01,-1:1:0.01",
        "--input",
        input.to_str().unwrap(),
    ];
    let o = run(&args, dir.path());
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));

    // the clean zero field passes the same run
    write_field_csv(&input, &ScalarField::constant(grid, 0.0)).unwrap();
    let o = run(&args, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn transform_reproduces_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "transform",
            "--case",
            "6",
            "--seed",
            "example4-alpha",
            "--phi",
            "0",
            "--grid",
            "-1:1:0.01,-0.5:0.5:0.01",
            "--tol-pde",
            "5e-3",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let field = read_field_csv(&dir.path().join("alpha_prime.csv")).unwrap();
    let exact = example_solution(&SeedSpec::new(SeedKind::Example4Alpha1, CaseId::Six))
        .unwrap()
        .sample(&field.grid);
    assert_eq!(field.masked_count(), 0);
    assert!(field.max_diff(&exact).unwrap() <= 1e-6);
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn superpose_manifest_is_a_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "superpose",
            "--case",
            "4",
            "--tau",
            "-1",
            "--phi",
            "1.5707963267948966,1.0471975511965976,0.39269908169872414",
            "--grid",
            "-4:-2.5:0.02,-0.5:0.5:0.02",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let m: Manifest = serde_json::from_str(&text).unwrap();
    assert_eq!(m.nodes.len(), 7);
    assert_eq!(m.nodes.iter().filter(|n| n.level > 0).count(), 6);
    for n in &m.nodes {
        let indegree = m.edges.iter().filter(|e| e.to == n.id).count();
        assert_eq!(indegree, n.level.min(2), "{}", n.label);
        assert!(dir.path().join(&n.file).exists());
    }
    // edges only go up one level, so the graph is acyclic
    for e in &m.edges {
        assert_eq!(m.nodes[e.to].level, m.nodes[e.from].level + 1);
    }

    let o = run(
        &[
            "verify",
            "--case",
            "4",
            "--tau",
            "-1",
            "--phi",
            "1.5707963267948966,1.0471975511965976,0.39269908169872414",
            "--grid",
            "-4:-2.5:0.02,-0.5:0.5:0.02",
            "--tol-pde",
            "1e-2",
            "--tol-bt",
            "1e-2",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("verify.json").exists());
}

#[test]
fn bad_config_and_unwritable_output() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["seed", "--case", "9"], dir.path())), 2);
    assert_eq!(code(&run(&["transform", "--case", "4", "--phi", "4"], dir.path())), 2);
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "no-such-key = 1\n").unwrap();
    assert_eq!(code(&run(&["seed", "--config", cfg.to_str().unwrap()], dir.path())), 2);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = run(&["seed", "--case", "1", "--phi", "1", "--grid", "-1:1:0.1,-1:1:0.1"], &blocker.join("sub"));
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}
