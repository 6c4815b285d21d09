//! Config parsing, command execution and output files.

use std::fs;
use std::path::Path;

use hjselect::cli::{execute, run, write_outputs, Cli, Command, ExperimentConfig, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};
use hjselect::Error;

const HEAD: &str = "schema = \"hjselect-config-v1\"\n";

fn parse(body: &str) -> hjselect::Result<ExperimentConfig> {
    ExperimentConfig::parse(&format!("{HEAD}{body}"))
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|s| s.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn run_file(command: Command, text: &str, dir: &Path) -> u8 {
    let config = dir.join("config.toml");
    fs::write(&config, text).unwrap();
    run(&Cli { command, config, out: Some(dir.join("out")), jobs: 2 })
}

#[test]
fn unknown_keys_are_rejected_at_every_level() {
    assert!(matches!(parse("bogus = 1\n"), Err(Error::Config(_))));
    assert!(matches!(parse("[grid]\nn_points = 64\nspacing = 0.1\n"), Err(Error::Config(_))));
    assert!(matches!(parse("[model]\nkind = \"double_well\"\nmass = 2\n"), Err(Error::Config(_))));
    assert!(matches!(parse("[verify]\nbump_widht = 0.1\n"), Err(Error::Config(_))));
    assert!(parse("[grid]\nn_points = 64\n").is_ok());
}

#[test]
fn schema_and_command_must_match() {
    assert!(ExperimentConfig::parse("schema = \"other\"\n").is_err());
    let cfg = parse("command = \"limit\"\n[model]\nkind = \"double_well\"\n").unwrap();
    assert!(cfg.validate_for(Command::Limit).is_ok());
    assert!(matches!(cfg.validate_for(Command::Solve), Err(Error::Config(_))));
    let no_model = parse("").unwrap();
    assert!(no_model.validate_for(Command::Solve).is_err());
}

#[test]
fn free_sweep_reproduces_the_hamiltonian() {
    let cfg = parse("[model]\nkind = \"double_well\"\n[grid]\nn_points = 32\n[sweep]\nmomenta = [0.0, 0.5, 1.0, 1.7]\n").unwrap();
    let out = execute(Command::HbarSweep, &cfg, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(Command::HbarSweep, &cfg, &out, dir.path(), 0.0).unwrap();
    let (header, rows) = read_csv(&dir.path().join("hbar_sweep.csv"));
    assert_eq!(header[1], "hbar (effective Hamiltonian)");
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!((r[1] - (r[0] * r[0] - 1.0).powi(2)).abs() < 1e-9);
        assert_eq!(r[3], 1.0);
    }
}

#[test]
fn free_limit_is_zero() {
    let cfg = parse("[model]\nkind = \"double_well\"\nmomentum = 0.4\n[grid]\nn_points = 32\n").unwrap();
    let out = execute(Command::Limit, &cfg, 1).unwrap();
    assert!(out.values["max_abs_v"] < 1e-8);
    assert!((out.values["hbar"] - (0.16f64 - 1.0).powi(2)).abs() < 1e-9);
}

#[test]
fn adjoint_measure_is_normalized() {
    let cfg = parse(
        "[model]\nkind = \"flat\"\npotential = { kind = \"triangular_bump\", width = 0.1 }\n\
         [grid]\nn_points = 128\n[discount]\nladder = [0.016, 0.008, 0.004]\nhbar = 1.0\n",
    )
    .unwrap();
    let out = execute(Command::Adjoint, &cfg, 1).unwrap();
    assert!(out.values["mass_defect"] < 1e-8);
    assert!(out.values["total_mass"].is_finite() && out.values["total_mass"] > 0.0);
    assert!(out.values["min_theta"] >= 0.0);
}

#[test]
fn maximal_subsolution_peaks_at_vertex() {
    let cfg = parse(
        "[model]\nkind = \"flat\"\npotential = { kind = \"triangular_bump\", width = 0.1 }\n\
         [grid]\nn_points = 256\n[discount]\nhbar = 1.0\n[maxsub]\nvertices = [0.3]\n",
    )
    .unwrap();
    let out = execute(Command::Maxsub, &cfg, 1).unwrap();
    assert!(out.values["super_residual_at_vertex"] >= 0.9);
    assert!(out.values["max_sub_residual"] < 1e-2);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_job_counts() {
    let text = format!(
        "{HEAD}command = \"hbar-sweep\"\n[model]\nkind = \"double_well\"\npotential = {{ kind = \"tent\", half_width = 0.25, peak = 0.5 }}\n\
         [grid]\nn_points = 64\n[sweep]\nlinspace = {{ start = 0.0, stop = 2.0, count = 9 }}\n"
    );
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let config = a.path().join("c.toml");
    fs::write(&config, &text).unwrap();
    assert_eq!(run(&Cli { command: Command::HbarSweep, config: config.clone(), out: Some(a.path().join("o")), jobs: 1 }), EXIT_OK);
    assert_eq!(run(&Cli { command: Command::HbarSweep, config, out: Some(b.path().join("o")), jobs: 4 }), EXIT_OK);
    for f in ["report.json", "hbar_sweep.csv"] {
        assert_eq!(fs::read(a.path().join("o").join(f)).unwrap(), fs::read(b.path().join("o").join(f)).unwrap(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("o/report.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "report_v1");
    assert_eq!(report["command"], "hbar-sweep");
    assert!(a.path().join("o/timings.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = format!("{HEAD}[model]\nkind = \"double_well\"\n[grid]\nn_points = 32\n");
    assert_eq!(run_file(Command::Solve, &ok, dir.path()), EXIT_OK);
    assert!(dir.path().join("out/solve.csv").exists());

    assert_eq!(run_file(Command::Solve, &format!("{ok}typo = 3\n"), dir.path()), EXIT_CONFIG);
    assert_eq!(run_file(Command::Solve, "schema = \"hjselect-config-v1\"\n[grid\n", dir.path()), EXIT_CONFIG);
    let missing = Cli { command: Command::Solve, config: dir.path().join("absent.toml"), out: None, jobs: 1 };
    assert_eq!(run(&missing), EXIT_CONFIG);

    let starved = format!("{HEAD}[model]\nkind = \"double_well\"\npotential = {{ kind = \"tent\", half_width = 0.25, peak = 0.5 }}\n[grid]\nn_points = 64\n[solver]\nmax_iter = 2\n");
    assert_eq!(run_file(Command::Solve, &starved, dir.path()), EXIT_NUMERICAL);

    let failing = format!("{ok}[[assert]]\nvalue = \"u_max\"\nat_least = 1e6\n");
    assert_eq!(run_file(Command::Solve, &failing, dir.path()), EXIT_NUMERICAL);
    let unknown = format!("{ok}[[assert]]\nvalue = \"nonexistent\"\nat_most = 1\n");
    assert_eq!(run_file(Command::Solve, &unknown, dir.path()), EXIT_NUMERICAL);
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let command = cfg.command.expect("shipped configs name their command");
        cfg.validate_for(command).unwrap();
        count += 1;
    }
    assert!(count >= 8);
}
