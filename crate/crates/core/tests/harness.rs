use std::fs;

use mflab::harness::config::{ConvergeHartreeParams, ConvergeHfParams};
use mflab::harness::*;
use mflab::numerics::{Grid, PotentialSpec};
use mflab::Error;

fn scatter_config() -> ExperimentConfig {
    ExperimentConfig::from_json(
        r#"{"experiment": {"kind": "scatter",
            "potential": {"shape": "square-well", "amplitude": 1.0, "range": 1.0},
            "r_max": 5.0, "mesh": 2000}}"#,
    )
    .unwrap()
}

fn converge_params(amplitude: f64, t: f64) -> ConvergeHartreeParams {
    ConvergeHartreeParams {
        grid: Grid::new(1, 6.0, 6).unwrap(),
        v_ext: PotentialSpec::zero(),
        interaction: if amplitude == 0.0 { PotentialSpec::zero() } else { PotentialSpec::gaussian(amplitude, 1.0) },
        packet: Packet { center: [0.3, 0.0, 0.0], width: 1.0, momentum: [0.6, 0.0, 0.0] },
        t,
        particles: vec![2, 3, 4],
        exact_dt: 0.05,
        hartree_dt: 1e-3,
    }
}

#[test]
fn config_rejects_unknown_keys_at_every_level() {
    let bad = [
        r#"{"experiment": {"kind": "scatter", "potential": {"shape": "zero"}, "r_max": 5.0}, "colour": 1}"#,
        r#"{"experiment": {"kind": "scatter", "potential": {"shape": "zero"}, "r_max": 5.0, "rmax": 1}}"#,
        r#"{"experiment": {"kind": "scatter", "potential": {"shape": "zero", "radius": 1}, "r_max": 5.0}}"#,
        r#"{"experiment": {"kind": "teleport"}}"#,
    ];
    for text in bad {
        assert!(matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))), "{text}");
    }
}

#[test]
fn config_fills_defaults_and_hashes_the_resolved_form() {
    let cfg = scatter_config();
    assert_eq!(cfg.seed, 0);
    let Experiment::Scatter(p) = &cfg.experiment else { panic!("wrong kind") };
    assert_eq!(p.rescalings, vec![1, 2, 4, 8, 16]);
    // the resolved text parses back to the same hash
    let again = ExperimentConfig::from_json(&cfg.resolved()).unwrap();
    assert_eq!(again.hash(), cfg.hash());
    assert_eq!(cfg.hash().len(), 64);
    assert!(cfg.run_id().starts_with("scatter-"));
    let mut other = cfg.clone();
    other.seed = 1;
    assert_ne!(other.hash(), cfg.hash());
}

#[test]
fn schema_lists_every_kind() {
    let schema = config_schema();
    for kind in ["scatter", "hartree", "gp", "hf", "exact", "converge-hartree", "converge-hf", "fluct", "tf", "semiclass", "bbgky", "report"] {
        assert!(schema.contains(&format!("\"{kind}\"")), "{kind}");
    }
}

#[test]
fn csv_round_trips_with_header_lines() {
    let mut t = Table::new("demo", &[("x", "length"), ("y", "1")]);
    t.push(vec![0.1, 1e-300]);
    t.push(vec![-2.5, std::f64::consts::PI]);
    let bytes = render_csv(&t, "demo-000", "abc").unwrap();
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert!(text.starts_with("# run: demo-000\n# config-sha256: abc\n"));
    assert!(text.contains("# units: x [length], y [1]"));
    let (header, rows) = parse_csv(&bytes).unwrap();
    assert_eq!(header, vec!["x", "y"]);
    assert_eq!(rows, t.rows);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let cfg = scatter_config();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = write_run(a.path(), &cfg, &run(&cfg).unwrap()).unwrap();
    let fb = write_run(b.path(), &cfg, &run(&cfg).unwrap()).unwrap();
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
}

#[test]
fn seeded_battery_is_reproducible() {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/bbgky.json")).unwrap();
    let cfg = ExperimentConfig::from_json(&text).unwrap();
    let (a, b) = (run(&cfg).unwrap(), run(&cfg).unwrap());
    assert_eq!(a.table("collision_bound"), b.table("collision_bound"));
    let ratios = a.table("collision_bound").unwrap().column("ratio").unwrap();
    assert!(ratios.iter().all(|&r| (0.0..=1.0 + 1e-10).contains(&r)));
    let mut reseeded = cfg.clone();
    reseeded.seed += 1;
    assert_ne!(run(&reseeded).unwrap().table("collision_bound"), a.table("collision_bound"));
}

#[test]
fn converge_hartree_decreases_and_fits() {
    let rep = converge_hartree(&converge_params(3.0, 0.5)).unwrap();
    assert_eq!(rep.particles, vec![2, 3, 4]);
    assert!(rep.monotone_decreasing(), "{:?}", rep.distances);
    assert!(rep.fit.as_ref().unwrap().exponent < 0.0);
}

#[test]
fn converge_hartree_refuses_degenerate_fits() {
    let free = converge_hartree(&converge_params(0.0, 0.5)).unwrap();
    assert!(free.distances.iter().all(|&d| d < 1e-10), "{:?}", free.distances);
    assert!(free.fit.is_none());
    assert!(free.refusal.as_deref().unwrap().contains("degenerate data"));
    let start = converge_hartree(&converge_params(3.0, 0.0)).unwrap();
    assert!(start.distances.iter().all(|&d| d < 1e-12));
}

#[test]
fn infeasible_sweep_points_are_skipped() {
    let mut p = converge_params(3.0, 0.5);
    p.particles = vec![2, 3, 40];
    let rep = converge_hartree(&p).unwrap();
    assert_eq!(rep.particles, vec![2, 3]);
    assert_eq!(rep.skipped.len(), 1);
    assert!(rep.fit.is_none());
}

#[test]
fn converge_hf_free_and_initial_distances_vanish() {
    let p = ConvergeHfParams {
        grid: Grid::new(1, 8.0, 10).unwrap(),
        v_ext: PotentialSpec::harmonic(1.0),
        interaction: PotentialSpec::zero(),
        initial: FermiInitial::Trap { amplitude: 1.0, center: -0.5 },
        t: 0.5,
        particles: vec![2, 3, 4],
        dt: 1e-2,
    };
    let free = converge_hf(&p).unwrap();
    assert!(free.distances.iter().all(|&d| d < 1e-9), "{:?}", free.distances);
    let start = converge_hf(&ConvergeHfParams { interaction: PotentialSpec::gaussian(2.0, 0.7), t: 0.0, ..p }).unwrap();
    assert!(start.distances.iter().all(|&d| d < 1e-12), "{:?}", start.distances);
}

#[test]
fn report_requires_runs() {
    let dir = tempfile::tempdir().unwrap();
    let err = emit_report(dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn report_of_a_single_scatter_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scatter_config();
    write_run(dir.path(), &cfg, &run(&cfg).unwrap()).unwrap();
    let files = emit_report(dir.path()).unwrap();
    assert_eq!(files.runs, 1);
    let csvs = fs::read_dir(dir.path()).unwrap().filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "csv").count();
    assert_eq!(csvs, 1);
    let plot = fs::read_to_string(&files.plot).unwrap();
    assert_eq!(plot.matches("plot \"").count(), 1);
    // rerunning over the same directory gives the same bytes
    let before = (fs::read(&files.summary).unwrap(), fs::read(&files.plot).unwrap());
    emit_report(dir.path()).unwrap();
    assert_eq!(before, (fs::read(&files.summary).unwrap(), fs::read(&files.plot).unwrap()));
}

#[test]
fn report_carries_fits_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = converge_params(3.0, 0.5);
    let rep = converge_hartree(&p).unwrap();
    let fit = rep.fit.clone().unwrap();
    let cfg = ExperimentConfig { experiment: Experiment::ConvergeHartree(p), out: None, seed: 0 };
    write_run(dir.path(), &cfg, &rep.into_output("convergence", "1")).unwrap();
    let files = emit_report(dir.path()).unwrap();
    let parsed: serde_json::Value = serde_json::from_slice(&fs::read(files.summary).unwrap()).unwrap();
    let back: mflab::FitResult = serde_json::from_value(parsed["runs"][0]["fits"]["distance_vs_n"].clone()).unwrap();
    assert_eq!(back, fit);
}

#[test]
fn report_itemizes_missing_and_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scatter_config();
    let written = write_run(dir.path(), &cfg, &run(&cfg).unwrap()).unwrap();
    fs::write(dir.path().join("broken.json"), "{not json").unwrap();
    let corrupt = emit_report(dir.path()).unwrap_err();
    assert_eq!(corrupt.exit_code(), 1);
    assert!(corrupt.to_string().contains("broken.json"));
    fs::remove_file(&written[0]).unwrap();
    let missing = emit_report(dir.path()).unwrap_err();
    assert_eq!(missing.exit_code(), 2);
    let text = missing.to_string();
    assert!(text.contains("broken.json") && text.contains("not found"), "{text}");
}
