// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SPECTRUM: &str = "[spectrum]\nshape = q_gaussian\nq = 1.39\ncoupling = 8.6 MHz\nfwhm = 9.4 MHz\n\n\
                        [environment]\ncavity = 2.69 GHz\nkappa = 0.4 MHz\n\n";

const GRID: &str = "[grid]\ndt = 1 ns\nhorizon = 1 us\n\n";

fn cavity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity")).args(args).output().expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary(dir: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(dir.join("summary.csv")).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(String::from)).collect())
        .collect()
}

#[test]
fn run_writes_outputs_and_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "a.ini",
        &format!(
            "{SPECTRUM}[drive]\nkind = rectangular\namplitude = 2 MHz\nt_off = 400 ns\n\n{GRID}\
             [outputs]\nlist = u, y, v_diag, coefficients, intensity, self_energy, response\n"
        ),
    );
    let out = dir.path().join("out");
    let o = cavity(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let names: Vec<String> = files(&out).into_keys().collect();
    for f in ["u.csv", "y.csv", "v_diag.csv", "coefficients.csv", "intensity.csv", "self_energy.csv", "response.csv"] {
        assert!(names.contains(&f.to_string()), "{f} missing from {names:?}");
    }
    let m: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let two_pi = std::f64::consts::TAU;
    assert_eq!(m["spectrum"]["coupling"].as_f64().unwrap(), two_pi * 8.6);
    assert_eq!(m["environment"]["cavity_frequency"].as_f64().unwrap(), two_pi * 2690.0);
    assert_eq!(m["drive"]["amplitude"].as_f64().unwrap(), two_pi * 2.0);
    assert_eq!(m["drive"]["t_off"].as_f64().unwrap(), 0.4);
    assert_eq!(m["grid"]["steps"].as_u64().unwrap(), 1000);
    assert_eq!(m["version"].as_str().unwrap(), cavity_core::VERSION);

    let u = fs::read_to_string(out.join("u.csv")).unwrap();
    assert_eq!(u.lines().next().unwrap(), "t_us,re,im,abs");
    assert_eq!(u.lines().count(), 1002);
    assert!(u.lines().nth(1).unwrap().starts_with("0,1,0,1"));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "a.ini",
        &format!(
            "{SPECTRUM}[initial]\nstate = thermal\nmean_photons = 0.1\n\n{GRID}\
             [correlation]\nt_step = 50 ns\nt_max = 400 ns\ntau_step = 50 ns\ntau_max = 400 ns\n\n\
             [outputs]\nlist = u, intensity, g1_grid, g2_grid, quantum_correlation\n"
        ),
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(cavity(&["run", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(cavity(&["run", &cfg, "--out", b.to_str().unwrap()]).status.success());
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.len(), 6);
    assert_eq!(fa, fb);
}

#[test]
fn empty_output_list_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "a.ini", &format!("{SPECTRUM}{GRID}[outputs]\nlist = ,\n"));
    let o = cavity(&["run", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no outputs requested"), "{}", stderr(&o));

    let cfg = write_config(&dir, "b.ini", &format!("{SPECTRUM}{GRID}"));
    let o = cavity(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no outputs requested"));
}

#[test]
fn diagnostics_point_at_the_offending_line() {
    let dir = TempDir::new().unwrap();
    // line 5 carries a frequency without a unit
    let text = SPECTRUM.replace("fwhm = 9.4 MHz", "fwhm = 9.4") + "[outputs]\nlist = u\n";
    let cfg = write_config(&dir, "a.ini", &text);
    let o = cavity(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));

    let text = format!("{SPECTRUM}[outputs]\nlist = u\nspeed = 3\n");
    let cfg = write_config(&dir, "b.ini", &text);
    let o = cavity(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 13") && stderr(&o).contains("unknown key 'speed'"), "{}", stderr(&o));
}

#[test]
fn invalid_physics_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let text = SPECTRUM.replace("q = 1.39", "q = 3.5") + "[outputs]\nlist = u\n";
    let o = cavity(&["run", &write_config(&dir, "a.ini", &text)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn spectral_truncation_exits_with_solver_code() {
    let dir = TempDir::new().unwrap();
    let text = SPECTRUM.replace("q = 1.39", "q = 2.8") + GRID + "[outputs]\nlist = u\n";
    let o = cavity(&["run", &write_config(&dir, "a.ini", &text), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("truncation"));
}

#[test]
fn overrides_change_the_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "a.ini", &format!("{SPECTRUM}{GRID}[outputs]\nlist = u\n"));
    let out = dir.path().join("o");
    let o = cavity(&["run", &cfg, "--out", out.to_str().unwrap(), "--dt", "2 ns", "--horizon", "0.5 us"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("u.csv")).unwrap().lines().count(), 252);
    assert_eq!(cavity(&["run", &cfg, "--dt", "2"]).status.code(), Some(2));
}

#[test]
fn single_point_sweep_matches_run() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        "{SPECTRUM}[drive]\nkind = rectangular\nphotons = 100\nt_off = 300 ns\n\n{GRID}[outputs]\nlist = u, y, intensity\n"
    );
    let run_cfg = write_config(&dir, "run.ini", &body);
    let sweep_cfg = write_config(&dir, "sweep.ini", &format!("{body}[sweep]\nparameter = coupling\nvalues = 8.6 MHz\n"));
    let (a, b) = (dir.path().join("run"), dir.path().join("sweep"));
    assert!(cavity(&["run", &run_cfg, "--out", a.to_str().unwrap()]).status.success());
    let o = cavity(&["sweep", &sweep_cfg, "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(files(&a), files(&b.join("point_000")));
}

#[test]
fn coupling_sweep_flips_regime() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "{SPECTRUM}{GRID}[outputs]\nlist = coefficients\n[sweep]\nparameter = coupling\nvalues = 0.5, 1.0, 4, 8.6 MHz\n"
    );
    let out = dir.path().join("o");
    let o = cavity(&["sweep", &write_config(&dir, "a.ini", &text), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let regimes: Vec<String> = summary(&out).into_iter().map(|r| r["regime"].clone()).collect();
    assert_eq!(regimes, ["markovian", "markovian", "non_markovian", "non_markovian"]);
    for i in 0..4 {
        assert!(out.join(format!("point_{i:03}/coefficients.csv")).exists());
    }
}

#[test]
fn hole_position_sweep_orders_localized_modes() {
    let dir = TempDir::new().unwrap();
    let text = "[spectrum]\nshape = q_gaussian\nq = 1.39\ncoupling = calibrate\nrabi = 21.3 MHz\nfwhm = 9.4 MHz\n\
                [environment]\ncavity = 2.69 GHz\nkappa = 0.4 MHz\n[grid]\ndt = 1 ns\nhorizon = 0.5 us\n\
                [outputs]\nlist = localized_modes\n[sweep]\nparameter = hole_offset\nvalues = 0, 0.25, 0.5 rabi\n";
    let out = dir.path().join("o");
    let o = cavity(&["sweep", &write_config(&dir, "a.ini", text), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = summary(&out);
    let count: Vec<usize> = rows.iter().map(|r| r["localized_modes"].parse().unwrap()).collect();
    let residue: Vec<f64> = rows.iter().map(|r| r["max_residue"].parse().unwrap()).collect();
    assert_eq!(count, [1, 2, 2]);
    // holes at the normal modes trap by far the most weight
    assert!(residue[2] > 5.0 * residue[0] && residue[2] > 5.0 * residue[1], "{residue:?}");
}

#[test]
fn failing_sweep_points_are_listed_and_exit_4() {
    let dir = TempDir::new().unwrap();
    let text = format!("{SPECTRUM}{GRID}[outputs]\nlist = u\n[sweep]\nparameter = q\nvalues = 1.5, 2.8\n");
    let out = dir.path().join("o");
    let o = cavity(&["sweep", &write_config(&dir, "a.ini", &text), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("point 1"));
    let rows = summary(&out);
    assert_eq!(rows[0]["status"], "ok");
    assert_eq!(rows[1]["status"], "failed");
    assert!(rows[1]["error"].contains("truncation"));
}

#[test]
fn modes_command_needs_no_output_list() {
    let dir = TempDir::new().unwrap();
    let text = "[spectrum]\nshape = q_gaussian\nq = 1.39\ncoupling = calibrate\nrabi = 21.3 MHz\nfwhm = 9.4 MHz\n\
                [hole]\noffset = -0.5 rabi\n[hole]\noffset = 0.5 rabi\n\
                [environment]\ncavity = 2.69 GHz\n";
    let out = dir.path().join("o");
    let o = cavity(&["modes", &write_config(&dir, "a.ini", text), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().count(), 3, "{stdout}");
    let modes = fs::read_to_string(out.join("localized_modes.csv")).unwrap();
    assert_eq!(modes.lines().count(), 3);
}

#[test]
fn check_validates_without_solving() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "a.ini", &format!("{SPECTRUM}[outputs]\nlist = u\n"));
    let o = cavity(&["check", &cfg]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok:"));
    assert_eq!(cavity(&["check", dir.path().join("missing.ini").to_str().unwrap()]).status.code(), Some(1));
}
