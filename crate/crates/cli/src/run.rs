// SPDX-License-Identifier: Apache-2.0

//! Resolving a scenario into solver inputs and writing the requested outputs.

use std::fs;
use std::path::Path;

use cavity_core::{
    calibrate_amplitude, calibrate_coupling, classify_regime, coefficients, find_localized_modes, intensity,
    propagator_freq::sample_response, CorrelationGrid, DriveSpec, EnvironmentSpec, HoleSpec, InitialCavityState,
    LocalizedMode, Propagators, RegimeReport, SpectralModel, TimeGrid,
};
use serde_json::{json, Value};

use crate::config::{Amplitude, Coupling, Output, Scenario, SeriesFormat};
use crate::output::{complex_matrix, real_matrix, write_json, Table};
use crate::RunError;

/// Solver inputs in rad/µs and µs.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: SpectralModel,
    pub env: EnvironmentSpec,
    /// Amplitude still unresolved when the drive is given as a photon number.
    pub drive: DriveSpec,
    pub grid: TimeGrid,
}

pub fn resolve(s: &Scenario) -> Result<Resolved, RunError> {
    let env = EnvironmentSpec::new(s.kappa, s.spin_temperature, s.env_temperature, s.cavity)?;
    let sp = &s.spectrum;
    let base = SpectralModel::new(sp.shape, sp.center, 1.0, sp.fwhm)?;
    let coupling = match sp.coupling {
        Coupling::Value(c) => c,
        Coupling::Calibrate => calibrate_coupling(&base, &env, sp.rabi)?,
    };
    let holes = s
        .holes
        .iter()
        .map(|h| HoleSpec { center: sp.center + h.offset, half_width: h.half_width, profile: h.profile })
        .collect();
    let model = base.with_coupling(coupling)?.with_holes(holes)?;
    let drive = match &s.drive {
        None => DriveSpec::none(),
        Some(d) => {
            let amplitude = match d.amplitude {
                Amplitude::Value(a) => a,
                Amplitude::Photons(_) => 1.0,
            };
            DriveSpec { kind: d.kind, amplitude, carrier: d.carrier, t_on: d.t_on, t_off: d.t_off }
        }
    };
    drive.validate()?;
    let grid = TimeGrid::covering(s.grid.dt, s.grid.horizon)?.with_stride(s.grid.v_stride)?;
    Ok(Resolved { model, env, drive, grid })
}

/// What a run found, for sweep summaries and the console.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub coupling: f64,
    pub regime: Option<RegimeReport>,
    pub modes: Option<Vec<LocalizedMode>>,
    pub files: Vec<String>,
}

/// Solve `s` and write its outputs plus `manifest.json` into `dir`.
pub fn execute(s: &Scenario, dir: &Path) -> Result<RunSummary, RunError> {
    execute_with(s, dir, false)
}

/// As `execute`; `always_classify` forces the time-domain solve and mode search so the
/// summary is complete even when no output needs them.
pub fn execute_with(s: &Scenario, dir: &Path, always_classify: bool) -> Result<RunSummary, RunError> {
    let r = resolve(s)?;
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let mut summary = RunSummary { coupling: r.model.coupling(), ..Default::default() };
    let init = s.initial.unwrap_or(InitialCavityState::Vacuum);
    let fmt = s.format;
    let mut drive = r.drive;
    let mut noise_nodes = None;

    let time_outputs = s.outputs.iter().any(|o| o.needs_time_solve());
    if always_classify || time_outputs {
        let mut props = Propagators::solve(&r.model, &r.env, &drive, &r.grid)?;
        if let Some(Amplitude::Photons(n)) = s.drive.as_ref().map(|d| d.amplitude) {
            drive = calibrate_amplitude(&drive, &props.u, &props.udot, r.env.cavity_frequency, &r.grid, n)?;
            props = props.redriven(&drive, r.env.cavity_frequency)?;
        }
        // recorded only when it shapes an output, so sweep points match plain runs
        noise_nodes = time_outputs.then(|| props.noise.node_count());
        let times = r.grid.times();
        let coeffs = coefficients(&props, r.env.cavity_frequency);
        summary.regime = Some(classify_regime(&coeffs));

        for &o in &s.outputs {
            let file = match o {
                Output::U => complex_series("u", &times, &props.u).write(dir, fmt)?,
                Output::Y => complex_series("y", &times, &props.y).write(dir, fmt)?,
                Output::VDiag => {
                    let mut t = Table::new("v_diag", &["t_us", "v", "dv_dt"]);
                    for (i, &t_i) in times.iter().enumerate() {
                        t.push(vec![t_i.into(), props.v_diag[i].into(), props.v_diag_rate[i].into()]);
                    }
                    t.write(dir, fmt)?
                }
                Output::Coefficients => {
                    let mut t = Table::new(
                        "coefficients",
                        &["t_us", "gamma", "shift", "renormalized_frequency", "drive_re", "drive_im", "gamma_tilde", "singular"],
                    );
                    for (i, &t_i) in times.iter().enumerate() {
                        t.push(vec![
                            t_i.into(),
                            coeffs.gamma[i].into(),
                            coeffs.shift[i].into(),
                            coeffs.renormalized_frequency(i).into(),
                            coeffs.drive[i].re.into(),
                            coeffs.drive[i].im.into(),
                            coeffs.fluctuation[i].into(),
                            coeffs.singular[i].into(),
                        ]);
                    }
                    t.write(dir, fmt)?
                }
                Output::Intensity => {
                    let n = intensity(&props, &init);
                    let mut t = Table::new("intensity", &["t_us", "n", "n_semiclassical", "n_fluctuation"]);
                    for (i, &t_i) in times.iter().enumerate() {
                        t.push(vec![t_i.into(), n.n[i].into(), n.n_sc[i].into(), n.fluctuation[i].into()]);
                    }
                    t.write(dir, fmt)?
                }
                _ => continue,
            };
            summary.files.push(file);
        }

        let two_time: Vec<Output> = s.outputs.iter().copied().filter(|o| o.is_two_time()).collect();
        if !two_time.is_empty() {
            let c = &s.correlation;
            let steps = |step: f64, max: f64| -> Vec<usize> {
                let k = ((step / r.grid.dt).round() as usize).max(1);
                let last = ((max / r.grid.dt) + 1e-9).floor() as usize;
                (0..=last).step_by(k).collect()
            };
            let (ti, si) = (steps(c.t_step, c.t_max), steps(c.tau_step, c.tau_max));
            let grid = CorrelationGrid::compute(&props, &init, &ti, &si)?;
            let axes = |v: Value| json!({ "t_us": grid.times, "tau_us": grid.delays, "values": v });
            for o in two_time {
                let value = match o {
                    Output::G1Grid => axes(complex_matrix(&grid.g1)),
                    Output::G2Grid => axes(real_matrix(&grid.g2)),
                    _ => {
                        let q: Vec<Vec<Option<_>>> =
                            grid.quantum.iter().map(|r| r.iter().copied().map(Some).collect()).collect();
                        axes(complex_matrix(&q))
                    }
                };
                let file = format!("{}.json", o.name());
                write_json(dir, &file, &value)?;
                summary.files.push(file);
            }
        }
    }

    if s.outputs.contains(&Output::SelfEnergy) || s.outputs.contains(&Output::Response) {
        let f = frequency_axis(s);
        let omegas: Vec<f64> = f.iter().map(|x| x + r.env.cavity_frequency).collect();
        let samples = sample_response(&r.model, &r.env, &omegas);
        if s.outputs.contains(&Output::SelfEnergy) {
            let mut t = Table::new("self_energy", &["detuning", "delta", "half_width", "at_hole_edge"]);
            for (x, (se, _)) in f.iter().zip(&samples) {
                t.push(vec![(*x).into(), se.delta.into(), se.half_width.into(), se.at_hole_edge.into()]);
            }
            summary.files.push(t.write(dir, fmt)?);
        }
        if s.outputs.contains(&Output::Response) {
            let mut t = Table::new("response", &["detuning", "re", "im", "abs"]);
            for (x, (_, u)) in f.iter().zip(&samples) {
                t.push(vec![(*x).into(), u.map(|u| u.re).into(), u.map(|u| u.im).into(), u.map(|u| u.norm()).into()]);
            }
            summary.files.push(t.write(dir, fmt)?);
        }
    }

    if always_classify || s.outputs.contains(&Output::LocalizedModes) {
        let modes = find_localized_modes(&r.model, &r.env);
        if s.outputs.contains(&Output::LocalizedModes) {
            summary.files.push(modes_table(&modes, &r).write(dir, fmt)?);
        }
        summary.modes = Some(modes);
    }

    summary.files.sort();
    // a photon-number drive has no amplitude until the time-domain solve calibrates it
    let photons = matches!(s.drive.map(|d| d.amplitude), Some(Amplitude::Photons(_)));
    let amplitude = (!photons || time_outputs).then_some(drive.amplitude);
    let manifest = manifest(s, &r, &drive, amplitude, noise_nodes, &summary);
    write_json(dir, "manifest.json", &manifest)?;
    Ok(summary)
}

fn complex_series(name: &'static str, times: &[f64], z: &[cavity_core::C64]) -> Table {
    let mut t = Table::new(name, &["t_us", "re", "im", "abs"]);
    for (t_i, z) in times.iter().zip(z) {
        t.push(vec![(*t_i).into(), z.re.into(), z.im.into(), z.norm().into()]);
    }
    t
}

pub fn modes_table(modes: &[LocalizedMode], r: &Resolved) -> Table {
    let mut t = Table::new("localized_modes", &["frequency", "offset_from_ensemble", "residue", "slope", "at_edge"]);
    for m in modes {
        t.push(vec![
            m.frequency.into(),
            (m.frequency - r.model.center()).into(),
            m.residue.into(),
            m.slope.into(),
            m.at_edge.into(),
        ]);
    }
    t
}

/// Detunings ω − ω_c, rad/µs.
fn frequency_axis(s: &Scenario) -> Vec<f64> {
    let (min, max, n) = match s.frequency {
        Some(f) => (f.min, f.max, f.points),
        None => {
            let mid = s.spectrum.center - s.cavity;
            let half = 3.0 * s.spectrum.rabi.max(s.spectrum.fwhm);
            (mid - half, mid + half, 2001)
        }
    };
    (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect()
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn manifest(
    s: &Scenario,
    r: &Resolved,
    drive: &DriveSpec,
    amplitude: Option<f64>,
    noise_nodes: Option<usize>,
    sum: &RunSummary,
) -> Value {
    let holes: Vec<Value> = r.model.holes().iter().map(|h| json!(h)).collect();
    let drive_value = match s.drive {
        None => Value::Null,
        Some(_) => json!({
            "kind": drive.kind,
            "amplitude": amplitude,
            "target_photons": match s.drive.map(|d| d.amplitude) {
                Some(Amplitude::Photons(n)) => Some(n),
                _ => None,
            },
            "carrier": drive.carrier,
            "t_on": drive.t_on,
            "t_off": finite(drive.t_off),
        }),
    };
    json!({
        "version": cavity_core::VERSION,
        "units": { "frequency": "rad/us", "time": "us", "temperature": "K" },
        "frame": "rotating at the cavity frequency",
        "spectrum": {
            "shape": r.model.shape(),
            "center": r.model.center(),
            "coupling": r.model.coupling(),
            "coupling_calibrated": matches!(s.spectrum.coupling, Coupling::Calibrate),
            "fwhm": r.model.fwhm(),
            "rabi": s.spectrum.rabi,
            "holes": holes,
        },
        "environment": r.env,
        "drive": drive_value,
        "initial": s.initial,
        "grid": { "dt": r.grid.dt, "steps": r.grid.steps, "horizon": r.grid.horizon(), "v_stride": r.grid.v_stride },
        "correlation": if s.outputs.iter().any(|o| o.is_two_time()) {
            json!({
                "t_step": s.correlation.t_step, "t_max": s.correlation.t_max,
                "tau_step": s.correlation.tau_step, "tau_max": s.correlation.tau_max,
            })
        } else { Value::Null },
        "solver": {
            "truncation_tolerance": cavity_core::spectral::TRUNCATION_TOLERANCE,
            "singular_u": cavity_core::master_coeffs::SINGULAR_U,
            "coefficient_clamp": cavity_core::master_coeffs::GAMMA_MAX,
            "thermal_nodes": noise_nodes,
        },
        "format": match s.format { SeriesFormat::Csv => "csv", SeriesFormat::Json => "json" },
        "files": sum.files,
    })
}
