// SPDX-License-Identifier: Apache-2.0

//! One-parameter sweeps. Points run in parallel; each gets its own `point_NNN/`.

use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use crate::config::{Amplitude, Coupling, HoleConfig, Scenario, SweepParameter};
use crate::output::{write_json, Cell, Table};
use crate::run::{execute_with, RunSummary};
use crate::RunError;
use cavity_core::{HoleProfile, Lineshape};

/// `base` with the swept parameter set to `value` (rad/µs, µs, K or plain number).
pub fn apply(base: &Scenario, parameter: SweepParameter, value: f64) -> Scenario {
    let mut s = base.clone();
    s.sweep = None;
    match parameter {
        SweepParameter::Coupling => s.spectrum.coupling = Coupling::Value(value),
        SweepParameter::Kappa => s.kappa = value,
        SweepParameter::SpinTemperature => s.spin_temperature = value,
        SweepParameter::EnvTemperature => s.env_temperature = value,
        SweepParameter::Fwhm => s.spectrum.fwhm = value,
        SweepParameter::Q => s.spectrum.shape = Lineshape::QGaussian { q: value },
        SweepParameter::HoleOffset => {
            let (half_width, profile) = base
                .holes
                .first()
                .map_or((0.02 * base.spectrum.rabi, HoleProfile::Rectangular), |h| (h.half_width, h.profile));
            let hole = |offset| HoleConfig { offset, half_width, profile };
            s.holes = if value == 0.0 { vec![hole(0.0)] } else { vec![hole(-value.abs()), hole(value.abs())] };
        }
        SweepParameter::DriveAmplitude => {
            if let Some(d) = s.drive.as_mut() {
                d.amplitude = Amplitude::Value(value);
            }
        }
        SweepParameter::TOff => {
            if let Some(d) = s.drive.as_mut() {
                d.t_off = value;
            }
        }
    }
    s
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub points: Vec<Result<RunSummary, RunError>>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.is_err()).count()
    }
}

pub fn execute_sweep(s: &Scenario, dir: &Path) -> Result<SweepOutcome, RunError> {
    let sweep = s.sweep.clone().ok_or_else(|| RunError::Usage("the scenario has no [sweep] section".into()))?;
    std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let points: Vec<Result<RunSummary, RunError>> = sweep
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| execute_with(&apply(s, sweep.parameter, v), &dir.join(point_dir(i)), true))
        .collect();

    let mut t = Table::new(
        "summary",
        &[
            "point",
            "parameter",
            "value",
            "status",
            "coupling",
            "regime",
            "sign_changes",
            "early_sign_changes",
            "asymptote",
            "localized_modes",
            "max_residue",
            "error",
        ],
    );
    for (i, (v, p)) in sweep.values.iter().zip(&points).enumerate() {
        let mut row: Vec<Cell> = vec![i.into(), Cell::Text(sweep.parameter.name().into()), (*v).into()];
        match p {
            Ok(sum) => {
                let regime = sum.regime.map(|g| {
                    let label = if g.inconclusive {
                        "inconclusive"
                    } else if g.markovian {
                        "markovian"
                    } else {
                        "non_markovian"
                    };
                    Cell::Text(label.into())
                });
                let modes = sum.modes.as_deref().unwrap_or(&[]);
                let residue = modes.iter().map(|m| m.residue).fold(None, |a: Option<f64>, r| Some(a.map_or(r, |a| a.max(r))));
                row.extend([
                    Cell::Text("ok".into()),
                    sum.coupling.into(),
                    regime.unwrap_or(Cell::Empty),
                    sum.regime.map(|g| g.sign_changes).into(),
                    sum.regime.map(|g| g.early_sign_changes).into(),
                    sum.regime.and_then(|g| g.asymptote).into(),
                    modes.len().into(),
                    residue.into(),
                    Cell::Empty,
                ]);
            }
            Err(e) => {
                row.push(Cell::Text("failed".into()));
                row.extend(std::iter::repeat_n(Cell::Empty, 7));
                row.push(Cell::Text(e.to_string()));
            }
        }
        t.push(row);
    }
    t.write(dir, crate::config::SeriesFormat::Csv)?;
    let manifest = json!({
        "version": cavity_core::VERSION,
        "parameter": sweep.parameter.name(),
        "values": sweep.values,
        "points": (0..sweep.values.len()).map(point_dir).collect::<Vec<_>>(),
        "failures": points.iter().filter(|p| p.is_err()).count(),
    });
    write_json(dir, "sweep_manifest.json", &manifest)?;
    Ok(SweepOutcome { points })
}

pub fn point_dir(i: usize) -> String {
    format!("point_{i:03}")
}
