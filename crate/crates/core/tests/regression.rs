// SPDX-License-Identifier: Apache-2.0

//! Values frozen from the first validated runs on the reference parameter set.

mod common;

use cavity_core::{classify_regime, coefficients, find_localized_modes, solve_u, DriveSpec, Propagators, TimeGrid};
use common::*;

const EARLY_SIGN_CHANGES: usize = 19;
const HOLE_PROTECTION: f64 = 1.723e5;

fn early_sign_changes(dt: f64) -> usize {
    let grid = TimeGrid::covering(dt, 1.0).unwrap();
    let p = Propagators::solve(&q_gaussian(), &cold(kappa()), &DriveSpec::none(), &grid).unwrap();
    classify_regime(&coefficients(&p, CAVITY)).early_sign_changes
}

#[test]
fn sign_changes_are_frozen_and_grid_independent() {
    assert_eq!(early_sign_changes(0.0005), EARLY_SIGN_CHANGES);
    assert_eq!(early_sign_changes(0.00025), EARLY_SIGN_CHANGES);
}

#[test]
fn hole_burning_protection_factor() {
    let grid = TimeGrid::covering(0.0005, 2.0).unwrap();
    let env = cold(kappa());
    let (uh, _) = solve_u(&burned(), &env, &grid).unwrap();
    let (up, _) = solve_u(&calibrated(), &env, &grid).unwrap();
    let ratio = uh[grid.steps].norm() / up[grid.steps].norm();
    assert!((ratio / HOLE_PROTECTION - 1.0).abs() < 0.01, "{ratio:.4e}");
}

#[test]
fn mode_positions_and_weights() {
    let modes = find_localized_modes(&burned(), &cold(0.0));
    assert_eq!(modes.len(), 2);
    for m in &modes {
        let target = CAVITY + (m.frequency - CAVITY).signum() * rabi() / 2.0;
        assert!(((m.frequency - target) / (rabi() / 2.0)).abs() < 0.0038);
        assert!((m.residue - 0.1766).abs() < 5e-4, "{modes:?}");
        assert!(!m.at_edge);
    }
}
