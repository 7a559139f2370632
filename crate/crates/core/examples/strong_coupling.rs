// SPDX-License-Identifier: Apache-2.0

//! Drive a strongly coupled cavity for 600 ns and print its photon number every 50 ns.

use cavity_core::units::{ghz, mhz, ns};
use cavity_core::{
    calibrate_amplitude, classify_regime, coefficients, intensity, DriveSpec, EnvironmentSpec, InitialCavityState,
    Lineshape, Propagators, SpectralModel, TimeGrid,
};

fn main() -> cavity_core::Result<()> {
    let cavity = ghz(2.69);
    let model = SpectralModel::new(Lineshape::QGaussian { q: 1.39 }, cavity, mhz(8.6), mhz(9.4))?;
    let env = EnvironmentSpec::new(mhz(0.4), 0.0, 0.0, cavity)?;
    let grid = TimeGrid::covering(ns(0.5), 1.5)?;

    let pulse = DriveSpec::rectangular(1.0, cavity, 0.0, ns(600.0));
    let props = Propagators::solve(&model, &env, &pulse, &grid)?;
    let pulse = calibrate_amplitude(&pulse, &props.u, &props.udot, cavity, &grid, 1e6)?;
    let props = props.redriven(&pulse, cavity)?;

    let n = intensity(&props, &InitialCavityState::Vacuum);
    println!("{:>8} {:>14}", "t [ns]", "photons");
    for i in (0..=grid.steps).step_by(100) {
        println!("{:>8.0} {:>14.1}", grid.time(i) * 1e3, n.n[i]);
    }
    let regime = classify_regime(&coefficients(&props, cavity));
    println!("gamma(t) changes sign {} times: {}", regime.sign_changes, if regime.markovian { "Markovian" } else { "non-Markovian" });
    Ok(())
}
