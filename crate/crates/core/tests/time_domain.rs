// SPDX-License-Identifier: Apache-2.0

mod common;

use std::f64::consts::TAU;

use cavity_core::propagator_time::solve_v_time_domain;
use cavity_core::{
    bose_occupation, classify_regime, coefficients, memory_kernels, solve_u, solve_y, DriveSpec, Error,
    EnvironmentSpec, Propagators, TimeGrid, C64,
};
use common::*;

#[test]
fn occupation_at_the_cavity_frequency() {
    let n = bose_occupation(CAVITY, cavity_core::units::millikelvin(25.0)).unwrap();
    // Planck's formula from SI constants
    let (h, kb) = (6.626_070_15e-34_f64, 1.380_649e-23_f64);
    let x = h * 2.69e9 / (kb * 0.025);
    let exact = 1.0 / x.exp_m1();
    assert!((n / exact - 1.0).abs() < 1e-8, "{n} vs {exact}");
    assert!((n - 5.7e-3).abs() < 0.1e-3);
}

#[test]
fn solver_is_fourth_order_on_the_reference_set() {
    let env = cold(kappa());
    let m = q_gaussian();
    let solve = |dt: f64| solve_u(&m, &env, &TimeGrid::covering(dt, 0.5).unwrap()).unwrap().0;
    let (a, b, c) = (solve(0.002), solve(0.001), solve(0.0005));
    let e1 = (0..a.len()).map(|i| (a[i] - b[2 * i]).norm()).fold(0.0, f64::max);
    let e2 = (0..b.len()).map(|i| (b[i] - c[2 * i]).norm()).fold(0.0, f64::max);
    assert!(e1 / e2 > 12.0, "{e1:.3e} {e2:.3e}");
}

#[test]
fn spectral_and_direct_noise_agree() {
    let env = warm(kappa());
    let m = q_gaussian();
    let grid = TimeGrid::covering(0.001, 0.4).unwrap();
    let p = Propagators::solve(&m, &env, &DriveSpec::none(), &grid).unwrap();
    let k = memory_kernels(&m, &env, &grid).unwrap();
    let idx = [0usize, 37, 150, 290, 400];
    let pairs: Vec<(usize, usize)> = idx.iter().flat_map(|&a| idx.iter().map(move |&b| (a, b))).collect();
    let direct = solve_v_time_domain(&p.u, &k, &pairs);
    let spectral = p.noise.entries(&idx, &idx);
    for (n, &(a, b)) in pairs.iter().enumerate() {
        let (ia, ib) = (idx.iter().position(|&x| x == a).unwrap(), idx.iter().position(|&x| x == b).unwrap());
        let d = (direct[n] - spectral[ia][ib]).norm();
        assert!(d < 1e-7, "({a},{b}): {} vs {}", direct[n], spectral[ia][ib]);
    }
    // the diagonal series matches the entries
    for &i in &idx {
        assert!((p.v_diag[i] - spectral[idx.iter().position(|&x| x == i).unwrap()][idx.iter().position(|&x| x == i).unwrap()].re).abs() < 1e-12);
    }
}

#[test]
fn cavity_thermalizes_and_noise_becomes_stationary() {
    let env = warm(kappa());
    let grid = TimeGrid::covering(0.0005, 3.0).unwrap();
    let p = Propagators::solve(&q_gaussian(), &env, &DriveSpec::none(), &grid).unwrap();
    let nbar = bose_occupation(CAVITY, env.spin_temperature).unwrap();
    let last = *p.v_diag.last().unwrap();
    assert!((last / nbar - 1.0).abs() < 0.02, "{last} vs {nbar}");
    let lags = [0usize, 10, 40, 160];
    let at = |t: usize| {
        let rows: Vec<usize> = lags.iter().map(|l| t + l).collect();
        p.noise.entries(&rows, &[t]).into_iter().map(|r| r[0]).collect::<Vec<C64>>()
    };
    let (a, b) = (at(4000), at(5500));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() < 1e-6 * nbar.max(x.norm()), "{x} vs {y}");
    }
}

#[test]
fn thermal_rate_matches_finite_difference() {
    let env = warm(kappa());
    let grid = TimeGrid::covering(0.0005, 1.0).unwrap();
    let p = Propagators::solve(&q_gaussian(), &env, &DriveSpec::none(), &grid).unwrap();
    for i in [100usize, 700, 1500] {
        let v = &p.v_diag;
        let fd = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * grid.dt);
        let tol = 1e-6 * p.v_diag_rate[i].abs().max(1e-3);
        assert!((fd - p.v_diag_rate[i]).abs() < tol, "{i}: {fd} vs {}", p.v_diag_rate[i]);
    }
}

#[test]
fn drive_response_is_linear() {
    let env = cold(kappa());
    let grid = TimeGrid::covering(0.0005, 1.0).unwrap();
    let (u, udot) = solve_u(&q_gaussian(), &env, &grid).unwrap();
    let a = DriveSpec::rectangular(2.0, CAVITY + 3.0, 0.1, 0.7);
    let b = DriveSpec::sinusoidal(1.0, CAVITY, 0.1, 0.7, rabi(), 0.3);
    let ya = solve_y(&u, &udot, &a, CAVITY, &grid).unwrap();
    let y3 = solve_y(&u, &udot, &a.scaled(3.0), CAVITY, &grid).unwrap();
    for (x, y) in ya.iter().zip(&y3) {
        assert!((3.0 * x - y).norm() <= 1e-14 * y.norm().max(1e-300));
    }
    // a phase flip at t_f equals a rectangle minus twice the tail after t_f
    let flip = DriveSpec::phase_flip(2.0, CAVITY, 0.1, 0.4, 0.7);
    let tail = DriveSpec::rectangular(2.0, CAVITY, 0.4, 0.7);
    let rect = DriveSpec::rectangular(2.0, CAVITY, 0.1, 0.7);
    let (yf, yt, yr) = (
        solve_y(&u, &udot, &flip, CAVITY, &grid).unwrap(),
        solve_y(&u, &udot, &tail, CAVITY, &grid).unwrap(),
        solve_y(&u, &udot, &rect, CAVITY, &grid).unwrap(),
    );
    let err = (0..yf.len()).map(|i| (yf[i] - (yr[i] - 2.0 * yt[i])).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
    assert!(!solve_y(&u, &udot, &b, CAVITY, &grid).unwrap().iter().any(|y| !y.is_finite()));
}

#[test]
fn free_cavity_drive_matches_closed_form() {
    let k = kappa();
    let env = EnvironmentSpec::new(k, 0.0, 0.0, CAVITY).unwrap();
    let grid = TimeGrid::covering(0.0005, 1.0).unwrap();
    let (u, udot) = solve_u(&cavity_core::SpectralModel::uncoupled(CAVITY), &env, &grid).unwrap();
    let nu = 7.0;
    let y = solve_y(&u, &udot, &DriveSpec::rectangular(1.0, CAVITY + nu, 0.0, f64::INFINITY), CAVITY, &grid).unwrap();
    for (n, y) in y.iter().enumerate() {
        let t = grid.time(n);
        let z = C64::new(k, -nu);
        let exact = C64::new(0.0, -1.0) * ((-C64::new(0.0, nu) * t).exp() - (-k * t).exp()) / z;
        assert!((y - exact).norm() < 1e-10, "t={t}");
    }
}

#[test]
fn undersampled_carrier_is_rejected() {
    let env = cold(kappa());
    let grid = TimeGrid::covering(0.01, 0.2).unwrap();
    let (u, udot) = solve_u(&cavity_core::SpectralModel::uncoupled(CAVITY), &env, &grid).unwrap();
    let far = DriveSpec::rectangular(1.0, CAVITY + 400.0, 0.0, 0.1);
    assert!(matches!(solve_y(&u, &udot, &far, CAVITY, &grid), Err(Error::Sampling(_))));
}

#[test]
fn regime_flips_between_one_and_four_megahertz() {
    let env = cold(kappa());
    let grid = TimeGrid::covering(0.0005, 2.0).unwrap();
    let regime = |mhz: f64| {
        let m = q_gaussian().with_coupling(TAU * mhz).unwrap();
        let p = Propagators::solve(&m, &env, &DriveSpec::none(), &grid).unwrap();
        classify_regime(&coefficients(&p, CAVITY))
    };
    assert!(regime(0.5).markovian);
    assert!(regime(1.0).markovian);
    assert!(!regime(4.0).markovian);
    assert!(!regime(8.6).markovian);
    let short = TimeGrid::covering(0.0005, 0.5).unwrap();
    let p = Propagators::solve(&q_gaussian(), &env, &DriveSpec::none(), &short).unwrap();
    assert!(classify_regime(&coefficients(&p, CAVITY)).inconclusive);
}
