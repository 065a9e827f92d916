use num_complex::Complex64 as C64;
use symtomo::{floquet, frequency_squared, solve_epsilon, Error, TrapParams};

/// Fixed-step classical RK4 for `ε̈ = -ω²(t) ε`, independent of the crate's solver.
fn rk4(params: &TrapParams, t_end: f64, steps: usize) -> Vec<(f64, C64, C64)> {
    let dt = t_end / steps as f64;
    let f = |t: f64, e: C64, d: C64| (d, -frequency_squared(params, t) * e);
    let (mut t, mut e, mut d) = (0.0, C64::new(1.0, 0.0), C64::i());
    let mut out = vec![(t, e, d)];
    for k in 0..steps {
        let (k1e, k1d) = f(t, e, d);
        let (k2e, k2d) = f(t + 0.5 * dt, e + 0.5 * dt * k1e, d + 0.5 * dt * k1d);
        let (k3e, k3d) = f(t + 0.5 * dt, e + 0.5 * dt * k2e, d + 0.5 * dt * k2d);
        let (k4e, k4d) = f(t + dt, e + dt * k3e, d + dt * k3d);
        e += dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
        d += dt / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        t = (k + 1) as f64 * dt;
        out.push((t, e, d));
    }
    out
}

#[test]
fn matches_fine_step_oracle_between_nodes() {
    let params = TrapParams::new(0.5, 2.0).unwrap();
    let traj = solve_epsilon(&params, 5.0, 1e-10).unwrap();
    let oracle = rk4(&params, 5.0, 20_000);
    let mut worst = 0.0f64;
    for &(t, e, d) in oracle.iter().step_by(37) {
        let (eps, eps_dot) = traj.epsilon_at(t).unwrap();
        worst = worst.max((eps - e).norm()).max((eps_dot - d).norm());
    }
    assert!(worst < 1e-8, "max deviation {worst:e}");
}

#[test]
fn wronskian_holds_for_strong_modulation() {
    let traj = solve_epsilon(&TrapParams::new(1.0, 1.0).unwrap(), 30.0, 1e-10).unwrap();
    assert!(traj.max_wronskian_residual() < 1e-8);
}

#[test]
fn resonant_trap_grows_with_oracle_multiplier() {
    let params = TrapParams::new(1.0, 1.22).unwrap();
    let period = std::f64::consts::PI / 1.22;
    let &(_, e, d) = rk4(&params, period, 20_000).last().unwrap();
    let oracle_trace = e.re + d.im;
    let f = floquet(&params, 1e-10).unwrap();
    assert!(f.is_unstable());
    assert!((f.trace - oracle_trace).abs() < 1e-8);
    assert!((f.multiplier - 1.2990).abs() < 5e-4, "multiplier {}", f.multiplier);

    // Past the transient, ln|ε| gains ln(multiplier) per period.
    let traj = solve_epsilon(&params, 24.0 * period, 1e-10).unwrap();
    let log_abs = |n: f64| traj.epsilon_at(n * period).unwrap().0.norm().ln();
    let rate = (log_abs(24.0) - log_abs(12.0)) / (12.0 * period);
    assert!((rate - f.growth_rate).abs() < 0.01 * f.growth_rate, "rate {rate} vs {}", f.growth_rate);
}

#[test]
fn weak_modulation_near_twice_frequency_is_stable() {
    let f = floquet(&TrapParams::new(0.3, 2.05).unwrap(), 1e-10).unwrap();
    assert!(!f.is_unstable(), "trace {}", f.trace);
    assert_eq!(f.multiplier, 1.0);
}

#[test]
fn harmonic_half_period() {
    let traj = solve_epsilon(&TrapParams::harmonic(), 4.0, 1e-10).unwrap();
    let (eps, eps_dot) = traj.epsilon_at(std::f64::consts::PI).unwrap();
    assert!((eps + 1.0).norm() < 1e-8);
    assert!((eps_dot + C64::i()).norm() < 1e-8);
}

#[test]
fn rejects_bad_inputs() {
    assert!(matches!(TrapParams::new(-0.1, 1.0), Err(Error::InvalidParameter(_))));
    assert!(matches!(TrapParams::new(0.1, 0.0), Err(Error::InvalidParameter(_))));
    assert!(solve_epsilon(&TrapParams::harmonic(), -1.0, 1e-9).is_err());
    let traj = solve_epsilon(&TrapParams::harmonic(), 1.0, 1e-9).unwrap();
    assert!(matches!(traj.epsilon_at(1.5), Err(Error::OutOfRange { .. })));
}
