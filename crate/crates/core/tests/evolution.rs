use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use symtomo::evolution::{
    characteristic_forward, characteristic_origin, determinant, evolution_residual, flow_jacobian, harmonic_flow,
    propagate, PropagatedMarginal, TomogramField,
};
use symtomo::tomograms::{AnalyticMarginal, MarginalModel};
use symtomo::{solve_epsilon, Error, Parity, ReferenceFrame, StateSpec, TrajectorySample, TrapParams, UniformGrid};

fn x_grid() -> UniformGrid {
    UniformGrid::new(-10.0, 10.0, 801).unwrap()
}

fn around(c: f64, h: f64) -> UniformGrid {
    UniformGrid::new(c - h, c + h, 3).unwrap()
}

#[test]
fn odd_cat_field_satisfies_evolution_equation() {
    let traj = solve_epsilon(&TrapParams::new(0.5, 1.0).unwrap(), 3.0, 1e-10).unwrap();
    let spec = StateSpec::cat(Parity::Odd, C64::new(0.7, 0.7));
    let residual = |h: f64| {
        let field = TomogramField::analytic(spec, &traj, around(2.0, h), around(-0.6, h), around(1.1, h), -0.3, x_grid())
            .unwrap();
        evolution_residual(&field).unwrap().value
    };
    let (a, b) = (residual(1e-3), residual(5e-4));
    assert!(a < 1e-4 && b < 1e-4);
    assert!((a / b - 4.0).abs() < 1.2, "ratio {}", a / b);
}

#[test]
fn field_rejects_degenerate_nodes_and_thin_axes() {
    let traj = solve_epsilon(&TrapParams::harmonic(), 1.0, 1e-9).unwrap();
    let spec = StateSpec::ground();
    let near_origin = TomogramField::analytic(spec, &traj, around(0.5, 0.01), around(0.0, 0.01), around(0.0, 0.01), 0.0, x_grid());
    assert!(matches!(near_origin, Err(Error::Field(_))));
    let thin = UniformGrid::new(0.9, 1.1, 2).unwrap();
    let field = TomogramField::analytic(spec, &traj, around(0.5, 0.01), thin, around(1.0, 0.01), 0.0, x_grid()).unwrap();
    assert!(evolution_residual(&field).is_err());
}

#[test]
fn flow_round_trip_and_unit_determinant() {
    let params = TrapParams::new(0.8, 1.3).unwrap();
    let (mu, nu) = characteristic_forward(&params, 0.4, -1.2, 0.3, 4.0, 1e-11).unwrap();
    let (mu0, nu0) = characteristic_origin(&params, mu, nu, 0.3, 4.0, 1e-11).unwrap();
    assert!((mu0 - 0.4).abs() < 1e-8 && (nu0 + 1.2).abs() < 1e-8);
    let j = flow_jacobian(&params, 0.4, -1.2, 0.3, 4.0, 1e-11, 0.2).unwrap();
    assert!((determinant(&j) - 1.0).abs() < 1e-7);
}

#[test]
fn harmonic_flow_is_a_rotation() {
    let (mu, nu) = harmonic_flow(1.0, 0.0, PI / 2.0);
    assert!(mu.abs() < 1e-15 && (nu + 1.0).abs() < 1e-15);
    let (a, b) = characteristic_forward(&TrapParams::harmonic(), 0.3, 0.9, 1.0, 3.2, 1e-11).unwrap();
    let (ea, eb) = harmonic_flow(0.3, 0.9, 2.2);
    assert!((a - ea).abs() < 1e-8 && (b - eb).abs() < 1e-8);
}

#[test]
fn propagated_cat_matches_closed_form() {
    let params = TrapParams::new(0.2, 2.0).unwrap();
    let traj = solve_epsilon(&params, 2.5, 1e-10).unwrap();
    let spec = StateSpec::cat(Parity::Even, C64::new(1.0, -0.4));
    let w0 = AnalyticMarginal::new(spec, TrajectorySample::initial()).unwrap();
    let direct = AnalyticMarginal::new(spec, traj.sample_at(2.5).unwrap()).unwrap();
    for frame in [ReferenceFrame::new(1.0, 0.0, 0.0).unwrap(), ReferenceFrame::new(-0.5, 1.4, 0.8).unwrap()] {
        let moved = propagate(&w0, &frame, 2.5, &params, &x_grid(), 1e-10).unwrap();
        assert!(moved.tomogram.max_abs_diff(&direct.tomogram(&frame, &x_grid())).unwrap() < 1e-6);
    }
}

#[test]
fn transport_starts_from_the_model_time() {
    let params = TrapParams::new(0.2, 2.0).unwrap();
    let traj = solve_epsilon(&params, 3.0, 1e-10).unwrap();
    let spec = StateSpec::coherent(C64::new(0.5, 0.5));
    let at_one = AnalyticMarginal::new(spec, traj.sample_at(1.0).unwrap()).unwrap();
    let transported = PropagatedMarginal::with_tol(at_one, 3.0, params, 1e-10).unwrap();
    assert_eq!(transported.t0, 1.0);
    let direct = AnalyticMarginal::new(spec, traj.sample_at(3.0).unwrap()).unwrap();
    let frame = ReferenceFrame::new(0.9, -0.7, 0.1).unwrap();
    let diff = transported.tomogram(&frame, &x_grid()).max_abs_diff(&direct.tomogram(&frame, &x_grid())).unwrap();
    assert!(diff < 1e-6);
    assert!(PropagatedMarginal::with_tol(at_one, 0.5, params, 1e-10).is_err());
}
