use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use symtomo::evolution::{determinant, flow_jacobian};
use symtomo::tomograms::{gaussian_moments, AnalyticMarginal, MarginalModel};
use symtomo::{solve_epsilon, Parity, ReferenceFrame, StateSpec, TrajectorySample, TrapParams, UniformGrid};

fn sample(t: f64) -> TrajectorySample {
    solve_epsilon(&TrapParams::new(0.3, 1.7).unwrap(), 4.0, 1e-10).unwrap().sample_at(t).unwrap()
}

fn any_state() -> impl Strategy<Value = StateSpec> {
    (0..3usize, 0.3..1.5f64, 0.0..(2.0 * PI)).prop_map(|(k, r, theta)| {
        let alpha = C64::from_polar(r, theta);
        match k {
            0 => StateSpec::coherent(alpha),
            1 => StateSpec::cat(Parity::Even, alpha),
            _ => StateSpec::cat(Parity::Odd, alpha),
        }
    })
}

fn any_frame() -> impl Strategy<Value = ReferenceFrame> {
    (0.3..2.0f64, 0.0..(2.0 * PI), -1.0..1.0f64)
        .prop_map(|(r, theta, delta)| ReferenceFrame { mu: r * theta.cos(), nu: r * theta.sin(), delta })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shift_moves_the_marginal(spec in any_state(), frame in any_frame(), t in 0.0..4.0f64, x in -6.0..6.0f64) {
        let m = AnalyticMarginal::new(spec, sample(t)).unwrap();
        let lhs = m.density(x, &frame);
        let rhs = m.density(x - frame.delta, &frame.with_delta(0.0));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn homogeneity_of_degree_minus_one(
        spec in any_state(), frame in any_frame(), t in 0.0..4.0f64, x in -6.0..6.0f64,
        lambda in prop_oneof![-3.0..-0.2f64, 0.2..3.0f64],
    ) {
        let m = AnalyticMarginal::new(spec, sample(t)).unwrap();
        let lhs = lambda.abs() * m.density(lambda * x, &frame.scaled(lambda));
        let rhs = m.density(x, &frame);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn marginals_are_normalized_densities(spec in any_state(), frame in any_frame(), t in 0.0..4.0f64) {
        let m = AnalyticMarginal::new(spec, sample(t)).unwrap();
        let (centre, half) = m.support(&frame).unwrap();
        let x = UniformGrid::new(centre - half - 1.0, centre + half + 1.0, 4001).unwrap();
        let w = m.tomogram(&frame, &x);
        prop_assert!((w.normalization() - 1.0).abs() < 1e-8);
        prop_assert!(w.min_value() >= -1e-15);
    }

    #[test]
    fn variance_is_positive(alpha_re in -2.0..2.0f64, frame in any_frame(), t in 0.0..4.0f64) {
        let (_, var) = gaussian_moments(C64::new(alpha_re, 0.0), &sample(t), &frame);
        prop_assert!(var > 0.0);
    }

    #[test]
    fn wronskian_is_conserved(kappa in 0.0..1.0f64, omega in 0.5..3.0f64) {
        let traj = solve_epsilon(&TrapParams::new(kappa, omega).unwrap(), 10.0, 1e-10).unwrap();
        prop_assert!(traj.max_wronskian_residual() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flow_preserves_area(kappa in 0.0..1.0f64, omega in 0.5..3.0f64, mu in -2.0..2.0f64, nu in -2.0..2.0f64, t1 in 0.1..5.0f64) {
        let j = flow_jacobian(&TrapParams::new(kappa, omega).unwrap(), mu, nu, 0.0, t1, 1e-11, 0.1).unwrap();
        prop_assert!((determinant(&j) - 1.0).abs() < 1e-6);
    }
}
