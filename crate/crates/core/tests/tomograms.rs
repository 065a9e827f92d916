use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;
use symtomo::states::{eval_state, wigner_analytic};
use symtomo::tomograms::{
    forward_transform, frame_quadrature, inverse_transform, marginal, optical_slice, tomogram_family,
    AnalyticMarginal, FormulaVariant, InversionOptions, MarginalModel,
};
use symtomo::{solve_epsilon, Error, Parity, ReferenceFrame, StateSpec, Tomogram, TrajectorySample, TrapParams, UniformGrid};

fn x_grid() -> UniformGrid {
    UniformGrid::new(-12.0, 12.0, 2401).unwrap()
}

fn moments(t: &Tomogram) -> (f64, f64) {
    let xs = t.x_grid.points();
    let m1 = t.x_grid.integrate(&xs.iter().zip(&t.values).map(|(x, w)| x * w).collect::<Vec<_>>());
    let m2 = t.x_grid.integrate(&xs.iter().zip(&t.values).map(|(x, w)| x * x * w).collect::<Vec<_>>());
    (m1, m2 - m1 * m1)
}

fn local_maxima(t: &Tomogram) -> Vec<f64> {
    let xs = t.x_grid.points();
    (1..t.values.len() - 1)
        .filter(|&i| t.values[i] > t.values[i - 1] && t.values[i] >= t.values[i + 1] && t.values[i] > 1e-6)
        .map(|i| xs[i])
        .collect()
}

fn q_frame() -> ReferenceFrame {
    ReferenceFrame::new(1.0, 0.0, 0.0).unwrap()
}

#[test]
fn even_cat_peaks_sit_at_separated_packets() {
    let s = TrajectorySample::initial();
    let x = UniformGrid::new(-8.0, 8.0, 16001).unwrap();
    let w = marginal(&StateSpec::cat(Parity::Even, C64::new(1.5, 0.0)), &s, &q_frame(), &x, FormulaVariant::default())
        .unwrap();
    let peaks = local_maxima(&w);
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    for (peak, expected) in peaks.iter().zip([-SQRT_2 * 1.5, SQRT_2 * 1.5]) {
        assert!((peak - expected).abs() < 5e-3, "peak {peak} vs {expected}");
    }
}

#[test]
fn imaginary_alpha_gives_position_fringes() {
    let s = TrajectorySample::initial();
    let x = UniformGrid::new(-6.0, 6.0, 12001).unwrap();
    let spec = StateSpec::cat(Parity::Even, C64::new(0.0, 1.5));
    let w = marginal(&spec, &s, &q_frame(), &x, FormulaVariant::default()).unwrap();
    let oracle = frame_quadrature(&eval_state(&spec, &s, &x).unwrap(), &q_frame(), &x).unwrap();
    assert!(w.max_abs_diff(&oracle).unwrap() < 1e-10);
    // The envelope shifts the maxima; the zeros sit exactly at (k + 1/2) times the period.
    let model = AnalyticMarginal::new(spec, s).unwrap();
    let period = PI / (SQRT_2 * 1.5);
    for k in -2..2 {
        let y = (k as f64 + 0.5) * period;
        assert!(model.density(y, &q_frame()) < 1e-14, "w({y}) = {}", model.density(y, &q_frame()));
        assert!(model.density(y + 0.5 * period, &q_frame()) > 1e-5);
    }
}

#[test]
fn forward_transform_of_modulated_coherent_packet() {
    let s = solve_epsilon(&TrapParams::new(0.2, 2.0).unwrap(), 3.0, 1e-10).unwrap().sample_at(3.0).unwrap();
    let spec = StateSpec::coherent(C64::new(1.0, 0.5));
    let frame = ReferenceFrame::new(0.7, -0.4, 1.2).unwrap();
    let box_grid = UniformGrid::new(-8.0, 8.0, 3201).unwrap();
    let map = wigner_analytic(&spec, &s, &box_grid, &box_grid).unwrap();
    let a = marginal(&spec, &s, &frame, &x_grid(), FormulaVariant::default()).unwrap();
    let b = forward_transform(&map, &frame, &x_grid()).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() < 1e-5);
}

#[test]
fn stretched_frame_scales_variance() {
    let s = TrajectorySample::initial();
    let frame = ReferenceFrame::new(2.0, 0.0, 0.0).unwrap();
    let box_grid = UniformGrid::new(-8.0, 8.0, 1601).unwrap();
    let map = wigner_analytic(&StateSpec::ground(), &s, &box_grid, &box_grid).unwrap();
    let w = forward_transform(&map, &frame, &x_grid()).unwrap();
    let (mean, var) = moments(&w);
    assert!(mean.abs() < 1e-10);
    assert!((var - 2.0).abs() < 1e-4, "variance {var}");
}

#[test]
fn optical_quarter_turn_measures_momentum() {
    let s = TrajectorySample::initial();
    let w = optical_slice(&StateSpec::coherent(C64::new(1.0, 0.0)), &s, PI / 2.0, &x_grid(), FormulaVariant::default())
        .unwrap();
    let (mean, var) = moments(&w);
    assert!(mean.abs() < 1e-12);
    assert!((var - 0.5).abs() < 1e-10);
    let w0 = optical_slice(&StateSpec::coherent(C64::new(1.0, 0.0)), &s, 0.0, &x_grid(), FormulaVariant::default())
        .unwrap();
    assert!((moments(&w0).0 - SQRT_2).abs() < 1e-10);
}

#[test]
fn even_cat_optical_tomogram_has_period_pi() {
    let s = solve_epsilon(&TrapParams::new(0.2, 2.0).unwrap(), 2.0, 1e-10).unwrap().sample_at(1.5).unwrap();
    let spec = StateSpec::cat(Parity::Even, C64::new(1.0, 0.4));
    for k in 0..6 {
        let phi = 0.37 * k as f64;
        let a = optical_slice(&spec, &s, phi, &x_grid(), FormulaVariant::default()).unwrap();
        let b = optical_slice(&spec, &s, phi + PI, &x_grid(), FormulaVariant::default()).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }
}

#[test]
fn coverage_failures_are_reported() {
    let s = TrajectorySample::initial();
    let narrow = UniformGrid::new(-1.0, 1.0, 101).unwrap();
    let spec = StateSpec::coherent(C64::new(2.0, 0.0));
    assert!(matches!(marginal(&spec, &s, &q_frame(), &narrow, FormulaVariant::default()), Err(Error::Coverage(_))));
    let small_box = UniformGrid::new(-2.0, 2.0, 201).unwrap();
    let map = wigner_analytic(&spec, &s, &small_box, &small_box).unwrap();
    assert!(matches!(forward_transform(&map, &q_frame(), &x_grid()), Err(Error::Coverage(_))));
}

fn round_trip(spec: StateSpec, opts: &InversionOptions) -> f64 {
    let s = TrajectorySample::initial();
    let axis = UniformGrid::symmetric(6.0, 121).unwrap();
    let x = UniformGrid::new(-8.0, 8.0, 641).unwrap();
    let qp = UniformGrid::new(-5.0, 5.0, 101).unwrap();
    let family = tomogram_family(&AnalyticMarginal::new(spec, s).unwrap(), &axis, &x);
    let rebuilt = inverse_transform(&family, &qp, &qp, opts).unwrap();
    assert!((rebuilt.normalization() - 1.0).abs() < 1e-12);
    rebuilt.rel_l2_error(&wigner_analytic(&spec, &s, &qp, &qp).unwrap()).unwrap()
}

#[test]
fn inversion_of_coherent_and_odd_cat() {
    let opts = InversionOptions::default();
    assert!(round_trip(StateSpec::coherent(C64::new(0.8, -0.5)), &opts) < 0.05);
    assert!(round_trip(StateSpec::cat(Parity::Odd, C64::new(1.0, 0.0)), &opts) < 0.05);
}

#[test]
fn truncated_members_spoil_inversion_without_the_proxy() {
    let spec = StateSpec::cat(Parity::Even, C64::new(1.0, 0.0));
    let naive = round_trip(spec, &InversionOptions { homogeneity_proxy: false, ..Default::default() });
    let proxied = round_trip(spec, &InversionOptions::default());
    assert!(proxied < 0.05);
    assert!(naive > 2.0 * proxied, "naive {naive} vs proxied {proxied}");
}

#[test]
fn inversion_rejects_malformed_families() {
    let s = TrajectorySample::initial();
    let x = UniformGrid::new(-8.0, 8.0, 641).unwrap();
    let qp = UniformGrid::new(-5.0, 5.0, 51).unwrap();
    let model = AnalyticMarginal::new(StateSpec::ground(), s).unwrap();
    let opts = InversionOptions::default();
    let one = vec![model.tomogram(&q_frame(), &x)];
    assert!(matches!(inverse_transform(&one, &qp, &qp, &opts), Err(Error::Family(_))));

    let axis = UniformGrid::symmetric(1.0, 11).unwrap();
    let mut family = tomogram_family(&model, &axis, &x);
    family[3].frame.delta = 0.5;
    assert!(matches!(inverse_transform(&family, &qp, &qp, &opts), Err(Error::Family(_))));
}
