//! The `trajectory`, `tomogram`, `wigner` and `reconstruct` commands.

use serde_json::json;

use super::config::RunConfig;
use super::output::{Header, Table, Writer};
use super::Failure;
use crate::states::{eval_state, wigner_analytic, wigner_numeric};
use crate::tomograms::{
    forward_transform, frame_quadrature, inverse_transform, marginal, tomogram_family, AnalyticMarginal,
    InversionOptions,
};
use crate::trajectory::{floquet, solve_epsilon, ComplexTrajectory, TrajectorySample};

/// Largest relative L² error accepted for a reconstructed map.
pub const RECONSTRUCTION_L2_TOL: f64 = 0.05;
/// Largest `|Σ w ΔX - 1|` accepted for any tomogram route.
pub const TOMOGRAM_NORM_TOL: f64 = 1e-5;

pub(crate) fn writer(cfg: &RunConfig) -> Result<Writer, Failure> {
    Writer::new(&cfg.output.dir, cfg.output.format, Header::new(cfg.digest()))
}

/// Trajectory solved far enough to serve every configured time.
pub(crate) struct Samples {
    trajectory: Option<ComplexTrajectory>,
}

impl Samples {
    pub(crate) fn new(cfg: &RunConfig, horizon: f64) -> Result<Self, Failure> {
        let t_end = cfg.times().into_iter().fold(horizon, f64::max);
        let trajectory = if t_end > 0.0 { Some(solve_epsilon(&cfg.trap, t_end, cfg.tolerances.ode)?) } else { None };
        Ok(Self { trajectory })
    }

    pub(crate) fn at(&self, t: f64) -> Result<TrajectorySample, Failure> {
        match &self.trajectory {
            Some(traj) => Ok(traj.sample_at(t)?),
            None => Ok(TrajectorySample::initial()),
        }
    }

    pub(crate) fn trajectory(&self) -> Option<&ComplexTrajectory> {
        self.trajectory.as_ref()
    }
}

pub fn trajectory(cfg: &RunConfig) -> Result<(), Failure> {
    let t_end = cfg.times().into_iter().fold(0.0, f64::max);
    if !(t_end > 0.0) {
        return Err(Failure::config("trajectory needs a positive time"));
    }
    let traj = solve_epsilon(&cfg.trap, t_end, cfg.tolerances.ode)?;
    let stability = floquet(&cfg.trap, cfg.tolerances.ode)?;
    let out = writer(cfg)?;

    let mut table = Table::new(vec!["t", "re_eps", "im_eps", "re_eps_dot", "im_eps_dot", "wronskian_residual"]);
    let mut worst_scaled = 0.0f64;
    let mut max_abs_eps = 0.0f64;
    for i in 0..traj.len() {
        let s = traj.node(i);
        let r = s.wronskian_residual();
        // rounding in Im(εε̇*) scales with |ε||ε̇| once the motion is unstable
        worst_scaled = worst_scaled.max(r / (s.eps.norm() * s.eps_dot.norm()).max(1.0));
        max_abs_eps = max_abs_eps.max(s.eps.norm());
        table.push(vec![s.t, s.eps.re, s.eps.im, s.eps_dot.re, s.eps_dot.im, r]);
    }
    out.table("trajectory", &table)?;
    let tol = 10.0 * cfg.tolerances.ode;
    out.report(
        "trajectory_summary.json",
        json!({
            "trap": cfg.trap,
            "t_end": t_end,
            "nodes": traj.len(),
            "max_wronskian_residual": traj.max_wronskian_residual(),
            "max_scaled_wronskian_residual": worst_scaled,
            "wronskian_tolerance": tol,
            "max_abs_eps": max_abs_eps,
            "floquet": stability,
            "unstable": stability.is_unstable(),
        }),
    )?;
    if stability.is_unstable() {
        eprintln!(
            "note: kappa={}, omega_mod={} lies in a parametric-instability zone \
             (Floquet multiplier {:.6}, growth rate {:.6}); |eps| grows exponentially",
            cfg.trap.kappa, cfg.trap.omega_mod, stability.multiplier, stability.growth_rate
        );
    }
    if worst_scaled > tol {
        return Err(Failure::check(format!("Wronskian residual {worst_scaled:.3e} exceeds {tol:.1e}")));
    }
    Ok(())
}

pub fn tomogram(cfg: &RunConfig) -> Result<(), Failure> {
    let frames = cfg.frame_list()?;
    let samples = Samples::new(cfg, 0.0)?;
    let out = writer(cfg)?;
    let g = &cfg.grids;
    let tol = cfg.tolerances.quadrature;

    let mut entries = Vec::new();
    let mut offenders = Vec::new();
    for (it, &t) in cfg.times().iter().enumerate() {
        let s = samples.at(t)?;
        let psi = eval_state(&cfg.state, &s, &g.psi)?;
        let map = wigner_analytic(&cfg.state, &s, &g.transform, &g.transform)?;
        for (jf, frame) in frames.iter().enumerate() {
            let analytic = marginal(&cfg.state, &s, frame, &g.x, cfg.formula)?;
            let transform = forward_transform(&map, frame, &g.x)?;
            let quadrature = frame_quadrature(&psi, frame, &g.x)?;

            let mut table =
                Table::new(vec!["X", "w_analytic", "w_transform", "w_quadrature", "max_abs_disagreement"]);
            let mut worst = 0.0f64;
            for (k, x) in g.x.points().into_iter().enumerate() {
                let (a, b, c) = (analytic.values[k], transform.values[k], quadrature.values[k]);
                let d = (a - b).abs().max((a - c).abs()).max((b - c).abs());
                worst = worst.max(d);
                table.push(vec![x, a, b, c, d]);
            }
            out.table(&format!("tomogram_t{it}_f{jf}"), &table)?;

            let norms = [analytic.normalization(), transform.normalization(), quadrature.normalization()];
            let worst_norm = norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
            let pass = worst <= tol && worst_norm <= TOMOGRAM_NORM_TOL;
            if !pass {
                offenders.push(format!(
                    "t={t} frame (mu={}, nu={}, delta={}): disagreement {worst:.3e}, normalization residual {worst_norm:.3e}",
                    frame.mu, frame.nu, frame.delta
                ));
            }
            entries.push(json!({
                "time": t,
                "frame": frame,
                "normalization_residual": {
                    "analytic": norms[0] - 1.0,
                    "transform": norms[1] - 1.0,
                    "quadrature": norms[2] - 1.0,
                },
                "max_abs_disagreement": worst,
                "pass": pass,
            }));
        }
    }
    out.report(
        "tomogram_summary.json",
        json!({
            "state": cfg.state,
            "formula": cfg.formula,
            "agreement_tolerance": tol,
            "normalization_tolerance": TOMOGRAM_NORM_TOL,
            "tomograms": entries,
        }),
    )?;
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(Failure::check(format!("oracle disagreement: {}", offenders.join("; "))))
    }
}

pub fn wigner(cfg: &RunConfig) -> Result<(), Failure> {
    let samples = Samples::new(cfg, 0.0)?;
    let out = writer(cfg)?;
    let g = &cfg.grids;
    let tol = cfg.tolerances.quadrature;
    let mut entries = Vec::new();
    let mut offenders = Vec::new();
    for (it, &t) in cfg.times().iter().enumerate() {
        let s = samples.at(t)?;
        let analytic = wigner_analytic(&cfg.state, &s, &g.q, &g.p)?;
        let numeric = wigner_numeric(&eval_state(&cfg.state, &s, &g.psi)?, &g.q, &g.p)?;
        let mut table = Table::new(vec!["q", "p", "w_analytic", "w_numeric"]);
        let (qs, ps) = (g.q.points(), g.p.points());
        for (iq, &q) in qs.iter().enumerate() {
            for (ip, &p) in ps.iter().enumerate() {
                table.push(vec![q, p, analytic.value(iq, ip), numeric.value(iq, ip)]);
            }
        }
        out.table(&format!("wigner_t{it}"), &table)?;
        let diff = analytic.max_abs_diff(&numeric)?;
        if diff > tol {
            offenders.push(format!("t={t}: max |W_analytic - W_numeric| = {diff:.3e}"));
        }
        entries.push(json!({
            "time": t,
            "max_abs_diff": diff,
            "analytic_norm_constant": analytic.diagnostics.norm_constant,
            "analytic_box_normalization": analytic.diagnostics.box_normalization,
            "numeric_box_normalization": numeric.diagnostics.box_normalization,
            "numeric_imag_residue": numeric.diagnostics.imag_residue,
            "pass": diff <= tol,
        }));
    }
    out.report("wigner_summary.json", json!({ "state": cfg.state, "tolerance": tol, "maps": entries }))?;
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(Failure::check(offenders.join("; ")))
    }
}

pub fn reconstruct(cfg: &RunConfig) -> Result<(), Failure> {
    let grid = cfg.frame_grid()?;
    if grid.delta != 0.0 {
        return Err(Failure::config("reconstruction needs frames.grid.delta = 0"));
    }
    let axis = grid.axis()?;
    let samples = Samples::new(cfg, 0.0)?;
    let out = writer(cfg)?;
    let g = &cfg.grids;
    let mut entries = Vec::new();
    let mut offenders = Vec::new();
    for (it, &t) in cfg.times().iter().enumerate() {
        let s = samples.at(t)?;
        let model = AnalyticMarginal::with_variant(cfg.state, s, cfg.formula)?;
        let family = tomogram_family(&model, &axis, &g.x);
        let rebuilt = inverse_transform(&family, &g.q, &g.p, &InversionOptions::default())?;
        let reference = wigner_analytic(&cfg.state, &s, &g.q, &g.p)?;
        let l2 = rebuilt.rel_l2_error(&reference)?;

        let mut table = Table::new(vec!["q", "p", "w"]);
        let (qs, ps) = (g.q.points(), g.p.points());
        for (iq, &q) in qs.iter().enumerate() {
            for (ip, &p) in ps.iter().enumerate() {
                table.push(vec![q, p, rebuilt.value(iq, ip)]);
            }
        }
        out.table(&format!("reconstruct_t{it}"), &table)?;
        let origin = rebuilt.interpolate(0.0, 0.0);
        if !(l2 <= RECONSTRUCTION_L2_TOL) {
            offenders.push(format!("t={t}: relative L2 error {l2:.4}"));
        }
        entries.push(json!({
            "time": t,
            "members": family.len(),
            "l2_rel_error": l2,
            "raw_norm_constant": 1.0 / rebuilt.diagnostics.norm_constant,
            "w_origin": origin,
            "pass": l2 <= RECONSTRUCTION_L2_TOL,
        }));
    }
    out.report(
        "reconstruct_report.json",
        json!({
            "state": cfg.state,
            "frame_grid": grid,
            "l2_tolerance": RECONSTRUCTION_L2_TOL,
            "reconstructions": entries,
        }),
    )?;
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(Failure::check(offenders.join("; ")))
    }
}
