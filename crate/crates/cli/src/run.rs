//! `run`: flow, gauge, max-margin solution and their comparison.

use std::fmt::Write;

use mirror_margin::data::SUPPORT_TOLERANCE;
use mirror_margin::flow::{run, StopReason};
use mirror_margin::horizon::{
    gauge_from_probe, horizon_shape_numeric, named_horizon_gauge, GaugeSummary,
};
use mirror_margin::linalg::norm2;
use mirror_margin::margin::{
    directional_gap, kkt_verify, solve_max_margin, KktResiduals, Uniqueness,
};
use mirror_margin::{
    Dataset, Gauge, HorizonShapeProbe, MarginProblem, MarginSolution, Trajectory, VectorPotential,
};
use serde::Serialize;

use crate::bundle::{Bundle, Manifest};
use crate::config::{ExperimentConfig, GaugeSpec};
use crate::failure::Failure;
use crate::svg::{Plot, PALETTE};

/// Tolerance of the KKT check on the flow's end direction.
pub const FLOW_KKT_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub direction: Vec<f64>,
    pub q_limit: Vec<f64>,
    pub dual_direction: Vec<f64>,
    pub dual_residual: f64,
    pub final_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub experiment: String,
    pub potential: String,
    pub loss: String,
    pub gauge: GaugeSummary,
    pub steps_taken: usize,
    pub stop_reason: StopReason,
    pub final_log_loss: f64,
    /// Largest one-step rise of the loss relative to its initial value.
    pub max_loss_increase: f64,
    pub log_loss_strictly_decreasing: bool,
    pub final_direction: Vec<f64>,
    pub max_margin_beta: Vec<f64>,
    pub margin_method: String,
    pub uniqueness: Uniqueness<f64>,
    pub solution_kkt: KktResiduals<f64>,
    pub directional_gap: f64,
    /// Non-increasing over the records in the last decade of steps.
    pub gap_monotone_last_decade: bool,
    pub support: Vec<usize>,
    pub max_non_support_q: Option<f64>,
    pub limit: Option<LimitReport>,
    pub limit_refusal: Option<String>,
    /// Residuals of the end direction with the tail-averaged `q`.
    pub flow_kkt: Option<KktResiduals<f64>>,
}

impl RunReport {
    pub fn flow_kkt_passes(&self) -> bool {
        self.flow_kkt
            .is_some_and(|r| r.stationarity.max(r.slackness).max(r.feasibility) <= FLOW_KKT_TOL)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub dataset: Dataset,
    pub trajectory: Trajectory,
    pub gauge: Gauge,
    pub solution: MarginSolution,
    pub gaps: Vec<(usize, f64)>,
    pub manifest: Manifest,
}

/// Gauge named by the config: closed-form horizon of a shipped potential
/// for `auto`, the canonicalized numeric probe when none is known or when
/// `numeric` is asked for.
pub fn resolve_gauge(
    cfg: &ExperimentConfig,
    p: &VectorPotential,
) -> Result<(Gauge, Option<HorizonShapeProbe>), Failure> {
    let stage = "gauge";
    let named = match &cfg.gauge {
        GaugeSpec::Auto => p.as_separable().and_then(named_horizon_gauge),
        GaugeSpec::Numeric => None,
        GaugeSpec::L1 => Some(Gauge::l1()),
        GaugeSpec::L2 => Some(Gauge::l2()),
        GaugeSpec::Linf => Some(Gauge::linf()),
        GaugeSpec::Lp(q) => Some(Gauge::lp(*q).map_err(|e| Failure::core(stage, e))?),
    };
    if let Some(g) = named {
        return Ok((g, None));
    }
    let grid = cfg.direction_grid(p.dim())?;
    let probe = horizon_shape_numeric(p, &cfg.horizon.levels, &grid)
        .map_err(|e| Failure::core(stage, e))?;
    let g = gauge_from_probe(&probe, &cfg.probe_options()).map_err(|e| Failure::core(stage, e))?;
    Ok((g, Some(probe)))
}

pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunOutcome, Failure> {
    let mut bundle = Bundle::create(&cfg.output_dir(), "run", cfg.name())?;
    let result = stages(cfg, &mut bundle);
    let manifest = bundle.finish(result.as_ref().err().cloned())?;
    result.map(
        |(report, dataset, trajectory, gauge, solution, gaps)| RunOutcome {
            report,
            dataset,
            trajectory,
            gauge,
            solution,
            gaps,
            manifest,
        },
    )
}

type Stages = (
    RunReport,
    Dataset,
    Trajectory,
    Gauge,
    MarginSolution,
    Vec<(usize, f64)>,
);

fn stages(cfg: &ExperimentConfig, bundle: &mut Bundle) -> Result<Stages, Failure> {
    bundle.write("effective_config.json", &(cfg.to_json() + "\n"))?;
    let ds = cfg.dataset()?;
    bundle.write("dataset.csv", &ds.to_csv())?;
    let loss = cfg.loss()?;
    let p = cfg.potential(ds.d())?;
    let flow = cfg.flow_config()?;

    let tr = run(&p, &loss, &ds, &flow).map_err(|e| Failure::core("flow", e))?;
    bundle.write("trajectory.csv", &tr.to_csv())?;
    bundle.write("loss.csv", &loss_csv(&tr))?;

    let (gauge, probe) = resolve_gauge(cfg, &p)?;
    if let Some(probe) = &probe {
        bundle.write("probe.csv", &probe.to_csv())?;
    }
    bundle.write_json("gauge.json", &gauge.summary())?;

    let prob = MarginProblem::new(gauge.clone(), ds.z().clone())
        .map_err(|e| Failure::core("margin", e))?;
    let sol = solve_max_margin(&prob).map_err(|e| Failure::core("margin", e))?;
    bundle.write_json("margin_solution.json", &sol)?;

    let stage = "diagnostics";
    let gaps: Vec<(usize, f64)> = tr
        .directions
        .iter()
        .zip(&tr.steps)
        .filter(|(d, _)| norm2(d) > 0.0)
        .map(|(d, &k)| directional_gap(d, &sol).map(|g| (k, g)))
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::core(stage, e))?;
    bundle.write("gaps.csv", &gaps_csv(&tr, &gaps))?;
    let decade = tr.steps_taken / 10;
    let tail: Vec<f64> = gaps
        .iter()
        .filter(|(k, _)| *k >= decade)
        .map(|&(_, g)| g)
        .collect();

    let m = ds
        .z()
        .mul_vec(&sol.beta)
        .map_err(|e| Failure::core(stage, e))?;
    let support: Vec<usize> = (0..m.len())
        .filter(|&i| m[i] - 1.0 <= SUPPORT_TOLERANCE)
        .collect();
    let max_non_support_q = (0..m.len())
        .filter(|i| !support.contains(i))
        .map(|i| tr.final_q()[i])
        .fold(None, |acc: Option<f64>, q| {
            Some(acc.map_or(q, |a| a.max(q)))
        });

    let (limit, limit_refusal, flow_kkt) = match tr.limit_diagnostics(ds.z()) {
        Ok(d) => {
            let cand = MarginSolution::candidate(&d.direction, &d.q_limit, &gauge, ds.z());
            let kkt = match cand {
                Ok(c) => Some(
                    kkt_verify(&c, &gauge, ds.z(), FLOW_KKT_TOL)
                        .map_err(|e| Failure::core(stage, e))?
                        .residuals,
                ),
                Err(_) => None,
            };
            let l = LimitReport {
                direction: d.direction,
                q_limit: d.q_limit,
                dual_direction: d.dual_direction,
                dual_residual: d.dual_residual,
                final_norm: d.final_norm,
            };
            (Some(l), None, kkt)
        }
        Err(e) => (None, Some(e.to_string()), None),
    };

    let report = RunReport {
        experiment: cfg.name().into(),
        potential: p.name(),
        loss: loss.name(),
        gauge: gauge.summary(),
        steps_taken: tr.steps_taken,
        stop_reason: tr.stop_reason,
        final_log_loss: tr.log_losses.last().copied().unwrap_or(f64::NAN),
        max_loss_increase: tr.max_loss_increase,
        log_loss_strictly_decreasing: tr.max_log_loss_increase < 0.0,
        final_direction: tr.final_direction().to_vec(),
        max_margin_beta: sol.beta.clone(),
        margin_method: sol.method.clone(),
        uniqueness: sol.uniqueness.clone(),
        solution_kkt: sol.residuals,
        directional_gap: gaps.last().map_or(f64::NAN, |g| g.1),
        gap_monotone_last_decade: tail.windows(2).all(|w| w[1] <= w[0]),
        support,
        max_non_support_q,
        limit,
        limit_refusal,
        flow_kkt,
    };
    bundle.write_json("limit_diagnostics.json", &report)?;

    if cfg.output.plots {
        bundle.write("loss.svg", &loss_svg(&tr, cfg.name()))?;
        if ds.d() == 2 {
            let sol_dir = unit(&sol.beta);
            let flow_dir = tr.final_direction().to_vec();
            let rows = [("max_margin", sol_dir), ("flow_final", flow_dir)];
            bundle.write(
                "directions.csv",
                &directions_csv(&rows, &gauge).map_err(|e| Failure::core("plots", e))?,
            )?;
            let ball = gauge
                .unit_ball_2d(360)
                .map_err(|e| Failure::core("plots", e))?;
            let mut ball_csv = String::from("x,y\n");
            for [x, y] in &ball {
                let _ = writeln!(ball_csv, "{x},{y}");
            }
            bundle.write("gauge_ball.csv", &ball_csv)?;
            bundle.write("paths.svg", &paths_svg(&ds, &tr, &rows, cfg.name()))?;
            bundle.write(
                "gauge.svg",
                &gauge_svg(&ball, &rows, &gauge, cfg.name())
                    .map_err(|e| Failure::core("plots", e))?,
            )?;
        }
    }
    Ok((report, ds, tr, gauge, sol, gaps))
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm2(v);
    v.iter().map(|x| x / n).collect()
}

fn loss_csv(tr: &Trajectory) -> String {
    let mut s = String::from("step,t,theta,loss,log_loss\n");
    for k in 0..tr.len() {
        let _ = writeln!(
            s,
            "{},{},{},{:e},{}",
            tr.steps[k], tr.times[k], tr.theta[k], tr.losses[k], tr.log_losses[k]
        );
    }
    s
}

fn gaps_csv(tr: &Trajectory, gaps: &[(usize, f64)]) -> String {
    let mut s = String::from("step,t,directional_gap\n");
    for &(k, g) in gaps {
        let idx = tr.steps.iter().position(|&j| j == k).unwrap_or(0);
        let _ = writeln!(s, "{k},{},{g:e}", tr.times[idx]);
    }
    s
}

fn directions_csv(rows: &[(&str, Vec<f64>)], gauge: &Gauge) -> mirror_margin::Result<String> {
    let mut s = String::from("name,x,y,ball_x,ball_y\n");
    for (name, u) in rows {
        let g = gauge.eval(u)?;
        let _ = writeln!(s, "{name},{},{},{},{}", u[0], u[1], u[0] / g, u[1] / g);
    }
    Ok(s)
}

fn loss_svg(tr: &Trajectory, name: &str) -> String {
    let pts: Vec<(f64, f64)> = tr
        .steps
        .iter()
        .zip(&tr.log_losses)
        .filter(|(&k, _)| k > 0)
        .map(|(&k, &l)| ((k as f64).log10(), l / std::f64::consts::LN_10))
        .collect();
    let (x0, x1) = (
        pts.first().map_or(0.0, |p| p.0),
        pts.last().map_or(1.0, |p| p.0),
    );
    let (y0, y1) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.1), b.max(p.1))
        });
    let mut plot = Plot::new(&format!("{name}: training loss"), (x0, x1), (y0, y1))
        .labels("log10 step", "log10 loss");
    plot.polyline(&pts, PALETTE[0], 2.0, Some(&tr.potential));
    plot.render()
}

fn paths_svg(ds: &Dataset, tr: &Trajectory, rows: &[(&str, Vec<f64>)], name: &str) -> String {
    let r = ds.x().iter_rows().map(norm2).fold(0.0, f64::max);
    let mut plot = Plot::square(
        &format!("{name}: data, separators and normalized iterates"),
        1.1 * r,
    )
    .labels("x1", "x2");
    for (x, &y) in ds.x().iter_rows().zip(ds.y()) {
        plot.circle(
            x[0],
            x[1],
            3.0,
            if y > 0.0 { PALETTE[0] } else { PALETTE[1] },
        );
    }
    for (k, (label, u)) in rows.iter().enumerate() {
        let color = PALETTE[2 + k];
        // the separator {x : ⟨u, x⟩ = 0}
        plot.dashed(
            (-u[1] * 2.0 * r, u[0] * 2.0 * r),
            (u[1] * 2.0 * r, -u[0] * 2.0 * r),
            color,
            Some(label),
        );
    }
    let path: Vec<(f64, f64)> = tr
        .directions
        .iter()
        .filter(|d| norm2(d) > 0.0)
        .map(|d| (d[0] * r, d[1] * r))
        .collect();
    plot.polyline(&path, PALETTE[4], 2.0, Some("β/‖β‖ (scaled)"));
    if let Some(&(x, y)) = path.last() {
        plot.circle(x, y, 4.0, PALETTE[4]);
    }
    plot.render()
}

fn gauge_svg(
    ball: &[[f64; 2]],
    rows: &[(&str, Vec<f64>)],
    gauge: &Gauge,
    name: &str,
) -> mirror_margin::Result<String> {
    let r = ball.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    let mut plot =
        Plot::square(&format!("{name}: unit ball of {}", gauge.name()), 1.2 * r).labels("β1", "β2");
    let mut closed: Vec<(f64, f64)> = ball.iter().map(|p| (p[0], p[1])).collect();
    if let Some(&first) = closed.first() {
        closed.push(first);
    }
    plot.polyline(&closed, PALETTE[0], 2.0, Some("gauge = 1"));
    for (k, (label, u)) in rows.iter().enumerate() {
        let g = gauge.eval(u)?;
        if k == 0 {
            plot.star(u[0] / g, u[1] / g, PALETTE[4], Some(label));
        } else {
            plot.circle(u[0] / g, u[1] / g, 4.0, PALETTE[2]);
        }
    }
    Ok(plot.render())
}
