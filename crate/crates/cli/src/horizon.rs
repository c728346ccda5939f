//! `horizon`: normalized sublevel sets of a potential and the gauge they
//! converge to.

use std::f64::consts::LN_10;

use mirror_margin::horizon::{
    gauge_from_probe, horizon_separable, horizon_shape_numeric, GaugeSummary, ProbeSummary,
    SeparableOptions,
};
use mirror_margin::{Gauge, HorizonShapeProbe, VectorPotential};
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{Bundle, Manifest};
use crate::config::ExperimentConfig;
use crate::failure::Failure;
use crate::svg::{Plot, PALETTE};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonReport {
    pub probe: ProbeSummary,
    pub gauge: Option<GaugeSummary>,
    /// `max/min − 1` of the probe gauge over the closed-form horizon across
    /// the grid, for separable potentials.
    pub analytic_ratio_spread: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct HorizonOutcome {
    pub report: HorizonReport,
    pub probe: HorizonShapeProbe,
    pub gauge: Gauge,
    pub manifest: Manifest,
}

/// Spread of `gauge(u) / h(u)` over `directions`, `h` the closed-form horizon.
pub fn analytic_ratio_spread(
    p: &VectorPotential,
    gauge: &Gauge,
    directions: &[Vec<f64>],
) -> mirror_margin::Result<f64> {
    let opts = SeparableOptions::default();
    let ratios: Vec<f64> = directions
        .par_iter()
        .map(|u| Ok(gauge.eval(u)? / horizon_separable(p, u, &opts)?.value))
        .collect::<mirror_margin::Result<_>>()?;
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    Ok(hi / lo - 1.0)
}

pub fn cmd_horizon(cfg: &ExperimentConfig) -> Result<HorizonOutcome, Failure> {
    let mut bundle = Bundle::create(&cfg.output_dir(), "horizon", cfg.name())?;
    let result = stages(cfg, &mut bundle);
    let manifest = bundle.finish(result.as_ref().err().cloned())?;
    result.map(|(report, probe, gauge)| HorizonOutcome {
        report,
        probe,
        gauge,
        manifest,
    })
}

fn stages(
    cfg: &ExperimentConfig,
    bundle: &mut Bundle,
) -> Result<(HorizonReport, HorizonShapeProbe, Gauge), Failure> {
    bundle.write("effective_config.json", &(cfg.to_json() + "\n"))?;
    let stage = "horizon";
    let p = cfg.potential(cfg.horizon.dim)?;
    let grid = cfg.direction_grid(p.dim())?;
    let probe = horizon_shape_numeric(&p, &cfg.horizon.levels, &grid)
        .map_err(|e| Failure::core(stage, e))?;
    bundle.write("probe.csv", &probe.to_csv())?;
    if cfg.output.plots && p.dim() == 2 {
        bundle.write("level_sets.svg", &level_sets_svg(&probe, cfg.name()))?;
    }
    let summary = probe.summary(cfg.horizon.degeneracy_threshold);
    let gauge = gauge_from_probe(&probe, &cfg.probe_options());
    let analytic = match (&gauge, p.as_separable()) {
        (Ok(g), Some(_)) => Some(
            analytic_ratio_spread(&p, g, grid.directions()).map_err(|e| Failure::core(stage, e))?,
        ),
        _ => None,
    };
    let report = HorizonReport {
        probe: summary,
        gauge: gauge.as_ref().ok().map(Gauge::summary),
        analytic_ratio_spread: analytic,
    };
    bundle.write_json("horizon.json", &report)?;
    let gauge = gauge.map_err(|e| Failure::core(stage, e))?;
    Ok((report, probe, gauge))
}

/// Nested normalized level sets, one closed curve per level.
fn level_sets_svg(probe: &HorizonShapeProbe, name: &str) -> String {
    let mut plot =
        Plot::square(&format!("{name}: normalized sublevel sets"), 1.15).labels("β1", "β2");
    for (k, (c, rs)) in probe.levels.iter().zip(&probe.radial).enumerate() {
        let mut pts: Vec<(f64, f64)> = probe
            .grid
            .directions()
            .iter()
            .zip(rs)
            .map(|(u, r)| (u[0] * r, u[1] * r))
            .collect();
        if let Some(&first) = pts.first() {
            pts.push(first);
        }
        let label = format!("c = 1e{:.0}", c.ln() / LN_10);
        plot.polyline(&pts, PALETTE[k % PALETTE.len()], 1.5, Some(&label));
    }
    plot.render()
}
