//! `check`: probes the standing assumptions on the configured loss,
//! potential and dataset.

use mirror_margin::linalg::norm2;
use mirror_margin::VectorPotential;
use serde::Serialize;

use crate::bundle::{Bundle, Manifest};
use crate::config::ExperimentConfig;
use crate::failure::Failure;

const GRID: [f64; 7] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0];
const RAYS: [f64; 4] = [1.0, 10.0, 100.0, 500.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckItem {
    pub assumption: String,
    pub passed: bool,
    pub evidence: String,
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub items: Vec<CheckItem>,
    pub manifest: Manifest,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

fn item(assumption: &str, passed: bool, evidence: String) -> CheckItem {
    CheckItem {
        assumption: assumption.into(),
        passed,
        evidence,
    }
}

/// Evenness and strict convexity of each coordinate's scalar potential.
fn convexity(p: &VectorPotential) -> CheckItem {
    let mut worst = None;
    for k in 0..p.dim() {
        let Some(s) = p.coordinate(k) else {
            return item(
                "potential even and strictly convex",
                true,
                "general potential: not probed".into(),
            );
        };
        for &x in &GRID {
            if (s.value(x) - s.value(-x)).abs() > 1e-9 * (1.0 + s.value(x).abs()) {
                worst = Some(format!("coordinate {}: ϕ({x}) ≠ ϕ(-{x})", k + 1));
            }
            if s.second(x).partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                worst = Some(format!("coordinate {}: ϕ''({x}) = {}", k + 1, s.second(x)));
            }
        }
    }
    match worst {
        None => item(
            "potential even and strictly convex",
            true,
            format!("ϕ even and ϕ'' > 0 at ±{GRID:?}"),
        ),
        Some(w) => item("potential even and strictly convex", false, w),
    }
}

/// `‖∇φ(t u)‖` increasing without bound along the axes and the diagonal,
/// and `∇φ*` inverting `∇φ` along the way.
fn coercivity_and_inverse(p: &VectorPotential) -> Vec<CheckItem> {
    let d = p.dim();
    let mut rays: Vec<Vec<f64>> = (0..d)
        .map(|k| (0..d).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
        .collect();
    rays.push(vec![1.0 / (d as f64).sqrt(); d]);
    let mut growth = Vec::new();
    let mut coercive = true;
    let mut worst_roundtrip = 0.0f64;
    let mut roundtrip_error = None;
    for u in &rays {
        let mut norms = Vec::new();
        for &t in &RAYS {
            let beta: Vec<f64> = u.iter().map(|x| x * t).collect();
            match p.mirror_map(&beta) {
                Ok(g) => {
                    norms.push(norm2(&g));
                    if g.iter().all(|v| v.is_finite()) {
                        match p.inverse_mirror_map(&g) {
                            Ok(back) => {
                                let err = back
                                    .iter()
                                    .zip(&beta)
                                    .map(|(a, b)| (a - b).abs())
                                    .fold(0.0, f64::max)
                                    / t;
                                worst_roundtrip = worst_roundtrip.max(err);
                            }
                            Err(e) => roundtrip_error = Some(e.to_string()),
                        }
                    }
                }
                Err(e) => {
                    roundtrip_error = Some(e.to_string());
                    norms.push(f64::NAN);
                }
            }
        }
        // infinite norms count as growth: the map overflows because it is coercive
        coercive &= norms
            .windows(2)
            .all(|w| w[1] > w[0] || w[1] == f64::INFINITY)
            && norms[norms.len() - 1] >= 2.0 * norms[0];
        growth.push(format!("{:.3e}", norms[norms.len() - 1]));
    }
    let roundtrip_ok = roundtrip_error.is_none() && worst_roundtrip <= 1e-10;
    vec![
        item(
            "mirror map coercive",
            coercive,
            format!(
                "‖∇φ(t u)‖ at t = {} along {} rays: {}",
                RAYS[RAYS.len() - 1],
                rays.len(),
                growth.join(", ")
            ),
        ),
        item(
            "mirror map invertible",
            roundtrip_ok,
            roundtrip_error
                .unwrap_or_else(|| format!("max relative round-trip error {worst_roundtrip:.2e}")),
        ),
    ]
}

pub fn cmd_check(cfg: &ExperimentConfig) -> Result<CheckOutcome, Failure> {
    let mut bundle = Bundle::create(&cfg.output_dir(), "check", cfg.name())?;
    let result = stages(cfg, &mut bundle);
    let manifest = bundle.finish(result.as_ref().err().cloned())?;
    result.map(|items| CheckOutcome { items, manifest })
}

fn stages(cfg: &ExperimentConfig, bundle: &mut Bundle) -> Result<Vec<CheckItem>, Failure> {
    bundle.write("effective_config.json", &(cfg.to_json() + "\n"))?;
    let mut items = Vec::new();

    let loss = cfg.loss()?;
    let probes = loss.tail_probes();
    let tail = probes
        .iter()
        .map(|t| {
            format!(
                "z={}: ℓe^z={:.6}, -ℓ'e^z={:.6}",
                t.z, t.value_ratio, t.deriv_ratio
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    items.push(item(
        &format!("{} loss has an exponential tail", loss.name()),
        probes.iter().all(|t| t.passes()),
        tail,
    ));

    let ds = cfg.dataset.as_ref().map(|_| cfg.dataset()).transpose()?;
    let dim = ds.as_ref().map_or(cfg.horizon.dim, |d| d.d());
    let p = cfg.potential(dim)?;
    items.push(convexity(&p));
    items.extend(coercivity_and_inverse(&p));

    if let Some(ds) = &ds {
        let sep = ds
            .check_separable()
            .map_err(|e| Failure::core("separability", e))?;
        let evidence = match &sep.witness {
            Some(w) if sep.separable => {
                format!("LP margin {:.3e} with witness β = {w:?}", sep.margin)
            }
            _ => format!(
                "no separating direction (best LP margin {:.3e})",
                sep.margin + 0.0
            ),
        };
        items.push(item("data linearly separable", sep.separable, evidence));
    }
    bundle.write_json("check.json", &items)?;
    Ok(items)
}
