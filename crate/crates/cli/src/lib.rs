//! Config-driven experiments on top of `mirror-margin`: mirror descent runs
//! compared against their max-margin limit, horizon-shape probes and
//! assumption checks, each writing CSV/JSON/SVG artifacts and a manifest.

pub mod bundle;
pub mod check;
pub mod config;
pub mod failure;
pub mod horizon;
pub mod run;
pub mod svg;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use check::{cmd_check, CheckOutcome};
pub use config::{ExperimentConfig, Overrides};
pub use failure::Failure;
pub use horizon::{cmd_horizon, HorizonOutcome};
pub use run::{cmd_run, RunOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Horizon,
    Check,
}

/// Runs `command` on one config file and prints its summary; returns the
/// process exit code.
pub fn execute(command: Command, path: &Path, overrides: &Overrides) -> u8 {
    let result = ExperimentConfig::load(path).and_then(|mut cfg| {
        cfg.apply(overrides);
        let label = cfg.name().to_string();
        match command {
            Command::Run => cmd_run(&cfg).map(|o| print_run(&label, &o)),
            Command::Horizon => cmd_horizon(&cfg).map(|o| print_horizon(&label, &o)),
            Command::Check => cmd_check(&cfg).map(|o| print_check(&label, &o)),
        }
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}: {f}", path.display());
            f.code
        }
    }
}

fn print_run(label: &str, o: &RunOutcome) -> u8 {
    let r = &o.report;
    println!(
        "{label}: {} steps ({:?}), final directional gap {:.3e} against {} max-margin {:?}",
        r.steps_taken, r.stop_reason, r.directional_gap, r.gauge.kind, r.max_margin_beta
    );
    if let Some(k) = &r.flow_kkt {
        println!(
            "{label}: end-direction KKT stationarity {:.3e}, slackness {:.3e}",
            k.stationarity, k.slackness
        );
    }
    if let Some(why) = &r.limit_refusal {
        println!("{label}: no limit diagnostics: {why}");
    }
    0
}

fn print_horizon(label: &str, o: &HorizonOutcome) -> u8 {
    let gaps: Vec<String> = o
        .report
        .probe
        .hausdorff_gaps
        .iter()
        .map(|g| format!("{g:.3e}"))
        .collect();
    println!("{label}: Hausdorff gaps [{}]", gaps.join(", "));
    println!("{label}: gauge {}", o.gauge.name());
    if let Some(s) = o.report.analytic_ratio_spread {
        println!("{label}: ratio spread against the closed-form horizon {s:.3e}");
    }
    0
}

fn print_check(label: &str, o: &CheckOutcome) -> u8 {
    for i in &o.items {
        println!(
            "{label}: [{}] {}: {}",
            if i.passed { "pass" } else { "FAIL" },
            i.assumption,
            i.evidence
        );
    }
    if o.passed() {
        0
    } else {
        failure::EXIT_VALIDATION
    }
}

/// Runs `command` on every config matching `pattern`, each into
/// `out/<config stem>`, at most `threads` at a time. Returns the largest
/// exit code.
pub fn sweep(
    command: Command,
    pattern: &str,
    out: &Path,
    overrides: &Overrides,
    threads: Option<usize>,
) -> u8 {
    let paths: Vec<PathBuf> = match glob::glob(pattern) {
        Ok(paths) => paths.filter_map(Result::ok).collect(),
        Err(e) => {
            eprintln!("bad sweep pattern {pattern:?}: {e}");
            return failure::EXIT_VALIDATION;
        }
    };
    if paths.is_empty() {
        eprintln!("no configs match {pattern:?}");
        return failure::EXIT_IO;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("cannot start sweep workers: {e}");
            return failure::EXIT_IO;
        }
    };
    pool.install(|| {
        paths
            .par_iter()
            .map(|path| {
                let stem = path
                    .file_stem()
                    .map_or_else(|| "experiment".into(), |s| s.to_string_lossy().into_owned());
                let o = Overrides {
                    out: Some(out.join(stem)),
                    ..overrides.clone()
                };
                execute(command, path, &o)
            })
            .max()
            .unwrap_or(0)
    })
}
