//! Experiment configuration: one JSON file per experiment.
//!
//! Every field except `potential` (and a dataset for `run`/`check`) has a
//! default; the fully materialized config is written back as
//! `effective_config.json` next to the results.

use std::fs;
use std::path::{Path, PathBuf};

use mirror_margin::data::generate_blobs;
use mirror_margin::flow::StepRule;
use mirror_margin::horizon::{
    DirectionGrid, ProbeOptions, DEFAULT_DEGENERACY_THRESHOLD, DEFAULT_GAP_TOLERANCE,
};
use mirror_margin::{
    BlobSpec, Dataset, FlowConfig, Loss, Matrix, ScalarPotential, VectorPotential,
};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub dataset: Option<DatasetSpec>,
    pub potential: PotentialSpec,
    #[serde(default = "default_loss")]
    pub loss: String,
    #[serde(default)]
    pub flow: FlowSpec,
    #[serde(default)]
    pub gauge: GaugeSpec,
    #[serde(default)]
    pub horizon: HorizonSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// CSV with header `x1,...,xd,y`, relative to the config file.
    File(PathBuf),
    Generator(GeneratorSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n_pos: usize,
    pub n_neg: usize,
    pub center_pos: Vec<f64>,
    pub center_neg: Vec<f64>,
    pub spread: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Quadratic,
    PowerP {
        p: f64,
    },
    CoshEntropy,
    HyperbolicEntropy,
    /// A different scalar potential per coordinate, e.g. `x² + y⁴`.
    Coordinatewise {
        coordinates: Vec<PotentialSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    #[serde(default = "default_step")]
    pub step_size: f64,
    /// `γₖ = γ / (1 + ‖Zᵀq‖)` instead of a fixed step.
    #[serde(default)]
    pub adaptive: bool,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "yes")]
    pub rescaled: bool,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub stop_norm: Option<f64>,
    #[serde(default)]
    pub beta0: Option<Vec<f64>>,
    #[serde(default)]
    pub allow_non_separable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GaugeSpec {
    /// Closed-form horizon for the shipped potentials, numeric probe otherwise.
    #[default]
    Auto,
    /// Always from the normalized sublevel sets.
    Numeric,
    L1,
    L2,
    Linf,
    Lp(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonSpec {
    /// Dimension of the probe when no dataset fixes it.
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_gap_tolerance")]
    pub gap_tolerance: f64,
    #[serde(default = "default_degeneracy")]
    pub degeneracy_threshold: f64,
    /// Seed of the random direction grid in d ≥ 4.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub plots: bool,
}

fn default_loss() -> String {
    "exponential".into()
}
fn default_step() -> f64 {
    1e-2
}
fn default_max_steps() -> usize {
    100_000
}
fn default_record_every() -> usize {
    100
}
fn yes() -> bool {
    true
}
fn default_dim() -> usize {
    2
}
fn default_levels() -> Vec<f64> {
    vec![1e2, 1e4, 1e6, 1e8]
}
fn default_directions() -> usize {
    720
}
fn default_gap_tolerance() -> f64 {
    DEFAULT_GAP_TOLERANCE
}
fn default_degeneracy() -> f64 {
    DEFAULT_DEGENERACY_THRESHOLD
}

impl Default for FlowSpec {
    fn default() -> Self {
        FlowSpec {
            step_size: default_step(),
            adaptive: false,
            max_steps: default_max_steps(),
            rescaled: true,
            record_every: default_record_every(),
            stop_norm: None,
            beta0: None,
            allow_non_separable: false,
        }
    }
}

impl Default for HorizonSpec {
    fn default() -> Self {
        HorizonSpec {
            dim: default_dim(),
            levels: default_levels(),
            directions: default_directions(),
            gap_tolerance: default_gap_tolerance(),
            degeneracy_threshold: default_degeneracy(),
            seed: 0,
        }
    }
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            plots: true,
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub no_plots: bool,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    /// Reads and parses `path`; relative dataset paths are resolved against
    /// the config's directory.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::io("config", path, &e))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::validation("config", format!("{}: {e}", path.display())))?;
        if cfg.name.is_none() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        if let Some(DatasetSpec::File(file)) = &mut cfg.dataset {
            if file.is_relative() {
                if let Some(parent) = path.parent() {
                    *file = parent.join(&*file);
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.output.dir = Some(out.clone());
        }
        if o.no_plots {
            self.output.plots = false;
        }
        if let Some(seed) = o.seed {
            if let Some(DatasetSpec::Generator(g)) = &mut self.dataset {
                g.seed = seed;
            }
            self.horizon.seed = seed;
        }
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("experiment")
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .unwrap_or_else(|| Path::new("out").join(self.name()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn dataset(&self) -> Result<Dataset, Failure> {
        let stage = "dataset";
        match &self.dataset {
            None => Err(Failure::validation(stage, "config has no dataset")),
            Some(DatasetSpec::Generator(g)) => {
                let spec = BlobSpec::new(
                    g.n_pos,
                    g.n_neg,
                    g.center_pos.clone(),
                    g.center_neg.clone(),
                    g.spread,
                    g.seed,
                );
                generate_blobs(&spec).map_err(|e| Failure::core(stage, e))
            }
            Some(DatasetSpec::File(path)) => read_dataset(path),
        }
    }

    pub fn loss(&self) -> Result<Loss, Failure> {
        Loss::from_name(&self.loss).map_err(|e| Failure::core("loss", e))
    }

    pub fn potential(&self, dim: usize) -> Result<VectorPotential, Failure> {
        self.potential
            .build(dim)
            .map_err(|e| Failure::core("potential", e))
    }

    pub fn flow_config(&self) -> Result<FlowConfig, Failure> {
        let f = &self.flow;
        let cfg = FlowConfig {
            step: if f.adaptive {
                StepRule::Adaptive(f.step_size)
            } else {
                StepRule::Fixed(f.step_size)
            },
            max_steps: f.max_steps,
            rescaled: f.rescaled,
            record_every: f.record_every,
            stop_norm: f.stop_norm,
            beta0: f.beta0.clone(),
            allow_non_separable: f.allow_non_separable,
        };
        cfg.validate().map_err(|e| Failure::core("flow", e))?;
        Ok(cfg)
    }

    pub fn probe_options(&self) -> ProbeOptions<f64> {
        ProbeOptions {
            gap_tolerance: self.horizon.gap_tolerance,
            degeneracy_threshold: self.horizon.degeneracy_threshold,
        }
    }

    pub fn direction_grid(&self, dim: usize) -> Result<DirectionGrid<f64>, Failure> {
        let n = self.horizon.directions;
        if n < 8 {
            return Err(Failure::validation(
                "horizon",
                format!("need at least 8 probe directions, got {n}"),
            ));
        }
        Ok(match dim {
            0 | 1 => {
                return Err(Failure::validation(
                    "horizon",
                    format!("probes need d ≥ 2, got {dim}"),
                ))
            }
            2 => DirectionGrid::circle(n),
            3 => DirectionGrid::fibonacci_sphere(n),
            d => DirectionGrid::random_sphere(d, n, self.horizon.seed),
        })
    }
}

impl PotentialSpec {
    pub fn scalar(&self) -> mirror_margin::Result<ScalarPotential> {
        match self {
            PotentialSpec::Quadratic => Ok(ScalarPotential::quadratic()),
            PotentialSpec::PowerP { p } => ScalarPotential::power(*p),
            PotentialSpec::CoshEntropy => Ok(ScalarPotential::cosh_entropy()),
            PotentialSpec::HyperbolicEntropy => Ok(ScalarPotential::hyperbolic_entropy()),
            PotentialSpec::Coordinatewise { .. } => Err(mirror_margin::Error::Contract(
                "coordinatewise potentials cannot be nested".into(),
            )),
        }
    }

    pub fn build(&self, dim: usize) -> mirror_margin::Result<VectorPotential> {
        match self {
            PotentialSpec::Coordinatewise { coordinates } => {
                if coordinates.len() != dim {
                    return Err(mirror_margin::Error::DimensionMismatch {
                        expected: dim,
                        got: coordinates.len(),
                    });
                }
                VectorPotential::coordinatewise(
                    coordinates
                        .iter()
                        .map(PotentialSpec::scalar)
                        .collect::<Result<_, _>>()?,
                )
            }
            single => VectorPotential::separable(single.scalar()?, dim),
        }
    }
}

/// Reads a `x1,...,xd,y` CSV; labels must be ±1.
pub fn read_dataset(path: &Path) -> Result<Dataset, Failure> {
    let stage = "dataset";
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(io) => Failure::io(stage, path, io),
        _ => Failure::validation(stage, format!("{}: {e}", path.display())),
    })?;
    let header = reader
        .headers()
        .map_err(|e| Failure::validation(stage, e.to_string()))?
        .clone();
    let d = header.len().saturating_sub(1);
    let expected: Vec<String> = (1..=d)
        .map(|k| format!("x{k}"))
        .chain(["y".to_string()])
        .collect();
    if d == 0
        || header
            .iter()
            .map(str::trim)
            .ne(expected.iter().map(String::as_str))
    {
        return Err(Failure::validation(
            stage,
            format!("{}: header must be {}", path.display(), expected.join(",")),
        ));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (line, record) in reader.deserialize::<Vec<f64>>().enumerate() {
        let record =
            record.map_err(|e| Failure::validation(stage, format!("{}: {e}", path.display())))?;
        let y = record[d];
        if y != 1.0 && y != -1.0 {
            return Err(Failure::validation(
                stage,
                format!(
                    "{}: row {} has label {y}, expected ±1",
                    path.display(),
                    line + 1
                ),
            ));
        }
        rows.push(record[..d].to_vec());
        labels.push(y);
    }
    let x = Matrix::from_rows(&rows).map_err(|e| Failure::core(stage, e))?;
    Dataset::new(x, labels).map_err(|e| Failure::core(stage, e))
}
