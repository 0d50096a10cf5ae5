//! Command-line flags, the optional TOML config file and their merge into a [`RunConfig`].
//!
//! Precedence is flag, then file, then built-in default. `DADC_OUT`, when
//! set, overrides the output directory from every other source.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dadc_core::centers::{DecisionAxis, SelectionParams};
use dadc_core::pipeline::{Cutoff, DadcParams, DEFAULT_FUSION_THRESHOLD, DEFAULT_K};
use dadc_core::synth::{generate_ed, generate_vdd, presets};
use dadc_core::Dataset;
use serde::Deserialize;

use crate::run::CliError;

pub const DEFAULT_OUT: &str = "dadc-out";
pub const DEFAULT_SEEDS: usize = 10;
pub const DEFAULT_SWEEP_LEVELS: [f64; 4] = [0.01, 0.05, 0.10, 0.15];

#[derive(Debug, Parser)]
#[command(name = "dadc", version, about = "Domain-adaptive density clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Generate,
    Cluster,
    DecisionGraph,
    Evaluate,
    Sweep,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated dataset as CSV.
    Generate(RunArgs),
    /// Run the full pipeline and export labels and plots.
    Cluster(RunArgs),
    /// Export the decision graph only.
    DecisionGraph(RunArgs),
    /// Cluster a labeled dataset and report accuracy.
    Evaluate(RunArgs),
    /// Accuracy of DADC and the baseline across noise levels.
    Sweep(RunArgs),
}

impl Command {
    pub fn split(self) -> (Task, RunArgs) {
        match self {
            Command::Generate(a) => (Task::Generate, a),
            Command::Cluster(a) => (Task::Cluster, a),
            Command::DecisionGraph(a) => (Task::DecisionGraph, a),
            Command::Evaluate(a) => (Task::Evaluate, a),
            Command::Sweep(a) => (Task::Sweep, a),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset CSV (coordinates, optional trailing `label` column).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Precomputed n x n distance matrix CSV.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Generator preset: heartshapes, twin-rings, ed or g2, with optional `:key=value,...`.
    #[arg(long)]
    pub generate: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub fusion_threshold: Option<f64>,
    /// Baseline cutoff distance, or `auto`.
    #[arg(long)]
    pub dc: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of labels, graph-csv, graph-svg, plot, trace.
    #[arg(long, value_delimiter = ',')]
    pub emit: Option<Vec<String>>,
    /// Noise fraction(s), comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub noise_level: Option<Vec<f64>>,
    /// Number of noise seeds for the sweep.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Also run a baseline (only `cfsfdp` is available).
    #[arg(long)]
    pub baseline: Option<String>,
    /// Decision-graph abscissa: domain or adaptive.
    #[arg(long)]
    pub axis: Option<String>,
    /// Critical point abscissa as a fraction of the maximum density.
    #[arg(long)]
    pub density_fraction: Option<f64>,
    /// Critical point ordinate as a fraction of the maximum Delta.
    #[arg(long)]
    pub delta_fraction: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NumOrText {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    input: Option<PathBuf>,
    matrix: Option<PathBuf>,
    generate: Option<String>,
    k: Option<usize>,
    fusion_threshold: Option<f64>,
    dc: Option<NumOrText>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    emit: Option<OneOrMany<String>>,
    noise_level: Option<OneOrMany<f64>>,
    seeds: Option<usize>,
    baseline: Option<String>,
    axis: Option<String>,
    density_fraction: Option<f64>,
    delta_fraction: Option<f64>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Flags layered over the file contents.
    fn overlay(self, a: RunArgs) -> RunArgs {
        RunArgs {
            config: a.config,
            input: a.input.or(self.input),
            matrix: a.matrix.or(self.matrix),
            generate: a.generate.or(self.generate),
            k: a.k.or(self.k),
            fusion_threshold: a.fusion_threshold.or(self.fusion_threshold),
            dc: a.dc.or(self.dc.map(|d| match d {
                NumOrText::Num(v) => v.to_string(),
                NumOrText::Text(t) => t,
            })),
            seed: a.seed.or(self.seed),
            out: a.out.or(self.out),
            emit: a.emit.or(self.emit.map(OneOrMany::into_vec)),
            noise_level: a.noise_level.or(self.noise_level.map(OneOrMany::into_vec)),
            seeds: a.seeds.or(self.seeds),
            baseline: a.baseline.or(self.baseline),
            axis: a.axis.or(self.axis),
            density_fraction: a.density_fraction.or(self.density_fraction),
            delta_fraction: a.delta_fraction.or(self.delta_fraction),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Heartshapes,
    TwinRings,
    Ed,
    G2,
}

/// A generator preset with optional overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub preset: Preset,
    /// Points per region (ignored by the lattice preset).
    pub count: Option<usize>,
    /// Lattice spacing for the `ed` preset.
    pub spacing: Option<f64>,
}

impl GeneratorSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |m: String| CliError::Config(format!("generator spec {text:?}: {m}"));
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let preset = match name.trim() {
            "heartshapes" | "heart" => Preset::Heartshapes,
            "twin-rings" => Preset::TwinRings,
            "ed" => Preset::Ed,
            "g2" => Preset::G2,
            other => return Err(bad(format!("unknown preset {other:?}"))),
        };
        let mut spec = GeneratorSpec {
            preset,
            count: None,
            spacing: None,
        };
        for kv in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = kv.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {kv:?}")))?;
            match key.trim() {
                "count" => spec.count = Some(value.trim().parse().map_err(|_| bad(format!("bad count {value:?}")))?),
                "spacing" => {
                    spec.spacing = Some(value.trim().parse().map_err(|_| bad(format!("bad spacing {value:?}")))?)
                }
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        Ok(spec)
    }

    pub fn generate(&self, seed: u64) -> dadc_core::Result<Dataset<f64>> {
        match self.preset {
            Preset::Heartshapes => generate_vdd(
                &presets::heart_regions(self.count.unwrap_or(presets::HEART_POINTS_PER_REGION)),
                seed,
            ),
            Preset::TwinRings => generate_vdd(&presets::twin_rings_regions(self.count.unwrap_or(150)), seed),
            Preset::Ed => match self.spacing {
                Some(s) => {
                    let scale = s / presets::ED_SPACING;
                    let regions: Vec<_> = presets::ed_regions()
                        .into_iter()
                        .map(|r| dadc_core::RegionSpec {
                            extent: r.extent * scale,
                            ..r
                        })
                        .collect();
                    generate_ed(&regions, s, seed)
                }
                None => presets::ed_disk_ring(seed),
            },
            Preset::G2 => {
                let n = self.count.unwrap_or(presets::G2_POINTS_PER_REGION);
                let regions: Vec<_> = presets::g2_regions().into_iter().map(|r| dadc_core::RegionSpec { count: n, ..r }).collect();
                dadc_core::generate_mddm(&regions, seed)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Csv(PathBuf),
    Matrix(PathBuf),
    Generate(GeneratorSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Emit {
    pub labels: bool,
    pub graph_csv: bool,
    pub graph_svg: bool,
    pub plot: bool,
    pub trace: bool,
}

impl Emit {
    fn parse(items: &[String]) -> Result<Self, CliError> {
        let mut e = Emit::default();
        for item in items.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
            match item {
                "labels" => e.labels = true,
                "graph-csv" => e.graph_csv = true,
                "graph-svg" => e.graph_svg = true,
                "plot" => e.plot = true,
                "trace" => e.trace = true,
                other => return Err(CliError::Config(format!("unknown --emit item {other:?}"))),
            }
        }
        Ok(e)
    }

    fn default_for(task: Task) -> Self {
        match task {
            Task::Cluster => Emit {
                labels: true,
                ..Emit::default()
            },
            Task::DecisionGraph => Emit {
                graph_csv: true,
                ..Emit::default()
            },
            _ => Emit::default(),
        }
    }
}

/// Fully resolved settings for one subcommand invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub input: InputSource,
    pub dadc: DadcParams,
    pub cutoff: Cutoff,
    pub seed: u64,
    pub out: PathBuf,
    pub emit: Emit,
    pub noise_levels: Vec<f64>,
    pub seeds: usize,
    pub baseline: bool,
}

impl RunConfig {
    /// Merges flags, the config file they name and defaults, reading
    /// `DADC_OUT` from the environment.
    pub fn resolve(task: Task, args: RunArgs) -> Result<Self, CliError> {
        Self::resolve_with_env(task, args, std::env::var_os("DADC_OUT").map(PathBuf::from))
    }

    pub fn resolve_with_env(task: Task, args: RunArgs, env_out: Option<PathBuf>) -> Result<Self, CliError> {
        let args = match &args.config {
            Some(path) => FileConfig::load(path)?.overlay(args),
            None => FileConfig::default().overlay(args),
        };
        let cfg_err = |m: &str| CliError::Config(m.to_string());

        let sources = [args.input.is_some(), args.matrix.is_some(), args.generate.is_some()];
        let input = match sources.iter().filter(|&&s| s).count() {
            0 => return Err(cfg_err("one of --input, --matrix or --generate is required")),
            1 => {
                if let Some(p) = args.input {
                    InputSource::Csv(p)
                } else if let Some(p) = args.matrix {
                    InputSource::Matrix(p)
                } else {
                    InputSource::Generate(GeneratorSpec::parse(args.generate.as_deref().unwrap_or_default())?)
                }
            }
            _ => return Err(cfg_err("--input, --matrix and --generate are mutually exclusive")),
        };

        let axis = match args.axis.as_deref() {
            None | Some("domain") => DecisionAxis::Domain,
            Some("adaptive") => DecisionAxis::Adaptive,
            Some(other) => return Err(CliError::Config(format!("unknown axis {other:?}"))),
        };
        let defaults = SelectionParams::default();
        let dadc = DadcParams {
            k: args.k.unwrap_or(DEFAULT_K),
            fusion_threshold: args.fusion_threshold.unwrap_or(DEFAULT_FUSION_THRESHOLD),
            selection: SelectionParams {
                density_fraction: args.density_fraction.unwrap_or(defaults.density_fraction),
                delta_fraction: args.delta_fraction.unwrap_or(defaults.delta_fraction),
                axis,
            },
        };
        dadc.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let cutoff = match args.dc.as_deref().map(str::trim) {
            None | Some("auto") => Cutoff::Auto,
            Some(v) => match v.parse::<f64>() {
                Ok(c) if c > 0.0 && c.is_finite() => Cutoff::Fixed(c),
                _ => return Err(CliError::Config(format!("--dc must be a positive number or auto, got {v:?}"))),
            },
        };

        let baseline = match args.baseline.as_deref() {
            None => false,
            Some("cfsfdp") => true,
            Some(other) => return Err(CliError::Config(format!("unknown baseline {other:?}"))),
        };

        let emit = match &args.emit {
            Some(items) => Emit::parse(items)?,
            None => Emit::default_for(task),
        };

        let noise_levels = args.noise_level.unwrap_or_else(|| match task {
            Task::Sweep => DEFAULT_SWEEP_LEVELS.to_vec(),
            _ => vec![0.0],
        });
        if noise_levels.is_empty() {
            return Err(cfg_err("at least one noise level is required"));
        }
        if let Some(l) = noise_levels
            .iter()
            .find(|l| !(0.0..=dadc_core::evaluation::MAX_NOISE_FRACTION).contains(*l))
        {
            return Err(CliError::Config(format!("noise level {l} outside [0, 0.15]")));
        }
        let seeds = args.seeds.unwrap_or(DEFAULT_SEEDS);
        if seeds == 0 {
            return Err(cfg_err("--seeds must be at least 1"));
        }

        Ok(RunConfig {
            task,
            input,
            dadc,
            cutoff,
            seed: args.seed.unwrap_or(0),
            out: env_out.or(args.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            emit,
            noise_levels,
            seeds,
            baseline,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn gen_args() -> RunArgs {
        RunArgs {
            generate: Some("heartshapes".into()),
            ..RunArgs::default()
        }
    }

    #[test]
    fn defaults_apply() {
        let cfg = RunConfig::resolve_with_env(Task::Cluster, gen_args(), None).unwrap();
        assert_eq!(cfg.dadc, DadcParams::default());
        assert_eq!(cfg.cutoff, Cutoff::Auto);
        assert_eq!(cfg.out, PathBuf::from(DEFAULT_OUT));
        assert!(cfg.emit.labels && !cfg.emit.graph_csv);
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "k = 7\nfusion-threshold = 2.5\nout = \"from-file\"\nemit = [\"trace\"]").unwrap();
        let args = RunArgs {
            config: Some(f.path().to_path_buf()),
            k: Some(9),
            ..gen_args()
        };
        let cfg = RunConfig::resolve_with_env(Task::Cluster, args, None).unwrap();
        assert_eq!(cfg.dadc.k, 9);
        assert_eq!(cfg.dadc.fusion_threshold, 2.5);
        assert_eq!(cfg.out, PathBuf::from("from-file"));
        assert!(cfg.emit.trace && !cfg.emit.labels);
    }

    #[test]
    fn env_overrides_out() {
        let args = RunArgs {
            out: Some("flag".into()),
            ..gen_args()
        };
        let cfg = RunConfig::resolve_with_env(Task::Cluster, args, Some("env".into())).unwrap();
        assert_eq!(cfg.out, PathBuf::from("env"));
    }

    #[test]
    fn config_errors() {
        let both = RunArgs {
            input: Some("a.csv".into()),
            ..gen_args()
        };
        assert!(RunConfig::resolve_with_env(Task::Cluster, both, None).is_err());
        assert!(RunConfig::resolve_with_env(Task::Cluster, RunArgs::default(), None).is_err());
        let bad_k = RunArgs { k: Some(0), ..gen_args() };
        assert!(RunConfig::resolve_with_env(Task::Cluster, bad_k, None).is_err());
        let bad_dc = RunArgs {
            dc: Some("-1".into()),
            ..gen_args()
        };
        assert!(RunConfig::resolve_with_env(Task::Cluster, bad_dc, None).is_err());
        let bad_emit = RunArgs {
            emit: Some(vec!["png".into()]),
            ..gen_args()
        };
        assert!(RunConfig::resolve_with_env(Task::Cluster, bad_emit, None).is_err());
        let bad_noise = RunArgs {
            noise_level: Some(vec![0.3]),
            ..gen_args()
        };
        assert!(RunConfig::resolve_with_env(Task::Sweep, bad_noise, None).is_err());
    }

    #[test]
    fn generator_specs() {
        let s = GeneratorSpec::parse("g2:count=100").unwrap();
        assert_eq!(s.preset, Preset::G2);
        assert_eq!(s.generate(1).unwrap().len(), 200);
        assert_eq!(GeneratorSpec::parse("heartshapes").unwrap().generate(1).unwrap().len(), 213);
        assert!(GeneratorSpec::parse("moons").is_err());
        assert!(GeneratorSpec::parse("g2:size=3").is_err());
    }
}
