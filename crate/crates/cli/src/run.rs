//! Subcommand execution.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dadc_core::centers::{critical_point_of, partition_by, DecisionAxis, PointRole};
use dadc_core::evaluation::{accuracy_on, clustering_accuracy, write_sweep_csv, SweepParams};
use dadc_core::{
    compute_profile, inject_noise, load_csv, robustness_sweep, run_cfsfdp, run_dadc, write_csv, BaselineParams,
    Dataset, DistanceMatrix, DistanceSource, Error, NoiseSpec,
};
use thiserror::Error;

use crate::config::{InputSource, RunConfig, Task};
use crate::export;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    NoCenter(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::NoCenter(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParameter(_) | Error::Spec(_) => CliError::Config(msg),
            Error::NoCenter => CliError::NoCenter(msg),
            _ => CliError::Data(msg),
        }
    }
}

fn at(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match CliError::from(e) {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// What a subcommand printed and wrote.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub summary: String,
    pub written: Vec<PathBuf>,
}

enum Loaded {
    Points(Dataset<f64>),
    Matrix(DistanceMatrix<f64>),
}

impl Loaded {
    fn source(&self) -> DistanceSource<'_, f64> {
        match self {
            Loaded::Points(d) => DistanceSource::Metric(d),
            Loaded::Matrix(m) => DistanceSource::Matrix(m),
        }
    }

    fn dataset(&self) -> Option<&Dataset<f64>> {
        match self {
            Loaded::Points(d) => Some(d),
            Loaded::Matrix(_) => None,
        }
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load(cfg: &RunConfig) -> Result<Loaded, CliError> {
    match &cfg.input {
        InputSource::Csv(p) => Ok(Loaded::Points(load_csv(open(p)?).map_err(at(p))?)),
        InputSource::Matrix(p) => Ok(Loaded::Matrix(DistanceMatrix::load_csv(open(p)?).map_err(at(p))?)),
        InputSource::Generate(spec) => Ok(Loaded::Points(spec.generate(cfg.seed)?)),
    }
}

fn labeled_points(cfg: &RunConfig, loaded: Loaded) -> Result<Dataset<f64>, CliError> {
    match loaded {
        Loaded::Points(d) if d.has_labels() => Ok(d),
        Loaded::Points(_) => Err(CliError::Config(format!(
            "{:?} needs ground-truth labels (a trailing label column)",
            cfg.task
        ))),
        Loaded::Matrix(_) => Err(CliError::Config(format!("{:?} needs point coordinates, not a matrix", cfg.task))),
    }
}

struct Writer<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(dir: &'a Path) -> Self {
        Writer {
            dir,
            written: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
        let io_err = |p: &Path, e: std::io::Error| CliError::Data(format!("{}: {e}", p.display()));
        fs::create_dir_all(self.dir).map_err(|e| io_err(self.dir, e))?;
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write(name, |w| w.write_all(text.as_bytes()))
    }
}

fn axis_label(axis: DecisionAxis) -> &'static str {
    match axis {
        DecisionAxis::Domain => "domain density",
        DecisionAxis::Adaptive => "adaptive density",
    }
}

fn count_role(roles: &[PointRole], role: PointRole) -> usize {
    roles.iter().filter(|&&r| r == role).count()
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut w = Writer::new(&cfg.out);
    let summary = match cfg.task {
        Task::Generate => generate(cfg, &mut w)?,
        Task::Cluster => cluster(cfg, &mut w)?,
        Task::DecisionGraph => decision_graph(cfg, &mut w)?,
        Task::Evaluate => evaluate(cfg, &mut w)?,
        Task::Sweep => sweep(cfg, &mut w)?,
    };
    Ok(Outcome {
        summary,
        written: w.written,
    })
}

fn generate(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<String, CliError> {
    let InputSource::Generate(spec) = &cfg.input else {
        return Err(CliError::Config("generate needs --generate".into()));
    };
    let ds: Dataset<f64> = spec.generate(cfg.seed)?;
    let mut classes: Vec<i64> = ds.points().iter().filter_map(|p| p.truth).collect();
    classes.sort_unstable();
    classes.dedup();
    w.write("dataset.csv", |out| {
        write_csv(&ds, out).map_err(|e| std::io::Error::other(e.to_string()))
    })?;
    Ok(format!("n: {}\nclasses: {}\n", ds.len(), classes.len()))
}

fn cluster(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<String, CliError> {
    let loaded = load(cfg)?;
    let src = loaded.source();
    let res = run_dadc(&src, &cfg.dadc)?;
    let mut s = String::new();
    let _ = writeln!(s, "n: {}", src.len());
    let _ = writeln!(s, "centers: {}", res.n_centers());
    let _ = writeln!(s, "initial clusters: {}", res.initial.n_clusters());
    let _ = writeln!(s, "final clusters: {}", res.n_clusters());
    let _ = writeln!(s, "outliers: {}", res.initial.noise_count());
    if let Some(ds) = loaded.dataset().filter(|d| d.has_labels()) {
        let _ = writeln!(s, "ca: {:.4}", accuracy_on(res.labels(), ds)?.ca);
    }

    if cfg.emit.labels {
        w.write("labels.csv", |out| export::write_labels(res.labels(), out))?;
    }
    if cfg.emit.graph_csv {
        w.write("decision_graph.csv", |out| {
            export::write_decision_graph_csv(&res.profile, &res.roles, out)
        })?;
    }
    if cfg.emit.graph_svg {
        let x = cfg.dadc.selection.axis_values(&res.profile);
        let svg = export::decision_graph_svg(
            x,
            &res.profile.delta,
            &res.roles,
            &res.critical_point,
            axis_label(cfg.dadc.selection.axis),
        );
        w.text("decision_graph.svg", &svg)?;
    }
    if cfg.emit.plot {
        match loaded.dataset() {
            Some(ds) => w.text("clusters.svg", &export::cluster_plot_svg(ds, res.labels()))?,
            None => log::warn!("no coordinates to plot for a matrix input"),
        }
    }
    if cfg.emit.trace {
        w.write("fusion_trace.csv", |out| export::write_fusion_trace(&res.ensemble.trace, out))?;
    }

    if cfg.baseline {
        let base = run_cfsfdp(
            &src,
            &BaselineParams {
                cutoff: cfg.cutoff,
                selection: cfg.dadc.selection,
            },
        )?;
        let _ = writeln!(s, "baseline centers: {}", base.n_centers());
        let _ = writeln!(s, "baseline cutoff: {}", base.profile.cutoff);
        if let Some(ds) = loaded.dataset().filter(|d| d.has_labels()) {
            let _ = writeln!(s, "baseline ca: {:.4}", accuracy_on(base.labels(), ds)?.ca);
        }
        if cfg.emit.labels {
            w.write("baseline_labels.csv", |out| export::write_labels(base.labels(), out))?;
        }
    }
    Ok(s)
}

fn decision_graph(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<String, CliError> {
    let loaded = load(cfg)?;
    let src = loaded.source();
    let (_, profile) = compute_profile(&src, cfg.dadc.k)?;
    let x = cfg.dadc.selection.axis_values(&profile);
    let cp = critical_point_of(x, &profile.delta, &cfg.dadc.selection);
    let roles = partition_by(x, &profile.delta, &cp)?;
    if cfg.emit.graph_csv {
        w.write("decision_graph.csv", |out| export::write_decision_graph_csv(&profile, &roles, out))?;
    }
    if cfg.emit.graph_svg {
        let svg = export::decision_graph_svg(x, &profile.delta, &roles, &cp, axis_label(cfg.dadc.selection.axis));
        w.text("decision_graph.svg", &svg)?;
    }
    Ok(format!(
        "n: {}\ncritical point: ({}, {})\ncenters: {}\noutliers: {}\n",
        src.len(),
        cp.x,
        cp.y,
        count_role(&roles, PointRole::Center),
        count_role(&roles, PointRole::Outlier)
    ))
}

fn evaluate(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<String, CliError> {
    let ds = labeled_points(cfg, load(cfg)?)?;
    let level = cfg.noise_levels[0];
    let evaluated = ds.labeled_ids();
    let data = if level > 0.0 {
        inject_noise(&ds, &NoiseSpec::for_dataset(&ds, level, cfg.seed))?
    } else {
        ds
    };
    let truth = data.truth_labels();
    let src = DistanceSource::Metric(&data);
    let res = run_dadc(&src, &cfg.dadc)?;
    let mut rows = vec![(
        "dadc",
        clustering_accuracy(res.labels(), &truth, &evaluated)?.ca,
        res.n_clusters(),
    )];
    if cfg.baseline {
        let base = run_cfsfdp(
            &src,
            &BaselineParams {
                cutoff: cfg.cutoff,
                selection: cfg.dadc.selection,
            },
        )?;
        rows.push((
            "cfsfdp",
            clustering_accuracy(base.labels(), &truth, &evaluated)?.ca,
            base.n_centers(),
        ));
    }
    w.write("evaluation.csv", |out| {
        writeln!(out, "algorithm,level,seed,ca,clusters,n_evaluated")?;
        for (alg, ca, k) in &rows {
            writeln!(out, "{alg},{level},{},{ca:.6},{k},{}", cfg.seed, evaluated.len())?;
        }
        Ok(())
    })?;
    if cfg.emit.labels {
        w.write("labels.csv", |out| export::write_labels(res.labels(), out))?;
    }
    let mut s = format!(
        "n: {}\nnoise level: {level}\ncenters: {}\nfinal clusters: {}\n",
        data.len(),
        res.n_centers(),
        res.n_clusters()
    );
    for (alg, ca, _) in &rows {
        let _ = writeln!(s, "{alg} ca: {ca:.4}");
    }
    Ok(s)
}

fn sweep(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<String, CliError> {
    let ds = labeled_points(cfg, load(cfg)?)?;
    let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|i| cfg.seed + i).collect();
    let params = SweepParams {
        dadc: cfg.dadc,
        baseline: BaselineParams {
            cutoff: cfg.cutoff,
            selection: cfg.dadc.selection,
        },
    };
    let rows = robustness_sweep(&ds, &cfg.noise_levels, &seeds, &params)?;
    w.write("sweep.csv", |out| {
        write_sweep_csv(&rows, out).map_err(|e| std::io::Error::other(e.to_string()))
    })?;
    let mut s = String::from("level   algorithm  mean_ca  std_ca\n");
    for r in &rows {
        let _ = writeln!(
            s,
            "{:<7} {:<10} {:.4}   {:.4}",
            r.level,
            r.algorithm.as_str(),
            r.mean_ca,
            r.std_ca
        );
    }
    Ok(s)
}
