//! Clustering accuracy, seeded noise injection and the noise robustness sweep.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::centers::NOISE;
use crate::dataset::Dataset;
use crate::distance::DistanceSource;
use crate::error::{Error, Result};
use crate::pipeline::{run_cfsfdp, run_dadc, Algorithm, BaselineParams, DadcParams};
use crate::scalar::Scalar;

pub const MAX_NOISE_FRACTION: f64 = 0.15;

/// Size and majority class of one predicted cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterTally {
    pub cluster: i64,
    pub size: usize,
    /// `None` for the NOISE group, which earns no credit.
    pub majority_label: Option<i64>,
    pub majority_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub ca: f64,
    pub per_cluster: Vec<ClusterTally>,
    pub n_evaluated: usize,
}

/// Share of the evaluated points that carry their cluster's majority class.
///
/// Points labeled NOISE count in the denominator only. Majority ties go to the
/// smaller class label.
pub fn clustering_accuracy(labels: &[i64], truth: &[Option<i64>], evaluated: &[usize]) -> Result<EvaluationReport> {
    if evaluated.is_empty() {
        return Err(Error::param("no points to evaluate"));
    }
    if labels.len() != truth.len() {
        return Err(Error::param("labels and truth differ in length"));
    }
    let mut groups: BTreeMap<i64, BTreeMap<i64, usize>> = BTreeMap::new();
    for &i in evaluated {
        let t = truth
            .get(i)
            .copied()
            .flatten()
            .ok_or_else(|| Error::param(format!("point {i} has no ground-truth label")))?;
        *groups.entry(labels[i]).or_default().entry(t).or_insert(0) += 1;
    }
    let per_cluster: Vec<ClusterTally> = groups
        .into_iter()
        .map(|(cluster, counts)| {
            let size = counts.values().sum();
            if cluster == NOISE {
                return ClusterTally {
                    cluster,
                    size,
                    majority_label: None,
                    majority_count: 0,
                };
            }
            let (&label, &count) = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .expect("group is non-empty");
            ClusterTally {
                cluster,
                size,
                majority_label: Some(label),
                majority_count: count,
            }
        })
        .collect();
    let correct: usize = per_cluster.iter().map(|c| c.majority_count).sum();
    Ok(EvaluationReport {
        ca: correct as f64 / evaluated.len() as f64,
        per_cluster,
        n_evaluated: evaluated.len(),
    })
}

/// Accuracy over every labeled point of `dataset`.
pub fn accuracy_on<T: Scalar>(labels: &[i64], dataset: &Dataset<T>) -> Result<EvaluationReport> {
    clustering_accuracy(labels, &dataset.truth_labels(), &dataset.labeled_ids())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec<T> {
    pub fraction: f64,
    pub seed: u64,
    /// Per-dimension `(min, max)` sampling box.
    pub bounds: Vec<(T, T)>,
}

impl<T: Scalar> NoiseSpec<T> {
    /// Noise drawn inside the bounding box of `dataset`.
    pub fn for_dataset(dataset: &Dataset<T>, fraction: f64, seed: u64) -> Self {
        NoiseSpec {
            fraction,
            seed,
            bounds: dataset.bounds(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=MAX_NOISE_FRACTION).contains(&self.fraction) {
            return Err(Error::param(format!(
                "noise fraction {} outside [0, {MAX_NOISE_FRACTION}]",
                self.fraction
            )));
        }
        if self.bounds.iter().any(|&(lo, hi)| !(hi > lo) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::param("noise bounds have zero volume"));
        }
        Ok(())
    }
}

fn coord_key<T: Scalar>(c: &[T]) -> Vec<u64> {
    c.iter().map(|v| v.to_f64_lossy().to_bits()).collect()
}

/// Appends `ceil(fraction * n)` distinct unlabeled points drawn uniformly in the bounds.
pub fn inject_noise<T: Scalar>(dataset: &Dataset<T>, spec: &NoiseSpec<T>) -> Result<Dataset<T>> {
    spec.validate()?;
    if spec.bounds.len() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            expected: dataset.dim(),
            found: spec.bounds.len(),
        });
    }
    let count = (spec.fraction * dataset.len() as f64).ceil() as usize;
    let mut seen: HashSet<Vec<u64>> = dataset.points().iter().map(|p| coord_key(&p.coords)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut extra = Vec::with_capacity(count);
    while extra.len() < count {
        let c: Vec<T> = spec
            .bounds
            .iter()
            .map(|&(lo, hi)| {
                let (lo, hi) = (lo.to_f64_lossy(), hi.to_f64_lossy());
                T::lit(rng.random_range(lo..hi))
            })
            .collect();
        if seen.insert(coord_key(&c)) {
            extra.push((c, None));
        }
    }
    let mut out = dataset.clone();
    out.extend(extra)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub level: f64,
    pub algorithm: Algorithm,
    pub mean_ca: f64,
    pub std_ca: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepParams {
    pub dadc: DadcParams,
    pub baseline: BaselineParams,
}

/// Accuracy of both algorithms on the original labeled points, averaged over
/// noise seeds, for every noise level.
pub fn robustness_sweep<T: Scalar>(
    dataset: &Dataset<T>,
    levels: &[f64],
    seeds: &[u64],
    params: &SweepParams,
) -> Result<Vec<SweepRow>> {
    if seeds.is_empty() {
        return Err(Error::param("sweep needs at least one seed"));
    }
    let evaluated = dataset.labeled_ids();
    if evaluated.is_empty() {
        return Err(Error::param("sweep needs a labeled dataset"));
    }
    let cells: Vec<(usize, u64)> = (0..levels.len())
        .flat_map(|l| seeds.iter().map(move |&s| (l, s)))
        .collect();
    let scores: Vec<(usize, f64, f64)> = cells
        .par_iter()
        .map(|&(l, seed)| {
            let noisy = inject_noise(dataset, &NoiseSpec::for_dataset(dataset, levels[l], seed))?;
            let truth = noisy.truth_labels();
            let src = DistanceSource::Metric(&noisy);
            let dadc = run_dadc(&src, &params.dadc)?;
            let base = run_cfsfdp(&src, &params.baseline)?;
            let ca_d = clustering_accuracy(dadc.labels(), &truth, &evaluated)?.ca;
            let ca_b = clustering_accuracy(base.labels(), &truth, &evaluated)?.ca;
            Ok((l, ca_d, ca_b))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(levels.len() * 2);
    for (l, &level) in levels.iter().enumerate() {
        for alg in [Algorithm::Dadc, Algorithm::Cfsfdp] {
            let cas: Vec<f64> = scores
                .iter()
                .filter(|s| s.0 == l)
                .map(|s| if alg == Algorithm::Dadc { s.1 } else { s.2 })
                .collect();
            let (mean_ca, std_ca) = mean_std(&cas);
            rows.push(SweepRow {
                level,
                algorithm: alg,
                mean_ca,
                std_ca,
                seeds: cas.len(),
            });
        }
    }
    Ok(rows)
}

/// Mean and sample standard deviation (zero for a single value).
fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "level,algorithm,mean_ca,std_ca,seeds")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{}",
            r.level,
            r.algorithm.as_str(),
            r.mean_ca,
            r.std_ca,
            r.seeds
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(v: &[i64]) -> Vec<Option<i64>> {
        v.iter().map(|&t| Some(t)).collect()
    }

    #[test]
    fn perfect_up_to_renaming() {
        let t = truth(&[0, 0, 1, 1, 2]);
        let r = clustering_accuracy(&[5, 5, 3, 3, 9], &t, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(r.ca, 1.0);
        assert_eq!(r.per_cluster.len(), 3);
    }

    #[test]
    fn single_cluster_majority() {
        let mut v = vec![0; 9];
        v.push(1);
        let all: Vec<usize> = (0..10).collect();
        let r = clustering_accuracy(&[0; 10], &truth(&v), &all).unwrap();
        assert!((r.ca - 0.9).abs() < 1e-12);
        assert_eq!(r.per_cluster[0].majority_label, Some(0));
    }

    #[test]
    fn noise_counts_against_accuracy() {
        let r = clustering_accuracy(&[0, 0, NOISE, NOISE], &truth(&[0, 0, 0, 0]), &[0, 1, 2, 3]).unwrap();
        assert_eq!(r.ca, 0.5);
        assert_eq!(r.per_cluster[0].majority_count, 0);
    }

    #[test]
    fn only_the_evaluated_subset_is_scored() {
        let t = vec![Some(0), Some(1), None];
        let r = clustering_accuracy(&[0, 1, 0], &t, &[0, 1]).unwrap();
        assert_eq!(r.ca, 1.0);
        assert!(clustering_accuracy(&[0, 1, 0], &t, &[0, 2]).is_err());
        assert!(clustering_accuracy(&[0, 1, 0], &t, &[]).is_err());
    }

    fn grid() -> Dataset<f64> {
        let rows = (0..10).flat_map(|i| (0..10).map(move |j| vec![i as f64, j as f64])).collect();
        Dataset::from_rows(rows, Some(vec![Some(0); 100])).unwrap()
    }

    #[test]
    fn zero_fraction_is_a_no_op() {
        let ds = grid();
        assert_eq!(inject_noise(&ds, &NoiseSpec::for_dataset(&ds, 0.0, 1)).unwrap(), ds);
    }

    #[test]
    fn five_percent_of_hundred() {
        let ds = grid();
        let noisy = inject_noise(&ds, &NoiseSpec::for_dataset(&ds, 0.05, 1)).unwrap();
        assert_eq!(noisy.len(), 105);
        assert_eq!(noisy.points().iter().filter(|p| p.truth.is_none()).count(), 5);
        let restored = noisy.retain(|p| p.truth.is_some()).unwrap();
        assert_eq!(restored, ds);
    }

    #[test]
    fn noise_specs_are_validated() {
        let ds = grid();
        assert!(inject_noise(&ds, &NoiseSpec::for_dataset(&ds, 0.2, 1)).is_err());
        let flat = Dataset::from_rows(vec![vec![0.0, 1.0], vec![1.0, 1.0]], None).unwrap();
        assert!(inject_noise(&flat, &NoiseSpec::for_dataset(&flat, 0.1, 1)).is_err());
    }

    #[test]
    fn sweep_csv_header() {
        let mut buf = Vec::new();
        let row = SweepRow {
            level: 0.05,
            algorithm: Algorithm::Dadc,
            mean_ca: 0.5,
            std_ca: 0.0,
            seeds: 3,
        };
        write_sweep_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "level,algorithm,mean_ca,std_ca,seeds\n0.05,dadc,0.500000,0.000000,3\n");
    }
}
