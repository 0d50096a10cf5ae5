//! KNN density statistics, domain density, Delta distances and the
//! domain-adaptive density, plus the cutoff-count baseline profile.
//!
//! "Higher density" is always the lexicographic order on `(density, id)`
//! where, at equal density, the smaller id ranks higher. All Delta
//! distances are computed from a frozen snapshot of the densities before
//! any product is formed.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::distance::DistanceSource;
use crate::error::{Error, Result};
use crate::neighbors::NeighborIndex;
use crate::scalar::{cmp_scalar, Scalar};

/// Points whose formulas hit the zero-distance floor.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DegeneracyReport {
    /// Points whose neighbor distances were all zero (KNN-distance floored).
    pub clamped_kdist: Vec<usize>,
    /// Number of zero neighbor distances floored inside the domain-density weights.
    pub clamped_weights: usize,
}

impl DegeneracyReport {
    pub fn is_clean(&self) -> bool {
        self.clamped_kdist.is_empty() && self.clamped_weights == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnStats<T> {
    pub kdist: Vec<T>,
    pub kden: Vec<T>,
    pub report: DegeneracyReport,
}

/// Per-point density quantities of one clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile<T> {
    pub kdist: Vec<T>,
    pub kden: Vec<T>,
    /// Domain density before multiplication by Delta.
    pub domain_density: Vec<T>,
    pub delta: Vec<T>,
    /// Domain density times Delta distance.
    pub adaptive_density: Vec<T>,
    /// Point realizing each Delta (`None` for the densest point).
    pub delta_witness: Vec<Option<usize>>,
    pub report: DegeneracyReport,
}

impl<T: Scalar> DensityProfile<T> {
    pub fn len(&self) -> usize {
        self.kden.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kden.is_empty()
    }
}

/// Cutoff-count local density with its Delta distances.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineProfile<T> {
    pub rho: Vec<usize>,
    pub delta: Vec<T>,
    pub delta_witness: Vec<Option<usize>>,
    pub cutoff: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDistances<T> {
    pub delta: Vec<T>,
    pub witness: Vec<Option<usize>>,
}

/// Mean neighbor distance and its reciprocal for every point.
pub fn knn_stats<T: Scalar>(index: &NeighborIndex<T>) -> KnnStats<T> {
    let k = T::from_count(index.k());
    let eps = T::clamp_eps();
    let mut report = DegeneracyReport::default();
    let mut kdist = Vec::with_capacity(index.len());
    for (i, list) in index.iter().enumerate() {
        let mean = list.iter().map(|n| n.dist).sum::<T>() / k;
        if mean <= eps {
            report.clamped_kdist.push(i);
            kdist.push(eps);
        } else {
            kdist.push(mean);
        }
    }
    let kden = kdist.iter().map(|&d| T::one() / d).collect();
    KnnStats {
        kdist,
        kden,
        report,
    }
}

/// Own KNN-density plus the inverse-distance weighted KNN-densities of the neighbors.
pub fn domain_density<T: Scalar>(index: &NeighborIndex<T>, kden: &[T]) -> Vec<T> {
    domain_density_counted(index, kden).0
}

fn domain_density_counted<T: Scalar>(index: &NeighborIndex<T>, kden: &[T]) -> (Vec<T>, usize) {
    let eps = T::clamp_eps();
    let mut clamped = 0;
    let dens = index
        .iter()
        .enumerate()
        .map(|(i, list)| {
            list.iter().fold(kden[i], |acc, n| {
                let d = if n.dist <= eps {
                    clamped += 1;
                    eps
                } else {
                    n.dist
                };
                acc + kden[n.id] / d
            })
        })
        .collect();
    (dens, clamped)
}

/// Point ids sorted from highest to lowest density, ties by ascending id.
pub fn density_order<D: PartialOrd + Copy>(densities: &[D]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..densities.len()).collect();
    order.sort_by(|&a, &b| {
        densities[b]
            .partial_cmp(&densities[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Rank of each point in [`density_order`] (0 = densest).
pub fn density_rank<D: PartialOrd + Copy>(densities: &[D]) -> Vec<usize> {
    let order = density_order(densities);
    let mut rank = vec![0; densities.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Distance to the nearest higher-density point; the densest point takes its
/// largest distance to any point.
pub fn delta_distances<T: Scalar, D: PartialOrd + Copy + Sync>(
    densities: &[D],
    source: &DistanceSource<'_, T>,
) -> Result<DeltaDistances<T>> {
    let n = densities.len();
    if n != source.len() {
        return Err(Error::param("density vector length differs from source size"));
    }
    if n < 2 {
        return Err(Error::param("Delta distance needs at least two points"));
    }
    let order = density_order(densities);
    let per_rank: Vec<(T, Option<usize>)> = (0..n)
        .into_par_iter()
        .map(|r| {
            let i = order[r];
            if r == 0 {
                let far = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (source.dist(i, j), j))
                    .max_by(|a, b| cmp_scalar(a.0, b.0).then(b.1.cmp(&a.1)))
                    .expect("n >= 2");
                (far.0, None)
            } else {
                let (d, j) = order[..r]
                    .iter()
                    .map(|&j| (source.dist(i, j), j))
                    .min_by(|a, b| cmp_scalar(a.0, b.0).then(a.1.cmp(&b.1)))
                    .expect("r >= 1");
                (d, Some(j))
            }
        })
        .collect();
    let mut delta = vec![T::zero(); n];
    let mut witness = vec![None; n];
    for (r, (d, w)) in per_rank.into_iter().enumerate() {
        delta[order[r]] = d;
        witness[order[r]] = w;
    }
    Ok(DeltaDistances { delta, witness })
}

pub fn adaptive_densities<T: Scalar>(domain_density: &[T], delta: &[T]) -> Vec<T> {
    domain_density
        .iter()
        .zip(delta)
        .map(|(&p, &d)| p * d)
        .collect()
}

/// Full density profile from a prebuilt index.
pub fn profile_from_index<T: Scalar>(
    index: &NeighborIndex<T>,
    source: &DistanceSource<'_, T>,
) -> Result<DensityProfile<T>> {
    let KnnStats {
        kdist,
        kden,
        mut report,
    } = knn_stats(index);
    let (domain, clamped) = domain_density_counted(index, &kden);
    report.clamped_weights = clamped;
    let DeltaDistances { delta, witness } = delta_distances(&domain, source)?;
    let adaptive = adaptive_densities(&domain, &delta);
    if !report.is_clean() {
        log::warn!(
            "{} points with all-zero neighbor distances, {} zero weights floored",
            report.clamped_kdist.len(),
            report.clamped_weights
        );
    }
    Ok(DensityProfile {
        kdist,
        kden,
        domain_density: domain,
        delta,
        adaptive_density: adaptive,
        delta_witness: witness,
        report,
    })
}

/// Builds the neighbor index and the density profile in one step.
pub fn compute_profile<T: Scalar>(
    source: &DistanceSource<'_, T>,
    k: usize,
) -> Result<(NeighborIndex<T>, DensityProfile<T>)> {
    let index = NeighborIndex::build(source, k)?;
    let profile = profile_from_index(&index, source)?;
    Ok((index, profile))
}

/// Count of other points strictly closer than `cutoff`, with Delta on those counts.
pub fn cfsfdp_profile<T: Scalar>(
    source: &DistanceSource<'_, T>,
    cutoff: T,
) -> Result<BaselineProfile<T>> {
    if !(cutoff > T::zero()) {
        return Err(Error::param("cutoff distance must be positive"));
    }
    let n = source.len();
    let rho: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && source.dist(i, j) < cutoff)
                .count()
        })
        .collect();
    let DeltaDistances { delta, witness } = delta_distances(&rho, source)?;
    Ok(BaselineProfile {
        rho,
        delta,
        delta_witness: witness,
        cutoff,
    })
}

/// Cutoff at which the average number of neighbors within it is `fraction` of n.
///
/// Picks the pair distance at the matching rank of the sorted pair list; falls
/// back to the smallest positive pair distance when that rank lands on zero.
pub fn auto_cutoff<T: Scalar>(source: &DistanceSource<'_, T>, fraction: f64) -> Result<T> {
    let n = source.len();
    if n < 2 {
        return Err(Error::param("cutoff selection needs at least two points"));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::param("neighbor fraction must lie in (0, 1)"));
    }
    let mut pairs: Vec<T> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| ((i + 1)..n).map(move |j| source.dist(i, j)))
        .collect();
    pairs.par_sort_unstable_by(|a, b| cmp_scalar(*a, *b));
    // mean count = 2 * (#pairs below cutoff) / n
    let target = (fraction * (n * n) as f64 / 2.0).ceil() as usize;
    let rank = target.clamp(1, pairs.len()) - 1;
    let mut cutoff = pairs[(rank + 1).min(pairs.len() - 1)];
    if cutoff <= T::zero() {
        cutoff = pairs
            .iter()
            .copied()
            .find(|&d| d > T::zero())
            .ok_or_else(|| Error::param("all points coincide"))?;
    }
    Ok(cutoff)
}
