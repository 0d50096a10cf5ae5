//! Inter-cluster relationship measures and the fusion-degree merge loop.
//!
//! For a pair of clusters the fusion degree combines three indicators:
//! density similarity of the two mean KNN-densities, the crossover degree
//! summed over boundary points whose neighbors straddle both clusters, and
//! the ratio of density stabilities before and after a hypothetical merge.

use std::collections::BTreeMap;

use crate::centers::{InitialClustering, NOISE};
use crate::density::DensityProfile;
use crate::error::{Error, Result};
use crate::neighbors::NeighborIndex;
use crate::scalar::{cmp_scalar, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats<T> {
    pub members: Vec<usize>,
    pub mean_kden: T,
    pub cds: T,
}

impl<T: Scalar> ClusterStats<T> {
    pub fn new(members: Vec<usize>, kden: &[T]) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::param("cluster has no members"));
        }
        let mean_kden = mean_over(&members, kden);
        let cds = density_stability(&members, kden)?;
        Ok(ClusterStats {
            members,
            mean_kden,
            cds,
        })
    }
}

fn mean_over<T: Scalar>(members: &[usize], kden: &[T]) -> T {
    members.iter().map(|&i| kden[i]).sum::<T>() / T::from_count(members.len())
}

/// `2 sqrt(u v) / (u + v)`; the shared form of the similarity and crossover measures.
#[inline]
fn balance<T: Scalar>(u: T, v: T) -> T {
    let two = T::lit(2.0);
    two * (u * v).sqrt() / (u + v)
}

/// Similarity of two clusters' mean KNN-densities, in (0, 1].
pub fn density_similarity<T: Scalar>(a: &ClusterStats<T>, b: &ClusterStats<T>) -> T {
    density_similarity_of_means(a.mean_kden, b.mean_kden)
}

pub fn density_similarity_of_means<T: Scalar>(u: T, v: T) -> T {
    if u == v {
        return T::one();
    }
    balance(u, v)
}

/// Crossover degree of a boundary point with `own` neighbors in its cluster
/// and `other` in the opposite one; `None` unless both counts are positive.
pub fn crossover_degree<T: Scalar>(own: usize, other: usize) -> Option<T> {
    if own == 0 || other == 0 {
        return None;
    }
    if own == other {
        return Some(T::one());
    }
    Some(balance(T::from_count(own), T::from_count(other)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingPoint<T> {
    pub id: usize,
    pub degree: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingAnalysis<T> {
    /// Points of `a` whose neighbors reach into `b`.
    pub a_to_b: Vec<CrossingPoint<T>>,
    /// Points of `b` whose neighbors reach into `a`.
    pub b_to_a: Vec<CrossingPoint<T>>,
    pub ccd: T,
}

fn crossings_one_way<T: Scalar>(
    from: i64,
    to: i64,
    index: &NeighborIndex<T>,
    labels: &[i64],
) -> Vec<CrossingPoint<T>> {
    labels
        .iter()
        .enumerate()
        .filter(|&(_, &l)| l == from)
        .filter_map(|(i, _)| {
            let (own, other) = index.neighbors(i).iter().fold((0, 0), |(o, t), n| {
                match labels[n.id] {
                    l if l == from => (o + 1, t),
                    l if l == to => (o, t + 1),
                    _ => (o, t),
                }
            });
            crossover_degree(own, other).map(|degree| CrossingPoint { id: i, degree })
        })
        .collect()
}

/// Crossing points in both directions between clusters `a` and `b`.
///
/// Neighbors that are noise or belong to a third cluster count for neither side.
pub fn crossing_analysis<T: Scalar>(
    a: i64,
    b: i64,
    index: &NeighborIndex<T>,
    labels: &[i64],
) -> Result<CrossingAnalysis<T>> {
    if a == b {
        return Err(Error::param("crossing analysis needs two distinct clusters"));
    }
    let a_to_b = crossings_one_way(a, b, index, labels);
    let b_to_a = crossings_one_way(b, a, index, labels);
    let ccd = a_to_b.iter().chain(&b_to_a).map(|c| c.degree).sum();
    Ok(CrossingAnalysis { a_to_b, b_to_a, ccd })
}

/// Log of the root deviation sum of member KNN-densities (sum floored at 1e-12).
pub fn density_stability<T: Scalar>(members: &[usize], kden: &[T]) -> Result<T> {
    if members.is_empty() {
        return Err(Error::param("cluster has no members"));
    }
    let mean = mean_over(members, kden);
    let dev: T = members.iter().map(|&i| (kden[i] - mean) * (kden[i] - mean)).sum();
    Ok(dev.max(T::clamp_eps()).sqrt().ln())
}

/// `(d_ab / d_a) (d_ab / d_b)` after shifting the three stabilities so the smallest is 1.
pub fn stability_ratio_of<T: Scalar>(d_a: T, d_b: T, d_ab: T) -> T {
    let min = d_a.min(d_b).min(d_ab);
    let shift = if min < T::one() { T::one() - min } else { T::zero() };
    let (da, db, dab) = (d_a + shift, d_b + shift, d_ab + shift);
    (dab / da) * (dab / db)
}

pub fn stability_ratio<T: Scalar>(a: &[usize], b: &[usize], kden: &[T]) -> Result<T> {
    let union: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(stability_ratio_of(
        density_stability(a, kden)?,
        density_stability(b, kden)?,
        density_stability(&union, kden)?,
    ))
}

/// Area of the triangle spanned by three indicator values on axes 120° apart.
pub fn fusion_degree<T: Scalar>(ids: T, ccd: T, cds_ratio: T) -> T {
    T::lit(3f64.sqrt() / 4.0) * (ids * ccd + ccd * cds_ratio + cds_ratio * ids)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionCandidate<T> {
    pub a: usize,
    pub b: usize,
    pub ids: T,
    pub ccd: T,
    pub cds_ratio: T,
    pub cfd: T,
}

/// One evaluated pair in one merge round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow<T> {
    pub round: usize,
    pub candidate: FusionCandidate<T>,
    pub merged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutcome<T> {
    pub clustering: InitialClustering,
    pub merges: usize,
    pub trace: Vec<TraceRow<T>>,
}

/// Crossover degree sums for every adjacent cluster pair, keyed `(min, max)`.
fn pair_crossover<T: Scalar>(index: &NeighborIndex<T>, labels: &[i64]) -> BTreeMap<(usize, usize), T> {
    let mut ccd: BTreeMap<(usize, usize), T> = BTreeMap::new();
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for (i, &own_label) in labels.iter().enumerate() {
        if own_label < 0 {
            continue;
        }
        counts.clear();
        for n in index.neighbors(i) {
            let l = labels[n.id];
            if l >= 0 {
                *counts.entry(l).or_insert(0) += 1;
            }
        }
        let own = counts.get(&own_label).copied().unwrap_or(0);
        for (&other, &cnt) in counts.iter().filter(|(&l, _)| l != own_label) {
            if let Some(deg) = crossover_degree::<T>(own, cnt) {
                let (a, b) = (own_label.min(other) as usize, own_label.max(other) as usize);
                let e = ccd.entry((a, b)).or_insert(T::zero());
                *e = *e + deg;
            }
        }
    }
    ccd
}

/// Fusion candidates for every cluster pair that shares at least one crossing point.
pub fn fusion_candidates<T: Scalar>(
    clustering: &InitialClustering,
    kden: &[T],
    index: &NeighborIndex<T>,
) -> Result<Vec<FusionCandidate<T>>> {
    let members = clustering.members();
    let stats = members
        .iter()
        .map(|m| ClusterStats::new(m.clone(), kden))
        .collect::<Result<Vec<_>>>()?;
    pair_crossover(index, &clustering.labels)
        .into_iter()
        .map(|((a, b), ccd)| {
            let ids = density_similarity(&stats[a], &stats[b]);
            let union: Vec<usize> = members[a].iter().chain(&members[b]).copied().collect();
            let cds_ratio = stability_ratio_of(stats[a].cds, stats[b].cds, density_stability(&union, kden)?);
            Ok(FusionCandidate {
                a,
                b,
                ids,
                ccd,
                cds_ratio,
                cfd: fusion_degree(ids, ccd, cds_ratio),
            })
        })
        .collect()
}

/// Greedily merges the pair with the largest fusion degree above `threshold`
/// until no pair exceeds it.
///
/// Ties on the fusion degree go to the lexicographically smallest pair; the
/// merged cluster keeps the center with the higher adaptive density. Output
/// cluster ids are renumbered contiguously in order of their smallest
/// original id.
pub fn self_ensemble<T: Scalar>(
    initial: &InitialClustering,
    profile: &DensityProfile<T>,
    index: &NeighborIndex<T>,
    threshold: T,
) -> Result<EnsembleOutcome<T>> {
    if !(threshold > T::zero()) {
        return Err(Error::param("fusion threshold must be positive"));
    }
    if initial.labels.len() != profile.len() || index.len() != profile.len() {
        return Err(Error::param("clustering, profile and index differ in size"));
    }
    let mut current = initial.clone();
    let mut trace = Vec::new();
    let mut merges = 0;
    for round in 0.. {
        let cands = fusion_candidates(&current, &profile.kden, index)?;
        let best = cands
            .iter()
            .filter(|c| c.cfd > threshold)
            .max_by(|x, y| cmp_scalar(x.cfd, y.cfd).then((y.a, y.b).cmp(&(x.a, x.b))))
            .copied();
        trace.extend(cands.iter().map(|&candidate| TraceRow {
            round,
            candidate,
            merged: best.is_some_and(|b| (b.a, b.b) == (candidate.a, candidate.b)),
        }));
        let Some(best) = best else { break };
        current = merge_pair(&current, best.a, best.b, &profile.adaptive_density);
        merges += 1;
    }
    Ok(EnsembleOutcome {
        clustering: current,
        merges,
        trace,
    })
}

/// Folds cluster `b` into `a` and renumbers so ids stay contiguous.
fn merge_pair<T: Scalar>(c: &InitialClustering, a: usize, b: usize, adaptive: &[T]) -> InitialClustering {
    let (ca, cb) = (c.centers[a], c.centers[b]);
    let keep = if cmp_scalar(adaptive[cb], adaptive[ca]).then(ca.cmp(&cb)).is_gt() {
        cb
    } else {
        ca
    };
    let remap = |l: i64| -> i64 {
        match l {
            NOISE => NOISE,
            l if l as usize == b => a as i64,
            l if l as usize > b => l - 1,
            l => l,
        }
    };
    let labels = c.labels.iter().map(|&l| remap(l)).collect();
    let mut centers = c.centers.clone();
    centers[a] = keep;
    centers.remove(b);
    InitialClustering { labels, centers }
}
