//! Decision-graph critical point, three-way point partition and the
//! assignment of remaining points to initial clusters.

use rayon::prelude::*;

use crate::density::{density_order, DensityProfile};
use crate::distance::DistanceSource;
use crate::error::{Error, Result};
use crate::scalar::{cmp_scalar, Scalar};

/// Cluster id carried by outliers.
pub const NOISE: i64 = -1;

/// Which density supplies the decision-graph abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecisionAxis {
    /// Domain density before multiplication by Delta.
    #[default]
    Domain,
    /// Domain density times Delta.
    Adaptive,
}

/// Fractions of the axis maxima that place the critical point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionParams {
    pub density_fraction: f64,
    pub delta_fraction: f64,
    pub axis: DecisionAxis,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            density_fraction: 0.5,
            delta_fraction: 0.25,
            axis: DecisionAxis::Domain,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |f: f64| f > 0.0 && f < 1.0;
        if !ok(self.density_fraction) || !ok(self.delta_fraction) {
            return Err(Error::param("critical point fractions must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn axis_values<'p, T: Scalar>(&self, profile: &'p DensityProfile<T>) -> &'p [T] {
        match self.axis {
            DecisionAxis::Domain => &profile.domain_density,
            DecisionAxis::Adaptive => &profile.adaptive_density,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint<T> {
    /// Density threshold.
    pub x: T,
    /// Delta threshold.
    pub y: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointRole {
    Center,
    Outlier,
    Remaining,
}

impl PointRole {
    pub fn as_str(self) -> &'static str {
        match self {
            PointRole::Center => "center",
            PointRole::Outlier => "outlier",
            PointRole::Remaining => "remaining",
        }
    }
}

/// Per-point cluster labels (NOISE for outliers) and the center of each cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialClustering {
    pub labels: Vec<i64>,
    pub centers: Vec<usize>,
}

impl InitialClustering {
    pub fn n_clusters(&self) -> usize {
        self.centers.len()
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.centers.len()];
        for (i, &l) in self.labels.iter().enumerate() {
            if l >= 0 {
                out[l as usize].push(i);
            }
        }
        out
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }
}

fn max_of<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().fold(T::neg_infinity(), T::max)
}

/// Critical point over arbitrary abscissa values and Delta distances.
pub fn critical_point_of<T: Scalar>(x: &[T], delta: &[T], params: &SelectionParams) -> CriticalPoint<T> {
    CriticalPoint {
        x: max_of(x) * T::lit(params.density_fraction),
        y: max_of(delta) * T::lit(params.delta_fraction),
    }
}

pub fn critical_point<T: Scalar>(profile: &DensityProfile<T>, params: &SelectionParams) -> CriticalPoint<T> {
    critical_point_of(params.axis_values(profile), &profile.delta, params)
}

/// Centers clear both thresholds; outliers sit left of the density threshold
/// and above the line through the origin and the critical point.
pub fn partition_by<T: Scalar>(x: &[T], delta: &[T], cp: &CriticalPoint<T>) -> Result<Vec<PointRole>> {
    if x.len() != delta.len() {
        return Err(Error::param("decision graph axes differ in length"));
    }
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(cp.x > T::zero()) || !(cp.y > T::zero()) {
        if cp.x.is_finite() && cp.y.is_finite() && cp.x >= T::zero() && cp.y >= T::zero() {
            // all points coincide, or a single point: one cluster, no outliers
            let top = density_order(x)[0];
            return Ok((0..x.len())
                .map(|i| if i == top { PointRole::Center } else { PointRole::Remaining })
                .collect());
        }
        return Err(Error::NoCenter);
    }
    let slope = cp.y / cp.x;
    let roles: Vec<PointRole> = x
        .iter()
        .zip(delta)
        .map(|(&p, &d)| {
            if p > cp.x && d > cp.y {
                PointRole::Center
            } else if p < cp.x && d > slope * p {
                PointRole::Outlier
            } else {
                PointRole::Remaining
            }
        })
        .collect();
    if !roles.contains(&PointRole::Center) {
        return Err(Error::NoCenter);
    }
    Ok(roles)
}

pub fn partition_points<T: Scalar>(
    profile: &DensityProfile<T>,
    cp: &CriticalPoint<T>,
    params: &SelectionParams,
) -> Result<Vec<PointRole>> {
    partition_by(params.axis_values(profile), &profile.delta, cp)
}

/// Labels remaining points in descending `rank_density` order, each taking the
/// cluster of its nearest non-outlier point of higher rank.
///
/// Clusters are numbered by the rank of their center.
pub fn assign_by<T: Scalar, D: PartialOrd + Copy + Sync>(
    rank_density: &[D],
    roles: &[PointRole],
    source: &DistanceSource<'_, T>,
) -> Result<InitialClustering> {
    let n = roles.len();
    if rank_density.len() != n || source.len() != n {
        return Err(Error::param("assignment inputs differ in length"));
    }
    let order = density_order(rank_density);
    let centers: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| roles[i] == PointRole::Center)
        .collect();
    if centers.is_empty() {
        return Err(Error::NoCenter);
    }
    // targets depend only on ranks and roles, so they can be found independently
    let targets: Vec<Option<usize>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let i = order[r];
            if roles[i] != PointRole::Remaining {
                return None;
            }
            order[..r]
                .iter()
                .copied()
                .filter(|&j| roles[j] != PointRole::Outlier)
                .map(|j| (source.dist(i, j), j))
                .min_by(|a, b| cmp_scalar(a.0, b.0).then(a.1.cmp(&b.1)))
                .map(|(_, j)| j)
        })
        .collect();

    let mut labels = vec![NOISE; n];
    for (c, &i) in centers.iter().enumerate() {
        labels[i] = c as i64;
    }
    for (r, &i) in order.iter().enumerate() {
        if roles[i] != PointRole::Remaining {
            continue;
        }
        labels[i] = match targets[r] {
            Some(j) => labels[j],
            None => {
                log::warn!("point {i} has no higher-ranked target; joining cluster of densest center");
                labels[centers[0]]
            }
        };
        debug_assert!(labels[i] >= 0);
    }
    Ok(InitialClustering { labels, centers })
}

/// Assignment ordered by adaptive density.
pub fn assign_remaining<T: Scalar>(
    profile: &DensityProfile<T>,
    roles: &[PointRole],
    source: &DistanceSource<'_, T>,
) -> Result<InitialClustering> {
    assign_by(&profile.adaptive_density, roles, source)
}
