//! End-to-end runners: the full DADC pipeline and the CFSFDP baseline.

use crate::centers::{
    assign_by, critical_point_of, partition_by, CriticalPoint, InitialClustering, PointRole, SelectionParams,
};
use crate::density::{auto_cutoff, cfsfdp_profile, compute_profile, BaselineProfile, DegeneracyReport, DensityProfile};
use crate::distance::DistanceSource;
use crate::ensemble::{self_ensemble, EnsembleOutcome};
use crate::error::{Error, Result};
use crate::neighbors::NeighborIndex;
use crate::scalar::Scalar;

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_FUSION_THRESHOLD: f64 = 1.0;
/// Mean share of the dataset expected inside the automatic baseline cutoff.
pub const AUTO_CUTOFF_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Dadc,
    Cfsfdp,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Dadc => "dadc",
            Algorithm::Cfsfdp => "cfsfdp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DadcParams {
    pub k: usize,
    pub fusion_threshold: f64,
    pub selection: SelectionParams,
}

impl Default for DadcParams {
    fn default() -> Self {
        DadcParams {
            k: DEFAULT_K,
            fusion_threshold: DEFAULT_FUSION_THRESHOLD,
            selection: SelectionParams::default(),
        }
    }
}

impl DadcParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        if !(self.fusion_threshold > 0.0) || !self.fusion_threshold.is_finite() {
            return Err(Error::param("fusion threshold must be positive"));
        }
        self.selection.validate()
    }
}

#[derive(Debug, Clone)]
pub struct DadcResult<T> {
    /// `None` only for a single-point dataset.
    pub index: Option<NeighborIndex<T>>,
    pub profile: DensityProfile<T>,
    pub critical_point: CriticalPoint<T>,
    pub roles: Vec<PointRole>,
    pub initial: InitialClustering,
    pub ensemble: EnsembleOutcome<T>,
}

impl<T: Scalar> DadcResult<T> {
    /// Final per-point labels.
    pub fn labels(&self) -> &[i64] {
        &self.ensemble.clustering.labels
    }

    pub fn n_centers(&self) -> usize {
        self.initial.n_clusters()
    }

    pub fn n_clusters(&self) -> usize {
        self.ensemble.clustering.n_clusters()
    }
}

fn single_point<T: Scalar>() -> (CriticalPoint<T>, Vec<PointRole>, InitialClustering) {
    (
        CriticalPoint {
            x: T::zero(),
            y: T::zero(),
        },
        vec![PointRole::Center],
        InitialClustering {
            labels: vec![0],
            centers: vec![0],
        },
    )
}

/// Density profile, center selection, assignment and self-ensemble.
pub fn run_dadc<T: Scalar>(source: &DistanceSource<'_, T>, params: &DadcParams) -> Result<DadcResult<T>> {
    params.validate()?;
    let n = source.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if n == 1 {
        let zero = vec![T::zero()];
        let (critical_point, roles, initial) = single_point();
        return Ok(DadcResult {
            index: None,
            profile: DensityProfile {
                kdist: zero.clone(),
                kden: zero.clone(),
                domain_density: zero.clone(),
                delta: zero.clone(),
                adaptive_density: zero,
                delta_witness: vec![None],
                report: DegeneracyReport::default(),
            },
            critical_point,
            roles,
            ensemble: EnsembleOutcome {
                clustering: initial.clone(),
                merges: 0,
                trace: Vec::new(),
            },
            initial,
        });
    }
    let (index, profile) = compute_profile(source, params.k)?;
    let x = params.selection.axis_values(&profile);
    let critical_point = critical_point_of(x, &profile.delta, &params.selection);
    let roles = partition_by(x, &profile.delta, &critical_point)?;
    let initial = assign_by(&profile.adaptive_density, &roles, source)?;
    let ensemble = self_ensemble(&initial, &profile, &index, T::lit(params.fusion_threshold))?;
    log::debug!(
        "dadc: {} centers, {} outliers, {} clusters after {} merges",
        initial.n_clusters(),
        initial.noise_count(),
        ensemble.clustering.n_clusters(),
        ensemble.merges
    );
    Ok(DadcResult {
        index: Some(index),
        profile,
        critical_point,
        roles,
        initial,
        ensemble,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Cutoff {
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BaselineParams {
    pub cutoff: Cutoff,
    pub selection: SelectionParams,
}

#[derive(Debug, Clone)]
pub struct BaselineResult<T> {
    pub profile: BaselineProfile<T>,
    pub critical_point: CriticalPoint<T>,
    pub roles: Vec<PointRole>,
    pub clustering: InitialClustering,
}

impl<T: Scalar> BaselineResult<T> {
    pub fn labels(&self) -> &[i64] {
        &self.clustering.labels
    }

    /// Points clearing both decision-graph thresholds.
    pub fn n_centers(&self) -> usize {
        self.clustering.n_clusters()
    }
}

/// CFSFDP: cutoff-count density, the same critical-point rule on `(rho, delta)`,
/// and nearest-higher-density assignment.
pub fn run_cfsfdp<T: Scalar>(source: &DistanceSource<'_, T>, params: &BaselineParams) -> Result<BaselineResult<T>> {
    params.selection.validate()?;
    let n = source.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if n == 1 {
        let (critical_point, roles, clustering) = single_point();
        return Ok(BaselineResult {
            profile: BaselineProfile {
                rho: vec![0],
                delta: vec![T::zero()],
                delta_witness: vec![None],
                cutoff: T::one(),
            },
            critical_point,
            roles,
            clustering,
        });
    }
    let cutoff = match params.cutoff {
        Cutoff::Auto => auto_cutoff(source, AUTO_CUTOFF_FRACTION)?,
        Cutoff::Fixed(c) => T::lit(c),
    };
    let profile = cfsfdp_profile(source, cutoff)?;
    let rho: Vec<T> = profile.rho.iter().map(|&r| T::from_count(r)).collect();
    let critical_point = critical_point_of(&rho, &profile.delta, &params.selection);
    let roles = partition_by(&rho, &profile.delta, &critical_point)?;
    let clustering = assign_by(&profile.rho, &roles, source)?;
    Ok(BaselineResult {
        profile,
        critical_point,
        roles,
        clustering,
    })
}
