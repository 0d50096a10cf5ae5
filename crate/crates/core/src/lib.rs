//! Domain-adaptive density clustering.
//!
//! The pipeline runs in three stages over a [`DistanceSource`]: KNN-based
//! domain densities and Delta distances ([`density`]), automatic center
//! selection from the decision graph ([`centers`]), and fusion-degree merging
//! of fragmented clusters ([`ensemble`]). A CFSFDP baseline, seeded dataset
//! generators and an accuracy harness round it out.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below cover the common case.

pub mod centers;
pub mod dataset;
pub mod density;
pub mod distance;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod neighbors;
pub mod pipeline;
pub mod scalar;
pub mod synth;

pub use centers::{
    assign_remaining, critical_point, partition_points, CriticalPoint, DecisionAxis, InitialClustering, PointRole,
    SelectionParams, NOISE,
};
pub use dataset::{load_csv, write_csv, Dataset, Point};
pub use density::{cfsfdp_profile, compute_profile, BaselineProfile, DensityProfile};
pub use distance::{distance, DistanceMatrix, DistanceSource};
pub use ensemble::{self_ensemble, EnsembleOutcome, FusionCandidate};
pub use error::{Error, Result};
pub use evaluation::{clustering_accuracy, inject_noise, robustness_sweep, EvaluationReport, NoiseSpec};
pub use neighbors::{Neighbor, NeighborIndex};
pub use pipeline::{run_cfsfdp, run_dadc, Algorithm, BaselineParams, Cutoff, DadcParams, DadcResult};
pub use scalar::Scalar;
pub use synth::{generate_ed, generate_mddm, generate_vdd, RegionSpec, Shape};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type DistanceMatrix64 = DistanceMatrix<f64>;
pub type NeighborIndex64 = NeighborIndex<f64>;
pub type DensityProfile64 = DensityProfile<f64>;
pub type DensityProfile32 = DensityProfile<f32>;
