//! Seeded generators for varying-density (VDD), equilibrium (ED) and
//! multi-maximum (MDDM) datasets.
//!
//! Every generator labels points by region and shuffles the output order with
//! the seed, so point ids carry no information about the generating region.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Region geometry. `extent` is the radius for disks and rings, the half-width
/// for rectangles and the standard deviation for gaussians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disk,
    /// Annulus with inner radius `inner * extent`.
    RingHeart { inner: f64 },
    /// Half-height is `aspect * extent`.
    Rectangle { aspect: f64 },
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    pub shape: Shape,
    pub center: [f64; 2],
    pub extent: f64,
    pub count: usize,
    /// Relative KNN-density; in VDD output the region is shrunk by this factor.
    pub density_tier: f64,
}

/// Ratio of the gaussian core radius (resampled to uniform) to sigma.
pub const MDDM_CORE: f64 = 0.5;
/// Gaussians are treated as disks of this many sigmas for overlap checks.
const GAUSSIAN_REACH: f64 = 3.0;
const MAX_JITTER: f64 = 0.01;

impl RegionSpec {
    pub fn new(shape: Shape, center: [f64; 2], extent: f64, count: usize) -> Self {
        RegionSpec {
            shape,
            center,
            extent,
            count,
            density_tier: 1.0,
        }
    }

    pub fn tier(mut self, density_tier: f64) -> Self {
        self.density_tier = density_tier;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Spec("region needs at least one point".into()));
        }
        if !(self.density_tier > 0.0) || !self.density_tier.is_finite() {
            return Err(Error::Spec("density tier must be positive".into()));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Spec("region center must be finite".into()));
        }
        let scale = self.center.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        if !self.extent.is_finite() || self.extent <= 1e-9 * scale {
            return Err(Error::Spec(format!("region extent {} is degenerate", self.extent)));
        }
        match self.shape {
            Shape::RingHeart { inner } if !(0.0..1.0).contains(&inner) => {
                Err(Error::Spec("ring inner fraction must lie in [0, 1)".into()))
            }
            Shape::Rectangle { aspect } if !(aspect > 0.0) || !aspect.is_finite() => {
                Err(Error::Spec("rectangle aspect must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        RegionSpec {
            extent: self.extent * factor,
            ..*self
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        let (hx, hy) = match self.shape {
            Shape::Rectangle { aspect } => (self.extent, self.extent * aspect),
            Shape::Gaussian => (self.extent * GAUSSIAN_REACH, self.extent * GAUSSIAN_REACH),
            _ => (self.extent, self.extent),
        };
        let [cx, cy] = self.center;
        ([cx - hx, cy - hy], [cx + hx, cy + hy])
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        let r2 = dx * dx + dy * dy;
        let e = self.extent;
        match self.shape {
            Shape::Disk => r2 <= e * e,
            Shape::RingHeart { inner } => r2 <= e * e && r2 >= (inner * e) * (inner * e),
            Shape::Rectangle { aspect } => dx.abs() <= e && dy.abs() <= e * aspect,
            Shape::Gaussian => r2 <= (GAUSSIAN_REACH * e) * (GAUSSIAN_REACH * e),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> [f64; 2] {
        let [cx, cy] = self.center;
        let e = self.extent;
        match self.shape {
            Shape::Disk => {
                let (x, y) = polar(rng, 0.0, e);
                [cx + x, cy + y]
            }
            Shape::RingHeart { inner } => {
                let (x, y) = polar(rng, inner * e, e);
                [cx + x, cy + y]
            }
            Shape::Rectangle { aspect } => [
                cx + rng.random_range(-e..e),
                cy + rng.random_range(-e * aspect..e * aspect),
            ],
            Shape::Gaussian => {
                let normal = Normal::new(0.0, e).expect("extent validated");
                [cx + normal.sample(rng), cy + normal.sample(rng)]
            }
        }
    }
}

/// Uniform point in the annulus `r_in <= r <= r_out` around the origin.
fn polar(rng: &mut ChaCha8Rng, r_in: f64, r_out: f64) -> (f64, f64) {
    let r = rng.random_range(r_in * r_in..=r_out * r_out).sqrt();
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    (r * t.cos(), r * t.sin())
}

/// Whether two regions share any point, probed on a grid over their common box.
pub fn regions_overlap(a: &RegionSpec, b: &RegionSpec) -> bool {
    const STEPS: usize = 256;
    let (alo, ahi) = a.bbox();
    let (blo, bhi) = b.bbox();
    let lo = [alo[0].max(blo[0]), alo[1].max(blo[1])];
    let hi = [ahi[0].min(bhi[0]), ahi[1].min(bhi[1])];
    if lo[0] > hi[0] || lo[1] > hi[1] {
        return false;
    }
    (0..=STEPS).any(|i| {
        let x = lo[0] + (hi[0] - lo[0]) * i as f64 / STEPS as f64;
        (0..=STEPS).any(|j| {
            let p = [x, lo[1] + (hi[1] - lo[1]) * j as f64 / STEPS as f64];
            a.contains(p) && b.contains(p)
        })
    })
}

fn check_regions(regions: &[RegionSpec]) -> Result<()> {
    if regions.is_empty() {
        return Err(Error::Spec("no regions given".into()));
    }
    for r in regions {
        r.validate()?;
    }
    for (i, a) in regions.iter().enumerate() {
        for (j, b) in regions.iter().enumerate().skip(i + 1) {
            if regions_overlap(a, b) {
                return Err(Error::Spec(format!("regions {i} and {j} overlap")));
            }
        }
    }
    Ok(())
}

fn finish<T: Scalar>(mut rows: Vec<([f64; 2], i64)>, rng: &mut ChaCha8Rng) -> Result<Dataset<T>> {
    rows.shuffle(rng);
    let (coords, labels): (Vec<_>, Vec<_>) = rows
        .into_iter()
        .map(|(p, l)| (vec![T::lit(p[0]), T::lit(p[1])], Some(l)))
        .unzip();
    Dataset::from_rows(coords, Some(labels))
}

/// Uniform samples per region, each region shrunk by its density tier so
/// that KNN-density scales with the tier.
pub fn generate_vdd<T: Scalar>(regions: &[RegionSpec], seed: u64) -> Result<Dataset<T>> {
    let effective: Vec<RegionSpec> = regions.iter().map(|r| r.scaled(1.0 / r.density_tier)).collect();
    check_regions(&effective)?;
    if regions.len() == 1 {
        log::warn!("single region: the dataset has no density variation");
    }
    for (i, a) in regions.iter().enumerate() {
        if regions[i + 1..].iter().any(|b| b.density_tier == a.density_tier) {
            return Err(Error::Spec("density tiers must be distinct".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for (label, r) in effective.iter().enumerate() {
        for _ in 0..r.count {
            rows.push((r.sample(&mut rng), label as i64));
        }
    }
    finish(rows, &mut rng)
}

/// Snaps to a multiple of 2^-20 so lattice coordinates are exact in binary.
fn snap(v: f64) -> f64 {
    const GRID: f64 = (1u64 << 20) as f64;
    (v * GRID).round() / GRID
}

/// Square-lattice fill of each region. The lattice is shared by all regions,
/// so interior points see identical neighborhoods; `count` is ignored.
pub fn generate_ed<T: Scalar>(regions: &[RegionSpec], spacing: f64, seed: u64) -> Result<Dataset<T>> {
    generate_ed_jittered(regions, spacing, 0.0, seed)
}

/// As [`generate_ed`], with every coordinate displaced uniformly by up to
/// `jitter * spacing` (`jitter <= 0.01`).
pub fn generate_ed_jittered<T: Scalar>(
    regions: &[RegionSpec],
    spacing: f64,
    jitter: f64,
    seed: u64,
) -> Result<Dataset<T>> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Spec("lattice spacing must be positive".into()));
    }
    if !(0.0..=MAX_JITTER).contains(&jitter) {
        return Err(Error::Spec(format!("jitter must lie in [0, {MAX_JITTER}]")));
    }
    check_regions(regions)?;
    let s = snap(spacing);
    if s <= 0.0 {
        return Err(Error::Spec("lattice spacing below resolution".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for (label, r) in regions.iter().enumerate() {
        let (lo, hi) = r.bbox();
        let range = |d: usize| ((lo[d] / s - 0.5).floor() as i64)..=((hi[d] / s - 0.5).ceil() as i64);
        let before = rows.len();
        for i in range(0) {
            for j in range(1) {
                let p = [(i as f64 + 0.5) * s, (j as f64 + 0.5) * s];
                if r.contains(p) {
                    rows.push((p, label as i64));
                }
            }
        }
        if rows.len() == before {
            return Err(Error::Spec(format!("region {label} is smaller than one lattice cell")));
        }
    }
    if jitter > 0.0 {
        let amp = jitter * s;
        for (p, _) in rows.iter_mut() {
            p[0] += rng.random_range(-amp..=amp);
            p[1] += rng.random_range(-amp..=amp);
        }
    }
    finish(rows, &mut rng)
}

/// Gaussian samples per region with the core flattened: draws landing within
/// `MDDM_CORE * sigma` of the center are replaced by uniform draws over that disk.
pub fn generate_mddm<T: Scalar>(gaussians: &[RegionSpec], seed: u64) -> Result<Dataset<T>> {
    if gaussians.is_empty() {
        return Err(Error::Spec("no gaussians given".into()));
    }
    for g in gaussians {
        g.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for (label, g) in gaussians.iter().enumerate() {
        let g = RegionSpec {
            shape: Shape::Gaussian,
            ..*g
        };
        let core = MDDM_CORE * g.extent;
        for _ in 0..g.count {
            let mut p = g.sample(&mut rng);
            let (dx, dy) = (p[0] - g.center[0], p[1] - g.center[1]);
            if dx * dx + dy * dy < core * core {
                let (x, y) = polar(&mut rng, 0.0, core);
                p = [g.center[0] + x, g.center[1] + y];
            }
            rows.push((p, label as i64));
        }
    }
    finish(rows, &mut rng)
}

pub mod presets {
    //! Layouts standing in for the Heartshapes, Hexagon-style and G2 benchmarks.
    //!
    //! Coordinates are laid out so that nearest-neighbor distances in the
    //! densest region are ten units or more, the regime of the worked
    //! domain-density example. Domain density is not scale invariant, so
    //! shrinking these layouts changes the decision graph.

    use super::*;

    pub const HEART_POINTS_PER_REGION: usize = 71;
    pub const HEART_EXTENT: f64 = 1000.0;

    /// Three ring-shaped regions with density tiers 1, 4 and 16.
    pub fn heart_regions(per_region: usize) -> Vec<RegionSpec> {
        let e = HEART_EXTENT;
        let ring = Shape::RingHeart { inner: 0.5 };
        vec![
            RegionSpec::new(ring, [0.0, 0.0], e, per_region).tier(1.0),
            RegionSpec::new(ring, [1.75 * e, 0.0], e, per_region).tier(4.0),
            RegionSpec::new(ring, [1.75 * e, 0.625 * e], e, per_region).tier(16.0),
        ]
    }

    pub fn heartshapes<T: Scalar>(seed: u64) -> Result<Dataset<T>> {
        generate_vdd(&heart_regions(HEART_POINTS_PER_REGION), seed)
    }

    /// Two ring regions with a milder 1:3 density contrast.
    pub fn twin_rings_regions(per_region: usize) -> Vec<RegionSpec> {
        let e = 0.75 * HEART_EXTENT;
        let ring = Shape::RingHeart { inner: 0.5 };
        vec![
            RegionSpec::new(ring, [0.0, 0.0], e, per_region).tier(1.0),
            RegionSpec::new(ring, [1.85 * e, 0.0], e, per_region).tier(3.0),
        ]
    }

    pub const ED_SPACING: f64 = 10.0;

    /// A lattice disk inside a concentric lattice ring.
    pub fn ed_regions() -> Vec<RegionSpec> {
        let s = ED_SPACING;
        vec![
            RegionSpec::new(Shape::Disk, [0.0, 0.0], 8.0 * s, 1),
            RegionSpec::new(Shape::RingHeart { inner: 23.0 / 28.0 }, [0.0, 0.0], 28.0 * s, 1),
        ]
    }

    pub fn ed_disk_ring<T: Scalar>(seed: u64) -> Result<Dataset<T>> {
        generate_ed(&ed_regions(), ED_SPACING, seed)
    }

    pub const G2_POINTS_PER_REGION: usize = 1024;
    pub const G2_SIGMA: f64 = 1000.0;
    /// Distance between the two gaussian centers, in sigmas.
    pub const G2_SEPARATION: f64 = 40.0;

    pub fn g2_regions() -> Vec<RegionSpec> {
        vec![
            RegionSpec::new(Shape::Gaussian, [0.0, 0.0], G2_SIGMA, G2_POINTS_PER_REGION),
            RegionSpec::new(
                Shape::Gaussian,
                [G2_SEPARATION * G2_SIGMA, 0.0],
                G2_SIGMA,
                G2_POINTS_PER_REGION,
            ),
        ]
    }

    pub fn g2<T: Scalar>(seed: u64) -> Result<Dataset<T>> {
        generate_mddm(&g2_regions(), seed)
    }
}
