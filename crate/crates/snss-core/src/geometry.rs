//! Sample-location generation, domain partitioning, and spatial kernels.
//!
//! Locations live on a rectangular domain: `[0, n_side]²` for simulated
//! patterns, or the tight bounding box for ingested data. Partitions split
//! the point index set into blocks (sub-domains); kernels weight pairs of
//! locations by their lag vector.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution};
use std::fmt;
use std::str::FromStr;

/// 0.95 quantile of the standard normal distribution, pinned so Gauss-kernel
/// outputs are bit-stable across platforms.
pub const GAUSS_Q: f64 = 1.6448536269514722;

/// Planar sample locations (n×2).
#[derive(Debug, Clone, PartialEq)]
pub struct Coords {
    pts: Vec<[f64; 2]>,
}

impl Coords {
    /// Wraps a point list; requires at least one point and finite entries.
    pub fn new(pts: Vec<[f64; 2]>) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::BadConfig("coordinate set is empty".into()));
        }
        for (i, p) in pts.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::BadConfig(format!(
                    "coordinate {i} is not finite: ({}, {})",
                    p[0], p[1]
                )));
            }
        }
        Ok(Self { pts })
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        self.pts[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, [f64; 2]> {
        self.pts.iter()
    }

    pub fn as_slice(&self) -> &[[f64; 2]] {
        &self.pts
    }
}

impl std::ops::Index<usize> for Coords {
    type Output = [f64; 2];
    fn index(&self, i: usize) -> &[f64; 2] {
        &self.pts[i]
    }
}

/// Axis-aligned domain rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
}

impl Rect {
    /// The simulation domain `[0, n_side]²`.
    pub fn square(n_side: f64) -> Self {
        Rect {
            min_x: 0.0,
            max_x: n_side,
            min_y: 0.0,
            max_y: n_side,
        }
    }

    /// Tight bounding box of a point set (used for ingested data).
    pub fn bounding(coords: &Coords) -> Self {
        let mut r = Rect {
            min_x: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            min_y: f64::INFINITY,
            max_y: f64::NEG_INFINITY,
        };
        for p in coords.iter() {
            r.min_x = r.min_x.min(p[0]);
            r.max_x = r.max_x.max(p[0]);
            r.min_y = r.min_y.min(p[1]);
            r.max_y = r.max_y.max(p[1]);
        }
        r
    }

    fn require_positive_sides(&self) -> Result<()> {
        if !(self.max_x > self.min_x) || !(self.max_y > self.min_y) {
            return Err(Error::InvalidDomain(format!(
                "rectangle [{}, {}]×[{}, {}] has a non-positive side length",
                self.min_x, self.max_x, self.min_y, self.max_y
            )));
        }
        Ok(())
    }
}

/// Spatial kernel acting on the lag vector between two locations.
///
/// All kernels are isotropic (they depend on the lag only through its norm).
/// `F0` is the zero-lag kernel: weight 1 exactly at lag 0, else 0; it equals
/// `Ball(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// Indicator of ‖d‖ ≤ r.
    Ball(f64),
    /// Indicator of r1 < ‖d‖ ≤ r2 (strict lower bound excludes self-pairs).
    Ring(f64, f64),
    /// exp(−0.5·(q·‖d‖/r)²) with q the pinned 95% normal quantile.
    Gauss(f64),
    /// Indicator of ‖d‖ = 0.
    F0,
}

impl KernelSpec {
    /// True when the kernel weights only coincident pairs — F0 itself, or a
    /// ball of radius zero, which is the same indicator.
    pub fn is_zero_lag(&self) -> bool {
        match *self {
            KernelSpec::F0 => true,
            KernelSpec::Ball(r) => r == 0.0,
            _ => false,
        }
    }

    /// Checks the parameter invariants (Ball: r ≥ 0; Ring: 0 ≤ r1 < r2;
    /// Gauss: r > 0).
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::BadKernelSpec {
            spec: self.to_string(),
            reason: reason.into(),
        };
        match *self {
            KernelSpec::Ball(r) => {
                if !(r >= 0.0) || !r.is_finite() {
                    return Err(bad("radius must be finite and ≥ 0"));
                }
            }
            KernelSpec::Ring(r1, r2) => {
                if !(r1 >= 0.0) || !r1.is_finite() || !r2.is_finite() || !(r1 < r2) {
                    return Err(bad("radii must be finite with 0 ≤ r1 < r2"));
                }
            }
            KernelSpec::Gauss(r) => {
                if !(r > 0.0) || !r.is_finite() {
                    return Err(bad("radius must be finite and > 0"));
                }
            }
            KernelSpec::F0 => {}
        }
        Ok(())
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KernelSpec::Ball(r) => write!(f, "ball:{r}"),
            KernelSpec::Ring(r1, r2) => write!(f, "ring:{r1}:{r2}"),
            KernelSpec::Gauss(r) => write!(f, "gauss:{r}"),
            KernelSpec::F0 => write!(f, "f0"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// Parses `ball:R`, `ring:R1:R2`, `gauss:R`, or `f0`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: String| Error::BadKernelSpec {
            spec: s.into(),
            reason,
        };
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("`{t}` is not a number")))
        };
        let spec = match parts[0].trim() {
            "f0" => {
                if parts.len() != 1 {
                    return Err(bad("f0 takes no parameters".into()));
                }
                KernelSpec::F0
            }
            "ball" => {
                if parts.len() != 2 {
                    return Err(bad("expected ball:R".into()));
                }
                KernelSpec::Ball(num(parts[1])?)
            }
            "ring" => {
                if parts.len() != 3 {
                    return Err(bad("expected ring:R1:R2".into()));
                }
                KernelSpec::Ring(num(parts[1])?, num(parts[2])?)
            }
            "gauss" => {
                if parts.len() != 2 {
                    return Err(bad("expected gauss:R".into()));
                }
                KernelSpec::Gauss(num(parts[1])?)
            }
            other => return Err(bad(format!("unknown kernel kind `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Evaluates the kernel weight for a lag vector.
///
/// Isotropic by construction: `kernel_weight(spec, d) == kernel_weight(spec, -d)`.
pub fn kernel_weight(spec: KernelSpec, diff: [f64; 2]) -> f64 {
    let d2 = diff[0] * diff[0] + diff[1] * diff[1];
    match spec {
        KernelSpec::Ball(r) => {
            if d2 <= r * r {
                1.0
            } else {
                0.0
            }
        }
        KernelSpec::Ring(r1, r2) => {
            if d2 > r1 * r1 && d2 <= r2 * r2 {
                1.0
            } else {
                0.0
            }
        }
        KernelSpec::Gauss(r) => {
            let t = GAUSS_Q / r;
            (-0.5 * t * t * d2).exp()
        }
        KernelSpec::F0 => {
            if d2 == 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Recipe for splitting a domain into blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionSpec {
    /// Two blocks split at the domain x-midline (block 0 = lower x).
    HalveX,
    /// Two blocks split at the domain y-midline (block 0 = lower y).
    HalveY,
    /// kx×ky equally sized rectangular cells overlaid on the domain,
    /// numbered row-major with x varying fastest.
    GridBlocks(usize, usize),
    /// One block per center; each point joins its nearest center
    /// (Euclidean), ties broken by the lowest center index.
    NearestCenters(Vec<[f64; 2]>),
}

impl PartitionSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::BadPartitionSpec {
            spec: self.to_string(),
            reason: reason.into(),
        };
        match self {
            PartitionSpec::HalveX | PartitionSpec::HalveY => Ok(()),
            PartitionSpec::GridBlocks(kx, ky) => {
                if *kx < 1 || *ky < 1 {
                    return Err(bad("grid counts must be ≥ 1"));
                }
                Ok(())
            }
            PartitionSpec::NearestCenters(centers) => {
                if centers.len() < 2 {
                    return Err(bad("need at least 2 centers"));
                }
                for i in 0..centers.len() {
                    for j in (i + 1)..centers.len() {
                        if centers[i] == centers[j] {
                            return Err(bad("centers must be pairwise distinct"));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionSpec::HalveX => write!(f, "halve-x"),
            PartitionSpec::HalveY => write!(f, "halve-y"),
            PartitionSpec::GridBlocks(kx, ky) => write!(f, "grid:{kx}x{ky}"),
            PartitionSpec::NearestCenters(c) => write!(f, "nearest:{}", c.len()),
        }
    }
}

impl FromStr for PartitionSpec {
    type Err = Error;

    /// Parses `halve-x`, `halve-y`, or `grid:KXxKY` (e.g. `grid:2x2`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: String| Error::BadPartitionSpec {
            spec: s.into(),
            reason,
        };
        let t = s.trim();
        if t == "halve-x" {
            return Ok(PartitionSpec::HalveX);
        }
        if t == "halve-y" {
            return Ok(PartitionSpec::HalveY);
        }
        if let Some(rest) = t.strip_prefix("grid:") {
            let (a, b) = rest
                .split_once('x')
                .ok_or_else(|| bad("expected grid:KXxKY".into()))?;
            let kx: usize = a
                .parse()
                .map_err(|_| bad(format!("`{a}` is not a positive integer")))?;
            let ky: usize = b
                .parse()
                .map_err(|_| bad(format!("`{b}` is not a positive integer")))?;
            let spec = PartitionSpec::GridBlocks(kx, ky);
            spec.validate()?;
            return Ok(spec);
        }
        Err(bad(format!("unknown partition kind `{t}`")))
    }
}

/// Assignment of each point to one of `n_blocks` blocks (0-based).
///
/// Blocks are disjoint and cover the whole index set by construction. A block
/// may be empty; consumers that require populated blocks must call
/// [`Partition::require_min_size`].
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    block_of: Vec<usize>,
    n_blocks: usize,
}

impl Partition {
    /// Builds a partition from explicit labels; every label must be `< n_blocks`.
    pub fn new(block_of: Vec<usize>, n_blocks: usize) -> Result<Self> {
        if n_blocks == 0 {
            return Err(Error::BadConfig("partition needs at least one block".into()));
        }
        if let Some((i, &b)) = block_of.iter().enumerate().find(|(_, &b)| b >= n_blocks) {
            return Err(Error::BadConfig(format!(
                "point {i} assigned to block {b}, but only {n_blocks} blocks exist"
            )));
        }
        Ok(Self { block_of, n_blocks })
    }

    /// The trivial one-block partition over `n` points.
    pub fn single_block(n: usize) -> Self {
        Self {
            block_of: vec![0; n],
            n_blocks: 1,
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }

    pub fn block_of(&self, point: usize) -> usize {
        self.block_of[point]
    }

    pub fn labels(&self) -> &[usize] {
        &self.block_of
    }

    /// Point indices per block, each list ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_blocks];
        for (i, &b) in self.block_of.iter().enumerate() {
            out[b].push(i);
        }
        out
    }

    /// Errors if any block holds fewer than `need` points (block index and
    /// size reported).
    pub fn require_min_size(&self, need: usize) -> Result<()> {
        let mut sizes = vec![0usize; self.n_blocks];
        for &b in &self.block_of {
            sizes[b] += 1;
        }
        for (block, &len) in sizes.iter().enumerate() {
            if len == 0 {
                return Err(Error::EmptyBlock {
                    block,
                    blocks: self.n_blocks,
                });
            }
            if len < need {
                return Err(Error::BlockTooSmall { block, len, need });
            }
        }
        Ok(())
    }
}

/// Generates `n_side²` locations uniform on `[0, n_side]²`.
///
/// Each coordinate is an independent U(0,1) draw scaled by `n_side`;
/// deterministic given the seed.
pub fn gen_uniform_coords(n_side: u32, seed: u64) -> Coords {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    gen_uniform_coords_rng(n_side, &mut rng)
}

/// As [`gen_uniform_coords`] but drawing from a caller-provided stream.
pub fn gen_uniform_coords_rng<R: Rng + ?Sized>(n_side: u32, rng: &mut R) -> Coords {
    assert!(n_side >= 1, "n_side must be ≥ 1");
    let n = (n_side as usize) * (n_side as usize);
    let scale = n_side as f64;
    let pts = (0..n)
        .map(|_| {
            let x: f64 = rng.random::<f64>() * scale;
            let y: f64 = rng.random::<f64>() * scale;
            [x, y]
        })
        .collect();
    Coords { pts }
}

/// Generates `n_side²` locations with x ~ Beta(2,5)·n_side (density skewed
/// toward the left edge) and y uniform on `[0, n_side]`.
pub fn gen_skewed_coords(n_side: u32, seed: u64) -> Coords {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    gen_skewed_coords_rng(n_side, &mut rng)
}

/// As [`gen_skewed_coords`] but drawing from a caller-provided stream.
pub fn gen_skewed_coords_rng<R: Rng + ?Sized>(n_side: u32, rng: &mut R) -> Coords {
    assert!(n_side >= 1, "n_side must be ≥ 1");
    let n = (n_side as usize) * (n_side as usize);
    let scale = n_side as f64;
    let beta = Beta::new(2.0, 5.0).expect("valid Beta(2,5) parameters");
    let pts = (0..n)
        .map(|_| {
            let x: f64 = beta.sample(rng) * scale;
            let y: f64 = rng.random::<f64>() * scale;
            [x, y]
        })
        .collect();
    Coords { pts }
}

/// Assigns every point to a block according to `spec` over `domain`.
///
/// Grid cells are half-open (closed-lower/open-upper) with the upper domain
/// edge closed, so a point exactly on an interior cell boundary joins the
/// cell that starts there; points outside the domain clamp into the border
/// cells. Blocks may come out empty; callers that require populated blocks
/// check via [`Partition::require_min_size`].
pub fn make_partition(coords: &Coords, spec: &PartitionSpec, domain: &Rect) -> Result<Partition> {
    spec.validate()?;
    let (kx, ky) = match spec {
        PartitionSpec::HalveX => (2usize, 1usize),
        PartitionSpec::HalveY => (1, 2),
        PartitionSpec::GridBlocks(kx, ky) => (*kx, *ky),
        PartitionSpec::NearestCenters(centers) => {
            let block_of = coords
                .iter()
                .map(|p| {
                    let mut best = 0usize;
                    let mut best_d2 = f64::INFINITY;
                    for (c, center) in centers.iter().enumerate() {
                        let dx = p[0] - center[0];
                        let dy = p[1] - center[1];
                        let d2 = dx * dx + dy * dy;
                        if d2 < best_d2 {
                            best_d2 = d2;
                            best = c;
                        }
                    }
                    best
                })
                .collect();
            return Partition::new(block_of, centers.len());
        }
    };
    domain.require_positive_sides()?;
    let cell = |v: f64, min: f64, max: f64, k: usize| -> usize {
        let t = (v - min) / (max - min);
        let i = (t * k as f64).floor();
        (i.max(0.0) as usize).min(k - 1)
    };
    let block_of = coords
        .iter()
        .map(|p| {
            let ix = cell(p[0], domain.min_x, domain.max_x, kx);
            let iy = cell(p[1], domain.min_y, domain.max_y, ky);
            iy * kx + ix
        })
        .collect();
    Partition::new(block_of, kx * ky)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_coords_deterministic_count_and_range() {
        let a = gen_uniform_coords(20, 7);
        let b = gen_uniform_coords(20, 7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 400);
        assert!(a.iter().all(|p| (0.0..=20.0).contains(&p[0]) && (0.0..=20.0).contains(&p[1])));
        let c = gen_uniform_coords(1, 7);
        assert_eq!(c.len(), 1);
        assert!(c[0][0] <= 1.0 && c[0][1] <= 1.0);
    }

    #[test]
    fn skewed_coords_match_beta_and_uniform_means() {
        // Beta(2,5) has mean 2/7; U(0,1) has mean 1/2.
        let c = gen_skewed_coords(30, 11);
        assert_eq!(c.len(), 900);
        let mx = c.iter().map(|p| p[0] / 30.0).sum::<f64>() / 900.0;
        let my = c.iter().map(|p| p[1] / 30.0).sum::<f64>() / 900.0;
        assert!((mx - 2.0 / 7.0).abs() < 0.02, "beta mean off: {mx}");
        assert!((my - 0.5).abs() < 0.02, "uniform mean off: {my}");
        assert!(c.iter().all(|p| (0.0..=30.0).contains(&p[0]) && (0.0..=30.0).contains(&p[1])));
    }

    #[test]
    fn kernel_weight_examples() {
        // Ball(2) includes lag (1,1): ‖d‖ = √2 ≤ 2.
        assert_eq!(kernel_weight(KernelSpec::Ball(2.0), [1.0, 1.0]), 1.0);
        // Ring lower bound is strict: lag 0 is excluded.
        assert_eq!(kernel_weight(KernelSpec::Ring(0.0, 2.0), [0.0, 0.0]), 0.0);
        assert_eq!(kernel_weight(KernelSpec::Ring(0.0, 2.0), [0.0, 2.0]), 1.0);
        assert_eq!(kernel_weight(KernelSpec::Ring(1.0, 2.0), [1.0, 0.0]), 0.0);
        // Gauss(2) at lag (2,0): exp(−0.5·q²); cross-check the pinned q
        // against an independently computed normal quantile.
        let q = statrs::distribution::ContinuousCDF::inverse_cdf(
            &statrs::distribution::Normal::new(0.0, 1.0).unwrap(),
            0.95,
        );
        assert!((q - GAUSS_Q).abs() < 1e-9, "pinned quantile disagrees: {q}");
        let expect = (-0.5 * GAUSS_Q * GAUSS_Q).exp();
        let got = kernel_weight(KernelSpec::Gauss(2.0), [2.0, 0.0]);
        assert!((got - expect).abs() < 1e-15);
        assert!((got - 2.5852271228708051e-01).abs() < 1e-15);
    }

    #[test]
    fn ball_zero_equals_f0() {
        let diffs = [
            [0.0, 0.0],
            [1e-300, 0.0],
            [0.5, -0.25],
            [-3.0, 4.0],
            [f64::MIN_POSITIVE, f64::MIN_POSITIVE],
        ];
        for d in diffs {
            assert_eq!(
                kernel_weight(KernelSpec::Ball(0.0), d),
                kernel_weight(KernelSpec::F0, d),
                "mismatch at {d:?}"
            );
        }
    }

    proptest! {
        #[test]
        fn kernels_are_isotropic(dx in -50.0f64..50.0, dy in -50.0f64..50.0,
                                 r in 0.1f64..10.0, r2 in 10.1f64..20.0) {
            for spec in [
                KernelSpec::Ball(r),
                KernelSpec::Ring(r, r2),
                KernelSpec::Gauss(r),
                KernelSpec::F0,
            ] {
                prop_assert_eq!(
                    kernel_weight(spec, [dx, dy]).to_bits(),
                    kernel_weight(spec, [-dx, -dy]).to_bits()
                );
            }
        }

        #[test]
        fn partition_covers_and_is_disjoint(seed in 0u64..1000) {
            let coords = gen_uniform_coords(5, seed);
            let domain = Rect::square(5.0);
            for spec in [
                PartitionSpec::HalveX,
                PartitionSpec::HalveY,
                PartitionSpec::GridBlocks(3, 2),
                PartitionSpec::NearestCenters(vec![[1.0, 1.0], [4.0, 4.0], [1.0, 4.0]]),
            ] {
                let part = make_partition(&coords, &spec, &domain).unwrap();
                let blocks = part.blocks();
                let total: usize = blocks.iter().map(|b| b.len()).sum();
                prop_assert_eq!(total, coords.len());
                let mut seen = vec![false; coords.len()];
                for b in &blocks {
                    for &i in b {
                        prop_assert!(!seen[i]);
                        seen[i] = true;
                    }
                }
            }
        }
    }

    #[test]
    fn quadrant_grid_partition() {
        let coords = Coords::new(vec![[0.5, 0.5], [1.5, 0.5], [0.5, 1.5], [1.5, 1.5]]).unwrap();
        let part = make_partition(
            &coords,
            &PartitionSpec::GridBlocks(2, 2),
            &Rect::square(2.0),
        )
        .unwrap();
        assert_eq!(part.n_blocks(), 4);
        assert_eq!(part.labels(), &[0, 1, 2, 3]);
        assert!(part.blocks().iter().all(|b| b.len() == 1));
    }

    #[test]
    fn nearest_centers_assignment_and_tie_break() {
        let centers = vec![[0.0, 0.0], [10.0, 0.0]];
        let coords = Coords::new(vec![[4.0, 0.0], [5.0, 0.0], [9.0, 0.0]]).unwrap();
        let part = make_partition(
            &coords,
            &PartitionSpec::NearestCenters(centers),
            &Rect::square(10.0),
        )
        .unwrap();
        // Point (4,0) is nearer the first center; the equidistant point (5,0)
        // breaks its tie toward the lowest center index.
        assert_eq!(part.labels(), &[0, 0, 1]);
    }

    #[test]
    fn grid_one_by_one_is_single_block() {
        let coords = gen_uniform_coords(4, 3);
        let part = make_partition(
            &coords,
            &PartitionSpec::GridBlocks(1, 1),
            &Rect::square(4.0),
        )
        .unwrap();
        assert_eq!(part.n_blocks(), 1);
        assert!(part.labels().iter().all(|&b| b == 0));
    }

    #[test]
    fn grid_boundary_is_closed_lower_open_upper() {
        // Midline point joins the cell that starts at it; the domain's upper
        // edge is closed into the last cell.
        let coords = Coords::new(vec![[1.0, 0.5], [2.0, 0.5], [0.0, 0.5]]).unwrap();
        let part =
            make_partition(&coords, &PartitionSpec::HalveX, &Rect::square(2.0)).unwrap();
        assert_eq!(part.labels(), &[1, 1, 0]);
    }

    #[test]
    fn degenerate_domain_rejected_for_grids() {
        let coords = Coords::new(vec![[1.0, 0.0], [1.0, 1.0]]).unwrap();
        let domain = Rect::bounding(&coords); // zero width
        let err = make_partition(&coords, &PartitionSpec::GridBlocks(2, 2), &domain);
        assert!(matches!(err, Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn empty_blocks_are_allowed_until_required() {
        let coords = Coords::new(vec![[0.1, 0.1], [0.2, 0.2]]).unwrap();
        let part = make_partition(
            &coords,
            &PartitionSpec::GridBlocks(2, 2),
            &Rect::square(1.0),
        )
        .unwrap();
        assert_eq!(part.n_blocks(), 4);
        let err = part.require_min_size(1).unwrap_err();
        assert!(matches!(err, Error::EmptyBlock { block: 1, blocks: 4 }));
    }

    #[test]
    fn kernel_and_partition_specs_round_trip_through_strings() {
        for s in ["ball:2", "ring:0:1.5", "gauss:2.5", "f0"] {
            let k: KernelSpec = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        for s in ["halve-x", "halve-y", "grid:2x2", "grid:3x4"] {
            let p: PartitionSpec = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("ball".parse::<KernelSpec>().is_err());
        assert!("ring:2:1".parse::<KernelSpec>().is_err());
        assert!("gauss:0".parse::<KernelSpec>().is_err());
        assert!("grid:0x2".parse::<PartitionSpec>().is_err());
        assert!("wedges:3".parse::<PartitionSpec>().is_err());
    }
}
