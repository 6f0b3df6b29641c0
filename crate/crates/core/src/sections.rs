//! Slices and projections of cylinder covers.
//!
//! A cylinder meets the line `L_x = {p : ⟨p, w⟩ = x}` when its disk does, i.e. when
//! `|⟨c, w⟩ − x| ≤ radius`. Only projections onto lines (`k = 1`) are supported.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ifs::{map_trig, stopping_set, DiskSet, Frame, Ifs, StoppingSet};
use crate::intervals::union_length;
use crate::percolation::{
    moran_dimension, percolation_dimension, sample_tree, standard_law, PercolationSample,
};
use crate::regression::{fit_box_dimension, DimEstimate, MIN_SCALES};
use crate::rng::derive_seed;
use crate::scalar::{dot, norm, Scalar};

/// Default number of grid offsets for section profiles.
pub const DEFAULT_GRID: usize = 512;

/// Unit vector spanning the line projected onto.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction<T> {
    angle: Option<T>,
    unit: Vec<T>,
}

impl<T: Scalar> Direction<T> {
    /// Planar direction `w_β = (cos β, sin β)`, with `β` reduced into `[0, π)`.
    pub fn planar(beta: T) -> Self {
        let pi = T::PI();
        let mut b = beta % pi;
        if b < T::zero() {
            b += pi;
        }
        Self {
            angle: Some(b),
            unit: vec![b.cos(), b.sin()],
        }
    }

    pub fn from_vector(v: Vec<T>) -> Result<Self> {
        let n = norm(&v);
        if !(n > T::zero() && n.is_finite()) {
            return Err(Error::Parameter("direction vector must be non-zero".into()));
        }
        Ok(Self {
            angle: None,
            unit: v.into_iter().map(|x| x / n).collect(),
        })
    }

    /// Coordinate axis `i` of `R^dim`.
    pub fn axis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::Parameter(format!(
                "axis {i} out of range for dimension {dim}"
            )));
        }
        let mut unit = vec![T::zero(); dim];
        unit[i] = T::one();
        let angle = (dim == 2).then(|| if i == 0 { T::zero() } else { T::FRAC_PI_2() });
        Ok(Self { angle, unit })
    }

    /// `β` for planar directions.
    pub fn angle(&self) -> Option<T> {
        self.angle
    }

    pub fn unit(&self) -> &[T] {
        &self.unit
    }

    pub fn dim(&self) -> usize {
        self.unit.len()
    }

    pub fn project(&self, p: &[T]) -> T {
        dot(&self.unit, p)
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::Parameter(format!(
                "direction in R^{} used with a system in R^{dim}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `N(x, ρ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceCount<T> {
    pub x: T,
    pub rho: T,
    pub count: usize,
}

/// Disks sorted by projected center, for fast slice queries.
#[derive(Clone, Debug)]
pub struct SliceIndex<T> {
    proj: Vec<T>,
    radii: Vec<T>,
    order: Vec<u32>,
    r_max: T,
}

impl<T: Scalar> SliceIndex<T> {
    pub fn new(disks: &DiskSet<T>, direction: &Direction<T>) -> Self {
        let raw: Vec<T> = disks.iter().map(|(c, _)| direction.project(c)).collect();
        let mut order: Vec<u32> = (0..disks.len() as u32).collect();
        order.sort_by(|&a, &b| {
            raw[a as usize]
                .partial_cmp(&raw[b as usize])
                .expect("finite projection")
        });
        let proj = order.iter().map(|&i| raw[i as usize]).collect();
        let radii: Vec<T> = order.iter().map(|&i| disks.radius(i as usize)).collect();
        let r_max = radii.iter().copied().fold(T::zero(), T::max);
        Self {
            proj,
            radii,
            order,
            r_max,
        }
    }

    pub fn len(&self) -> usize {
        self.proj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proj.is_empty()
    }

    fn window(&self, x: T) -> impl Iterator<Item = usize> + '_ {
        let lo = self.proj.partition_point(|&p| p < x - self.r_max);
        (lo..self.proj.len())
            .take_while(move |&j| self.proj[j] <= x + self.r_max)
            .filter(move |&j| (self.proj[j] - x).abs() <= self.radii[j])
    }

    pub fn count(&self, x: T) -> usize {
        self.window(x).count()
    }

    /// Original indices of the disks meeting `L_x`, increasing.
    pub fn hits(&self, x: T) -> Vec<usize> {
        let mut v: Vec<usize> = self.window(x).map(|j| self.order[j] as usize).collect();
        v.sort_unstable();
        v
    }

    /// Projected disks as intervals.
    pub fn intervals(&self) -> Vec<(T, T)> {
        self.proj
            .iter()
            .zip(&self.radii)
            .map(|(&p, &r)| (p - r, p + r))
            .collect()
    }
}

/// Where cylinders come from: the whole attractor or a percolation sample of it.
#[derive(Clone, Copy, Debug)]
pub enum CellSource<'a, T> {
    Full(&'a Ifs<T>),
    Sample {
        ifs: &'a Ifs<T>,
        sample: &'a PercolationSample,
    },
}

impl<'a, T: Scalar> CellSource<'a, T> {
    pub fn ifs(&self) -> &'a Ifs<T> {
        match *self {
            CellSource::Full(ifs) | CellSource::Sample { ifs, .. } => ifs,
        }
    }

    /// `Λ_ρ`, or `Λ_ρ^ω` (words of `Λ_ρ` whose node survives to the sample depth).
    pub fn cover(&self, rho: T) -> Result<StoppingSet<T>> {
        match *self {
            CellSource::Full(ifs) => stopping_set(ifs, rho),
            CellSource::Sample { ifs, sample } => sample_cover(ifs, sample, rho),
        }
    }

    /// Moran dimension of the system, or the percolation dimension of the sample's law.
    pub fn dimension(&self) -> Result<T> {
        match *self {
            CellSource::Full(ifs) => moran_dimension(ifs),
            CellSource::Sample { ifs, sample } => percolation_dimension(sample.law(), ifs),
        }
    }
}

fn sample_cover<T: Scalar>(
    ifs: &Ifs<T>,
    sample: &PercolationSample,
    rho: T,
) -> Result<StoppingSet<T>> {
    if sample.arity() != ifs.len() {
        return Err(Error::Parameter(format!(
            "sample of arity {} used with {} maps",
            sample.arity(),
            ifs.len()
        )));
    }
    let c0 = ifs.c0();
    if !(rho > T::zero() && rho < c0) {
        return Err(Error::OutOfRange {
            what: "rho",
            value: rho.as_f64(),
            limit: c0.as_f64(),
        });
    }
    let mut out = StoppingSet::empty(ifs.ambient_dim(), rho, ifs.c1());
    let alive = sample.alive();
    if alive[0].first() != Some(&true) {
        return Ok(out);
    }
    let walker = SampleWalker {
        ifs,
        sample,
        alive: &alive,
        trig: map_trig(ifs),
        upper: ifs.c1() * rho,
        c0,
    };
    let mut prefix = Vec::new();
    let mut center = vec![T::zero(); ifs.ambient_dim()];
    walker.walk(
        0,
        0,
        &Frame::identity(ifs.ambient_dim()),
        &mut prefix,
        &mut center,
        &mut out,
    )?;
    Ok(out)
}

struct SampleWalker<'a, T> {
    ifs: &'a Ifs<T>,
    sample: &'a PercolationSample,
    alive: &'a [Vec<bool>],
    trig: Vec<(T, T)>,
    upper: T,
    c0: T,
}

impl<T: Scalar> SampleWalker<'_, T> {
    fn walk(
        &self,
        k: usize,
        i: usize,
        frame: &Frame<T>,
        prefix: &mut Vec<u32>,
        center: &mut [T],
        out: &mut StoppingSet<T>,
    ) -> Result<()> {
        if self.c0 * frame.ratio < self.upper {
            frame.apply_into(&self.ifs.ball().center, center);
            out.push(prefix, center, self.ifs.ball().radius * frame.ratio);
            return Ok(());
        }
        if k == self.sample.depth() {
            return Err(Error::DepthMismatch {
                required: k + 1,
                available: k,
            });
        }
        let mut child = Frame::identity(self.ifs.ambient_dim());
        for c in self.sample.children(k, i) {
            if !self.alive[k + 1][c] {
                continue;
            }
            let s = self.sample.level(k + 1)[c].symbol as usize;
            let (cs, sn) = self.trig[s];
            frame.compose_into(&self.ifs.maps()[s], cs, sn, &mut child);
            prefix.push(s as u32);
            self.walk(k + 1, c, &child, prefix, center, out)?;
            prefix.pop();
        }
        Ok(())
    }
}

/// Disks of every retained node at level `k` of a sample (not pruned).
pub fn level_disks<T: Scalar>(
    ifs: &Ifs<T>,
    sample: &PercolationSample,
    k: usize,
) -> Result<DiskSet<T>> {
    if k > sample.depth() {
        return Err(Error::DepthMismatch {
            required: k,
            available: sample.depth(),
        });
    }
    let dim = ifs.ambient_dim();
    let trig = map_trig(ifs);
    let mut frames: Vec<Frame<T>> = vec![Frame::identity(dim); sample.level(0).len()];
    for level in 1..=k {
        frames = sample
            .level(level)
            .iter()
            .map(|n| {
                let s = n.symbol as usize;
                let mut f = Frame::identity(dim);
                frames[n.parent as usize].compose_into(
                    &ifs.maps()[s],
                    trig[s].0,
                    trig[s].1,
                    &mut f,
                );
                f
            })
            .collect();
    }
    let mut disks = DiskSet::with_capacity(dim, frames.len());
    let mut c = vec![T::zero(); dim];
    for f in &frames {
        f.apply_into(&ifs.ball().center, &mut c);
        disks.push(&c, ifs.ball().radius * f.ratio);
    }
    Ok(disks)
}

pub fn count_slice<T: Scalar>(
    source: CellSource<'_, T>,
    direction: &Direction<T>,
    x: T,
    rho: T,
) -> Result<SliceCount<T>> {
    direction.check(source.ifs().ambient_dim())?;
    let cover = source.cover(rho)?;
    let count = cover
        .disks()
        .iter()
        .filter(|(c, r)| (direction.project(c) - x).abs() <= *r)
        .count();
    Ok(SliceCount { x, rho, count })
}

/// Slice indices for a ladder of scales, sharing one direction.
#[derive(Clone, Debug)]
pub struct SliceCovers<T> {
    scales: Vec<T>,
    indices: Vec<SliceIndex<T>>,
}

impl<T: Scalar> SliceCovers<T> {
    pub fn build(
        source: CellSource<'_, T>,
        direction: &Direction<T>,
        scales: &[T],
    ) -> Result<Self> {
        direction.check(source.ifs().ambient_dim())?;
        let indices = scales
            .par_iter()
            .map(|&rho| {
                source
                    .cover(rho)
                    .map(|c| SliceIndex::new(c.disks(), direction))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            scales: scales.to_vec(),
            indices,
        })
    }

    pub fn scales(&self) -> &[T] {
        &self.scales
    }

    pub fn index(&self, j: usize) -> &SliceIndex<T> {
        &self.indices[j]
    }

    /// `N(x, ρ)` for every scale.
    pub fn counts(&self, x: T) -> Vec<u64> {
        self.indices.iter().map(|idx| idx.count(x) as u64).collect()
    }

    pub fn estimate(&self, x: T) -> Result<DimEstimate<T>> {
        fit_box_dimension(&self.scales, &self.counts(x))
    }
}

/// Slope of `log N(x, ρ)` against `log(1/ρ)`.
pub fn section_dim<T: Scalar>(
    source: CellSource<'_, T>,
    direction: &Direction<T>,
    x: T,
    scales: &[T],
) -> Result<DimEstimate<T>> {
    if scales.len() < MIN_SCALES {
        return Err(Error::InsufficientData {
            usable: scales.len(),
            needed: MIN_SCALES,
        });
    }
    SliceCovers::build(source, direction, scales)?.estimate(x)
}

/// Length of the union of projected cylinder disks at scale `rho`.
pub fn projection_measure<T: Scalar>(
    source: CellSource<'_, T>,
    direction: &Direction<T>,
    rho: T,
) -> Result<T> {
    direction.check(source.ifs().ambient_dim())?;
    let cover = source.cover(rho)?;
    Ok(union_length(
        SliceIndex::new(cover.disks(), direction).intervals(),
    ))
}

/// [`projection_measure`] for several directions, sharing one cover.
pub fn projection_measures<T: Scalar>(
    source: CellSource<'_, T>,
    directions: &[Direction<T>],
    rho: T,
) -> Result<Vec<T>> {
    for d in directions {
        d.check(source.ifs().ambient_dim())?;
    }
    let cover = source.cover(rho)?;
    Ok(directions
        .par_iter()
        .map(|d| union_length(SliceIndex::new(cover.disks(), d).intervals()))
        .collect())
}

/// Uniform grid of cell midpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    pub points: Vec<T>,
    pub cell_length: T,
}

impl<T: Scalar> Grid<T> {
    pub fn uniform(lo: T, hi: T, n: usize) -> Result<Self> {
        if n == 0 || !(hi > lo) {
            return Err(Error::Parameter(format!(
                "empty grid [{lo}, {hi}] with {n} points"
            )));
        }
        let h = (hi - lo) / T::from_usize_lossy(n);
        let half = T::lit(0.5);
        Ok(Self {
            points: (0..n)
                .map(|j| lo + (T::from_usize_lossy(j) + half) * h)
                .collect(),
            cell_length: h,
        })
    }

    /// `n` cells across the projection of the enclosing ball, trimmed by `trim` at each end.
    pub fn across_ball(ifs: &Ifs<T>, direction: &Direction<T>, n: usize, trim: T) -> Result<Self> {
        let c = direction.project(&ifs.ball().center);
        let r = ifs.ball().radius;
        Self::uniform(c - r + trim, c + r - trim, n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfilePoint<T> {
    pub x: T,
    pub counts: Vec<u64>,
    /// `None` when fewer than three scales have a non-zero count.
    pub estimate: Option<DimEstimate<T>>,
    pub qualifies: bool,
}

/// Which offsets carry sections of dimension above `dim − 1 − ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationProfile<T> {
    pub direction: Direction<T>,
    pub epsilon: T,
    pub dimension: T,
    pub threshold: T,
    pub scales: Vec<T>,
    pub cell_length: T,
    pub points: Vec<ProfilePoint<T>>,
    /// Offsets with `N(x, ρ_min) > 0`; the denominator of the fraction.
    pub supported: usize,
    pub qualifying: usize,
    pub qualifying_fraction: T,
    pub qualifying_length: T,
}

pub fn conservation_profile<T: Scalar>(
    source: CellSource<'_, T>,
    direction: &Direction<T>,
    epsilon: T,
    grid: &Grid<T>,
    scales: &[T],
) -> Result<ConservationProfile<T>> {
    let dimension = source.dimension()?;
    if dimension <= T::one() {
        return Err(Error::Parameter(format!(
            "dimension {dimension} does not exceed the projection rank 1"
        )));
    }
    if scales.len() < MIN_SCALES {
        return Err(Error::InsufficientData {
            usable: scales.len(),
            needed: MIN_SCALES,
        });
    }
    let threshold = dimension - T::one() - epsilon;
    let covers = SliceCovers::build(source, direction, scales)?;
    let finest = (0..scales.len())
        .min_by(|&a, &b| scales[a].partial_cmp(&scales[b]).expect("finite scales"))
        .expect("non-empty scales");
    let points: Vec<ProfilePoint<T>> = grid
        .points
        .par_iter()
        .map(|&x| {
            let counts = covers.counts(x);
            let estimate = fit_box_dimension(scales, &counts).ok();
            let qualifies = estimate.as_ref().is_some_and(|e| e.slope > threshold);
            ProfilePoint {
                x,
                counts,
                estimate,
                qualifies,
            }
        })
        .collect();
    let supported = points.iter().filter(|p| p.counts[finest] > 0).count();
    let qualifying = points
        .iter()
        .filter(|p| p.qualifies && p.counts[finest] > 0)
        .count();
    let qualifying_fraction = if supported == 0 {
        T::zero()
    } else {
        T::from_usize_lossy(qualifying) / T::from_usize_lossy(supported)
    };
    Ok(ConservationProfile {
        direction: direction.clone(),
        epsilon,
        dimension,
        threshold,
        scales: scales.to_vec(),
        cell_length: grid.cell_length,
        points,
        supported,
        qualifying,
        qualifying_fraction,
        qualifying_length: grid.cell_length * T::from_usize_lossy(qualifying),
    })
}

/// Outcome of probing sections with standard percolation.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult<T> {
    pub alpha: f64,
    pub depth: usize,
    pub x_grid: Vec<T>,
    /// `hits[trial][j]`: some retained depth-`depth` disk meets `L_{x_j}`.
    pub hits: Vec<Vec<bool>>,
    pub frequencies: Vec<f64>,
}

/// Samples standard(α) percolation `trials` times (trial `j` with seed
/// `derive_seed(seed, j)`, unconditioned) and records which slices it meets at `depth`.
pub fn probe_sections<T: Scalar>(
    ifs: &Ifs<T>,
    alpha: f64,
    direction: &Direction<T>,
    x_grid: &[T],
    depth: usize,
    trials: usize,
    seed: u64,
) -> Result<ProbeResult<T>> {
    direction.check(ifs.ambient_dim())?;
    let law = standard_law(ifs, alpha)?;
    percolation_dimension(&law, ifs)?;
    let m = ifs.len();
    let hits = (0..trials)
        .into_par_iter()
        .map(|j| {
            let sample = sample_tree(&law, m, depth, derive_seed(seed, j as u64))?;
            let idx = SliceIndex::new(&level_disks(ifs, &sample, depth)?, direction);
            Ok(x_grid.iter().map(|&x| idx.count(x) > 0).collect())
        })
        .collect::<Result<Vec<Vec<bool>>>>()?;
    let frequencies = (0..x_grid.len())
        .map(|j| hits.iter().filter(|h| h[j]).count() as f64 / trials.max(1) as f64)
        .collect();
    Ok(ProbeResult {
        alpha,
        depth,
        x_grid: x_grid.to_vec(),
        hits,
        frequencies,
    })
}

/// First and last offsets in `xs` whose slice meets at most `max_count` disks.
/// Any disk met by a low-count offset between them, with projected width at least
/// their spread, is met by one of the two.
pub fn low_count_endpoints<T: Scalar>(
    index: &SliceIndex<T>,
    xs: &[T],
    max_count: usize,
) -> Option<(T, T)> {
    let mut low = xs.iter().copied().filter(|&x| index.count(x) <= max_count);
    let first = low.next()?;
    let last = low.last().unwrap_or(first);
    Some((first, last))
}

/// Slope of `log(#level-k nodes with a descendant at the final depth)` against
/// `k·log(1/r)`, for an equal-ratio system of ratio `ratio`.
pub fn surviving_cell_dimension<T: Scalar>(
    sample: &PercolationSample,
    ratio: T,
    levels: RangeInclusive<usize>,
) -> Result<DimEstimate<T>> {
    if *levels.end() > sample.depth() {
        return Err(Error::DepthMismatch {
            required: *levels.end(),
            available: sample.depth(),
        });
    }
    let pruned = sample.pruned_counts();
    let scales: Vec<T> = levels.clone().map(|k| ratio.powi(k as i32)).collect();
    let counts: Vec<u64> = levels.map(|k| pruned[k] as u64).collect();
    fit_box_dimension(&scales, &counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::Similarity;
    use crate::percolation::OffspringLaw;

    fn grid_ifs(m: usize, keep: impl Fn(usize, usize) -> bool) -> Ifs<f64> {
        let r = 1.0 / m as f64;
        let mut maps = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if keep(i, j) {
                    maps.push(Similarity::homothety(r, vec![i as f64 * r, j as f64 * r]).unwrap());
                }
            }
        }
        Ifs::new(maps).unwrap()
    }

    #[test]
    fn direction_reduction() {
        let d = Direction::planar(std::f64::consts::PI + 0.3);
        assert!((d.angle().unwrap() - 0.3).abs() < 1e-12);
        assert!((norm(d.unit()) - 1.0).abs() < 1e-12);
        let v = Direction::from_vector(vec![3.0, 4.0]).unwrap();
        assert_eq!(v.unit(), &[0.6, 0.8]);
        assert!(Direction::from_vector(vec![0.0, 0.0]).is_err());
        assert_eq!(
            Direction::<f64>::axis(3, 2).unwrap().unit(),
            &[0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn unit_square_center_slice_meets_all_depth_one_disks() {
        let sq = grid_ifs(2, |_, _| true);
        let dir = Direction::planar(0.0);
        let n = count_slice(CellSource::Full(&sq), &dir, 0.5, 0.5).unwrap();
        assert_eq!(n.count, 4);
        let n = count_slice(CellSource::Full(&sq), &dir, 3.0, 0.5).unwrap();
        assert_eq!(n.count, 0);
    }

    #[test]
    fn slice_index_matches_linear_scan() {
        let carpet = grid_ifs(3, |i, j| !(i == 1 && j == 1));
        let dir = Direction::planar(0.4);
        let cover = stopping_set(&carpet, 0.01).unwrap();
        let idx = SliceIndex::new(cover.disks(), &dir);
        for k in 0..50 {
            let x = -0.3 + 1.6 * k as f64 / 49.0;
            let scan: Vec<usize> = cover
                .disks()
                .iter()
                .enumerate()
                .filter(|(_, (c, r))| (dir.project(c) - x).abs() <= *r)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(idx.hits(x), scan);
            assert_eq!(idx.count(x), scan.len());
        }
    }

    #[test]
    fn full_square_sections_have_dimension_one() {
        let sq = grid_ifs(2, |_, _| true);
        let scales: Vec<f64> = (3..=9).map(|k| 2f64.powi(-k)).collect();
        let dir = Direction::planar(0.0);
        // x·2^k stays a fixed distance from column edges, so N = c·2^k exactly.
        for x in [1.0 / 3.0, 0.5, 2.0 / 3.0] {
            let est = section_dim(CellSource::Full(&sq), &dir, x, &scales).unwrap();
            assert!((est.slope - 1.0).abs() < 0.05, "x = {x}: {}", est.slope);
        }
        // Elsewhere N/2^k ∈ {1, 2}; least squares over k = 3..9 moves the slope by
        // at most (1 + 2 + 3) / 28.
        for k in 1..40 {
            let x = k as f64 / 40.0 + 0.0031;
            let est = section_dim(CellSource::Full(&sq), &dir, x, &scales).unwrap();
            assert!(
                (est.slope - 1.0).abs() <= 6.0 / 28.0 + 1e-9,
                "x = {x}: {}",
                est.slope
            );
        }
        assert!(matches!(
            section_dim(CellSource::Full(&sq), &dir, 5.0, &scales),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn projection_of_full_square() {
        let sq = grid_ifs(2, |_, _| true);
        let rho = 2f64.powi(-6);
        let len = projection_measure(CellSource::Full(&sq), &Direction::planar(0.0), rho).unwrap();
        assert!((len - 1.0).abs() <= 2.0 * rho, "{len}");
        let empty = PercolationSample::empty(OffspringLaw::Deterministic, 4, 0);
        let src = CellSource::Sample {
            ifs: &sq,
            sample: &empty,
        };
        assert_eq!(
            projection_measure(src, &Direction::planar(0.0), rho).unwrap(),
            0.0
        );
    }

    #[test]
    fn shared_cover_matches_single_direction() {
        let sq = grid_ifs(3, |i, j| i != 1 || j != 1);
        let dirs: Vec<Direction<f64>> = (0..5).map(|j| Direction::planar(0.4 * j as f64)).collect();
        let many = projection_measures(CellSource::Full(&sq), &dirs, 0.02).unwrap();
        for (d, m) in dirs.iter().zip(many) {
            assert_eq!(
                projection_measure(CellSource::Full(&sq), d, 0.02).unwrap(),
                m
            );
        }
    }

    #[test]
    fn deterministic_sample_cover_equals_full_cover() {
        let sq = grid_ifs(3, |i, j| (i + j) % 2 == 0);
        let full = sample_tree(&OffspringLaw::Deterministic, sq.len(), 5, 1).unwrap();
        let src = CellSource::Sample {
            ifs: &sq,
            sample: &full,
        };
        let a = src.cover(0.01).unwrap();
        let b = stopping_set(&sq, 0.01).unwrap();
        assert_eq!(a.to_words(), b.to_words());
        assert!(matches!(src.cover(1e-4), Err(Error::DepthMismatch { .. })));
    }

    #[test]
    fn level_disks_match_cylinders() {
        let ifs: Ifs<f64> = Ifs::new(vec![
            Similarity::new(0.5, 1.0, vec![0.0, 0.0]).unwrap(),
            Similarity::new(0.5, 1.0, vec![1.0, 0.0]).unwrap(),
            Similarity::new(0.5, 1.0, vec![0.5, 0.8]).unwrap(),
        ])
        .unwrap();
        let s = sample_tree(&OffspringLaw::Uniform { p: 0.8 }, 3, 4, 2).unwrap();
        let disks = level_disks(&ifs, &s, 4).unwrap();
        for (i, w) in s.words_at(4).iter().enumerate() {
            let cyl = ifs.cylinder(w).unwrap();
            assert!(crate::scalar::distance(disks.center(i), &cyl.disk.center) < 1e-12);
            assert!((disks.radius(i) - cyl.disk.radius).abs() < 1e-15);
        }
    }

    #[test]
    fn probe_without_deletion_hits_every_supported_slice() {
        let sq = grid_ifs(2, |_, _| true);
        let dir = Direction::planar(0.0);
        let xs = [0.2, 0.5, 0.9, 2.0];
        let res = probe_sections(&sq, 0.0, &dir, &xs, 5, 4, 11).unwrap();
        assert_eq!(res.frequencies, vec![1.0, 1.0, 1.0, 0.0]);
        assert!(probe_sections(&sq, 2.5, &dir, &xs, 5, 4, 11).is_err());
    }

    #[test]
    fn low_count_endpoints_cover_intermediate_hits() {
        let carpet = grid_ifs(3, |i, j| !(i == 1 && j == 1));
        let rho = 3f64.powi(-3);
        let idx = SliceIndex::new(
            stopping_set(&carpet, rho).unwrap().disks(),
            &Direction::planar(0.0),
        );
        let xs: Vec<f64> = (0..40).map(|k| 0.41 + rho * k as f64 / 39.0).collect();
        let (x1, x2) = low_count_endpoints(&idx, &xs, 1000).unwrap();
        let ends: Vec<usize> = idx.hits(x1).into_iter().chain(idx.hits(x2)).collect();
        for &x in &xs {
            for h in idx.hits(x) {
                assert!(ends.contains(&h));
            }
        }
    }
}
