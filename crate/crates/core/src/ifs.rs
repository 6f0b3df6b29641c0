//! Iterated function systems of contracting similarities.
//!
//! Symbols are stored 0-based (`0..m`); [`Word`]'s `Display` prints them 1-based.
//! The convex hull of a cylinder image is modelled by its enclosing disk: the image of
//! the system's enclosing ball under the composed map.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::percolation::{percolation_dimension, OffspringLaw};
use crate::scalar::{distance, wrap_angle, Scalar};

/// Default cap on the number of cylinders any single operation may materialize.
pub const DEFAULT_WORD_BUDGET: u64 = 5_000_000;

/// Relative slack used for ball containment checks.
const CONTAINMENT_SLACK: f64 = 1e-9;

/// Radius used when every map shares one fixed point.
const RADIUS_FLOOR: f64 = 1e-12;

/// Rotation-and-scaling part applied to `x`, written into `out`.
#[inline]
fn rotate_scale<T: Scalar>(ratio: T, cos: T, sin: T, x: &[T], out: &mut [T]) {
    if x.len() == 2 {
        out[0] = ratio * (cos * x[0] - sin * x[1]);
        out[1] = ratio * (sin * x[0] + cos * x[1]);
    } else {
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = ratio * xi;
        }
    }
}

/// A contracting similarity `x ↦ r·R_θ·x + a`.
///
/// Rotations are only meaningful in the plane; in any other dimension the angle must be
/// zero (axis-aligned homotheties).
#[derive(Clone, Debug, PartialEq)]
pub struct Similarity<T> {
    ratio: T,
    angle: T,
    translation: Vec<T>,
}

impl<T: Scalar> Similarity<T> {
    pub fn new(ratio: T, angle: T, translation: Vec<T>) -> Result<Self> {
        if !(ratio > T::zero() && ratio < T::one()) {
            return Err(Error::InvalidMap(format!("ratio {ratio} not in (0, 1)")));
        }
        if translation.is_empty() {
            return Err(Error::InvalidMap("empty translation".into()));
        }
        if !angle.is_finite() || translation.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidMap("non-finite parameter".into()));
        }
        if translation.len() != 2 && angle != T::zero() {
            return Err(Error::InvalidMap(format!(
                "rotation angle {angle} given for a {}-dimensional map",
                translation.len()
            )));
        }
        Ok(Self::from_parts(ratio, angle, translation))
    }

    pub fn homothety(ratio: T, translation: Vec<T>) -> Result<Self> {
        Self::new(ratio, T::zero(), translation)
    }

    pub(crate) fn from_parts(ratio: T, angle: T, translation: Vec<T>) -> Self {
        Self {
            ratio,
            angle: wrap_angle(angle),
            translation,
        }
    }

    pub fn ratio(&self) -> T {
        self.ratio
    }

    /// Rotation angle in `[0, 2π)`.
    pub fn angle(&self) -> T {
        self.angle
    }

    pub fn translation(&self) -> &[T] {
        &self.translation
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    /// Applies the linear part `r·R_θ`.
    pub fn linear(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); x.len()];
        rotate_scale(self.ratio, self.angle.cos(), self.angle.sin(), x, &mut out);
        out
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut out = self.linear(x);
        for (o, &a) in out.iter_mut().zip(&self.translation) {
            *o += a;
        }
        out
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Self) -> Self {
        Self::from_parts(
            self.ratio * inner.ratio,
            self.angle + inner.angle,
            self.apply(&inner.translation),
        )
    }

    /// The unique point with `f(x) = x`.
    pub fn fixed_point(&self) -> Vec<T> {
        let a = &self.translation;
        if a.len() == 2 {
            // (I - rR)^{-1} for R = [[c, -s], [s, c]].
            let p = T::one() - self.ratio * self.angle.cos();
            let q = self.ratio * self.angle.sin();
            let det = p * p + q * q;
            vec![(p * a[0] - q * a[1]) / det, (q * a[0] + p * a[1]) / det]
        } else {
            a.iter().map(|&ai| ai / (T::one() - self.ratio)).collect()
        }
    }
}

/// Result of composing a word: the empty word yields the identity sentinel.
#[derive(Clone, Debug, PartialEq)]
pub enum Composition<T> {
    Identity,
    Map(Similarity<T>),
}

impl<T: Scalar> Composition<T> {
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        match self {
            Composition::Identity => x.to_vec(),
            Composition::Map(f) => f.apply(x),
        }
    }

    /// Scaling factor; `1` for the identity.
    pub fn ratio(&self) -> T {
        match self {
            Composition::Identity => T::one(),
            Composition::Map(f) => f.ratio(),
        }
    }

    pub fn angle(&self) -> T {
        match self {
            Composition::Identity => T::zero(),
            Composition::Map(f) => f.angle(),
        }
    }

    pub fn as_map(&self) -> Option<&Similarity<T>> {
        match self {
            Composition::Identity => None,
            Composition::Map(f) => Some(f),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Composition::Identity)
    }
}

/// A finite word over `0..m`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn new(symbols: Vec<u32>) -> Self {
        Self(symbols)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a word from 1-based symbols as written in the literature.
    pub fn from_one_based(symbols: &[usize]) -> Result<Self> {
        symbols
            .iter()
            .map(|&s| {
                if s == 0 {
                    Err(Error::InvalidWord {
                        symbol: 0,
                        arity: 0,
                    })
                } else {
                    Ok((s - 1) as u32)
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn symbols(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, symbol: u32) {
        self.0.push(symbol);
    }

    pub fn child(&self, symbol: u32) -> Self {
        let mut w = self.clone();
        w.push(symbol);
        w
    }

    pub fn is_prefix_of(&self, other: &[u32]) -> bool {
        other.starts_with(&self.0)
    }

    pub fn check(&self, arity: usize) -> Result<()> {
        match self.0.iter().find(|&&s| s as usize >= arity) {
            Some(&s) => Err(Error::InvalidWord {
                symbol: s as usize + 1,
                arity,
            }),
            None => Ok(()),
        }
    }
}

impl From<Vec<u32>> for Word {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{}", s + 1)?;
        }
        Ok(())
    }
}

/// Closed ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Scalar> Ball<T> {
    pub fn contains(&self, point: &[T]) -> bool {
        distance(&self.center, point) <= self.radius
    }

    /// Image under a similarity (again a ball).
    pub fn image(&self, f: &Similarity<T>) -> Self {
        Self {
            center: f.apply(&self.center),
            radius: self.radius * f.ratio(),
        }
    }
}

/// Flat storage for many disks of one dimension.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiskSet<T> {
    dim: usize,
    centers: Vec<T>,
    radii: Vec<T>,
}

impl<T: Scalar> DiskSet<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            centers: Vec::new(),
            radii: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        Self {
            dim,
            centers: Vec::with_capacity(n * dim),
            radii: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, center: &[T], radius: T) {
        debug_assert_eq!(center.len(), self.dim);
        self.centers.extend_from_slice(center);
        self.radii.push(radius);
    }

    pub fn extend(&mut self, other: DiskSet<T>) {
        self.centers.extend(other.centers);
        self.radii.extend(other.radii);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn center(&self, i: usize) -> &[T] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }

    pub fn radius(&self, i: usize) -> T {
        self.radii[i]
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[T], T)> + '_ {
        self.centers
            .chunks_exact(self.dim.max(1))
            .zip(self.radii.iter().copied())
    }

    /// Number of disks containing `point`.
    pub fn count_containing(&self, point: &[T]) -> usize {
        self.iter()
            .filter(|(c, r)| distance(c, point) <= *r)
            .count()
    }
}

/// Flat point storage.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Separation {
    SscVerified,
    OscAssumed,
    #[default]
    Unverified,
}

/// Descriptive metadata carried alongside a system.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metadata {
    pub name: Option<String>,
    pub labels: Vec<String>,
    /// Whether the rotation parts are declared to generate a dense subgroup.
    pub dense_rotations: Option<bool>,
    /// Whether every projection of the attractor is declared to equal that of its hull.
    /// The disk model grants this silently, so consumers surface it as a flag.
    pub hull_projection: Option<bool>,
}

/// An IFS of `m ≥ 2` contracting similarities together with an invariant ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Ifs<T> {
    maps: Vec<Similarity<T>>,
    dim: usize,
    ball: Ball<T>,
    separation: Separation,
    meta: Metadata,
}

impl<T: Scalar> Ifs<T> {
    pub fn new(maps: Vec<Similarity<T>>) -> Result<Self> {
        Self::check_maps(&maps)?;
        let ball = enclosing_ball(&maps);
        Self::with_ball(maps, ball)
    }

    /// Uses a caller-supplied invariant ball, which must satisfy `f_i(D) ⊆ D`.
    pub fn with_ball(maps: Vec<Similarity<T>>, ball: Ball<T>) -> Result<Self> {
        Self::check_maps(&maps)?;
        let dim = maps[0].dim();
        if ball.center.len() != dim {
            return Err(Error::InvalidIfs("ball dimension mismatch".into()));
        }
        let slack = T::one() + T::lit(CONTAINMENT_SLACK);
        for (i, f) in maps.iter().enumerate() {
            let reach = distance(&f.apply(&ball.center), &ball.center) + f.ratio() * ball.radius;
            if reach > ball.radius * slack {
                return Err(Error::InvalidIfs(format!(
                    "map {} sends the ball outside itself ({reach} > {})",
                    i + 1,
                    ball.radius
                )));
            }
        }
        Ok(Self {
            maps,
            dim,
            ball,
            separation: Separation::Unverified,
            meta: Metadata::default(),
        })
    }

    fn check_maps(maps: &[Similarity<T>]) -> Result<()> {
        if maps.len() < 2 {
            return Err(Error::InvalidIfs(format!(
                "need at least 2 maps, got {}",
                maps.len()
            )));
        }
        let dim = maps[0].dim();
        if maps.iter().any(|f| f.dim() != dim) {
            return Err(Error::InvalidIfs("maps of mixed dimension".into()));
        }
        Ok(())
    }

    pub fn with_separation(mut self, separation: Separation) -> Self {
        self.separation = separation;
        self
    }

    pub fn with_metadata(mut self, meta: Metadata) -> Self {
        self.meta = meta;
        self
    }

    pub fn maps(&self) -> &[Similarity<T>] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn ball(&self) -> &Ball<T> {
        &self.ball
    }

    pub fn separation(&self) -> Separation {
        self.separation
    }

    pub fn metadata(&self) -> &Metadata {
        &self.meta
    }

    pub fn ratios(&self) -> Vec<T> {
        self.maps.iter().map(Similarity::ratio).collect()
    }

    pub fn min_ratio(&self) -> T {
        self.maps
            .iter()
            .map(Similarity::ratio)
            .fold(T::one(), T::min)
    }

    /// Diameter proxy of the attractor, `2R₀`; stopping sets exist for `ρ < c₀`.
    pub fn c0(&self) -> T {
        self.ball.radius + self.ball.radius
    }

    /// `1 / min_i r_i`.
    pub fn c1(&self) -> T {
        T::one() / self.min_ratio()
    }

    /// Common ratio when all maps share it (1e-12 relative).
    pub fn equal_ratio(&self) -> Option<T> {
        let r = self.maps[0].ratio();
        let tol = T::lit(1e-12) * r;
        self.maps
            .iter()
            .all(|f| (f.ratio() - r).abs() <= tol)
            .then_some(r)
    }

    /// Common rotation angle when all maps share it (1e-12 absolute, modulo 2π).
    pub fn common_angle(&self) -> Option<T> {
        let a = self.maps[0].angle();
        let tol = T::lit(1e-12);
        self.maps
            .iter()
            .all(|f| {
                let d = (f.angle() - a).abs();
                d <= tol || (T::TAU() - d) <= tol
            })
            .then_some(a)
    }

    pub fn compose(&self, word: &Word) -> Result<Composition<T>> {
        compose(self, word)
    }

    pub fn cylinder(&self, word: &Word) -> Result<CylinderGeometry<T>> {
        let composed = compose(self, word)?;
        let ratio = composed.ratio();
        let disk = Ball {
            center: composed.apply(&self.ball.center),
            radius: self.ball.radius * ratio,
        };
        Ok(CylinderGeometry {
            word: word.clone(),
            diameter: disk.radius + disk.radius,
            composed,
            disk,
        })
    }

    /// Disks of all `m^depth` words of the given length, in lexicographic order.
    pub fn level(&self, depth: usize, budget: u64) -> Result<StoppingSet<T>> {
        let required = (self.len() as u128).saturating_pow(depth as u32);
        if required > u128::from(budget) {
            return Err(Error::BudgetExceeded { required, budget });
        }
        let rule = Rule::Depth(depth);
        let mut set = expand(self, rule, required as usize);
        set.rho = self.c0() * self.min_ratio().powi(depth as i32);
        Ok(set)
    }

    /// The `q`-th iterate system `{f_w : |w| = q}`, lexicographically ordered.
    /// It reuses this system's invariant ball, so cylinder geometry is unchanged.
    pub fn power_system(&self, q: usize, budget: u64) -> Result<Ifs<T>> {
        if q == 0 {
            return Err(Error::Parameter("power system needs q >= 1".into()));
        }
        let required = (self.len() as u128).saturating_pow(q as u32);
        if required > u128::from(budget) {
            return Err(Error::BudgetExceeded { required, budget });
        }
        let mut maps = Vec::with_capacity(required as usize);
        let mut word = vec![0u32; q];
        loop {
            if let Composition::Map(f) = compose(self, &Word::new(word.clone()))? {
                maps.push(f);
            }
            if !increment_word(&mut word, self.len() as u32) {
                break;
            }
        }
        let meta = Metadata {
            name: self.meta.name.as_ref().map(|n| format!("{n}^{q}")),
            labels: Vec::new(),
            ..self.meta.clone()
        };
        Ok(Ifs::with_ball(maps, self.ball.clone())?
            .with_separation(self.separation)
            .with_metadata(meta))
    }

    /// Checks the strong separation condition at a given depth: the depth-`depth`
    /// disks descending from distinct first symbols must be pairwise disjoint.
    pub fn check_ssc(&self, depth: usize, budget: u64) -> Result<bool> {
        if depth == 0 {
            return Ok(false);
        }
        let level = self.level(depth, budget)?;
        let disks = level.disks();
        let mut order: Vec<usize> = (0..level.len()).collect();
        order.sort_by(|&a, &b| {
            let ka = disks.center(a)[0] - disks.radius(a);
            let kb = disks.center(b)[0] - disks.radius(b);
            ka.partial_cmp(&kb).expect("finite centers")
        });
        let mut active: Vec<usize> = Vec::new();
        for &i in &order {
            let left = disks.center(i)[0] - disks.radius(i);
            active.retain(|&j| disks.center(j)[0] + disks.radius(j) >= left);
            for &j in &active {
                if level.word(i)[0] != level.word(j)[0]
                    && distance(disks.center(i), disks.center(j))
                        <= disks.radius(i) + disks.radius(j)
                {
                    return Ok(false);
                }
            }
            active.push(i);
        }
        Ok(true)
    }

    /// Marks the system SSC-verified when [`Ifs::check_ssc`] passes at `depth`.
    pub fn verify_ssc(mut self, depth: usize, budget: u64) -> Result<Self> {
        if self.check_ssc(depth, budget)? {
            self.separation = Separation::SscVerified;
            Ok(self)
        } else {
            Err(Error::InvalidIfs(format!(
                "depth-{depth} cylinder disks of distinct first-level pieces overlap"
            )))
        }
    }
}

/// Geometry of the cylinder of one word.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderGeometry<T> {
    pub word: Word,
    pub composed: Composition<T>,
    /// `2R₀ · ∏ r_{i_j}`.
    pub diameter: T,
    pub disk: Ball<T>,
}

/// Left-to-right composition `f_{i₁} ∘ ⋯ ∘ f_{i_k}`.
pub fn compose<T: Scalar>(ifs: &Ifs<T>, word: &Word) -> Result<Composition<T>> {
    word.check(ifs.len())?;
    let mut symbols = word.symbols().iter();
    let Some(&first) = symbols.next() else {
        return Ok(Composition::Identity);
    };
    let mut acc = ifs.maps[first as usize].clone();
    for &s in symbols {
        acc = acc.compose(&ifs.maps[s as usize]);
    }
    Ok(Composition::Map(acc))
}

/// Invariant ball: centered at the mean of the fixed points, with radius
/// `max_i |f_i(c) − c| / (1 − r_i)` inflated by `1e-9` relative.
pub fn enclosing_ball<T: Scalar>(maps: &[Similarity<T>]) -> Ball<T> {
    let dim = maps.first().map_or(0, Similarity::dim);
    let mut center = vec![T::zero(); dim];
    for f in maps {
        for (c, p) in center.iter_mut().zip(f.fixed_point()) {
            *c += p;
        }
    }
    let m = T::from_usize_lossy(maps.len().max(1));
    center.iter_mut().for_each(|c| *c /= m);
    let radius = maps
        .iter()
        .map(|f| distance(&f.apply(&center), &center) / (T::one() - f.ratio()))
        .fold(T::zero(), T::max);
    let radius = (radius * (T::one() + T::lit(CONTAINMENT_SLACK))).max(T::lit(RADIUS_FLOOR));
    Ball { center, radius }
}

/// Composed map of a word prefix, with the rotation cached as (cos, sin).
#[derive(Clone, Debug)]
pub(crate) struct Frame<T> {
    pub ratio: T,
    pub cos: T,
    pub sin: T,
    pub trans: Vec<T>,
}

impl<T: Scalar> Frame<T> {
    pub fn identity(dim: usize) -> Self {
        Self {
            ratio: T::one(),
            cos: T::one(),
            sin: T::zero(),
            trans: vec![T::zero(); dim],
        }
    }

    /// Writes `self ∘ f` into `out`.
    #[inline]
    pub fn compose_into(&self, f: &Similarity<T>, f_cos: T, f_sin: T, out: &mut Frame<T>) {
        out.ratio = self.ratio * f.ratio;
        out.cos = self.cos * f_cos - self.sin * f_sin;
        out.sin = self.sin * f_cos + self.cos * f_sin;
        rotate_scale(
            self.ratio,
            self.cos,
            self.sin,
            &f.translation,
            &mut out.trans,
        );
        for (o, &t) in out.trans.iter_mut().zip(&self.trans) {
            *o += t;
        }
    }

    #[inline]
    pub fn apply_into(&self, x: &[T], out: &mut [T]) {
        rotate_scale(self.ratio, self.cos, self.sin, x, out);
        for (o, &t) in out.iter_mut().zip(&self.trans) {
            *o += t;
        }
    }
}

/// Per-map (cos, sin) of the rotation angles.
pub(crate) fn map_trig<T: Scalar>(ifs: &Ifs<T>) -> Vec<(T, T)> {
    ifs.maps
        .iter()
        .map(|f| (f.angle().cos(), f.angle().sin()))
        .collect()
}

#[derive(Clone, Copy)]
enum Rule<T> {
    /// Stop at the first word with diameter below the bound.
    Diameter(T),
    Depth(usize),
}

/// Prefix-free cover of symbolic space by words, with their disks.
///
/// For stopping sets every word satisfies `ρ ≤ diameter < c₁ρ`; the list is
/// lexicographically ordered.
#[derive(Clone, Debug)]
pub struct StoppingSet<T> {
    rho: T,
    c1: T,
    offsets: Vec<usize>,
    symbols: Vec<u32>,
    disks: DiskSet<T>,
}

impl<T: Scalar> StoppingSet<T> {
    pub(crate) fn empty(dim: usize, rho: T, c1: T) -> Self {
        Self {
            rho,
            c1,
            offsets: vec![0],
            symbols: Vec::new(),
            disks: DiskSet::new(dim),
        }
    }

    pub(crate) fn push(&mut self, word: &[u32], center: &[T], radius: T) {
        self.symbols.extend_from_slice(word);
        self.offsets.push(self.symbols.len());
        self.disks.push(center, radius);
    }

    fn append(&mut self, other: StoppingSet<T>) {
        let base = self.symbols.len();
        self.offsets
            .extend(other.offsets.iter().skip(1).map(|&o| o + base));
        self.symbols.extend(other.symbols);
        self.disks.extend(other.disks);
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn c1(&self) -> T {
        self.c1
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn word(&self, i: usize) -> &[u32] {
        &self.symbols[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn words(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.len()).map(move |i| self.word(i))
    }

    pub fn to_words(&self) -> Vec<Word> {
        self.words().map(|w| Word::new(w.to_vec())).collect()
    }

    pub fn disks(&self) -> &DiskSet<T> {
        &self.disks
    }

    pub fn diameter(&self, i: usize) -> T {
        self.disks.radius(i) + self.disks.radius(i)
    }

    pub fn max_word_len(&self) -> usize {
        (0..self.len())
            .map(|i| self.offsets[i + 1] - self.offsets[i])
            .max()
            .unwrap_or(0)
    }

    /// Index of the word that is a prefix of `sequence`, if any.
    pub fn find_prefix(&self, sequence: &[u32]) -> Option<usize> {
        // Words are sorted and prefix-free, so the match is the last word ≤ sequence.
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            let w = self.word(mid);
            let n = w.len().min(sequence.len());
            if w[..n] <= sequence[..n] {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        (lo > 0)
            .then(|| lo - 1)
            .filter(|&i| sequence.starts_with(self.word(i)))
    }
}

struct Expander<'a, T> {
    ifs: &'a Ifs<T>,
    trig: Vec<(T, T)>,
    rule: Rule<T>,
    c0: T,
    frames: Vec<Frame<T>>,
    prefix: Vec<u32>,
    scratch: Vec<T>,
    out: StoppingSet<T>,
}

impl<'a, T: Scalar> Expander<'a, T> {
    fn new(ifs: &'a Ifs<T>, rule: Rule<T>, root: Frame<T>, prefix: Vec<u32>) -> Self {
        let rho = match rule {
            Rule::Diameter(upper) => upper / ifs.c1(),
            Rule::Depth(_) => T::zero(),
        };
        Self {
            ifs,
            trig: map_trig(ifs),
            rule,
            c0: ifs.c0(),
            frames: vec![root],
            prefix,
            scratch: vec![T::zero(); ifs.dim],
            out: StoppingSet::empty(ifs.dim, rho, ifs.c1()),
        }
    }

    fn stops(&self, depth: usize) -> bool {
        match self.rule {
            Rule::Diameter(upper) => self.c0 * self.frames[depth].ratio < upper,
            Rule::Depth(n) => self.prefix.len() >= n,
        }
    }

    fn run(&mut self, depth: usize) {
        if self.stops(depth) {
            let frame = &self.frames[depth];
            frame.apply_into(&self.ifs.ball.center, &mut self.scratch);
            self.out.symbols.extend_from_slice(&self.prefix);
            self.out.offsets.push(self.out.symbols.len());
            self.out
                .disks
                .push(&self.scratch, self.ifs.ball.radius * frame.ratio);
            return;
        }
        if self.frames.len() <= depth + 1 {
            self.frames.push(Frame::identity(self.ifs.dim));
        }
        for i in 0..self.ifs.len() {
            let (head, tail) = self.frames.split_at_mut(depth + 1);
            let (c, s) = self.trig[i];
            head[depth].compose_into(&self.ifs.maps[i], c, s, &mut tail[0]);
            self.prefix.push(i as u32);
            self.run(depth + 1);
            self.prefix.pop();
        }
    }
}

fn expand<T: Scalar>(ifs: &Ifs<T>, rule: Rule<T>, expected: usize) -> StoppingSet<T> {
    let mut root = Expander::new(ifs, rule, Frame::identity(ifs.dim), Vec::new());
    if root.stops(0) || expected < 50_000 {
        root.run(0);
        return root.out;
    }
    // Split at the first level; concatenating in symbol order keeps the result canonical.
    let trig = map_trig(ifs);
    let parts: Vec<StoppingSet<T>> = (0..ifs.len())
        .into_par_iter()
        .map(|i| {
            let mut frame = Frame::identity(ifs.dim);
            let (c, s) = trig[i];
            Frame::identity(ifs.dim).compose_into(&ifs.maps[i], c, s, &mut frame);
            let mut sub = Expander::new(ifs, rule, frame, vec![i as u32]);
            sub.run(0);
            sub.out
        })
        .collect();
    let mut out = root.out;
    for p in parts {
        out.append(p);
    }
    out
}

/// Exact size of `Λ_ρ` without materializing it, memoized on ratio exponents.
fn stopping_set_size<T: Scalar>(ifs: &Ifs<T>, upper: T) -> u128 {
    let mut distinct: Vec<T> = Vec::new();
    let mut mult: Vec<u128> = Vec::new();
    for r in ifs.ratios() {
        match distinct.iter().position(|&d| d == r) {
            Some(j) => mult[j] += 1,
            None => {
                distinct.push(r);
                mult.push(1);
            }
        }
    }
    fn rec<T: Scalar>(
        exps: &mut Vec<u32>,
        diam: T,
        upper: T,
        distinct: &[T],
        mult: &[u128],
        memo: &mut HashMap<Vec<u32>, u128>,
    ) -> u128 {
        if diam < upper {
            return 1;
        }
        if let Some(&v) = memo.get(exps.as_slice()) {
            return v;
        }
        let mut total: u128 = 0;
        for j in 0..distinct.len() {
            exps[j] += 1;
            let sub = rec(exps, diam * distinct[j], upper, distinct, mult, memo);
            exps[j] -= 1;
            total = total.saturating_add(sub.saturating_mul(mult[j]));
        }
        memo.insert(exps.clone(), total);
        total
    }
    let mut exps = vec![0u32; distinct.len()];
    let mut memo = HashMap::new();
    rec(&mut exps, ifs.c0(), upper, &distinct, &mult, &mut memo)
}

/// `Λ_ρ` with the default word budget.
pub fn stopping_set<T: Scalar>(ifs: &Ifs<T>, rho: T) -> Result<StoppingSet<T>> {
    stopping_set_with_budget(ifs, rho, DEFAULT_WORD_BUDGET)
}

/// `Λ_ρ = {w : ρ ≤ |Φ[w]| < c₁ρ}` by depth-first expansion, `c₁ = 1/min r_i`.
pub fn stopping_set_with_budget<T: Scalar>(
    ifs: &Ifs<T>,
    rho: T,
    budget: u64,
) -> Result<StoppingSet<T>> {
    let c0 = ifs.c0();
    if !(rho > T::zero() && rho < c0) {
        return Err(Error::OutOfRange {
            what: "rho",
            value: rho.as_f64(),
            limit: c0.as_f64(),
        });
    }
    let upper = ifs.c1() * rho;
    let required = stopping_set_size(ifs, upper);
    if required > u128::from(budget) {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let mut set = expand(ifs, Rule::Diameter(upper), required as usize);
    set.rho = rho;
    Ok(set)
}

/// Number of words in the stopping set whose disk contains `point`.
pub fn overlap_count<T: Scalar>(stopping: &StoppingSet<T>, point: &[T]) -> usize {
    stopping.disks.count_containing(point)
}

/// Equal-rotation subsystem built from every ordering of a multiset of maps.
#[derive(Clone, Debug)]
pub struct Subsystem<T> {
    pub words: Vec<Word>,
    pub maps: Vec<Similarity<T>>,
    pub ratio: T,
    pub angle: T,
    /// Similarity dimension of the subsystem; `None` when it has a single map.
    pub dimension: Option<T>,
    ball: Ball<T>,
}

impl<T: Scalar> Subsystem<T> {
    /// The subsystem as an IFS sharing the parent's invariant ball.
    pub fn to_ifs(&self) -> Result<Ifs<T>> {
        Ifs::with_ball(self.maps.clone(), self.ball.clone())
    }
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 1..=u128::from(k) {
        acc = acc.checked_mul(u128::from(n) - u128::from(k) + j)? / j;
    }
    Some(acc)
}

/// Multinomial coefficient `(Σn)! / ∏ nᵢ!`, or `None` on overflow.
pub fn multinomial(counts: &[usize]) -> Option<u128> {
    let mut total: u64 = 0;
    let mut acc: u128 = 1;
    for &n in counts {
        total += n as u64;
        acc = acc.checked_mul(binomial(total, n as u64)?)?;
    }
    Some(acc)
}

/// Lexicographic successor of a multiset permutation; `false` after the last one.
fn next_permutation(v: &mut [u32]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len())
        .rev()
        .find(|&j| v[j] > v[i - 1])
        .expect("pivot");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn peres_shmerkin_subsystem<T: Scalar>(
    ifs: &Ifs<T>,
    occurrence_counts: &[usize],
) -> Result<Subsystem<T>> {
    peres_shmerkin_subsystem_with_budget(ifs, occurrence_counts, DEFAULT_WORD_BUDGET)
}

/// All distinct orderings of the multiset with `nᵢ` copies of `fᵢ`, composed.
/// Every resulting map has ratio `∏ rᵢ^{nᵢ}` and angle `Σ nᵢθᵢ`.
pub fn peres_shmerkin_subsystem_with_budget<T: Scalar>(
    ifs: &Ifs<T>,
    occurrence_counts: &[usize],
    budget: u64,
) -> Result<Subsystem<T>> {
    if ifs.ambient_dim() != 2 {
        return Err(Error::Parameter(
            "equal-rotation subsystems need a planar IFS".into(),
        ));
    }
    if occurrence_counts.len() != ifs.len() {
        return Err(Error::Parameter(format!(
            "{} occurrence counts for {} maps",
            occurrence_counts.len(),
            ifs.len()
        )));
    }
    if occurrence_counts.iter().sum::<usize>() == 0 {
        return Err(Error::Parameter("occurrence counts sum to zero".into()));
    }
    let required = multinomial(occurrence_counts).unwrap_or(u128::MAX);
    if required > u128::from(budget) {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let mut symbols: Vec<u32> = occurrence_counts
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat_n(i as u32, n))
        .collect();
    let mut words = Vec::with_capacity(required as usize);
    let mut maps = Vec::with_capacity(required as usize);
    loop {
        let word = Word::new(symbols.clone());
        if let Composition::Map(f) = compose(ifs, &word)? {
            maps.push(f);
        }
        words.push(word);
        if !next_permutation(&mut symbols) {
            break;
        }
    }
    let ratio = maps[0].ratio();
    let angle = maps[0].angle();
    let dimension = if maps.len() >= 2 {
        let sub = Ifs::with_ball(maps.clone(), ifs.ball.clone())?;
        Some(percolation_dimension(&OffspringLaw::Deterministic, &sub)?)
    } else {
        None
    };
    Ok(Subsystem {
        words,
        maps,
        ratio,
        angle,
        dimension,
        ball: ifs.ball.clone(),
    })
}

pub fn attractor_points<T: Scalar>(ifs: &Ifs<T>, depth: usize) -> Result<PointCloud<T>> {
    attractor_points_with_budget(ifs, depth, DEFAULT_WORD_BUDGET)
}

/// Images of the ball center under every depth-`depth` composition.
pub fn attractor_points_with_budget<T: Scalar>(
    ifs: &Ifs<T>,
    depth: usize,
    budget: u64,
) -> Result<PointCloud<T>> {
    let level = ifs.level(depth, budget)?;
    Ok(PointCloud {
        dim: ifs.dim,
        coords: level.disks.centers,
    })
}

/// Advances a fixed-length word lexicographically; `false` on wrap-around.
pub(crate) fn increment_word(word: &mut [u32], arity: u32) -> bool {
    for s in word.iter_mut().rev() {
        *s += 1;
        if *s < arity {
            return true;
        }
        *s = 0;
    }
    false
}
