//! Fractal percolation on symbolic space.
//!
//! Offspring of every node are drawn from `CounterRng::new(seed, hash(word))`, so a
//! sample is a pure function of `(law, arity, depth, seed)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{Ifs, Metadata, Separation, Similarity, Word};
use crate::rng::{child_hash, derive_seed, CounterRng, ROOT_HASH};
use crate::scalar::Scalar;

/// Default cap on the expected number of nodes in one sample.
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

const TABLE_SUM_TOL: f64 = 1e-12;
const CRITICAL_TOL: f64 = 1e-10;

/// Distribution of the retained-children vector `X ∈ {0,1}^m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OffspringLaw {
    /// Explicit `(mask, probability)` pairs; bit `i` of the mask retains symbol `i`.
    Table {
        arity: usize,
        entries: Vec<(u64, f64)>,
    },
    /// Independent retention with probability `r_i^α`.
    Standard { alpha: f64, retention: Vec<f64> },
    /// Independent retention with a common probability.
    Uniform { p: f64 },
    /// Every child retained.
    Deterministic,
}

impl OffspringLaw {
    pub fn table(arity: usize, entries: Vec<(u64, f64)>) -> Result<Self> {
        if arity == 0 || arity > 64 {
            return Err(Error::Parameter(format!(
                "table arity {arity} not in 1..=64"
            )));
        }
        let mut total = 0.0;
        for &(mask, p) in &entries {
            if arity < 64 && mask >> arity != 0 {
                return Err(Error::Parameter(format!(
                    "mask {mask:#b} has bits beyond arity {arity}"
                )));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("probability {p} not in [0, 1]")));
            }
            total += p;
        }
        if (total - 1.0).abs() > TABLE_SUM_TOL {
            return Err(Error::Parameter(format!(
                "table probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self::Table { arity, entries })
    }

    pub fn uniform(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!("probability {p} not in [0, 1]")));
        }
        Ok(Self::Uniform { p })
    }

    /// Fixed arity, if the law carries one.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Self::Table { arity, .. } => Some(*arity),
            Self::Standard { retention, .. } => Some(retention.len()),
            Self::Uniform { .. } | Self::Deterministic => None,
        }
    }

    fn check_arity(&self, m: usize) -> Result<()> {
        match self.arity() {
            Some(a) if a != m => Err(Error::Parameter(format!(
                "law has arity {a} but the system has {m} maps"
            ))),
            _ => Ok(()),
        }
    }

    /// `P(X_i = 1)` for each symbol.
    pub fn marginals(&self, m: usize) -> Vec<f64> {
        match self {
            Self::Table { arity, entries } => (0..*arity)
                .map(|i| {
                    entries
                        .iter()
                        .filter(|(mask, _)| mask >> i & 1 == 1)
                        .map(|&(_, p)| p)
                        .sum()
                })
                .collect(),
            Self::Standard { retention, .. } => retention.clone(),
            Self::Uniform { p } => vec![*p; m],
            Self::Deterministic => vec![1.0; m],
        }
    }

    pub fn mean_offspring(&self, m: usize) -> f64 {
        self.marginals(m).iter().sum()
    }

    /// Probability generating function of `#{i : X_i = 1}`.
    pub fn pgf(&self, m: usize, z: f64) -> f64 {
        match self {
            Self::Table { entries, .. } => entries
                .iter()
                .map(|&(mask, p)| p * z.powi(mask.count_ones() as i32))
                .sum(),
            Self::Standard { retention, .. } => {
                retention.iter().map(|&p| 1.0 - p + p * z).product()
            }
            Self::Uniform { p } => (1.0 - p + p * z).powi(m as i32),
            Self::Deterministic => z.powi(m as i32),
        }
    }

    /// Appends the retained symbols of one node, in increasing order.
    pub fn draw(&self, m: usize, rng: &mut CounterRng, out: &mut Vec<u32>) {
        match self {
            Self::Table { entries, .. } => {
                let u = rng.uniform();
                let mut acc = 0.0;
                // Falls back to the last entry if rounding leaves u above the total.
                let mut mask = entries.last().map_or(0, |e| e.0);
                for &(msk, p) in entries {
                    acc += p;
                    if u < acc {
                        mask = msk;
                        break;
                    }
                }
                out.extend((0..m as u32).filter(|&i| mask >> i & 1 == 1));
            }
            Self::Standard { retention, .. } => {
                for (i, &p) in retention.iter().enumerate() {
                    if rng.bernoulli(p) {
                        out.push(i as u32);
                    }
                }
            }
            Self::Uniform { p } => {
                for i in 0..m as u32 {
                    if rng.bernoulli(*p) {
                        out.push(i);
                    }
                }
            }
            Self::Deterministic => out.extend(0..m as u32),
        }
    }
}

/// Standard percolation with exponent `α`: symbol `i` is kept with probability `r_i^α`.
pub fn standard_law<T: Scalar>(ifs: &Ifs<T>, alpha: f64) -> Result<OffspringLaw> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("alpha = {alpha} must be >= 0")));
    }
    Ok(OffspringLaw::Standard {
        alpha,
        retention: ifs
            .ratios()
            .iter()
            .map(|r| r.as_f64().powf(alpha))
            .collect(),
    })
}

/// One node of a sampled tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Node {
    /// Index of the parent in the previous level.
    pub parent: u32,
    pub symbol: u32,
}

/// Retained words of a percolation tree, level by level, in lexicographic order.
/// Children of one parent are contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct PercolationSample {
    law: OffspringLaw,
    arity: usize,
    seed: u64,
    levels: Vec<Vec<Node>>,
    /// `offsets[k][i]..offsets[k][i+1]` indexes the children of node `i` of level `k`.
    offsets: Vec<Vec<u32>>,
}

impl PercolationSample {
    /// The empty tree (root deleted), useful as a neutral input.
    pub fn empty(law: OffspringLaw, arity: usize, seed: u64) -> Self {
        Self {
            law,
            arity,
            seed,
            levels: vec![Vec::new()],
            offsets: vec![vec![0]],
        }
    }

    pub fn law(&self) -> &OffspringLaw {
        &self.law
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &[Node] {
        &self.levels[k]
    }

    /// Children of node `i` of level `k` as an index range into level `k + 1`.
    pub fn children(&self, k: usize, i: usize) -> std::ops::Range<usize> {
        self.offsets[k][i] as usize..self.offsets[k][i + 1] as usize
    }

    /// Retained word counts per level, starting with the root.
    pub fn generation_counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn survived(&self) -> bool {
        !self.levels[self.depth()].is_empty()
    }

    pub fn word(&self, k: usize, mut i: usize) -> Word {
        let mut symbols = vec![0u32; k];
        for level in (1..=k).rev() {
            let node = self.levels[level][i];
            symbols[level - 1] = node.symbol;
            i = node.parent as usize;
        }
        Word::new(symbols)
    }

    pub fn words_at(&self, k: usize) -> Vec<Word> {
        (0..self.levels[k].len()).map(|i| self.word(k, i)).collect()
    }

    /// Base-`m` index of each level-`k` word; increasing.
    pub fn word_indices(&self, k: usize) -> Vec<u64> {
        let m = self.arity as u64;
        let mut prev: Vec<u64> = vec![0; self.levels[0].len()];
        for level in 1..=k {
            prev = self.levels[level]
                .iter()
                .map(|n| prev[n.parent as usize] * m + u64::from(n.symbol))
                .collect();
        }
        prev
    }

    /// `alive[k][i]`: node `i` of level `k` has a descendant at the final depth.
    pub fn alive(&self) -> Vec<Vec<bool>> {
        let depth = self.depth();
        let mut alive: Vec<Vec<bool>> = self.levels.iter().map(|l| vec![false; l.len()]).collect();
        alive[depth].iter_mut().for_each(|a| *a = true);
        for k in (1..=depth).rev() {
            let (upper, lower) = alive.split_at_mut(k);
            for (node, &a) in self.levels[k].iter().zip(&lower[0]) {
                if a {
                    upper[k - 1][node.parent as usize] = true;
                }
            }
        }
        alive
    }

    /// Per-level counts of nodes with a descendant at the final depth.
    pub fn pruned_counts(&self) -> Vec<usize> {
        self.alive()
            .iter()
            .map(|l| l.iter().filter(|&&a| a).count())
            .collect()
    }
}

/// Sum of `mean^k` for `k = 0..=depth`.
fn expected_nodes(mean: f64, depth: usize) -> f64 {
    (0..=depth).map(|k| mean.powi(k as i32)).sum()
}

pub fn sample_tree(
    law: &OffspringLaw,
    m: usize,
    depth: usize,
    seed: u64,
) -> Result<PercolationSample> {
    sample_tree_with_budget(law, m, depth, seed, DEFAULT_NODE_BUDGET)
}

/// Samples the retained tree to `depth`, level by level.
pub fn sample_tree_with_budget(
    law: &OffspringLaw,
    m: usize,
    depth: usize,
    seed: u64,
    budget: u64,
) -> Result<PercolationSample> {
    law.check_arity(m)?;
    let expected = expected_nodes(law.mean_offspring(m), depth);
    if expected > budget as f64 {
        return Err(Error::BudgetExceeded {
            required: expected.min(u128::MAX as f64) as u128,
            budget,
        });
    }
    let mut levels = vec![vec![Node {
        parent: 0,
        symbol: 0,
    }]];
    let mut offsets = Vec::with_capacity(depth + 1);
    let mut hashes = vec![ROOT_HASH];
    const CHUNK: usize = 2048;
    for _ in 0..depth {
        let parts: Vec<(Vec<Node>, Vec<u64>, Vec<u32>)> = hashes
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut nodes = Vec::new();
                let mut child_hashes = Vec::new();
                let mut counts = Vec::with_capacity(chunk.len());
                let mut buf = Vec::with_capacity(m);
                for (j, &h) in chunk.iter().enumerate() {
                    buf.clear();
                    law.draw(m, &mut CounterRng::new(seed, h), &mut buf);
                    let parent = (c * CHUNK + j) as u32;
                    counts.push(buf.len() as u32);
                    for &s in &buf {
                        nodes.push(Node { parent, symbol: s });
                        child_hashes.push(child_hash(h, s));
                    }
                }
                (nodes, child_hashes, counts)
            })
            .collect();
        let mut next = Vec::new();
        let mut next_hashes = Vec::new();
        let mut offs = Vec::with_capacity(hashes.len() + 1);
        offs.push(0u32);
        for (nodes, hs, counts) in parts {
            next.extend(nodes);
            next_hashes.extend(hs);
            for c in counts {
                offs.push(offs.last().copied().unwrap_or(0) + c);
            }
        }
        offsets.push(offs);
        levels.push(next);
        hashes = next_hashes;
    }
    offsets.push(vec![0; levels[depth].len() + 1]);
    Ok(PercolationSample {
        law: law.clone(),
        arity: m,
        seed,
        levels,
        offsets,
    })
}

/// Whether every prefix of `word` is retained in the tree of `(law, seed)`.
/// Walks only the word's path; agrees exactly with [`sample_tree`].
pub fn word_survives(law: &OffspringLaw, m: usize, seed: u64, word: &Word) -> Result<bool> {
    law.check_arity(m)?;
    word.check(m)?;
    let mut h = ROOT_HASH;
    let mut buf = Vec::with_capacity(m);
    for &s in word.symbols() {
        buf.clear();
        law.draw(m, &mut CounterRng::new(seed, h), &mut buf);
        if !buf.contains(&s) {
            return Ok(false);
        }
        h = child_hash(h, s);
    }
    Ok(true)
}

/// Rejection sampling of a tree that survives to `depth`. Attempt `j` uses seed
/// `derive_seed(seed, j)`; returns the sample and the number of attempts.
pub fn sample_surviving(
    law: &OffspringLaw,
    m: usize,
    depth: usize,
    seed: u64,
    max_attempts: u64,
) -> Result<(PercolationSample, u64)> {
    for j in 0..max_attempts {
        let s = sample_tree(law, m, depth, derive_seed(seed, j))?;
        if s.survived() {
            return Ok((s, j + 1));
        }
    }
    Err(Error::Extinct {
        attempts: max_attempts,
    })
}

/// Number of level-`k` words retained in both samples.
pub fn intersection_count(a: &PercolationSample, b: &PercolationSample, k: usize) -> usize {
    let (x, y) = (a.word_indices(k), b.word_indices(k));
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchingStats {
    pub mean_offspring: f64,
    pub extinction_prob: f64,
    pub survival_prob: f64,
}

/// Extinction probability as the limit of the PGF iterated from 0.
pub fn survival_probability(law: &OffspringLaw, m: usize) -> BranchingStats {
    let mean = law.mean_offspring(m);
    if mean <= 1.0 + CRITICAL_TOL {
        return BranchingStats {
            mean_offspring: mean,
            extinction_prob: 1.0,
            survival_prob: 0.0,
        };
    }
    let mut q = 0.0;
    for it in 0..10_000_000usize {
        let next = law.pgf(m, q);
        let delta = (next - q).abs();
        q = next;
        if it >= 200 && delta < 1e-13 {
            break;
        }
    }
    BranchingStats {
        mean_offspring: mean,
        extinction_prob: q,
        survival_prob: 1.0 - q,
    }
}

/// Root of `Σ w_i r_i^s = 1` on `[0, upper]` by bisection to machine resolution.
pub fn solve_dimension_equation<T: Scalar>(weights: &[T], ratios: &[T], upper: T) -> Result<T> {
    let phi = |s: T| {
        weights
            .iter()
            .zip(ratios)
            .fold(T::zero(), |acc, (&w, &r)| acc + w * r.powf(s))
            - T::one()
    };
    let mass = phi(T::zero()) + T::one();
    if phi(T::zero()) <= T::zero() {
        return Err(Error::UndefinedDimension {
            mean_offspring: mass.as_f64(),
        });
    }
    if phi(upper) > T::zero() {
        return Err(Error::Parameter(format!(
            "dimension equation has no root in [0, {upper}]"
        )));
    }
    let (mut lo, mut hi) = (T::zero(), upper);
    let two = T::lit(2.0);
    for _ in 0..300 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / two)
}

/// Solves `E(Σ X_i r_i^s) = 1`; requires a supercritical law.
pub fn percolation_dimension<T: Scalar>(law: &OffspringLaw, ifs: &Ifs<T>) -> Result<T> {
    let m = ifs.len();
    law.check_arity(m)?;
    let mean = law.mean_offspring(m);
    if mean <= 1.0 + CRITICAL_TOL {
        return Err(Error::UndefinedDimension {
            mean_offspring: mean,
        });
    }
    let weights: Vec<T> = law.marginals(m).into_iter().map(T::lit).collect();
    let upper = T::from_usize_lossy(ifs.ambient_dim() + 1);
    solve_dimension_equation(&weights, &ifs.ratios(), upper)
}

/// Similarity dimension `Σ r_i^s = 1`.
pub fn moran_dimension<T: Scalar>(ifs: &Ifs<T>) -> Result<T> {
    percolation_dimension(&OffspringLaw::Deterministic, ifs)
}

/// Similarity dimension from ratios alone, searched on `[0, upper]`.
pub fn moran_from_ratios<T: Scalar>(ratios: &[T], upper: T) -> Result<T> {
    if ratios.iter().any(|&r| !(r > T::zero() && r < T::one())) {
        return Err(Error::Parameter("ratios must lie in (0, 1)".into()));
    }
    solve_dimension_equation(&vec![T::one(); ratios.len()], ratios, upper)
}

/// Mandelbrot percolation: `M^d` homotheties of ratio `1/M` tiling the unit cube,
/// with independent retention probability `p` (deterministic when `p = 1`).
pub fn mandelbrot_config<T: Scalar>(m: usize, d: usize, p: f64) -> Result<(Ifs<T>, OffspringLaw)> {
    if m < 2 || d < 1 {
        return Err(Error::Parameter(format!(
            "need M >= 2 and d >= 1, got M = {m}, d = {d}"
        )));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Parameter(format!("p = {p} not in (0, 1]")));
    }
    let count = (m as u128).pow(d as u32);
    if count > u128::from(crate::ifs::DEFAULT_WORD_BUDGET) {
        return Err(Error::BudgetExceeded {
            required: count,
            budget: crate::ifs::DEFAULT_WORD_BUDGET,
        });
    }
    let ratio = T::one() / T::from_usize_lossy(m);
    let mut digits = vec![0u32; d];
    let mut maps = Vec::with_capacity(count as usize);
    loop {
        let translation = digits
            .iter()
            .map(|&j| T::from_usize_lossy(j as usize) * ratio)
            .collect();
        maps.push(Similarity::homothety(ratio, translation)?);
        if !crate::ifs::increment_word(&mut digits, m as u32) {
            break;
        }
    }
    let meta = Metadata {
        name: Some(format!("mandelbrot-{m}-{d}")),
        hull_projection: Some(true),
        dense_rotations: Some(false),
        ..Metadata::default()
    };
    let ifs = Ifs::new(maps)?
        .with_separation(Separation::OscAssumed)
        .with_metadata(meta);
    let law = if p == 1.0 {
        OffspringLaw::Deterministic
    } else {
        OffspringLaw::Uniform { p }
    };
    Ok((ifs, law))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equal_ratio(m: usize, r: f64) -> Ifs<f64> {
        let maps = (0..m)
            .map(|i| Similarity::homothety(r, vec![i as f64, 0.0]).unwrap())
            .collect();
        Ifs::new(maps).unwrap()
    }

    #[test]
    fn standard_law_retention() {
        let ifs = equal_ratio(3, 0.5);
        let law = standard_law(&ifs, 0.0).unwrap();
        assert_eq!(law.marginals(3), vec![1.0; 3]);
        let law = standard_law(&ifs, 1.0).unwrap();
        assert_eq!(law.marginals(3), vec![0.5; 3]);
        let ifs = Ifs::new(vec![
            Similarity::homothety(0.5, vec![0.0]).unwrap(),
            Similarity::homothety(0.25, vec![0.75]).unwrap(),
        ])
        .unwrap();
        let law = standard_law(&ifs, 0.5).unwrap();
        let got = law.marginals(2);
        // Cross-check through logarithms.
        assert!((got[0] - (0.5 * 0.5f64.ln()).exp()).abs() < 1e-15);
        assert!((got[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((got[1] - 0.5).abs() < 1e-15);
        assert!(standard_law(&ifs, -0.1).is_err());
    }

    #[test]
    fn trivial_trees() {
        let full = sample_tree(&OffspringLaw::Deterministic, 3, 2, 1).unwrap();
        assert_eq!(full.generation_counts(), vec![1, 3, 9]);
        assert_eq!(full.words_at(2)[4], Word::new(vec![1, 1]));
        let dead = OffspringLaw::table(3, vec![(0, 1.0)]).unwrap();
        let s = sample_tree(&dead, 3, 2, 1).unwrap();
        assert_eq!(s.generation_counts(), vec![1, 0, 0]);
        assert!(!s.survived());
    }

    #[test]
    fn table_validation() {
        assert!(OffspringLaw::table(2, vec![(0b11, 0.5), (0b01, 0.4)]).is_err());
        assert!(OffspringLaw::table(2, vec![(0b100, 1.0)]).is_err());
        assert!(OffspringLaw::table(2, vec![(0b11, 1.2), (0, -0.2)]).is_err());
        assert!(OffspringLaw::table(2, vec![(0b11, 0.5), (0b10, 0.5)]).is_ok());
    }

    #[test]
    fn sampling_is_reproducible_and_monotone() {
        let law = OffspringLaw::Uniform { p: 0.6 };
        let a = sample_tree(&law, 4, 7, 99).unwrap();
        let b = sample_tree(&law, 4, 7, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_tree(&law, 4, 7, 100).unwrap();
        assert_ne!(a.generation_counts(), c.generation_counts());
        for k in 1..=a.depth() {
            for (i, w) in a.words_at(k).iter().enumerate() {
                let parent = a.word(k - 1, a.level(k)[i].parent as usize);
                assert!(parent.is_prefix_of(w.symbols()));
            }
        }
    }

    #[test]
    fn path_walk_agrees_with_tree() {
        let law = OffspringLaw::Uniform { p: 0.7 };
        let s = sample_tree(&law, 3, 4, 5).unwrap();
        let retained: Vec<Word> = s.words_at(4);
        let mut w = vec![0u32; 4];
        loop {
            let word = Word::new(w.clone());
            assert_eq!(
                word_survives(&law, 3, 5, &word).unwrap(),
                retained.contains(&word)
            );
            if !crate::ifs::increment_word(&mut w, 3) {
                break;
            }
        }
    }

    #[test]
    fn children_offsets_and_pruning() {
        let law = OffspringLaw::Uniform { p: 0.5 };
        let s = sample_tree(&law, 4, 5, 17).unwrap();
        for k in 0..s.depth() {
            for i in 0..s.level(k).len() {
                for c in s.children(k, i) {
                    assert_eq!(s.level(k + 1)[c].parent as usize, i);
                }
            }
        }
        let pruned = s.pruned_counts();
        let counts = s.generation_counts();
        assert!(pruned.iter().zip(&counts).all(|(p, c)| p <= c));
        assert_eq!(pruned[5], counts[5]);
    }

    #[test]
    fn word_indices_are_increasing() {
        let s = sample_tree(&OffspringLaw::Uniform { p: 0.8 }, 4, 3, 3).unwrap();
        let idx = s.word_indices(3);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(intersection_count(&s, &s, 3), idx.len());
    }

    #[test]
    fn budget_is_enforced() {
        let err =
            sample_tree_with_budget(&OffspringLaw::Deterministic, 4, 10, 0, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn survival_of_simple_laws() {
        let sub = OffspringLaw::Uniform { p: 0.25 };
        assert_eq!(survival_probability(&sub, 4).survival_prob, 0.0);
        let full = survival_probability(&OffspringLaw::Deterministic, 2);
        assert_eq!(full.survival_prob, 1.0);
        let bin = survival_probability(&OffspringLaw::Uniform { p: 0.3 }, 4);
        let q = bin.extinction_prob;
        assert!((q - (0.7 + 0.3 * q).powi(4)).abs() < 1e-10);
        assert!(q < 1.0 && q > 0.0);
    }

    #[test]
    fn moran_closed_forms() {
        let ifs = Ifs::new(vec![
            Similarity::homothety(0.5, vec![0.0]).unwrap(),
            Similarity::homothety(0.25, vec![0.5]).unwrap(),
            Similarity::homothety(0.25, vec![0.75]).unwrap(),
        ])
        .unwrap();
        // y = 2^{-s}: y + 2y² = 1 ⇒ y = 1/2 ⇒ s = 1.
        assert!((moran_dimension(&ifs).unwrap() - 1.0f64).abs() < 1e-12);
        let tri = equal_ratio(3, 0.5);
        let s = moran_dimension(&tri).unwrap();
        assert!((s - 3f64.ln() / 2f64.ln()).abs() < 1e-12);
        let law = standard_law(&tri, 0.3).unwrap();
        let sp = percolation_dimension(&law, &tri).unwrap();
        assert!((sp - (s - 0.3)).abs() < 1e-9);
    }

    #[test]
    fn subcritical_dimension_is_an_error() {
        let tri = equal_ratio(3, 0.5);
        let law = OffspringLaw::Uniform { p: 0.3 };
        assert!(matches!(
            percolation_dimension(&law, &tri),
            Err(Error::UndefinedDimension { .. })
        ));
    }

    #[test]
    fn mandelbrot_configs() {
        let (ifs, law) = mandelbrot_config::<f64>(2, 1, 1.0).unwrap();
        assert_eq!(ifs.len(), 2);
        assert_eq!(law, OffspringLaw::Deterministic);
        assert_eq!(ifs.maps()[1].apply(&[0.4]), vec![0.7]);

        let (ifs, law) = mandelbrot_config::<f64>(3, 2, 0.7).unwrap();
        assert_eq!(ifs.len(), 9);
        let s = percolation_dimension(&law, &ifs).unwrap();
        assert!((s - (2.0 + 0.7f64.ln() / 3f64.ln())).abs() < 1e-12);
        assert!((ifs.ball().radius - 2f64.sqrt() / 2.0).abs() < 1e-8);
        // Supercritical iff p > 1/9.
        for (p, sup) in [(0.1, false), (0.12, true)] {
            let (_, law) = mandelbrot_config::<f64>(3, 2, p).unwrap();
            assert_eq!(survival_probability(&law, 9).survival_prob > 0.0, sup);
        }
    }
}
