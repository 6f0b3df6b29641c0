//! Random self-similar measures with level-i.i.d. weights, and their Fourier transforms.
//!
//! Level `n` of a sample is drawn from `CounterRng::new(seed, n)`. Transforms use the
//! convention `μ̂(ξ) = ∫ e^{iπ⟨x, ξ⟩} dμ(x)`.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{increment_word, map_trig, Frame, Ifs, Word};
use crate::regression::{fit_box_dimension, least_squares, DimEstimate};
use crate::rng::CounterRng;
use crate::sections::Direction;

const SUM_TOL: f64 = 1e-12;

/// Factors whose phase bound falls below this are dropped from truncated products.
pub const TAIL_EPS: f64 = 1e-12;

fn check_probability_vector(v: &[f64]) -> Result<()> {
    if v.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::Parameter(
            "weight vector has a negative entry".into(),
        ));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::Parameter(format!(
            "weight vector sums to {total}, not 1"
        )));
    }
    Ok(())
}

/// Uniform weights on a random subset containing a uniformly chosen pair of
/// distinct symbols, every other symbol kept independently with probability `p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetLaw {
    /// Size of the alphabet the subset is drawn from (`m^q` for block laws).
    pub alphabet: usize,
    pub p: f64,
    /// Block length the alphabet stands for; enters only the dimension normalization.
    pub q: usize,
}

impl SubsetLaw {
    pub fn new(alphabet: usize, p: f64, q: usize) -> Result<Self> {
        if alphabet < 2 {
            return Err(Error::Parameter(
                "subset law needs at least 2 symbols".into(),
            ));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!("retention p = {p} not in [0, 1]")));
        }
        if q == 0 {
            return Err(Error::Parameter("block length q must be >= 1".into()));
        }
        Ok(Self { alphabet, p, q })
    }

    /// Draws `S` as a sorted symbol list.
    pub fn draw_subset(&self, rng: &mut CounterRng, out: &mut Vec<u32>) {
        let a = self.alphabet as u64;
        let i = rng.below(a);
        let mut j = rng.below(a - 1);
        if j >= i {
            j += 1;
        }
        for s in 0..a {
            if s == i || s == j || rng.bernoulli(self.p) {
                out.push(s as u32);
            }
        }
    }

    /// `P(i ∈ S) = 2/A + (1 − 2/A)·p`.
    pub fn retention(&self) -> f64 {
        let two_over = 2.0 / self.alphabet as f64;
        two_over + (1.0 - two_over) * self.p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RandomWeightLaw {
    /// Point mass on one probability vector.
    Fixed {
        weights: Vec<f64>,
    },
    /// Finite mixture of probability vectors.
    Mixture {
        atoms: Vec<(Vec<f64>, f64)>,
    },
    Subset(SubsetLaw),
}

impl RandomWeightLaw {
    pub fn fixed(weights: Vec<f64>) -> Result<Self> {
        check_probability_vector(&weights)?;
        Ok(Self::Fixed { weights })
    }

    pub fn uniform(m: usize) -> Self {
        Self::Fixed {
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn mixture(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let arity = atoms
            .first()
            .map(|a| a.0.len())
            .ok_or_else(|| Error::Parameter("empty mixture".into()))?;
        for (v, _) in &atoms {
            if v.len() != arity {
                return Err(Error::Parameter("mixture atoms of mixed arity".into()));
            }
            check_probability_vector(v)?;
        }
        check_probability_vector(&atoms.iter().map(|a| a.1).collect::<Vec<_>>())?;
        Ok(Self::Mixture { atoms })
    }

    pub fn arity(&self) -> usize {
        match self {
            Self::Fixed { weights } => weights.len(),
            Self::Mixture { atoms } => atoms[0].0.len(),
            Self::Subset(s) => s.alphabet,
        }
    }

    pub fn draw(&self, rng: &mut CounterRng) -> Vec<f64> {
        match self {
            Self::Fixed { weights } => weights.clone(),
            Self::Mixture { atoms } => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for (v, p) in atoms {
                    acc += p;
                    if u < acc {
                        return v.clone();
                    }
                }
                atoms[atoms.len() - 1].0.clone()
            }
            Self::Subset(s) => {
                let mut set = Vec::new();
                s.draw_subset(rng, &mut set);
                let w = 1.0 / set.len() as f64;
                let mut out = vec![0.0; s.alphabet];
                for i in set {
                    out[i as usize] = w;
                }
                out
            }
        }
    }
}

/// `p_q = (r^{q(s−1−ε)} − 2/m^q) · m^q/(m^q − 2)` for an equal-ratio system, giving a
/// subset law on the `q`-block alphabet with per-symbol retention `r^{q(s−1−ε)}`.
pub fn sq_law(ifs: &Ifs<f64>, epsilon: f64, q: usize) -> Result<RandomWeightLaw> {
    let r = ifs
        .equal_ratio()
        .ok_or_else(|| Error::Parameter("S_q law needs an equal-ratio system".into()))?;
    let m = ifs.len();
    let s = -(m as f64).ln() / r.ln();
    if s <= 1.0 {
        return Err(Error::Parameter(format!(
            "similarity dimension {s} must exceed 1"
        )));
    }
    if !(epsilon > 0.0 && epsilon < s - 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon = {epsilon} must lie in (0, s - 1) = (0, {})",
            s - 1.0
        )));
    }
    if q == 0 {
        return Err(Error::Parameter("q must be >= 1".into()));
    }
    if r.powi(-(q as i32)) <= 2.0 {
        return Err(Error::Parameter(format!(
            "r^-q = {} must exceed 2",
            r.powi(-(q as i32))
        )));
    }
    let alphabet = (m as u64)
        .checked_pow(q as u32)
        .filter(|&a| a <= crate::ifs::DEFAULT_WORD_BUDGET)
        .ok_or_else(|| Error::BudgetExceeded {
            required: (m as u128).saturating_pow(q as u32),
            budget: crate::ifs::DEFAULT_WORD_BUDGET,
        })? as usize;
    let a = alphabet as f64;
    let target = r.powf(q as f64 * (s - 1.0 - epsilon));
    let p = (target - 2.0 / a) * a / (a - 2.0);
    if p <= 0.0 {
        return Err(Error::Parameter(format!(
            "p_q = {p} <= 0: need r^(q(s-1-eps)) = {target} > 2/m^q = {}",
            2.0 / a
        )));
    }
    if p >= 1.0 {
        return Err(Error::Parameter(format!("p_q = {p} >= 1")));
    }
    Ok(RandomWeightLaw::Subset(SubsetLaw::new(alphabet, p, q)?))
}

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// `E(log #S_q) / (−q log r)` by simulation; only subset laws are supported.
pub fn measure_dimension(
    law: &RandomWeightLaw,
    r: f64,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    let RandomWeightLaw::Subset(s) = law else {
        return Err(Error::UnsupportedLaw(
            "a dimension formula is only available for subset laws".into(),
        ));
    };
    if trials < 2 {
        return Err(Error::Parameter("need at least 2 trials".into()));
    }
    let norm = -(s.q as f64) * r.ln();
    let (sum, sum2) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut buf = Vec::with_capacity(s.alphabet);
            s.draw_subset(&mut CounterRng::new(seed, t as u64), &mut buf);
            let v = (buf.len() as f64).ln() / norm;
            (v, v * v)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = sum / n;
    let var = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(Estimate {
        mean,
        std_error: (var / n).sqrt(),
        trials,
    })
}

/// Smallest `q ≤ q_max` for which [`sq_law`] is defined and the simulated
/// dimension proxy reaches `1 + ε/2`.
pub fn select_q(
    ifs: &Ifs<f64>,
    epsilon: f64,
    q_max: usize,
    trials: usize,
    seed: u64,
) -> Result<(usize, RandomWeightLaw, Estimate)> {
    let r = ifs
        .equal_ratio()
        .ok_or_else(|| Error::Parameter("S_q law needs an equal-ratio system".into()))?;
    let mut last_err = None;
    for q in 1..=q_max {
        match sq_law(ifs, epsilon, q) {
            Ok(law) => {
                let est = measure_dimension(&law, r, trials, seed)?;
                if est.mean >= 1.0 + epsilon / 2.0 {
                    return Ok((q, law, est));
                }
            }
            Err(e @ Error::BudgetExceeded { .. }) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::Parameter(format!("no q <= {q_max} reaches dimension proxy 1 + eps/2"))
    }))
}

/// Level vectors `X⁽¹⁾, …, X⁽ᴺ⁾`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSample {
    law: RandomWeightLaw,
    seed: u64,
    levels: Vec<Vec<f64>>,
}

impl MeasureSample {
    pub fn law(&self) -> &RandomWeightLaw {
        &self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn arity(&self) -> usize {
        self.law.arity()
    }

    /// `X⁽ⁿ⁾` for `n = 1..=depth`.
    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n - 1]
    }
}

pub fn sample_measure(law: &RandomWeightLaw, depth: usize, seed: u64) -> Result<MeasureSample> {
    if depth == 0 {
        return Err(Error::Parameter("measure depth must be >= 1".into()));
    }
    let levels = (1..=depth)
        .into_par_iter()
        .map(|n| law.draw(&mut CounterRng::new(seed, n as u64)))
        .collect();
    Ok(MeasureSample {
        law: law.clone(),
        seed,
        levels,
    })
}

/// `ν([i₁…i_k]) = X⁽¹⁾_{i₁} ⋯ X⁽ᵏ⁾_{i_k}`.
pub fn cylinder_mass(sample: &MeasureSample, word: &Word) -> Result<f64> {
    if word.len() > sample.depth() {
        return Err(Error::DepthMismatch {
            required: word.len(),
            available: sample.depth(),
        });
    }
    word.check(sample.arity())?;
    Ok(word
        .symbols()
        .iter()
        .enumerate()
        .map(|(l, &s)| sample.levels[l][s as usize])
        .product())
}

/// Block data of an equal-ratio, equal-rotation planar system: `T_q = r^q R_{qθ}` and
/// the translations `f_b(0)` of all `m^q` block words `b`, lexicographically ordered.
#[derive(Clone, Debug)]
pub struct FourierSystem {
    m: usize,
    q: usize,
    ratio_q: f64,
    angle_q: f64,
    blocks: Vec<[f64; 2]>,
    max_norm: f64,
}

impl FourierSystem {
    pub fn new(ifs: &Ifs<f64>, q: usize) -> Result<Self> {
        if ifs.ambient_dim() != 2 {
            return Err(Error::Parameter(
                "Fourier factors need a planar system".into(),
            ));
        }
        let r = ifs
            .equal_ratio()
            .ok_or_else(|| Error::Parameter("Fourier factors need equal ratios".into()))?;
        let theta = ifs
            .common_angle()
            .ok_or_else(|| Error::Parameter("Fourier factors need a common rotation".into()))?;
        if q == 0 {
            return Err(Error::Parameter("q must be >= 1".into()));
        }
        let power = ifs.power_system(q, crate::ifs::DEFAULT_WORD_BUDGET)?;
        let blocks: Vec<[f64; 2]> = power
            .maps()
            .iter()
            .map(|f| [f.translation()[0], f.translation()[1]])
            .collect();
        let max_norm = blocks.iter().map(|a| a[0].hypot(a[1])).fold(0.0, f64::max);
        Ok(Self {
            m: ifs.len(),
            q,
            ratio_q: r.powi(q as i32),
            angle_q: q as f64 * theta,
            blocks,
            max_norm,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn ratio_q(&self) -> f64 {
        self.ratio_q
    }

    /// Largest `|f_b(0)|` over blocks.
    pub fn max_translation(&self) -> f64 {
        self.max_norm
    }

    fn check_sample(&self, sample: &MeasureSample, factors: usize) -> Result<()> {
        if sample.arity() != self.m {
            return Err(Error::Parameter(format!(
                "sample arity {} does not match {} maps",
                sample.arity(),
                self.m
            )));
        }
        if factors * self.q > sample.depth() {
            return Err(Error::DepthMismatch {
                required: factors * self.q,
                available: sample.depth(),
            });
        }
        Ok(())
    }

    /// `(T_q^n)ᵀ ξ = r^{qn} R_{−qnθ} ξ`.
    fn pulled_back(&self, n: usize, xi: [f64; 2]) -> [f64; 2] {
        let s = self.ratio_q.powi(n as i32);
        let a = -(n as f64) * self.angle_q;
        let (sn, cs) = a.sin_cos();
        [s * (cs * xi[0] - sn * xi[1]), s * (sn * xi[0] + cs * xi[1])]
    }

    fn psi_unchecked(&self, sample: &MeasureSample, n: usize, xi: [f64; 2]) -> Complex64 {
        let eta = self.pulled_back(n, xi);
        let mut word = vec![0u32; self.q];
        // Σ w_b e^{iφ_b} = 1 + Σ w_b (e^{iφ_b} − 1), using Σ w_b = 1; exact at ξ = 0.
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.blocks {
            let w: f64 = word
                .iter()
                .enumerate()
                .map(|(l, &s)| sample.levels[n * self.q + l][s as usize])
                .product();
            if w > 0.0 {
                let phi = PI * (a[0] * eta[0] + a[1] * eta[1]);
                let half = (0.5 * phi).sin();
                acc += Complex64::new(-2.0 * half * half, phi.sin()) * w;
            }
            increment_word(&mut word, self.m as u32);
        }
        acc + 1.0
    }

    /// `Ψ_n^q(ξ) = Σ_b X^{q,(n+1)}_b e^{iπ⟨T_q^n a_b, ξ⟩}`.
    pub fn psi(&self, sample: &MeasureSample, n: usize, xi: [f64; 2]) -> Result<Complex64> {
        self.check_sample(sample, n + 1)?;
        Ok(self.psi_unchecked(sample, n, xi))
    }

    /// `Σ_{n ≥ N} π r^{qn} |ξ| max_b |a_b|`.
    pub fn tail_bound(&self, xi: [f64; 2], truncation: usize) -> f64 {
        let norm = xi[0].hypot(xi[1]);
        PI * norm * self.max_norm * self.ratio_q.powi(truncation as i32) / (1.0 - self.ratio_q)
    }

    /// Product of the factors with the given indices.
    pub fn partial_product(
        &self,
        sample: &MeasureSample,
        indices: &[usize],
        xi: [f64; 2],
    ) -> Result<Complex64> {
        let needed = indices.iter().max().map_or(0, |&n| n + 1);
        self.check_sample(sample, needed)?;
        Ok(indices
            .iter()
            .map(|&n| self.psi_unchecked(sample, n, xi))
            .product())
    }

    /// `μ̂(ξ)` truncated to factors `0..N`.
    pub fn mu(
        &self,
        sample: &MeasureSample,
        xi: [f64; 2],
        truncation: usize,
    ) -> Result<FourierPoint> {
        let indices: Vec<usize> = (0..truncation).collect();
        Ok(FourierPoint {
            xi,
            truncation,
            value: self.partial_product(sample, &indices, xi)?,
            tail_bound: self.tail_bound(xi, truncation),
        })
    }

    /// Smallest truncation whose tail bound at `ξ` is below [`TAIL_EPS`].
    pub fn truncation_for(&self, xi: [f64; 2]) -> usize {
        (0..)
            .find(|&n| self.tail_bound(xi, n) < TAIL_EPS)
            .expect("tail bound decays geometrically")
    }

    /// `η̂_{q,k}(ξ)`: the factors with `k | n + 1`, truncated where the tail is negligible.
    pub fn eta_hat(&self, sample: &MeasureSample, k: usize, xi: [f64; 2]) -> Result<Complex64> {
        let split = convolution_split(self.truncation_for(xi), k)?;
        self.partial_product(sample, &split.eta, xi)
    }
}

/// A truncated transform value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FourierPoint {
    pub xi: [f64; 2],
    pub truncation: usize,
    #[serde(with = "complex_parts")]
    pub value: Complex64,
    pub tail_bound: f64,
}

mod complex_parts {
    use num_complex::Complex64;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq([z.re, z.im])
    }
}

pub fn fourier_psi(
    sample: &MeasureSample,
    ifs: &Ifs<f64>,
    q: usize,
    n: usize,
    xi: [f64; 2],
) -> Result<Complex64> {
    FourierSystem::new(ifs, q)?.psi(sample, n, xi)
}

pub fn fourier_mu(
    sample: &MeasureSample,
    ifs: &Ifs<f64>,
    q: usize,
    xi: [f64; 2],
    truncation: usize,
) -> Result<FourierPoint> {
    FourierSystem::new(ifs, q)?.mu(sample, xi, truncation)
}

/// Factor indices `0..N` split into `μ_{q,k}` (the rest) and `η_{q,k}` (`k | n + 1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvolutionSplit {
    pub mu: Vec<usize>,
    pub eta: Vec<usize>,
}

pub fn convolution_split(truncation: usize, k: usize) -> Result<ConvolutionSplit> {
    if k < 2 {
        return Err(Error::Parameter(format!("split needs k >= 2, got {k}")));
    }
    let (eta, mu) = (0..truncation).partition(|n| (n + 1) % k == 0);
    Ok(ConvolutionSplit { mu, eta })
}

/// `|η̂_{q,k}(t w_β)|` along `t = τ · r^{−qkN}` and the fitted decay exponent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayEstimate {
    pub ts: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Slope of `−ln|η̂|` against `ln t`; `None` with fewer than two non-zero values.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Some magnitude evaluated to exactly zero and was left out of the fit.
    pub exact_zero: bool,
}

pub fn fourier_decay(
    sample: &MeasureSample,
    system: &FourierSystem,
    k: usize,
    direction: &Direction<f64>,
    tau: f64,
    ladder: RangeInclusive<usize>,
) -> Result<DecayEstimate> {
    if direction.dim() != 2 {
        return Err(Error::Parameter("decay needs a planar direction".into()));
    }
    if !(tau > 0.0) {
        return Err(Error::Parameter(format!("tau = {tau} must be positive")));
    }
    let w = direction.unit();
    let ts: Vec<f64> = ladder
        .map(|n| tau * system.ratio_q.powi(-((system.q * k * n) as i32)))
        .collect();
    let magnitudes = ts
        .iter()
        .map(|&t| {
            system
                .eta_hat(sample, k, [t * w[0], t * w[1]])
                .map(|z| z.norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let exact_zero = magnitudes.contains(&0.0);
    let (x, y): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .zip(&magnitudes)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&t, &m)| (t.ln(), -m.ln()))
        .unzip();
    let (slope, intercept) = if x.len() >= 2 {
        let (s, i, _) = least_squares(&x, &y);
        (Some(s), Some(i))
    } else {
        (None, None)
    };
    Ok(DecayEstimate {
        ts,
        magnitudes,
        slope,
        intercept,
        exact_zero,
    })
}

/// Box-counting slope of the projected support of `ν`: centers of the positive-mass
/// cylinders at `depth`, projected to `w_β` and counted in intervals of the level-`j`
/// cylinder diameter for `j` in `levels`.
pub fn projected_support_dimension(
    ifs: &Ifs<f64>,
    sample: &MeasureSample,
    direction: &Direction<f64>,
    depth: usize,
    levels: RangeInclusive<usize>,
) -> Result<DimEstimate<f64>> {
    if sample.arity() != ifs.len() {
        return Err(Error::Parameter(
            "sample arity does not match the system".into(),
        ));
    }
    if depth > sample.depth() || *levels.end() > depth {
        return Err(Error::DepthMismatch {
            required: depth.max(*levels.end()),
            available: sample.depth(),
        });
    }
    let support: Vec<Vec<usize>> = (1..=depth)
        .map(|n| {
            sample
                .level(n)
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0.0)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let count: u128 = support.iter().map(|s| s.len() as u128).product();
    if count > u128::from(crate::ifs::DEFAULT_WORD_BUDGET) {
        return Err(Error::BudgetExceeded {
            required: count,
            budget: crate::ifs::DEFAULT_WORD_BUDGET,
        });
    }
    let trig = map_trig(ifs);
    let mut frames = vec![Frame::identity(2)];
    for level in &support {
        let mut next = Vec::with_capacity(frames.len() * level.len());
        for f in &frames {
            for &s in level {
                let mut g = Frame::identity(2);
                f.compose_into(&ifs.maps()[s], trig[s].0, trig[s].1, &mut g);
                next.push(g);
            }
        }
        frames = next;
    }
    let mut c = [0.0; 2];
    let proj: Vec<f64> = frames
        .iter()
        .map(|f| {
            f.apply_into(&ifs.ball().center, &mut c);
            direction.project(&c)
        })
        .collect();
    let r = ifs
        .equal_ratio()
        .ok_or_else(|| Error::Parameter("support slope needs equal ratios".into()))?;
    let (scales, counts): (Vec<f64>, Vec<u64>) = levels
        .map(|j| {
            let delta = ifs.c0() * r.powi(j as i32);
            let boxes: HashSet<i64> = proj.iter().map(|&p| (p / delta).floor() as i64).collect();
            (delta, boxes.len() as u64)
        })
        .unzip();
    fit_box_dimension(&scales, &counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::Similarity;

    fn rotational() -> Ifs<f64> {
        let h = 3f64.sqrt() / 2.0;
        Ifs::new(
            [[0.0, 0.0], [1.0, 0.0], [0.5, h]]
                .iter()
                .map(|a| Similarity::new(0.5, 1.0, a.to_vec()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn uniform_point_mass_gives_uniform_cylinders() {
        let s = sample_measure(&RandomWeightLaw::uniform(3), 4, 1).unwrap();
        let mut w = vec![0u32; 3];
        loop {
            let mass = cylinder_mass(&s, &Word::new(w.clone())).unwrap();
            assert!((mass - 1.0 / 27.0).abs() < 1e-15);
            if !increment_word(&mut w, 3) {
                break;
            }
        }
        assert_eq!(cylinder_mass(&s, &Word::empty()).unwrap(), 1.0);
        assert!(cylinder_mass(&s, &Word::new(vec![0; 5])).is_err());
    }

    #[test]
    fn sq_law_parameters() {
        let ifs = rotational();
        assert!(sq_law(&ifs, 0.3, 1).is_err());
        let RandomWeightLaw::Subset(s) = sq_law(&ifs, 0.3, 2).unwrap() else {
            panic!("subset law expected");
        };
        let sdim = 3f64.ln() / 2f64.ln();
        let target = 0.5f64.powf(2.0 * (sdim - 1.0 - 0.3));
        assert_eq!(s.alphabet, 9);
        assert!((s.retention() - target).abs() < 1e-12);
        assert!(sq_law(&ifs, 0.6, 2).is_err());
        assert!(sq_law(&ifs, 0.0, 2).is_err());
    }

    #[test]
    fn subset_draws_keep_at_least_two() {
        let law = SubsetLaw::new(9, 0.0, 2).unwrap();
        let mut rng = CounterRng::new(4, 4);
        for _ in 0..1000 {
            let mut s = Vec::new();
            law.draw_subset(&mut rng, &mut s);
            assert_eq!(s.len(), 2);
            assert_ne!(s[0], s[1]);
        }
    }

    #[test]
    fn measure_dimension_closed_forms() {
        let full = RandomWeightLaw::Subset(SubsetLaw::new(9, 1.0, 2).unwrap());
        let est = measure_dimension(&full, 0.5, 100, 1).unwrap();
        assert!((est.mean - 9f64.ln() / (2.0 * 2f64.ln())).abs() < 1e-12);
        let pair = RandomWeightLaw::Subset(SubsetLaw::new(9, 0.0, 2).unwrap());
        let est = measure_dimension(&pair, 0.5, 100, 1).unwrap();
        assert!((est.mean - 2f64.ln() / (2.0 * 2f64.ln())).abs() < 1e-12);
        assert!(matches!(
            measure_dimension(&RandomWeightLaw::uniform(3), 0.5, 100, 1),
            Err(Error::UnsupportedLaw(_))
        ));
    }

    #[test]
    fn select_q_picks_two_for_the_rotational_example() {
        let (q, _, est) = select_q(&rotational(), 0.3, 6, 20_000, 9).unwrap();
        assert_eq!(q, 2);
        assert!(est.mean >= 1.15);
    }

    #[test]
    fn two_term_cancellation() {
        let ifs = Ifs::new(vec![
            Similarity::homothety(0.5, vec![0.0, 0.0]).unwrap(),
            Similarity::homothety(0.5, vec![1.0, 0.0]).unwrap(),
        ])
        .unwrap();
        let s = sample_measure(&RandomWeightLaw::uniform(2), 3, 0).unwrap();
        let psi = fourier_psi(&s, &ifs, 1, 0, [1.0, 0.0]).unwrap();
        assert!(psi.norm() < 1e-15);
        let one = fourier_psi(&s, &ifs, 1, 0, [0.0, 0.0]).unwrap();
        assert!((one - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn split_indices() {
        let s = convolution_split(8, 2).unwrap();
        assert_eq!(s.eta, vec![1, 3, 5, 7]);
        assert_eq!(s.mu, vec![0, 2, 4, 6]);
        assert!(convolution_split(8, 1).is_err());
    }

    #[test]
    fn brute_force_transform_matches_product() {
        // μ̂_N(ξ) = Σ_w ν(w) e^{iπ⟨f_w(0), ξ⟩} over words of length qN.
        let ifs = rotational();
        let law = sq_law(&ifs, 0.3, 2).unwrap();
        let power = ifs.power_system(2, 100).unwrap();
        let s = sample_measure(&law, 3, 21).unwrap();
        let sys = FourierSystem::new(&power, 1).unwrap();
        for xi in [[0.7, -1.3], [4.0, 2.5], [-9.0, 0.1]] {
            let got = sys.mu(&s, xi, 3).unwrap().value;
            let mut want = Complex64::new(0.0, 0.0);
            let mut w = vec![0u32; 3];
            loop {
                let mass = cylinder_mass(&s, &Word::new(w.clone())).unwrap();
                if mass > 0.0 {
                    let f = power.compose(&Word::new(w.clone())).unwrap();
                    let a = f.apply(&[0.0, 0.0]);
                    want += Complex64::from_polar(mass, PI * (a[0] * xi[0] + a[1] * xi[1]));
                }
                if !increment_word(&mut w, 9) {
                    break;
                }
            }
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn block_factors_agree_with_power_system() {
        let ifs = rotational();
        let s = sample_measure(&RandomWeightLaw::uniform(3), 8, 3).unwrap();
        let block = FourierSystem::new(&ifs, 2).unwrap();
        let xi = [3.0, -2.0];
        let a = block.mu(&s, xi, 4).unwrap().value;
        let single = FourierSystem::new(&ifs, 1).unwrap();
        let b = single.mu(&s, xi, 8).unwrap().value;
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn degenerate_translations_give_unit_modulus() {
        let ifs = Ifs::new(
            (0..3)
                .map(|_| Similarity::new(0.5, 1.0, vec![0.3, 0.2]).unwrap())
                .collect(),
        )
        .unwrap();
        let sys = FourierSystem::new(&ifs.power_system(2, 100).unwrap(), 1).unwrap();
        let law = sq_law(&ifs, 0.3, 2).unwrap();
        let s = sample_measure(&law, 200, 5).unwrap();
        let est = fourier_decay(&s, &sys, 3, &Direction::planar(0.7), 1.0, 2..=6).unwrap();
        assert!(est.magnitudes.iter().all(|&m| (m - 1.0).abs() < 1e-12));
        assert!(est.slope.unwrap().abs() < 1e-10);
    }
}
