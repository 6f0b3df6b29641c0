//! Exceptional directions: `β` for which, at some scale `τ ∈ [1, ℓ]` with `ℓ = r^{−qk}`,
//! more than a `1 − δ` fraction of the phases
//!
//! `x_n = b τ r^{q − qk(N − n)} cos(β + γ − nqkθ)`,  `n = 1..N`,
//!
//! lie within `r^{2qk}/15` of an integer.
//!
//! `x_n` reaches `ℓ^{N}` in size, so fractional parts are taken in arbitrary precision.
//! For each `β` the values `y_n = x_n / τ` are formed once; each grid `τ` is an f64
//! `m · 2^{E−52}` with integer `m`, so `frac(τ y_n) = frac(m · frac(2^{E−52} y_n))` and the
//! scan over `τ` runs on 128-bit fixed-point residues.

use std::cell::RefCell;
use std::f64::consts::TAU;

use astro_float::{BigFloat, Consts, RoundingMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::Ifs;

const RM: RoundingMode = RoundingMode::ToEven;
const GUARD_BITS: f64 = 192.0;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalParams {
    pub r: f64,
    pub gamma: f64,
    pub b: f64,
    pub theta: f64,
    pub q: u32,
    pub k: u32,
    /// `N`, the number of phases.
    pub n: u32,
    pub delta: f64,
    pub tau_grid_size: usize,
    /// Admits `b = 0` and `δ ≥ 1/2`, which are outside the meaningful range.
    #[serde(default)]
    pub diagnostic: bool,
}

impl ExceptionalParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, value: f64, limit: &str| {
            Err(Error::Parameter(format!(
                "{what} = {value} outside {limit}"
            )))
        };
        if !(self.r > 0.0 && self.r < 1.0) {
            return bad("r", self.r, "(0, 1)");
        }
        if !self.gamma.is_finite() {
            return bad("gamma", self.gamma, "finite");
        }
        if !self.theta.is_finite() {
            return bad("theta", self.theta, "finite");
        }
        let b_ok = if self.diagnostic {
            self.b >= 0.0
        } else {
            self.b > 0.0
        };
        if !(b_ok && self.b.is_finite()) {
            return bad(
                "b",
                self.b,
                if self.diagnostic {
                    "[0, inf)"
                } else {
                    "(0, inf)"
                },
            );
        }
        let d_ok = if self.diagnostic {
            self.delta > 0.0 && self.delta.is_finite()
        } else {
            self.delta > 0.0 && self.delta < 0.5
        };
        if !d_ok {
            return bad(
                "delta",
                self.delta,
                if self.diagnostic {
                    "(0, inf)"
                } else {
                    "(0, 1/2)"
                },
            );
        }
        if self.q == 0 {
            return bad("q", 0.0, ">= 1");
        }
        if self.k == 0 {
            return bad("k", 0.0, ">= 1");
        }
        if self.n < 2 {
            return bad("N", self.n as f64, ">= 2");
        }
        if self.tau_grid_size < 2 {
            return bad("tau_grid_size", self.tau_grid_size as f64, ">= 2");
        }
        if !self.ell().is_finite() {
            return bad("r^-qk", self.ell(), "finite");
        }
        Ok(())
    }

    /// `ℓ = r^{−qk}`.
    pub fn ell(&self) -> f64 {
        self.r.powi(-((self.q * self.k) as i32))
    }

    /// `r^{2qk}/15`.
    pub fn threshold(&self) -> f64 {
        self.r.powi(2 * (self.q * self.k) as i32) / 15.0
    }

    /// `τ_j = ℓ^{j/(G−1)}`, `j = 0..G`, as f64 values; the scan treats them as exact.
    pub fn tau_grid(&self) -> Vec<f64> {
        let ell = self.ell();
        let last = (self.tau_grid_size - 1) as f64;
        (0..self.tau_grid_size)
            .map(|j| ell.powf(j as f64 / last))
            .collect()
    }
}

/// Parameters for the pair of maps `i`, `j` of an equal-ratio, equal-rotation planar system:
/// `b = |a_i − a_j|`, `γ = ang(a_i − a_j) + θ`.
#[allow(clippy::too_many_arguments)]
pub fn from_ifs_pair(
    ifs: &Ifs<f64>,
    i: usize,
    j: usize,
    q: u32,
    k: u32,
    delta: f64,
    n: u32,
    tau_grid_size: usize,
) -> Result<ExceptionalParams> {
    if ifs.ambient_dim() != 2 {
        return Err(Error::Parameter(
            "exceptional scan needs a planar system".into(),
        ));
    }
    if i >= ifs.len() || j >= ifs.len() || i == j {
        return Err(Error::Parameter(format!(
            "need two distinct maps below {}, got {i} and {j}",
            ifs.len()
        )));
    }
    let r = ifs
        .equal_ratio()
        .ok_or_else(|| Error::Parameter("exceptional scan needs equal ratios".into()))?;
    let theta = ifs
        .common_angle()
        .ok_or_else(|| Error::Parameter("exceptional scan needs a common rotation".into()))?;
    let (ai, aj) = (ifs.maps()[i].translation(), ifs.maps()[j].translation());
    let (dx, dy) = (ai[0] - aj[0], ai[1] - aj[1]);
    let params = ExceptionalParams {
        r,
        gamma: dy.atan2(dx) + theta,
        b: dx.hypot(dy),
        theta,
        q,
        k,
        n,
        delta,
        tau_grid_size,
        diagnostic: false,
    };
    params.validate()?;
    Ok(params)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MembershipResult {
    pub beta: f64,
    pub max_fraction: f64,
    pub witness_tau: f64,
    pub is_member: bool,
}

/// Bits `[p, p + 64)` of the integer whose little-endian words are `words`.
fn u64_at(words: &[u64], p: i64) -> u64 {
    let get = |i: i64| {
        if i < 0 || i >= words.len() as i64 {
            0
        } else {
            words[i as usize]
        }
    };
    let (w, o) = (p.div_euclid(64), p.rem_euclid(64));
    let lo = get(w) >> o;
    if o == 0 {
        lo
    } else {
        lo | (get(w + 1) << (64 - o))
    }
}

/// `⌊frac(|y| · 2^s) · 2^128⌋`.
fn fraction_bits(y: &BigFloat, s: i64) -> u128 {
    let Some((words, nbits, _, e, _)) = y.as_raw_parts() else {
        return 0;
    };
    if nbits == 0 {
        return 0;
    }
    // |y| = M · 2^{e − nbits} with M the mantissa integer.
    let p = nbits as i64 - e as i64 - s - 128;
    u64_at(words, p) as u128 | (u64_at(words, p + 64) as u128) << 64
}

/// Distance to the nearest integer of a 128-bit fraction.
fn nearest_integer_distance(f: u128) -> u128 {
    f.min(f.wrapping_neg())
}

/// `τ = m · 2^{E − 52}` for a normal f64 `τ ≥ 1`.
fn split_f64(tau: f64) -> (u64, i64) {
    let bits = tau.to_bits();
    let m = (bits & ((1 << 52) - 1)) | (1 << 52);
    let e = ((bits >> 52) & 0x7ff) as i64 - 1023;
    (m, e)
}

/// Precomputed phase amplitudes for one parameter set.
pub struct ExceptionalScanner {
    params: ExceptionalParams,
    prec: usize,
    gamma: BigFloat,
    /// `(A_n, B_n) = b r^q ℓ^{N−n} (cos nqkθ, sin nqkθ)`, so `y_n = A_n cos φ + B_n sin φ`.
    coeffs: Vec<(BigFloat, BigFloat)>,
    taus: Vec<f64>,
    /// Per grid point: f64 mantissa and index into `exponents`.
    tau_parts: Vec<(u64, usize)>,
    exponents: Vec<i64>,
    threshold: u128,
}

impl ExceptionalScanner {
    pub fn new(params: &ExceptionalParams) -> Result<Self> {
        params.validate()?;
        let ell = params.ell();
        let n = params.n as usize;
        let log_y = params.b.max(1.0).log2() + n as f64 * ell.log2();
        let prec = ((log_y + ell.log2() + GUARD_BITS) / 64.0).ceil() as usize * 64;

        let qk = (params.q * params.k) as usize;
        let r = BigFloat::from_f64(params.r, prec);
        let ell_big = r.powi(qk, prec, RM).reciprocal(prec, RM);
        let base =
            BigFloat::from_f64(params.b, prec).mul(&r.powi(params.q as usize, prec, RM), prec, RM);
        let theta = BigFloat::from_f64(params.theta, prec);
        let coeffs = with_consts(|cc| {
            (1..=n)
                .map(|i| {
                    let amp = base.mul(&ell_big.powi(n - i, prec, RM), prec, RM);
                    let psi = theta.mul(&BigFloat::from_f64((i * qk) as f64, prec), prec, RM);
                    (
                        amp.mul(&psi.cos(prec, RM, cc), prec, RM),
                        amp.mul(&psi.sin(prec, RM, cc), prec, RM),
                    )
                })
                .collect()
        });

        let taus = params.tau_grid();
        let mut exponents: Vec<i64> = taus.iter().map(|&t| split_f64(t).1).collect();
        exponents.sort_unstable();
        exponents.dedup();
        let tau_parts = taus
            .iter()
            .map(|&t| {
                let (m, e) = split_f64(t);
                (m, exponents.binary_search(&e).expect("exponent listed"))
            })
            .collect();

        let thr = BigFloat::from_f64(params.r, prec)
            .powi(2 * qk, prec, RM)
            .div(&BigFloat::from_f64(15.0, prec), prec, RM);
        Ok(Self {
            params: params.clone(),
            prec,
            gamma: BigFloat::from_f64(params.gamma, prec),
            coeffs,
            taus,
            tau_parts,
            exponents,
            threshold: fraction_bits(&thr, 0),
        })
    }

    pub fn params(&self) -> &ExceptionalParams {
        &self.params
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// Working precision in bits.
    pub fn precision(&self) -> usize {
        self.prec
    }

    /// Membership at the direction `β` (radians, taken as an exact real).
    pub fn membership(&self, beta: f64) -> MembershipResult {
        let b = BigFloat::from_f64(beta, self.prec);
        self.membership_at(beta, &b)
    }

    /// Membership at `β = 2π · numer/denom`, evaluated without rounding `β` to f64.
    pub fn membership_turns(&self, numer: i64, denom: u64) -> MembershipResult {
        let p = self.prec;
        let b = with_consts(|cc| {
            cc.pi(p, RM)
                .mul(&BigFloat::from_f64(2.0 * numer as f64, p), p, RM)
                .div(&BigFloat::from_f64(denom as f64, p), p, RM)
        });
        self.membership_at(TAU * numer as f64 / denom as f64, &b)
    }

    fn membership_at(&self, beta: f64, beta_big: &BigFloat) -> MembershipResult {
        let p = self.prec;
        let phi = beta_big.add(&self.gamma, p, RM);
        let (c, s) = with_consts(|cc| (phi.cos(p, RM, cc), phi.sin(p, RM, cc)));
        let n = self.coeffs.len();
        let mut residues = vec![0u128; self.exponents.len() * n];
        for (i, (a, b)) in self.coeffs.iter().enumerate() {
            let y = a.mul(&c, p, RM).add(&b.mul(&s, p, RM), p, RM);
            for (j, &e) in self.exponents.iter().enumerate() {
                residues[j * n + i] = fraction_bits(&y, e - 52);
            }
        }
        let mut best = (0usize, self.taus[0]);
        for (&tau, &(m, j)) in self.taus.iter().zip(&self.tau_parts) {
            let count = residues[j * n..(j + 1) * n]
                .iter()
                .filter(|&&r| nearest_integer_distance(r.wrapping_mul(m as u128)) <= self.threshold)
                .count();
            if count > best.0 {
                best = (count, tau);
            }
        }
        let max_fraction = best.0 as f64 / n as f64;
        MembershipResult {
            beta,
            max_fraction,
            witness_tau: best.1,
            is_member: max_fraction > 1.0 - self.params.delta,
        }
    }

    /// Scans the given directions in parallel.
    pub fn scan(&self, betas: &[f64]) -> GridScan {
        GridScan::collect(betas.par_iter().map(|&b| self.membership(b)).collect())
    }

    /// Scans `β_j = 2πj/size`, `j = 0..size`.
    pub fn scan_uniform(&self, size: usize) -> GridScan {
        GridScan::collect(
            (0..size as i64)
                .into_par_iter()
                .map(|j| self.membership_turns(j, size as u64))
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridScan {
    pub results: Vec<MembershipResult>,
    /// Indices of member directions.
    pub members: Vec<usize>,
    pub member_fraction: f64,
}

impl GridScan {
    fn collect(results: Vec<MembershipResult>) -> Self {
        let members: Vec<usize> = results
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_member)
            .map(|(i, _)| i)
            .collect();
        let member_fraction = if results.is_empty() {
            0.0
        } else {
            members.len() as f64 / results.len() as f64
        };
        Self {
            results,
            members,
            member_fraction,
        }
    }
}

pub fn membership_fraction(params: &ExceptionalParams, beta: f64) -> Result<MembershipResult> {
    Ok(ExceptionalScanner::new(params)?.membership(beta))
}

pub fn grid_scan(params: &ExceptionalParams, betas: &[f64]) -> Result<GridScan> {
    Ok(ExceptionalScanner::new(params)?.scan(betas))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog(n: u32) -> ExceptionalParams {
        ExceptionalParams {
            r: 0.5,
            gamma: 0.0,
            b: 1.0,
            theta: 1.0,
            q: 2,
            k: 2,
            n,
            delta: 1.0 / 3.0,
            tau_grid_size: 256,
            diagnostic: false,
        }
    }

    #[test]
    fn fraction_bits_of_simple_values() {
        let p = 256;
        let x = BigFloat::from_f64(5.25, p);
        assert_eq!(fraction_bits(&x, 0), 1u128 << 126);
        assert_eq!(fraction_bits(&x, 1), 1u128 << 127);
        assert_eq!(fraction_bits(&x, 2), 0);
        assert_eq!(fraction_bits(&x, -3), 21u128 << 123);
        assert_eq!(
            fraction_bits(&BigFloat::from_f64(-0.75, p), 0),
            3u128 << 126
        );
        assert_eq!(fraction_bits(&BigFloat::from_f64(0.0, p), 0), 0);
        let tiny = BigFloat::from_f64(2f64.powi(-100), p);
        assert_eq!(fraction_bits(&tiny, 0), 1u128 << 28);
    }

    #[test]
    fn split_reassembles() {
        for t in [1.0, 1.5, 3.999, 16.0, 7.123456789] {
            let (m, e) = split_f64(t);
            assert_eq!(m as f64 * 2f64.powi(e as i32 - 52), t);
        }
    }

    #[test]
    fn validation() {
        assert!(catalog(100).validate().is_ok());
        assert!(ExceptionalParams {
            delta: 0.5,
            ..catalog(100)
        }
        .validate()
        .is_err());
        assert!(ExceptionalParams {
            b: 0.0,
            ..catalog(100)
        }
        .validate()
        .is_err());
        assert!(ExceptionalParams {
            n: 1,
            ..catalog(100)
        }
        .validate()
        .is_err());
        let diag = ExceptionalParams {
            b: 0.0,
            delta: 2.0,
            diagnostic: true,
            ..catalog(100)
        };
        assert!(diag.validate().is_ok());
        assert!(catalog(100).threshold() > 0.0 && catalog(100).threshold() < 1.0 / 15.0);
    }

    #[test]
    fn zero_amplitude_is_always_member() {
        let p = ExceptionalParams {
            b: 0.0,
            diagnostic: true,
            ..catalog(40)
        };
        let s = ExceptionalScanner::new(&p).unwrap();
        for beta in [0.0, 0.4, 2.0, -5.0] {
            let m = s.membership(beta);
            assert_eq!(m.max_fraction, 1.0);
            assert!(m.is_member);
        }
    }

    #[test]
    fn zero_crossing_counts() {
        // cos(β + γ − Nqkθ) ≈ 0 makes the last phase tiny at every τ.
        let p = catalog(30);
        let beta = std::f64::consts::FRAC_PI_2 + (30 * 4) as f64 * p.theta;
        let m = membership_fraction(&p, beta).unwrap();
        assert!(m.max_fraction >= 1.0 / 30.0);
    }

    #[test]
    fn uniform_scan_matches_pointwise_turns() {
        let s = ExceptionalScanner::new(&catalog(20)).unwrap();
        let scan = s.scan_uniform(16);
        assert_eq!(scan.results.len(), 16);
        for (j, r) in scan.results.iter().enumerate() {
            assert_eq!(*r, s.membership_turns(j as i64, 16));
        }
    }
}
