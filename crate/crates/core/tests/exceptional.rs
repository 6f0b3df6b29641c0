use astro_float::{BigFloat, Consts, RoundingMode};
use dimlab_core::{ExceptionalParams, ExceptionalScanner};
use proptest::prelude::*;

const RM: RoundingMode = RoundingMode::ToEven;

fn catalog(n: u32, grid: usize) -> ExceptionalParams {
    ExceptionalParams {
        r: 0.5,
        gamma: 0.0,
        b: 1.0,
        theta: 1.0,
        q: 2,
        k: 2,
        n,
        delta: 1.0 / 3.0,
        tau_grid_size: grid,
        diagnostic: false,
    }
}

/// Double loop over (τ, n), each phase evaluated directly from its closed form.
fn naive_max_fraction(p: &ExceptionalParams, beta: f64) -> f64 {
    let prec = 2048;
    let mut cc = Consts::new().unwrap();
    let big = |x: f64| BigFloat::from_f64(x, prec);
    let qk = (p.q * p.k) as usize;
    let ell = 1.0 / p.r.powi(qk as i32);
    let thr = big(p.r).powi(2 * qk, prec, RM).div(&big(15.0), prec, RM);
    let half = big(0.5);
    let one = big(1.0);
    let phases: Vec<BigFloat> = (1..=p.n as usize)
        .map(|n| {
            let arg = big(beta).add(&big(p.gamma), prec, RM).sub(
                &big((n * qk) as f64).mul(&big(p.theta), prec, RM),
                prec,
                RM,
            );
            let scale = big(p.r).powi(p.q as usize, prec, RM).mul(
                &big(p.r)
                    .reciprocal(prec, RM)
                    .powi(qk * (p.n as usize - n), prec, RM),
                prec,
                RM,
            );
            big(p.b)
                .mul(&scale, prec, RM)
                .mul(&arg.cos(prec, RM, &mut cc), prec, RM)
        })
        .collect();
    let mut best = 0usize;
    for j in 0..p.tau_grid_size {
        let tau = big(ell.powf(j as f64 / (p.tau_grid_size - 1) as f64));
        let count = phases
            .iter()
            .filter(|y| {
                let x = y.mul(&tau, prec, RM).abs();
                let f = x.fract();
                let d = if f > half { one.sub(&f, prec, RM) } else { f };
                d <= thr
            })
            .count();
        best = best.max(count);
    }
    best as f64 / p.n as f64
}

#[test]
fn agrees_with_naive_double_loop() {
    let p = catalog(100, 4096);
    let s = ExceptionalScanner::new(&p).unwrap();
    for beta in [0.3, 1.7, -2.2] {
        let fast = s.membership(beta).max_fraction;
        let slow = naive_max_fraction(&p, beta);
        assert!((fast - slow).abs() < 1e-12, "beta {beta}: {fast} vs {slow}");
    }
}

#[test]
fn agrees_with_naive_loop_on_other_parameters() {
    let p = ExceptionalParams {
        r: 0.37,
        gamma: 0.8,
        b: 2.5,
        theta: -0.6,
        q: 1,
        k: 3,
        n: 60,
        delta: 0.2,
        tau_grid_size: 1500,
        diagnostic: false,
    };
    let s = ExceptionalScanner::new(&p).unwrap();
    for beta in [0.0, 2.9] {
        let fast = s.membership(beta).max_fraction;
        assert!((fast - naive_max_fraction(&p, beta)).abs() < 1e-12);
    }
}

#[test]
fn vacuous_delta_makes_every_direction_a_member() {
    let p = ExceptionalParams {
        delta: 1.0,
        diagnostic: true,
        ..catalog(50, 512)
    };
    let scan = ExceptionalScanner::new(&p).unwrap().scan_uniform(64);
    assert_eq!(scan.member_fraction, 1.0);
}

#[test]
fn single_point_grid_with_a_member() {
    let p = ExceptionalParams {
        b: 0.0,
        diagnostic: true,
        ..catalog(50, 64)
    };
    let scan = ExceptionalScanner::new(&p).unwrap().scan(&[1.234]);
    assert_eq!(scan.member_fraction, 1.0);
    assert_eq!(scan.members, vec![0]);
}

#[test]
fn member_sets_grow_with_delta() {
    let base = ExceptionalScanner::new(&catalog(40, 256)).unwrap();
    let fractions: Vec<f64> = base
        .scan_uniform(128)
        .results
        .iter()
        .map(|r| r.max_fraction)
        .collect();
    let mut prev: Option<Vec<usize>> = None;
    for delta in [0.05, 0.2, 0.45, 0.7, 0.9, 0.97, 0.99] {
        let p = ExceptionalParams {
            delta,
            diagnostic: true,
            ..catalog(40, 256)
        };
        let scan = ExceptionalScanner::new(&p).unwrap().scan_uniform(128);
        let want: Vec<usize> = (0..128).filter(|&i| fractions[i] > 1.0 - delta).collect();
        assert_eq!(scan.members, want);
        if let Some(prev) = prev {
            assert!(prev.iter().all(|i| scan.members.contains(i)));
        }
        prev = Some(scan.members);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn periodic_in_beta(j in 0i64..2048, wraps in -2i64..3) {
        let s = ExceptionalScanner::new(&catalog(60, 256)).unwrap();
        let a = s.membership_turns(j, 2048);
        let b = s.membership_turns(j + wraps * 2048, 2048);
        prop_assert!((a.max_fraction - b.max_fraction).abs() < 1e-12);
        prop_assert_eq!(a.witness_tau, b.witness_tau);
        prop_assert_eq!(a.is_member, b.is_member);
    }
}
