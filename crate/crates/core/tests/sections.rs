use dimlab_core::percolation::{sample_surviving, word_survives};
use dimlab_core::sections::{low_count_endpoints, SliceIndex};
use dimlab_core::{
    catalog, catalog_names, count_slice, mandelbrot_config, projection_measure, sample_tree,
    section_dim, standard_law, stopping_set, CellSource, Direction, Error, Ifs,
};
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

/// A scale whose stopping set for an equal-ratio system is exactly level `n`.
fn level_scale(ifs: &Ifs<f64>, n: i32) -> f64 {
    ifs.c0() * ifs.equal_ratio().unwrap().powi(n) * 0.6
}

/// Column-product count of carpet cells of side 3^-n whose disk meets the vertical line at x.
fn carpet_oracle(x: f64, n: u32) -> usize {
    let side = 3u64.pow(n);
    let radius = std::f64::consts::FRAC_1_SQRT_2;
    (0..side)
        .filter(|&a| (a as f64 + 0.5 - x * side as f64).abs() <= radius)
        .map(|a| {
            let mut digits = a;
            let mut cells = 1;
            for _ in 0..n {
                cells *= if digits % 3 == 1 { 2 } else { 3 };
                digits /= 3;
            }
            cells
        })
        .sum()
}

#[test]
fn carpet_counts_match_column_products() {
    let carpet: Ifs<f64> = catalog("sierpinski-carpet").unwrap();
    let dir = Direction::planar(0.0);
    let xs = [
        (1, 3),
        (2, 3),
        (1, 9),
        (4, 9),
        (8, 9),
        (1, 27),
        (5, 27),
        (13, 27),
        (14, 27),
        (22, 27),
        (26, 27),
        (2, 81),
        (10, 81),
        (40, 81),
        (41, 81),
        (55, 81),
        (79, 81),
        (7, 243),
        (121, 243),
        (200, 243),
    ];
    for (k, d) in xs {
        let x = k as f64 / d as f64;
        for n in 2..=7 {
            let rho = level_scale(&carpet, n);
            let got = count_slice(CellSource::Full(&carpet), &dir, x, rho)
                .unwrap()
                .count;
            assert_eq!(got, carpet_oracle(x, n as u32), "x = {k}/{d}, n = {n}");
        }
    }
}

#[test]
fn one_dim_sierpinski_depth_two_matches_enumeration() {
    let ifs: Ifs<f64> = catalog("one-dim-sierpinski").unwrap();
    let rho = level_scale(&ifs, 2);
    let set = stopping_set(&ifs, rho).unwrap();
    assert_eq!(set.len(), 9);
    let dir = Direction::planar(0.0);
    let mut want = 0;
    for i in 0..3u32 {
        for j in 0..3u32 {
            let cyl = ifs.cylinder(&dimlab_core::Word::new(vec![i, j])).unwrap();
            if (cyl.disk.center[0] - 0.5).abs() <= cyl.disk.radius {
                want += 1;
            }
        }
    }
    let got = count_slice(CellSource::Full(&ifs), &dir, 0.5, rho)
        .unwrap()
        .count;
    assert_eq!(got, want);
}

#[test]
fn product_sections() {
    let ifs: Ifs<f64> = catalog("cantor-interval").unwrap();
    let scales: Vec<f64> = (2..=7).map(|n| level_scale(&ifs, n)).collect();
    // x = 1/4 = 0.0202..._3 lies in the Cantor set; slices through it are whole intervals.
    let vertical = section_dim(
        CellSource::Full(&ifs),
        &Direction::planar(0.0),
        0.25,
        &scales,
    )
    .unwrap();
    assert!((vertical.slope - 1.0).abs() < 1e-9, "{}", vertical.slope);
    let horizontal = section_dim(
        CellSource::Full(&ifs),
        &Direction::planar(FRAC_PI_2),
        0.25,
        &scales,
    )
    .unwrap();
    let cantor = 2f64.ln() / 3f64.ln();
    assert!(
        (horizontal.slope - cantor).abs() < 0.05,
        "{}",
        horizontal.slope
    );
}

#[test]
fn low_count_endpoints_cover_every_low_count_cylinder() {
    let carpet: Ifs<f64> = catalog("sierpinski-carpet").unwrap();
    for n in 1..=5 {
        let rho = level_scale(&carpet, n);
        let set = stopping_set(&carpet, rho).unwrap();
        for beta in [0.0, 0.4, 1.1] {
            let dir = Direction::planar(beta);
            let index = SliceIndex::new(set.disks(), &dir);
            for start in 0..40 {
                let lo = -0.2 + 1.6 * start as f64 / 40.0;
                let xs: Vec<f64> = (0..=64).map(|j| lo + rho * j as f64 / 64.0).collect();
                let counts: Vec<usize> = xs.iter().map(|&x| index.count(x)).collect();
                let mut sorted = counts.clone();
                sorted.sort_unstable();
                // Bound at the median count of the interval, so some points are low and some not.
                let bound = sorted[sorted.len() / 2];
                let Some((x1, x2)) = low_count_endpoints(&index, &xs, bound) else {
                    continue;
                };
                let mut covered = index.hits(x1);
                covered.extend(index.hits(x2));
                for (&x, &c) in xs.iter().zip(&counts) {
                    if c <= bound {
                        assert!(
                            index.hits(x).iter().all(|h| covered.contains(h)),
                            "n={n} beta={beta} x={x}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn deeper_samples_never_project_larger() {
    let (ifs, law) = mandelbrot_config::<f64>(3, 2, 0.8).unwrap();
    let dir = Direction::planar(0.3);
    for seed in 0..6u64 {
        let (shallow, _) = sample_surviving(&law, 9, 4, seed, 1000).unwrap();
        let deep = sample_tree(&law, 9, 6, shallow.seed()).unwrap();
        let rho = level_scale(&ifs, 3);
        let a = projection_measure(
            CellSource::Sample {
                ifs: &ifs,
                sample: &shallow,
            },
            &dir,
            rho,
        )
        .unwrap();
        let b = projection_measure(
            CellSource::Sample {
                ifs: &ifs,
                sample: &deep,
            },
            &dir,
            rho,
        )
        .unwrap();
        assert!(b <= a + 1e-12, "seed {seed}: {b} > {a}");
    }
}

#[test]
fn refined_covers_of_interval_projections_agree() {
    for name in catalog_names() {
        let ifs: Ifs<f64> = catalog(name).unwrap();
        if ifs.metadata().hull_projection != Some(true) {
            continue;
        }
        for beta in [0.0, 0.7, 2.0] {
            let dir = Direction::planar(beta);
            for n in 1..=5 {
                let rho = level_scale(&ifs, n);
                let fine = level_scale(&ifs, n + 1);
                let a = projection_measure(CellSource::Full(&ifs), &dir, rho).unwrap();
                let b = projection_measure(CellSource::Full(&ifs), &dir, fine).unwrap();
                assert!(
                    b <= a + 1e-12 && a - b <= 4.0 * rho,
                    "{name} beta={beta} n={n}"
                );
            }
        }
    }
}

#[test]
fn section_slopes_stay_in_range() {
    for name in catalog_names() {
        let ifs: Ifs<f64> = catalog(name).unwrap();
        // Coincident cylinders are counted with multiplicity, so a one-point attractor
        // has slope log m / log(1/r).
        if ifs.metadata().labels.iter().any(|l| l == "degenerate") {
            continue;
        }
        let scales: Vec<f64> = (2..=6).map(|n| level_scale(&ifs, n)).collect();
        for beta in [0.0, 0.5, 1.3, 2.6] {
            let dir = Direction::planar(beta);
            let c = dir.project(&ifs.ball().center);
            let r = ifs.ball().radius;
            for j in 1..8 {
                let x = c - r + 2.0 * r * j as f64 / 8.0;
                match section_dim(CellSource::Full(&ifs), &dir, x, &scales) {
                    Ok(est) => {
                        assert!(est.slope <= 1.1, "{name} beta={beta} x={x}: {}", est.slope);
                        // A shrinking count means the line misses the set and only grazes
                        // coarse disks; the lower bound applies to sections that persist.
                        let persists = est.log_counts.windows(2).all(|w| w[1] >= w[0])
                            && est.log_counts.len() == scales.len();
                        assert!(
                            !persists || est.slope >= -0.1,
                            "{name} beta={beta} x={x}: {}",
                            est.slope
                        );
                    }
                    Err(Error::InsufficientData { .. }) => {}
                    Err(e) => panic!("{name}: {e}"),
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sample_counts_never_exceed_full_counts(
        seed in any::<u64>(),
        alpha in 0.0f64..0.6,
        x in -0.1f64..1.1,
        beta in 0.0f64..3.1,
        n in 1i32..5,
    ) {
        let carpet: Ifs<f64> = catalog("sierpinski-carpet").unwrap();
        let law = standard_law(&carpet, alpha).unwrap();
        let sample = sample_tree(&law, 8, 5, seed).unwrap();
        let dir = Direction::planar(beta);
        let rho = level_scale(&carpet, n);
        let full = count_slice(CellSource::Full(&carpet), &dir, x, rho).unwrap().count;
        let part = count_slice(CellSource::Sample { ifs: &carpet, sample: &sample }, &dir, x, rho)
            .unwrap()
            .count;
        prop_assert!(part <= full);
    }

    #[test]
    fn sample_cover_words_survive(seed in any::<u64>(), n in 1i32..4) {
        let carpet: Ifs<f64> = catalog("sierpinski-carpet").unwrap();
        let law = standard_law(&carpet, 0.3).unwrap();
        let sample = sample_tree(&law, 8, 4, seed).unwrap();
        let cover = CellSource::Sample { ifs: &carpet, sample: &sample }
            .cover(level_scale(&carpet, n))
            .unwrap();
        for w in cover.to_words() {
            prop_assert!(word_survives(&law, 8, seed, &w).unwrap());
        }
    }
}
