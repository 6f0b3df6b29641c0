use dimlab_core::measures::{projected_support_dimension, SubsetLaw};
use dimlab_core::rng::CounterRng;
use dimlab_core::{
    catalog, convolution_split, cylinder_mass, measure_dimension, sample_measure, select_q, sq_law,
    Direction, FourierSystem, Ifs, RandomWeightLaw, Word,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Binomial, Distribution};

fn rotational() -> Ifs<f64> {
    catalog("rotational").unwrap()
}

fn sdim() -> f64 {
    3f64.ln() / 2f64.ln()
}

fn block_setup(depth: usize, seed: u64) -> (FourierSystem, dimlab_core::MeasureSample) {
    let ifs = rotational();
    let law = sq_law(&ifs, 0.3, 2).unwrap();
    let system = FourierSystem::new(&ifs.power_system(2, 100).unwrap(), 1).unwrap();
    (system, sample_measure(&law, depth, seed).unwrap())
}

#[test]
fn cylinder_masses_sum_to_one() {
    let laws = [
        sq_law(&rotational(), 0.3, 2).unwrap(),
        RandomWeightLaw::mixture(vec![
            (vec![0.5, 0.25, 0.25], 0.3),
            (vec![0.1, 0.0, 0.9], 0.7),
        ])
        .unwrap(),
    ];
    for law in laws {
        let m = law.arity() as u32;
        let sample = sample_measure(&law, 6, 8).unwrap();
        for k in 0..=6usize {
            if (m as usize).pow(k as u32) > 600_000 {
                break;
            }
            let mut w = vec![0u32; k];
            let mut total = 0.0;
            loop {
                total += cylinder_mass(&sample, &Word::new(w.clone())).unwrap();
                if !increment(&mut w, m) {
                    break;
                }
            }
            assert!((total - 1.0).abs() < 1e-10, "k = {k}: {total}");
        }
    }
}

fn increment(w: &mut [u32], m: u32) -> bool {
    for s in w.iter_mut().rev() {
        *s += 1;
        if *s < m {
            return true;
        }
        *s = 0;
    }
    false
}

#[test]
fn transform_at_origin_is_one() {
    let (system, sample) = block_setup(40, 2);
    let z = system.mu(&sample, [0.0, 0.0], 40).unwrap();
    assert_eq!(z.value, Complex64::new(1.0, 0.0));
}

#[test]
fn subset_law_retention_and_size() {
    let ifs = rotational();
    let RandomWeightLaw::Subset(law) = sq_law(&ifs, 0.3, 2).unwrap() else {
        panic!("subset law expected");
    };
    let target = 0.5f64.powf(2.0 * (sdim() - 1.0 - 0.3));
    let draws = 100_000;
    let mut kept = vec![0usize; law.alphabet];
    let mut rng = CounterRng::new(99, 0);
    let mut set = Vec::new();
    for _ in 0..draws {
        set.clear();
        law.draw_subset(&mut rng, &mut set);
        assert!(set.len() >= 2);
        for &s in &set {
            kept[s as usize] += 1;
        }
    }
    let se = (target * (1.0 - target) / draws as f64).sqrt();
    for k in kept {
        let freq = k as f64 / draws as f64;
        assert!((freq - target).abs() <= 3.0 * se, "{freq} vs {target}");
    }
}

#[test]
fn mean_weights_are_uniform() {
    let law = sq_law(&rotational(), 0.3, 2).unwrap();
    let draws = 20_000;
    let mut sum = [0.0; 9];
    let mut sum2 = [0.0; 9];
    for t in 0..draws {
        let x = law.draw(&mut CounterRng::new(5, t));
        for i in 0..9 {
            sum[i] += x[i];
            sum2[i] += x[i] * x[i];
        }
    }
    let n = draws as f64;
    for i in 0..9 {
        let mean = sum[i] / n;
        let se = ((sum2[i] / n - mean * mean) / n).sqrt();
        assert!((mean - 1.0 / 9.0).abs() <= 4.0 * se, "symbol {i}: {mean}");
    }
}

#[test]
fn dimension_estimate_matches_independent_simulation() {
    let ifs = rotational();
    let q = 8;
    let law = sq_law(&ifs, 0.3, q).unwrap();
    let RandomWeightLaw::Subset(SubsetLaw { alphabet, p, .. }) = law else {
        panic!("subset law expected");
    };
    let trials = 20_000;
    let est = measure_dimension(&law, 0.5, trials, 1).unwrap();
    let mut rng = StdRng::seed_from_u64(2024);
    let bin = Binomial::new(alphabet as u64 - 2, p).unwrap();
    let norm = q as f64 * 2f64.ln();
    let samples: Vec<f64> = (0..trials)
        .map(|_| ((2 + bin.sample(&mut rng)) as f64).ln() / norm)
        .collect();
    let mean = samples.iter().sum::<f64>() / trials as f64;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
    let se = (est.std_error.powi(2) + var / trials as f64).sqrt();
    assert!(
        (est.mean - mean).abs() <= 3.0 * se,
        "{} vs {mean}",
        est.mean
    );
}

#[test]
fn selected_q_reaches_the_proxy_target() {
    let (q, _, est) = select_q(&rotational(), 0.3, 8, 50_000, 3).unwrap();
    assert!(q >= 2);
    assert!(est.mean >= 1.15);
}

#[test]
fn projected_support_has_full_dimension() {
    let ifs = rotational();
    let power = ifs.power_system(2, 100).unwrap();
    let law = sq_law(&ifs, 0.3, 2).unwrap();
    let sample = sample_measure(&law, 7, 11).unwrap();
    for j in 0..12 {
        let dir = Direction::planar(std::f64::consts::PI * j as f64 / 12.0);
        let est = projected_support_dimension(&power, &sample, &dir, 7, 2..=7).unwrap();
        assert!(est.slope >= 0.9, "direction {j}: {}", est.slope);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn factors_are_contractions(seed in any::<u64>(), n in 0usize..30, x in -1e4f64..1e4, y in -1e4f64..1e4) {
        let (system, sample) = block_setup(30, seed);
        let psi = system.psi(&sample, n, [x, y]).unwrap();
        prop_assert!(psi.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn split_reproduces_whole(seed in any::<u64>(), k in 2usize..6, x in -50f64..50.0, y in -50f64..50.0) {
        let (system, sample) = block_setup(30, seed);
        let whole = system.mu(&sample, [x, y], 30).unwrap().value;
        let split = convolution_split(30, k).unwrap();
        let a = system.partial_product(&sample, &split.mu, [x, y]).unwrap();
        let b = system.partial_product(&sample, &split.eta, [x, y]).unwrap();
        prop_assert!((whole - a * b).norm() <= 1e-12);
    }

    #[test]
    fn truncation_stays_within_tail_bound(seed in any::<u64>(), x in -7f64..7.0, y in -7f64..7.0, n in 1usize..20) {
        let (system, sample) = block_setup(40, seed);
        let short = system.mu(&sample, [x, y], n).unwrap();
        let long = system.mu(&sample, [x, y], 40).unwrap();
        prop_assert!((short.value - long.value).norm() <= short.tail_bound + 1e-12);
    }
}
