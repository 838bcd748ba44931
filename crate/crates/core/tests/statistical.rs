//! Monte-Carlo properties: null calibration, the variance constant,
//! consistency, sure screening, rank consistency and FDR control.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sitscreen::simlab::{
    generate_design, generate_response, run_study, DesignSpec, ModelId, ModelSpec, StudyConfig,
};
use sitscreen::*;

fn ks_to_normal(mut z: Vec<f64>) -> f64 {
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = z.len() as f64;
    z.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
        let f = 1.0 - normal_sf(v);
        d.max((f - i as f64 / m).abs())
            .max(((i + 1) as f64 / m - f).abs())
    })
}

#[test]
fn null_distribution_is_standard_normal() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (n, reps) = (1024, 2000);
    let z: Vec<f64> = (0..reps)
        .map(|r| {
            let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let s = PairedSample::new(&x, &y).unwrap();
            sliced_estimate(&s, &SliceConfig::new(8, r).unwrap())
                .unwrap()
                .z
        })
        .collect();
    let mean = z.iter().sum::<f64>() / reps as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    let ks = ks_to_normal(z);
    assert!(mean.abs() < 0.1, "mean {mean}");
    assert!((var - 1.0).abs() < 0.15, "var {var}");
    assert!(ks < 0.05, "ks {ks}");
}

#[test]
fn plugin_variance_recovers_continuous_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let y: Vec<f64> = (0..10_000)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let cal = plugin_calibration(&y).unwrap();
    assert!((cal.sigma_sq - 0.8).abs() < 0.05, "{cal:?}");
    assert!((cal.theta2.unwrap() - 1.0 / 6.0).abs() < 0.01);
    assert!((cal.theta1.unwrap() - 1.0 / 90.0).abs() < 0.001);
}

#[test]
fn statistic_grows_with_sample_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut means = Vec::new();
    for n in [128usize, 512, 2048] {
        let total: f64 = (0..200)
            .map(|r| {
                let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let y: Vec<f64> = x
                    .iter()
                    .map(|v| {
                        v + 0.3 * {
                            let e: f64 = StandardNormal.sample(&mut rng);
                            e
                        }
                    })
                    .collect::<Vec<f64>>();
                sliced_statistic(&x, &y, r)
            })
            .sum();
        means.push(total / 200.0);
    }
    assert!(
        means[1] >= means[0] - 0.02 && means[2] >= means[1] - 0.02,
        "{means:?}"
    );
    assert!(means[2] < 1.0);
}

fn sliced_statistic(x: &[f64], y: &[f64], seed: u64) -> f64 {
    sitscreen::estimator::sliced_statistic(
        &PairedSample::new(x, y).unwrap(),
        &SliceConfig::new(8, seed).unwrap(),
    )
    .unwrap()
}

#[test]
fn null_screening_rejects_at_nominal_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (n, p) = (1024, 100);
    let mut rejected = 0;
    for rep in 0..50 {
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.random()).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let data = Dataset::from_columns(cols, y, None).unwrap();
        let res = screen_all(&data, &SliceConfig::new(8, rep).unwrap()).unwrap();
        rejected += res.p_values.iter().filter(|&&v| v <= 0.05).count();
    }
    let rate = rejected as f64 / (50.0 * p as f64);
    assert!((rate - 0.05).abs() <= 0.02, "rate {rate}");
}

#[test]
fn permuting_columns_permutes_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 256;
    let cols: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..n).map(|_| rng.random()).collect())
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| cols[1][i] + 0.5 * rng.random::<f64>())
        .collect();
    let perm = [3, 5, 0, 1, 4, 2];
    let shuffled: Vec<Vec<f64>> = perm.iter().map(|&k| cols[k].clone()).collect();
    let cfg = SliceConfig::new(16, 1).unwrap();
    let a = screen_all(&Dataset::from_columns(cols, y.clone(), None).unwrap(), &cfg).unwrap();
    let b = screen_all(&Dataset::from_columns(shuffled, y, None).unwrap(), &cfg).unwrap();
    for (j, &k) in perm.iter().enumerate() {
        assert_eq!(a.omega[k].to_bits(), b.omega[j].to_bits());
    }
}

fn study(
    model: ModelId,
    n: usize,
    p: usize,
    s: usize,
    rho: f64,
    c: usize,
    rules: Vec<ThresholdRule>,
) -> StudyConfig {
    StudyConfig {
        n,
        p,
        rho,
        model: ModelSpec::new(model, s).unwrap(),
        c,
        rules,
        reps: 100,
        master_seed: 20_240_601,
        sigma: SigmaMode::Auto,
    }
}

#[test]
fn sure_screening_and_rank_consistency() {
    let cfg = study(
        ModelId::A1,
        256,
        1000,
        4,
        0.5,
        32,
        vec![ThresholdRule::HardSize { d: 32 }],
    );
    let report = run_study(&cfg).unwrap();
    assert!(report.rules[0].p_a >= 0.98, "{report:?}");
    assert!(report.rank_consistency >= 0.98, "{report:?}");
}

#[test]
fn fdr_control_and_sure_screening_under_adaptive_threshold() {
    let cfg = study(
        ModelId::C1,
        1024,
        5000,
        20,
        0.5,
        32,
        vec![ThresholdRule::By { q: 0.1 }],
    );
    let report = run_study(&cfg).unwrap();
    let by = &report.rules[0];
    assert!(by.mean_fdp <= 0.18, "FDR {}", by.mean_fdp);
    for &(k, prop) in &by.selection_proportions {
        assert!(prop >= 0.95, "covariate {k}: {prop}");
    }
}

#[test]
fn exponential_covariate_map_leaves_everything_unchanged() {
    let model = ModelSpec::new(ModelId::A3, 4).unwrap();
    for rep in 0..5u64 {
        let x = generate_design(&DesignSpec {
            n: 200,
            p: 60,
            rho: 0.5,
            seed: rep,
        })
        .unwrap();
        let y = generate_response(&x, &model, rep + 100).unwrap();
        let data = Dataset::new(x, y, None).unwrap();
        let mapped = data.map_covariates(f64::exp).unwrap();
        let cfg = SliceConfig::new(8, rep).unwrap();
        let a = screen_all(&data, &cfg).unwrap();
        let b = screen_all(&mapped, &cfg).unwrap();
        assert_eq!(a, b);
        for rule in [
            ThresholdRule::HardSize { d: 10 },
            ThresholdRule::By { q: 0.1 },
            ThresholdRule::Bh { q: 0.2 },
        ] {
            assert_eq!(
                apply_rule(&a, &rule).unwrap(),
                apply_rule(&b, &rule).unwrap()
            );
        }
    }
}

#[test]
fn pure_noise_augmentation_selects_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (n, p) = (512, 200);
    let mut total = 0;
    for rep in 0..20u64 {
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.random()).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let data = Dataset::from_columns(cols, y, None).unwrap();
        let noise = augment_with_noise(&data, &[], p, rep).unwrap();
        let res = screen_all(&noise, &SliceConfig::new(16, rep).unwrap()).unwrap();
        total += by_threshold(&res, &FdrConfig::by(0.1).unwrap()).num_selected;
    }
    assert!(
        total as f64 / 20.0 <= 0.2,
        "average selected {}",
        total as f64 / 20.0
    );
}

#[test]
fn augmentation_retains_strong_signals() {
    let model = ModelSpec::new(ModelId::C1, 10).unwrap();
    let mut retained = 0;
    let seeds = 20u64;
    for rep in 0..seeds {
        let x = generate_design(&DesignSpec {
            n: 512,
            p: 400,
            rho: 0.3,
            seed: rep,
        })
        .unwrap();
        let y = generate_response(&x, &model, rep + 1).unwrap();
        let data = Dataset::new(x, y, None).unwrap();
        let cfg = SliceConfig::new(16, rep).unwrap();
        let fdr = FdrConfig::by(0.1).unwrap();
        let first = by_threshold(&screen_all(&data, &cfg).unwrap(), &fdr);
        let num_aux = data.p() - first.num_selected;
        let aug = augment_with_noise(&data, &first.selected, num_aux, rep).unwrap();
        let second = by_threshold(&screen_all(&aug, &cfg).unwrap(), &fdr);
        // kept columns occupy the first positions of the augmented data
        if (0..first.num_selected).all(|j| second.selected.contains(&j)) {
            retained += 1;
        }
    }
    assert!(
        retained as f64 / seeds as f64 >= 0.9,
        "retained in {retained}/{seeds}"
    );
}
