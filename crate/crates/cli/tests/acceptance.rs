//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status
//! if any criterion fails. Every seed below is fixed in advance.

use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sitscreen::estimator::sliced_statistic;
use sitscreen::oracle::{compare_estimate, compare_threshold, oracle_estimate};
use sitscreen::simlab::{
    generate_design, generate_response, run_study, DesignSpec, ModelId, ModelSpec,
    SimulationReport, StudyConfig,
};
use sitscreen::*;

const SEED: u64 = 20_240_601;
const BIN: &str = env!("CARGO_BIN_EXE_sit-screen");

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed < Duration::from_secs(limit_secs)
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize, tied: bool) -> (Vec<f64>, Vec<f64>) {
    let draw = |rng: &mut ChaCha8Rng| {
        if tied {
            rng.random_range(0..6) as f64
        } else {
            rng.random::<f64>()
        }
    };
    let x = (0..n).map(|_| draw(rng)).collect();
    let y = (0..n).map(|_| draw(rng)).collect();
    (x, y)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut exact, mut errors, mut mismatches) = (0, 0, 0);
    for i in 0..500 {
        let n = rng.random_range(8..=128);
        let c = [2, 4, 8][rng.random_range(0..3)];
        let (x, y) = random_pair(&mut rng, n, i % 2 == 1);
        let cfg = SliceConfig::new(c, rng.random()).unwrap();
        let sample = PairedSample::new(&x, &y).unwrap();
        match compare_estimate(&sample, &cfg) {
            Ok(r) if r.agrees => exact += 1,
            Ok(_) => mismatches += 1,
            // both paths must reject the same instances
            Err(e) if oracle_estimate(&sample, &cfg).err().as_ref() == Some(&e) => errors += 1,
            Err(_) => mismatches += 1,
        }
    }
    let t = start.elapsed();
    check(
        mismatches == 0 && within(t, 60),
        format!(
            "{exact} exact, {errors} rejected identically, {mismatches} mismatches, {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn hand_computed() -> Outcome {
    let x = [1.0, 2.0, 3.0, 4.0];
    let cfg = SliceConfig::new(2, 0).unwrap();
    let mut detail = String::new();
    let mut ok = true;
    for (y, expected) in [([1.0, 2.0, 3.0, 4.0], 0.4), ([1.0, 4.0, 2.0, 3.0], -0.2)] {
        let v = sliced_statistic(&PairedSample::new(&x, &y).unwrap(), &cfg).unwrap();
        ok &= v == expected;
        write!(detail, "{v} (expected {expected}) ").unwrap();
    }
    check(ok, detail.trim_end().to_string())
}

fn monotone_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut failures = 0;
    for _ in 0..100 {
        let c = [2, 4, 8][rng.random_range(0..3)];
        let n = c * rng.random_range(2..=16);
        let (x, y) = random_pair(&mut rng, n, false);
        let cfg = SliceConfig::new(c, rng.random()).unwrap();
        let omega = |x: &[f64], y: &[f64]| {
            sliced_statistic(&PairedSample::new(x, y).unwrap(), &cfg)
                .unwrap()
                .to_bits()
        };
        let base = omega(&x, &y);
        let up_x: Vec<f64> = x.iter().map(|v| (3.0 * v).exp() - 1.0).collect();
        let up_y: Vec<f64> = y.iter().map(|v| v.powi(3) + v).collect();
        let down_x: Vec<f64> = x.iter().map(|v| -v.ln_1p()).collect();
        if omega(&up_x, &y) != base || omega(&x, &up_y) != base || omega(&down_x, &y) != base {
            failures += 1;
        }
    }
    check(failures == 0, format!("{failures}/100 instances changed"))
}

fn ks_to_normal(mut z: Vec<f64>) -> f64 {
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = z.len() as f64;
    z.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
        let f = 1.0 - normal_sf(v);
        d.max(f - i as f64 / m).max((i + 1) as f64 / m - f)
    })
}

fn null_calibration() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let reps = 2000;
    let z: Vec<f64> = (0..reps)
        .map(|r| {
            let x: Vec<f64> = (0..1024).map(|_| StandardNormal.sample(&mut rng)).collect();
            let y: Vec<f64> = (0..1024).map(|_| StandardNormal.sample(&mut rng)).collect();
            let cfg = SliceConfig::new(8, r).unwrap();
            sliced_estimate(&PairedSample::new(&x, &y).unwrap(), &cfg)
                .unwrap()
                .z
        })
        .collect();
    let mean = z.iter().sum::<f64>() / reps as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    let ks = ks_to_normal(z);
    let t = start.elapsed();
    check(
        mean.abs() < 0.1 && (var - 1.0).abs() < 0.15 && ks < 0.05 && within(t, 120),
        format!(
            "mean {mean:.4}, var {var:.4}, KS {ks:.4}, {:.1}s",
            t.as_secs_f64()
        ),
    )
}

fn sigma_constant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let y: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let cal = plugin_calibration(&y).map_err(|e| e.to_string())?;
    let theta2 = cal.theta2.unwrap_or(f64::NAN);
    check(
        (cal.sigma_sq - 0.8).abs() <= 0.05 && (theta2 - 1.0 / 6.0).abs() <= 0.01,
        format!("sigma^2 {:.5}, theta2 {theta2:.5}", cal.sigma_sq),
    )
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
        master_seed: SEED,
        sigma: SigmaMode::Auto,
    }
}

fn run(cfg: &StudyConfig) -> std::result::Result<SimulationReport, String> {
    run_study(cfg).map_err(|e| e.to_string())
}

fn table1() -> Outcome {
    let start = Instant::now();
    let hard = vec![ThresholdRule::HardSize { d: 32 }];
    let sit32 = run(&study(ModelId::A1, 256, 1000, 4, 0.5, 32, hard.clone()))?;
    let sit2 = run(&study(ModelId::A1, 256, 1000, 4, 0.5, 2, hard))?;
    let t = start.elapsed();
    let (pa32, med32, pa2) = (
        sit32.rules[0].p_a,
        sit32.mms_quantiles.q50,
        sit2.rules[0].p_a,
    );
    check(
        pa32 >= 0.98 && med32 == 4 && (0.55..=0.80).contains(&pa2) && within(t, 600),
        format!(
            "c=32: P_a {pa32:.3}, MMS {:?}; c=2: P_a {pa2:.3}, MMS {:?}; {:.1}s",
            sit32.mms_quantiles,
            sit2.mms_quantiles,
            t.as_secs_f64()
        ),
    )
}

fn table2() -> Outcome {
    let r = run(&study(
        ModelId::B4,
        256,
        1000,
        4,
        0.8,
        32,
        vec![ThresholdRule::HardSize { d: 32 }],
    ))?;
    let q = r.mms_quantiles;
    check(
        q.q50 == 4 && q.q95 <= 8,
        format!("MMS {q:?}, P_a {:.3}", r.rules[0].p_a),
    )
}

fn table3() -> Outcome {
    let rules = vec![ThresholdRule::By { q: 0.1 }, ThresholdRule::Bh { q: 0.1 }];
    let start = Instant::now();
    let smoke = run(&study(ModelId::C1, 1024, 1000, 20, 0.5, 32, rules.clone()))?;
    let t_smoke = start.elapsed();
    let start = Instant::now();
    let full = run(&study(ModelId::C1, 1024, 5000, 20, 0.5, 32, rules))?;
    let t_full = start.elapsed();
    let (by, bh) = (&full.rules[0], &full.rules[1]);
    check(
        (0.05..=0.19).contains(&by.mean_fdp)
            && (19.0..=28.0).contains(&by.ams)
            && bh.mean_fdp >= 0.30
            && within(t_full, 1800)
            && within(t_smoke, 180),
        format!(
            "BY FDP {:.3} AMS {:.2}; BH FDP {:.3} AMS {:.2}; {:.1}s (p=1000 smoke: BY FDP {:.3}, {:.1}s)",
            by.mean_fdp,
            by.ams,
            bh.mean_fdp,
            bh.ams,
            t_full.as_secs_f64(),
            smoke.rules[0].mean_fdp,
            t_smoke.as_secs_f64()
        ),
    )
}

fn threshold_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let (mut mismatch, mut order_violations) = (0, 0);
    for _ in 0..200 {
        let p = rng.random_range(1..=300);
        let signal = rng.random_range(0..=p / 3);
        let omega: Vec<f64> = (0..p)
            .map(|k| {
                let w: f64 = if k < signal {
                    rng.random_range(0.0..0.15)
                } else {
                    rng.random_range(-0.03..0.03)
                };
                (w * 1000.0).round() / 1000.0
            })
            .collect();
        let result = ScreeningResult::from_omega(
            omega,
            1024,
            SliceConfig::new(32, 0).unwrap(),
            VarianceCalibration::fixed(),
        );
        let q = rng.random_range(0.01..0.4);
        let by = FdrConfig::by(q).unwrap();
        let bh = FdrConfig::bh(q).unwrap();
        mismatch += [by, bh]
            .iter()
            .filter(|cfg| !compare_threshold(&result, cfg).agrees)
            .count();
        let sel_by = by_threshold(&result, &by).selected;
        let sel_bh = by_threshold(&result, &bh).selected;
        let sel_by_wider =
            by_threshold(&result, &FdrConfig::by((2.0 * q).min(0.99)).unwrap()).selected;
        if !sel_by.iter().all(|k| sel_bh.contains(k))
            || !sel_by.iter().all(|k| sel_by_wider.contains(k))
        {
            order_violations += 1;
        }
    }
    check(
        mismatch + order_violations == 0,
        format!("{mismatch} oracle mismatches, {order_violations} ordering violations"),
    )
}

fn screening_time(data: &Dataset, pool: &rayon::ThreadPool) -> Duration {
    let cfg = SliceConfig::new(32, SEED).unwrap();
    (0..3)
        .map(|_| {
            let start = Instant::now();
            pool.install(|| screen_all(data, &cfg)).unwrap();
            start.elapsed()
        })
        .min()
        .unwrap()
}

fn performance() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .map_err(|e| e.to_string())?;
    let model = ModelSpec::new(ModelId::C1, 20).unwrap();
    let mut times = Vec::new();
    for p in [5000, 10_000] {
        let x = generate_design(&DesignSpec {
            n: 1024,
            p,
            rho: 0.5,
            seed: SEED,
        })
        .unwrap();
        let y = generate_response(&x, &model, SEED).unwrap();
        let data = Dataset::new(x, y, None).unwrap();
        times.push(screening_time(&data, &pool));
    }
    let ratio = times[1].as_secs_f64() / times[0].as_secs_f64();
    check(
        within(times[0], 30) && ratio <= 2.6,
        format!(
            "p=5000: {:.3}s, p=10000: {:.3}s, ratio {ratio:.2}",
            times[0].as_secs_f64(),
            times[1].as_secs_f64()
        ),
    )
}

fn write_fixture(path: &Path) {
    let x = generate_design(&DesignSpec {
        n: 600,
        p: 300,
        rho: 0.5,
        seed: SEED,
    })
    .unwrap();
    let y = generate_response(&x, &ModelSpec::new(ModelId::A3, 6).unwrap(), SEED).unwrap();
    let mut text = (1..=300)
        .map(|k| format!("g{k}"))
        .collect::<Vec<_>>()
        .join(",")
        + ",y\n";
    for (i, yi) in y.iter().enumerate() {
        for k in 0..300 {
            write!(text, "{},", x[[i, k]]).unwrap();
        }
        writeln!(text, "{yi}").unwrap();
    }
    std::fs::write(path, text).unwrap();
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("data.csv");
    write_fixture(&input);
    let input = input.to_str().unwrap();
    let commands: [&[&str]; 2] = [
        &[
            "screen",
            "--input",
            input,
            "--response",
            "y",
            "--rule",
            "by",
            "--q",
            "0.1",
            "--no-timing",
        ],
        &[
            "simulate",
            "--model",
            "c1",
            "--n",
            "256",
            "--p",
            "400",
            "--s",
            "8",
            "--rule",
            "by",
            "--rule",
            "bh",
            "--reps",
            "8",
            "--no-timing",
        ],
    ];
    let mut detail = Vec::new();
    for args in commands {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "8"] {
            let out = Command::new(BIN)
                .args(args)
                .env("SIT_SCREEN_THREADS", threads)
                .output()
                .map_err(|e| e.to_string())?;
            if !out.status.success() {
                return Err(format!(
                    "{} failed: {}",
                    args[0],
                    String::from_utf8_lossy(&out.stderr)
                ));
            }
            outputs.push(out.stdout);
        }
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        detail.push(format!(
            "{}: {} bytes, identical={same}",
            args[0],
            outputs[0].len()
        ));
        if !same {
            return Err(detail.join("; "));
        }
    }
    Ok(detail.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("oracle equivalence (500 instances)", oracle_equivalence),
        ("hand-computed values", hand_computed),
        ("monotone invariance (100 instances)", monotone_invariance),
        ("null calibration (2000 reps)", null_calibration),
        ("variance constant", sigma_constant),
        ("study 1 sure screening (a1)", table1),
        ("study 2 model size (b4)", table2),
        ("study 3 FDR control (c1)", table3),
        ("threshold oracle (200 instances)", threshold_oracle),
        ("performance", performance),
        ("determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{:>2}] {name}: {detail}", i + 1);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
