//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! values, against fixed tolerances and time budgets. Runs as a plain
//! binary so every line is printed whether or not it passes.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use odaq_core::artifacts::{apply_pe, apply_sh, apply_sh_with_stats, generate_condition, params_for, ArtifactParams};
use odaq_core::bench::{
    benchmark, fisher_aggregate, from_records, load_scores, mean_ci, pearson, post_screen, BenchmarkOptions, ColumnMapping,
    GroupBy, PairStatus, ScoreRecord,
};
use odaq_core::metrics::{nmr, si_sdr, MetricScore};
use odaq_core::signal::{integrated_loudness, ms_decode, ms_encode, normalize_loudness, write_wav, AudioBuffer, BitDepth};
use odaq_core::{Cohort, Condition, ProcessingMethod, QualityLevel};

const SR: u32 = 48_000;

type Verdict = Result<String, String>;

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| Distribution::<f64>::sample(&StandardNormal, rng)).collect()
}

/// White noise shaped to a 1/f spectrum.
fn pink(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut b = [0.0f64; 7];
    gaussian(rng, n)
        .into_iter()
        .map(|w| {
            b[0] = 0.99886 * b[0] + w * 0.0555179;
            b[1] = 0.99332 * b[1] + w * 0.0750759;
            b[2] = 0.96900 * b[2] + w * 0.1538520;
            b[3] = 0.86650 * b[3] + w * 0.3104856;
            b[4] = 0.55000 * b[4] + w * 0.5329522;
            b[5] = -0.7616 * b[5] - w * 0.0168980;
            let y = b.iter().sum::<f64>() + w * 0.5362;
            b[6] = w * 0.115926;
            0.05 * y
        })
        .collect()
}

fn pink_stereo(seed: u64, seconds: f64) -> AudioBuffer<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (seconds * f64::from(SR)) as usize;
    let l = pink(&mut rng, n);
    let r = pink(&mut rng, n);
    AudioBuffer::stereo(SR, l, r).unwrap()
}

fn preset_table_fidelity() -> Verdict {
    use ArtifactParams::*;
    let expected: [(ProcessingMethod, [ArtifactParams; 5]); 5] = [
        (
            ProcessingMethod::LP,
            [5000.0, 9000.0, 10_500.0, 12_000.0, 15_000.0].map(|c| Lp { cutoff_hz: c }),
        ),
        (ProcessingMethod::TM, [3000.0, 5000.0, 7000.0, 9000.0, 10_500.0].map(|c| Tm { crossover_hz: c })),
        (ProcessingMethod::UN, [3000.0, 5000.0, 7000.0, 9000.0, 10_500.0].map(|c| Un { crossover_hz: c, seed: 0 })),
        (ProcessingMethod::SH, [0.70, 0.50, 0.30, 0.20, 0.10].map(|p| Sh { hole_prob: p, seed: 0 })),
        (
            ProcessingMethod::PE,
            [(10.0, 4096), (10.0, 2048), (10.0, 1024), (16.0, 2048), (16.0, 1024)]
                .map(|(nmr_db, block_length)| Pe { nmr_db, block_length, seed: 0 }),
        ),
    ];
    let mut wrong = Vec::new();
    for (method, cells) in &expected {
        for (q, want) in QualityLevel::ALL.iter().zip(cells) {
            let got = params_for(*method, *q).map_err(|e| e.to_string())?;
            if &got != want {
                wrong.push(format!("{method} {q}: {got:?}"));
            }
        }
    }
    if wrong.is_empty() {
        Ok("25/25 cells exact".into())
    } else {
        Err(format!("mismatched cells: {}", wrong.join("; ")))
    }
}

/// Twenty signals with different spectra, envelopes, levels and layouts.
fn loudness_fixtures() -> Vec<AudioBuffer<f64>> {
    let n = 3 * SR as usize;
    let t = |i: usize| i as f64 / f64::from(SR);
    (0..20u64)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + k);
            let gain = 10f64.powf(-((k % 5) as f64) * 0.4);
            let base: Vec<f64> = match k % 5 {
                0 => pink(&mut rng, n),
                1 => gaussian(&mut rng, n).into_iter().map(|v| 0.05 * v).collect(),
                2 => (0..n)
                    .map(|i| {
                        [220.0, 660.0, 1870.0, 5300.0, 11_000.0]
                            .iter()
                            .enumerate()
                            .map(|(h, f)| 0.08 / (h + 1) as f64 * (2.0 * std::f64::consts::PI * f * (1.0 + 0.01 * k as f64) * t(i)).sin())
                            .sum()
                    })
                    .collect(),
                3 => (0..n)
                    .map(|i| {
                        let f0: f64 = 100.0;
                        let f1: f64 = 16_000.0;
                        let dur = 3.0;
                        let phase = 2.0 * std::f64::consts::PI * f0 * dur / (f1 / f0).ln() * ((f1 / f0).powf(t(i) / dur) - 1.0);
                        0.2 * phase.sin()
                    })
                    .collect(),
                _ => {
                    let noise = pink(&mut rng, n);
                    noise.iter().enumerate().map(|(i, v)| v * (0.5 + 0.5 * (2.0 * std::f64::consts::PI * 4.0 * t(i)).sin()).powi(2) * 2.0).collect()
                }
            };
            let base: Vec<f64> = base.into_iter().map(|v| v * gain).collect();
            if k < 10 {
                let other: Vec<f64> = base.iter().zip(pink(&mut rng, n)).map(|(a, b)| 0.7 * a + 0.3 * b * gain).collect();
                AudioBuffer::stereo(SR, base, other).unwrap()
            } else {
                AudioBuffer::mono(SR, base).unwrap()
            }
        })
        .collect()
}

/// Method, level and measured loudness of one generated condition.
type Cell = (ProcessingMethod, QualityLevel, f64);

fn loudness_closure() -> Verdict {
    let fixtures = loudness_fixtures();
    let results: Vec<Result<Vec<Cell>, String>> = fixtures
        .par_iter()
        .enumerate()
        .map(|(k, item)| {
            let mut out = Vec::new();
            for method in ProcessingMethod::GENERATED {
                for q in QualityLevel::ALL {
                    let (buf, _) = generate_condition(item, method, q, 1000 + k as u64, -23.0).map_err(|e| format!("fixture {k} {method} {q}: {e}"))?;
                    let lufs = integrated_loudness(&buf).map_err(|e| e.to_string())?.lufs().ok_or("gated out")?;
                    out.push((method, q, lufs));
                }
            }
            Ok(out)
        })
        .collect();
    let (mut worst, mut worst_sh1, mut failures) = (0.0f64, 0.0f64, Vec::new());
    for (k, r) in results.into_iter().enumerate() {
        for (method, q, lufs) in r? {
            let dev = (lufs + 23.0).abs();
            let sh1 = method == ProcessingMethod::SH && q == QualityLevel::Q1;
            let tol = if sh1 { 1.0 } else { 0.1 };
            if sh1 {
                worst_sh1 = worst_sh1.max(dev);
            } else {
                worst = worst.max(dev);
            }
            if dev > tol {
                failures.push(format!("fixture {k} {method} {q}: {lufs:.3} LUFS"));
            }
        }
    }
    let detail = format!("20 fixtures x 25 cells; worst |dev| {worst:.4} LU, SH Q1 {worst_sh1:.4} LU");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; out of tolerance: {}", failures.join("; ")))
    }
}

fn ms_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // Values on the 24-bit PCM grid keep (L ± R) / 2 exact in f64.
    let grid = |rng: &mut ChaCha8Rng| f64::from(rng.random_range(-(1 << 23)..(1 << 23))) / f64::from(1 << 23);
    let n = 48_000;
    let l: Vec<f64> = (0..n).map(|_| grid(&mut rng)).collect();
    let r: Vec<f64> = (0..n).map(|_| grid(&mut rng)).collect();
    let st = AudioBuffer::stereo(SR, l, r).unwrap();
    let (m, s) = ms_encode(&st).map_err(|e| e.to_string())?;
    if ms_decode(&m, &s).map_err(|e| e.to_string())? != st {
        return Err("mid/side round trip is not exact on the PCM grid".into());
    }
    // The same on the 16-bit grid in single precision.
    let l16: Vec<f32> = (0..n).map(|_| f32::from(rng.random_range(i16::MIN..=i16::MAX)) / 32768.0).collect();
    let r16: Vec<f32> = (0..n).map(|_| f32::from(rng.random_range(i16::MIN..=i16::MAX)) / 32768.0).collect();
    let st16 = AudioBuffer::stereo(SR, l16, r16).unwrap();
    let (m16, s16) = ms_encode(&st16).map_err(|e| e.to_string())?;
    if ms_decode(&m16, &s16).map_err(|e| e.to_string())? != st16 {
        return Err("mid/side round trip is not exact on the 16-bit grid".into());
    }

    let mono = pink(&mut rng, 3 * SR as usize);
    let centre = AudioBuffer::stereo(SR, mono.clone(), mono).unwrap();
    let mut checked = Vec::new();
    for q in QualityLevel::ALL {
        for method in [ProcessingMethod::SH, ProcessingMethod::PE] {
            let params = match params_for(method, q).unwrap() {
                ArtifactParams::Sh { hole_prob, .. } => ArtifactParams::Sh { hole_prob, seed: 77 },
                ArtifactParams::Pe { nmr_db, block_length, .. } => ArtifactParams::Pe { nmr_db, block_length, seed: 77 },
                other => other,
            };
            let out = match method {
                ProcessingMethod::SH => apply_sh(&centre, &params),
                _ => apply_pe(&centre, &params),
            }
            .map_err(|e| e.to_string())?;
            if out.channel(0) != out.channel(1) {
                return Err(format!("{method} {q}: L != R for an L = R input"));
            }
            if out == centre {
                return Err(format!("{method} {q}: output unchanged"));
            }
            checked.push(format!("{method}{}", q.index() + 1));
        }
    }
    Ok(format!("round trip exact (24-bit grid in f64, 16-bit grid in f32); L = R preserved for {} SH/PE cells", checked.len()))
}

/// Mean pre-onset error energy for a silence-to-noise onset, averaged over
/// onset positions relative to the frame grid.
fn pre_echo_energy(block_length: usize, nmr_db: f64, window: usize) -> f64 {
    let mut total = 0.0;
    let offsets = 12;
    for k in 0..offsets {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + k as u64);
        let onset = SR as usize + k * 173;
        let n = onset + SR as usize;
        let burst = pink(&mut rng, n - onset);
        let mut x = vec![0.0; onset];
        x.extend(burst);
        let item = AudioBuffer::stereo(SR, x.clone(), x).unwrap();
        let params = ArtifactParams::Pe { nmr_db, block_length, seed: 31 + k as u64 };
        let out = apply_pe(&item, &params).unwrap();
        for ch in 0..2 {
            total += out.channel(ch)[onset - window..onset]
                .iter()
                .zip(&item.channel(ch)[onset - window..onset])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
    }
    total / offsets as f64
}

fn pe_nmr_closure() -> Verdict {
    let item = normalize_loudness(&pink_stereo(21, 10.0), -23.0).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, q) in QualityLevel::ALL.iter().enumerate() {
        let ArtifactParams::Pe { nmr_db, block_length, .. } = params_for(ProcessingMethod::PE, *q).unwrap() else {
            unreachable!()
        };
        let params = ArtifactParams::Pe { nmr_db, block_length, seed: 500 + i as u64 };
        let out = apply_pe(&item, &params).map_err(|e| e.to_string())?;
        let measured = nmr(&item, &out).map_err(|e| e.to_string())?;
        ok &= (measured - nmr_db).abs() <= 1.0;
        lines.push(format!("{nmr_db:.0}dB/{block_length}: {measured:.2}"));
    }
    let window = (0.020 * f64::from(SR)) as usize;
    let energies: Vec<f64> = [1024, 2048, 4096].into_iter().map(|b| pre_echo_energy(b, 10.0, window)).collect();
    let increasing = energies.windows(2).all(|w| w[1] > w[0]);
    let detail = format!(
        "NMR {}; 20 ms pre-onset energy 1024/2048/4096 = {:.3e}/{:.3e}/{:.3e}",
        lines.join(", "),
        energies[0],
        energies[1],
        energies[2]
    );
    match (ok, increasing) {
        (true, true) => Ok(detail),
        (false, _) => Err(format!("{detail}; NMR outside +-1 dB")),
        (true, false) => Err(format!("{detail}; pre-onset energy does not increase with block length")),
    }
}

fn sh_statistics() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let n = 60 * SR as usize;
    let item = AudioBuffer::stereo(SR, gaussian(&mut rng, n), gaussian(&mut rng, n)).unwrap();
    let z = 2.5758;
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, p) in [0.1, 0.5, 0.7].into_iter().enumerate() {
        let (_, stats) = apply_sh_with_stats(&item, &ArtifactParams::Sh { hole_prob: p, seed: 7 + i as u64 }).map_err(|e| e.to_string())?;
        let half = z * (p * (1.0 - p) / stats.total as f64).sqrt();
        let f = stats.fraction();
        ok &= (f - p).abs() <= half;
        parts.push(format!("p={p}: {f:.4} (+-{half:.4}, {} tiles)", stats.total));
    }
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(format!("{detail}; outside the 99% interval"))
    }
}

fn si_sdr_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 2 * SR as usize;
    let mut worst = 0.0f64;
    for k in 0..10 {
        let target_db = -10.0 + 5.0 * k as f64;
        let s = gaussian(&mut rng, n);
        let mut e = gaussian(&mut rng, n);
        let ss: f64 = s.iter().map(|v| v * v).sum();
        let proj = e.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() / ss;
        e.iter_mut().zip(&s).for_each(|(a, b)| *a -= proj * b);
        let alpha = 0.6;
        let ee: f64 = e.iter().map(|v| v * v).sum();
        let scale = (alpha * alpha * ss / ee / 10f64.powf(target_db / 10.0)).sqrt();
        let est: Vec<f64> = s.iter().zip(&e).map(|(a, b)| alpha * a + scale * b).collect();
        let measured = si_sdr(&AudioBuffer::mono(SR, s).unwrap(), &AudioBuffer::mono(SR, est).unwrap()).map_err(|e| e.to_string())?;
        worst = worst.max((measured - target_db).abs());
    }
    let detail = format!("10 points -10..35 dB, worst |error| {worst:.2e} dB");
    if worst <= 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

/// Exact sums on rationals; only the final square root is rounded.
fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = BigRational::from_integer(BigInt::from(x.len()));
    let xs: Vec<BigRational> = x.iter().map(|&v| rational(v)).collect();
    let ys: Vec<BigRational> = y.iter().map(|&v| rational(v)).collect();
    let mx = xs.iter().fold(BigRational::zero(), |a, b| a + b) / &n;
    let my = ys.iter().fold(BigRational::zero(), |a, b| a + b) / &n;
    let (mut sxy, mut sxx, mut syy) = (BigRational::zero(), BigRational::zero(), BigRational::zero());
    for (a, b) in xs.iter().zip(&ys) {
        let (dx, dy) = (a - &mx, b - &my);
        sxy += &dx * &dy;
        sxx += &dx * &dx;
        syy += &dy * &dy;
    }
    let r2 = (&sxy * &sxy) / (sxx * syy);
    let r = r2.to_f64().unwrap().sqrt();
    if sxy.is_negative() {
        -r
    } else {
        r
    }
}

/// `tanh(mean(atanh(r)))` written as `(g - 1) / (g + 1)` where `g` is the
/// geometric mean of `(1 + r) / (1 - r)`; the n-th root is found by
/// bisection against the exact rational product.
fn fisher_oracle(rs: &[f64]) -> f64 {
    let product = rs.iter().fold(BigRational::one(), |acc, &r| acc * rational(1.0 + r) / rational(1.0 - r));
    let n = rs.len() as i32;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while num_traits::pow(rational(hi), n as usize) < product {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if num_traits::pow(rational(mid), n as usize) < product {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g = rational(0.5 * (lo + hi));
    ((&g - BigRational::one()) / (&g + BigRational::one())).to_f64().unwrap()
}

fn statistics_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_p, mut worst_f) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(5..80);
        let k: f64 = rng.random_range(-2.0..2.0);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| k * v + rng.random_range(-40.0..40.0)).collect();
        let r = pearson(&x, &y).map_err(|e| e.to_string())?;
        worst_p = worst_p.max((r - pearson_oracle(&x, &y)).abs());
        let m = rng.random_range(2..9);
        let rs: Vec<f64> = (0..m).map(|_| rng.random_range(-0.97..0.97)).collect();
        let agg = fisher_aggregate(&rs).map_err(|e| e.to_string())?;
        worst_f = worst_f.max((agg.r - fisher_oracle(&rs)).abs());
    }
    let pair = fisher_aggregate(&[0.9, 0.5]).map_err(|e| e.to_string())?.r;
    let detail = format!("100 vectors: pearson |err| {worst_p:.1e}, fisher |err| {worst_f:.1e}; [0.9, 0.5] -> {pair:.6}");
    if worst_p > 1e-9 || worst_f > 1e-9 {
        return Err(format!("{detail}; oracle mismatch"));
    }
    if (pair - 0.76594).abs() > 1e-4 {
        return Err(format!("{detail}; expected 0.76594 +- 1e-4"));
    }
    Ok(detail)
}

fn benchmark_property() -> Verdict {
    let mut records = Vec::new();
    let mut truth: BTreeMap<(String, ProcessingMethod, Condition), f64> = BTreeMap::new();
    for (li, listener) in ["L1", "L2", "L3"].iter().enumerate() {
        let mut trial = 0;
        for (mi, m) in ProcessingMethod::ALL.iter().enumerate() {
            for item in 0..4 {
                trial += 1;
                for c in Condition::ALL {
                    let base = match c {
                        Condition::Reference => 99.0,
                        Condition::Anchor35 => 12.0,
                        Condition::Anchor70 => 28.0,
                        Condition::Level(q) => 20.0 + 13.0 * q.index() as f64 + 2.5 * item as f64 + mi as f64 + ((item * 7 + q.index() * 3) % 5) as f64,
                    };
                    let score = base + [-1.5, 0.0, 1.5][li];
                    let id = format!("{}{item}", m.as_str().to_lowercase());
                    *truth.entry((id.clone(), *m, c)).or_default() += score / 3.0;
                    records.push(ScoreRecord {
                        listener_id: listener.to_string(),
                        cohort: Cohort::A,
                        session: 1,
                        trial_index: trial,
                        item_id: id,
                        method: *m,
                        condition: c,
                        score,
                    });
                }
            }
        }
    }
    let metric = |anchor_value: f64| -> Vec<MetricScore> {
        truth
            .iter()
            .map(|((item, m, c), mean)| MetricScore {
                metric: "Affine".into(),
                item_id: item.clone(),
                method: *m,
                condition: *c,
                value: if c.level().is_some() { 0.04 * mean - 1.7 } else { anchor_value },
            })
            .collect()
    };
    let opts = BenchmarkOptions::default();
    let report = benchmark(&metric(1.0e6), &records, &opts).map_err(|e| e.to_string())?;
    let other = benchmark(&metric(-3.0e5), &records, &opts).map_err(|e| e.to_string())?;
    let worst_r = report.per_method.iter().map(|c| c.r.map_or(f64::INFINITY, |r| (r - 1.0).abs())).fold(0.0, f64::max);
    let agg = report.aggregated_r.ok_or("no aggregate")?;
    let leaked = report.audit.iter().filter(|a| !a.condition.level().is_some() && a.status != PairStatus::ExcludedCondition).count();
    let used_non_level = report.audit.iter().filter(|a| a.status == PairStatus::Used && a.condition.level().is_none()).count();
    let excluded = report.audit.iter().filter(|a| a.status == PairStatus::ExcludedCondition).count();
    let used = report.audit.iter().filter(|a| a.status == PairStatus::Used).count();
    let same = report.per_method == other.per_method && report.aggregated_r == other.aggregated_r;
    let detail = format!(
        "max |r - 1| {worst_r:.1e} over 6 methods, AGG {agg:.7}; audit: {used} used, {excluded} anchor/reference excluded; anchor values irrelevant: {same}"
    );
    if worst_r <= 1e-9 && (agg - 1.0).abs() <= 1e-5 && leaked == 0 && used_non_level == 0 && excluded == 6 * 4 * 3 && used == 6 * 4 * 5 && same {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Runs only with `ODAQ_SCORE_FILES` (comma separated), optionally with
/// `ODAQ_SCORE_MAPPING` for the column names.
fn dataset_check() -> Option<Verdict> {
    let files = std::env::var("ODAQ_SCORE_FILES").ok().filter(|s| !s.is_empty())?;
    Some((|| {
        let paths: Vec<PathBuf> = files.split(',').map(PathBuf::from).collect();
        let mapping = match std::env::var("ODAQ_SCORE_MAPPING") {
            Ok(p) => ColumnMapping::load(Path::new(&p)).map_err(|e| e.to_string())?,
            Err(_) => ColumnMapping::default(),
        };
        let loaded = load_scores(&paths, &mapping).map_err(|e| e.to_string())?;
        let loaded = from_records(loaded.records).map_err(|e| e.to_string())?;
        let mut cohorts: BTreeMap<Cohort, usize> = BTreeMap::new();
        for c in &loaded.completeness {
            let cohort = loaded.records.iter().find(|r| r.listener_id == c.listener_id).map(|r| r.cohort).unwrap();
            *cohorts.entry(cohort).or_default() += 1;
        }
        let counts: Vec<usize> = Cohort::ALL.iter().map(|c| cohorts.get(c).copied().unwrap_or(0)).collect();
        let screened = post_screen(&loaded.records);
        let stats = mean_ci(&screened.kept, GroupBy::METHOD_LEVEL);
        let mut problems = Vec::new();
        for m in ProcessingMethod::ALL {
            let means: Vec<f64> = QualityLevel::ALL
                .iter()
                .map(|q| stats.iter().find(|s| s.key.method == Some(m) && s.key.condition == Some(Condition::Level(*q))).map_or(f64::NAN, |s| s.summary.mean))
                .collect();
            if !means.windows(2).all(|w| w[1] > w[0]) {
                problems.push(format!("{m} not increasing: {means:.1?}"));
            }
        }
        let detail = format!("listeners per cohort A/B1/B2 = {counts:?}, {} excluded by screening", screened.excluded.len());
        if counts != [26, 8, 8] {
            problems.push("cohort sizes differ from 26/8/8".into());
        }
        if problems.is_empty() {
            Ok(detail)
        } else {
            Err(format!("{detail}; {}", problems.join("; ")))
        }
    })())
}

fn end_to_end_determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let audio = dir.path().join("audio");
    std::fs::create_dir(&audio).map_err(|e| e.to_string())?;
    write_wav(&pink_stereo(3, 4.0), audio.join("noise.wav"), BitDepth::Float32).map_err(|e| e.to_string())?;
    let n = 4 * SR as usize;
    let tone: Vec<f64> = (0..n).map(|i| 0.2 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / f64::from(SR)).sin() * (1.0 + (i % 9600) as f64 / 9600.0)).collect();
    write_wav(&AudioBuffer::mono(SR, tone).unwrap(), audio.join("tone.wav"), BitDepth::Float32).map_err(|e| e.to_string())?;
    let manifest = dir.path().join("manifest.csv");
    std::fs::write(&manifest, "item_id,path,methods\nnoise,audio/noise.wav,LP;TM;UN;SH;PE\ntone,audio/tone.wav,LP;SH;PE\n").map_err(|e| e.to_string())?;
    let snapshot = |name: &str| -> Result<BTreeMap<String, Vec<u8>>, String> {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_odaq"))
            .args(["generate", "--manifest", manifest.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "20250101"])
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(String::from_utf8_lossy(&o.stderr).into_owned());
        }
        std::fs::read_dir(&out)
            .map_err(|e| e.to_string())?
            .map(|e| {
                let p = e.map_err(|e| e.to_string())?.path();
                Ok((p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).map_err(|e| e.to_string())?))
            })
            .collect()
    };
    let a = snapshot("first")?;
    let b = snapshot("second")?;
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    let detail = format!("{} files per run", a.len());
    if a.len() == b.len() && differing.is_empty() && a.len() == 2 * (3 + 25) + 2 * (3 + 15) {
        Ok(format!("{detail}, bit-identical"))
    } else {
        Err(format!("{detail} vs {}; differing: {differing:?}", b.len()))
    }
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Option<Verdict>,
}

fn main() -> ExitCode {
    // The harness passes libtest flags; a name filter other than ours means
    // this target was not selected.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return ExitCode::SUCCESS;
    }
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { name: "preset-table-fidelity", budget: secs(1), run: || Some(preset_table_fidelity()) },
        Criterion { name: "loudness-closure", budget: secs(60), run: || Some(loudness_closure()) },
        Criterion { name: "ms-identity-phantom-center", budget: secs(10), run: || Some(ms_identity()) },
        Criterion { name: "pe-nmr-closure-and-pre-echo-trend", budget: secs(120), run: || Some(pe_nmr_closure()) },
        Criterion { name: "sh-hole-statistics", budget: secs(60), run: || Some(sh_statistics()) },
        Criterion { name: "si-sdr-oracle", budget: secs(10), run: || Some(si_sdr_oracle()) },
        Criterion { name: "statistics-oracles", budget: secs(10), run: || Some(statistics_oracles()) },
        Criterion { name: "benchmark-pipeline-property", budget: secs(10), run: || Some(benchmark_property()) },
        Criterion { name: "dataset-score-ordering", budget: secs(600), run: dataset_check },
        Criterion { name: "end-to-end-determinism", budget: secs(120), run: || Some(end_to_end_determinism()) },
    ];
    let (mut failed, mut skipped) = (0, 0);
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Some(Err(format!("panicked: {}", msg.unwrap_or_default())))
        });
        let elapsed = start.elapsed();
        let timing = format!("{:.2} s of {} s", elapsed.as_secs_f64(), c.budget.as_secs());
        let line = match outcome {
            None => {
                skipped += 1;
                format!("SKIP {} (ODAQ_SCORE_FILES not set)", c.name)
            }
            Some(Ok(detail)) if elapsed <= c.budget => format!("PASS {} ({detail}; {timing})", c.name),
            Some(Ok(detail)) => {
                failed += 1;
                format!("FAIL {} ({detail}; over budget: {timing})", c.name)
            }
            Some(Err(detail)) => {
                failed += 1;
                format!("FAIL {} ({detail}; {timing})", c.name)
            }
        };
        println!("{line}");
    }
    println!("acceptance: {} passed, {failed} failed, {skipped} skipped", criteria.len() - failed - skipped);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
