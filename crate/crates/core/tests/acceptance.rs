//! Acceptance gate. Each criterion prints one PASS/FAIL line; the binary
//! exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use edocs_core::designs::{build_random_cw_design, build_signature, ceil_log2, magnify};
use edocs_core::foreach::{build_astim, k_alpha, AstimKind};
use edocs_core::harness::{run_trials, SchemeChoice, SupportSize, TrialConfig};
use edocs_core::oracle::{
    bib_simulate, check_distinguishable, check_list_uf, exhaustive_gt_decode, overflow_level_bound,
    overflow_tree_bound, BibConfig, VerifyOptions,
};
use edocs_core::universal::{build_ae, decode, BuildOptions};
use edocs_core::{build_fbs, fbs_decode, rng, BinaryDesign, Exec, SparseSignal, Tolerance};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn example1_exact() -> Outcome {
    let m = BinaryDesign::from_dense_rows(&common::example1_m()).map_err(|e| e.to_string())?;
    let u = build_signature(8).map_err(|e| e.to_string())?;
    ensure(u.design().to_dense_rows() == common::example1_u(), "signature U differs from the printed U")?;
    let start = Instant::now();
    let a = magnify(&m, &u).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(a.to_dense_rows() == common::example1_a_prime(), "magnified matrix differs from the printed A'")?;
    ensure(elapsed.as_millis() < 1, format!("magnify took {elapsed:?}"))?;
    Ok(format!("12x8 A' reproduced bit-for-bit in {elapsed:?}"))
}

fn example2_exact() -> Outcome {
    let v = build_astim(&[1, 2, 4, 7], 3, 0, AstimKind::Hilbert).map_err(|e| e.to_string())?;
    ensure(v.to_dense(8) == common::example2_v(), "Hilbert block differs from the printed V")?;
    Ok("3x8 Hilbert block reproduced entrywise".into())
}

fn signature_properties() -> Outcome {
    let start = Instant::now();
    for n in [8usize, 64, 1000, 1024] {
        let u = build_signature(n).map_err(|e| e.to_string())?;
        let l = ceil_log2(n);
        let bits = u.design().column_bitsets();
        for j in 0..n {
            ensure(u.column(j).len() == l, format!("n={n}: column {j} has weight {}", u.column(j).len()))?;
        }
        let ok = Exec::Parallel.all(n, |a| {
            (a + 1..n).all(|b| {
                let w: u32 = bits[a].iter().zip(&bits[b]).map(|(x, y)| (x | y).count_ones()).sum();
                w as usize > l
            })
        });
        ensure(ok, format!("n={n}: some pairwise OR has weight <= {l}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs() < 10, format!("took {elapsed:?}"))?;
    Ok(format!("weights = ceil(log2 n), pairwise OR > ceil(log2 n) for n in 8,64,1000,1024 ({elapsed:?})"))
}

fn ae_exhaustive() -> Outcome {
    let start = Instant::now();
    let (n, k) = (64, 3);
    let scheme = build_ae(n, k, 2024, &BuildOptions::default()).map_err(|e| e.to_string())?;
    ensure(scheme.is_verified(), "design was not verified")?;
    let opts = VerifyOptions::with_budget(10_000_000);
    ensure(check_distinguishable(scheme.first_design(), k, 1, opts) == Ok(true), "M is not (3,1)-distinguishable")?;
    ensure(check_list_uf(scheme.second_design(), k, 1, 0.5, opts) == Ok(true), "A'' is not (3,1,1/2)-list-UF")?;

    let mut supports: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        supports.push(vec![a]);
        for b in a + 1..n {
            supports.push(vec![a, b]);
            for c in b + 1..n {
                supports.push(vec![a, b, c]);
            }
        }
    }
    let ok = Exec::Parallel.map(supports.len(), |i| {
        let mut rng = rng::stream(77, &[i as u64]);
        let x = SparseSignal::new(n, supports[i].iter().map(|&j| (j, rng.sample(StandardNormal)))).unwrap();
        let y = scheme.measure_with(&x, Tolerance::FLOAT).unwrap();
        decode(&scheme, &y).unwrap().indices == x.support_set()
    });
    let failures = ok.iter().filter(|&&b| !b).count();
    ensure(supports.len() == 43_744, format!("enumerated {} supports", supports.len()))?;
    ensure(failures == 0, format!("{failures} of {} supports decoded incorrectly", supports.len()))?;
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs() < 300, format!("took {elapsed:?}"))?;
    Ok(format!("{} supports recovered exactly, m = {} ({elapsed:?})", supports.len(), scheme.num_measurements()))
}

fn aa_criterion() -> Outcome {
    let start = Instant::now();
    let cfg = TrialConfig::new(SchemeChoice::Aa { eps: 0.5 }, 256, 8, 1000, 31);
    let r = run_trials(&cfg).map_err(|e| e.to_string())?;
    ensure(r.successes >= 990, format!("{} of 1000 trials met both inequalities", r.successes))?;
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs() < 120, format!("took {elapsed:?}"))?;
    Ok(format!("{} / 1000 trials within eps, m = {} ({elapsed:?})", r.successes, r.measurements))
}

fn ee_end_to_end() -> Outcome {
    let start = Instant::now();
    let (n, k, alpha) = (1usize << 16, 64, 3.0);
    ensure(k_alpha(alpha, k, 16) == Ok(11), "k_alpha != 11")?;
    let mut cfg = TrialConfig::new(SchemeChoice::ee(alpha), n, k, 1000, 5);
    cfg.support_size = SupportSize::Exactly(k);
    let r = run_trials(&cfg).map_err(|e| e.to_string())?;
    ensure(r.measurements == 16 * 11 * 64 * 16, format!("m = {}", r.measurements))?;
    ensure(r.measurements == 180_224, format!("m = {}", r.measurements))?;
    ensure(r.failures <= 2, format!("{} failures (trials {:?})", r.failures, r.failed_trials))?;
    let cap = 8 * k * 16;
    ensure(r.max_column_reads() <= cap, format!("max visits {} > {cap}", r.max_column_reads()))?;
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs() < 600, format!("took {elapsed:?}"))?;
    Ok(format!("{} failures in 1000 trials, m = {}, max visits {} ({elapsed:?})", r.failures, r.measurements, r.max_column_reads()))
}

fn sublinear_decoding() -> Outcome {
    let k = 4;
    let mut universal = Vec::new();
    for log_n in [12u32, 14, 16] {
        let mut cfg = TrialConfig::new(SchemeChoice::Ae, 1 << log_n, k, 200, 13);
        cfg.support_size = SupportSize::Exactly(k);
        let r = run_trials(&cfg).map_err(|e| e.to_string())?;
        universal.push((r.mean_column_reads(), r.max_column_reads()));

        let mut cfg = TrialConfig::new(SchemeChoice::ee(3.0), 1 << log_n, k, 200, 13);
        cfg.support_size = SupportSize::Exactly(k);
        let r = run_trials(&cfg).map_err(|e| e.to_string())?;
        let cap = 8 * k * log_n as usize;
        ensure(r.max_column_reads() <= cap, format!("EE n=2^{log_n}: {} visits > {cap}", r.max_column_reads()))?;
    }
    let mean_ratio = universal[2].0 / universal[0].0;
    let max_ratio = universal[2].1 as f64 / universal[0].1 as f64;
    ensure(mean_ratio <= 2.0, format!("mean column_reads ratio {mean_ratio:.3}"))?;
    ensure(max_ratio <= 2.0, format!("max column_reads ratio {max_ratio:.3}"))?;
    Ok(format!(
        "AE column_reads 2^12 -> 2^16: mean {:.1} -> {:.1} (x{mean_ratio:.3}), max x{max_ratio:.3}; EE visits within 8k log2 n",
        universal[0].0, universal[2].0
    ))
}

fn oracle_cross_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = VerifyOptions::default();
    let mut hypothesis_held = 0;
    for f in 0..100u64 {
        let n = rng.random_range(8..=12);
        let rows = rng.random_range(12..=36);
        let d = rng.random_range(2..=4);
        let k = rng.random_range(2..=4);
        let l = rng.random_range(1..k);
        let m = build_random_cw_design(rows, n, d, 1000 + f).map_err(|e| e.to_string())?;
        if check_list_uf(&m, k - l, l, 1.0, opts).map_err(|e| e.to_string())? {
            hypothesis_held += 1;
            ensure(
                check_distinguishable(&m, k, l, opts).map_err(|e| e.to_string())?,
                format!("fixture {f}: ({},{l},1)-list-UF but not ({k},{l})-distinguishable", k - l),
            )?;
        }
    }
    ensure(hypothesis_held > 0, "no fixture satisfied the list-UF hypothesis")?;

    for t in 0..100u64 {
        let log_n = rng.random_range(6..=10u32);
        let n = 1usize << log_n;
        let k = 1usize << rng.random_range(1..=3u32);
        let fbs = build_fbs(n, k, 16, t).map_err(|e| e.to_string())?;
        let size = rng.random_range(1..=k);
        let defectives = sample(&mut rng, n, size).into_vec();
        let y = fbs.simulate_or(&defectives).map_err(|e| e.to_string())?;
        let gt = fbs_decode(&fbs, &y).map_err(|e| e.to_string())?;
        let comp = exhaustive_gt_decode(&fbs.to_binary_design(), &y).map_err(|e| e.to_string())?;
        ensure(gt.positives.is_subset(&comp), format!("instance {t}: splitting positives outside COMP"))?;
    }

    let threshold = k_alpha(1.5, 16, 16).map_err(|e| e.to_string())?;
    let p = bib_simulate(&BibConfig { balls: 16, bins: 256, threshold, trials: 100_000, seed: 9 })
        .map_err(|e| e.to_string())?;
    let level = overflow_level_bound(16, 1.5, 16);
    let tree = overflow_tree_bound(1 << 10, 16, 1.5);
    ensure(p <= level, format!("overflow frequency {p} exceeds per-level bound {level}"))?;
    Ok(format!(
        "list-UF => distinguishable on {hypothesis_held}/100 fixtures meeting the hypothesis; \
         splitting within COMP on 100 instances; overflow {p:.2e} <= {level} (tree bound {tree:.3})"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 example-1 magnification", example1_exact),
        ("2 example-2 hilbert block", example2_exact),
        ("3 signature properties", signature_properties),
        ("4 AE exhaustive recovery", ae_exhaustive),
        ("5 AA criterion", aa_criterion),
        ("6 EE end-to-end", ee_end_to_end),
        ("7 sublinear decoding", sublinear_decoding),
        ("8 oracle cross-checks", oracle_cross_checks),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
