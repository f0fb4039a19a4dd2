//! End-to-end acceptance checks, one line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 3 4`.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use ipca_cli::scan::{non_convexity_witness, scan_cone, ScanConfig};
use ipca_core::ipca_solver::{
    flipflop_step, log_likelihood, sample_identity_model, sample_model, solve_mle, FitStatus, MleOptions,
    PrecisionEstimate,
};
use ipca_core::lr_oracle::{lr_count_bruteforce_capped, lr_positive, Partition};
use ipca_core::quiver_core::{random_representation, reflect_sink_dim, reflect_sources_dim, DimensionVector};
use ipca_core::random_cert::{algorithm1, stabilizer_kernel_dim, Answer};
use ipca_core::stability_engine::{decide, decide_equal_legs, is_schofield_semistable, Verdict};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const EQUAL_LEGS_MAX: u64 = 20;
const EQUAL_LEGS_MAX_K: u64 = 6;
const EQUAL_LEGS_SECONDS: f64 = 600.0;

const RANDOM_ALPHAS: usize = 200;
const RANDOM_ALPHA_SEED: u64 = 2024;
const RANDOM_ALPHA_MAX_P: u64 = 30;
const RANDOM_ALPHA_MAX_K: usize = 6;
const MAX_MULTIPLE: u64 = 6;

const LR_MAX_FACTORS: usize = 3;
const LR_MAX_AMBIENT: usize = 4;
const LR_MAX_SIZE: u64 = 12;
const LR_SECONDS: f64 = 300.0;
const SATURATION_FACTORS: [u64; 2] = [2, 3];

const GRID_MAX_ENTRY: u64 = 8;
const GRID_MAX_K: usize = 4;
const CONCORDANCE_SEEDS: u64 = 10;
const CONCORDANCE_TRIALS: usize = 5;
const CONCORDANCE_ENTRY_BOUND: i64 = 1_000_000;
const CONCORDANCE_RATE: f64 = 0.99;

const MONOTONE_INSTANCES: usize = 100;
const MONOTONE_SWEEPS: usize = 40;
const MONOTONE_SLACK: f64 = 1e-9;
const MLE_MAX_P: u64 = 5;
const MLE_MAX_K: usize = 4;
const MLE_MAX_Q: u64 = 4;
const MLE_SEEDS: u64 = 20;
const MLE_RATE: f64 = 0.95;
const GAUGE_TOLERANCE: f64 = 1e-12;

const SCAN_K: usize = 5;
const SCAN_SEED: u64 = 0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Nondecreasing leg tuples with entries in `1..=max`.
fn leg_multisets(k: usize, max: u64) -> Vec<Vec<u64>> {
    fn extend(k: usize, max: u64, start: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for q in start..=max {
            current.push(q);
            extend(k, max, q, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    extend(k, max, 1, &mut Vec::new(), &mut out);
    out
}

fn grid(max_p: u64, max_k: usize, max_q: u64) -> Vec<DimensionVector> {
    let mut out = Vec::new();
    for k in 1..=max_k {
        for legs in leg_multisets(k, max_q) {
            for p in 1..=max_p {
                out.push(DimensionVector::new(p, legs.clone()).expect("positive entries"));
            }
        }
    }
    out
}

fn criterion_equal_legs() -> Outcome {
    let start = Instant::now();
    let mut disagreements = Vec::new();
    let mut cases = 0;
    for k in 1..=EQUAL_LEGS_MAX_K {
        for p in 1..=EQUAL_LEGS_MAX {
            for q in 1..=EQUAL_LEGS_MAX {
                cases += 1;
                let alpha = DimensionVector::equal_legs(p, q, k as usize).expect("positive");
                let castled = decide_equal_legs(p, q, k).verdict.is_semistable();
                let lr = is_schofield_semistable(&alpha).semistable;
                if castled != lr {
                    disagreements.push(alpha.to_string());
                }
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    outcome(
        cases == 2400 && disagreements.is_empty() && seconds < EQUAL_LEGS_SECONDS,
        format!("{cases} cases, {} disagreements {:?}, {seconds:.1}s", disagreements.len(), disagreements),
    )
}

fn random_chamber_alpha(rng: &mut ChaCha8Rng) -> DimensionVector {
    loop {
        let p = rng.gen_range(2..=RANDOM_ALPHA_MAX_P);
        let k = rng.gen_range(4..=RANDOM_ALPHA_MAX_K);
        let legs: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=p / 2)).collect();
        if 2 * p <= legs.iter().sum::<u64>() {
            return DimensionVector::new(p, legs).expect("positive entries");
        }
    }
}

fn is_multiple_of_base(alpha: &DimensionVector) -> bool {
    let base = DimensionVector::new(2, vec![1; 4]).expect("positive");
    alpha.content() > 1 && alpha.primitive() == base
}

fn criterion_random_chamber() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_ALPHA_SEED);
    let mut alphas: Vec<DimensionVector> = (0..RANDOM_ALPHAS).map(|_| random_chamber_alpha(&mut rng)).collect();
    let drawn_multiples = alphas.iter().filter(|a| is_multiple_of_base(a)).count();
    alphas.extend((1..=MAX_MULTIPLE).map(|c| DimensionVector::new(2 * c, vec![c; 4]).expect("positive")));
    let exceptions: Vec<String> = alphas
        .iter()
        .filter(|a| {
            let expected = if is_multiple_of_base(a) { Verdict::PolystableNotStable } else { Verdict::Stable };
            decide(a).verdict != expected
        })
        .map(|a| a.to_string())
        .collect();
    outcome(
        exceptions.is_empty(),
        format!(
            "{RANDOM_ALPHAS} random vectors ({drawn_multiples} multiples of (2;1,1,1,1)) plus c(2;1,1,1,1) for c <= {MAX_MULTIPLE}, {} exceptions {:?}",
            exceptions.len(),
            exceptions
        ),
    )
}

fn partitions_of(size: u64, max_parts: usize, max_part: u64) -> Vec<Vec<u64>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    if max_parts == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for first in (1..=max_part.min(size)).rev() {
        for mut rest in partitions_of(size - first, max_parts - 1, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every factor tuple and target in the criterion's range, grouped by ambient length.
fn lr_queries() -> Vec<(usize, Vec<Partition>, Partition)> {
    let mut queries = Vec::new();
    for m in 1..=LR_MAX_AMBIENT {
        let by_size: Vec<Vec<Partition>> = (0..=LR_MAX_SIZE)
            .map(|s| partitions_of(s, m, s).into_iter().map(|parts| Partition::new(parts, m).expect("fits")).collect())
            .collect();
        for size in 0..=LR_MAX_SIZE {
            for nu in &by_size[size as usize] {
                for k in 1..=LR_MAX_FACTORS {
                    for sizes in compositions(size, k) {
                        let mut tuples: Vec<Vec<Partition>> = vec![Vec::new()];
                        for s in sizes {
                            tuples = tuples
                                .into_iter()
                                .flat_map(|t| {
                                    by_size[s as usize].iter().map(move |lam| {
                                        let mut t = t.clone();
                                        t.push(lam.clone());
                                        t
                                    })
                                })
                                .collect();
                        }
                        queries.extend(tuples.into_iter().map(|t| (m, t, nu.clone())));
                    }
                }
            }
        }
    }
    queries
}

/// Ordered ways to write `total` as `parts` nonnegative summands.
fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn criterion_lr_equivalence(queries: &[(usize, Vec<Partition>, Partition)]) -> Outcome {
    let start = Instant::now();
    let mut disagreements = Vec::new();
    let mut positive = 0;
    for (m, lambdas, nu) in queries {
        let fast = lr_positive(lambdas, nu, *m).expect("valid query");
        let count = lr_count_bruteforce_capped(lambdas, nu, LR_MAX_SIZE).expect("within cap");
        positive += usize::from(fast);
        if fast != (count > 0) {
            disagreements.push(format!("m={m} {lambdas:?} -> {nu:?}"));
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    outcome(
        disagreements.is_empty() && seconds < LR_SECONDS,
        format!(
            "{} queries ({positive} positive), {} disagreements {:?}, {seconds:.1}s",
            queries.len(),
            disagreements.len(),
            disagreements.iter().take(5).collect::<Vec<_>>()
        ),
    )
}

fn criterion_saturation(queries: &[(usize, Vec<Partition>, Partition)]) -> Outcome {
    let mut violations = Vec::new();
    let mut checked = 0;
    for (m, lambdas, nu) in queries {
        let base = lr_positive(lambdas, nu, *m).expect("valid query");
        for t in SATURATION_FACTORS {
            checked += 1;
            let scaled: Vec<Partition> = lambdas.iter().map(|l| l.scaled(t)).collect();
            if lr_positive(&scaled, &nu.scaled(t), *m).expect("valid query") != base {
                violations.push(format!("t={t} m={m} {lambdas:?} -> {nu:?}"));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{checked} scaled queries, {} violations {:?}",
            violations.len(),
            violations.iter().take(5).collect::<Vec<_>>()
        ),
    )
}

fn criterion_concordance(grid: &[(DimensionVector, Verdict)]) -> Outcome {
    let mut worst_rate: f64 = 1.0;
    let mut below = Vec::new();
    let mut points = 0;
    for (alpha, verdict) in grid {
        points += 1;
        let agreeing = (0..CONCORDANCE_SEEDS)
            .filter(|&s| {
                let report = algorithm1(alpha, CONCORDANCE_TRIALS, CONCORDANCE_ENTRY_BOUND, s * 1000)
                    .expect("entry bound is positive");
                (report.answer == Answer::Yes) == (*verdict == Verdict::Stable)
            })
            .count();
        let rate = agreeing as f64 / CONCORDANCE_SEEDS as f64;
        worst_rate = worst_rate.min(rate);
        if rate < CONCORDANCE_RATE {
            below.push(format!("{alpha} {verdict} {agreeing}/{CONCORDANCE_SEEDS}"));
        }
    }
    let anchor = |text: &str, expected: usize| {
        let alpha: DimensionVector = text.parse().expect("valid");
        (0..CONCORDANCE_SEEDS)
            .filter(|&s| {
                let rep = random_representation(&alpha, CONCORDANCE_ENTRY_BOUND, s).expect("valid bound");
                stabilizer_kernel_dim(&rep) == expected
            })
            .count()
    };
    let (stable_anchor, polystable_anchor) = (anchor("2 1 1 1 1", 1), anchor("4 2 2 2 2", 2));
    let seeds = CONCORDANCE_SEEDS as usize;
    outcome(
        below.is_empty() && stable_anchor == seeds && polystable_anchor == seeds,
        format!(
            "{points} deterministic points, worst agreement {:.0}%, below threshold {:?}; kernel 1 for (2;1,1,1,1) in {stable_anchor}/{seeds}, kernel 2 for (4;2,2,2,2) in {polystable_anchor}/{seeds}",
            100.0 * worst_rate,
            below
        ),
    )
}

fn random_pd(rng: &mut ChaCha8Rng, size: usize) -> DMatrix<f64> {
    let a: DMatrix<f64> = DMatrix::from_fn(size, size, |_, _| StandardNormal.sample(&mut *rng));
    &a * a.transpose() + DMatrix::identity(size, size) * 0.5
}

fn criterion_mle(grid_verdicts: &[(DimensionVector, Verdict)]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut monotone_failures = 0;
    let mut cut_short = 0;
    let mut sweeps_checked = 0;
    let mut gauge_error: f64 = 0.0;
    for instance in 0..MONOTONE_INSTANCES {
        let p = rng.gen_range(1..=MLE_MAX_P) as usize;
        let k = rng.gen_range(1..=MLE_MAX_K);
        let legs: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=MLE_MAX_Q) as usize).collect();
        let theta = random_pd(&mut rng, p);
        let thetas: Vec<DMatrix<f64>> = legs.iter().map(|&q| random_pd(&mut rng, q)).collect();
        let data = sample_model(&theta, &thetas, instance as u64).expect("positive definite");

        let mut est = PrecisionEstimate::identity(p, &legs);
        let mut previous = log_likelihood(&est, &data).expect("identity is definite");
        for _ in 0..MONOTONE_SWEEPS {
            // An unbounded likelihood can push an update out of the definite cone in floating point.
            let Ok((next, value)) =
                flipflop_step(&est, &data).and_then(|next| log_likelihood(&next, &data).map(|v| (next, v)))
            else {
                cut_short += 1;
                break;
            };
            if value < previous - MONOTONE_SLACK {
                monotone_failures += 1;
                break;
            }
            sweeps_checked += 1;
            (est, previous) = (next, value);
        }

        let truth = PrecisionEstimate { theta: theta.clone(), thetas: thetas.clone(), gauge: est.gauge };
        let base = log_likelihood(&truth, &data).expect("definite");
        let scale = rng.gen_range(0.1..10.0);
        let moved = PrecisionEstimate {
            theta: &theta * scale,
            thetas: thetas.iter().map(|t| t / scale).collect(),
            gauge: truth.gauge,
        };
        let regauged = truth.clone().regauged().expect("definite");
        for other in [moved, regauged] {
            let value = log_likelihood(&other, &data).expect("definite");
            gauge_error = gauge_error.max((value - base).abs() / base.abs().max(1.0));
        }
    }

    let mut failing_dims = Vec::new();
    let mut semistable_dims = 0;
    let mut unbounded_dims = 0;
    for (alpha, verdict) in grid_verdicts {
        let legs: Vec<usize> = alpha.legs().iter().map(|&q| q as usize).collect();
        let p = alpha.center() as usize;
        let expected_converged = verdict.is_semistable();
        if expected_converged {
            semistable_dims += 1;
        } else {
            unbounded_dims += 1;
        }
        let hits = (0..MLE_SEEDS)
            .filter(|&seed| {
                let data = sample_identity_model(p, &legs, seed).expect("identity model");
                let (_, report) = solve_mle(&data, &MleOptions::default()).expect("well-formed data");
                (report.status == FitStatus::Converged) == expected_converged
            })
            .count();
        if (hits as f64) < MLE_RATE * MLE_SEEDS as f64 {
            failing_dims.push(format!("{alpha} {verdict} {hits}/{MLE_SEEDS}"));
        }
    }
    outcome(
        monotone_failures == 0 && failing_dims.is_empty() && gauge_error < GAUGE_TOLERANCE,
        format!(
            "{monotone_failures}/{MONOTONE_INSTANCES} non-monotone runs over {sweeps_checked} sweeps ({cut_short} runs stopped at a singular update); {semistable_dims} semistable and {unbounded_dims} unbounded dims, below 95%: {:?}; gauge error {gauge_error:.1e}",
            failing_dims
        ),
    )
}

fn criterion_non_convexity() -> Outcome {
    let config = ScanConfig::new(SCAN_K, SCAN_SEED);
    let result = match scan_cone(&config) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("scan failed: {e}")),
    };
    let stable: BTreeSet<String> = result
        .rows
        .iter()
        .filter(|r| matches!(r.verdict, Some((Verdict::Stable, _))))
        .filter_map(|r| r.primitive.as_ref().map(|a| a.to_string()))
        .collect();
    match non_convexity_witness(&result) {
        Some(w) => outcome(
            true,
            format!(
                "{} grid points, {} stable rays; {} + {} -> {} is {}",
                result.rows.len(),
                stable.len(),
                w.first,
                w.second,
                w.midpoint,
                w.midpoint_verdict
            ),
        ),
        None => outcome(false, format!("{} grid points, {} stable rays, no witness", result.rows.len(), stable.len())),
    }
}

fn criterion_reduction_invariance(grid_verdicts: &[(DimensionVector, Verdict)]) -> Outcome {
    let mut violations = Vec::new();
    let mut checked = 0;
    for (alpha, verdict) in grid_verdicts {
        for reflected in [reflect_sink_dim(alpha), reflect_sources_dim(alpha)].into_iter().flatten() {
            checked += 1;
            let other = decide(&reflected).verdict;
            if other != *verdict {
                violations.push(format!("{alpha} {verdict} vs {reflected} {other}"));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{checked} reflections of {} grid points, {} violations {:?}",
            grid_verdicts.len(),
            violations.len(),
            violations
        ),
    )
}

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: usize| selected.is_empty() || selected.contains(&n);

    let needs_grid = [5, 8].iter().any(|&n| wanted(n));
    let decided_grid: Vec<(DimensionVector, Verdict)> = if needs_grid {
        grid(GRID_MAX_ENTRY, GRID_MAX_K, GRID_MAX_ENTRY)
            .into_iter()
            .filter_map(|a| {
                let v = decide(&a);
                (!v.randomized).then_some((a, v.verdict))
            })
            .collect()
    } else {
        Vec::new()
    };
    let needs_lr = [3, 4].iter().any(|&n| wanted(n));
    let queries = if needs_lr { lr_queries() } else { Vec::new() };

    let mut all_passed = true;
    let mut run = |n: usize, name: &str, check: &dyn Fn() -> Outcome| {
        if !wanted(n) {
            return;
        }
        let start = Instant::now();
        let result = check();
        all_passed &= result.passed;
        let status = if result.passed { "PASS" } else { "FAIL" };
        println!("{status} criterion {n} ({name}, {:.1}s): {}", start.elapsed().as_secs_f64(), result.detail);
    };

    run(1, "equal-legs classification", &criterion_equal_legs);
    run(2, "random vectors in the chamber", &criterion_random_chamber);
    run(3, "LR oracle against enumeration", &|| criterion_lr_equivalence(&queries));
    run(4, "saturation", &|| criterion_saturation(&queries));
    run(5, "randomized certificate concordance", &|| criterion_concordance(&decided_grid));
    run(6, "MLE behaviour", &|| {
        let small: Vec<(DimensionVector, Verdict)> = grid(MLE_MAX_P, MLE_MAX_K, MLE_MAX_Q)
            .into_iter()
            .map(|a| {
                let v = decide(&a).verdict;
                (a, v)
            })
            .collect();
        criterion_mle(&small)
    });
    run(7, "non-convexity witness", &criterion_non_convexity);
    run(8, "reduction invariance", &|| criterion_reduction_invariance(&decided_grid));

    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
