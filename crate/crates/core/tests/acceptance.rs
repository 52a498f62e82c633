//! Acceptance suite: each test checks one headline guarantee end to end and
//! prints a single `criterion N (...): PASS|FAIL` line. Reference values and
//! tolerances are pinned inline; runtime budgets are asserted alongside.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cbound::bounds::{compute_bound, BoundId, BoundInputs, EmpiricalStats};
use cbound::evaluation::{cross_validate, log_grid, sign_test, split_train_test};
use cbound::learners::{
    max_feasible_margin, mincq_build, mincq_train, quasi_uniformize, rescale_margin,
    train_mincq_model,
};
use cbound::margins::{margins, optimality_flags, summarize, variance_upper_bound};
use cbound::numerics::{kl_invert, xi, InversionDirection, KlLevelSetQuery};
use cbound::voters::{
    build_kernel_voters, build_stumps, tanh_normalize, vote_matrix, AttributeStats, KernelSpec,
};
use cbound::{Dataset, Example, Posterior, VoteMatrix};

fn check(failures: &mut Vec<String>, ok: bool, detail: String) {
    if !ok {
        failures.push(detail);
    }
}

fn verdict(number: u8, name: &str, elapsed: Duration, failures: Vec<String>) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {number} ({name}): {status} [{elapsed:.1?}]");
    assert!(
        failures.is_empty(),
        "criterion {number} ({name}) failed:\n  {}",
        failures.join("\n  ")
    );
}

fn budget(failures: &mut Vec<String>, elapsed: Duration, limit: Duration) {
    check(
        failures,
        elapsed < limit,
        format!("runtime {elapsed:?} exceeds the {limit:?} budget"),
    );
}

/// Best-of-`runs` wall time for tightly budgeted computations; the harness
/// runs tests concurrently, so a single sample can blame scheduler noise on
/// the code under test.
fn timed_min<R>(runs: usize, mut f: impl FnMut() -> R) -> (R, Duration) {
    let mut best = Duration::MAX;
    let mut out = None;
    for _ in 0..runs {
        let start = Instant::now();
        out = Some(f());
        best = best.min(start.elapsed());
    }
    (out.unwrap(), best)
}

/// Statistics family used by the bounds that do not need alignment:
/// Gibbs risk 0.30, disagreement 0.40, joint error 0.10.
fn plain_inputs(m: u64, delta: f64) -> BoundInputs {
    BoundInputs {
        m,
        m_u: None,
        delta,
        kl_qp: 5.0,
        stats: EmpiricalStats {
            gibbs_risk: Some(0.30),
            disagreement: Some(0.40),
            joint_error: Some(0.10),
            mu1: Some(0.40),
            mu2: Some(0.20),
        },
        compression: 0,
        aligned: false,
    }
}

#[test]
fn criterion_1_gibbs_route_bound_reproduces_pinned_values() {
    let m = 1000u64;
    let (kl, delta, risk) = (5.0, 0.05, 0.30);
    let ((tau, lower, upper, report), elapsed) = timed_min(3, || {
        let tau = (kl + (xi(m).unwrap() / delta).ln()) / m as f64;
        let lower = kl_invert(&KlLevelSetQuery {
            q: risk,
            tau,
            direction: InversionDirection::Inf,
            cap: 1.0,
        })
        .unwrap()
        .value;
        let upper = kl_invert(&KlLevelSetQuery {
            q: risk,
            tau,
            direction: InversionDirection::Sup,
            cap: 1.0,
        })
        .unwrap()
        .value;
        let report = compute_bound(BoundId::B0, &plain_inputs(m, delta)).unwrap();
        (tau, lower, upper, report)
    });

    let mut failures = Vec::new();
    check(
        &mut failures,
        (tau - 0.0117).abs() <= 5e-4,
        format!("divergence level {tau} not within 0.0117 +/- 5e-4"),
    );
    check(
        &mut failures,
        (lower - 0.233).abs() <= 1e-3,
        format!("interval lower end {lower} not within 0.233 +/- 1e-3"),
    );
    check(
        &mut failures,
        (upper - 0.373).abs() <= 1e-3,
        format!("interval upper end {upper} not within 0.373 +/- 1e-3"),
    );
    check(
        &mut failures,
        (report.value - 0.746).abs() <= 4e-3,
        format!("B0 {} not within 0.746 +/- 4e-3", report.value),
    );
    budget(&mut failures, elapsed, Duration::from_millis(10));
    verdict(1, "Gibbs-route bound on pinned inputs", elapsed, failures);
}

#[test]
fn criterion_2_joint_error_bounds_reproduce_pinned_values() {
    let inputs = plain_inputs(1000, 0.05);
    let ((b2, b2p), elapsed) = timed_min(3, || {
        (
            compute_bound(BoundId::B2, &inputs).unwrap(),
            compute_bound(BoundId::B2p, &inputs).unwrap(),
        )
    });

    let tau = b2.diagnostics.tau_joint.expect("B2 reports its level");
    let mut failures = Vec::new();
    check(
        &mut failures,
        (tau - 0.0199).abs() <= 5e-4,
        format!("trivalent level {tau} not within 0.0199 +/- 5e-4"),
    );
    check(
        &mut failures,
        (b2.value - 0.679).abs() <= 5e-3,
        format!("B2 {} not within 0.679 +/- 5e-3", b2.value),
    );
    check(
        &mut failures,
        (b2p.value - 0.660).abs() <= 5e-3,
        format!("B2' {} not within 0.660 +/- 5e-3", b2p.value),
    );
    budget(&mut failures, elapsed, Duration::from_millis(100));
    verdict(2, "joint-error bounds on pinned inputs", elapsed, failures);
}

fn pow_u128(base: u128, exp: u64) -> u128 {
    // 0^0 = 1 by the empty-product convention the sum relies on.
    (0..exp).fold(1u128, |acc, _| acc * base)
}

fn binom_u128(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut out = 1u128;
    for i in 1..=k {
        out = out * (n - k + i) as u128 / i as u128;
    }
    out
}

/// Exact-arithmetic oracle for small sizes: the sum is a ratio of integers
/// that fit in 128 bits for every m <= 20.
fn xi_exact_small(m: u64) -> f64 {
    let numerator: u128 = (0..=m)
        .map(|k| binom_u128(m, k) * pow_u128(k as u128, k) * pow_u128((m - k) as u128, m - k))
        .sum();
    numerator as f64 / pow_u128(m as u128, m) as f64
}

#[test]
fn criterion_3_xi_envelope_and_exact_small_values() {
    let (mut failures, elapsed) = timed_min(3, || {
        let mut failures = Vec::new();
        check(&mut failures, xi(1).unwrap() == 2.0, "xi(1) != 2".into());
        check(&mut failures, xi(2).unwrap() == 2.5, "xi(2) != 2.5".into());
        for m in 1..=20u64 {
            let got = xi(m).unwrap();
            let exact = xi_exact_small(m);
            let rel = (got - exact).abs() / exact;
            check(
                &mut failures,
                rel <= 1e-12,
                format!("xi({m}) = {got} vs exact {exact}, relative error {rel}"),
            );
        }
        // Log-spaced sample of sizes from 2 up to 1e5.
        for k in 0..=60u32 {
            let m = (2.0 * 5e4f64.powf(f64::from(k) / 60.0)).round() as u64;
            let v = xi(m).unwrap();
            let root = (m as f64).sqrt();
            check(
                &mut failures,
                v >= root && v <= 2.0 * root,
                format!("xi({m}) = {v} outside [sqrt(m), 2 sqrt(m)] = [{root}, {}]", 2.0 * root),
            );
        }
        failures
    });

    budget(&mut failures, elapsed, Duration::from_secs(1));
    verdict(3, "xi envelope and exact small values", elapsed, failures);
}

/// Seeded random vote matrix plus a posterior over its doubled voter set.
fn random_instance(rng: &mut ChaCha8Rng, max_rows: usize, max_half: usize) -> (VoteMatrix, Posterior) {
    let rows = rng.gen_range(2..=max_rows);
    let half = rng.gen_range(1..=max_half);
    let values: Vec<f64> = (0..rows * half).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let labels: Vec<i8> = (0..rows)
        .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
        .collect();
    let votes = VoteMatrix::from_first_half(&values, rows, half, &labels).unwrap();
    let raw: Vec<f64> = (0..2 * half).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let posterior = Posterior::new(raw.iter().map(|w| w / total).collect()).unwrap();
    (votes, posterior)
}

#[test]
fn criterion_4_margin_identities_on_seeded_draws() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut failures = Vec::new();
    let mut draw = 0usize;

    while draw < 1000 {
        let (votes, posterior) = random_instance(&mut rng, 25, 6);
        let s = summarize(&margins(&votes, &posterior).unwrap()).unwrap();
        // A posterior whose margins all nearly vanish makes every C-bound
        // form 1 up to a rounding error over a vanishing second moment; the
        // form identity is only well-posed away from that collapse.
        if s.mu2 < 1e-3 {
            continue;
        }
        let (r, d) = (s.gibbs_risk, s.disagreement);
        check(
            &mut failures,
            (s.joint_error + s.joint_success + d - 1.0).abs() <= 1e-10,
            format!("draw {draw}: e + s + d != 1"),
        );
        check(
            &mut failures,
            d <= 2.0 * r * (1.0 - r) + 1e-12,
            format!("draw {draw}: d = {d} exceeds 2r(1-r) = {}", 2.0 * r * (1.0 - r)),
        );
        check(
            &mut failures,
            s.bayes_risk <= 2.0 * r + 1e-12,
            format!("draw {draw}: vote risk {} exceeds twice the Gibbs risk", s.bayes_risk),
        );
        if let Some(cb) = s.c_bound {
            let from_variance = s.variance / s.mu2;
            let from_moments = 1.0 - s.mu1 * s.mu1 / s.mu2;
            let from_rates = 1.0 - (1.0 - 2.0 * r).powi(2) / (1.0 - 2.0 * d);
            let spread = (from_variance - from_moments)
                .abs()
                .max((from_moments - from_rates).abs())
                .max((cb - from_moments).abs());
            check(
                &mut failures,
                spread <= 1e-12,
                format!("draw {draw}: C-bound forms differ by {spread}"),
            );
            check(
                &mut failures,
                s.bayes_risk <= cb + 1e-12,
                format!("draw {draw}: vote risk {} exceeds the C-bound {cb}", s.bayes_risk),
            );
            let flags = optimality_flags(s.mu1, s.mu2).unwrap();
            check(
                &mut failures,
                flags.second_moment_le_first == flags.gibbs_le_disagreement
                    && flags.second_moment_le_first == flags.c_bound_le_twice_gibbs,
                format!("draw {draw}: equivalence flags disagree: {flags:?}"),
            );
        }
        let pairwise = variance_upper_bound(&votes, &posterior).unwrap();
        check(
            &mut failures,
            pairwise >= s.variance - 1e-10,
            format!("draw {draw}: pairwise bound {pairwise} below variance {}", s.variance),
        );
        draw += 1;
    }

    let elapsed = start.elapsed();
    budget(&mut failures, elapsed, Duration::from_secs(5));
    verdict(4, "margin identities on 1000 seeded draws", elapsed, failures);
}

#[test]
fn criterion_5_posterior_transforms_preserve_structure() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut failures = Vec::new();
    let mut processed = 0usize;

    while processed < 200 {
        let (votes, posterior) = random_instance(&mut rng, 20, 5);
        let before = margins(&votes, &posterior).unwrap();
        let aligned = match quasi_uniformize(&posterior) {
            Ok(out) => out,
            Err(_) => continue, // perfectly balanced draw, no vote direction
        };
        let mid = margins(&votes, &aligned.posterior).unwrap();
        for (i, (b, a)) in before.iter().zip(&mid).enumerate() {
            check(
                &mut failures,
                (*b > 0.0) == (*a > 0.0) && (*b < 0.0) == (*a < 0.0),
                format!("draw {processed}: alignment flipped the sign on example {i}"),
            );
        }
        let sb = summarize(&before).unwrap();
        let sm = summarize(&mid).unwrap();
        if let (Some(cb), Some(cm)) = (sb.c_bound, sm.c_bound) {
            check(
                &mut failures,
                (cb - cm).abs() <= 1e-10,
                format!("draw {processed}: alignment moved the C-bound by {}", (cb - cm).abs()),
            );
        }

        // Point the vote in the positive direction before shrinking.
        let (posterior, sm) = if sm.mu1 > 0.0 {
            (aligned.posterior, sm)
        } else if sm.mu1 < 0.0 {
            let w = aligned.posterior.weights();
            let n = w.len() / 2;
            let flipped: Vec<f64> = (0..2 * n).map(|i| w[(i + n) % (2 * n)]).collect();
            let flipped = Posterior::new(flipped).unwrap();
            let s = summarize(&margins(&votes, &flipped).unwrap()).unwrap();
            (flipped, s)
        } else {
            continue;
        };
        let pre = margins(&votes, &posterior).unwrap();
        let target = sm.mu1 * rng.gen_range(0.1..=1.0);
        let shrunk = rescale_margin(&posterior, sm.mu1, target).unwrap();
        let after = margins(&votes, &shrunk).unwrap();
        for (i, (b, a)) in pre.iter().zip(&after).enumerate() {
            check(
                &mut failures,
                (*b > 0.0) == (*a > 0.0) && (*b < 0.0) == (*a < 0.0),
                format!("draw {processed}: rescaling flipped the sign on example {i}"),
            );
        }
        let st = summarize(&after).unwrap();
        check(
            &mut failures,
            (st.mu1 - target).abs() <= 1e-10,
            format!("draw {processed}: rescaled first moment {} misses target {target}", st.mu1),
        );
        if let (Some(cm), Some(ct)) = (sm.c_bound, st.c_bound) {
            check(
                &mut failures,
                (cm - ct).abs() <= 1e-10,
                format!("draw {processed}: rescaling moved the C-bound by {}", (cm - ct).abs()),
            );
        }
        processed += 1;
    }

    let elapsed = start.elapsed();
    budget(&mut failures, elapsed, Duration::from_secs(5));
    verdict(5, "posterior transforms on 200 seeded draws", elapsed, failures);
}

#[test]
fn criterion_6_margin_constrained_solver_matches_grid_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut failures = Vec::new();
    let mut solved = 0usize;

    while solved < 50 {
        let rows = rng.gen_range(3..=12);
        let values: Vec<f64> = (0..rows * 2).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let labels: Vec<i8> = (0..rows)
            .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
            .collect();
        let votes = VoteMatrix::from_first_half(&values, rows, 2, &labels).unwrap();
        let reach = max_feasible_margin(&votes);
        if reach < 0.05 {
            continue;
        }
        let mu = reach * rng.gen_range(0.2..0.8);
        let outcome = mincq_train(&votes, mu).unwrap();
        check(
            &mut failures,
            outcome.solver.kkt_residual <= 1e-6,
            format!("instance {solved}: first-order residual {}", outcome.solver.kkt_residual),
        );
        check(
            &mut failures,
            outcome.posterior.is_quasi_uniform(),
            format!("instance {solved}: output is not quasi-uniform"),
        );
        let s = summarize(&margins(&votes, &outcome.posterior).unwrap()).unwrap();
        check(
            &mut failures,
            (s.mu1 - mu).abs() <= 1e-8,
            format!("instance {solved}: margin constraint off by {}", (s.mu1 - mu).abs()),
        );

        // Grid oracle: the equality line leaves one free coordinate; walk it
        // at 1e-3 resolution (endpoints included) inside the box.
        let problem = mincq_build(&votes, mu).unwrap();
        let (free, dep) = if problem.equality[0].abs() >= problem.equality[1].abs() {
            (1, 0)
        } else {
            (0, 1)
        };
        let (c_free, c_dep) = (problem.equality[free], problem.equality[dep]);
        let upper = problem.upper;
        // q_dep in [0, upper] constrains the free coordinate to [lo, hi].
        let (lo, hi) = if c_free == 0.0 {
            (0.0, upper)
        } else {
            let end_a = problem.rhs / c_free;
            let end_b = (problem.rhs - c_dep * upper) / c_free;
            (end_a.min(end_b).max(0.0), end_a.max(end_b).min(upper))
        };
        assert!(hi >= lo, "solver found a point, so the segment is non-empty");
        let objective = |qf: f64| {
            let qd = (problem.rhs - c_free * qf) / c_dep;
            let mut q = [0.0; 2];
            q[free] = qf;
            q[dep] = qd.clamp(0.0, upper);
            let quad: f64 = (0..2)
                .map(|i| (0..2).map(|j| q[i] * problem.quadratic[i][j] * q[j]).sum::<f64>())
                .sum();
            quad - problem.linear[0] * q[0] - problem.linear[1] * q[1]
        };
        let mut best = objective(hi);
        let mut qf = lo;
        while qf < hi {
            best = best.min(objective(qf));
            qf += 1e-3;
        }
        check(
            &mut failures,
            (outcome.objective - best).abs() <= 2e-3,
            format!(
                "instance {solved}: solver objective {} vs grid oracle {best}",
                outcome.objective
            ),
        );
        solved += 1;
    }

    // Hand-solvable single-voter case: the margin constraint pins the whole
    // posterior at (3/4, 1/4).
    let votes = VoteMatrix::from_first_half(&[-1.0, 1.0], 2, 1, &[-1, 1]).unwrap();
    let outcome = mincq_train(&votes, 0.5).unwrap();
    let w = outcome.posterior.weights();
    check(
        &mut failures,
        (w[0] - 0.75).abs() <= 1e-9 && (w[1] - 0.25).abs() <= 1e-9,
        format!("single-voter case returned {w:?} instead of [0.75, 0.25]"),
    );

    let elapsed = start.elapsed();
    budget(&mut failures, elapsed, Duration::from_secs(10));
    verdict(6, "constrained solver vs grid oracle", elapsed, failures);
}

fn two_gaussians(count: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut ChaCha8Rng| {
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let examples = (0..count)
        .map(|i| {
            let label: i8 = if i % 2 == 0 { 1 } else { -1 };
            let center = 1.5 * f64::from(label);
            let features = vec![center + normal(&mut rng), center + normal(&mut rng)];
            Example::new(features, label).unwrap()
        })
        .collect();
    Dataset::new("two-gaussians", examples).unwrap()
}

/// Builds kernel voters anchored on the squashed training sample and trains
/// at margin `mu`; returns the majority-vote risk on `test`.
fn rbf_mincq_risk(train: &Dataset, test: &Dataset, gamma: f64, mu: f64) -> cbound::Result<f64> {
    let stats = AttributeStats::from_dataset(train);
    let squashed = tanh_normalize(train, &stats)?;
    let voters = build_kernel_voters(&squashed, KernelSpec::Rbf { gamma })?;
    let model = train_mincq_model(voters, train, mu, Some(stats))?;
    model.risk(test)
}

#[test]
fn criterion_7_synthetic_two_cluster_learning() {
    let start = Instant::now();
    let data = two_gaussians(2500, 7);
    let (train, test) = split_train_test(&data, 0.2, None, 7).unwrap();
    assert_eq!(train.len(), 500);
    assert_eq!(test.len(), 2000);
    let mut failures = Vec::new();

    // Kernel route: cross-validate the margin target, then retrain on the
    // full training half.
    let gamma = 1.0;
    let grid = log_grid(1e-4, 1e-2, 15).unwrap();
    let cv = cross_validate(&grid, &train, 5, 7, |&mu, fold_train, fold_test| {
        rbf_mincq_risk(fold_train, fold_test, gamma, mu)
    })
    .unwrap();
    let rbf_risk = rbf_mincq_risk(&train, &test, gamma, cv.best).unwrap();
    check(
        &mut failures,
        rbf_risk <= 0.05,
        format!("kernel vote test risk {rbf_risk} above 0.05 (selected margin {})", cv.best),
    );

    // Stump route: the learned vote must beat the plain uniform vote over
    // the same stumps.
    let stumps = build_stumps(&train, 10).unwrap().voters;
    let n = stumps.half_count();
    let stump_grid = log_grid(1e-4, 1.0, 15).unwrap();
    let stump_cv = cross_validate(&stump_grid, &train, 5, 7, |&mu, fold_train, fold_test| {
        let voters = build_stumps(fold_train, 10)?.voters;
        let model = train_mincq_model(voters, fold_train, mu, None)?;
        model.risk(fold_test)
    })
    .unwrap();
    let model = train_mincq_model(stumps.clone(), &train, stump_cv.best, None).unwrap();
    let learned_risk = model.risk(&test).unwrap();

    let mut uniform = vec![0.0; 2 * n];
    uniform[..n].fill(1.0 / n as f64);
    let uniform = Posterior::new(uniform).unwrap();
    let test_votes = vote_matrix(&stumps, &test).unwrap();
    let uniform_margins = margins(&test_votes, &uniform).unwrap();
    let uniform_risk =
        uniform_margins.iter().filter(|&&m| m <= 0.0).count() as f64 / test.len() as f64;
    check(
        &mut failures,
        learned_risk < uniform_risk,
        format!("learned stump vote risk {learned_risk} does not beat uniform {uniform_risk}"),
    );

    let elapsed = start.elapsed();
    budget(&mut failures, elapsed, Duration::from_secs(120));
    verdict(7, "synthetic two-cluster learning", elapsed, failures);
}

/// Test-set risks of the bound-guided stopping rule against two alternatives
/// on 17 benchmark splits: (bound-guided, train-risk-guided, fixed final
/// round).
const STOPPING_RISKS: [(f64, f64, f64); 17] = [
    (0.166, 0.169, 0.172),
    (0.050, 0.047, 0.058),
    (0.187, 0.199, 0.199),
    (0.252, 0.196, 0.196),
    (0.320, 0.320, 0.340),
    (0.215, 0.289, 0.289),
    (0.085, 0.120, 0.085),
    (0.005, 0.014, 0.010),
    (0.041, 0.041, 0.043),
    (0.050, 0.050, 0.049),
    (0.289, 0.289, 0.295),
    (0.010, 0.024, 0.010),
    (0.192, 0.250, 0.202),
    (0.389, 0.364, 0.389),
    (0.032, 0.041, 0.046),
    (0.101, 0.102, 0.115),
    (0.049, 0.060, 0.060),
];

#[test]
fn criterion_8_paired_risk_sign_tests() {
    let vs_final: Vec<(f64, f64)> = STOPPING_RISKS.iter().map(|&(cb, _, last)| (cb, last)).collect();
    let vs_train: Vec<(f64, f64)> = STOPPING_RISKS.iter().map(|&(cb, train, _)| (cb, train)).collect();

    let ((final_test, train_test), elapsed) = timed_min(3, || {
        (sign_test(&vs_final).unwrap(), sign_test(&vs_train).unwrap())
    });

    let mut failures = Vec::new();
    check(
        &mut failures,
        (final_test.p_value - 0.02).abs() <= 0.01,
        format!(
            "p = {} against the fixed-final-round rule ({} wins, {} losses, {} ties), expected 0.02 +/- 0.01",
            final_test.p_value, final_test.wins, final_test.losses, final_test.ties
        ),
    );
    check(
        &mut failures,
        (train_test.p_value - 0.05).abs() <= 0.02,
        format!(
            "p = {} against the train-risk rule ({} wins, {} losses, {} ties), expected 0.05 +/- 0.02",
            train_test.p_value, train_test.wins, train_test.losses, train_test.ties
        ),
    );
    budget(&mut failures, elapsed, Duration::from_millis(1));
    verdict(8, "paired risk sign tests", elapsed, failures);
}

#[test]
fn criterion_9_bound_range_and_monotonicity() {
    let sizes = [100u64, 1000, 3162, 10000];
    let deltas = [0.01, 0.05, 0.1, 0.2];

    // Aligned, compression-1 statistics family for the moment-slack bounds.
    let aligned_inputs = |m: u64, delta: f64| BoundInputs {
        m,
        m_u: None,
        delta,
        kl_qp: 0.0,
        stats: EmpiricalStats {
            gibbs_risk: Some(0.30),
            disagreement: Some(0.25),
            joint_error: Some(0.175),
            mu1: Some(0.40),
            mu2: Some(0.50),
        },
        compression: 1,
        aligned: true,
    };
    let value = |id: BoundId, m: u64, delta: f64| -> f64 {
        let inputs = match id {
            BoundId::B3 | BoundId::B3p => aligned_inputs(m, delta),
            _ => {
                let mut inputs = plain_inputs(m, delta);
                inputs.m_u = Some(100 * m);
                inputs
            }
        };
        compute_bound(id, &inputs).unwrap().value
    };

    let (mut failures, elapsed) = timed_min(3, || {
        let mut failures = Vec::new();
        let mut tables = Vec::new();
        for id in BoundId::ALL {
            let table: Vec<Vec<f64>> = sizes
                .iter()
                .map(|&m| deltas.iter().map(|&d| value(id, m, d)).collect())
                .collect();
            for (mi, row) in table.iter().enumerate() {
                for (di, &v) in row.iter().enumerate() {
                    check(
                        &mut failures,
                        (0.0..=1.0).contains(&v),
                        format!("{id} at (m={}, delta={}) is {v}, outside [0, 1]", sizes[mi], deltas[di]),
                    );
                    if di > 0 {
                        check(
                            &mut failures,
                            v <= row[di - 1] + 1e-12,
                            format!("{id} increased from {} to {v} as delta grew at m={}", row[di - 1], sizes[mi]),
                        );
                    }
                    if mi > 0 {
                        check(
                            &mut failures,
                            v <= table[mi - 1][di] + 1e-12,
                            format!("{id} increased from {} to {v} as m grew at delta={}", table[mi - 1][di], deltas[di]),
                        );
                    }
                }
            }
            tables.push((id, table));
        }
        let table_of = |id: BoundId| &tables.iter().find(|(i, _)| *i == id).unwrap().1;
        for (mi, &m) in sizes.iter().enumerate() {
            for (di, &d) in deltas.iter().enumerate() {
                let (b1, b1s) = (table_of(BoundId::B1)[mi][di], table_of(BoundId::B1s)[mi][di]);
                check(
                    &mut failures,
                    b1s <= b1 + 1e-12,
                    format!("B1s {b1s} above B1 {b1} at (m={m}, delta={d}) with a 100x unlabeled sample"),
                );
                let (b3, b3p) = (table_of(BoundId::B3)[mi][di], table_of(BoundId::B3p)[mi][di]);
                check(
                    &mut failures,
                    b3p >= b3 - 1e-12,
                    format!("compression surcharge lost: B3' {b3p} below B3 {b3} at (m={m}, delta={d})"),
                );
            }
        }
        failures
    });

    budget(&mut failures, elapsed, Duration::from_secs(1));
    verdict(9, "bound range and monotonicity", elapsed, failures);
}
