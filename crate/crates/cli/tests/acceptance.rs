//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured margins (visible with `--nocapture`).

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use epipolar::density_peaks::{
    build_match_vectors, density_peaks, pairwise_distances, select_inliers,
};
use epipolar::evaluation::{zhang_error, EvaluationConfig};
use epipolar::pipeline::{clustering_assisted_estimate, PipelineConfig};
use epipolar::synthetic::{generate_scene, SyntheticSceneConfig};
use epipolar::{
    eight_point, lmeds, ransac, required_iterations, seven_point, FundamentalMatrix, MatchPair,
    RansacConfig,
};
use nalgebra::Matrix3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn median(mut values: Vec<f64>) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n.is_multiple_of(2) {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    } else {
        values[n / 2]
    }
}

fn mean_distance(pairs: &[MatchPair], f: &FundamentalMatrix) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for pair in pairs {
        if let Ok(d) = epipolar::symmetric_epipolar_distance(f.as_matrix(), pair) {
            sum += d;
            count += 1;
        }
    }
    sum / count.max(1) as f64
}

/// Best 7-point candidate by the observable score (mean distance over all
/// pairs), fitted on the first seven pairs.
fn seven_point_best(pairs: &[MatchPair]) -> FundamentalMatrix {
    seven_point(&pairs[..7])
        .unwrap()
        .into_iter()
        .map(|f| (mean_distance(pairs, &f), f))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap()
        .1
}

fn matrix_bits(f: &FundamentalMatrix) -> [u64; 9] {
    let m = f.as_matrix();
    std::array::from_fn(|k| m[(k / 3, k % 3)].to_bits())
}

// --- criterion 1: exact recovery on clean scenes -------------------------

#[test]
fn criterion_1_exact_recovery() {
    let start = Instant::now();
    let eval = EvaluationConfig {
        trials: 200,
        seed: 7,
        ..Default::default()
    };
    let mut worst_entry = 0.0_f64;
    let mut worst_d1 = 0.0_f64;
    for seed in 0..20u64 {
        for n in [8usize, 20, 200] {
            let scene = generate_scene(&SyntheticSceneConfig {
                num_points: n,
                seed: 1000 + seed,
                ..Default::default()
            })
            .unwrap();
            let ransac_config = RansacConfig {
                th: 1.0,
                seed,
                ..Default::default()
            };
            let estimates: Vec<(&str, FundamentalMatrix)> = vec![
                ("eight-point", eight_point(&scene.pairs, true).unwrap()),
                ("seven-point", seven_point_best(&scene.pairs)),
                (
                    "ransac",
                    ransac(&scene.pairs, &ransac_config).unwrap().f_matrix,
                ),
                ("lmeds", lmeds(&scene.pairs, 64, seed).unwrap().f_matrix),
                (
                    "proposed",
                    clustering_assisted_estimate(
                        &scene.pairs,
                        &PipelineConfig {
                            alpha: 0.0,
                            ransac: ransac_config.clone(),
                            ..Default::default()
                        },
                    )
                    .unwrap()
                    .estimate
                    .f_matrix,
                ),
            ];
            for (name, f) in estimates {
                let diff = f.max_abs_diff(&scene.f0);
                let d1 = zhang_error(&scene.f0, &f, &eval).unwrap().d1;
                assert!(
                    diff <= 1e-6 && d1 <= 1e-6,
                    "{name} seed {seed} n {n}: entry diff {diff:e}, d1 {d1:e}"
                );
                worst_entry = worst_entry.max(diff);
                worst_d1 = worst_d1.max(d1);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "acceptance criterion 1: PASS - exact recovery, worst entry diff {worst_entry:.2e}, \
         worst d1 {worst_d1:.2e} px, {elapsed:?} total"
    );
}

// --- criteria 2 and 3 share the noisy 40%-outlier scenes ------------------

fn noisy_scene(seed: u64) -> epipolar::SyntheticScene {
    generate_scene(&SyntheticSceneConfig {
        num_points: 400,
        noise_sigma: 1.0,
        outlier_fraction: 0.4,
        seed: 2000 + seed,
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn criterion_2_robustness_ordering() {
    let eval = EvaluationConfig {
        trials: 300,
        seed: 9,
        ..Default::default()
    };
    let mut d1s: std::collections::BTreeMap<&str, Vec<f64>> = Default::default();
    for seed in 0..20u64 {
        let scene = noisy_scene(seed);
        let ransac_config = RansacConfig {
            th: 2.2,
            seed,
            ..Default::default()
        };
        let estimates: Vec<(&str, FundamentalMatrix)> = vec![
            ("eight-point", eight_point(&scene.pairs, true).unwrap()),
            ("seven-point", seven_point_best(&scene.pairs)),
            (
                "ransac",
                ransac(&scene.pairs, &ransac_config).unwrap().f_matrix,
            ),
            ("lmeds", lmeds(&scene.pairs, 500, seed).unwrap().f_matrix),
            (
                "proposed",
                clustering_assisted_estimate(
                    &scene.pairs,
                    &PipelineConfig {
                        alpha: 0.011,
                        ransac: ransac_config.clone(),
                        ..Default::default()
                    },
                )
                .unwrap()
                .estimate
                .f_matrix,
            ),
        ];
        for (name, f) in estimates {
            let d1 = zhang_error(&scene.f0, &f, &eval).unwrap().d1;
            d1s.entry(name).or_default().push(d1);
        }
    }
    let med = |name: &str| median(d1s[name].clone());
    let robust = ["lmeds", "ransac", "proposed"];
    let linear = ["eight-point", "seven-point"];
    for r in robust {
        for l in linear {
            assert!(
                med(r) < med(l),
                "median d1({r}) = {} is not below median d1({l}) = {}",
                med(r),
                med(l)
            );
        }
    }
    assert!(
        med("proposed") <= med("ransac"),
        "proposed {} vs ransac {}",
        med("proposed"),
        med("ransac")
    );
    println!(
        "acceptance criterion 2: PASS - median d1 px: proposed {:.2} <= ransac {:.2}; \
         lmeds {:.2}; eight-point {:.2}, seven-point {:.2}",
        med("proposed"),
        med("ransac"),
        med("lmeds"),
        med("eight-point"),
        med("seven-point")
    );
}

#[test]
fn criterion_3_speed_mechanism() {
    // Shared cap high enough that the pipeline's inner RANSAC terminates
    // adaptively while plain RANSAC saturates (its adaptive bound at this
    // threshold and noise is ~1e8).
    let cap = 50_000usize;
    let mut plain_iters = Vec::new();
    let mut pipeline_iters = Vec::new();
    for seed in 0..20u64 {
        let scene = noisy_scene(seed);
        let ransac_config = RansacConfig {
            th: 0.5,
            seed,
            max_iterations: cap,
            ..Default::default()
        };
        plain_iters.push(
            ransac(&scene.pairs, &ransac_config)
                .unwrap()
                .iterations_used as f64,
        );
        let report = clustering_assisted_estimate(
            &scene.pairs,
            &PipelineConfig {
                alpha: 0.04,
                ransac: ransac_config,
                ..Default::default()
            },
        )
        .unwrap();
        pipeline_iters.push(report.estimate.iterations_used as f64);
    }
    let plain = median(plain_iters);
    let pipeline = median(pipeline_iters);
    assert!(
        pipeline <= 0.5 * plain,
        "median pipeline iterations {pipeline} exceed half of plain {plain}"
    );
    println!(
        "acceptance criterion 3: PASS - median iterations {pipeline} (pipeline) vs {plain} (plain), ratio {:.3}",
        pipeline / plain
    );
}

// --- criterion 4: the iteration formula ----------------------------------

#[test]
fn criterion_4_iteration_formula() {
    assert_eq!(required_iterations(0.99, 0.5, 8), 1177);
    assert_eq!(required_iterations(0.99, 0.9, 8), 9);
    println!("acceptance criterion 4: PASS - required_iterations(0.99, 0.5, 8) = 1177, (0.99, 0.9, 8) = 9");
}

// --- criterion 5: density-peaks vs brute force ----------------------------

fn brute_distance(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn brute_rho(points: &[[f64; 4]], d_c: f64) -> Vec<usize> {
    let n = points.len();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && brute_distance(&points[i], &points[j]) < d_c)
                .count()
        })
        .collect()
}

fn brute_delta(points: &[[f64; 4]], rho: &[usize]) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = points.len();
    let mut delta = vec![0.0; n];
    let mut parent = vec![None; n];
    for i in 0..n {
        let mut best: Option<(f64, usize)> = None;
        for j in 0..n {
            if j == i {
                continue;
            }
            let higher = rho[j] > rho[i] || (rho[j] == rho[i] && j < i);
            if !higher {
                continue;
            }
            let d = brute_distance(&points[i], &points[j]);
            let better = match best {
                None => true,
                Some((bd, _)) => d < bd,
            };
            if better {
                best = Some((d, j));
            }
        }
        match best {
            Some((d, j)) => {
                delta[i] = d;
                parent[i] = Some(j);
            }
            None => {
                delta[i] = (0..n)
                    .map(|j| brute_distance(&points[i], &points[j]))
                    .fold(0.0, f64::max);
            }
        }
    }
    (delta, parent)
}

fn brute_inliers(rho: &[usize], delta: &[f64], alpha: f64) -> Vec<usize> {
    let rho_max = rho.iter().copied().max().unwrap() as f64;
    let delta_max = delta.iter().copied().fold(0.0, f64::max);
    let threshold = alpha * rho_max * delta_max;
    (0..rho.len())
        .filter(|&i| rho[i] as f64 * delta[i] >= threshold)
        .collect()
}

#[test]
fn criterion_5_density_peaks_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    for instance in 0..200 {
        let n: usize = rng.random_range(2..=12);
        let mut points: Vec<[f64; 4]> = (0..n)
            .map(|_| std::array::from_fn(|_| rng.random_range(-50.0..50.0)))
            .collect();
        // A fifth of the instances carry duplicated points so density ties
        // and zero distances get exercised.
        if instance % 5 == 0 && n >= 3 {
            points[1] = points[0];
            points[n - 1] = points[n / 2];
        }
        let diameter = points
            .iter()
            .flat_map(|a| points.iter().map(move |b| brute_distance(a, b)))
            .fold(0.0, f64::max)
            .max(1.0);
        let d_c = rng.random_range(0.0..diameter * 1.1);
        let alpha = rng.random_range(0.0..1.5);

        let pairs: Vec<MatchPair> = points
            .iter()
            .map(|p| MatchPair::new(p[0], p[1], p[2], p[3]))
            .collect();
        let vectors = build_match_vectors(&pairs);
        let matrix = pairwise_distances(&vectors).unwrap();
        let result = density_peaks(&matrix, d_c);
        let selection = select_inliers(&result, alpha);

        let want_rho = brute_rho(&points, d_c);
        assert_eq!(result.rho, want_rho, "rho mismatch, instance {instance}");
        let (want_delta, want_parent) = brute_delta(&points, &want_rho);
        for (i, (got, want)) in result.delta.iter().zip(&want_delta).enumerate() {
            assert!(
                (got - want).abs() <= 1e-12,
                "delta mismatch at {i}, instance {instance}"
            );
        }
        assert_eq!(
            result.nearest_higher, want_parent,
            "parent mismatch, instance {instance}"
        );
        assert_eq!(
            selection.inlier_indices,
            brute_inliers(&want_rho, &want_delta, alpha),
            "selection mismatch, instance {instance}"
        );
    }
    println!("acceptance criterion 5: PASS - 200 random instances match the brute-force oracle");
}

// --- criterion 6: invariant suites ----------------------------------------

#[test]
fn criterion_6_invariants_and_determinism() {
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    // Canonical scale/sign idempotence and rank-2 determinants.
    for _ in 0..200 {
        let m = Matrix3::from_fn(|_, _| rng.random_range(-3.0..3.0));
        let canon = FundamentalMatrix::canonicalize(&m).unwrap();
        let twice = FundamentalMatrix::canonicalize(canon.as_matrix()).unwrap();
        assert_eq!(
            matrix_bits(&canon),
            matrix_bits(&twice),
            "canonicalize not idempotent"
        );
        let rank2 = FundamentalMatrix::enforce_rank2(&m).unwrap();
        assert!(rank2.as_matrix().determinant().abs() <= 1e-10);
    }

    // Gamma-threshold monotonicity and the containment chain.
    let scene = noisy_scene(500);
    let vectors = build_match_vectors(&scene.pairs);
    let matrix = pairwise_distances(&vectors).unwrap();
    let d_c = epipolar::select_dc(&matrix, 0.02).unwrap();
    let peaks = density_peaks(&matrix, d_c);
    let alphas = [0.0, 0.005, 0.011, 0.02, 0.05, 0.1];
    for window in alphas.windows(2) {
        let wide: std::collections::BTreeSet<usize> = select_inliers(&peaks, window[0])
            .inlier_indices
            .into_iter()
            .collect();
        let narrow = select_inliers(&peaks, window[1]).inlier_indices;
        assert!(
            narrow.iter().all(|i| wide.contains(i)),
            "selection not nested"
        );
    }
    let config = PipelineConfig {
        alpha: 0.011,
        ransac: RansacConfig {
            th: 2.2,
            seed: 500,
            ..Default::default()
        },
        ..Default::default()
    };
    let report = clustering_assisted_estimate(&scene.pairs, &config).unwrap();
    let selected: std::collections::BTreeSet<usize> = report
        .cluster_selection
        .inlier_indices
        .iter()
        .copied()
        .collect();
    assert!(selected.len() <= scene.pairs.len());
    for (i, &inlier) in report.estimate.inlier_mask.iter().enumerate() {
        assert!(
            !inlier || selected.contains(&i),
            "containment chain broken at {i}"
        );
    }

    // Seeded determinism, bit for bit.
    let det_scene = |s| {
        generate_scene(&SyntheticSceneConfig {
            num_points: 120,
            noise_sigma: 0.8,
            outlier_fraction: 0.3,
            seed: s,
            ..Default::default()
        })
        .unwrap()
    };
    let (a, b) = (det_scene(42), det_scene(42));
    assert_eq!(matrix_bits(&a.f0), matrix_bits(&b.f0));
    assert_eq!(a.truth_mask, b.truth_mask);
    for (pa, pb) in a.pairs.iter().zip(&b.pairs) {
        for (x, y) in [
            (pa.left.x, pb.left.x),
            (pa.left.y, pb.left.y),
            (pa.right.x, pb.right.x),
            (pa.right.y, pb.right.y),
        ] {
            assert_eq!(x.to_bits(), y.to_bits(), "scene coordinates differ");
        }
    }
    let rc = RansacConfig {
        th: 1.5,
        seed: 77,
        ..Default::default()
    };
    let (ra, rb) = (
        ransac(&a.pairs, &rc).unwrap(),
        ransac(&a.pairs, &rc).unwrap(),
    );
    assert_eq!(matrix_bits(&ra.f_matrix), matrix_bits(&rb.f_matrix));
    assert_eq!(ra.inlier_mask, rb.inlier_mask);
    assert_eq!(ra.iterations_used, rb.iterations_used);
    assert_eq!(
        ra.mean_inlier_error.to_bits(),
        rb.mean_inlier_error.to_bits()
    );
    let (la, lb) = (
        lmeds(&a.pairs, 120, 5).unwrap(),
        lmeds(&a.pairs, 120, 5).unwrap(),
    );
    assert_eq!(matrix_bits(&la.f_matrix), matrix_bits(&lb.f_matrix));
    assert_eq!(la.inlier_mask, lb.inlier_mask);
    let pc = PipelineConfig {
        alpha: 0.02,
        ransac: rc,
        ..Default::default()
    };
    let (pa, pb) = (
        clustering_assisted_estimate(&a.pairs, &pc).unwrap(),
        clustering_assisted_estimate(&a.pairs, &pc).unwrap(),
    );
    assert_eq!(
        matrix_bits(&pa.estimate.f_matrix),
        matrix_bits(&pb.estimate.f_matrix)
    );
    assert_eq!(pa.estimate.inlier_mask, pb.estimate.inlier_mask);
    assert_eq!(
        pa.cluster_selection.inlier_indices,
        pb.cluster_selection.inlier_indices
    );
    let eval = EvaluationConfig {
        trials: 120,
        seed: 13,
        ..Default::default()
    };
    let za = zhang_error(&a.f0, &ra.f_matrix, &eval).unwrap();
    let zb = zhang_error(&a.f0, &ra.f_matrix, &eval).unwrap();
    assert_eq!(za.d1.to_bits(), zb.d1.to_bits());
    assert_eq!(za.per_trial.len(), zb.per_trial.len());
    for ((da, dpa), (db, dpb)) in za.per_trial.iter().zip(&zb.per_trial) {
        assert_eq!(da.to_bits(), db.to_bits());
        assert_eq!(dpa.to_bits(), dpb.to_bits());
    }

    println!(
        "acceptance criterion 6: PASS - idempotence, rank-2 determinants, gamma monotonicity, \
         containment, and bit-identical seeded reruns"
    );
}

// --- criterion 7: Zhang metric sanity --------------------------------------

#[test]
fn criterion_7_zhang_sanity() {
    let scene = generate_scene(&SyntheticSceneConfig {
        seed: 8,
        ..Default::default()
    })
    .unwrap();
    let f0 = scene.f0;
    let reflexive = zhang_error(&f0, &f0, &EvaluationConfig::default())
        .unwrap()
        .d1;
    assert!(reflexive <= 1e-9, "d1(F0, F0) = {reflexive:e}");

    // Entrywise-relative perturbation direction, unit Frobenius norm.
    let signs = Matrix3::new(1.0, -1.0, 1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0);
    let mut direction = Matrix3::zeros();
    for r in 0..3 {
        for c in 0..3 {
            direction[(r, c)] = signs[(r, c)] * f0.as_matrix()[(r, c)];
        }
    }
    direction /= direction.norm();
    let config = EvaluationConfig {
        seed: 77,
        ..Default::default()
    };
    let mut previous = 0.0;
    let mut values = Vec::new();
    for scale in [0.01, 0.05, 0.1] {
        let perturbed =
            FundamentalMatrix::enforce_rank2(&(f0.as_matrix() + direction * scale)).unwrap();
        let d1 = zhang_error(&f0, &perturbed, &config).unwrap().d1;
        assert!(
            d1 >= previous,
            "d1 not monotone: {d1} after {previous} at scale {scale}"
        );
        previous = d1;
        values.push(d1);
    }
    println!(
        "acceptance criterion 7: PASS - d1(F0, F0) = {reflexive:.2e}; perturbation d1 = \
         {values:.3?} px at scales [0.01, 0.05, 0.1]"
    );
}

// --- criterion 8: CLI round trips ------------------------------------------

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epipolar"))
}

fn run_cli(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn criterion_8_cli_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let matches = dir.path().join("clean.txt").display().to_string();
    let sidecar = format!("{matches}.truth");
    let synth = run_cli(&[
        "synth",
        "--n",
        "120",
        "--seed",
        "21",
        "--out",
        &matches,
        "--sidecar",
        &sidecar,
    ]);
    assert!(synth.status.success());

    // Noise-free round trip within 1e-6.
    let estimate = run_cli(&["estimate", "--matches", &matches, "--method", "eight-point"]);
    assert!(estimate.status.success());
    let f = FundamentalMatrix::from_text(&String::from_utf8(estimate.stdout).unwrap()).unwrap();
    let truth_text = std::fs::read_to_string(Path::new(&sidecar)).unwrap();
    let matrix_rows: String = truth_text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .take(3)
        .collect::<Vec<_>>()
        .join("\n");
    let f0 = FundamentalMatrix::from_text(&matrix_rows).unwrap();
    let diff = f.max_abs_diff(&f0);
    assert!(diff <= 1e-6, "round-trip diff {diff:e}");

    // Malformed input: exit 2 with a line-numbered diagnostic.
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 2 3 4\n5 6\n").unwrap();
    let failed = run_cli(&[
        "estimate",
        "--matches",
        bad.to_str().unwrap(),
        "--method",
        "ransac",
    ]);
    assert_eq!(failed.status.code(), Some(2));
    let message = String::from_utf8(failed.stderr).unwrap();
    assert!(message.contains("line 2"), "stderr: {message}");

    // Full sweep at N = 400 in under a minute.
    let start = Instant::now();
    let sweep = run_cli(&[
        "benchmark",
        "--synth",
        "--n",
        "400",
        "--sigma",
        "1",
        "--outliers",
        "0.4",
        "--methods",
        "ransac,proposed",
        "--sweep-th",
        "2.2,1,0.8,0.5",
        "--sweep-alpha",
        "0.011,0.02,0.025,0.04",
    ]);
    let elapsed = start.elapsed();
    assert!(sweep.status.success());
    let text = String::from_utf8(sweep.stdout).unwrap();
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("method,") && !l.trim().is_empty())
        .count();
    assert_eq!(rows, 8);
    assert!(elapsed.as_secs_f64() < 60.0, "sweep took {elapsed:?}");

    println!(
        "acceptance criterion 8: PASS - round-trip diff {diff:.2e}, line-numbered exit 2, \
         8-row sweep in {elapsed:?}"
    );
}
