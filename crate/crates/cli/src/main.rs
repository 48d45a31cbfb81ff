//! Command-line front end: match-file ingestion, scene synthesis, fundamental
//! matrix estimation, decision-figure export, and benchmarking.
//!
//! Exit codes: 0 success, 2 input/flag errors, 3 estimation failures.

mod io;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use epipolar::evaluation::{benchmark, BenchmarkParams, BenchmarkRow, EvaluationConfig, Method};
use epipolar::pipeline::{clustering_assisted_estimate, decision_figure, PipelineConfig};
use epipolar::synthetic::{generate_scene, SyntheticSceneConfig};
use epipolar::{eight_point, lmeds, ransac, seven_point, MatchPair, RansacConfig};

const EXIT_INPUT: u8 = 2;
const EXIT_ESTIMATION: u8 = 3;

enum CliError {
    /// Bad files or flags.
    Input(String),
    /// A numerical or estimation failure on valid input.
    Estimation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Estimation(_) => EXIT_ESTIMATION,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Estimation(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "epipolar",
    about = "Two-view fundamental matrix estimation with a density-peaks match prefilter",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a fundamental matrix from a match file.
    Estimate(EstimateArgs),
    /// Generate a synthetic match file with a ground-truth sidecar.
    Synth(SynthArgs),
    /// Export the density-peaks decision figure for a match file.
    DecisionFigure(DecisionFigureArgs),
    /// Run estimators side by side and emit benchmark rows.
    Benchmark(BenchmarkArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    EightPoint,
    SevenPoint,
    Ransac,
    Lmeds,
    Proposed,
}

impl From<MethodArg> for Method {
    fn from(value: MethodArg) -> Self {
        match value {
            MethodArg::EightPoint => Method::EightPoint,
            MethodArg::SevenPoint => Method::SevenPoint,
            MethodArg::Ransac => Method::Ransac,
            MethodArg::Lmeds => Method::Lmeds,
            MethodArg::Proposed => Method::Proposed,
        }
    }
}

#[derive(Args, Clone)]
struct EstimatorFlags {
    /// Inlier threshold in pixels (symmetric point-to-epipolar-line distance).
    #[arg(long, default_value_t = 1.0)]
    th: f64,
    /// RANSAC confidence in (0, 1).
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// Cluster threshold coefficient of the proposed method.
    #[arg(long, default_value_t = 0.011)]
    alpha: f64,
    /// Neighborhood target fraction for the cutoff distance.
    #[arg(long, default_value_t = 0.02)]
    dc_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap for RANSAC.
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Number of LMedS trials.
    #[arg(long, default_value_t = 500)]
    lmeds_trials: usize,
    /// Solve linear fits on raw pixel coordinates (no Hartley conditioning).
    #[arg(long)]
    no_normalize: bool,
}

impl EstimatorFlags {
    fn ransac_config(&self) -> RansacConfig {
        RansacConfig {
            th: self.th,
            confidence: self.confidence,
            max_iterations: self.max_iter,
            seed: self.seed,
            normalize: !self.no_normalize,
        }
    }

    fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            alpha: self.alpha,
            dc_fraction: self.dc_fraction,
            ransac: self.ransac_config(),
        }
    }

    fn benchmark_params(&self) -> BenchmarkParams {
        BenchmarkParams {
            th: self.th,
            confidence: self.confidence,
            alpha: self.alpha,
            dc_fraction: self.dc_fraction,
            seed: self.seed,
            max_iterations: self.max_iter,
            lmeds_trials: self.lmeds_trials,
            normalize: !self.no_normalize,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Match file: one `x y x' y'` line per pair.
    #[arg(long)]
    matches: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[command(flatten)]
    flags: EstimatorFlags,
    /// Write the estimated matrix here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of pairs to generate.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Gaussian pixel noise sigma.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Fraction of pairs turned into gross mismatches, in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    outliers: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 640.0)]
    width: f64,
    #[arg(long, default_value_t = 480.0)]
    height: f64,
    #[arg(long, default_value_t = 500.0)]
    focal: f64,
    #[arg(long, default_value_t = 1.2)]
    baseline: f64,
    /// Maximum relative rotation per axis, degrees.
    #[arg(long, default_value_t = 5.0)]
    max_rotation: f64,
    #[arg(long, default_value_t = 4.0)]
    depth_min: f64,
    #[arg(long, default_value_t = 8.0)]
    depth_max: f64,
    /// Match file to write.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth sidecar path; defaults to `<out>.truth`.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct DecisionFigureArgs {
    #[arg(long)]
    matches: PathBuf,
    #[arg(long, default_value_t = 0.011)]
    alpha: f64,
    #[arg(long, default_value_t = 0.02)]
    dc_fraction: f64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a static SVG scatter of the figure.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Match file to benchmark on (mutually exclusive with --synth).
    #[arg(long, conflicts_with = "synth")]
    matches: Option<PathBuf>,
    /// Ground-truth sidecar enabling the d1 column.
    #[arg(long, requires = "matches")]
    truth: Option<PathBuf>,
    /// Generate the dataset instead of reading it.
    #[arg(long)]
    synth: bool,
    #[arg(long, default_value_t = 400)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.4)]
    outliers: f64,
    /// Comma-separated methods: eight-point, seven-point, ransac, lmeds, proposed.
    #[arg(long, value_delimiter = ',', required = true)]
    methods: Vec<MethodArg>,
    /// Run once per threshold in this comma-separated list.
    #[arg(long, value_delimiter = ',')]
    sweep_th: Vec<f64>,
    /// Alphas paired with --sweep-th entries (same length).
    #[arg(long, value_delimiter = ',')]
    sweep_alpha: Vec<f64>,
    /// Zhang-metric trials per row (needs ground truth).
    #[arg(long, default_value_t = 500)]
    eval_trials: usize,
    #[command(flatten)]
    flags: EstimatorFlags,
    /// Write rows here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Synth(args) => cmd_synth(args),
        Command::DecisionFigure(args) => cmd_decision_figure(args),
        Command::Benchmark(args) => cmd_benchmark(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn load_matches(path: &Path, minimum: usize) -> Result<Vec<MatchPair>, CliError> {
    let text = read_to_string(path)?;
    let pairs = io::parse_matches(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if pairs.len() < minimum {
        return Err(CliError::Input(format!(
            "{}: need at least {minimum} pairs, found {}",
            path.display(),
            pairs.len()
        )));
    }
    Ok(pairs)
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_output(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let pairs = load_matches(&args.matches, 8)?;
    let estimation = || -> Result<_, CliError> {
        let fail = |e: &dyn std::fmt::Display| CliError::Estimation(e.to_string());
        match args.method {
            MethodArg::EightPoint => {
                let f = eight_point(&pairs, !args.flags.no_normalize).map_err(|e| fail(&e))?;
                Ok((f, None))
            }
            MethodArg::SevenPoint => {
                // Minimal solver on the first seven pairs; the remaining pairs
                // pick the best candidate.
                let candidates = seven_point(&pairs[..7]).map_err(|e| fail(&e))?;
                let best = candidates
                    .into_iter()
                    .filter_map(|f| mean_distance(&pairs, &f).map(|m| (m, f)))
                    .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
                    .ok_or_else(|| CliError::Estimation("no scorable candidate".into()))?;
                Ok((best.1, None))
            }
            MethodArg::Ransac => {
                let result = ransac(&pairs, &args.flags.ransac_config()).map_err(|e| fail(&e))?;
                Ok((result.f_matrix.clone(), Some((result, None))))
            }
            MethodArg::Lmeds => {
                let result = lmeds(&pairs, args.flags.lmeds_trials, args.flags.seed)
                    .map_err(|e| fail(&e))?;
                Ok((result.f_matrix.clone(), Some((result, None))))
            }
            MethodArg::Proposed => {
                let report = clustering_assisted_estimate(&pairs, &args.flags.pipeline_config())
                    .map_err(|e| fail(&e))?;
                let selected = report.cluster_selection.inlier_indices.len();
                Ok((
                    report.estimate.f_matrix.clone(),
                    Some((report.estimate, Some((selected, report.stage_timings)))),
                ))
            }
        }
    };
    let (f, robust) = estimation()?;

    eprintln!("method: {}", Method::from(args.method).name());
    eprintln!("pairs: {}", pairs.len());
    if let Some((result, pipeline_extra)) = &robust {
        eprintln!("inliers: {} / {}", result.inlier_count(), pairs.len());
        eprintln!("iterations: {}", result.iterations_used);
        eprintln!("mean inlier error (px): {}", result.mean_inlier_error);
        eprintln!("elapsed (ms): {:.3}", result.elapsed.as_secs_f64() * 1e3);
        if let Some((selected, timings)) = pipeline_extra {
            eprintln!("cluster selection: {selected} / {}", pairs.len());
            eprintln!(
                "stage timings (ms): clustering {:.3}, search {:.3}, refit {:.3}",
                timings.clustering.as_secs_f64() * 1e3,
                timings.ransac_search.as_secs_f64() * 1e3,
                timings.refit.as_secs_f64() * 1e3
            );
        }
    } else if let Some(mean) = mean_distance(&pairs, &f) {
        eprintln!("mean error over all pairs (px): {mean}");
    }
    emit(args.out.as_deref(), &f.to_text())
}

fn mean_distance(pairs: &[MatchPair], f: &epipolar::FundamentalMatrix) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for pair in pairs {
        if let Ok(d) = epipolar::symmetric_epipolar_distance(f.as_matrix(), pair) {
            sum += d;
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let config = SyntheticSceneConfig {
        num_points: args.n,
        noise_sigma: args.sigma,
        outlier_fraction: args.outliers,
        image_size: (args.width, args.height),
        depth_range: (args.depth_min, args.depth_max),
        baseline: args.baseline,
        max_rotation_deg: args.max_rotation,
        focal: args.focal,
        seed: args.seed,
    };
    let scene = match generate_scene(&config) {
        Ok(scene) => scene,
        Err(epipolar::SceneError::InvalidConfig(msg)) => return Err(CliError::Input(msg)),
        Err(other) => return Err(CliError::Estimation(other.to_string())),
    };
    let sidecar = args
        .sidecar
        .unwrap_or_else(|| PathBuf::from(format!("{}.truth", args.out.display())));
    write_output(&args.out, &io::serialize_matches(&scene.pairs))?;
    write_output(&sidecar, &io::serialize_truth(&scene.f0, &scene.truth_mask))?;
    eprintln!(
        "wrote {} pairs ({} outliers) to {}; ground truth in {}",
        scene.pairs.len(),
        scene.outlier_count(),
        args.out.display(),
        sidecar.display()
    );
    Ok(())
}

fn cmd_decision_figure(args: DecisionFigureArgs) -> Result<(), CliError> {
    let pairs = load_matches(&args.matches, 2)?;
    let config = PipelineConfig {
        alpha: args.alpha,
        dc_fraction: args.dc_fraction,
        ransac: RansacConfig::default(),
    };
    let figure =
        decision_figure(&pairs, &config).map_err(|e| CliError::Estimation(e.to_string()))?;
    if let Some(svg_path) = &args.svg {
        write_output(svg_path, &io::decision_svg(&figure))?;
    }
    emit(args.out.as_deref(), &io::decision_csv(&figure))
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<(), CliError> {
    if args.methods.is_empty() {
        return Err(CliError::Input("no methods selected".into()));
    }
    let (pairs, f0) = if args.synth {
        let scene = generate_scene(&SyntheticSceneConfig {
            num_points: args.n,
            noise_sigma: args.sigma,
            outlier_fraction: args.outliers,
            seed: args.flags.seed,
            ..Default::default()
        })
        .map_err(|e| CliError::Input(e.to_string()))?;
        (scene.pairs, Some(scene.f0))
    } else {
        let path = args
            .matches
            .as_deref()
            .ok_or_else(|| CliError::Input("pass --matches FILE or --synth".into()))?;
        let pairs = load_matches(path, 8)?;
        let f0 = match &args.truth {
            Some(truth_path) => {
                let text = read_to_string(truth_path)?;
                let (f0, _mask) = io::parse_truth(&text)
                    .map_err(|e| CliError::Input(format!("{}: {e}", truth_path.display())))?;
                Some(f0)
            }
            None => None,
        };
        (pairs, f0)
    };

    if !args.sweep_alpha.is_empty() && args.sweep_alpha.len() != args.sweep_th.len() {
        return Err(CliError::Input(format!(
            "--sweep-alpha needs {} entries to pair with --sweep-th, got {}",
            args.sweep_th.len(),
            args.sweep_alpha.len()
        )));
    }
    let methods: Vec<Method> = args.methods.iter().map(|&m| Method::from(m)).collect();
    let eval = EvaluationConfig {
        trials: args.eval_trials,
        seed: args.flags.seed,
        ..Default::default()
    };

    let runs: Vec<(f64, f64)> = if args.sweep_th.is_empty() {
        vec![(args.flags.th, args.flags.alpha)]
    } else {
        args.sweep_th
            .iter()
            .enumerate()
            .map(|(i, &th)| {
                let alpha = args.sweep_alpha.get(i).copied().unwrap_or(args.flags.alpha);
                (th, alpha)
            })
            .collect()
    };

    let mut rows: Vec<BenchmarkRow> = Vec::new();
    for (th, alpha) in runs {
        let params = BenchmarkParams {
            th,
            alpha,
            ..args.flags.benchmark_params()
        };
        rows.extend(benchmark(&pairs, f0.as_ref(), &methods, &params, &eval));
    }
    rows.sort_by(|a, b| {
        (
            &a.method,
            a.th.unwrap_or(f64::NAN),
            a.alpha.unwrap_or(f64::NAN),
        )
            .partial_cmp(&(
                &b.method,
                b.th.unwrap_or(f64::NAN),
                b.alpha.unwrap_or(f64::NAN),
            ))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut out = String::from("# format: benchmark v1\n");
    out.push_str(BenchmarkRow::csv_header());
    out.push('\n');
    let mut any_ok = false;
    for row in &rows {
        any_ok |= row.status == "ok";
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    emit(args.out.as_deref(), &out)?;
    if any_ok {
        Ok(())
    } else {
        Err(CliError::Estimation("every method failed".into()))
    }
}
