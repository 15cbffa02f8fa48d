//! Batch CLI: simulate synthetic EMI-corrupted acquisitions, run a
//! correction method, evaluate metrics against a baseline, and print
//! comparison tables.
//!
//! Exit codes: 0 success, 2 usage error, 3 data-format error, 4 numerical
//! failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use stride_emi::array::{ComplexArray2D, Domain, MultiCoilAcquisition};
use stride_emi::editer::{correct_kspace, EditerConfig};
use stride_emi::error::Error;
use stride_emi::eval::{
    emi_removal_map, make_mask, mean_image, rmse_map, snr_map, summarize, welch_t_test,
    MetricMaps, RealMap,
};
use stride_emi::fft::ifft2c;
use stride_emi::io;
use stride_emi::prep::{
    apply_prewhitening, denoise_sensors, estimate_noise_covariance, sos_combine,
    whitening_transform,
};
use stride_emi::report::{
    format_report_table, read_metrics_csv, write_metrics_csv, write_pgm16, write_ttest_csv,
    TTestRow,
};
use stride_emi::sim::{
    make_phantom, simulate_study, CouplingModel, EmiScenario, PhantomKind as SimPhantomKind,
};
use stride_emi::stride::{correct_acquisition, StrideConfig};

#[derive(Parser)]
#[command(
    name = "stride-emi",
    about = "EMI removal for multi-coil MR acquisitions: simulate, correct, evaluate, report",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a repeated phantom acquisition under an EMI scenario.
    Simulate(SimulateArgs),
    /// Run an EMI removal method over a dataset and save combined images.
    Correct(CorrectArgs),
    /// Compute metric maps and CSV summaries against a baseline dataset.
    Evaluate(EvaluateArgs),
    /// Print the method-by-scenario comparison table from metrics CSVs.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioKind {
    None,
    Square,
    White,
    Sweep,
    Tone,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PhantomKind {
    UniformDisc,
    ContrastDiscs,
    ResolutionDots,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "tone")]
    scenario: ScenarioKind,
    /// JSON file describing the scenario; overrides --scenario and the
    /// waveform flags.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    /// Matrix size N (N x N k-space).
    #[arg(long, default_value_t = 64)]
    matrix: usize,
    #[arg(long, default_value_t = 4)]
    coils: usize,
    #[arg(long, default_value_t = 2)]
    sensors: usize,
    #[arg(long, default_value_t = 8)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "uniform-disc")]
    phantom: PhantomKind,
    /// Interference amplitude; default scales the artifact to roughly ten
    /// times the phantom intensity std.
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long, default_value_t = 12.5e3)]
    carrier_offset: f64,
    #[arg(long, default_value_t = 10e3)]
    modulation_rate: f64,
    #[arg(long, default_value_t = 10e3)]
    sweep_span: f64,
    #[arg(long, default_value_t = 1.0)]
    sweep_rate: f64,
    /// Imaging-coil thermal noise std per complex component.
    #[arg(long, default_value_t = 0.0)]
    sigma_img: f64,
    /// Sensor thermal noise std per complex component.
    #[arg(long, default_value_t = 0.0)]
    sigma_emi: f64,
    /// Scale applied to every sensor coupling gain.
    #[arg(long, default_value_t = 1.0)]
    sensor_gain: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Stride,
    EditerA,
    EditerB,
    None,
}

impl Method {
    fn label(self) -> &'static str {
        match self {
            Method::Stride => "stride",
            Method::EditerA => "editer-a",
            Method::EditerB => "editer-b",
            Method::None => "none",
        }
    }
}

#[derive(Args)]
struct CorrectArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Adjacent sensor-image columns per sensor (STRIDE window).
    #[arg(long, default_value_t = 7)]
    dy: usize,
    /// EDITER readout shift window; defaults to the variant's value.
    #[arg(long)]
    dkx: Option<usize>,
    /// EDITER PE-line shift window; defaults to the variant's value.
    #[arg(long)]
    dky: Option<usize>,
    #[arg(long, default_value_t = 10)]
    max_clusters: usize,
    #[arg(long, default_value_t = 1e-10)]
    rcond: f64,
    #[arg(long)]
    prewhiten: bool,
    #[arg(long)]
    denoise_sensors: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Corrected dataset directories (one per method); repeatable.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    /// Baseline (no-EMI) dataset directory with combined images.
    #[arg(long)]
    baseline: PathBuf,
    /// Corrupted (method "none", no pre-whitening) dataset directory; needed
    /// for the EMI removal percentage.
    #[arg(long)]
    corrupted: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Mask threshold as a fraction of the baseline maximum.
    #[arg(long, default_value_t = 0.1)]
    mask_threshold: f64,
}

#[derive(Args)]
struct ReportArgs {
    /// metrics.csv files to merge into one table; repeatable.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) => 2,
        Error::BadMagic
        | Error::DimOverflow(_)
        | Error::Truncated
        | Error::UnsupportedLayout(_)
        | Error::ManifestMismatch(_)
        | Error::ShapeMismatch(_)
        | Error::Io(_)
        | Error::Json(_) => 3,
        Error::NonFinite(_) | Error::Numerical(_) => 4,
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Correct(args) => cmd_correct(args),
        Cmd::Evaluate(args) => cmd_evaluate(args),
        Cmd::Report(args) => cmd_report(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn build_scenario(args: &SimulateArgs, phantom_std: f64, mean_gain: f64) -> stride_emi::Result<EmiScenario> {
    if let Some(path) = &args.scenario_file {
        let text = std::fs::read_to_string(path)?;
        return Ok(serde_json::from_str(&text)?);
    }
    let amplitude = args
        .amplitude
        .unwrap_or_else(|| 10.0 * phantom_std / mean_gain.max(1e-12));
    Ok(match args.scenario {
        ScenarioKind::None => EmiScenario::None,
        ScenarioKind::Tone => EmiScenario::Tone {
            carrier_offset_hz: args.carrier_offset,
            amplitude,
        },
        ScenarioKind::Square => EmiScenario::SquareAm {
            carrier_offset_hz: args.carrier_offset,
            modulation_rate_hz: args.modulation_rate,
            amplitude,
        },
        ScenarioKind::White => EmiScenario::WhiteAm {
            carrier_offset_hz: args.carrier_offset,
            amplitude,
        },
        ScenarioKind::Sweep => EmiScenario::Sweep {
            carrier_offset_hz: args.carrier_offset,
            sweep_span_hz: args.sweep_span,
            sweep_rate_hz: args.sweep_rate,
            amplitude,
        },
    })
}

fn cmd_simulate(args: SimulateArgs) -> stride_emi::Result<()> {
    if args.matrix < 2 {
        return Err(Error::invalid("matrix size must be at least 2"));
    }
    let kind = match args.phantom {
        PhantomKind::UniformDisc => SimPhantomKind::UniformDisc,
        PhantomKind::ContrastDiscs => SimPhantomKind::ContrastDiscs,
        PhantomKind::ResolutionDots => SimPhantomKind::ResolutionDots,
    };
    let phantom = make_phantom(kind, args.matrix);
    let mut coupling = CouplingModel::synthetic(args.coils, args.sensors, args.matrix);
    coupling.sigma_img = args.sigma_img;
    coupling.sigma_emi = args.sigma_emi;
    for g in &mut coupling.sensor_gains {
        *g *= Complex64::new(args.sensor_gain, 0.0);
    }
    let mean_gain = coupling.coil_gains.iter().map(|g| g.norm()).sum::<f64>()
        / coupling.coil_gains.len().max(1) as f64;
    let scenario = build_scenario(&args, phantom.intensity_std(), mean_gain)?;

    let acq = simulate_study(&phantom, &scenario, args.repeats, &coupling, args.seed, &args.out)?;
    println!(
        "simulated {} repeats of {}x{} ({} coils + {} sensors), scenario {}, seed {} -> {}",
        acq.repeats(),
        acq.kx(),
        acq.ky(),
        acq.imaging_channels(),
        acq.sensor_channels(),
        scenario.label(),
        args.seed,
        args.out.display()
    );
    Ok(())
}

fn cmd_correct(args: CorrectArgs) -> stride_emi::Result<()> {
    let mut acq = io::load_dataset(&args.input)?;
    if !matches!(args.method, Method::None) && acq.sensor_channels() == 0 {
        return Err(Error::invalid(
            "the dataset has no EMI sensors; only --method none applies",
        ));
    }

    if args.denoise_sensors {
        acq = denoise_sensors(&acq)?;
    }
    if args.prewhiten {
        let scan_file = acq.meta.noise_scan.clone().ok_or_else(|| {
            Error::ManifestMismatch("dataset carries no noise-only scan for pre-whitening".into())
        })?;
        let scan = io::load_array(args.input.join(scan_file))?;
        let cov = estimate_noise_covariance(&scan);
        let transform = whitening_transform(&cov, cov.default_ridge())?;
        acq = apply_prewhitening(&acq, &transform)?;
    }

    let corrected = match args.method {
        Method::None => acq.transform_channels(Domain::Image, ifft2c)?,
        Method::Stride => {
            // sensor denoising already ran at the pipeline stage above
            let cfg = StrideConfig {
                delta_y: args.dy,
                pinv_rcond: args.rcond,
                sensor_denoise: false,
            };
            correct_acquisition(&acq, &cfg)?
        }
        Method::EditerA | Method::EditerB => {
            let mut cfg = if matches!(args.method, Method::EditerA) {
                EditerConfig::variant_a()
            } else {
                EditerConfig::variant_b()
            };
            if let Some(dkx) = args.dkx {
                cfg.delta_kx = dkx;
            }
            if let Some(dky) = args.dky {
                cfg.delta_ky = dky;
            }
            cfg.max_clusters = args.max_clusters;
            cfg.rcond = args.rcond;
            let ksp = correct_kspace(&acq, &cfg)?;
            ksp.transform_channels(Domain::Image, ifft2c)?
        }
    };

    let combined = combine_repeats(&corrected)?;
    let mut out_acq = corrected;
    out_acq.meta.method = Some(args.method.label().to_string());
    out_acq.meta.combined = true;
    out_acq.meta.noise_scan = None;
    std::fs::create_dir_all(&args.out)?;
    io::save_dataset(&args.out, &out_acq)?;
    io::save_combined_stack(&args.out, &combined)?;
    println!(
        "corrected {} repeats with {} -> {}",
        out_acq.repeats(),
        args.method.label(),
        args.out.display()
    );
    Ok(())
}

fn combine_repeats(acq: &MultiCoilAcquisition) -> stride_emi::Result<Vec<ComplexArray2D>> {
    (0..acq.repeats())
        .map(|r| {
            let coils: Vec<&ComplexArray2D> =
                (0..acq.imaging_channels()).map(|c| acq.imaging(r, c)).collect();
            sos_combine(&coils)
        })
        .collect()
}

fn load_stack(dir: &PathBuf) -> stride_emi::Result<(Vec<ComplexArray2D>, io::DatasetManifest)> {
    let manifest = io::load_manifest(dir)?;
    let stack = io::load_combined_stack(dir)?;
    Ok((stack, manifest))
}

fn cmd_evaluate(args: EvaluateArgs) -> stride_emi::Result<()> {
    let (baseline_stack, _) = load_stack(&args.baseline)?;
    let baseline_refs: Vec<&ComplexArray2D> = baseline_stack.iter().collect();
    let baseline_mean = mean_image(&baseline_refs)?;
    let mask = make_mask(&baseline_mean, args.mask_threshold);

    let corrupted_stack = match &args.corrupted {
        Some(dir) => Some(load_stack(dir)?.0),
        None => None,
    };

    std::fs::create_dir_all(&args.out)?;
    let mut summaries = Vec::new();
    let mut snr_distributions: Vec<(String, Vec<f64>)> = Vec::new();
    for dir in &args.inputs {
        let (stack, manifest) = load_stack(dir)?;
        let refs: Vec<&ComplexArray2D> = stack.iter().collect();
        let method = manifest.meta.method.clone().unwrap_or_else(|| {
            dir.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "unknown".into())
        });
        let scenario = if manifest.meta.scenario_label.is_empty() {
            "unknown".to_string()
        } else {
            manifest.meta.scenario_label.clone()
        };

        let snr = snr_map(&refs)?;
        let rmse = rmse_map(&refs, &baseline_mean)?;
        let removal = match &corrupted_stack {
            Some(corrupted) => {
                let corrupted_refs: Vec<&ComplexArray2D> = corrupted.iter().collect();
                emi_removal_map(&refs, &corrupted_refs)?
            }
            None => {
                let (rows, cols) = snr.shape();
                RealMap::new(rows, cols, vec![f64::NAN; rows * cols])?
            }
        };
        write_pgm16(args.out.join(format!("{method}_snr.pgm")), &snr)?;
        write_pgm16(args.out.join(format!("{method}_removal.pgm")), &removal)?;
        write_pgm16(args.out.join(format!("{method}_rmse.pgm")), &rmse)?;

        let maps = MetricMaps { snr, emi_removal_pct: removal, rmse, mask: mask.clone() };
        snr_distributions.push((method.clone(), maps.snr.masked_values(&mask)));
        summaries.push(summarize(&maps, &method, &scenario));
    }

    write_metrics_csv(args.out.join("metrics.csv"), &summaries)?;

    let mut ttest_rows = Vec::new();
    for i in 0..snr_distributions.len() {
        for j in i + 1..snr_distributions.len() {
            let (ma, da) = &snr_distributions[i];
            let (mb, db) = &snr_distributions[j];
            if da.len() >= 2 && db.len() >= 2 {
                ttest_rows.push(TTestRow {
                    metric: "snr".into(),
                    method_a: ma.clone(),
                    method_b: mb.clone(),
                    result: welch_t_test(da, db)?,
                });
            }
        }
    }
    write_ttest_csv(args.out.join("ttest.csv"), &ttest_rows)?;

    for s in &summaries {
        println!(
            "{} ({}) mean_snr {:.4} removal% {:.4} rmse {:.6}",
            s.method, s.scenario, s.mean_snr, s.mean_removal_pct, s.rmse_total
        );
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> stride_emi::Result<()> {
    let mut rows = Vec::new();
    for path in &args.inputs {
        rows.extend(read_metrics_csv(path)?);
    }
    print!("{}", format_report_table(&rows));
    Ok(())
}
