//! Command-line front end: `simulate`, `estimate`, `sweep`, and `selftest`
//! subcommands over the campaign engine and estimators.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{RadarError, Result};
use crate::estimate::{self, Method};
use crate::harness::{self, ExperimentConfig, Scenario, TrialRecord};
use crate::model::InterferenceModel;
use crate::sampling::{QuantizedObservation, ThresholdBank};
use crate::{config, io, CVector};

#[derive(Debug, Parser)]
#[command(
    name = "onebit-radar",
    about = "Radar parameter estimation from one-bit samples with time-varying thresholds",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw one scene and its quantized observation, writing them to files.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override a config value, e.g. --set trials=10 or --set estimator.maxCycles=5
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
        /// Print the effective config as JSON and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Run one estimator on observation files.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// proposed, bussgang, or fullPrecision
        #[arg(long)]
        method: String,
        /// Received-signal file ("re im" per line); required for fullPrecision.
        #[arg(long)]
        y: Option<PathBuf>,
        /// Comparator-sign file; required for proposed and bussgang.
        #[arg(long)]
        signs: Option<PathBuf>,
        /// Threshold-bank file; required for proposed and bussgang.
        #[arg(long)]
        thresholds: Option<PathBuf>,
        #[arg(long)]
        print_config: bool,
    },
    /// Run the full Monte Carlo campaign and write record/summary CSVs.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
        #[arg(long)]
        print_config: bool,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

/// Parses `argv` and runs the selected subcommand.
/// Exit codes: 0 success, 1 usage error, 2 numerical failure.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, everything else is a
            // usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &RadarError) -> i32 {
    match e {
        RadarError::Usage(_)
        | RadarError::Config(_)
        | RadarError::InvalidArgument(_)
        | RadarError::Io(_) => 1,
        RadarError::Numerical(_) | RadarError::DegenerateFilter | RadarError::Infeasible(_) => 2,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            set,
            output_dir,
            print_config,
        } => {
            let cfg = config::load(&config, &set)?;
            if print_config {
                print!("{}", config::to_pretty_json(&cfg));
                return Ok(());
            }
            simulate(&cfg, &output_dir)
        }
        Command::Estimate {
            config,
            set,
            method,
            y,
            signs,
            thresholds,
            print_config,
        } => {
            let cfg = config::load(&config, &set)?;
            if print_config {
                print!("{}", config::to_pretty_json(&cfg));
                return Ok(());
            }
            let method: Method = method.parse()?;
            run_estimate(&cfg, method, y.as_deref(), signs.as_deref(), thresholds.as_deref())
        }
        Command::Sweep {
            config,
            set,
            output_dir,
            print_config,
        } => {
            let cfg = config::load(&config, &set)?;
            if print_config {
                print!("{}", config::to_pretty_json(&cfg));
                return Ok(());
            }
            sweep(&cfg, &output_dir)
        }
        Command::Selftest => selftest(),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// `simulate`: one scene at the first (N, noiseVar) coordinate, written as
/// y.txt, thresholds.txt, signs.txt, and truth.json.
fn simulate(cfg: &ExperimentConfig, output_dir: &Path) -> Result<()> {
    cfg.validate()?;
    ensure_dir(output_dir)?;
    let n = cfg.n_list[0];
    let noise_var = cfg.noise_var_list[0];
    let data = harness::prepare_trial(cfg, n, noise_var, Method::Proposed, 0)?;

    io::write_signal(&output_dir.join("y.txt"), &data.scene.y)?;
    let banks: Vec<CVector> = match &data.observation.thresholds {
        ThresholdBank::Single(v) => vec![v.clone()],
        ThresholdBank::Parallel(banks) => banks.clone(),
        ThresholdBank::PBit { .. } => vec![data.observation.thresholds.mean_threshold()],
    };
    io::write_banks(&output_dir.join("thresholds.txt"), &banks)?;
    io::write_signs(&output_dir.join("signs.txt"), &data.observation.channels)?;
    let truth = serde_json::json!({
        "alpha0": [data.truth.alpha0.re, data.truth.alpha0.im],
        "nu": data.truth.nu,
    });
    std::fs::write(
        output_dir.join("truth.json"),
        format!("{}\n", serde_json::to_string_pretty(&truth).expect("serializes")),
    )?;
    println!(
        "simulated N={n} noiseVar={noise_var} scenario={:?} -> {}",
        cfg.scenario,
        output_dir.display()
    );
    Ok(())
}

/// `estimate`: one estimator invocation on files; prints the estimate as a
/// JSON record.
fn run_estimate(
    cfg: &ExperimentConfig,
    method: Method,
    y: Option<&Path>,
    signs: Option<&Path>,
    thresholds: Option<&Path>,
) -> Result<()> {
    let est = match method {
        Method::FullPrecision => {
            let y_path = y.ok_or_else(|| {
                RadarError::Usage("fullPrecision estimation needs --y <file>".into())
            })?;
            let y = io::read_signal(y_path)?;
            let interference = build_interference(cfg, y.len())?;
            estimate::estimate_full_precision(
                &crate::model::TransmitSequence::generate(
                    y.len(),
                    cfg.sequence_kind,
                    cfg.sequence_seed,
                )?,
                &interference,
                &y,
                &cfg.estimator,
            )?
        }
        Method::Proposed | Method::Bussgang => {
            let signs_path = signs.ok_or_else(|| {
                RadarError::Usage("one-bit estimation needs --signs <file>".into())
            })?;
            let thresh_path = thresholds.ok_or_else(|| {
                RadarError::Usage("one-bit estimation needs --thresholds <file>".into())
            })?;
            let channels = io::read_signs(signs_path)?;
            let banks = io::read_banks(thresh_path)?;
            if banks.len() != channels.len() {
                return Err(RadarError::InvalidArgument(format!(
                    "{} threshold banks but {} sign channels",
                    banks.len(),
                    channels.len()
                )));
            }
            let n = banks[0].len();
            if channels.iter().any(|c| c.gamma_r.len() != n) {
                return Err(RadarError::InvalidArgument(
                    "sign channels and thresholds disagree on length".into(),
                ));
            }
            let thresholds = if banks.len() == 1 {
                ThresholdBank::Single(banks.into_iter().next().expect("one bank"))
            } else {
                ThresholdBank::Parallel(banks)
            };
            let obs = QuantizedObservation {
                channels,
                buckets: None,
                thresholds,
            };
            let s =
                crate::model::TransmitSequence::generate(n, cfg.sequence_kind, cfg.sequence_seed)?;
            let interference = build_interference(cfg, n)?;
            match (method, &interference) {
                (Method::Proposed, InterferenceModel::Stationary(m)) => {
                    estimate::estimate_stationary(&s, m, &obs, &cfg.estimator)?
                }
                (Method::Proposed, InterferenceModel::Moving(m)) => {
                    estimate::estimate_moving(&s, m, &obs, &cfg.estimator)?
                }
                (Method::Bussgang, _) => {
                    let r = interference.covariance(&s)?;
                    let lambda = obs.thresholds.mean_threshold();
                    estimate::estimate_bussgang(
                        &s,
                        &r,
                        &obs,
                        &lambda,
                        cfg.scenario == Scenario::Moving,
                        &cfg.estimator,
                    )?
                }
                _ => unreachable!(),
            }
        }
    };
    println!(
        "{}",
        serde_json::to_string(&est.record()).expect("estimate serializes")
    );
    Ok(())
}

fn build_interference(cfg: &ExperimentConfig, n: usize) -> Result<InterferenceModel> {
    let noise_var = *cfg.noise_var_list.first().ok_or_else(|| {
        RadarError::Config("noiseVarList must be nonempty".into())
    })?;
    Ok(match cfg.scenario {
        Scenario::Stationary => InterferenceModel::Stationary(
            crate::model::StationaryInterferenceModel::white(cfg.beta, noise_var, n)?,
        ),
        Scenario::Moving => InterferenceModel::Moving(crate::model::MovingClutterModel::uniform(
            cfg.nc,
            cfg.sectors,
            cfg.beta,
            cfg.eps_d,
            noise_var,
            n,
        )?),
    })
}

/// `sweep`: full campaign, records.csv + summary.csv + plot data in the
/// output directory, summary table on stdout.
fn sweep(cfg: &ExperimentConfig, output_dir: &Path) -> Result<()> {
    ensure_dir(output_dir)?;
    let records = harness::run_campaign(cfg)?;
    let summary = harness::summarize(&records)?;
    std::fs::write(output_dir.join("records.csv"), harness::records_to_csv(&records))?;
    std::fs::write(output_dir.join("summary.csv"), harness::summary_to_csv(&summary))?;
    emit_plot_data(&records, &summary, output_dir)?;
    print!("{}", harness::summary_table(&summary));
    Ok(())
}

/// Plot-ready views of a campaign: error-vs-N and error-vs-noise curves per
/// method, and a complex-plane scatter of truth and estimates.
pub fn emit_plot_data(
    records: &[TrialRecord],
    summary: &[harness::SummaryRow],
    output_dir: &Path,
) -> Result<()> {
    ensure_dir(output_dir)?;
    let mut by_n = String::from("method,N,noiseVar,normErrorMedian,normErrorMean\n");
    let mut by_noise = String::from("method,noiseVar,N,normErrorMedian,normErrorMean\n");
    for row in summary {
        by_n.push_str(&format!(
            "{},{},{},{},{}\n",
            row.method.name(),
            row.n,
            row.noise_var,
            row.norm_error_median,
            row.norm_error_mean
        ));
        by_noise.push_str(&format!(
            "{},{},{},{},{}\n",
            row.method.name(),
            row.noise_var,
            row.n,
            row.norm_error_median,
            row.norm_error_mean
        ));
    }
    std::fs::write(output_dir.join("error_vs_n.csv"), by_n)?;
    std::fs::write(output_dir.join("error_vs_noise.csv"), by_noise)?;

    let mut scatter = String::from("method,trialId,re,im\n");
    for r in records.iter().filter(|r| !r.is_failure()) {
        scatter.push_str(&format!(
            "truth,{},{},{}\n",
            r.trial_id, r.alpha_truth.re, r.alpha_truth.im
        ));
        scatter.push_str(&format!(
            "{},{},{},{}\n",
            r.method.name(),
            r.trial_id,
            r.alpha_hat.re,
            r.alpha_hat.im
        ));
    }
    std::fs::write(output_dir.join("scatter.csv"), scatter)?;
    Ok(())
}

/// Built-in invariant checks covering each module; any failure maps to a
/// nonzero exit.
fn selftest() -> Result<()> {
    use crate::linalg::CovarianceFactor;
    use crate::model::{SequenceKind, StationaryInterferenceModel, TransmitSequence};
    use crate::{C64, CMatrix};

    let check = |name: &str, ok: bool| -> Result<()> {
        if ok {
            println!("selftest: {name}: ok");
            Ok(())
        } else {
            Err(RadarError::Numerical(format!("selftest failed: {name}")))
        }
    };

    // Hand-expanded stationary covariance: N=2, s=[1,1], beta=0.1,
    // Gamma=0.1 I gives 0.2 I.
    let s = TransmitSequence::new(CVector::from_element(2, C64::new(1.0, 0.0)))?;
    let m = StationaryInterferenceModel::white(0.1, 0.1, 2)?;
    let r = crate::model::stationary_covariance(&s, &m)?;
    let expected = CMatrix::identity(2, 2) * C64::new(0.2, 0.0);
    check("stationary covariance N=2", (r - expected).norm() < 1e-12)?;

    // One-bit sign convention and unit-modulus samples.
    let obs = crate::sampling::quantize_one_bit(&CVector::zeros(3), &CVector::zeros(3))?;
    let gamma = obs.gamma().expect("one-bit observation has a sign vector");
    check(
        "sign convention sgn(0) = +1",
        gamma.iter().all(|g| (g.norm() - 1.0).abs() < 1e-12 && g.re > 0.0 && g.im > 0.0),
    )?;

    // MMF against the identity covariance.
    let s = TransmitSequence::generate(6, SequenceKind::RandomPhase, 3)?;
    let white = StationaryInterferenceModel::white(0.0, 1.0, 6)?;
    let factor = CovarianceFactor::new(&crate::model::stationary_covariance(&s, &white)?)?;
    let w = estimate::mmf_filter(s.samples(), &factor)?.w;
    check("MMF identity covariance", (&w - s.samples()).norm() < 1e-9)?;

    // A small recovery QP solves to KKT tolerance.
    let m = StationaryInterferenceModel::white(0.1, 0.1, 6)?;
    let r = crate::model::stationary_covariance(&s, &m)?;
    let factor = CovarianceFactor::new(&r)?;
    let w = estimate::mmf_filter(s.samples(), &factor)?.w;
    let alpha = C64::new(0.5, 0.5);
    let y = s.samples() * alpha;
    let lambda = s.samples() * (alpha * 0.9);
    let obs = crate::sampling::quantize_one_bit(&y, &lambda)?;
    let qp = crate::qpsolve::build_recovery_qp(&s, &w, &factor, &obs, None)?;
    let sol = crate::qpsolve::solve(&qp, 1e-8, 2000);
    check(
        "recovery QP reaches KKT tolerance",
        sol.status == crate::qpsolve::SolveStatus::Optimal
            && crate::qpsolve::kkt_check(&qp, &sol.x)? <= 1e-8,
    )?;

    // Campaign determinism on a tiny sweep.
    let cfg = ExperimentConfig {
        n_list: vec![6],
        trials: 2,
        methods: vec![Method::Proposed, Method::FullPrecision],
        ..ExperimentConfig::default()
    };
    let a = harness::records_to_csv(&harness::run_campaign(&cfg)?);
    let b = harness::records_to_csv(&harness::run_campaign(&cfg)?);
    check("campaign determinism", a == b)?;

    // Cyclic moving-target objective is nonincreasing.
    let s = TransmitSequence::generate(12, SequenceKind::RandomPhase, 5)?;
    let m = crate::model::MovingClutterModel::uniform(2, 4, 0.1, 0.2, 0.1, 12)?;
    let im = InterferenceModel::Moving(m.clone());
    let scene = crate::model::synthesize_scene(
        &s,
        crate::model::SceneTruth {
            alpha0: C64::new(0.5, 0.5),
            nu: 0.15,
        },
        &im,
        11,
    )?;
    let r = im.covariance(&s)?;
    let lambdas = crate::sampling::design_threshold_random(
        &s,
        C64::new(0.0, 0.0),
        1.0,
        &r,
        1,
        Some(&crate::sampling::NuPrior::Uniform { lo: -0.4, hi: 0.4 }),
        12,
    )?;
    let obs = crate::sampling::quantize_one_bit(&scene.y, &lambdas[0])?;
    let (_, trace) = estimate::estimate_moving_traced(&s, &m, &obs, &Default::default())?;
    check(
        "cyclic objective nonincreasing",
        trace.windows(2).all(|w| w[1] <= w[0] + 1e-10),
    )?;

    println!("selftest: all checks passed");
    Ok(())
}
