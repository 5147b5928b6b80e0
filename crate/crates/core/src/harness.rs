//! Deterministic Monte Carlo campaign engine: sweeps over sequence length,
//! noise variance, and estimation method, with per-trial seeding that makes
//! results independent of execution order and thread count.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{RadarError, Result};
use crate::estimate::{self, EstimatorConfig, Method, TargetEstimate};
use crate::model::{
    self, InterferenceModel, MovingClutterModel, SceneTruth, SequenceKind,
    StationaryInterferenceModel, TransmitSequence,
};
use crate::sampling::{self, NuPrior};
use crate::{C64, CVector};

/// Environment variable capping trial parallelism.
pub const THREADS_ENV: &str = "ONEBIT_RADAR_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Scenario {
    Stationary,
    Moving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ThresholdPolicy {
    /// `λ = E{α0} s~`: track the expected signal.
    Mean,
    /// Gaussian thresholds matching the received-signal statistics.
    Random,
    /// Fixed zero thresholds (classic one-bit sampling).
    Zero,
}

/// Meaning of the stationary clutter power `beta`.
///
/// With per-coefficient normalization the per-sample clutter power grows
/// linearly in N (all 2(N-1) adjacent cells contribute), which keeps the
/// post-filter SCIR flat in N; per-sample normalization holds the average
/// per-sample clutter power at `beta` so longer sequences genuinely improve
/// estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ClutterNormalization {
    /// `beta` is the variance of each adjacent-cell scattering coefficient.
    PerCoefficient,
    /// `beta` is the average per-sample clutter power; each coefficient gets
    /// variance `beta / (N - 1)`.
    PerSample,
}

/// Ground-truth specification: a fixed value or the keyword `"random"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaTruth {
    Fixed([f64; 2]),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NuTruth {
    Fixed(f64),
    Keyword(String),
}

/// Full description of one campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(alias = "Nlist")]
    pub n_list: Vec<usize>,
    pub noise_var_list: Vec<f64>,
    /// Clutter power: per-coefficient variance (stationary) or per-cell
    /// power (moving).
    pub beta: f64,
    /// How `beta` scales with N in the stationary scenario.
    pub clutter_normalization: ClutterNormalization,
    pub alpha_truth: AlphaTruth,
    pub nu_truth: NuTruth,
    /// Moving scenario: number of interfering range rings.
    #[serde(alias = "Nc")]
    pub nc: usize,
    /// Moving scenario: azimuth sectors per ring.
    #[serde(alias = "L")]
    pub sectors: usize,
    /// Moving scenario: width of the per-cell clutter Doppler interval.
    pub eps_d: f64,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub threshold_policy: ThresholdPolicy,
    /// Number of parallel one-bit comparators.
    #[serde(alias = "K")]
    pub k: usize,
    /// When set, sample with a p-bit ADC instead of one-bit comparators.
    pub p_bits: Option<u32>,
    pub sequence_kind: SequenceKind,
    pub sequence_seed: u64,
    /// Record wall-clock times; off by default so identical configs yield
    /// bitwise-identical CSVs.
    pub record_timing: bool,
    pub estimator: EstimatorConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Stationary,
            n_list: vec![10, 25, 50, 100],
            noise_var_list: vec![0.1],
            beta: 0.1,
            clutter_normalization: ClutterNormalization::PerCoefficient,
            alpha_truth: AlphaTruth::Fixed([0.5, 0.5]),
            nu_truth: NuTruth::Keyword("random".into()),
            nc: 2,
            sectors: 10,
            eps_d: 0.2,
            trials: 100,
            seed: 1234,
            methods: vec![Method::Proposed, Method::FullPrecision],
            threshold_policy: ThresholdPolicy::Mean,
            k: 1,
            p_bits: None,
            sequence_kind: SequenceKind::RandomPhase,
            sequence_seed: 7,
            record_timing: false,
            estimator: EstimatorConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(RadarError::Config("trials must be at least 1".into()));
        }
        if self.n_list.is_empty() || self.noise_var_list.is_empty() {
            return Err(RadarError::Config("nList and noiseVarList must be nonempty".into()));
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return Err(RadarError::Config("every listed N must be at least 2".into()));
        }
        if self.methods.is_empty() {
            return Err(RadarError::Config("methods must be nonempty".into()));
        }
        if self.k < 1 {
            return Err(RadarError::Config("comparator count k must be at least 1".into()));
        }
        if let AlphaTruth::Keyword(kw) = &self.alpha_truth {
            if kw != "random" {
                return Err(RadarError::Config(format!(
                    "alphaTruth must be [re, im] or \"random\", got \"{kw}\""
                )));
            }
        }
        if let NuTruth::Keyword(kw) = &self.nu_truth {
            if kw != "random" {
                return Err(RadarError::Config(format!(
                    "nuTruth must be a number or \"random\", got \"{kw}\""
                )));
            }
        }
        if self.scenario == Scenario::Moving && self.nu_truth == NuTruth::Fixed(0.5) {
            return Err(RadarError::Config("nuTruth must lie in [-0.5, 0.5)".into()));
        }
        Ok(())
    }
}

/// One completed (or failed) trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Trial index within its (N, noiseVar, method) cell.
    pub trial_id: usize,
    pub n: usize,
    pub noise_var: f64,
    pub method: Method,
    pub alpha_truth: C64,
    pub alpha_hat: C64,
    pub nu_truth: f64,
    pub nu_hat: f64,
    /// `|α0 - α̂0| / |α0|`; NaN for failed trials.
    pub norm_error: f64,
    /// `|ν - ν̂|`; NaN for failed trials.
    pub nu_error: f64,
    pub wall_time_ms: f64,
    /// Solver status, or `failed: <reason>`.
    pub status: String,
}

impl TrialRecord {
    pub fn is_failure(&self) -> bool {
        self.status.starts_with("failed")
    }
}

/// Aggregated statistics for one (N, noiseVar, method) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    pub n: usize,
    pub noise_var: f64,
    pub method: Method,
    pub trials: usize,
    pub failures: usize,
    pub norm_error_mean: f64,
    pub norm_error_median: f64,
    pub norm_error_p10: f64,
    pub norm_error_p90: f64,
    pub nu_error_mean: f64,
    pub nu_error_median: f64,
    pub nu_error_p10: f64,
    pub nu_error_p90: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn method_tag(m: Method) -> u64 {
    match m {
        Method::Proposed => 1,
        Method::Bussgang => 2,
        Method::FullPrecision => 3,
    }
}

/// Per-trial seed folding every sweep coordinate through a splittable mixer.
pub fn trial_seed(seed: u64, n: usize, noise_var: f64, method: Method, trial: usize) -> u64 {
    let mut h = splitmix64(seed);
    for v in [
        n as u64,
        noise_var.to_bits(),
        method_tag(method),
        trial as u64,
    ] {
        h = splitmix64(h ^ v);
    }
    h
}

/// Uniform draw on the complex annulus `0.5 <= |α0| <= 1.5` (uniform in
/// area), uniform phase.
fn random_alpha<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let r = (0.25 + rng.gen::<f64>() * 2.0).sqrt(); // |α|^2 uniform on [0.25, 2.25]
    let phase = rng.gen::<f64>() * std::f64::consts::TAU;
    C64::from_polar(r, phase)
}

struct TrialSetup<'a> {
    cfg: &'a ExperimentConfig,
    n: usize,
    noise_var: f64,
    method: Method,
    trial: usize,
}

fn run_trial(setup: &TrialSetup<'_>) -> TrialRecord {
    let cfg = setup.cfg;
    let started = Instant::now();
    let outcome = run_trial_inner(setup);
    let elapsed = if cfg.record_timing {
        started.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    match outcome {
        Ok((truth, est, status)) => {
            let norm_error = (truth.alpha0 - est.alpha_hat).norm() / truth.alpha0.norm();
            TrialRecord {
                trial_id: setup.trial,
                n: setup.n,
                noise_var: setup.noise_var,
                method: setup.method,
                alpha_truth: truth.alpha0,
                alpha_hat: est.alpha_hat,
                nu_truth: truth.nu,
                nu_hat: est.nu_hat,
                norm_error,
                nu_error: (truth.nu - est.nu_hat).abs(),
                wall_time_ms: elapsed,
                status,
            }
        }
        Err(e) => TrialRecord {
            trial_id: setup.trial,
            n: setup.n,
            noise_var: setup.noise_var,
            method: setup.method,
            alpha_truth: C64::new(f64::NAN, f64::NAN),
            alpha_hat: C64::new(f64::NAN, f64::NAN),
            nu_truth: f64::NAN,
            nu_hat: f64::NAN,
            norm_error: f64::NAN,
            nu_error: f64::NAN,
            wall_time_ms: elapsed,
            status: format!("failed: {e}"),
        },
    }
}

/// Everything drawn for one trial before estimation runs.
pub struct TrialData {
    pub sequence: TransmitSequence,
    pub truth: SceneTruth,
    pub interference: InterferenceModel,
    pub covariance: crate::CMatrix,
    pub scene: model::SceneRealization,
    pub observation: sampling::QuantizedObservation,
}

/// Draws the scene and quantized observation for one sweep coordinate,
/// exactly as the campaign engine does.
pub fn prepare_trial(
    cfg: &ExperimentConfig,
    n: usize,
    noise_var: f64,
    method: Method,
    trial: usize,
) -> Result<TrialData> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, n, noise_var, method, trial));
    let s = TransmitSequence::generate(n, cfg.sequence_kind, cfg.sequence_seed)?;

    // Ground truth.
    let alpha0 = match &cfg.alpha_truth {
        AlphaTruth::Fixed([re, im]) => C64::new(*re, *im),
        AlphaTruth::Keyword(_) => random_alpha(&mut rng),
    };
    let nu = if cfg.scenario == Scenario::Stationary {
        0.0
    } else {
        match &cfg.nu_truth {
            NuTruth::Fixed(v) => *v,
            NuTruth::Keyword(_) => rng.gen_range(-0.4..0.4),
        }
    };
    let truth = SceneTruth { alpha0, nu };

    let beta = match cfg.clutter_normalization {
        ClutterNormalization::PerCoefficient => cfg.beta,
        ClutterNormalization::PerSample => cfg.beta / (n - 1) as f64,
    };
    let interference = match cfg.scenario {
        Scenario::Stationary => InterferenceModel::Stationary(StationaryInterferenceModel::white(
            beta,
            noise_var,
            n,
        )?),
        Scenario::Moving => {
            let cell_power = match cfg.clutter_normalization {
                ClutterNormalization::PerCoefficient => cfg.beta,
                // Split beta across cells so the per-sample clutter power is beta.
                ClutterNormalization::PerSample => cfg.beta / (cfg.nc * cfg.sectors) as f64,
            };
            InterferenceModel::Moving(MovingClutterModel::uniform(
                cfg.nc,
                cfg.sectors,
                cell_power,
                cfg.eps_d,
                noise_var,
                n,
            )?)
        }
    };
    let scene = model::synthesize_scene_with_rng(&s, truth, &interference, &mut rng)?;
    let r = interference.covariance(&s)?;

    // Threshold priors: the design principle is that λ should be distributed
    // like y, so the power term is the prior *variance* of α0. A fixed truth
    // is known to the designer (variance zero); random truths use their
    // generating distribution.
    let (alpha_prior_mean, alpha_prior_power) = match &cfg.alpha_truth {
        AlphaTruth::Fixed([re, im]) => (C64::new(*re, *im), 0.0),
        // E{|α0|^2} on the annulus 0.5 <= |α0| <= 1.5 (uniform in area).
        AlphaTruth::Keyword(_) => (C64::new(0.0, 0.0), 1.25),
    };
    let nu_prior = match (cfg.scenario, &cfg.nu_truth) {
        (Scenario::Stationary, _) => None,
        (Scenario::Moving, NuTruth::Fixed(v)) => Some(NuPrior::Point(*v)),
        (Scenario::Moving, NuTruth::Keyword(_)) => Some(NuPrior::Uniform { lo: -0.4, hi: 0.4 }),
    };

    let expected_signal = {
        let p = nu_prior
            .as_ref()
            .map(|prior| prior.expected_p(n))
            .unwrap_or_else(|| CVector::from_element(n, C64::new(1.0, 0.0)));
        CVector::from_fn(n, |i, _| alpha_prior_mean * s.samples()[i] * p[i])
    };

    let obs = if let Some(p) = cfg.p_bits {
        let var: Vec<f64> = (0..n)
            .map(|i| alpha_prior_power * s.samples()[i].norm_sqr() + r[(i, i)].re)
            .collect();
        let bank = sampling::design_p_bit_uniform(p, &expected_signal, &var)?;
        sampling::quantize_p_bit(&scene.y, &bank)?
    } else {
        match cfg.threshold_policy {
            ThresholdPolicy::Zero => {
                sampling::quantize_one_bit(&scene.y, &CVector::zeros(n))?
            }
            ThresholdPolicy::Mean => {
                if cfg.k > 1 {
                    let banks = vec![expected_signal.clone(); cfg.k];
                    sampling::quantize_parallel(&scene.y, &banks)?
                } else {
                    sampling::quantize_one_bit(&scene.y, &expected_signal)?
                }
            }
            ThresholdPolicy::Random => {
                let lambdas = sampling::design_threshold_random(
                    &s,
                    alpha_prior_mean,
                    alpha_prior_power,
                    &r,
                    cfg.k,
                    nu_prior.as_ref(),
                    rng.gen(),
                )?;
                if cfg.k > 1 {
                    sampling::quantize_parallel(&scene.y, &lambdas)?
                } else {
                    sampling::quantize_one_bit(&scene.y, &lambdas[0])?
                }
            }
        }
    };

    Ok(TrialData {
        sequence: s,
        truth,
        interference,
        covariance: r,
        scene,
        observation: obs,
    })
}

/// Runs the configured estimator on prepared trial data.
pub fn estimate_trial(
    cfg: &ExperimentConfig,
    method: Method,
    data: &TrialData,
) -> Result<TargetEstimate> {
    let s = &data.sequence;
    match method {
        Method::FullPrecision => {
            estimate::estimate_full_precision(s, &data.interference, &data.scene.y, &cfg.estimator)
        }
        Method::Proposed => match &data.interference {
            InterferenceModel::Stationary(m) => {
                estimate::estimate_stationary(s, m, &data.observation, &cfg.estimator)
            }
            InterferenceModel::Moving(m) => {
                estimate::estimate_moving(s, m, &data.observation, &cfg.estimator)
            }
        },
        Method::Bussgang => {
            let lambda = data.observation.thresholds.mean_threshold();
            estimate::estimate_bussgang(
                s,
                &data.covariance,
                &data.observation,
                &lambda,
                cfg.scenario == Scenario::Moving,
                &cfg.estimator,
            )
        }
    }
}

fn run_trial_inner(setup: &TrialSetup<'_>) -> Result<(SceneTruth, TargetEstimate, String)> {
    let data = prepare_trial(setup.cfg, setup.n, setup.noise_var, setup.method, setup.trial)?;
    let est = estimate_trial(setup.cfg, setup.method, &data)?;
    let status = serde_plain_status(est.solver_status);
    Ok((data.truth, est, status))
}

fn serde_plain_status(status: crate::qpsolve::SolveStatus) -> String {
    match status {
        crate::qpsolve::SolveStatus::Optimal => "optimal".into(),
        crate::qpsolve::SolveStatus::MaxIter => "maxIter".into(),
        crate::qpsolve::SolveStatus::InfeasibleInput => "infeasibleInput".into(),
    }
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&k| k > 0)
}

/// Runs every (N, noiseVar, method, trial) combination. Trials run in
/// parallel with per-trial seeds; records come back ordered by sweep
/// coordinates and trial id, so output is independent of thread count.
pub fn run_campaign(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let mut setups = Vec::new();
    for &n in &cfg.n_list {
        for &noise_var in &cfg.noise_var_list {
            for &method in &cfg.methods {
                for trial in 0..cfg.trials {
                    setups.push(TrialSetup {
                        cfg,
                        n,
                        noise_var,
                        method,
                        trial,
                    });
                }
            }
        }
    }
    let work = || setups.par_iter().map(run_trial).collect::<Vec<_>>();
    let records = match thread_cap() {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| RadarError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(records)
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let idx = ((p / 100.0 * n as f64).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}

/// Groups records by (N, noiseVar, method) and aggregates error statistics.
/// Failed trials count toward `failures` and are excluded from the stats.
pub fn summarize(records: &[TrialRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(RadarError::InvalidArgument("no records to summarize".into()));
    }
    let mut keys: Vec<(usize, u64, Method)> = Vec::new();
    for r in records {
        let key = (r.n, r.noise_var.to_bits(), r.method);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut rows = Vec::with_capacity(keys.len());
    for (n, nv_bits, method) in keys {
        let noise_var = f64::from_bits(nv_bits);
        let cell: Vec<&TrialRecord> = records
            .iter()
            .filter(|r| r.n == n && r.noise_var.to_bits() == nv_bits && r.method == method)
            .collect();
        let failures = cell.iter().filter(|r| r.is_failure()).count();
        let mut norm_errors: Vec<f64> = cell
            .iter()
            .filter(|r| !r.is_failure())
            .map(|r| r.norm_error)
            .collect();
        let mut nu_errors: Vec<f64> = cell
            .iter()
            .filter(|r| !r.is_failure())
            .map(|r| r.nu_error)
            .collect();
        norm_errors.sort_by(f64::total_cmp);
        nu_errors.sort_by(f64::total_cmp);
        rows.push(SummaryRow {
            n,
            noise_var,
            method,
            trials: cell.len(),
            failures,
            norm_error_mean: mean(&norm_errors),
            norm_error_median: median(&norm_errors),
            norm_error_p10: percentile(&norm_errors, 10.0),
            norm_error_p90: percentile(&norm_errors, 90.0),
            nu_error_mean: mean(&nu_errors),
            nu_error_median: median(&nu_errors),
            nu_error_p10: percentile(&nu_errors, 10.0),
            nu_error_p90: percentile(&nu_errors, 90.0),
        });
    }
    Ok(rows)
}

/// Exact CSV header of the trial-record stream.
pub const RECORD_CSV_HEADER: &str = "trialId,N,noiseVar,method,alphaTruthRe,alphaTruthIm,alphaHatRe,alphaHatIm,nuTruth,nuHat,normError,nuError,wallTimeMs,status";

/// Renders records as CSV, LF line endings, exact header above.
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(RECORD_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.trial_id,
            r.n,
            r.noise_var,
            r.method.name(),
            r.alpha_truth.re,
            r.alpha_truth.im,
            r.alpha_hat.re,
            r.alpha_hat.im,
            r.nu_truth,
            r.nu_hat,
            r.norm_error,
            r.nu_error,
            r.wall_time_ms,
            r.status
        ));
    }
    out
}

pub const SUMMARY_CSV_HEADER: &str = "N,noiseVar,method,trials,failures,normErrorMean,normErrorMedian,normErrorP10,normErrorP90,nuErrorMean,nuErrorMedian,nuErrorP10,nuErrorP90";

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.noise_var,
            r.method.name(),
            r.trials,
            r.failures,
            r.norm_error_mean,
            r.norm_error_median,
            r.norm_error_p10,
            r.norm_error_p90,
            r.nu_error_mean,
            r.nu_error_median,
            r.nu_error_p10,
            r.nu_error_p90
        ));
    }
    out
}

/// Fixed-width table of the summary for terminal output.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:>6} {:>10} {:>14} {:>7} {:>5} {:>12} {:>12} {:>12}\n",
        "N", "noiseVar", "method", "trials", "fail", "errMean", "errMedian", "nuErrMedian"
    );
    for r in rows {
        out.push_str(&format!(
            "{:>6} {:>10} {:>14} {:>7} {:>5} {:>12.4e} {:>12.4e} {:>12.4e}\n",
            r.n,
            r.noise_var,
            r.method.name(),
            r.trials,
            r.failures,
            r.norm_error_mean,
            r.norm_error_median,
            r.nu_error_median
        ));
    }
    out
}
