//! One-bit, multi-comparator, and p-bit quantization against time-varying
//! thresholds, plus the threshold-vector designs used by the estimators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{RadarError, Result};
use crate::linalg::CovarianceFactor;
use crate::model::{self, TransmitSequence};
use crate::{C64, CMatrix, CVector};

/// Sign convention of the comparators: `sgn(0) = +1`.
#[inline]
pub fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Threshold configuration of the sampler.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdBank {
    /// One comparator with one complex threshold vector.
    Single(CVector),
    /// `K` comparators in parallel with distinct threshold vectors.
    Parallel(Vec<CVector>),
    /// p-bit ADC: per-sample sorted interior levels for the real and
    /// imaginary channels (the `-inf` / `+inf` sentinels are implicit).
    PBit {
        levels_re: Vec<Vec<f64>>,
        levels_im: Vec<Vec<f64>>,
    },
}

impl ThresholdBank {
    pub fn validate(&self) -> Result<()> {
        match self {
            ThresholdBank::Single(_) => Ok(()),
            ThresholdBank::Parallel(banks) => {
                if banks.is_empty() {
                    return Err(RadarError::InvalidArgument(
                        "parallel bank needs at least one threshold vector".into(),
                    ));
                }
                let n = banks[0].len();
                if banks.iter().any(|b| b.len() != n) {
                    return Err(RadarError::InvalidArgument(
                        "parallel threshold vectors must share a length".into(),
                    ));
                }
                Ok(())
            }
            ThresholdBank::PBit {
                levels_re,
                levels_im,
            } => {
                if levels_re.len() != levels_im.len() {
                    return Err(RadarError::InvalidArgument(
                        "p-bit banks must cover both channels per sample".into(),
                    ));
                }
                for levels in levels_re.iter().chain(levels_im) {
                    if levels.is_empty() {
                        return Err(RadarError::InvalidArgument(
                            "p-bit sample needs at least one interior level".into(),
                        ));
                    }
                    if levels.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(RadarError::InvalidArgument(
                            "p-bit levels must be strictly increasing".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ThresholdBank::Single(v) => v.len(),
            ThresholdBank::Parallel(banks) => banks.first().map_or(0, |b| b.len()),
            ThresholdBank::PBit { levels_re, .. } => levels_re.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of parallel comparators (1 for single and p-bit banks).
    pub fn comparators(&self) -> usize {
        match self {
            ThresholdBank::Parallel(banks) => banks.len(),
            _ => 1,
        }
    }

    /// Mean of the comparator threshold vectors; for p-bit banks, the
    /// midpoint of the finite level range per sample.
    pub fn mean_threshold(&self) -> CVector {
        match self {
            ThresholdBank::Single(v) => v.clone(),
            ThresholdBank::Parallel(banks) => {
                let n = self.len();
                let mut acc = CVector::zeros(n);
                for b in banks {
                    acc += b;
                }
                acc / C64::new(banks.len() as f64, 0.0)
            }
            ThresholdBank::PBit {
                levels_re,
                levels_im,
            } => CVector::from_fn(self.len(), |i, _| {
                let mid = |levels: &Vec<f64>| (levels[0] + levels[levels.len() - 1]) / 2.0;
                C64::new(mid(&levels_re[i]), mid(&levels_im[i]))
            }),
        }
    }
}

/// Sign outputs of one comparator, both channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneBitChannel {
    pub gamma_r: Vec<i8>,
    pub gamma_i: Vec<i8>,
}

/// Interval indices produced by a p-bit ADC, per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PBitBuckets {
    pub re: Vec<usize>,
    pub im: Vec<usize>,
}

/// The quantizer output together with the thresholds that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedObservation {
    pub channels: Vec<OneBitChannel>,
    pub buckets: Option<PBitBuckets>,
    pub thresholds: ThresholdBank,
}

impl QuantizedObservation {
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `gamma = (gamma_r + j gamma_i) / sqrt(2)` of the first comparator.
    /// `None` for p-bit observations.
    pub fn gamma(&self) -> Option<CVector> {
        let ch = self.channels.first()?;
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        Some(CVector::from_fn(ch.gamma_r.len(), |i, _| {
            C64::new(ch.gamma_r[i] as f64 * scale, ch.gamma_i[i] as f64 * scale)
        }))
    }

    /// Diagonal of `Omega_r = Diag(gamma_r)` for comparator `k`.
    pub fn omega_r(&self, k: usize) -> Vec<f64> {
        self.channels[k].gamma_r.iter().map(|&s| s as f64).collect()
    }

    pub fn omega_i(&self, k: usize) -> Vec<f64> {
        self.channels[k].gamma_i.iter().map(|&s| s as f64).collect()
    }
}

fn sign_channel(y: &CVector, lambda: &CVector) -> OneBitChannel {
    let n = y.len();
    let mut gamma_r = Vec::with_capacity(n);
    let mut gamma_i = Vec::with_capacity(n);
    for i in 0..n {
        let d = y[i] - lambda[i];
        gamma_r.push(sign(d.re));
        gamma_i.push(sign(d.im));
    }
    OneBitChannel { gamma_r, gamma_i }
}

/// One-bit sampling of both channels against a single threshold vector.
pub fn quantize_one_bit(y: &CVector, lambda: &CVector) -> Result<QuantizedObservation> {
    if y.len() != lambda.len() {
        return Err(RadarError::InvalidArgument(format!(
            "signal length {} does not match threshold length {}",
            y.len(),
            lambda.len()
        )));
    }
    Ok(QuantizedObservation {
        channels: vec![sign_channel(y, lambda)],
        buckets: None,
        thresholds: ThresholdBank::Single(lambda.clone()),
    })
}

/// One-bit sampling through `K` parallel comparators.
pub fn quantize_parallel(y: &CVector, lambdas: &[CVector]) -> Result<QuantizedObservation> {
    let bank = ThresholdBank::Parallel(lambdas.to_vec());
    bank.validate()?;
    if bank.len() != y.len() {
        return Err(RadarError::InvalidArgument(
            "signal and threshold lengths differ".into(),
        ));
    }
    Ok(QuantizedObservation {
        channels: lambdas.iter().map(|l| sign_channel(y, l)).collect(),
        buckets: None,
        thresholds: bank,
    })
}

/// Bucket index: number of interior levels `<=` the value, so buckets are
/// closed below and open above.
fn bucket_index(levels: &[f64], value: f64) -> usize {
    levels.partition_point(|&l| l <= value)
}

/// p-bit sampling: each channel value is mapped to the interval
/// `[lambda_k, lambda_{k+1})` it falls into.
pub fn quantize_p_bit(y: &CVector, bank: &ThresholdBank) -> Result<QuantizedObservation> {
    let (levels_re, levels_im) = match bank {
        ThresholdBank::PBit {
            levels_re,
            levels_im,
        } => (levels_re, levels_im),
        _ => {
            return Err(RadarError::InvalidArgument(
                "quantize_p_bit requires a p-bit threshold bank".into(),
            ))
        }
    };
    bank.validate()?;
    if levels_re.len() != y.len() {
        return Err(RadarError::InvalidArgument(
            "signal and threshold lengths differ".into(),
        ));
    }
    let re: Vec<usize> = (0..y.len())
        .map(|i| bucket_index(&levels_re[i], y[i].re))
        .collect();
    let im: Vec<usize> = (0..y.len())
        .map(|i| bucket_index(&levels_im[i], y[i].im))
        .collect();
    Ok(QuantizedObservation {
        channels: Vec::new(),
        buckets: Some(PBitBuckets { re, im }),
        thresholds: bank.clone(),
    })
}

/// Prior over the target Doppler used when generating random thresholds for
/// a moving scene.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NuPrior {
    /// Point mass, e.g. the previous estimate while tracking.
    Point(f64),
    /// Uniform over `[lo, hi]`, expectations taken in closed form.
    Uniform { lo: f64, hi: f64 },
}

impl NuPrior {
    /// `E{p(nu)}` entrywise.
    pub fn expected_p(&self, n: usize) -> CVector {
        match *self {
            NuPrior::Point(nu) => model::steering_vector(nu, n),
            NuPrior::Uniform { lo, hi } => {
                let center = (lo + hi) / 2.0;
                let width = hi - lo;
                CVector::from_fn(n, |i, _| model::doppler_correlation(i as i64, center, width))
            }
        }
    }

    /// `E{p(nu) p(nu)^H}` entrywise.
    pub fn expected_outer(&self, n: usize) -> CMatrix {
        match *self {
            NuPrior::Point(nu) => {
                let p = model::steering_vector(nu, n);
                &p * p.adjoint()
            }
            NuPrior::Uniform { lo, hi } => {
                let center = (lo + hi) / 2.0;
                let width = hi - lo;
                CMatrix::from_fn(n, n, |a, b| {
                    model::doppler_correlation(a as i64 - b as i64, center, width)
                })
            }
        }
    }
}

/// Mean-matching threshold: `lambda = E{alpha0} s`.
pub fn design_threshold_mean(s: &TransmitSequence, alpha_prior: C64) -> CVector {
    s.samples() * alpha_prior
}

/// Draws `K` random threshold vectors distributed like the received signal:
/// mean `E{alpha0} (s o E{p})` and covariance
/// `E{|alpha0|^2} (s s^H) o E{p p^H} + R` (stationary scenes use `p == 1`).
#[allow(clippy::too_many_arguments)]
pub fn design_threshold_random(
    s: &TransmitSequence,
    alpha_prior_mean: C64,
    alpha_prior_power: f64,
    r: &CMatrix,
    k: usize,
    nu_prior: Option<&NuPrior>,
    seed: u64,
) -> Result<Vec<CVector>> {
    if k == 0 {
        return Err(RadarError::InvalidArgument(
            "comparator count must be at least 1".into(),
        ));
    }
    if alpha_prior_power < 0.0 {
        return Err(RadarError::InvalidArgument(
            "alpha prior power must be nonnegative".into(),
        ));
    }
    let n = s.len();
    if r.nrows() != n || r.ncols() != n {
        return Err(RadarError::InvalidArgument(
            "covariance dimension does not match sequence".into(),
        ));
    }
    let (expected_p, expected_outer) = match nu_prior {
        Some(prior) => (prior.expected_p(n), prior.expected_outer(n)),
        None => (
            CVector::from_element(n, C64::new(1.0, 0.0)),
            CMatrix::from_element(n, n, C64::new(1.0, 0.0)),
        ),
    };
    let mean = CVector::from_fn(n, |i, _| alpha_prior_mean * s.samples()[i] * expected_p[i]);
    let mut cov = r.clone();
    for a in 0..n {
        for b in 0..n {
            cov[(a, b)] += s.samples()[a]
                * s.samples()[b].conj()
                * expected_outer[(a, b)]
                * alpha_prior_power;
        }
    }
    let factor = CovarianceFactor::new(&cov).map_err(|e| match e {
        RadarError::Numerical(msg) => RadarError::InvalidArgument(msg),
        other => other,
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..k).map(|_| factor.sample(&mean, &mut rng)).collect())
}

/// p-bit bank with `2^p - 1` uniformly spaced interior levels per sample and
/// channel, covering +-3 standard deviations of the predicted signal around
/// its predicted mean.
pub fn design_p_bit_uniform(
    p: u32,
    predicted_mean: &CVector,
    predicted_var: &[f64],
) -> Result<ThresholdBank> {
    if p == 0 {
        return Err(RadarError::InvalidArgument("p must be at least 1".into()));
    }
    let n = predicted_mean.len();
    if predicted_var.len() != n {
        return Err(RadarError::InvalidArgument(
            "mean and variance lengths differ".into(),
        ));
    }
    let count = (1usize << p) - 1;
    let mut levels_re = Vec::with_capacity(n);
    let mut levels_im = Vec::with_capacity(n);
    for i in 0..n {
        // Per-channel std: half the complex variance in each channel.
        let std = (predicted_var[i].max(0.0) / 2.0).sqrt().max(1e-9);
        let make = |center: f64| -> Vec<f64> {
            (1..=count)
                .map(|j| center - 3.0 * std + 6.0 * std * j as f64 / (count + 1) as f64)
                .collect()
        };
        levels_re.push(make(predicted_mean[i].re));
        levels_im.push(make(predicted_mean[i].im));
    }
    let bank = ThresholdBank::PBit {
        levels_re,
        levels_im,
    };
    bank.validate()?;
    Ok(bank)
}
