//! Transmit sequences, delay/Doppler signal models, and interference
//! covariance construction for stationary and moving-target scenes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{RadarError, Result};
use crate::linalg::{self, CovarianceFactor};
use crate::{C64, CMatrix, CVector};

/// Generator families for unit-PAR probing sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SequenceKind {
    /// Independent uniform phases.
    RandomPhase,
    /// Chirp-like phases `exp(j pi n^2 / N)`.
    QuadraticPhase,
}

/// Length-`N` complex probing code with energy `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitSequence {
    samples: CVector,
}

impl TransmitSequence {
    /// Wraps an existing sample vector; the squared norm must equal the
    /// length to within 1e-12 relative.
    pub fn new(samples: CVector) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(RadarError::InvalidArgument(
                "transmit sequence must be non-empty".into(),
            ));
        }
        let energy: f64 = samples.iter().map(|c| c.norm_sqr()).sum();
        if (energy - n as f64).abs() > 1e-12 * n as f64 {
            return Err(RadarError::InvalidArgument(format!(
                "sequence energy {energy} differs from length {n}"
            )));
        }
        Ok(Self { samples })
    }

    /// Generates a unimodular sequence. Every entry has unit modulus, so the
    /// energy constraint holds by construction.
    pub fn generate(n: usize, kind: SequenceKind, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(RadarError::InvalidArgument(
                "sequence length must be at least 1".into(),
            ));
        }
        let samples = match kind {
            SequenceKind::RandomPhase => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                CVector::from_fn(n, |_, _| {
                    let phase: f64 = rng.gen_range(0.0..2.0 * PI);
                    C64::from_polar(1.0, phase)
                })
            }
            SequenceKind::QuadraticPhase => CVector::from_fn(n, |i, _| {
                let phase = PI * (i as f64) * (i as f64) / n as f64;
                C64::from_polar(1.0, phase)
            }),
        };
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &CVector {
        &self.samples
    }
}

/// Doppler steering vector `p(nu)` with entries `exp(j 2 pi n nu)`.
pub fn steering_vector(nu: f64, n: usize) -> CVector {
    CVector::from_fn(n, |i, _| C64::from_polar(1.0, 2.0 * PI * i as f64 * nu))
}

/// Applies the delay operator `J_k` (`k >= 0` delays, `k < 0` advances, with
/// `J_{-k} = J_k^H`).
pub fn shift_apply(s: &CVector, k: i64) -> Result<CVector> {
    let n = s.len() as i64;
    if k.abs() >= n {
        return Err(RadarError::InvalidArgument(format!(
            "shift |{k}| must be below sequence length {n}"
        )));
    }
    let mut out = CVector::zeros(s.len());
    if k >= 0 {
        for i in k..n {
            out[i as usize] = s[(i - k) as usize];
        }
    } else {
        let a = -k;
        for i in 0..(n - a) {
            out[i as usize] = s[(i + a) as usize];
        }
    }
    Ok(out)
}

/// Clutter power plus noise covariance for a stationary scene.
#[derive(Debug, Clone)]
pub struct StationaryInterferenceModel {
    beta: f64,
    gamma: CMatrix,
}

impl StationaryInterferenceModel {
    pub fn new(beta: f64, gamma: CMatrix) -> Result<Self> {
        if beta < 0.0 {
            return Err(RadarError::InvalidArgument(
                "clutter power beta must be nonnegative".into(),
            ));
        }
        validate_noise_covariance(&gamma)?;
        Ok(Self { beta, gamma })
    }

    /// White-noise shorthand: `Gamma = sigma^2 I`.
    pub fn white(beta: f64, noise_var: f64, n: usize) -> Result<Self> {
        if noise_var < 0.0 {
            return Err(RadarError::InvalidArgument(
                "noise variance must be nonnegative".into(),
            ));
        }
        Self::new(beta, CMatrix::identity(n, n) * C64::new(noise_var, 0.0))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> &CMatrix {
        &self.gamma
    }
}

fn validate_noise_covariance(gamma: &CMatrix) -> Result<()> {
    if gamma.nrows() != gamma.ncols() {
        return Err(RadarError::InvalidArgument(
            "noise covariance must be square".into(),
        ));
    }
    let defect = linalg::hermitian_defect(gamma);
    if defect > 1e-12 * (1.0 + gamma.norm()) {
        return Err(RadarError::InvalidArgument(format!(
            "noise covariance is not Hermitian (defect {defect:.3e})"
        )));
    }
    let min_eig = linalg::min_eigenvalue(gamma);
    if min_eig < -1e-10 {
        return Err(RadarError::InvalidArgument(format!(
            "noise covariance has negative eigenvalue {min_eig:.3e}"
        )));
    }
    Ok(())
}

/// Per-cell clutter statistics for a moving-target scene: `Nc` range rings by
/// `L` azimuth sectors, each with an average power, a mean Doppler, and a
/// uniform Doppler-spread width.
#[derive(Debug, Clone)]
pub struct MovingClutterModel {
    nc: usize,
    sectors: usize,
    sigma_sq: Vec<f64>,
    nu_bar: Vec<f64>,
    eps_d: Vec<f64>,
    gamma: CMatrix,
}

impl MovingClutterModel {
    /// `sigma_sq`, `nu_bar`, `eps_d` are row-major `nc x sectors`.
    pub fn new(
        nc: usize,
        sectors: usize,
        sigma_sq: Vec<f64>,
        nu_bar: Vec<f64>,
        eps_d: Vec<f64>,
        gamma: CMatrix,
    ) -> Result<Self> {
        let cells = nc * sectors;
        if sigma_sq.len() != cells || nu_bar.len() != cells || eps_d.len() != cells {
            return Err(RadarError::InvalidArgument(format!(
                "expected {cells} per-cell parameters"
            )));
        }
        validate_noise_covariance(&gamma)?;
        if nc > gamma.nrows() {
            return Err(RadarError::InvalidArgument(format!(
                "range-ring count {nc} exceeds sequence length {}",
                gamma.nrows()
            )));
        }
        for idx in 0..cells {
            if sigma_sq[idx] < 0.0 || eps_d[idx] < 0.0 {
                return Err(RadarError::InvalidArgument(
                    "clutter powers and Doppler spreads must be nonnegative".into(),
                ));
            }
            if nu_bar[idx].abs() + eps_d[idx] / 2.0 > 0.5 + 1e-12 {
                return Err(RadarError::InvalidArgument(format!(
                    "cell {idx}: Doppler interval leaves [-0.5, 0.5)"
                )));
            }
        }
        Ok(Self {
            nc,
            sectors,
            sigma_sq,
            nu_bar,
            eps_d,
            gamma,
        })
    }

    /// All cells share the same power and the Doppler interval
    /// `(-spread/2, spread/2)`, noise is white.
    pub fn uniform(
        nc: usize,
        sectors: usize,
        cell_power: f64,
        doppler_spread: f64,
        noise_var: f64,
        n: usize,
    ) -> Result<Self> {
        let cells = nc * sectors;
        Self::new(
            nc,
            sectors,
            vec![cell_power; cells],
            vec![0.0; cells],
            vec![doppler_spread; cells],
            CMatrix::identity(n, n) * C64::new(noise_var, 0.0),
        )
    }

    pub fn range_rings(&self) -> usize {
        self.nc
    }

    pub fn azimuth_sectors(&self) -> usize {
        self.sectors
    }

    pub fn gamma(&self) -> &CMatrix {
        &self.gamma
    }

    fn cell(&self, ring: usize, sector: usize) -> usize {
        ring * self.sectors + sector
    }

    pub fn sigma_sq(&self, ring: usize, sector: usize) -> f64 {
        self.sigma_sq[self.cell(ring, sector)]
    }

    pub fn nu_bar(&self, ring: usize, sector: usize) -> f64 {
        self.nu_bar[self.cell(ring, sector)]
    }

    pub fn eps_d(&self, ring: usize, sector: usize) -> f64 {
        self.eps_d[self.cell(ring, sector)]
    }
}

/// Interference covariance of the stationary model:
/// `R = beta * sum_{0<|k|<N} J_k s s^H J_k^H + Gamma`.
pub fn stationary_covariance(
    s: &TransmitSequence,
    m: &StationaryInterferenceModel,
) -> Result<CMatrix> {
    let n = s.len();
    if m.gamma.nrows() != n {
        return Err(RadarError::InvalidArgument(format!(
            "noise covariance dimension {} does not match sequence length {n}",
            m.gamma.nrows()
        )));
    }
    let mut r = m.gamma.clone();
    for k in 1..n as i64 {
        for &kk in &[k, -k] {
            let v = shift_apply(s.samples(), kk)?;
            r += &v * v.adjoint() * C64::new(m.beta, 0.0);
        }
    }
    Ok(r)
}

/// Characteristic-function entry of a uniform Doppler distribution with mean
/// `nu_bar` and width `eps_d`, at lag `d`.
pub(crate) fn doppler_correlation(d: i64, nu_bar: f64, eps_d: f64) -> C64 {
    if d == 0 {
        return C64::new(1.0, 0.0);
    }
    let x = PI * d as f64 * eps_d;
    let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
    C64::from_polar(1.0, 2.0 * PI * d as f64 * nu_bar) * sinc
}

/// Clutter covariance of the moving model:
/// `Sigma_c = sum_{k,l} sigma^2_{(k,l)} J_k Phi(s,(k,l)) J_k^H` with
/// `Phi = Diag(s) C_nu Diag(s)^H`.
pub fn moving_clutter_covariance(s: &TransmitSequence, m: &MovingClutterModel) -> Result<CMatrix> {
    let n = s.len();
    if m.gamma.nrows() != n {
        return Err(RadarError::InvalidArgument(format!(
            "noise covariance dimension {} does not match sequence length {n}",
            m.gamma.nrows()
        )));
    }
    if m.nc > n {
        return Err(RadarError::InvalidArgument(format!(
            "range-ring count {} exceeds sequence length {n}",
            m.nc
        )));
    }
    let sv = s.samples();
    let mut sigma_c = CMatrix::zeros(n, n);
    for ring in 0..m.nc {
        for sector in 0..m.sectors {
            let power = m.sigma_sq(ring, sector);
            if power == 0.0 {
                continue;
            }
            let nu_bar = m.nu_bar(ring, sector);
            let eps_d = m.eps_d(ring, sector);
            // (J_k Phi J_k^H)[a, b] = Phi[a-k, b-k] for a, b >= k.
            for a in ring..n {
                for b in ring..n {
                    let ia = a - ring;
                    let ib = b - ring;
                    let phi = sv[ia]
                        * sv[ib].conj()
                        * doppler_correlation(ia as i64 - ib as i64, nu_bar, eps_d);
                    sigma_c[(a, b)] += phi * power;
                }
            }
        }
    }
    Ok(sigma_c)
}

/// Total interference covariance for the moving model, `R = Sigma_c + Gamma`.
pub fn total_covariance_moving(sigma_c: &CMatrix, gamma: &CMatrix) -> Result<CMatrix> {
    if sigma_c.shape() != gamma.shape() {
        return Err(RadarError::InvalidArgument(format!(
            "dimension mismatch: {:?} vs {:?}",
            sigma_c.shape(),
            gamma.shape()
        )));
    }
    Ok(sigma_c + gamma)
}

/// Ground-truth target parameters for scene synthesis.
#[derive(Debug, Clone, Copy)]
pub struct SceneTruth {
    pub alpha0: C64,
    /// Normalized Doppler in [-0.5, 0.5); 0 for stationary targets.
    pub nu: f64,
}

/// Either interference model, so scene synthesis and the campaign engine can
/// treat both scenarios uniformly.
#[derive(Debug, Clone)]
pub enum InterferenceModel {
    Stationary(StationaryInterferenceModel),
    Moving(MovingClutterModel),
}

impl InterferenceModel {
    pub fn gamma(&self) -> &CMatrix {
        match self {
            InterferenceModel::Stationary(m) => m.gamma(),
            InterferenceModel::Moving(m) => m.gamma(),
        }
    }

    /// Total interference covariance `R` for this model.
    pub fn covariance(&self, s: &TransmitSequence) -> Result<CMatrix> {
        match self {
            InterferenceModel::Stationary(m) => stationary_covariance(s, m),
            InterferenceModel::Moving(m) => {
                let sigma_c = moving_clutter_covariance(s, m)?;
                total_covariance_moving(&sigma_c, m.gamma())
            }
        }
    }
}

/// One drawn scene: target plus clutter plus noise, with every random
/// component recorded so the synthesis can be replayed.
#[derive(Debug, Clone)]
pub struct SceneRealization {
    pub alpha0: C64,
    pub nu: f64,
    /// Clutter coefficients, aligned with `clutter_shifts` / `clutter_dopplers`.
    pub clutter_coeffs: Vec<C64>,
    /// Delay index of each clutter component.
    pub clutter_shifts: Vec<i64>,
    /// Drawn Doppler of each clutter component (zero in the stationary model).
    pub clutter_dopplers: Vec<f64>,
    pub noise: CVector,
    pub y: CVector,
}

impl SceneRealization {
    /// Rebuilds `y` from the stored components; the result must match the
    /// stored vector to numerical precision.
    pub fn resynthesize(&self, s: &TransmitSequence) -> Result<CVector> {
        let n = s.len();
        let p = steering_vector(self.nu, n);
        let mut y = CVector::from_fn(n, |i, _| self.alpha0 * s.samples()[i] * p[i]);
        for ((&coeff, &shift), &doppler) in self
            .clutter_coeffs
            .iter()
            .zip(&self.clutter_shifts)
            .zip(&self.clutter_dopplers)
        {
            let pd = steering_vector(doppler, n);
            let modulated = CVector::from_fn(n, |i, _| s.samples()[i] * pd[i]);
            let shifted = shift_apply(&modulated, shift)?;
            y += shifted * coeff;
        }
        y += &self.noise;
        Ok(y)
    }
}

/// Draws one scene realization for either scenario.
///
/// Clutter coefficients are circularly-symmetric complex Gaussian; moving
/// clutter Doppler is uniform on the per-cell interval; noise is
/// `CN(0, Gamma)`.
pub fn synthesize_scene(
    s: &TransmitSequence,
    truth: SceneTruth,
    model: &InterferenceModel,
    seed: u64,
) -> Result<SceneRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    synthesize_scene_with_rng(s, truth, model, &mut rng)
}

/// Same as [`synthesize_scene`] but drawing from a caller-owned RNG.
pub fn synthesize_scene_with_rng<R: Rng + ?Sized>(
    s: &TransmitSequence,
    truth: SceneTruth,
    model: &InterferenceModel,
    rng: &mut R,
) -> Result<SceneRealization> {
    let n = s.len();
    if model.gamma().nrows() != n {
        return Err(RadarError::InvalidArgument(
            "interference model dimension does not match sequence".into(),
        ));
    }
    let mut coeffs = Vec::new();
    let mut shifts = Vec::new();
    let mut dopplers = Vec::new();
    match model {
        InterferenceModel::Stationary(m) => {
            for k in 1..n as i64 {
                for &kk in &[k, -k] {
                    coeffs.push(linalg::complex_gaussian_scalar(m.beta(), rng));
                    shifts.push(kk);
                    dopplers.push(0.0);
                }
            }
        }
        InterferenceModel::Moving(m) => {
            for ring in 0..m.range_rings() {
                for sector in 0..m.azimuth_sectors() {
                    let power = m.sigma_sq(ring, sector);
                    let nu_bar = m.nu_bar(ring, sector);
                    let eps = m.eps_d(ring, sector);
                    let doppler = if eps > 0.0 {
                        rng.gen_range(nu_bar - eps / 2.0..nu_bar + eps / 2.0)
                    } else {
                        nu_bar
                    };
                    coeffs.push(linalg::complex_gaussian_scalar(power, rng));
                    shifts.push(ring as i64);
                    dopplers.push(doppler);
                }
            }
        }
    }
    let noise = if model.gamma().iter().all(|c| c.norm() == 0.0) {
        CVector::zeros(n)
    } else {
        let factor = CovarianceFactor::new(model.gamma())?;
        factor.sample(&CVector::zeros(n), rng)
    };
    let scene = SceneRealization {
        alpha0: truth.alpha0,
        nu: truth.nu,
        clutter_coeffs: coeffs,
        clutter_shifts: shifts,
        clutter_dopplers: dopplers,
        noise,
        y: CVector::zeros(n),
    };
    let y = scene.resynthesize(s)?;
    Ok(SceneRealization { y, ..scene })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn seq(v: &[f64]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
    }

    #[test]
    fn quadratic_phase_matches_formula() {
        let s = TransmitSequence::generate(4, SequenceKind::QuadraticPhase, 0).unwrap();
        for (i, c) in s.samples().iter().enumerate() {
            let expect = C64::from_polar(1.0, PI * (i * i) as f64 / 4.0);
            assert!((c - expect).norm() < 1e-12);
            assert_relative_eq!(c.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn random_phase_energy_and_determinism() {
        let a = TransmitSequence::generate(10, SequenceKind::RandomPhase, 7).unwrap();
        let energy: f64 = a.samples().iter().map(|c| c.norm_sqr()).sum();
        assert_relative_eq!(energy, 10.0, epsilon = 1e-12);
        let b = TransmitSequence::generate(25, SequenceKind::RandomPhase, 1).unwrap();
        let c = TransmitSequence::generate(25, SequenceKind::RandomPhase, 1).unwrap();
        assert_eq!(b.samples(), c.samples());
    }

    #[test]
    fn zero_length_rejected() {
        assert!(TransmitSequence::generate(0, SequenceKind::RandomPhase, 0).is_err());
    }

    #[test]
    fn shift_examples() {
        let s = seq(&[1.0, 2.0, 3.0]);
        assert_eq!(shift_apply(&s, 0).unwrap(), s);
        assert_eq!(shift_apply(&s, 1).unwrap(), seq(&[0.0, 1.0, 2.0]));
        assert_eq!(shift_apply(&s, -1).unwrap(), seq(&[2.0, 3.0, 0.0]));
        assert!(shift_apply(&s, 3).is_err());
        assert!(shift_apply(&s, -3).is_err());
    }

    #[test]
    fn shift_roundtrip_zeroes_boundary() {
        let s = TransmitSequence::generate(8, SequenceKind::RandomPhase, 3).unwrap();
        for k in 1..8i64 {
            let fwd = shift_apply(s.samples(), k).unwrap();
            let back = shift_apply(&fwd, -k).unwrap();
            for i in 0..8 {
                if i < 8 - k as usize {
                    assert!((back[i] - s.samples()[i]).norm() < 1e-15);
                } else {
                    assert_eq!(back[i], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn stationary_covariance_hand_expanded() {
        // N=2, s=[1,1], beta=0.1, Gamma=0.1 I -> R = 0.2 I.
        let s = TransmitSequence::new(seq(&[1.0, 1.0])).unwrap();
        let m = StationaryInterferenceModel::white(0.1, 0.1, 2).unwrap();
        let r = stationary_covariance(&s, &m).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let expect = if a == b { 0.2 } else { 0.0 };
                assert!((r[(a, b)] - C64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn stationary_covariance_clutter_free_is_gamma() {
        let s = TransmitSequence::generate(5, SequenceKind::RandomPhase, 2).unwrap();
        let m = StationaryInterferenceModel::white(0.0, 0.3, 5).unwrap();
        let r = stationary_covariance(&s, &m).unwrap();
        assert!((r - m.gamma()).norm() < 1e-14);
    }

    #[test]
    fn stationary_covariance_minus_gamma_is_psd() {
        let s = TransmitSequence::generate(10, SequenceKind::RandomPhase, 9).unwrap();
        let m = StationaryInterferenceModel::white(0.1, 0.1, 10).unwrap();
        let r = stationary_covariance(&s, &m).unwrap();
        let diff = r - m.gamma();
        assert!(linalg::min_eigenvalue(&diff) > -1e-10);
    }

    #[test]
    fn stationary_covariance_global_phase_invariant() {
        let s = TransmitSequence::generate(6, SequenceKind::RandomPhase, 4).unwrap();
        let rotated = CVector::from_fn(6, |i, _| s.samples()[i] * C64::from_polar(1.0, 1.234));
        let s2 = TransmitSequence::new(rotated).unwrap();
        let m = StationaryInterferenceModel::white(0.2, 0.05, 6).unwrap();
        let r1 = stationary_covariance(&s, &m).unwrap();
        let r2 = stationary_covariance(&s2, &m).unwrap();
        assert!((r1 - r2).norm() < 1e-12);
    }

    #[test]
    fn moving_covariance_zero_power_is_zero() {
        let s = TransmitSequence::generate(6, SequenceKind::RandomPhase, 1).unwrap();
        let m = MovingClutterModel::uniform(2, 3, 0.0, 0.2, 0.1, 6).unwrap();
        let sigma_c = moving_clutter_covariance(&s, &m).unwrap();
        assert!(sigma_c.norm() == 0.0);
    }

    #[test]
    fn moving_covariance_hermitian_psd() {
        let s = TransmitSequence::generate(8, SequenceKind::RandomPhase, 5).unwrap();
        let m = MovingClutterModel::new(
            2,
            2,
            vec![0.5, 0.2, 0.3, 0.1],
            vec![0.05, -0.1, 0.0, 0.2],
            vec![0.1, 0.05, 0.2, 0.0],
            CMatrix::identity(8, 8) * C64::new(0.1, 0.0),
        )
        .unwrap();
        let sigma_c = moving_clutter_covariance(&s, &m).unwrap();
        assert!(linalg::hermitian_defect(&sigma_c) < 1e-10);
        assert!(linalg::min_eigenvalue(&sigma_c) > -1e-8);
    }

    #[test]
    fn moving_covariance_single_cell_rank_one() {
        // eps_d = 0, one cell at ring 0: Sigma_c = Diag(s) p pH Diag(s)^H.
        let n = 5;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 8).unwrap();
        let nu_bar = 0.12;
        let m = MovingClutterModel::new(
            1,
            1,
            vec![1.0],
            vec![nu_bar],
            vec![0.0],
            CMatrix::zeros(n, n),
        )
        .unwrap();
        let sigma_c = moving_clutter_covariance(&s, &m).unwrap();
        let p = steering_vector(nu_bar, n);
        let v = CVector::from_fn(n, |i, _| s.samples()[i] * p[i]);
        let expect = &v * v.adjoint();
        assert!((sigma_c - expect).norm() < 1e-12);
    }

    #[test]
    fn moving_covariance_monte_carlo_oracle() {
        // Single cell, eps_d = 0: average of drawn outer products must match.
        let n = 4;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 13).unwrap();
        let m = MovingClutterModel::new(
            1,
            1,
            vec![1.0],
            vec![0.07],
            vec![0.0],
            CMatrix::zeros(n, n),
        )
        .unwrap();
        let sigma_c = moving_clutter_covariance(&s, &m).unwrap();
        let model = InterferenceModel::Moving(m);
        let truth = SceneTruth {
            alpha0: C64::new(0.0, 0.0),
            nu: 0.0,
        };
        let mut acc = CMatrix::zeros(n, n);
        let trials = 100_000u64;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..trials {
            let scene = synthesize_scene_with_rng(&s, truth, &model, &mut rng).unwrap();
            acc += &scene.y * scene.y.adjoint();
        }
        acc /= C64::new(trials as f64, 0.0);
        for a in 0..n {
            for b in 0..n {
                assert!(
                    (acc[(a, b)] - sigma_c[(a, b)]).norm() < 0.02,
                    "entry ({a},{b}) off by {}",
                    (acc[(a, b)] - sigma_c[(a, b)]).norm()
                );
            }
        }
    }

    #[test]
    fn total_covariance_edges() {
        let n = 3;
        let gamma = CMatrix::identity(n, n) * C64::new(0.4, 0.0);
        let zero = CMatrix::zeros(n, n);
        assert!((total_covariance_moving(&zero, &gamma).unwrap() - &gamma).norm() == 0.0);
        assert!((total_covariance_moving(&gamma, &zero).unwrap() - &gamma).norm() == 0.0);
        assert!(total_covariance_moving(&zero, &CMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn steering_vector_properties() {
        let p = steering_vector(0.3, 16);
        for c in p.iter() {
            assert_relative_eq!(c.norm(), 1.0, epsilon = 1e-12);
        }
        let energy: f64 = p.iter().map(|c| c.norm_sqr()).sum();
        assert_eq!(energy, 16.0);
    }

    #[test]
    fn scene_noise_free_is_scaled_sequence() {
        let n = 6;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 2).unwrap();
        let m = StationaryInterferenceModel::white(0.0, 0.0, n).unwrap();
        let truth = SceneTruth {
            alpha0: C64::new(0.5, -0.25),
            nu: 0.0,
        };
        let scene = synthesize_scene(&s, truth, &InterferenceModel::Stationary(m), 1).unwrap();
        let expect = CVector::from_fn(n, |i, _| truth.alpha0 * s.samples()[i]);
        assert!((scene.y - expect).norm() < 1e-12);
    }

    #[test]
    fn scene_doppler_phase_progression() {
        let n = 8;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 3).unwrap();
        let m = MovingClutterModel::uniform(1, 1, 0.0, 0.0, 0.0, n).unwrap();
        let truth = SceneTruth {
            alpha0: C64::new(1.0, 0.5),
            nu: 0.25,
        };
        let scene = synthesize_scene(&s, truth, &InterferenceModel::Moving(m), 5).unwrap();
        for i in 0..n {
            let expect = truth.alpha0 * s.samples()[i] * C64::from_polar(1.0, PI * i as f64 / 2.0);
            assert!((scene.y[i] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn scene_resynthesis_matches() {
        let n = 10;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 21).unwrap();
        let m = MovingClutterModel::uniform(2, 4, 0.1, 0.2, 0.1, n).unwrap();
        let truth = SceneTruth {
            alpha0: C64::new(0.7, 0.3),
            nu: 0.1,
        };
        let scene = synthesize_scene(&s, truth, &InterferenceModel::Moving(m), 77).unwrap();
        let rebuilt = scene.resynthesize(&s).unwrap();
        assert!((rebuilt - &scene.y).norm() < 1e-10);
    }

    #[test]
    fn scene_covariance_monte_carlo() {
        // Empirical covariance of y - alpha0 s matches R for the stationary model.
        let n = 6;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 30).unwrap();
        let m = StationaryInterferenceModel::white(0.1, 0.1, n).unwrap();
        let r = stationary_covariance(&s, &m).unwrap();
        let model = InterferenceModel::Stationary(m);
        let truth = SceneTruth {
            alpha0: C64::new(0.5, 0.5),
            nu: 0.0,
        };
        let trials = 10_000u64;
        let mut acc = CMatrix::zeros(n, n);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..trials {
            let scene = synthesize_scene_with_rng(&s, truth, &model, &mut rng).unwrap();
            let resid = CVector::from_fn(n, |i, _| scene.y[i] - truth.alpha0 * s.samples()[i]);
            acc += &resid * resid.adjoint();
        }
        acc /= C64::new(trials as f64, 0.0);
        for a in 0..n {
            for b in 0..n {
                assert!(
                    (acc[(a, b)] - r[(a, b)]).norm() < 0.05,
                    "entry ({a},{b}) off by {}",
                    (acc[(a, b)] - r[(a, b)]).norm()
                );
            }
        }
    }

    #[test]
    fn stationary_and_collapsed_moving_statistics_agree() {
        // One ring, one sector, eps_d = 0, nu_bar = 0 reduces the moving model
        // to a single zero-delay clutter term; compare sample covariances.
        let n = 4;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 44).unwrap();
        let moving = MovingClutterModel::uniform(1, 1, 0.1, 0.0, 0.1, n).unwrap();
        let r_moving = InterferenceModel::Moving(moving.clone()).covariance(&s).unwrap();
        // Direct: 0.1 * s s^H + 0.1 I.
        let expect =
            s.samples() * s.samples().adjoint() * C64::new(0.1, 0.0)
                + CMatrix::identity(n, n) * C64::new(0.1, 0.0);
        assert!((&r_moving - &expect).norm() < 1e-10);

        let truth = SceneTruth {
            alpha0: C64::new(0.0, 0.0),
            nu: 0.0,
        };
        let model = InterferenceModel::Moving(moving);
        let trials = 10_000u64;
        let mut acc = CMatrix::zeros(n, n);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..trials {
            let scene = synthesize_scene_with_rng(&s, truth, &model, &mut rng).unwrap();
            acc += &scene.y * scene.y.adjoint();
        }
        acc /= C64::new(trials as f64, 0.0);
        for a in 0..n {
            for b in 0..n {
                assert!((acc[(a, b)] - r_moving[(a, b)]).norm() < 0.05);
            }
        }
    }
}
