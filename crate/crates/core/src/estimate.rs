//! Target-parameter estimators: the one-bit recovery pipelines for
//! stationary and moving targets, the Bussgang-aided baseline, and the
//! full-precision mismatched-filter reference.

use serde::{Deserialize, Serialize};

use crate::error::{RadarError, Result};
use crate::linalg::CovarianceFactor;
use crate::model::{
    self, InterferenceModel, MovingClutterModel, StationaryInterferenceModel, TransmitSequence,
};
use crate::qpsolve::{self, Backend, SolveStatus};
use crate::sampling::QuantizedObservation;
use crate::{C64, CMatrix, CVector};

/// Estimation method identifiers, as they appear in result records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Method {
    Proposed,
    Bussgang,
    FullPrecision,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Bussgang => "bussgang",
            Method::FullPrecision => "fullPrecision",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = RadarError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Method::Proposed),
            "bussgang" => Ok(Method::Bussgang),
            "fullPrecision" => Ok(Method::FullPrecision),
            other => Err(RadarError::InvalidArgument(format!(
                "unknown method '{other}' (expected proposed, bussgang, or fullPrecision)"
            ))),
        }
    }
}

/// Mismatched receive filter.
#[derive(Debug, Clone)]
pub struct ReceiveFilter {
    pub w: CVector,
}

/// Estimator tuning knobs shared by all pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct EstimatorConfig {
    /// KKT tolerance for the recovery QP.
    pub qp_tol: f64,
    /// Iteration cap for the recovery QP; 0 picks a dimension-based default.
    pub qp_max_iter: usize,
    pub backend: Backend,
    /// Relative objective-decrease threshold ending the cyclic loop.
    pub cycle_tol: f64,
    pub max_cycles: usize,
    /// Doppler grid size; 0 picks 1024, doubled until it covers 2N points.
    pub grid_points: usize,
    /// Side length of the Bussgang alpha search grid.
    pub bussgang_grid: usize,
    /// Radius of the Bussgang alpha search disk.
    pub bussgang_radius: f64,
    /// Doppler grid size of the moving-target Bussgang variant.
    pub bussgang_nu_grid: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            qp_tol: 1e-8,
            qp_max_iter: 0,
            backend: Backend::Auto,
            cycle_tol: 1e-6,
            max_cycles: 100,
            grid_points: 0,
            bussgang_grid: 101,
            bussgang_radius: 3.0,
            bussgang_nu_grid: 33,
        }
    }
}

impl EstimatorConfig {
    fn qp_iter_cap(&self, dim: usize) -> usize {
        if self.qp_max_iter > 0 {
            self.qp_max_iter
        } else {
            (10 * dim).max(2000)
        }
    }

    fn doppler_grid(&self, n: usize) -> usize {
        if self.grid_points > 0 {
            return self.grid_points;
        }
        let mut g = 1024usize;
        while g < 2 * n {
            g *= 2;
        }
        g
    }
}

/// One estimate with solver diagnostics.
#[derive(Debug, Clone)]
pub struct TargetEstimate {
    pub method: Method,
    pub alpha_hat: C64,
    /// Normalized Doppler in [-0.5, 0.5); 0 for stationary pipelines.
    pub nu_hat: f64,
    pub y_hat: CVector,
    pub objective: f64,
    pub cycles: usize,
    pub solver_status: SolveStatus,
}

/// Flat JSON record of an estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimateRecord {
    pub method: Method,
    pub alpha_hat: [f64; 2],
    pub nu_hat: f64,
    pub objective: f64,
    pub cycles: usize,
    pub solver_status: SolveStatus,
}

impl TargetEstimate {
    pub fn record(&self) -> EstimateRecord {
        EstimateRecord {
            method: self.method,
            alpha_hat: [self.alpha_hat.re, self.alpha_hat.im],
            nu_hat: self.nu_hat,
            objective: self.objective,
            cycles: self.cycles,
            solver_status: self.solver_status,
        }
    }
}

/// `s ⊙ p(ν)`; plain `s` when no Doppler applies.
pub fn composite_signature(s: &TransmitSequence, nu: Option<f64>) -> CVector {
    match nu {
        Some(nu) => {
            let p = model::steering_vector(nu, s.len());
            CVector::from_fn(s.len(), |i, _| s.samples()[i] * p[i])
        }
        None => s.samples().clone(),
    }
}

/// Optimal mismatched filter `w = R^{-1} s~`, unnormalized (the estimate is
/// scale-invariant in `w`).
pub fn mmf_filter(signature: &CVector, factor: &CovarianceFactor) -> Result<ReceiveFilter> {
    if signature.len() != factor.dim() {
        return Err(RadarError::InvalidArgument(
            "signature length does not match covariance dimension".into(),
        ));
    }
    let w = factor.solve_vec(signature);
    if w.norm() == 0.0 {
        return Err(RadarError::Numerical("receive filter is identically zero".into()));
    }
    Ok(ReceiveFilter { w })
}

/// Closed-form backscattering estimate `α̂0 = w^H y / (w^H s~)`.
pub fn mmf_estimate_alpha(w: &CVector, y: &CVector, signature: &CVector) -> Result<C64> {
    let denom = (w.adjoint() * signature)[(0, 0)];
    if denom.norm() < 1e-12 {
        return Err(RadarError::DegenerateFilter);
    }
    let num = (w.adjoint() * y)[(0, 0)];
    Ok(num / denom)
}

/// Weighted-least-squares objective
/// `(y - α0 s~)^H R^{-1} (y - α0 s~)` with `s~ = s ⊙ p(ν)`.
pub fn wls_objective(
    y: &CVector,
    alpha0: C64,
    nu: Option<f64>,
    s: &TransmitSequence,
    factor: &CovarianceFactor,
) -> f64 {
    let signature = composite_signature(s, nu);
    let resid = y - signature * alpha0;
    (resid.adjoint() * factor.solve_vec(&resid))[(0, 0)].re
}

/// Doppler objective `g(ν)`: the block quadratic form in `[1; p(ν)]` with
/// off-diagonal blocks `-(α̂0 s)^T ⊙ (y^H R^{-1})` and lower-right block
/// `|α̂0|^2 R^{-1} ⊙ (s s^H)^*`, where `α̂0` is the MMF estimate at this `ν`.
pub fn doppler_objective_g(
    nu: f64,
    y: &CVector,
    w: &CVector,
    s: &TransmitSequence,
    factor: &CovarianceFactor,
) -> Result<f64> {
    let n = s.len();
    let signature = composite_signature(s, Some(nu));
    let alpha = mmf_estimate_alpha(w, y, &signature)?;
    let u = factor.solve_vec(y); // R^{-1} y, so y^H R^{-1} = u^H
    let r_inv = factor.inverse();
    let sv = s.samples();
    let mut m = CMatrix::zeros(n + 1, n + 1);
    for j in 0..n {
        m[(0, 1 + j)] = -(alpha * sv[j]) * u[j].conj();
        m[(1 + j, 0)] = -(alpha * sv[j]).conj() * u[j];
    }
    let pow = alpha.norm_sqr();
    for a in 0..n {
        for b in 0..n {
            m[(1 + a, 1 + b)] = r_inv[(a, b)] * sv[a].conj() * sv[b] * pow;
        }
    }
    let p = model::steering_vector(nu, n);
    let mut v = CVector::zeros(n + 1);
    v[0] = C64::new(1.0, 0.0);
    for i in 0..n {
        v[1 + i] = p[i];
    }
    Ok((v.adjoint() * m * v)[(0, 0)].re)
}

/// The WLS objective profiled over `α0` (and over the filter), evaluated
/// cheaply on many Doppler candidates:
/// `J(ν) = y^H R^{-1} y - |s~^H R^{-1} y|^2 / (s~^H R^{-1} s~)`.
pub struct DopplerProfile {
    /// `conj(s_i) (R^{-1} y)_i`, so the numerator is a trig polynomial.
    num_coeffs: Vec<C64>,
    /// Diagonal sums of `R^{-1} ⊙ (s s^H)^*`, offsets `-(N-1) ..= N-1`.
    diag_sums: Vec<C64>,
    y_quad: f64,
    n: usize,
}

impl DopplerProfile {
    pub fn new(y: &CVector, s: &TransmitSequence, factor: &CovarianceFactor) -> Self {
        let n = s.len();
        let u = factor.solve_vec(y);
        let sv = s.samples();
        let num_coeffs: Vec<C64> = (0..n).map(|i| sv[i].conj() * u[i]).collect();
        let r_inv = factor.inverse();
        let mut diag_sums = vec![C64::new(0.0, 0.0); 2 * n - 1];
        for a in 0..n {
            for b in 0..n {
                let k = r_inv[(a, b)] * sv[a].conj() * sv[b];
                diag_sums[(b as i64 - a as i64 + n as i64 - 1) as usize] += k;
            }
        }
        let y_quad = (y.adjoint() * &u)[(0, 0)].re;
        Self {
            num_coeffs,
            diag_sums,
            y_quad,
            n,
        }
    }

    /// `J(ν)` in O(N) time.
    pub fn eval(&self, nu: f64) -> f64 {
        use std::f64::consts::TAU;
        let mut num = C64::new(0.0, 0.0);
        for (i, &c) in self.num_coeffs.iter().enumerate() {
            num += c * C64::from_polar(1.0, -TAU * i as f64 * nu);
        }
        let mut quad = 0.0;
        for (idx, &t) in self.diag_sums.iter().enumerate() {
            let d = idx as i64 - (self.n as i64 - 1);
            quad += (t * C64::from_polar(1.0, TAU * d as f64 * nu)).re;
        }
        if quad <= 1e-300 {
            return self.y_quad;
        }
        self.y_quad - num.norm_sqr() / quad
    }

    /// Grid search over [-0.5, 0.5) followed by golden-section refinement.
    pub fn search(&self, grid_points: usize) -> f64 {
        let g = grid_points.max(8);
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..g {
            let nu = -0.5 + k as f64 / g as f64;
            let f = self.eval(nu);
            if f < best.0 {
                best = (f, nu);
            }
        }
        let half = 1.0 / g as f64;
        let lo = (best.1 - half).max(-0.5);
        let hi = (best.1 + half).min(0.5 - 1e-12);
        golden_section(|nu| self.eval(nu), lo, hi, 1e-6)
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]` down to the
/// given interval width.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, width: f64) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > width {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// One-bit stationary pipeline: build the MMF, recover `y` from the sign
/// data via the constrained QP, read off `α̂0`.
pub fn estimate_stationary(
    s: &TransmitSequence,
    m: &StationaryInterferenceModel,
    obs: &QuantizedObservation,
    cfg: &EstimatorConfig,
) -> Result<TargetEstimate> {
    if obs.len() != s.len() {
        return Err(RadarError::InvalidArgument(
            "observation length does not match sequence".into(),
        ));
    }
    let r = model::stationary_covariance(s, m)?;
    let factor = CovarianceFactor::new(&r)?;
    let filt = mmf_filter(s.samples(), &factor)?;
    let qp = qpsolve::build_recovery_qp(s, &filt.w, &factor, obs, None)?;
    let sol = qpsolve::solve_with(&qp, cfg.qp_tol, cfg.qp_iter_cap(qp.dim()), cfg.backend, None);
    if sol.status == SolveStatus::InfeasibleInput {
        return Err(RadarError::Infeasible(
            "sign constraints define an empty set".into(),
        ));
    }
    let alpha_hat = mmf_estimate_alpha(&filt.w, &sol.y, s.samples())?;
    Ok(TargetEstimate {
        method: Method::Proposed,
        alpha_hat,
        nu_hat: 0.0,
        y_hat: sol.y,
        objective: sol.objective,
        cycles: 1,
        solver_status: sol.status,
    })
}

/// One-bit moving pipeline: cyclic minimization over the filter, the
/// recovered signal, and the Doppler shift. Returns the estimate and the
/// per-cycle objective trace.
pub fn estimate_moving_traced(
    s: &TransmitSequence,
    m: &MovingClutterModel,
    obs: &QuantizedObservation,
    cfg: &EstimatorConfig,
) -> Result<(TargetEstimate, Vec<f64>)> {
    if obs.len() != s.len() {
        return Err(RadarError::InvalidArgument(
            "observation length does not match sequence".into(),
        ));
    }
    let sigma_c = model::moving_clutter_covariance(s, m)?;
    let r = model::total_covariance_moving(&sigma_c, m.gamma())?;
    let factor = CovarianceFactor::new(&r)?;
    let grid = cfg.doppler_grid(s.len());

    let mut nu_hat = 0.0f64;
    let mut warm: Option<Vec<f64>> = None;
    let mut trace = Vec::new();
    let mut f_prev = f64::INFINITY;
    let mut cycles = 0usize;
    let mut last: Option<qpsolve::QPSolution> = None;
    for _ in 0..cfg.max_cycles {
        cycles += 1;
        let signature = composite_signature(s, Some(nu_hat));
        let filt = mmf_filter(&signature, &factor)?;
        let qp = qpsolve::build_recovery_qp(s, &filt.w, &factor, obs, Some(nu_hat))?;
        let sol = qpsolve::solve_with(
            &qp,
            cfg.qp_tol,
            cfg.qp_iter_cap(qp.dim()),
            cfg.backend,
            warm.as_deref(),
        );
        if sol.status == SolveStatus::InfeasibleInput {
            return Err(RadarError::Infeasible(
                "sign constraints define an empty set".into(),
            ));
        }
        let ridge_part = sol.objective - qp.objective_unridged(&sol.y);

        // Doppler step on the recovered signal; accepted only when the
        // profiled objective does not increase, which keeps the tracked
        // objective monotone.
        let profile = DopplerProfile::new(&sol.y, s, &factor);
        let candidate = profile.search(grid);
        if profile.eval(candidate) <= profile.eval(nu_hat) {
            nu_hat = candidate;
        }
        let f_now = profile.eval(nu_hat) + ridge_part;
        trace.push(f_now);
        warm = Some(sol.x.clone());
        last = Some(sol);
        if f_prev.is_finite() && f_prev - f_now < cfg.cycle_tol * f_prev.abs().max(1.0) {
            f_prev = f_now;
            break;
        }
        f_prev = f_now;
    }
    let last = last.expect("at least one cycle runs");
    let signature = composite_signature(s, Some(nu_hat));
    let filt = mmf_filter(&signature, &factor)?;
    let alpha_hat = mmf_estimate_alpha(&filt.w, &last.y, &signature)?;
    Ok((
        TargetEstimate {
            method: Method::Proposed,
            alpha_hat,
            nu_hat,
            y_hat: last.y.clone(),
            objective: f_prev,
            cycles,
            solver_status: last.status,
        },
        trace,
    ))
}

pub fn estimate_moving(
    s: &TransmitSequence,
    m: &MovingClutterModel,
    obs: &QuantizedObservation,
    cfg: &EstimatorConfig,
) -> Result<TargetEstimate> {
    estimate_moving_traced(s, m, obs, cfg).map(|(e, _)| e)
}

/// Reference estimator with full access to `y`: MMF directly, plus a Doppler
/// grid search for moving scenes.
pub fn estimate_full_precision(
    s: &TransmitSequence,
    model: &InterferenceModel,
    y: &CVector,
    cfg: &EstimatorConfig,
) -> Result<TargetEstimate> {
    if y.len() != s.len() {
        return Err(RadarError::InvalidArgument(
            "signal length does not match sequence".into(),
        ));
    }
    let r = model.covariance(s)?;
    let factor = CovarianceFactor::new(&r)?;
    let nu_hat = match model {
        InterferenceModel::Stationary(_) => 0.0,
        InterferenceModel::Moving(_) => {
            DopplerProfile::new(y, s, &factor).search(cfg.doppler_grid(s.len()))
        }
    };
    let signature = composite_signature(s, Some(nu_hat));
    let filt = mmf_filter(&signature, &factor)?;
    let alpha_hat = mmf_estimate_alpha(&filt.w, y, &signature)?;
    let objective = wls_objective(y, alpha_hat, Some(nu_hat), s, &factor);
    Ok(TargetEstimate {
        method: Method::FullPrecision,
        alpha_hat,
        nu_hat,
        y_hat: y.clone(),
        objective,
        cycles: 1,
        solver_status: SolveStatus::Optimal,
    })
}

/// Diagnostics of the Bussgang covariance fit.
#[derive(Debug, Clone)]
pub struct BussgangFit {
    /// One-snapshot autocorrelation `γ γ^H`.
    pub rgamma: CMatrix,
    /// Arcsine-law image: the implied normalized covariance of `y - λ`.
    pub rbar: CMatrix,
}

/// Entrywise arcsine-law map `sin((π/2) Re) + j sin((π/2) Im)` relating the
/// one-bit autocorrelation to the normalized input covariance.
pub fn arcsine_map(rgamma: &CMatrix) -> CMatrix {
    use std::f64::consts::FRAC_PI_2;
    rgamma.map(|z| C64::new((FRAC_PI_2 * z.re).sin(), (FRAC_PI_2 * z.im).sin()))
}

/// `D^{-1/2} M D^{-1/2}` with `D = Diag(diag(M))`; zero diagonal entries are
/// jittered.
pub fn normalize_covariance(m: &CMatrix) -> Result<CMatrix> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(RadarError::InvalidArgument("matrix must be square".into()));
    }
    let scales: Vec<f64> = (0..n)
        .map(|i| {
            let d = m[(i, i)].re;
            if d <= 0.0 {
                crate::linalg::COV_JITTER
            } else {
                d
            }
        })
        .map(|d| d.sqrt())
        .collect();
    Ok(CMatrix::from_fn(n, n, |a, b| m[(a, b)] / (scales[a] * scales[b])))
}

/// Bussgang-aided baseline: fit the arcsine-law image of the one-snapshot
/// sign covariance against the model covariance of `y - λ` over a complex
/// grid of `α0` candidates (optionally a product grid with `ν`), then polish
/// locally.
pub fn estimate_bussgang(
    s: &TransmitSequence,
    r: &CMatrix,
    obs: &QuantizedObservation,
    lambda: &CVector,
    moving: bool,
    cfg: &EstimatorConfig,
) -> Result<TargetEstimate> {
    let n = s.len();
    if r.nrows() != n || lambda.len() != n || obs.len() != n {
        return Err(RadarError::InvalidArgument(
            "sequence, covariance, threshold, and observation sizes must agree".into(),
        ));
    }
    let gamma = obs.gamma().ok_or_else(|| {
        RadarError::InvalidArgument("Bussgang baseline needs a one-bit snapshot".into())
    })?;
    let fit = bussgang_fit(&gamma);
    let (alpha_hat, nu_hat, objective) = bussgang_search(s, r, &fit.rbar, lambda, moving, cfg)?;
    // The baseline does not reconstruct y; report the model mean.
    let signature = composite_signature(s, if moving { Some(nu_hat) } else { None });
    Ok(TargetEstimate {
        method: Method::Bussgang,
        alpha_hat,
        nu_hat,
        y_hat: signature * alpha_hat,
        objective,
        cycles: 1,
        solver_status: SolveStatus::Optimal,
    })
}

/// Grid-plus-polish fit of `(α0, ν)` against an arcsine-law data matrix
/// `rbar`; the model is the normalized covariance of `y - λ` under each
/// candidate.
pub fn bussgang_search(
    s: &TransmitSequence,
    r: &CMatrix,
    rbar: &CMatrix,
    lambda: &CVector,
    moving: bool,
    cfg: &EstimatorConfig,
) -> Result<(C64, f64, f64)> {
    let n = s.len();
    if r.nrows() != n || lambda.len() != n || rbar.nrows() != n || rbar.ncols() != n {
        return Err(RadarError::InvalidArgument(
            "sequence, covariance, data matrix, and threshold sizes must agree".into(),
        ));
    }
    let model_misfit = |alpha: C64, nu: Option<f64>| -> f64 {
        let signature = composite_signature(s, nu);
        let mut t = CMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let cross = alpha * signature[a] * lambda[b].conj();
                let cross_h = (alpha * signature[b] * lambda[a].conj()).conj();
                t[(a, b)] = signature[a] * signature[b].conj() * alpha.norm_sqr()
                    + lambda[a] * lambda[b].conj()
                    + r[(a, b)]
                    - cross
                    - cross_h;
            }
        }
        let normalized = match normalize_covariance(&t) {
            Ok(m) => m,
            Err(_) => return f64::INFINITY,
        };
        (rbar - normalized).norm()
    };

    let g = cfg.bussgang_grid.max(3);
    let rad = cfg.bussgang_radius;
    let nu_candidates: Vec<Option<f64>> = if moving {
        let gn = cfg.bussgang_nu_grid.max(3);
        (0..gn)
            .map(|k| Some(-0.5 + k as f64 / gn as f64))
            .collect()
    } else {
        vec![None]
    };
    let mut best = (f64::INFINITY, C64::new(0.0, 0.0), None::<f64>);
    for nu in &nu_candidates {
        for a in 0..g {
            let re = -rad + 2.0 * rad * a as f64 / (g - 1) as f64;
            for b in 0..g {
                let im = -rad + 2.0 * rad * b as f64 / (g - 1) as f64;
                let alpha = C64::new(re, im);
                let f = model_misfit(alpha, *nu);
                if f < best.0 {
                    best = (f, alpha, *nu);
                }
            }
        }
    }
    // Local polish around the grid winner.
    let step = 2.0 * rad / (g - 1) as f64;
    let (alpha_hat, nu_hat, objective) = if moving {
        let nu0 = best.2.unwrap_or(0.0);
        let x = nelder_mead(
            |x| model_misfit(C64::new(x[0], x[1]), Some(x[2])),
            &[best.1.re, best.1.im, nu0],
            &[step, step, 1.0 / cfg.bussgang_nu_grid.max(3) as f64],
            200,
        );
        let alpha = C64::new(x.0[0], x.0[1]);
        (alpha, x.0[2].clamp(-0.5, 0.5 - 1e-12), x.1)
    } else {
        let x = nelder_mead(
            |x| model_misfit(C64::new(x[0], x[1]), None),
            &[best.1.re, best.1.im],
            &[step, step],
            200,
        );
        (C64::new(x.0[0], x.0[1]), 0.0, x.1)
    };
    Ok((alpha_hat, nu_hat, objective))
}

/// One-snapshot sign covariance and its arcsine-law image.
pub fn bussgang_fit(gamma: &CVector) -> BussgangFit {
    let rgamma = gamma * gamma.adjoint();
    let rbar = arcsine_map(&rgamma);
    BussgangFit { rgamma, rbar }
}

/// Minimal Nelder–Mead polish; returns the best vertex and its value.
fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    scale: &[f64],
    iters: usize,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += scale[i];
        let fv = f(&v);
        simplex.push((v, fv));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let worst = simplex[dim].clone();
        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(v, _)| v[i]).sum::<f64>() / dim as f64)
            .collect();
        let point = |t: f64| -> Vec<f64> {
            (0..dim)
                .map(|i| centroid[i] + t * (centroid[i] - worst.0[i]))
                .collect()
        };
        let refl = point(1.0);
        let f_refl = f(&refl);
        if f_refl < simplex[0].1 {
            let exp = point(2.0);
            let f_exp = f(&exp);
            simplex[dim] = if f_exp < f_refl { (exp, f_exp) } else { (refl, f_refl) };
        } else if f_refl < simplex[dim - 1].1 {
            simplex[dim] = (refl, f_refl);
        } else {
            let contr = point(-0.5);
            let f_contr = f(&contr);
            if f_contr < worst.1 {
                simplex[dim] = (contr, f_contr);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for i in 0..dim {
                        v.0[i] = best[i] + 0.5 * (v.0[i] - best[i]);
                    }
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0].clone()
}

/// Exact 1-D minimizer of a quadratic via three-point parabola fit; used as
/// an independent oracle against the closed-form MMF estimate.
#[cfg(test)]
fn parabola_vertex(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let (fm, f0, fp) = (f(x - h), f(x), f(x + h));
    let denom = fp - 2.0 * f0 + fm;
    if denom.abs() < 1e-300 {
        return x;
    }
    x - h * (fp - fm) / (2.0 * denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SceneTruth, SequenceKind};
    use crate::sampling;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn white_factor(beta: f64, noise: f64, s: &TransmitSequence) -> CovarianceFactor {
        let m = StationaryInterferenceModel::white(beta, noise, s.len()).unwrap();
        let r = model::stationary_covariance(s, &m).unwrap();
        CovarianceFactor::new(&r).unwrap()
    }

    #[test]
    fn mmf_filter_identity_covariance() {
        let s = TransmitSequence::generate(4, SequenceKind::RandomPhase, 1).unwrap();
        let m = StationaryInterferenceModel::white(0.0, 1.0, 4).unwrap();
        let r = model::stationary_covariance(&s, &m).unwrap();
        let f = CovarianceFactor::new(&r).unwrap();
        let filt = mmf_filter(s.samples(), &f).unwrap();
        for i in 0..4 {
            assert!((filt.w[i] - s.samples()[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn mmf_diag_covariance_hand_value() {
        // N = 2, R = diag(1, 2), s = [1, 1] -> w = [1, 0.5].
        let s = TransmitSequence::new(CVector::from_element(2, C64::new(1.0, 0.0))).unwrap();
        let mut r = CMatrix::identity(2, 2);
        r[(1, 1)] = C64::new(2.0, 0.0);
        let f = CovarianceFactor::new(&r).unwrap();
        let filt = mmf_filter(s.samples(), &f).unwrap();
        assert!((filt.w[0] - C64::new(1.0, 0.0)).norm() < 1e-9);
        assert!((filt.w[1] - C64::new(0.5, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn alpha_estimate_scale_invariant_in_covariance() {
        let s = TransmitSequence::generate(6, SequenceKind::RandomPhase, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = CVector::from_fn(6, |_, _| C64::new(rng.gen(), rng.gen()));
        let m = StationaryInterferenceModel::white(0.1, 0.3, 6).unwrap();
        let r = model::stationary_covariance(&s, &m).unwrap();
        let f1 = CovarianceFactor::new(&r).unwrap();
        let f2 = CovarianceFactor::new(&(&r * C64::new(7.0, 0.0))).unwrap();
        let a1 = mmf_estimate_alpha(&mmf_filter(s.samples(), &f1).unwrap().w, &y, s.samples())
            .unwrap();
        let a2 = mmf_estimate_alpha(&mmf_filter(s.samples(), &f2).unwrap().w, &y, s.samples())
            .unwrap();
        assert!((a1 - a2).norm() < 1e-9);
    }

    #[test]
    fn alpha_exact_when_interference_free() {
        let s = TransmitSequence::generate(5, SequenceKind::QuadraticPhase, 0).unwrap();
        let alpha = C64::new(-0.3, 0.8);
        let y = s.samples() * alpha;
        let f = white_factor(0.1, 0.2, &s);
        let filt = mmf_filter(s.samples(), &f).unwrap();
        let hat = mmf_estimate_alpha(&filt.w, &y, s.samples()).unwrap();
        assert!((hat - alpha).norm() < 1e-12);
    }

    #[test]
    fn alpha_exact_under_orthogonal_interference() {
        let s = TransmitSequence::new(CVector::from_iterator(
            2,
            [C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
        ))
        .unwrap();
        let w = CVector::from_iterator(2, [C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let v = CVector::from_iterator(2, [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
        let alpha = C64::new(0.2, -0.7);
        let y = s.samples() * alpha + v * C64::new(3.0, 1.0);
        let hat = mmf_estimate_alpha(&w, &y, s.samples()).unwrap();
        assert!((hat - alpha).norm() < 1e-12);
    }

    #[test]
    fn mmf_matches_one_dimensional_wls_minimizer() {
        // The closed form must agree with a numeric minimizer of the WLS
        // objective; the objective is quadratic and separable in the real
        // and imaginary parts, so a three-point parabola fit is exact.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let n = rng.gen_range(3..=10);
            let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, rng.gen()).unwrap();
            let f = white_factor(0.1, rng.gen_range(0.05..1.0), &s);
            let y = CVector::from_fn(n, |_, _| {
                C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
            });
            let filt = mmf_filter(s.samples(), &f).unwrap();
            let hat = mmf_estimate_alpha(&filt.w, &y, s.samples()).unwrap();
            let re = parabola_vertex(
                |v| wls_objective(&y, C64::new(v, hat.im), None, &s, &f),
                0.0,
                0.5,
            );
            let im = parabola_vertex(
                |v| wls_objective(&y, C64::new(hat.re, v), None, &s, &f),
                0.0,
                0.5,
            );
            assert!((hat - C64::new(re, im)).norm() < 1e-10, "hat {hat} vs ({re}, {im})");
        }
    }

    #[test]
    fn wls_zero_at_truth_and_euclidean_for_identity() {
        let s = TransmitSequence::generate(4, SequenceKind::RandomPhase, 5).unwrap();
        let alpha = C64::new(0.4, -0.1);
        let y = s.samples() * alpha;
        let m = StationaryInterferenceModel::white(0.0, 1.0, 4).unwrap();
        let r = model::stationary_covariance(&s, &m).unwrap();
        let f = CovarianceFactor::new(&r).unwrap();
        assert!(wls_objective(&y, alpha, None, &s, &f) < 1e-18);
        let y2 = &y + CVector::from_element(4, C64::new(0.3, 0.0));
        let resid = &y2 - s.samples() * alpha;
        assert_relative_eq!(
            wls_objective(&y2, alpha, None, &s, &f),
            resid.norm_squared(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn mse_optimality_of_mmf() {
        // MSE(w) = w^H R w / |w^H s|^2 is minimized by w = R^{-1} s.
        let s = TransmitSequence::generate(8, SequenceKind::RandomPhase, 21).unwrap();
        let m = StationaryInterferenceModel::white(0.1, 0.1, 8).unwrap();
        let r = model::stationary_covariance(&s, &m).unwrap();
        let f = CovarianceFactor::new(&r).unwrap();
        let w_opt = mmf_filter(s.samples(), &f).unwrap().w;
        let mse = |w: &CVector| -> f64 {
            let num = (w.adjoint() * &r * w)[(0, 0)].re;
            let den = (w.adjoint() * s.samples())[(0, 0)].norm_sqr();
            num / den
        };
        let base = mse(&w_opt);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..1000 {
            let w = CVector::from_fn(8, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            if (w.adjoint() * s.samples())[(0, 0)].norm() < 1e-6 {
                continue;
            }
            assert!(mse(&w) >= base - 1e-12);
        }
    }

    #[test]
    fn doppler_g_equals_wls_up_to_constant() {
        // g(nu) = Q~(y, alpha_hat(nu), nu) - y^H R^{-1} y for every nu.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 8;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 40).unwrap();
        let f = white_factor(0.05, 0.3, &s);
        let y = CVector::from_fn(n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let y_quad = (y.adjoint() * f.solve_vec(&y))[(0, 0)].re;
        for _ in 0..100 {
            let nu: f64 = rng.gen_range(-0.5..0.5);
            let signature = composite_signature(&s, Some(nu));
            let w = mmf_filter(&signature, &f).unwrap().w;
            let alpha = mmf_estimate_alpha(&w, &y, &signature).unwrap();
            let g = doppler_objective_g(nu, &y, &w, &s, &f).unwrap();
            let q = wls_objective(&y, alpha, Some(nu), &s, &f);
            assert!((g - (q - y_quad)).abs() < 1e-9 * (1.0 + q.abs()), "nu {nu}");
        }
    }

    #[test]
    fn doppler_g_minimized_at_truth_without_interference() {
        let n = 16;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 50).unwrap();
        let f = white_factor(0.0, 1.0, &s);
        let nu_true = 0.17;
        let y = composite_signature(&s, Some(nu_true)) * C64::new(0.8, -0.2);
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..2000 {
            let nu = -0.5 + k as f64 / 2000.0;
            let signature = composite_signature(&s, Some(nu));
            let w = mmf_filter(&signature, &f).unwrap().w;
            let g = doppler_objective_g(nu, &y, &w, &s, &f).unwrap();
            if g < best.0 {
                best = (g, nu);
            }
        }
        assert!((best.1 - nu_true).abs() < 1e-3, "argmin {}", best.1);
    }

    #[test]
    fn doppler_g_symmetric_for_real_data() {
        let s = TransmitSequence::new(CVector::from_element(5, C64::new(1.0, 0.0))).unwrap();
        let m = StationaryInterferenceModel::white(0.0, 0.7, 5).unwrap();
        let r = model::stationary_covariance(&s, &m).unwrap();
        let f = CovarianceFactor::new(&r).unwrap();
        let y = CVector::from_iterator(
            5,
            [0.4, -1.2, 0.3, 2.0, -0.5].iter().map(|&v| C64::new(v, 0.0)),
        );
        for &nu in &[0.05, 0.13, 0.31, 0.44] {
            let sig_p = composite_signature(&s, Some(nu));
            let sig_m = composite_signature(&s, Some(-nu));
            let wp = mmf_filter(&sig_p, &f).unwrap().w;
            let wm = mmf_filter(&sig_m, &f).unwrap().w;
            let gp = doppler_objective_g(nu, &y, &wp, &s, &f).unwrap();
            let gm = doppler_objective_g(-nu, &y, &wm, &s, &f).unwrap();
            assert!((gp - gm).abs() < 1e-9 * (1.0 + gp.abs()));
        }
    }

    #[test]
    fn doppler_profile_matches_g_shifted() {
        // J(nu) (the fast profile) equals g(nu) + y^H R^{-1} y when the
        // filter is the optimal one at nu.
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let n = 10;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 62).unwrap();
        let f = white_factor(0.1, 0.2, &s);
        let y = CVector::from_fn(n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let y_quad = (y.adjoint() * f.solve_vec(&y))[(0, 0)].re;
        let profile = DopplerProfile::new(&y, &s, &f);
        for _ in 0..50 {
            let nu: f64 = rng.gen_range(-0.5..0.5);
            let signature = composite_signature(&s, Some(nu));
            let w = mmf_filter(&signature, &f).unwrap().w;
            let g = doppler_objective_g(nu, &y, &w, &s, &f).unwrap();
            assert!(
                (profile.eval(nu) - (g + y_quad)).abs() < 1e-8 * (1.0 + y_quad.abs()),
                "nu {nu}"
            );
        }
    }

    #[test]
    fn stationary_pipeline_tracking_thresholds_recover_target() {
        // Noise-free, clutter-free scene with thresholds at the true signal:
        // the QP pins y to the truth and the estimate is exact.
        let n = 16;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 70).unwrap();
        let m = StationaryInterferenceModel::white(0.01, 0.01, n).unwrap();
        let alpha = C64::new(0.5, 0.5);
        let y = s.samples() * alpha;
        let lambda = s.samples() * alpha;
        let obs = sampling::quantize_one_bit(&y, &lambda).unwrap();
        let est = estimate_stationary(&s, &m, &obs, &EstimatorConfig::default()).unwrap();
        assert!((est.alpha_hat - alpha).norm() < 1e-6, "got {}", est.alpha_hat);
    }

    #[test]
    fn stationary_pipeline_beats_zero_thresholds() {
        // Thresholds near the true signal carry more information than
        // zero thresholds; compare median errors over a few seeds.
        let n = 24;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 71).unwrap();
        let m = StationaryInterferenceModel::white(0.1, 0.1, n).unwrap();
        let im = InterferenceModel::Stationary(m.clone());
        let alpha = C64::new(0.5, 0.5);
        let cfg = EstimatorConfig::default();
        let mut err_track = Vec::new();
        let mut err_zero = Vec::new();
        for seed in 0..15 {
            let scene = model::synthesize_scene(
                &s,
                SceneTruth { alpha0: alpha, nu: 0.0 },
                &im,
                1000 + seed,
            )
            .unwrap();
            let lambda = sampling::design_threshold_mean(&s, alpha);
            let obs = sampling::quantize_one_bit(&scene.y, &lambda).unwrap();
            let est = estimate_stationary(&s, &m, &obs, &cfg).unwrap();
            err_track.push((est.alpha_hat - alpha).norm() / alpha.norm());
            let obs0 = sampling::quantize_one_bit(&scene.y, &CVector::zeros(n)).unwrap();
            let est0 = estimate_stationary(&s, &m, &obs0, &cfg).unwrap();
            err_zero.push((est0.alpha_hat - alpha).norm() / alpha.norm());
        }
        let med = |v: &mut Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        assert!(
            med(&mut err_track) < med(&mut err_zero),
            "tracking {err_track:?} vs zero {err_zero:?}"
        );
    }

    #[test]
    fn full_precision_bypass_matches_plain_mmf() {
        let n = 12;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 72).unwrap();
        let m = StationaryInterferenceModel::white(0.1, 0.1, n).unwrap();
        let im = InterferenceModel::Stationary(m.clone());
        let scene = model::synthesize_scene(
            &s,
            SceneTruth { alpha0: C64::new(0.3, -0.9), nu: 0.0 },
            &im,
            4,
        )
        .unwrap();
        let est = estimate_full_precision(&s, &im, &scene.y, &EstimatorConfig::default()).unwrap();
        let r = model::stationary_covariance(&s, &m).unwrap();
        let f = CovarianceFactor::new(&r).unwrap();
        let w = mmf_filter(s.samples(), &f).unwrap().w;
        let direct = mmf_estimate_alpha(&w, &scene.y, s.samples()).unwrap();
        assert!((est.alpha_hat - direct).norm() < 1e-12);
        assert_eq!(est.y_hat, scene.y);
    }

    #[test]
    fn full_precision_exact_in_clean_limit() {
        let n = 10;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 73).unwrap();
        let m = StationaryInterferenceModel::white(0.0, 1e-12, n).unwrap();
        let im = InterferenceModel::Stationary(m);
        let alpha = C64::new(-0.4, 0.6);
        let y = s.samples() * alpha;
        let est = estimate_full_precision(&s, &im, &y, &EstimatorConfig::default()).unwrap();
        assert!((est.alpha_hat - alpha).norm() < 1e-9);
    }

    #[test]
    fn moving_pipeline_degenerate_doppler_matches_stationary() {
        let n = 16;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 74).unwrap();
        // Clutter-free moving model: pure white noise.
        let m = MovingClutterModel::uniform(1, 1, 0.0, 0.0, 0.05, n).unwrap();
        let alpha = C64::new(0.5, 0.5);
        let y = s.samples() * alpha;
        let lambda = s.samples() * (alpha * 0.95);
        let obs = sampling::quantize_one_bit(&y, &lambda).unwrap();
        let (est, trace) = estimate_moving_traced(&s, &m, &obs, &EstimatorConfig::default()).unwrap();
        assert!(est.nu_hat.abs() < 2e-3, "nu_hat {}", est.nu_hat);
        assert!((est.alpha_hat - alpha).norm() < 0.1, "alpha {}", est.alpha_hat);
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "trace {trace:?}");
        }
    }

    #[test]
    fn moving_pipeline_objective_nonincreasing() {
        let n = 20;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 75).unwrap();
        let m = MovingClutterModel::uniform(2, 10, 0.1, 0.2, 0.1, n).unwrap();
        let im = InterferenceModel::Moving(m.clone());
        let cfg = EstimatorConfig::default();
        for seed in 0..10 {
            let scene = model::synthesize_scene(
                &s,
                SceneTruth { alpha0: C64::new(0.9, -0.3), nu: 0.21 },
                &im,
                500 + seed,
            )
            .unwrap();
            let r = im.covariance(&s).unwrap();
            let prior = sampling::NuPrior::Uniform { lo: -0.4, hi: 0.4 };
            let lambdas = sampling::design_threshold_random(
                &s,
                C64::new(0.0, 0.0),
                1.0,
                &r,
                1,
                Some(&prior),
                900 + seed,
            )
            .unwrap();
            let obs = sampling::quantize_one_bit(&scene.y, &lambdas[0]).unwrap();
            let (_, trace) = estimate_moving_traced(&s, &m, &obs, &cfg).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-10, "seed {seed}: {trace:?}");
            }
            assert!(trace.len() <= cfg.max_cycles);
        }
    }

    #[test]
    fn arcsine_entry_example() {
        let rg = CMatrix::from_element(1, 1, C64::new(2.0 / 3.0, 0.0));
        let rb = arcsine_map(&rg);
        assert_relative_eq!(rb[(0, 0)].re, (std::f64::consts::PI / 3.0).sin(), epsilon = 1e-12);
        assert_relative_eq!(rb[(0, 0)].re, 3.0f64.sqrt() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn arcsine_law_monte_carlo() {
        // Bivariate real Gaussian with correlation 0.5: the sign products
        // average to (2/pi) asin(0.5) = 1/3.
        use rand_distr::{Distribution, StandardNormal};
        let rho: f64 = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let mut acc = 0.0f64;
        let trials = 1_000_000;
        for _ in 0..trials {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let x = a;
            let y = rho * a + (1.0 - rho * rho).sqrt() * b;
            acc += (crate::sampling::sign(x) * crate::sampling::sign(y)) as f64;
        }
        let emp = acc / trials as f64;
        assert!((emp - 1.0 / 3.0).abs() < 0.01, "empirical {emp}");
    }

    #[test]
    fn bussgang_normalization_unit_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = CMatrix::from_fn(5, 5, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let m = &a * a.adjoint() + CMatrix::identity(5, 5) * C64::new(0.1, 0.0);
        let norm = normalize_covariance(&m).unwrap();
        for i in 0..5 {
            assert!((norm[(i, i)].re - 1.0).abs() < 1e-9);
            assert!(norm[(i, i)].im.abs() < 1e-9);
        }
    }

    #[test]
    fn bussgang_grid_finds_truth_on_exact_data() {
        // Consistency oracle: feed the fit the exact normalized model
        // covariance at the truth (what the arcsine map recovers in
        // expectation); the misfit there is zero, so the search must land
        // within one grid cell and polish onto the truth.
        let n = 16;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 80).unwrap();
        let m = StationaryInterferenceModel::white(0.0, 0.5, n).unwrap();
        let r = model::stationary_covariance(&s, &m).unwrap();
        let alpha = C64::new(0.5, 0.5);
        let lambdas = sampling::design_threshold_random(
            &s,
            alpha,
            alpha.norm_sqr(),
            &r,
            1,
            None,
            81,
        )
        .unwrap();
        let lambda = &lambdas[0];
        let mut t = CMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let sa = s.samples()[a];
                let sb = s.samples()[b];
                let cross = alpha * sa * lambda[b].conj();
                let cross_h = (alpha * sb * lambda[a].conj()).conj();
                t[(a, b)] = sa * sb.conj() * alpha.norm_sqr() + lambda[a] * lambda[b].conj()
                    + r[(a, b)]
                    - cross
                    - cross_h;
            }
        }
        let rbar = normalize_covariance(&t).unwrap();
        let (alpha_hat, _, misfit) =
            bussgang_search(&s, &r, &rbar, lambda, false, &EstimatorConfig::default()).unwrap();
        let cell = 6.0 / 100.0;
        assert!((alpha_hat - alpha).norm() < cell, "got {alpha_hat}");
        assert!(misfit < 1e-6, "misfit {misfit}");
    }

    #[test]
    fn bussgang_single_snapshot_runs_end_to_end() {
        // One quantized snapshot: the fit is statistically crude, so only a
        // loose accuracy band is asserted.
        let n = 64;
        let s = TransmitSequence::generate(n, SequenceKind::RandomPhase, 80).unwrap();
        let m = StationaryInterferenceModel::white(0.0, 0.5, n).unwrap();
        let r = model::stationary_covariance(&s, &m).unwrap();
        let alpha = C64::new(0.5, 0.5);
        let y = s.samples() * alpha;
        let lambdas = sampling::design_threshold_random(
            &s,
            alpha,
            alpha.norm_sqr(),
            &r,
            1,
            None,
            81,
        )
        .unwrap();
        let obs = sampling::quantize_one_bit(&y, &lambdas[0]).unwrap();
        let est = estimate_bussgang(&s, &r, &obs, &lambdas[0], false, &EstimatorConfig::default())
            .unwrap();
        assert!(est.alpha_hat.norm() < 3.0);
        assert!(
            (est.alpha_hat - alpha).norm() < 1.0,
            "got {}",
            est.alpha_hat
        );
    }

    #[test]
    fn estimate_record_serializes_flat() {
        let est = TargetEstimate {
            method: Method::Proposed,
            alpha_hat: C64::new(0.25, -0.5),
            nu_hat: 0.125,
            y_hat: CVector::zeros(2),
            objective: 1.5,
            cycles: 3,
            solver_status: SolveStatus::Optimal,
        };
        let json = serde_json::to_string(&est.record()).unwrap();
        assert!(json.contains("\"method\":\"proposed\""), "{json}");
        assert!(json.contains("\"alphaHat\":[0.25,-0.5]"), "{json}");
        assert!(json.contains("\"solverStatus\":\"optimal\""), "{json}");
    }
}
