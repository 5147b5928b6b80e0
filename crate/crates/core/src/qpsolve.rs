//! Sign- and interval-constrained convex quadratic programs for recovering
//! the unquantized received signal from comparator outputs.
//!
//! The complex program `min_y y^H B^H R^-1 B y` subject to per-sample sign
//! (or interval) constraints is embedded into `R^{2N}` by stacking real and
//! imaginary parts. Every constraint acts on a single coordinate, so the
//! feasible set reduces to a box; the solver is an active-set method that
//! identifies the active face with projected-gradient steps and minimizes on
//! it with conjugate gradients, plus an accelerated projected-gradient
//! fallback for large instances.

use crate::error::{RadarError, Result};
use crate::linalg::CovarianceFactor;
use crate::model::{self, TransmitSequence};
use crate::sampling::QuantizedObservation;
use crate::{C64, CMatrix, CVector};

/// One halfspace `sign * (x[index] - threshold) >= 0` on a real-embedded
/// coordinate (indices `0..N` are real parts, `N..2N` imaginary parts).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfspaceConstraint {
    pub sign: i8,
    pub index: usize,
    pub threshold: f64,
}

/// Solver status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    InfeasibleInput,
}

/// Solver backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Backend {
    /// Pick [`Backend::ActiveSet`] below 512 complex samples, else
    /// [`Backend::ProjectedGradient`].
    Auto,
    ActiveSet,
    ProjectedGradient,
}

/// The real-embedded quadratic program with per-coordinate constraints.
#[derive(Debug, Clone)]
pub struct SignConstrainedQP {
    /// Complex dimension `N`.
    n: usize,
    /// `B^H R^{-1} B`, Hermitian PSD.
    h: CMatrix,
    /// Coordinate bounds derived from the constraints (`-inf`/`+inf` = free).
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Real embedding of the mean threshold; ridge center.
    center: Vec<f64>,
    /// Ridge weight `eps_reg` on `||x - center||^2`.
    ridge: f64,
    constraints: Vec<HalfspaceConstraint>,
}

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub struct QPSolution {
    /// Real-embedded solution.
    pub x: Vec<f64>,
    /// The same point reassembled as a complex vector.
    pub y: CVector,
    /// Ridged objective value at `x`.
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl SignConstrainedQP {
    /// Builds a QP from explicit parts; used by tests and the debug dump.
    /// Validates that `h` is Hermitian PSD.
    pub fn from_parts(
        h: CMatrix,
        constraints: Vec<HalfspaceConstraint>,
        center: Vec<f64>,
        ridge: f64,
    ) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n {
            return Err(RadarError::InvalidArgument("quadratic form must be square".into()));
        }
        if center.len() != 2 * n {
            return Err(RadarError::InvalidArgument(
                "center must have the real-embedded dimension".into(),
            ));
        }
        if crate::linalg::hermitian_defect(&h) > 1e-9 * (1.0 + h.norm()) {
            return Err(RadarError::InvalidArgument("quadratic form must be Hermitian".into()));
        }
        if crate::linalg::min_eigenvalue(&h) < -1e-10 {
            return Err(RadarError::InvalidArgument(
                "quadratic form must be positive semidefinite".into(),
            ));
        }
        if ridge < 0.0 {
            return Err(RadarError::InvalidArgument("ridge must be nonnegative".into()));
        }
        for c in &constraints {
            if c.index >= 2 * n {
                return Err(RadarError::InvalidArgument("constraint index out of range".into()));
            }
        }
        let (lower, upper) = reduce_to_box(2 * n, &constraints);
        Ok(Self {
            n,
            h,
            lower,
            upper,
            center,
            ridge,
            constraints,
        })
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn with_center(mut self, center: Vec<f64>) -> Result<Self> {
        if center.len() != 2 * self.n {
            return Err(RadarError::InvalidArgument(
                "center must have the real-embedded dimension".into(),
            ));
        }
        self.center = center;
        Ok(self)
    }

    pub fn complex_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn constraints(&self) -> &[HalfspaceConstraint] {
        &self.constraints
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    /// Ridge center (real embedding of the mean threshold).
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// `M x` where `M` is the real embedding of `h`.
    fn apply_m(&self, x: &[f64]) -> Vec<f64> {
        let y = complex_from_real(x, self.n);
        let z = &self.h * y;
        real_from_complex(&z)
    }

    fn apply_q(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.apply_m(x);
        for i in 0..x.len() {
            out[i] += self.ridge * x[i];
        }
        out
    }

    /// Ridged objective `x^T M x + ridge ||x - center||^2`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let mx = self.apply_m(x);
        let quad: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
        let ridge_term: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum();
        quad + self.ridge * ridge_term
    }

    /// Unridged quadratic form `y^H (B^H R^-1 B) y` at a complex point.
    pub fn objective_unridged(&self, y: &CVector) -> f64 {
        (y.adjoint() * &self.h * y)[(0, 0)].re
    }

    /// Gradient of the ridged objective.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.apply_q(x);
        for i in 0..x.len() {
            g[i] = 2.0 * (g[i] - self.ridge * self.center[i]);
        }
        g
    }

    fn clamp(&self, x: &mut [f64]) {
        for i in 0..x.len() {
            x[i] = x[i].max(self.lower[i]).min(self.upper[i]);
        }
    }

    fn box_infeasible(&self) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .any(|(&l, &u)| l > u)
    }
}

fn reduce_to_box(dim: usize, constraints: &[HalfspaceConstraint]) -> (Vec<f64>, Vec<f64>) {
    let mut lower = vec![f64::NEG_INFINITY; dim];
    let mut upper = vec![f64::INFINITY; dim];
    for c in constraints {
        if c.sign >= 0 {
            lower[c.index] = lower[c.index].max(c.threshold);
        } else {
            upper[c.index] = upper[c.index].min(c.threshold);
        }
    }
    (lower, upper)
}

fn complex_from_real(x: &[f64], n: usize) -> CVector {
    CVector::from_fn(n, |i, _| C64::new(x[i], x[n + i]))
}

fn real_from_complex(y: &CVector) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; 2 * n];
    for i in 0..n {
        out[i] = y[i].re;
        out[n + i] = y[i].im;
    }
    out
}

/// Real embedding of a complex vector: `[Re; Im]`.
pub fn real_embed(y: &CVector) -> Vec<f64> {
    real_from_complex(y)
}

/// Inverse of [`real_embed`].
pub fn complex_assemble(x: &[f64]) -> CVector {
    complex_from_real(x, x.len() / 2)
}

/// Assembles the recovery QP for an observation: quadratic form
/// `B^H R^{-1} B` with `B = I - s~ w^H / (w^H s~)` and one halfspace per sign
/// bit per channel (interval constraints for p-bit observations).
pub fn build_recovery_qp(
    s: &TransmitSequence,
    w: &CVector,
    factor: &CovarianceFactor,
    obs: &QuantizedObservation,
    nu: Option<f64>,
) -> Result<SignConstrainedQP> {
    let n = s.len();
    if w.len() != n || factor.dim() != n || obs.len() != n {
        return Err(RadarError::InvalidArgument(
            "sequence, filter, covariance, and observation dimensions must agree".into(),
        ));
    }
    let signature = match nu {
        Some(nu) => {
            let p = model::steering_vector(nu, n);
            CVector::from_fn(n, |i, _| s.samples()[i] * p[i])
        }
        None => s.samples().clone(),
    };
    let denom = (w.adjoint() * &signature)[(0, 0)];
    if denom.norm() < 1e-12 {
        return Err(RadarError::DegenerateFilter);
    }
    let b = CMatrix::identity(n, n) - &signature * w.adjoint() / denom;
    let r_inv = factor.inverse();
    let h = b.adjoint() * r_inv * &b;

    let mut constraints = Vec::new();
    if let Some(buckets) = &obs.buckets {
        let (levels_re, levels_im) = match &obs.thresholds {
            crate::sampling::ThresholdBank::PBit {
                levels_re,
                levels_im,
            } => (levels_re, levels_im),
            _ => {
                return Err(RadarError::InvalidArgument(
                    "bucketed observation without p-bit thresholds".into(),
                ))
            }
        };
        let bound = |levels: &Vec<f64>, k: usize| -> (f64, f64) {
            let lo = if k == 0 { f64::NEG_INFINITY } else { levels[k - 1] };
            let hi = if k >= levels.len() { f64::INFINITY } else { levels[k] };
            (lo, hi)
        };
        for i in 0..n {
            let (lo, hi) = bound(&levels_re[i], buckets.re[i]);
            constraints.push(HalfspaceConstraint { sign: 1, index: i, threshold: lo });
            constraints.push(HalfspaceConstraint { sign: -1, index: i, threshold: hi });
            let (lo, hi) = bound(&levels_im[i], buckets.im[i]);
            constraints.push(HalfspaceConstraint { sign: 1, index: n + i, threshold: lo });
            constraints.push(HalfspaceConstraint { sign: -1, index: n + i, threshold: hi });
        }
    } else {
        let lambdas: Vec<&CVector> = match &obs.thresholds {
            crate::sampling::ThresholdBank::Single(v) => vec![v],
            crate::sampling::ThresholdBank::Parallel(banks) => banks.iter().collect(),
            crate::sampling::ThresholdBank::PBit { .. } => {
                return Err(RadarError::InvalidArgument(
                    "p-bit thresholds without bucket indices".into(),
                ))
            }
        };
        if lambdas.len() != obs.channels.len() {
            return Err(RadarError::InvalidArgument(
                "comparator count does not match threshold bank".into(),
            ));
        }
        for (ch, lambda) in obs.channels.iter().zip(&lambdas) {
            for i in 0..n {
                constraints.push(HalfspaceConstraint {
                    sign: ch.gamma_r[i],
                    index: i,
                    threshold: lambda[i].re,
                });
                constraints.push(HalfspaceConstraint {
                    sign: ch.gamma_i[i],
                    index: n + i,
                    threshold: lambda[i].im,
                });
            }
        }
    }

    let ridge = 1e-6 * factor.inverse_trace() / n as f64;
    let center = real_from_complex(&obs.thresholds.mean_threshold());
    let (lower, upper) = reduce_to_box(2 * n, &constraints);
    Ok(SignConstrainedQP {
        n,
        h,
        lower,
        upper,
        center,
        ridge,
        constraints,
    })
}

/// KKT residual pieces at a point: projected-gradient stationarity,
/// feasibility violation, and complementary-slackness violation.
fn kkt_pieces(qp: &SignConstrainedQP, x: &[f64], g: &[f64]) -> (f64, f64, f64) {
    let act = 1e-12;
    let mut stat = 0.0f64;
    let mut feas = 0.0f64;
    let mut cs = 0.0f64;
    for i in 0..x.len() {
        let lo = qp.lower[i];
        let hi = qp.upper[i];
        feas = feas.max(lo - x[i]).max(x[i] - hi);
        let at_lower = lo.is_finite() && x[i] - lo <= act * (1.0 + lo.abs());
        let at_upper = hi.is_finite() && hi - x[i] <= act * (1.0 + hi.abs());
        let pg = if at_lower && at_upper {
            0.0
        } else if at_lower {
            g[i].min(0.0)
        } else if at_upper {
            g[i].max(0.0)
        } else {
            g[i]
        };
        stat = stat.max(pg.abs());
        if !(at_lower || at_upper) {
            let slack = (x[i] - lo).min(hi - x[i]).min(1.0).max(0.0);
            cs = cs.max(g[i].abs() * slack);
        }
    }
    (stat, feas.max(0.0), cs)
}

/// Maximum of stationarity, feasibility, and complementary-slackness
/// residuals at `x`.
pub fn kkt_check(qp: &SignConstrainedQP, x: &[f64]) -> Result<f64> {
    if x.len() != qp.dim() {
        return Err(RadarError::InvalidArgument("point has wrong dimension".into()));
    }
    let g = qp.gradient(x);
    let (stat, feas, cs) = kkt_pieces(qp, x, &g);
    Ok(stat.max(feas).max(cs))
}

/// Solves the QP with default start point (the ridge center projected onto
/// the feasible box).
pub fn solve(qp: &SignConstrainedQP, tol: f64, max_iter: usize) -> QPSolution {
    solve_with(qp, tol, max_iter, Backend::Auto, None)
}

/// Full-control solve: backend choice and warm start.
pub fn solve_with(
    qp: &SignConstrainedQP,
    tol: f64,
    max_iter: usize,
    backend: Backend,
    warm: Option<&[f64]>,
) -> QPSolution {
    if qp.box_infeasible() {
        return QPSolution {
            x: qp.center.clone(),
            y: complex_from_real(&qp.center, qp.n),
            objective: f64::NAN,
            kkt_residual: f64::INFINITY,
            iterations: 0,
            status: SolveStatus::InfeasibleInput,
        };
    }
    let mut x = warm
        .map(|w| w.to_vec())
        .unwrap_or_else(|| qp.center.clone());
    qp.clamp(&mut x);
    let backend = match backend {
        Backend::Auto => {
            if qp.n >= 512 {
                Backend::ProjectedGradient
            } else {
                Backend::ActiveSet
            }
        }
        other => other,
    };
    let (x, iterations, status) = match backend {
        Backend::ActiveSet => active_set_solve(qp, x, tol, max_iter),
        Backend::ProjectedGradient => projected_gradient_solve(qp, x, tol, max_iter),
        Backend::Auto => unreachable!(),
    };
    let g = qp.gradient(&x);
    let (stat, feas, cs) = kkt_pieces(qp, &x, &g);
    QPSolution {
        objective: qp.objective(&x),
        kkt_residual: stat.max(feas).max(cs),
        y: complex_from_real(&x, qp.n),
        x,
        iterations,
        status,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient-projection active-set solver: projected steepest-descent steps
/// locate the active face, conjugate gradients minimize on it exactly.
fn active_set_solve(
    qp: &SignConstrainedQP,
    mut x: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize, SolveStatus) {
    let dim = qp.dim();
    let mut iters = 0usize;
    loop {
        let g = qp.gradient(&x);
        let (stat, feas, cs) = kkt_pieces(qp, &x, &g);
        if stat.max(feas).max(cs) <= tol {
            return (x, iters, SolveStatus::Optimal);
        }
        if iters >= max_iter {
            return (x, iters, SolveStatus::MaxIter);
        }
        iters += 1;

        // Projected steepest-descent step with the exact unconstrained step
        // length, halved until the objective decreases.
        let qg = qp.apply_q(&g);
        let gqg = dot(&g, &qg);
        let gg = dot(&g, &g);
        let mut t = if gqg > 0.0 { gg / (2.0 * gqg) } else { 1.0 };
        let f0 = qp.objective(&x);
        let mut stepped = false;
        for _ in 0..60 {
            let mut trial = x.clone();
            for i in 0..dim {
                trial[i] -= t * g[i];
            }
            qp.clamp(&mut trial);
            if qp.objective(&trial) <= f0 {
                x = trial;
                stepped = true;
                break;
            }
            t *= 0.5;
        }
        if !stepped {
            // No descent representable at this scale; report best effort.
            let g = qp.gradient(&x);
            let (stat, feas, cs) = kkt_pieces(qp, &x, &g);
            let status = if stat.max(feas).max(cs) <= tol {
                SolveStatus::Optimal
            } else {
                SolveStatus::MaxIter
            };
            return (x, iters, status);
        }

        // Newton step on the current face via CG, truncated at the box.
        let free: Vec<usize> = (0..dim)
            .filter(|&i| x[i] > qp.lower[i] && x[i] < qp.upper[i])
            .collect();
        if free.is_empty() {
            continue;
        }
        let g = qp.gradient(&x);
        let step = face_newton_cg(qp, &free, &g, tol);
        if let Some(d) = step {
            // Largest step inside the box along d.
            let mut alpha: f64 = 1.0;
            let mut hit = None;
            for (pos, &i) in free.iter().enumerate() {
                let di = d[pos];
                if di > 0.0 && qp.upper[i].is_finite() {
                    let a = (qp.upper[i] - x[i]) / di;
                    if a < alpha {
                        alpha = a;
                        hit = Some((i, qp.upper[i]));
                    }
                } else if di < 0.0 && qp.lower[i].is_finite() {
                    let a = (qp.lower[i] - x[i]) / di;
                    if a < alpha {
                        alpha = a;
                        hit = Some((i, qp.lower[i]));
                    }
                }
            }
            for (pos, &i) in free.iter().enumerate() {
                x[i] += alpha * d[pos];
            }
            if let Some((i, bound)) = hit {
                x[i] = bound;
            }
            qp.clamp(&mut x);
        }
    }
}

/// Solves `Q_FF d = -g_F / 2` by conjugate gradients (the Newton step
/// restricted to the free face).
fn face_newton_cg(
    qp: &SignConstrainedQP,
    free: &[usize],
    g: &[f64],
    tol: f64,
) -> Option<Vec<f64>> {
    let m = free.len();
    let dim = qp.dim();
    let rhs: Vec<f64> = free.iter().map(|&i| -g[i] / 2.0).collect();
    let rhs_norm = rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if rhs_norm == 0.0 {
        return None;
    }
    let apply = |v: &[f64]| -> Vec<f64> {
        let mut full = vec![0.0; dim];
        for (pos, &i) in free.iter().enumerate() {
            full[i] = v[pos];
        }
        let out = qp.apply_q(&full);
        free.iter().map(|&i| out[i]).collect()
    };
    let mut d = vec![0.0; m];
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = (tol * 0.02).max(1e-16) * (1.0 + rhs_norm);
    for _ in 0..(2 * m + 10) {
        if rr.sqrt() <= target {
            break;
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..m {
            d[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..m {
            p[i] = r[i] + beta * p[i];
        }
    }
    Some(d)
}

/// Nesterov-accelerated projected gradient with function restarts.
fn projected_gradient_solve(
    qp: &SignConstrainedQP,
    mut x: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize, SolveStatus) {
    let dim = qp.dim();
    // Lipschitz constant of the gradient: 2 * lambda_max(Q), via power iteration.
    let mut v = vec![1.0; dim];
    let mut lam = 1.0;
    for _ in 0..30 {
        let qv = qp.apply_q(&v);
        lam = dot(&qv, &qv).sqrt() / dot(&v, &v).sqrt().max(1e-300);
        let norm = qv.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
        v = qv.iter().map(|a| a / norm).collect();
    }
    let lip = (2.0 * lam).max(1e-12);
    let step = 1.0 / lip;

    let mut z = x.clone();
    let mut theta = 1.0f64;
    let mut f_prev = qp.objective(&x);
    for k in 0..max_iter {
        let g = qp.gradient(&z);
        let mut x_new: Vec<f64> = (0..dim).map(|i| z[i] - step * g[i]).collect();
        qp.clamp(&mut x_new);
        let f_new = qp.objective(&x_new);
        if f_new > f_prev {
            // Restart momentum from the last good point.
            z = x.clone();
            theta = 1.0;
            let g = qp.gradient(&z);
            let mut xr: Vec<f64> = (0..dim).map(|i| z[i] - step * g[i]).collect();
            qp.clamp(&mut xr);
            x_new = xr;
        }
        let theta_new = (1.0 + (1.0 + 4.0 * theta * theta).sqrt()) / 2.0;
        let momentum = (theta - 1.0) / theta_new;
        z = (0..dim)
            .map(|i| x_new[i] + momentum * (x_new[i] - x[i]))
            .collect();
        theta = theta_new;
        f_prev = qp.objective(&x_new);
        x = x_new;
        if k % 10 == 0 {
            let g = qp.gradient(&x);
            let (stat, feas, cs) = kkt_pieces(qp, &x, &g);
            if stat.max(feas).max(cs) <= tol {
                return (x, k + 1, SolveStatus::Optimal);
            }
        }
    }
    let g = qp.gradient(&x);
    let (stat, feas, cs) = kkt_pieces(qp, &x, &g);
    let status = if stat.max(feas).max(cs) <= tol {
        SolveStatus::Optimal
    } else {
        SolveStatus::MaxIter
    };
    (x, max_iter, status)
}

/// Writes a debug dump of a QP instance: dimensions, quadratic form as CSV,
/// and constraint triplets.
pub fn dump_qp(qp: &SignConstrainedQP, path: &std::path::Path) -> Result<()> {
    use std::io::Write;
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "n {}", qp.n)?;
    writeln!(f, "ridge {}", qp.ridge)?;
    for a in 0..qp.n {
        let row: Vec<String> = (0..qp.n)
            .map(|b| format!("{} {}", qp.h[(a, b)].re, qp.h[(a, b)].im))
            .collect();
        writeln!(f, "{}", row.join(";"))?;
    }
    for c in &qp.constraints {
        writeln!(f, "{} {} {}", c.sign, c.index, c.threshold)?;
    }
    Ok(())
}
