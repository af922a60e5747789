//! Proximal mapping and Moreau envelope of `Φ = F + δ_X`, and the Lyapunov functions
//! `Λ = Φ_{1/ρ}(x) − F*` and `Λ^HB = F(x) − F* + (η/β)‖g − ∇F(x)‖²`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{HiddenConvexProblem, ImageGeometry};

/// Inner iteration budget of the prox solvers.
pub const INNER_BUDGET: usize = 1_000_000;
pub const DEFAULT_INNER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProxResult {
    pub x_hat: Vec<f64>,
    /// `Φ_{1/ρ}(x) = F(x̂) + (ρ/2)‖x̂ − x‖²`.
    pub envelope_value: f64,
    /// `‖x̂ − Π_X(x − ∇F(x̂)/ρ)‖`.
    pub fixed_point_residual: f64,
    /// Certified bound on `‖x̂ − prox(x)‖`.
    pub certified_distance: f64,
    pub inner_iters: usize,
}

/// `prox_{Φ/ρ}(x)` to certified accuracy `inner_tol`.
///
/// Smooth problems use projected gradient with step `1/(ρ+L)`; the gradient mapping `G`
/// certifies `‖y − y*‖ ≤ 2‖G‖/(ρ−ℓ)`. Non-smooth problems use projected subgradient with
/// steps `2/((ρ−ℓ)(k+2))` and weighted averaging; the averaged strongly convex minorant
/// gives a lower bound `m` and the certificate `sqrt(2(φ(ȳ) − m)/(ρ−ℓ))`.
pub fn prox(problem: &HiddenConvexProblem, x: &[f64], rho: f64, inner_tol: f64) -> Result<ProxResult> {
    problem.set().check_membership(x)?;
    let ell = problem.constants().ell;
    if !(rho > ell && rho.is_finite()) {
        return Err(Error::Domain(format!("rho = {rho} must exceed ell = {ell}")));
    }
    if !(inner_tol > 0.0) {
        return Err(Error::Domain(format!("inner_tol must be positive, got {inner_tol}")));
    }
    let (x_hat, certified_distance, inner_iters) = if problem.is_smooth() {
        prox_smooth(problem, x, rho, inner_tol)?
    } else {
        prox_nonsmooth(problem, x, rho, inner_tol)?
    };
    let model = problem.model();
    let envelope_value = model.objective(&x_hat) + 0.5 * rho * linalg::dist_sq(&x_hat, x);
    let fixed_point_residual = fixed_point_residual(problem, x, &x_hat, rho, 1.0 / rho);
    Ok(ProxResult { x_hat, envelope_value, fixed_point_residual, certified_distance, inner_iters })
}

/// `‖x̂ − Π_X(ηρx − η∇F(x̂) + (1 − ηρ)x̂)‖`.
pub fn fixed_point_residual(problem: &HiddenConvexProblem, x: &[f64], x_hat: &[f64], rho: f64, eta: f64) -> f64 {
    let d = x.len();
    let mut g = vec![0.0; d];
    problem.model().gradient(x_hat, &mut g);
    let mut y: Vec<f64> = (0..d).map(|i| eta * rho * x[i] - eta * g[i] + (1.0 - eta * rho) * x_hat[i]).collect();
    problem.set().project_in_place(&mut y);
    linalg::dist(x_hat, &y)
}

fn prox_smooth(problem: &HiddenConvexProblem, x: &[f64], rho: f64, tol: f64) -> Result<(Vec<f64>, f64, usize)> {
    let model = problem.model();
    let set = problem.set();
    let l = problem.constants().require_l()?;
    let mu = rho - problem.constants().ell;
    let step = 1.0 / (rho + l);
    let d = x.len();
    let mut y = x.to_vec();
    let mut next = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut best = f64::INFINITY;
    for k in 0..INNER_BUDGET {
        model.gradient(&y, &mut g);
        for i in 0..d {
            next[i] = y[i] - step * (g[i] + rho * (y[i] - x[i]));
        }
        set.project_in_place(&mut next);
        let cert = 2.0 * linalg::dist(&y, &next) / step / mu;
        best = best.min(cert);
        // the step is nonexpansive towards the solution, so the certificate also covers `next`
        std::mem::swap(&mut y, &mut next);
        if cert <= tol {
            return Ok((y, cert, k + 1));
        }
    }
    Err(Error::ConvergenceFailure { iterations: INNER_BUDGET, best_residual: best })
}

fn prox_nonsmooth(problem: &HiddenConvexProblem, x: &[f64], rho: f64, tol: f64) -> Result<(Vec<f64>, f64, usize)> {
    let model = problem.model();
    let set = problem.set();
    let mu = rho - problem.constants().ell;
    let d = x.len();
    let phi = |y: &[f64]| model.objective(y) + 0.5 * rho * linalg::dist_sq(y, x);

    let mut y = x.to_vec();
    let mut s = vec![0.0; d];
    let mut w_sum = 0.0;
    let mut y_avg = vec![0.0; d];
    let mut v_avg = vec![0.0; d];
    let mut a_avg = 0.0;
    let mut best = f64::INFINITY;
    for k in 0..INNER_BUDGET {
        model.gradient(&y, &mut s);
        for i in 0..d {
            s[i] += rho * (y[i] - x[i]);
        }
        // fold the minorant and the iterate into the weighted averages
        let w = (k + 1) as f64;
        w_sum += w;
        let r = w / w_sum;
        let a_k = phi(&y) - linalg::dot(&s, &y) + 0.5 * mu * linalg::dot(&y, &y);
        a_avg += r * (a_k - a_avg);
        for i in 0..d {
            y_avg[i] += r * (y[i] - y_avg[i]);
            v_avg[i] += r * (s[i] - mu * y[i] - v_avg[i]);
        }
        if k % 64 == 63 || k + 1 == INNER_BUDGET {
            let mut z: Vec<f64> = v_avg.iter().map(|v| -v / mu).collect();
            set.project_in_place(&mut z);
            let lower = a_avg + linalg::dot(&v_avg, &z) + 0.5 * mu * linalg::dot(&z, &z);
            let mut cand = y_avg.clone();
            set.project_in_place(&mut cand);
            let cert = (2.0 * (phi(&cand) - lower).max(0.0) / mu).sqrt();
            best = best.min(cert);
            if cert <= tol {
                return Ok((cand, cert, k + 1));
            }
        }
        let step = 2.0 / (mu * (k + 2) as f64);
        for i in 0..d {
            y[i] -= step * s[i];
        }
        set.project_in_place(&mut y);
    }
    Err(Error::ConvergenceFailure { iterations: INNER_BUDGET, best_residual: best })
}

/// `Φ_{1/ρ}(x) − F*`.
pub fn lyapunov_sm(problem: &HiddenConvexProblem, x: &[f64], rho: f64, inner_tol: f64) -> Result<f64> {
    Ok(prox(problem, x, rho, inner_tol)?.envelope_value - problem.constants().f_star)
}

/// `F(x) − F* + (η/β)‖g − ∇F(x)‖²` for one realization.
pub fn lyapunov_hb(problem: &HiddenConvexProblem, x: &[f64], g: &[f64], eta: f64, beta: f64) -> Result<f64> {
    if !problem.is_smooth() {
        return Err(Error::Unsupported("the momentum Lyapunov function needs a smooth problem".into()));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    let grad = problem.det_gradient(x)?;
    if g.len() != grad.len() {
        return Err(Error::Domain("momentum vector length does not match the dimension".into()));
    }
    let f = problem.model().objective(x);
    Ok(f - problem.constants().f_star + eta / beta * linalg::dist_sq(g, &grad))
}

/// `c⁻¹((1−α)c(x) + αc(x*))`.
///
/// For problems whose image `c(X)` is not convex the blend may map outside `X`; the
/// point is returned as is. Otherwise leaving `X` is an internal-consistency error.
pub fn x_alpha(problem: &HiddenConvexProblem, x: &[f64], x_star: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let set = problem.set();
    set.check_membership(x)?;
    set.check_membership(x_star)?;
    if alpha == 0.0 {
        return Ok(x.to_vec());
    }
    if alpha == 1.0 {
        return Ok(x_star.to_vec());
    }
    let model = problem.model();
    let d = x.len();
    let mut u = vec![0.0; d];
    let mut u_star = vec![0.0; d];
    model.forward(x, &mut u);
    model.forward(x_star, &mut u_star);
    for i in 0..d {
        u[i] = (1.0 - alpha) * u[i] + alpha * u_star[i];
    }
    let mut out = vec![0.0; d];
    match problem.image() {
        ImageGeometry::Convex => {
            model
                .inverse(&u, &mut out)
                .map_err(|e| Error::InternalConsistency(format!("blend left the image of c: {e}")))?;
            set.check_membership(&out)
                .map_err(|e| Error::InternalConsistency(format!("x_alpha left X: {e}")))?;
        }
        ImageGeometry::NonConvex => model.inverse(&u, &mut out)?,
    }
    Ok(out)
}

/// One-dimensional prox by bisection on the increasing derivative `F′(y) + ρ(y − x)`.
pub fn prox_1d_bisection(problem: &HiddenConvexProblem, x: f64, rho: f64) -> Result<f64> {
    if problem.dim() != 1 || !problem.is_smooth() {
        return Err(Error::Unsupported("bisection prox needs a smooth one-dimensional problem".into()));
    }
    let (lo, hi) = problem
        .set()
        .bounds()
        .ok_or_else(|| Error::Unsupported("bisection prox needs an interval".into()))?;
    if !(rho > problem.constants().ell) {
        return Err(Error::Domain(format!("rho = {rho} must exceed ell = {}", problem.constants().ell)));
    }
    let model = problem.model();
    let dphi = |y: f64| {
        let mut g = [0.0];
        model.gradient(&[y], &mut g);
        g[0] + rho * (y - x)
    };
    let (mut a, mut b) = (lo[0], hi[0]);
    if dphi(a) >= 0.0 {
        return Ok(a);
    }
    if dphi(b) <= 0.0 {
        return Ok(b);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if dphi(m) > 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(0.5 * (a + b))
}
