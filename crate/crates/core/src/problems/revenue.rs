//! Separable booking-limit revenue model with uniform demand.
//!
//! `u_i = c_i(x) = E[min(x_i, ξ_i)] = x_i − x_i²/(2b_i)` for `ξ_i ~ U[0, b_i]`, and
//! `H(u) = −r·u + (λ/2)‖u‖²` on `X = [0, D]^d`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, MEMBERSHIP_TOL};
use crate::model::{ConstantBundle, HiddenConvexProblem, ImageGeometry, ProblemModel, SmoothnessClass};
use crate::rng::RandomSource;

/// Grid size for the variance and second-moment suprema, and the safety factor applied.
const SUP_GRID: usize = 20_001;
const SUP_SAFETY: f64 = 1.001;

#[derive(Debug, Clone)]
pub struct Revenue {
    caps: Vec<f64>,
    limit: f64,
    prices: Vec<f64>,
    lambda: f64,
}

#[inline]
fn c(x: f64, b: f64) -> f64 {
    x - x * x / (2.0 * b)
}

impl Revenue {
    /// Mean and second moment of the per-coordinate oracle at `x`.
    pub fn oracle_moments(&self, i: usize, x: f64) -> (f64, f64) {
        let (b, r, lam) = (self.caps[i], self.prices[i], self.lambda);
        let p = 1.0 - x / b;
        let m2 = x * x - 2.0 * x * x * x / (3.0 * b);
        let mean = (-r + lam * c(x, b)) * p;
        let second = r * r * p - 2.0 * r * lam * x * p * p + lam * lam * p * m2;
        (mean, second)
    }

    fn curvature(&self, i: usize, x: f64) -> f64 {
        let b = self.caps[i];
        self.prices[i] / b + self.lambda * (1.0 - 3.0 * x / b + 1.5 * x * x / (b * b))
    }
}

impl ProblemModel for Revenue {
    fn dim(&self) -> usize {
        self.caps.len()
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let mut f = 0.0;
        for i in 0..self.dim() {
            let u = c(x[i], self.caps[i]);
            f += -self.prices[i] * u + 0.5 * self.lambda * u * u;
        }
        f
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.dim() {
            let b = self.caps[i];
            out[i] = (-self.prices[i] + self.lambda * c(x[i], b)) * (1.0 - x[i] / b);
        }
    }

    /// Sample-path derivative `−r·1{x ≤ ξ}` plus `λ·min(x, ξ)·1{x ≤ ξ′}` with independent `ξ, ξ′`.
    fn sample_gradient(&self, x: &[f64], rs: &mut RandomSource, out: &mut [f64]) {
        for i in 0..self.dim() {
            let b = self.caps[i];
            let xi = b * rs.uniform();
            let xi2 = b * rs.uniform();
            let mut g = 0.0;
            if x[i] <= xi {
                g -= self.prices[i];
            }
            if x[i] <= xi2 {
                g += self.lambda * x[i].min(xi);
            }
            out[i] = g;
        }
    }

    fn forward(&self, x: &[f64], u: &mut [f64]) {
        for i in 0..self.dim() {
            u[i] = c(x[i], self.caps[i]);
        }
    }

    fn inverse(&self, u: &[f64], x: &mut [f64]) -> Result<()> {
        for i in 0..self.dim() {
            let b = self.caps[i];
            if !(u[i] < 0.5 * b) {
                return Err(Error::Domain(format!("u_{i} = {} must be below b_{i}/2 = {}", u[i], 0.5 * b)));
            }
            let top = c(self.limit, b);
            if u[i] < -MEMBERSHIP_TOL || u[i] > top + MEMBERSHIP_TOL {
                return Err(Error::Domain(format!("u_{i} = {} lies outside [0, {top}]", u[i])));
            }
            x[i] = b * (1.0 - (1.0 - 2.0 * u[i] / b).max(0.0).sqrt());
        }
        Ok(())
    }

    fn reformulation(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.prices).map(|(ui, r)| -r * ui + 0.5 * self.lambda * ui * ui).sum()
    }
}

pub fn build_revenue_truncation(caps: Vec<f64>, limit: f64, prices: Vec<f64>, lambda: f64) -> Result<HiddenConvexProblem> {
    let d = caps.len();
    if d == 0 || prices.len() != d {
        return Err(Error::Configuration("caps and prices must be nonempty and of equal length".into()));
    }
    if caps.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(Error::Domain("demand caps must be positive".into()));
    }
    if prices.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::Domain("prices must be positive".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be nonnegative, got {lambda}")));
    }
    let min_cap = caps.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if !(limit > 0.0 && limit < min_cap) {
        return Err(Error::Domain(format!("limit D = {limit} must lie in (0, min b = {min_cap})")));
    }
    let model = Revenue { caps: caps.clone(), limit, prices: prices.clone(), lambda };

    let mut l = 0.0f64;
    let mut min_curv = f64::INFINITY;
    let mut var_sum = 0.0;
    let mut m2_sum = 0.0;
    for i in 0..d {
        // F_i'' is a quadratic with vertex at x = b_i > D, hence monotone on [0, D].
        for x in [0.0, limit] {
            let k = model.curvature(i, x);
            l = l.max(k.abs());
            min_curv = min_curv.min(k);
        }
        let (mut sup_var, mut sup_m2) = (0.0f64, 0.0f64);
        for j in 0..SUP_GRID {
            let x = limit * j as f64 / (SUP_GRID - 1) as f64;
            let (mean, second) = model.oracle_moments(i, x);
            sup_var = sup_var.max(second - mean * mean);
            sup_m2 = sup_m2.max(second);
        }
        var_sum += SUP_SAFETY * sup_var;
        m2_sum += SUP_SAFETY * sup_m2;
    }

    let u_star: Vec<f64> = (0..d)
        .map(|i| {
            let top = c(limit, caps[i]);
            if lambda > 0.0 {
                (prices[i] / lambda).clamp(0.0, top)
            } else {
                top
            }
        })
        .collect();
    let mut x_star = vec![0.0; d];
    model.inverse(&u_star, &mut x_star)?;
    for v in x_star.iter_mut() {
        *v = v.clamp(0.0, limit);
    }
    let f_star = model.reformulation(&u_star);
    let d_u = caps.iter().map(|b| c(limit, *b).powi(2)).sum::<f64>().sqrt();

    let constants = ConstantBundle {
        mu_c: caps.iter().map(|b| 1.0 - limit / b).fold(f64::INFINITY, f64::min),
        mu_h: lambda,
        ell: (-min_curv).max(0.0),
        l: Some(l),
        g_f: Some(m2_sum.sqrt()),
        sigma: var_sum.sqrt(),
        d_u,
        f_star,
        x_star,
    };
    let notes = vec![
        "mu_c = min_i (1 - D/b_i): c_i' = 1 - x/b_i is smallest at x = D".into(),
        "mu_H = lambda".into(),
        "L, ell from F_i'' = r_i/b_i + lambda(1 - 3x/b_i + 1.5x^2/b_i^2), monotone on [0, D]".into(),
        format!("sigma^2, G_F^2: sum over coordinates of the grid sup of the oracle variance / second moment, times {SUP_SAFETY}"),
        "x*: u*_i = clip(r_i/lambda, 0, c_i(D)) inverted through c".into(),
    ];
    HiddenConvexProblem::new(
        "revenue",
        Arc::new(model),
        FeasibleSet::cube(d, 0.0, limit)?,
        constants,
        SmoothnessClass::Smooth,
        ImageGeometry::Convex,
        vec![0.0; d],
    )
    .map(|p| p.with_notes(notes))
}
