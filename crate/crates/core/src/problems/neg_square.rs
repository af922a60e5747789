//! `F(x) = −x²` on `[δ, 1]` with `c(x) = x²` and `H(u) = −u`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, MEMBERSHIP_TOL};
use crate::model::{add_isotropic_noise, ConstantBundle, HiddenConvexProblem, ImageGeometry, ProblemModel, SmoothnessClass};
use crate::rng::RandomSource;

#[derive(Debug, Clone)]
pub struct NegSquare {
    delta: f64,
    sigma: f64,
}

impl ProblemModel for NegSquare {
    fn dim(&self) -> usize {
        1
    }

    fn objective(&self, x: &[f64]) -> f64 {
        -x[0] * x[0]
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out[0] = -2.0 * x[0];
    }

    fn sample_gradient(&self, x: &[f64], rs: &mut RandomSource, out: &mut [f64]) {
        self.gradient(x, out);
        add_isotropic_noise(self.sigma, rs, out);
    }

    fn forward(&self, x: &[f64], u: &mut [f64]) {
        u[0] = x[0] * x[0];
    }

    fn inverse(&self, u: &[f64], x: &mut [f64]) -> Result<()> {
        let lo = self.delta * self.delta;
        if !(u[0] >= lo - MEMBERSHIP_TOL && u[0] <= 1.0 + MEMBERSHIP_TOL) {
            return Err(Error::Domain(format!("u = {} lies outside U = [{lo}, 1]", u[0])));
        }
        x[0] = u[0].max(0.0).sqrt();
        Ok(())
    }

    fn reformulation(&self, u: &[f64]) -> f64 {
        -u[0]
    }
}

/// Builds the problem. `G_F = sqrt(4 + σ²)` bounds `E g²` for the additive oracle since `|F′| ≤ 2`.
pub fn build_neg_square(delta: f64, sigma: f64) -> Result<HiddenConvexProblem> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    if delta == 1.0 {
        return Err(Error::Domain("delta = 1 leaves a single point; the set needs an interior".into()));
    }
    let constants = ConstantBundle {
        mu_c: 2.0 * delta,
        mu_h: 0.0,
        ell: 2.0,
        l: Some(2.0),
        g_f: Some((4.0 + sigma * sigma).sqrt()),
        sigma,
        d_u: 1.0 - delta * delta,
        f_star: -1.0,
        x_star: vec![1.0],
    };
    HiddenConvexProblem::new(
        "neg_square",
        Arc::new(NegSquare { delta, sigma }),
        FeasibleSet::interval(delta, 1.0)?,
        constants,
        SmoothnessClass::Smooth,
        ImageGeometry::Convex,
        vec![0.5 * (delta + 1.0)],
    )
    .map(|p| {
        p.with_notes(vec![
            "mu_c = 2 delta: |x^2 - y^2| = (x + y)|x - y| >= 2 delta |x - y|".into(),
            "mu_H = 0: H is linear".into(),
            "ell = L = 2: F'' = -2".into(),
            "G_F = sqrt(4 + sigma^2): |F'| <= 2 plus additive noise".into(),
            "D_U = 1 - delta^2".into(),
        ])
    })
}
