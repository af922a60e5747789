//! `F(x) = cos x` on `[δ, 2π − δ]` with `c(x) = cos(x/2)` and `H(u) = 2u² − 1`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, MEMBERSHIP_TOL};
use crate::model::{add_isotropic_noise, ConstantBundle, HiddenConvexProblem, ImageGeometry, ProblemModel, SmoothnessClass};
use crate::rng::RandomSource;

#[derive(Debug, Clone)]
pub struct Cosine {
    delta: f64,
    sigma: f64,
}

impl ProblemModel for Cosine {
    fn dim(&self) -> usize {
        1
    }

    fn objective(&self, x: &[f64]) -> f64 {
        x[0].cos()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out[0] = -x[0].sin();
    }

    fn sample_gradient(&self, x: &[f64], rs: &mut RandomSource, out: &mut [f64]) {
        self.gradient(x, out);
        add_isotropic_noise(self.sigma, rs, out);
    }

    fn forward(&self, x: &[f64], u: &mut [f64]) {
        u[0] = (0.5 * x[0]).cos();
    }

    fn inverse(&self, u: &[f64], x: &mut [f64]) -> Result<()> {
        let r = (0.5 * self.delta).cos();
        if u[0].abs() > r + MEMBERSHIP_TOL {
            return Err(Error::Domain(format!("u = {} lies outside U = [-{r}, {r}]", u[0])));
        }
        x[0] = 2.0 * u[0].clamp(-1.0, 1.0).acos();
        Ok(())
    }

    fn reformulation(&self, u: &[f64]) -> f64 {
        2.0 * u[0] * u[0] - 1.0
    }
}

pub fn build_cosine(delta: f64, sigma: f64) -> Result<HiddenConvexProblem> {
    if !(delta > 0.0 && delta < PI) {
        return Err(Error::Domain(format!("delta must lie in (0, pi), got {delta}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    // sup |sin x| over [δ, 2π − δ]
    let sup_sin = if delta <= FRAC_PI_2 { 1.0 } else { delta.sin() };
    let constants = ConstantBundle {
        mu_c: (0.5 * delta).sin() / 2.0,
        mu_h: 4.0,
        ell: 1.0,
        l: Some(1.0),
        g_f: Some((sup_sin * sup_sin + sigma * sigma).sqrt()),
        sigma,
        d_u: 2.0 * (0.5 * delta).cos(),
        f_star: -1.0,
        x_star: vec![PI],
    };
    HiddenConvexProblem::new(
        "cosine",
        Arc::new(Cosine { delta, sigma }),
        FeasibleSet::interval(delta, 2.0 * PI - delta)?,
        constants,
        SmoothnessClass::Smooth,
        ImageGeometry::Convex,
        vec![FRAC_PI_2.max(delta)],
    )
    .map(|p| {
        p.with_notes(vec![
            "mu_c = sin(delta/2)/2: |c'(x)| = sin(x/2)/2 is smallest at the endpoints".into(),
            "mu_H = 4: H'' = 4".into(),
            "ell = L = 1: |F''| = |cos x| <= 1".into(),
            "G_F = sqrt(sup sin^2 + sigma^2) for the additive oracle".into(),
            "D_U = 2 cos(delta/2)".into(),
        ])
    })
}
