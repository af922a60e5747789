#![allow(dead_code)]

use std::sync::Arc;

use hcopt::model::add_isotropic_noise;
use hcopt::{ConstantBundle, FeasibleSet, HiddenConvexProblem, ImageGeometry, ProblemModel, RandomSource, SmoothnessClass};

/// `F(x) = a‖x‖² + ⟨b, x⟩` with identity map `c`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub a: f64,
    pub b: Vec<f64>,
    pub sigma: f64,
}

impl ProblemModel for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn objective(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.b).map(|(xi, bi)| self.a * xi * xi + bi * xi).sum()
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = 2.0 * self.a * x[i] + self.b[i];
        }
    }
    fn sample_gradient(&self, x: &[f64], rs: &mut RandomSource, out: &mut [f64]) {
        self.gradient(x, out);
        add_isotropic_noise(self.sigma, rs, out);
    }
    fn forward(&self, x: &[f64], u: &mut [f64]) {
        u.copy_from_slice(x);
    }
    fn inverse(&self, u: &[f64], x: &mut [f64]) -> hcopt::Result<()> {
        x.copy_from_slice(u);
        Ok(())
    }
    fn reformulation(&self, u: &[f64]) -> f64 {
        self.objective(u)
    }
}

/// `F(y) = y²` on `[-1, 1]`.
pub fn square_on_interval() -> HiddenConvexProblem {
    quadratic_problem(1.0, vec![0.0], -1.0, 1.0, vec![0.0], 0.0, 0.0)
}

/// `F(x) = a‖x‖² + ⟨b, x⟩` on the cube `[lo, hi]^d` with the given minimizer.
pub fn quadratic_problem(a: f64, b: Vec<f64>, lo: f64, hi: f64, x_star: Vec<f64>, f_star: f64, sigma: f64) -> HiddenConvexProblem {
    let d = b.len();
    let set = FeasibleSet::cube(d, lo, hi).unwrap();
    let grad_sup = (0..d).map(|i| (2.0 * a * lo + b[i]).abs().max((2.0 * a * hi + b[i]).abs()).powi(2)).sum::<f64>();
    let constants = ConstantBundle {
        mu_c: 1.0,
        mu_h: 2.0 * a.max(0.0),
        ell: (-2.0 * a).max(0.0),
        l: Some(2.0 * a.abs()),
        g_f: Some((grad_sup + sigma * sigma).sqrt().max(1e-12)),
        sigma,
        d_u: (d as f64).sqrt() * (hi - lo),
        f_star,
        x_star: x_star.clone(),
    };
    HiddenConvexProblem::new(
        "quadratic",
        Arc::new(Quadratic { a, b, sigma }),
        set,
        constants,
        SmoothnessClass::Smooth,
        ImageGeometry::Convex,
        x_star,
    )
    .unwrap()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}
