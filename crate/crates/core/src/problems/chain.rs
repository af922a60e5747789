//! Rosenbrock-type chain `F(x) = ¼(x₁−1)² + c Σ (x_{i+1} − 2x_i² − 1)²` and its
//! non-smooth two-dimensional max variant, on the box `[−a, a]^d`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::model::{add_isotropic_noise, ConstantBundle, HiddenConvexProblem, ImageGeometry, ProblemModel, SmoothnessClass};
use crate::rng::RandomSource;

/// Sample count and safety factor for the numerically certified `μ_c`.
pub const MU_C_SAMPLES: usize = 100_000;
pub const MU_C_SAFETY: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct RosenbrockChain {
    d: usize,
    c_coef: f64,
    sigma: f64,
    smooth: bool,
}

impl RosenbrockChain {
    #[inline]
    fn residual(x: &[f64], k: usize) -> f64 {
        x[k + 1] - 2.0 * x[k] * x[k] - 1.0
    }

    /// Second coordinate of the max variant, `2x₁² − x₂ − 1` (zero at `x = (1, 1)`).
    #[inline]
    fn max_residual(x: &[f64]) -> f64 {
        2.0 * x[0] * x[0] - x[1] - 1.0
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl ProblemModel for RosenbrockChain {
    fn dim(&self) -> usize {
        self.d
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let p1 = x[0] - 1.0;
        if self.smooth {
            let mut f = 0.25 * p1 * p1;
            for k in 0..self.d - 1 {
                let r = Self::residual(x, k);
                f += self.c_coef * r * r;
            }
            f
        } else {
            (0.25 * p1.abs()).max(0.5 * Self::max_residual(x).abs())
        }
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        if self.smooth {
            out[0] = 0.5 * (x[0] - 1.0);
            for k in 0..self.d - 1 {
                let r = Self::residual(x, k);
                out[k + 1] += 2.0 * self.c_coef * r;
                out[k] -= 8.0 * self.c_coef * r * x[k];
            }
        } else {
            let p1 = 0.25 * (x[0] - 1.0).abs();
            let r = Self::max_residual(x);
            if p1 >= 0.5 * r.abs() {
                out[0] = 0.25 * sign(x[0] - 1.0);
            } else {
                let s = 0.5 * sign(r);
                out[0] = 4.0 * x[0] * s;
                out[1] = -s;
            }
        }
    }

    fn sample_gradient(&self, x: &[f64], rs: &mut RandomSource, out: &mut [f64]) {
        self.gradient(x, out);
        add_isotropic_noise(self.sigma, rs, out);
    }

    fn forward(&self, x: &[f64], u: &mut [f64]) {
        u[0] = x[0] - 1.0;
        if !self.smooth {
            u[1] = Self::max_residual(x);
            return;
        }
        for k in 0..self.d - 1 {
            u[k + 1] = Self::residual(x, k);
        }
    }

    fn inverse(&self, u: &[f64], x: &mut [f64]) -> Result<()> {
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("u is not finite".into()));
        }
        x[0] = u[0] + 1.0;
        if !self.smooth {
            x[1] = 2.0 * x[0] * x[0] - 1.0 - u[1];
            return Ok(());
        }
        for k in 0..self.d - 1 {
            x[k + 1] = u[k + 1] + 2.0 * x[k] * x[k] + 1.0;
        }
        Ok(())
    }

    fn reformulation(&self, u: &[f64]) -> f64 {
        if self.smooth {
            0.25 * u[0] * u[0] + self.c_coef * u[1..].iter().map(|v| v * v).sum::<f64>()
        } else {
            (0.25 * u[0].abs()).max(0.5 * u[1].abs())
        }
    }
}

/// Jacobian of the chain map at `x`.
fn jacobian(x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let mut j = DMatrix::<f64>::identity(d, d);
    for k in 0..d - 1 {
        j[(k + 1, k)] = -4.0 * x[k];
    }
    j
}

fn sigma_min(x: &[f64]) -> f64 {
    let j = jacobian(x);
    let jtj = j.transpose() * &j;
    let ev = jtj.symmetric_eigenvalues();
    ev.iter().copied().fold(f64::INFINITY, f64::min).max(0.0).sqrt()
}

/// Smallest singular value of the Jacobian over box corners and uniform samples,
/// scaled by [`MU_C_SAFETY`].
pub fn empirical_mu_c(d: usize, a: f64, samples: usize, seed: u64) -> f64 {
    let mut best = f64::INFINITY;
    // The Jacobian depends on x_1..x_{d-1} only; try every sign pattern at |x_i| = a.
    for mask in 0..(1u32 << (d - 1)) {
        let x: Vec<f64> = (0..d).map(|i| if i + 1 < d && mask & (1 << i) != 0 { -a } else { a }).collect();
        best = best.min(sigma_min(&x));
    }
    let mut rs = RandomSource::new(seed);
    let mut x = vec![0.0; d];
    for _ in 0..samples {
        for v in x.iter_mut() {
            *v = rs.uniform_in(-a, a);
        }
        best = best.min(sigma_min(&x));
    }
    MU_C_SAFETY * best
}

/// The chain solution `(1, 3, 19, …)`.
pub fn chain_solution(d: usize) -> Vec<f64> {
    let mut x = vec![1.0; d];
    for k in 0..d - 1 {
        x[k + 1] = 2.0 * x[k] * x[k] + 1.0;
    }
    x
}

pub fn build_rosenbrock_chain(d: usize, c_coef: f64, a: f64, sigma: f64, smooth: bool) -> Result<HiddenConvexProblem> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
    }
    if !smooth && d != 2 {
        return Err(Error::Configuration("the max variant is defined for d = 2 only".into()));
    }
    if d > 6 {
        return Err(Error::Configuration("the chain solution overflows practical boxes for d > 6".into()));
    }
    if !(c_coef > 0.0 && c_coef.is_finite()) {
        return Err(Error::Domain(format!("c_coef must be positive, got {c_coef}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("box half-width must be positive, got {a}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    let x_star = if smooth { chain_solution(d) } else { vec![1.0, 1.0] };
    let need = x_star.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if need > a {
        return Err(Error::Configuration(format!(
            "box [-{a}, {a}]^{d} does not contain the solution; box_halfwidth must be at least {need}"
        )));
    }

    let u_tail = 2.0 * a * a + a + 1.0; // bound on |x_{i+1} − 2x_i² − 1|
    let j_norm = 1.0 + 4.0 * a; // bound on the Jacobian spectral norm
    let mu_c = empirical_mu_c(d, a, MU_C_SAMPLES, 0x5eed);
    let d_u = (4.0 * a * a + (d - 1) as f64 * (2.0 * a * a + 2.0 * a).powi(2)).sqrt();

    let (constants, class, notes) = if smooth {
        let curv = 8.0 * c_coef * u_tail;
        let l = 0.5f64.max(2.0 * c_coef) * j_norm * j_norm + curv;
        let grad_h = ((0.5 * (a + 1.0)).powi(2) + (d - 1) as f64 * (2.0 * c_coef * u_tail).powi(2)).sqrt();
        let g = j_norm * grad_h;
        (
            ConstantBundle {
                mu_c,
                mu_h: 0.5f64.min(2.0 * c_coef),
                ell: curv,
                l: Some(l),
                g_f: Some((g * g + sigma * sigma).sqrt()),
                sigma,
                d_u,
                f_star: 0.0,
                x_star,
            },
            SmoothnessClass::Smooth,
            vec![
                "L = max(1/2, 2c)(1+4a)^2 + 8c(2a^2+a+1): J^T H'' J plus the curvature of c".into(),
                "ell = 8c(2a^2+a+1): only the curvature of c is indefinite".into(),
                "G_F from |grad F| <= (1+4a) |grad H| on the box".into(),
            ],
        )
    } else {
        let g2 = (1.0f64 / 16.0).max(0.25 * (16.0 * a * a + 1.0));
        (
            ConstantBundle {
                mu_c,
                mu_h: 0.0,
                ell: 2.0,
                l: None,
                g_f: Some((g2 + sigma * sigma).sqrt()),
                sigma,
                d_u,
                f_star: 0.0,
                x_star,
            },
            SmoothnessClass::WeaklyConvexNonsmooth,
            vec![
                "ell = 2: H is 1/2-Lipschitz and c is 4-smooth".into(),
                "G_F^2 = max(1/16, (16a^2+1)/4) + sigma^2".into(),
            ],
        )
    };
    let mut notes = notes;
    notes.push(format!(
        "empirical mu_c: {MU_C_SAFETY} x smallest Jacobian singular value over box corners and {MU_C_SAMPLES} samples"
    ));
    notes.push("D_U bounds the diameter of the (non-convex) image of the box".into());

    let mut start = vec![1.0; d];
    start[0] = -1.0;
    HiddenConvexProblem::new(
        if smooth { "rosenbrock_chain" } else { "rosenbrock_max" },
        Arc::new(RosenbrockChain { d, c_coef, sigma, smooth }),
        FeasibleSet::cube(d, -a, a)?,
        constants,
        class,
        ImageGeometry::NonConvex,
        start,
    )
    .map(|p| p.with_notes(notes))
}
