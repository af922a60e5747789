//! Posynomial minimization `F(x) = Σ_k b_k Π_i x_i^{a_ki}` on a positive box,
//! convex after the change of variables `u = log x`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, MEMBERSHIP_TOL};
use crate::model::{add_isotropic_noise, ConstantBundle, HiddenConvexProblem, ImageGeometry, ProblemModel, SmoothnessClass};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PosynomialOracle {
    /// Deterministic gradient plus isotropic Gaussian noise of level `sigma`.
    Additive { sigma: f64 },
    /// Draw a term uniformly and return `K` times its gradient.
    TermSampling,
}

#[derive(Debug, Clone)]
pub struct Posynomial {
    coeffs: Vec<f64>,
    /// Row-major `K × d` exponents.
    exponents: Vec<f64>,
    log_lower: Vec<f64>,
    log_upper: Vec<f64>,
    /// Exponents as integers when they all are small integers (evaluated with `powi`).
    int_exponents: Option<Vec<i32>>,
    oracle: PosynomialOracle,
}

impl Posynomial {
    fn terms(&self) -> usize {
        self.coeffs.len()
    }

    fn exps(&self, k: usize) -> &[f64] {
        let d = self.log_lower.len();
        &self.exponents[k * d..(k + 1) * d]
    }

    /// Value of term `k` at `x`.
    #[inline]
    fn term(&self, k: usize, x: &[f64]) -> f64 {
        let d = x.len();
        match &self.int_exponents {
            Some(ie) => self.coeffs[k] * ie[k * d..(k + 1) * d].iter().zip(x).map(|(a, xi)| xi.powi(*a)).product::<f64>(),
            None => self.coeffs[k] * self.exps(k).iter().zip(x).map(|(a, xi)| a * xi.ln()).sum::<f64>().exp(),
        }
    }

    /// Adds `scale · ∇term_k(x)` to `out`.
    #[inline]
    fn add_term_gradient(&self, k: usize, x: &[f64], scale: f64, out: &mut [f64]) {
        let t = scale * self.term(k, x);
        for ((o, a), xi) in out.iter_mut().zip(self.exps(k)).zip(x) {
            *o += a * t / xi;
        }
    }
}

impl ProblemModel for Posynomial {
    fn dim(&self) -> usize {
        self.log_lower.len()
    }

    fn objective(&self, x: &[f64]) -> f64 {
        (0..self.terms()).map(|k| self.term(k, x)).sum()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for k in 0..self.terms() {
            self.add_term_gradient(k, x, 1.0, out);
        }
    }

    fn sample_gradient(&self, x: &[f64], rs: &mut RandomSource, out: &mut [f64]) {
        match self.oracle {
            PosynomialOracle::Additive { sigma } => {
                self.gradient(x, out);
                add_isotropic_noise(sigma, rs, out);
            }
            PosynomialOracle::TermSampling => {
                let k = rs.below(self.terms());
                out.fill(0.0);
                self.add_term_gradient(k, x, self.terms() as f64, out);
            }
        }
    }

    fn forward(&self, x: &[f64], u: &mut [f64]) {
        for (ui, xi) in u.iter_mut().zip(x) {
            *ui = xi.ln();
        }
    }

    fn inverse(&self, u: &[f64], x: &mut [f64]) -> Result<()> {
        for (i, v) in u.iter().enumerate() {
            if !(*v >= self.log_lower[i] - MEMBERSHIP_TOL && *v <= self.log_upper[i] + MEMBERSHIP_TOL) {
                return Err(Error::Domain(format!(
                    "u_{i} = {v} lies outside [{}, {}]",
                    self.log_lower[i], self.log_upper[i]
                )));
            }
            x[i] = v.exp();
        }
        Ok(())
    }

    fn reformulation(&self, u: &[f64]) -> f64 {
        (0..self.terms())
            .map(|k| {
                let s: f64 = self.exps(k).iter().zip(u).map(|(a, ui)| a * ui).sum();
                self.coeffs[k] * s.exp()
            })
            .sum()
    }
}

/// `sup_{x ∈ [l, h]} Π x_i^{e_i}`, attained at the corner picked by the exponent signs.
fn sup_monomial(e: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    e.iter()
        .zip(lower.iter().zip(upper))
        .map(|(a, (l, h))| if *a >= 0.0 { h.powf(*a) } else { l.powf(*a) })
        .product()
}

/// Minimizes the convex `H` over the log-box by projected gradient with adaptive restart.
fn solve_log_problem(p: &Posynomial, l_h: f64) -> Result<Vec<f64>> {
    let d = p.dim();
    let grad_h = |u: &[f64], g: &mut [f64]| {
        g.fill(0.0);
        for k in 0..p.terms() {
            let e = p.exps(k);
            let t = p.coeffs[k] * e.iter().zip(u).map(|(a, ui)| a * ui).sum::<f64>().exp();
            for (gi, a) in g.iter_mut().zip(e) {
                *gi += a * t;
            }
        }
    };
    let clamp = |u: &mut [f64]| {
        for (i, v) in u.iter_mut().enumerate() {
            *v = v.clamp(p.log_lower[i], p.log_upper[i]);
        }
    };
    let step = 1.0 / l_h;
    let mut u: Vec<f64> = (0..d).map(|i| 0.5 * (p.log_lower[i] + p.log_upper[i])).collect();
    let mut y = u.clone();
    let mut g = vec![0.0; d];
    let mut theta = 1.0f64;
    for _ in 0..1_000_000 {
        grad_h(&y, &mut g);
        let mut next: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - step * gi).collect();
        clamp(&mut next);
        // gradient mapping at the current (non-extrapolated) iterate for the stopping test
        let mut gu = vec![0.0; d];
        grad_h(&u, &mut gu);
        let mut pu: Vec<f64> = u.iter().zip(&gu).map(|(ui, gi)| ui - step * gi).collect();
        clamp(&mut pu);
        let gm: f64 = u.iter().zip(&pu).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / step;
        if gm <= 1e-13 * (1.0 + l_h) {
            return Ok(u);
        }
        let restart: f64 = (0..d).map(|i| (y[i] - next[i]) * (next[i] - u[i])).sum();
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let mom = if restart > 0.0 { 0.0 } else { (theta - 1.0) / theta_next };
        theta = if restart > 0.0 { 1.0 } else { theta_next };
        y = (0..d).map(|i| next[i] + mom * (next[i] - u[i])).collect();
        u = next;
    }
    Err(Error::InternalConsistency("posynomial minimizer did not converge".into()))
}

/// Builds a posynomial problem. `exponents[k][i]` is the power of `x_i` in term `k`.
pub fn build_posynomial(
    coeffs: Vec<f64>,
    exponents: Vec<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    oracle: PosynomialOracle,
) -> Result<HiddenConvexProblem> {
    let d = lower.len();
    if d == 0 || upper.len() != d {
        return Err(Error::Configuration("lower and upper must be nonempty and of equal length".into()));
    }
    for i in 0..d {
        if !(lower[i] > 0.0 && upper[i] > lower[i] && upper[i].is_finite()) {
            return Err(Error::Domain(format!(
                "box coordinate {i} must satisfy 0 < lower < upper, got [{}, {}]",
                lower[i], upper[i]
            )));
        }
    }
    if coeffs.is_empty() || exponents.len() != coeffs.len() {
        return Err(Error::Configuration("need one exponent row per coefficient and at least one term".into()));
    }
    if coeffs.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(Error::Domain("posynomial coefficients must be positive".into()));
    }
    if exponents.iter().any(|row| row.len() != d || row.iter().any(|a| !a.is_finite())) {
        return Err(Error::Configuration(format!("every exponent row must have {d} finite entries")));
    }
    let sigma_additive = match oracle {
        PosynomialOracle::Additive { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
            return Err(Error::Domain(format!("sigma must be nonnegative, got {sigma}")));
        }
        PosynomialOracle::Additive { sigma } => Some(sigma),
        PosynomialOracle::TermSampling => None,
    };
    let k_terms = coeffs.len();

    // Entrywise bounds on the gradient and Hessian of each term over the box.
    let mut grad_bound = vec![0.0; d];
    let mut term_grad_sq = 0.0;
    let mut hess_bound = DMatrix::<f64>::zeros(d, d);
    for (b, e) in coeffs.iter().zip(&exponents) {
        let mut tg = 0.0;
        for i in 0..d {
            let mut ei = e.clone();
            ei[i] -= 1.0;
            let gi = (b * e[i]).abs() * sup_monomial(&ei, &lower, &upper);
            grad_bound[i] += gi;
            tg += gi * gi;
            for j in 0..d {
                let mut eij = ei.clone();
                eij[j] -= 1.0;
                let coef = e[i] * e[j] - if i == j { e[i] } else { 0.0 };
                hess_bound[(i, j)] += (b * coef).abs() * sup_monomial(&eij, &lower, &upper);
            }
        }
        term_grad_sq += tg;
    }
    let l = hess_bound.symmetric_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let g_lip = grad_bound.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (g_f, sigma) = match sigma_additive {
        Some(s) => ((g_lip * g_lip + s * s).sqrt(), s),
        None => {
            let m2 = (k_terms as f64 * term_grad_sq).sqrt();
            (m2, m2)
        }
    };

    let log_lower: Vec<f64> = lower.iter().map(|v| v.ln()).collect();
    let log_upper: Vec<f64> = upper.iter().map(|v| v.ln()).collect();
    let model = Posynomial {
        coeffs: coeffs.clone(),
        exponents: exponents.concat(),
        log_lower: log_lower.clone(),
        log_upper: log_upper.clone(),
        int_exponents: exponents
            .iter()
            .flatten()
            .map(|a| (a.fract() == 0.0 && a.abs() <= 64.0).then_some(*a as i32))
            .collect(),
        oracle,
    };
    let l_h: f64 = coeffs
        .iter()
        .zip(&exponents)
        .map(|(b, e)| {
            let sup_exp: f64 = e
                .iter()
                .zip(log_lower.iter().zip(&log_upper))
                .map(|(a, (lo, hi))| (a * lo).max(a * hi))
                .sum::<f64>()
                .exp();
            b * sup_exp * e.iter().map(|a| a * a).sum::<f64>()
        })
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let u_star = solve_log_problem(&model, l_h)?;
    let x_star: Vec<f64> = u_star.iter().enumerate().map(|(i, v)| v.exp().clamp(lower[i], upper[i])).collect();
    let f_star = model.objective(&x_star);
    let d_u = log_upper.iter().zip(&log_lower).map(|(h, l)| (h - l) * (h - l)).sum::<f64>().sqrt();
    let max_h = upper.iter().fold(0.0f64, |m, v| m.max(*v));

    let constants = ConstantBundle {
        mu_c: 1.0 / max_h,
        mu_h: 0.0,
        ell: l,
        l: Some(l),
        g_f: Some(g_f),
        sigma,
        d_u,
        f_star,
        x_star,
    };
    let notes = vec![
        "mu_c = 1/max h: c is coordinatewise log, so |log s - log t| >= |s - t|/max h in every coordinate".into(),
        "D_U = |log h - log l|".into(),
        "L = ell = spectral norm of the entrywise sup of |Hessian| over box corners".into(),
        match oracle {
            PosynomialOracle::Additive { .. } => "G_F = sqrt(G^2 + sigma^2) with G the corner bound on |grad F|".into(),
            PosynomialOracle::TermSampling => "G_F = sigma = sqrt(K sum_k sup |grad term_k|^2)".into(),
        },
        "x*, F* from projected gradient on the convex log-space problem".into(),
    ];
    HiddenConvexProblem::new(
        "posynomial",
        Arc::new(model),
        FeasibleSet::new_box(lower, upper.clone())?,
        constants,
        SmoothnessClass::Smooth,
        ImageGeometry::Convex,
        upper,
    )
    .map(|p| p.with_notes(notes))
}
