//! Problem abstraction, constants and per-iteration telemetry.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothnessClass {
    Smooth,
    WeaklyConvexNonsmooth,
}

/// Whether `U = c(X)` is convex.
///
/// For `NonConvex` images `c⁻¹` and `H` are still defined on the convex hull of `U`, but
/// blends `(1−α)c(x) + αc(x*)` may map outside `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageGeometry {
    Convex,
    NonConvex,
}

/// Constants of a problem instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantBundle {
    /// Lower Lipschitz constant of `c`.
    pub mu_c: f64,
    /// Strong convexity modulus of `H` on `U`.
    pub mu_h: f64,
    /// Weak convexity modulus of `F`.
    pub ell: f64,
    /// Lipschitz constant of `∇F`; `None` for non-smooth problems.
    pub l: Option<f64>,
    /// Bound on `sqrt(E‖g‖²)` for the stochastic oracle.
    pub g_f: Option<f64>,
    /// Bound on the standard deviation `sqrt(E‖g − ∇F‖²)`.
    pub sigma: f64,
    /// Diameter of `U`, possibly infinite.
    pub d_u: f64,
    pub f_star: f64,
    pub x_star: Vec<f64>,
}

impl ConstantBundle {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::Configuration(s.to_string()));
        if !(self.mu_c > 0.0 && self.mu_c.is_finite()) {
            return bad("mu_c must be positive and finite");
        }
        if !(self.mu_h >= 0.0 && self.mu_h.is_finite()) {
            return bad("mu_H must be nonnegative and finite");
        }
        if !(self.ell >= 0.0 && self.ell.is_finite()) {
            return bad("ell must be nonnegative and finite");
        }
        if let Some(l) = self.l {
            if !(l >= 0.0 && l.is_finite()) {
                return bad("L must be nonnegative and finite");
            }
        }
        if let Some(g) = self.g_f {
            if !(g > 0.0 && g.is_finite()) {
                return bad("G_F must be positive and finite");
            }
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be nonnegative and finite");
        }
        if !(self.d_u > 0.0) {
            return bad("D_U must be positive");
        }
        if !self.f_star.is_finite() {
            return bad("F_star must be finite");
        }
        Ok(())
    }

    pub fn require_l(&self) -> Result<f64> {
        self.l.ok_or_else(|| Error::Configuration("constant L (gradient Lipschitz) is required".into()))
    }

    pub fn require_g_f(&self) -> Result<f64> {
        self.g_f.ok_or_else(|| Error::Configuration("constant G_F (second-moment bound) is required".into()))
    }

    pub fn require_finite_d_u(&self) -> Result<f64> {
        if self.d_u.is_finite() {
            Ok(self.d_u)
        } else {
            Err(Error::Configuration("constant D_U must be finite".into()))
        }
    }

    pub fn require_mu_h(&self) -> Result<f64> {
        if self.mu_h > 0.0 {
            Ok(self.mu_h)
        } else {
            Err(Error::Configuration("constant mu_H must be positive".into()))
        }
    }

    pub fn require_ell(&self) -> Result<f64> {
        if self.ell > 0.0 {
            Ok(self.ell)
        } else {
            Err(Error::Configuration("constant ell must be positive".into()))
        }
    }
}

/// Oracles of a concrete problem. Callers guarantee `x ∈ X`; buffers have length `dim()`.
pub trait ProblemModel: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn objective(&self, x: &[f64]) -> f64;

    /// Gradient, or for non-smooth problems the subgradient of the first active piece.
    fn gradient(&self, x: &[f64], out: &mut [f64]);

    /// One draw of the stochastic (sub)gradient oracle.
    fn sample_gradient(&self, x: &[f64], rs: &mut RandomSource, out: &mut [f64]);

    fn forward(&self, x: &[f64], u: &mut [f64]);

    fn inverse(&self, u: &[f64], x: &mut [f64]) -> Result<()>;

    fn reformulation(&self, u: &[f64]) -> f64;
}

/// Adds isotropic Gaussian noise with `E‖z‖² = σ²` to `out`.
#[inline]
pub fn add_isotropic_noise(sigma: f64, rs: &mut RandomSource, out: &mut [f64]) {
    if sigma == 0.0 {
        return;
    }
    let s = sigma / (out.len() as f64).sqrt();
    for v in out.iter_mut() {
        *v += s * rs.normal();
    }
}

/// A hidden-convex problem: oracles, feasible set, constants and metadata.
#[derive(Debug, Clone)]
pub struct HiddenConvexProblem {
    name: String,
    model: Arc<dyn ProblemModel>,
    set: FeasibleSet,
    constants: ConstantBundle,
    smoothness: SmoothnessClass,
    image: ImageGeometry,
    default_start: Vec<f64>,
    notes: Vec<String>,
}

impl HiddenConvexProblem {
    pub fn new(
        name: impl Into<String>,
        model: Arc<dyn ProblemModel>,
        set: FeasibleSet,
        constants: ConstantBundle,
        smoothness: SmoothnessClass,
        image: ImageGeometry,
        default_start: Vec<f64>,
    ) -> Result<Self> {
        constants.validate()?;
        let d = model.dim();
        if d == 0 {
            return Err(Error::Configuration("dimension must be positive".into()));
        }
        if set.dim() != d || constants.x_star.len() != d || default_start.len() != d {
            return Err(Error::Configuration(format!(
                "dimension mismatch: model {d}, set {}, x_star {}, start {}",
                set.dim(),
                constants.x_star.len(),
                default_start.len()
            )));
        }
        if smoothness == SmoothnessClass::Smooth && constants.l.is_none() {
            return Err(Error::Configuration("smooth problems must declare L".into()));
        }
        set.check_membership(&constants.x_star)?;
        set.check_membership(&default_start)?;
        Ok(HiddenConvexProblem {
            name: name.into(),
            model,
            set,
            constants,
            smoothness,
            image,
            default_start,
            notes: Vec::new(),
        })
    }

    /// Attach derivation notes for the declared constants.
    pub fn with_notes(mut self, notes: Vec<String>) -> Self {
        self.notes = notes;
        self
    }

    /// Replace the constants, e.g. to ablate a schedule against a looser bound.
    pub fn with_constants(mut self, constants: ConstantBundle) -> Result<Self> {
        constants.validate()?;
        self.set.check_membership(&constants.x_star)?;
        self.constants = constants;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn constants(&self) -> &ConstantBundle {
        &self.constants
    }

    pub fn smoothness(&self) -> SmoothnessClass {
        self.smoothness
    }

    pub fn is_smooth(&self) -> bool {
        self.smoothness == SmoothnessClass::Smooth
    }

    pub fn image(&self) -> ImageGeometry {
        self.image
    }

    pub fn default_start(&self) -> &[f64] {
        &self.default_start
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Unchecked oracles, for hot loops whose iterates are feasible by construction.
    pub fn model(&self) -> &dyn ProblemModel {
        self.model.as_ref()
    }

    pub fn eval_objective(&self, x: &[f64]) -> Result<f64> {
        self.set.check_membership(x)?;
        Ok(self.model.objective(x))
    }

    pub fn det_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.set.check_membership(x)?;
        let mut g = vec![0.0; self.dim()];
        self.model.gradient(x, &mut g);
        Ok(g)
    }

    pub fn sample_stochastic_gradient(&self, x: &[f64], rs: &mut RandomSource) -> Result<Vec<f64>> {
        self.set.check_membership(x)?;
        let mut g = vec![0.0; self.dim()];
        self.model.sample_gradient(x, rs, &mut g);
        Ok(g)
    }

    pub fn map_forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.set.check_membership(x)?;
        let mut u = vec![0.0; self.dim()];
        self.model.forward(x, &mut u);
        Ok(u)
    }

    pub fn map_inverse(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim() {
            return Err(Error::Domain(format!("expected a point of length {}, got {}", self.dim(), u.len())));
        }
        let mut x = vec![0.0; self.dim()];
        self.model.inverse(u, &mut x)?;
        Ok(x)
    }

    pub fn reformulation(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::Domain(format!("expected a point of length {}, got {}", self.dim(), u.len())));
        }
        Ok(self.model.reformulation(u))
    }
}

/// Telemetry recorded at a logging checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub t: u64,
    pub f_value: f64,
    pub dist_to_opt_sq: f64,
    pub lyapunov: Option<f64>,
    pub grad_err_sq: Option<f64>,
    pub wall_samples: u64,
}
