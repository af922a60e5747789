use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ConstantBundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Stochastic subgradient method.
    Sm,
    /// Projected SGD.
    Psgd,
    /// Projected SGD with heavy-ball momentum.
    Psgdm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    SmConvex,
    SmStronglyConvex,
    PsgdConvex,
    PsgdStronglyConvex,
    PsgdmConvex,
    PsgdmStronglyConvex,
    Manual,
}

impl TheoremTag {
    pub fn method(self) -> Option<Method> {
        match self {
            TheoremTag::SmConvex | TheoremTag::SmStronglyConvex => Some(Method::Sm),
            TheoremTag::PsgdConvex | TheoremTag::PsgdStronglyConvex => Some(Method::Psgd),
            TheoremTag::PsgdmConvex | TheoremTag::PsgdmStronglyConvex => Some(Method::Psgdm),
            TheoremTag::Manual => None,
        }
    }

    pub fn is_strongly_convex(self) -> bool {
        matches!(self, TheoremTag::SmStronglyConvex | TheoremTag::PsgdStronglyConvex | TheoremTag::PsgdmStronglyConvex)
    }
}

/// Hyperparameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub theorem: TheoremTag,
    pub method: Method,
    pub eta: f64,
    /// Contraction rate entering `iterations`; zero when unknown.
    pub alpha: f64,
    /// Momentum weight; 1 for methods without momentum.
    pub beta: f64,
    /// Moreau parameter of the Lyapunov function.
    pub rho: f64,
    pub iterations: u64,
    pub batch: usize,
    pub post_batch: Option<usize>,
    pub epsilon: f64,
}

impl Schedule {
    pub fn manual(method: Method, eta: f64, beta: f64, rho: f64, iterations: u64) -> Self {
        Schedule {
            theorem: TheoremTag::Manual,
            method,
            eta,
            alpha: 0.0,
            beta,
            rho,
            iterations,
            batch: 1,
            post_batch: None,
            epsilon: f64::NAN,
        }
    }

    /// Checks the step-size hypotheses of the schedule's method against `constants`.
    pub fn check_hypotheses(&self, constants: &ConstantBundle) -> Result<()> {
        let fail = |m: String| Err(Error::ScheduleViolation(m));
        let (eta, alpha, beta) = (self.eta, self.alpha, self.beta);
        if !(eta >= 0.0 && eta.is_finite()) {
            return fail(format!("eta = {eta} must be finite and nonnegative"));
        }
        if self.batch == 0 {
            return fail("batch size must be at least 1".into());
        }
        let theorem = self.theorem != TheoremTag::Manual;
        if theorem && !(alpha > 0.0) {
            return fail(format!("alpha = {alpha} must be positive"));
        }
        if let Some(m) = self.theorem.method() {
            if m != self.method {
                return fail(format!("theorem {:?} does not govern method {:?}", self.theorem, self.method));
            }
        }
        match self.method {
            Method::Sm => {
                let ell = constants.ell;
                if ell > 0.0 && exceeds(eta, 1.0 / (2.0 * ell)) {
                    return fail(format!("eta = {eta} exceeds 1/(2 ell) = {}", 1.0 / (2.0 * ell)));
                }
                if exceeds(alpha, eta * ell) {
                    return fail(format!("alpha = {alpha} exceeds eta ell = {}", eta * ell));
                }
                if self.theorem == TheoremTag::SmStronglyConvex && exceeds(alpha, eta * constants.mu_c.powi(2) * constants.mu_h / 2.0) {
                    return fail("alpha exceeds eta mu_c^2 mu_H / 2".into());
                }
            }
            Method::Psgd => {
                let l = constants.require_l()?;
                if exceeds(eta, 2.0 / (9.0 * l)) {
                    return fail(format!("eta = {eta} exceeds 2/(9L) = {}", 2.0 / (9.0 * l)));
                }
                if exceeds(alpha, 2.0 * eta * l) {
                    return fail(format!("alpha = {alpha} exceeds 2 eta L = {}", 2.0 * eta * l));
                }
                if self.theorem == TheoremTag::PsgdStronglyConvex && exceeds(alpha, eta * constants.mu_c.powi(2) * constants.mu_h / 2.0) {
                    return fail("alpha exceeds eta mu_c^2 mu_H / 2".into());
                }
            }
            Method::Psgdm => {
                let l = constants.require_l()?;
                if !(beta > 0.0 && beta <= 1.0) {
                    return fail(format!("beta = {beta} must lie in (0, 1]"));
                }
                if exceeds(eta, beta / (4.0 * l)) {
                    return fail(format!("eta = {eta} exceeds beta/(4L) = {}", beta / (4.0 * l)));
                }
                if exceeds(alpha, beta / 2.0) {
                    return fail(format!("alpha = {alpha} exceeds beta/2"));
                }
                if self.theorem == TheoremTag::PsgdmStronglyConvex && exceeds(alpha, constants.mu_c.powi(2) * constants.mu_h * eta / 4.0) {
                    return fail("alpha exceeds mu_c^2 mu_H eta / 4".into());
                }
            }
        }
        if self.method != Method::Psgdm && beta != 1.0 {
            return fail(format!("beta = {beta} is only meaningful with momentum"));
        }
        Ok(())
    }
}

/// `a > b` beyond rounding.
fn exceeds(a: f64, b: f64) -> bool {
    a > b * (1.0 + 1e-12)
}

/// `ceil((1/α) ln(3Λ₀/ε))`, clamped at zero.
fn iteration_count(alpha: f64, lyapunov0: f64, epsilon: f64) -> Result<u64> {
    let t = (3.0 * lyapunov0 / epsilon).ln() / alpha;
    if t.is_nan() || t > 1e18 {
        return Err(Error::Configuration(format!("iteration count {t:e} is not representable")));
    }
    Ok(if t > 0.0 { t.ceil() as u64 } else { 0 })
}

/// Mini-batch size `max(1, ceil((G_F σ/(3Lε))²))` of the post-processing step.
pub fn post_batch_size(constants: &ConstantBundle, epsilon: f64) -> Result<usize> {
    let g = constants.require_g_f()?;
    let l = constants.require_l()?;
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let b = (g * constants.sigma / (3.0 * l * epsilon)).powi(2).ceil();
    Ok(if b >= 1.0 { b as usize } else { 1 })
}

/// Builds the schedule prescribed for `tag`; `lyapunov0` bounds the initial Lyapunov value
/// (`Λ₀` for the methods without momentum, `Λ₀^HB` with momentum).
pub fn make_schedule(tag: TheoremTag, constants: &ConstantBundle, epsilon: f64, lyapunov0: f64) -> Result<Schedule> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(lyapunov0 >= 0.0 && lyapunov0.is_finite()) {
        return Err(Error::Domain(format!("initial Lyapunov bound must be finite and nonnegative, got {lyapunov0}")));
    }
    let k = constants;
    let mu_c = k.mu_c;
    let eps = epsilon;
    let (eta, alpha, beta, rho) = match tag {
        TheoremTag::SmConvex => {
            let ell = k.require_ell()?;
            let g = k.require_g_f()?;
            let du = k.require_finite_d_u()?;
            let eta = (1.0 / (2.0 * ell)) * 1f64.min(mu_c * mu_c * eps * eps / (48.0 * du * du * g * g));
            let alpha = (eta * ell)
                .min(2.0 * eps * mu_c * mu_c * eta / (9.0 * du * du))
                .min((32.0 * ell).sqrt() * mu_c * g * eta.powf(1.5) / (3f64.sqrt() * du));
            (eta, alpha, 1.0, 2.0 * ell)
        }
        TheoremTag::SmStronglyConvex => {
            let ell = k.require_ell()?;
            let g = k.require_g_f()?;
            let mu_h = k.require_mu_h()?;
            let eta = (1.0 / (2.0 * ell)).min(mu_c * mu_c * mu_h * eps / (20.0 * ell * g * g));
            let alpha = (eta * ell).min(eta * mu_c * mu_c * mu_h / 2.0);
            (eta, alpha, 1.0, 2.0 * ell)
        }
        TheoremTag::PsgdConvex => {
            let l = k.require_l()?;
            let du = k.require_finite_d_u()?;
            let s = k.sigma;
            let eta = (2.0 / (9.0 * l)) * 1f64.min(mu_c * mu_c * eps * eps / (12.0 * du * du * s * s));
            let alpha = (2.0 * eta * l)
                .min(2.0 * eps * mu_c * mu_c * eta / (3.0 * du * du))
                .min((8.0 * l).sqrt() * mu_c * s * eta.powf(1.5) / (3f64.sqrt() * du));
            let alpha = if s == 0.0 { (2.0 * eta * l).min(2.0 * eps * mu_c * mu_c * eta / (3.0 * du * du)) } else { alpha };
            (eta, alpha, 1.0, 4.0 * l)
        }
        TheoremTag::PsgdStronglyConvex => {
            let l = k.require_l()?;
            let mu_h = k.require_mu_h()?;
            let s = k.sigma;
            let eta = (2.0 / (9.0 * l)).min(mu_c * mu_c * mu_h * eps / (10.0 * l * s * s));
            let alpha = (2.0 * eta * l).min(eta * mu_c * mu_c * mu_h / 2.0);
            (eta, alpha, 1.0, 4.0 * l)
        }
        TheoremTag::PsgdmConvex => {
            let l = k.require_l()?;
            let du = k.require_finite_d_u()?;
            let s = k.sigma;
            let beta = 1f64.min(mu_c * mu_c * eps * eps / (9.0 * du * du * s * s));
            let eta = beta / (4.0 * l);
            let mut alpha = (beta / 2.0).min(3.0 * mu_c * mu_c * beta * eps / (2.0 * l * du * du));
            if s > 0.0 {
                alpha = alpha.min(s * mu_c * beta.powf(1.5) / (4.0 * l * du));
            }
            (eta, alpha, beta, 4.0 * l)
        }
        TheoremTag::PsgdmStronglyConvex => {
            let l = k.require_l()?;
            let mu_h = k.require_mu_h()?;
            let s = k.sigma;
            let beta = 1f64.min(mu_c * mu_c * mu_h * eps / (8.0 * s * s));
            let eta = beta / (4.0 * l);
            let alpha = (beta / 2.0).min(mu_c * mu_c * mu_h * eta / 4.0);
            (eta, alpha, beta, 4.0 * l)
        }
        TheoremTag::Manual => {
            return Err(Error::Configuration("manual schedules are built with Schedule::manual".into()));
        }
    };
    let method = tag.method().expect("theorem tags carry a method");
    let post_batch = match method {
        Method::Sm => None,
        _ => post_batch_size(constants, epsilon).ok(),
    };
    let schedule = Schedule {
        theorem: tag,
        method,
        eta,
        alpha,
        beta,
        rho,
        iterations: iteration_count(alpha, lyapunov0, epsilon)?,
        batch: 1,
        post_batch,
        epsilon,
    };
    schedule.check_hypotheses(constants)?;
    Ok(schedule)
}

/// As [`make_schedule`] with the initial bound derived from `gap ≥ F(x⁰) − F*`:
/// `Λ₀ ≤ gap`, and `Λ₀^HB ≤ gap + ησ²/β` for momentum with a single-draw `g⁰`.
pub fn make_schedule_from_gap(tag: TheoremTag, constants: &ConstantBundle, epsilon: f64, gap: f64) -> Result<Schedule> {
    let s = make_schedule(tag, constants, epsilon, gap)?;
    if s.method == Method::Psgdm {
        let bound = gap + s.eta * constants.sigma * constants.sigma / s.beta;
        make_schedule(tag, constants, epsilon, bound)
    } else {
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ConstantBundle {
        ConstantBundle {
            mu_c: 1.0,
            mu_h: 4.0,
            ell: 1.0,
            l: Some(1.0),
            g_f: Some(1.0),
            sigma: 1.0,
            d_u: 1.0,
            f_star: 0.0,
            x_star: vec![0.0],
        }
    }

    #[test]
    fn sm_convex_step() {
        let s = make_schedule(TheoremTag::SmConvex, &unit(), 1.0, 1.0).unwrap();
        assert_eq!(s.eta, 1.0 / 96.0);
        assert_eq!(s.rho, 2.0);
    }

    #[test]
    fn sm_convex_saturates() {
        let eps = 48f64.sqrt() * 1.01;
        let s = make_schedule(TheoremTag::SmConvex, &unit(), eps, 100.0).unwrap();
        assert_eq!(s.eta, 0.5);
    }

    #[test]
    fn psgdm_strongly_convex_step() {
        let s = make_schedule(TheoremTag::PsgdmStronglyConvex, &unit(), 0.1, 1.0).unwrap();
        assert!((s.beta - 0.05).abs() < 1e-15);
        assert!((s.eta - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn iteration_count_formula() {
        let k = unit();
        let s = make_schedule(TheoremTag::PsgdStronglyConvex, &k, 0.05, 2.0).unwrap();
        let expect = ((3.0 * 2.0 / 0.05f64).ln() / s.alpha).ceil() as u64;
        assert_eq!(s.iterations, expect);
        // a Lyapunov bound already below eps/3 needs no iterations
        let s = make_schedule(TheoremTag::PsgdStronglyConvex, &k, 0.05, 0.01).unwrap();
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn missing_constants_named() {
        let mut k = unit();
        k.g_f = None;
        let e = make_schedule(TheoremTag::SmConvex, &k, 0.1, 1.0).unwrap_err().to_string();
        assert!(e.contains("G_F"), "{e}");
        let mut k = unit();
        k.mu_h = 0.0;
        let e = make_schedule(TheoremTag::PsgdStronglyConvex, &k, 0.1, 1.0).unwrap_err().to_string();
        assert!(e.contains("mu_H"), "{e}");
        let mut k = unit();
        k.d_u = f64::INFINITY;
        let e = make_schedule(TheoremTag::PsgdConvex, &k, 0.1, 1.0).unwrap_err().to_string();
        assert!(e.contains("D_U"), "{e}");
        assert!(matches!(make_schedule(TheoremTag::PsgdConvex, &unit(), 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn post_batch_example() {
        assert_eq!(post_batch_size(&unit(), 0.1).unwrap(), 12);
        let mut k = unit();
        k.sigma = 0.0;
        assert_eq!(post_batch_size(&k, 0.1).unwrap(), 1);
    }

    #[test]
    fn violations_detected() {
        let k = unit();
        let mut s = make_schedule(TheoremTag::PsgdConvex, &k, 0.1, 1.0).unwrap();
        s.eta = 1.0;
        assert!(matches!(s.check_hypotheses(&k), Err(Error::ScheduleViolation(_))));
        let mut s = make_schedule(TheoremTag::PsgdmConvex, &k, 0.1, 1.0).unwrap();
        s.beta = 1.5;
        assert!(s.check_hypotheses(&k).is_err());
        let s = Schedule::manual(Method::Sm, 0.0, 1.0, 2.0, 10);
        assert!(s.check_hypotheses(&k).is_ok());
    }

    #[test]
    fn all_theorems_satisfy_hypotheses_over_a_grid() {
        let tags = [
            TheoremTag::SmConvex,
            TheoremTag::SmStronglyConvex,
            TheoremTag::PsgdConvex,
            TheoremTag::PsgdStronglyConvex,
            TheoremTag::PsgdmConvex,
            TheoremTag::PsgdmStronglyConvex,
        ];
        for &mu_c in &[0.01, 0.3, 2.0] {
            for &sigma in &[0.0, 0.1, 3.0] {
                for &eps in &[1e-3, 0.05, 10.0] {
                    let mut k = unit();
                    k.mu_c = mu_c;
                    k.sigma = sigma;
                    k.g_f = Some((1.0 + sigma * sigma).sqrt());
                    k.l = Some(7.0);
                    k.ell = 3.0;
                    for tag in tags {
                        match make_schedule_from_gap(tag, &k, eps, 5.0) {
                            Ok(s) => s.check_hypotheses(&k).unwrap(),
                            // only the most extreme corner overflows the iteration counter
                            Err(Error::Configuration(m)) => {
                                assert!(m.contains("not representable") && eps < 0.01 && mu_c < 0.1, "{m}")
                            }
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
            }
        }
    }
}
