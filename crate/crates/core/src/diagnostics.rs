//! Runtime certification of the structural conditions of a problem instance.
//!
//! Every check samples points from `X` and reports the worst violation of its inequality.
//! Residuals are "how far the inequality fails": a check passes when the worst residual
//! is at most its slack.

use serde::Serialize;

use crate::envelope;
use crate::error::Error;
use crate::geometry::FeasibleSet;
use crate::linalg;
use crate::model::{ConstantBundle, HiddenConvexProblem};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub samples: usize,
    pub worst_residual: f64,
    pub slack: f64,
    pub declared: Option<f64>,
    pub certified: Option<f64>,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckEntry {
    fn judged(name: &str, samples: usize, worst: f64, slack: f64, declared: Option<f64>, certified: Option<f64>) -> Self {
        let status = if worst <= slack { CheckStatus::Pass } else { CheckStatus::Fail };
        CheckEntry {
            name: name.into(),
            samples,
            worst_residual: worst,
            slack,
            declared,
            certified,
            status,
            detail: String::new(),
        }
    }

    fn skipped(name: &str, reason: impl Into<String>) -> Self {
        CheckEntry {
            name: name.into(),
            samples: 0,
            worst_residual: 0.0,
            slack: 0.0,
            declared: None,
            certified: None,
            status: CheckStatus::Skipped,
            detail: reason.into(),
        }
    }

    fn failed(name: &str, samples: usize, reason: impl Into<String>) -> Self {
        CheckEntry {
            name: name.into(),
            samples,
            worst_residual: f64::INFINITY,
            slack: 0.0,
            declared: None,
            certified: None,
            status: CheckStatus::Fail,
            detail: reason.into(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub problem: String,
    pub seed: u64,
    pub entries: Vec<CheckEntry>,
    pub passed: bool,
}

impl DiagnosticsReport {
    pub fn new(problem: &str, seed: u64) -> Self {
        DiagnosticsReport { problem: problem.into(), seed, entries: Vec::new(), passed: true }
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.passed &= entry.passed();
        self.entries.push(entry);
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn failures(&self) -> Vec<&CheckEntry> {
        self.entries.iter().filter(|e| !e.passed()).collect()
    }

    /// Plain-text table, one line per check.
    pub fn render(&self) -> String {
        let mut s = format!("diagnostics for {} (seed {})\n", self.problem, self.seed);
        for e in &self.entries {
            let status = match e.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "skip",
            };
            s.push_str(&format!("  {status:4}  {:<22} n={:<7} worst={:<12.4e}", e.name, e.samples, e.worst_residual));
            if let Some(d) = e.declared {
                s.push_str(&format!(" declared={d:.6e}"));
            }
            if let Some(c) = e.certified {
                s.push_str(&format!(" empirical={c:.6e}"));
            }
            if !e.detail.is_empty() {
                s.push_str(&format!("  ({})", e.detail));
            }
            s.push('\n');
        }
        s.push_str(if self.passed { "overall: pass\n" } else { "overall: FAIL\n" });
        s
    }
}

fn grad(p: &HiddenConvexProblem, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; p.dim()];
    p.model().gradient(x, &mut g);
    g
}

fn forward(p: &HiddenConvexProblem, x: &[f64]) -> Vec<f64> {
    let mut u = vec![0.0; p.dim()];
    p.model().forward(x, &mut u);
    u
}

fn is_box(set: &FeasibleSet) -> bool {
    set.bounds().is_some()
}

/// Lower Lipschitz bound of `c`: `‖c(x) − c(y)‖ ≥ μ_c‖x − y‖`.
pub fn check_c2(p: &HiddenConvexProblem, n_pairs: usize, rs: &mut RandomSource) -> CheckEntry {
    let mu_c = p.constants().mu_c;
    let mut min_ratio = f64::INFINITY;
    let mut used = 0;
    for _ in 0..n_pairs {
        let x = p.set().sample_uniform(rs);
        let y = p.set().sample_uniform(rs);
        let dx = linalg::dist(&x, &y);
        if dx < 1e-12 {
            continue;
        }
        used += 1;
        min_ratio = min_ratio.min(linalg::dist(&forward(p, &x), &forward(p, &y)) / dx);
    }
    CheckEntry::judged("c2_lower_lipschitz", used, mu_c - min_ratio, 1e-9, Some(mu_c), Some(min_ratio))
}

/// Midpoint strong convexity of `H` on segments between sampled image points. Residuals
/// are scaled by `1 + |H(u)| + |H(v)|`.
pub fn check_h_convexity(p: &HiddenConvexProblem, n_segments: usize, rs: &mut RandomSource) -> CheckEntry {
    let mu_h = p.constants().mu_h;
    let model = p.model();
    let mut worst = f64::NEG_INFINITY;
    let mut modulus = f64::INFINITY;
    for _ in 0..n_segments {
        let u = forward(p, &p.set().sample_uniform(rs));
        let v = forward(p, &p.set().sample_uniform(rs));
        let m: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.5 * (a + b)).collect();
        let (hu, hv, hm) = (model.reformulation(&u), model.reformulation(&v), model.reformulation(&m));
        let duv = linalg::dist_sq(&u, &v);
        let gap = hm - 0.5 * hu - 0.5 * hv + mu_h / 8.0 * duv;
        worst = worst.max(gap / (1.0 + hu.abs() + hv.abs()));
        if duv > 1e-12 {
            modulus = modulus.min(8.0 * (0.5 * hu + 0.5 * hv - hm) / duv);
        }
    }
    CheckEntry::judged("h_midpoint_convexity", n_segments, worst, 1e-9, Some(mu_h), Some(modulus.max(0.0)))
}

/// Both inequalities for `x_α = c⁻¹((1−α)c(x) + αc(x*))`.
pub fn check_prop33(p: &HiddenConvexProblem, n_samples: usize, rs: &mut RandomSource) -> CheckEntry {
    let k = p.constants();
    let model = p.model();
    let u_star = forward(p, &k.x_star);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n_samples {
        let x = p.set().sample_uniform(rs);
        let alpha = match i {
            0 => 0.0,
            1 => 1.0,
            _ => rs.uniform(),
        };
        let xa = match envelope::x_alpha(p, &x, &k.x_star, alpha) {
            Ok(v) => v,
            Err(e) => return CheckEntry::failed("prop33_interpolation", i, e.to_string()),
        };
        let fx = model.objective(&x);
        let du = linalg::dist_sq(&forward(p, &x), &u_star);
        let rhs = (1.0 - alpha) * fx + alpha * k.f_star - (1.0 - alpha) * alpha * k.mu_h / 2.0 * du;
        let r1 = (model.objective(&xa) - rhs) / (1.0 + fx.abs() + k.f_star.abs());
        let r2 = (linalg::dist(&xa, &x) - alpha / k.mu_c * du.sqrt()) / (1.0 + linalg::norm(&x));
        worst = worst.max(r1).max(r2);
    }
    CheckEntry::judged("prop33_interpolation", n_samples, worst, 1e-8, None, None)
}

/// Gradient domination `s ≥ (μ_c/D_U)(F − F*)` and, when `μ_H > 0`, `s² ≥ 2μ_Hμ_c²(F − F*)`.
pub fn check_gradient_domination(p: &HiddenConvexProblem, n_samples: usize, rs: &mut RandomSource) -> CheckEntry {
    const NAME: &str = "gradient_domination";
    if !p.is_smooth() {
        return CheckEntry::skipped(NAME, "non-smooth problem");
    }
    if !is_box(p.set()) {
        return CheckEntry::skipped(NAME, "stationarity measure needs a box-like set");
    }
    let k = p.constants();
    let model = p.model();
    let lin = if k.d_u.is_finite() { k.mu_c / k.d_u } else { 0.0 };
    let quad = 2.0 * k.mu_h * k.mu_c * k.mu_c;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        let x = p.set().sample_uniform(rs);
        let s = match p.set().stationarity_measure(&x, &grad(p, &x)) {
            Ok(s) => s,
            Err(e) => return CheckEntry::skipped(NAME, e.to_string()),
        };
        let gap = model.objective(&x) - k.f_star;
        worst = worst.max(lin * gap - s);
        if k.mu_h > 0.0 {
            worst = worst.max(quad * gap - s * s);
        }
    }
    CheckEntry::judged(NAME, n_samples, worst, 1e-8, None, None)
        .with_detail(if k.mu_h > 0.0 { "linear and quadratic forms" } else { "linear form only" })
}

/// Central differences against the analytic gradient; error relative to `max(1, ‖∇F‖)`.
pub fn check_gradient_fd(p: &HiddenConvexProblem, n_points: usize, fd_step: f64, rs: &mut RandomSource) -> CheckEntry {
    const NAME: &str = "gradient_fd";
    if !p.is_smooth() {
        return CheckEntry::skipped(NAME, "non-smooth problem");
    }
    let model = p.model();
    let d = p.dim();
    let mut worst = 0.0f64;
    for _ in 0..n_points {
        let x = p.set().sample_shrunk(rs, 2.0 * fd_step);
        let g = grad(p, &x);
        let mut fd = vec![0.0; d];
        let mut y = x.clone();
        for i in 0..d {
            y[i] = x[i] + fd_step;
            let fp = model.objective(&y);
            y[i] = x[i] - fd_step;
            let fm = model.objective(&y);
            y[i] = x[i];
            fd[i] = (fp - fm) / (2.0 * fd_step);
        }
        worst = worst.max(linalg::dist(&fd, &g) / linalg::norm(&g).max(1.0));
    }
    CheckEntry::judged(NAME, n_points, worst, 1e-5, None, None)
}

/// `|F(x) − H(c(x))| ≤ 1e-10 (1 + |F(x)|)`.
pub fn check_composition(p: &HiddenConvexProblem, n: usize, rs: &mut RandomSource) -> CheckEntry {
    let model = p.model();
    let mut worst = 0.0f64;
    for _ in 0..n {
        let x = p.set().sample_uniform(rs);
        let f = model.objective(&x);
        worst = worst.max((f - model.reformulation(&forward(p, &x))).abs() / (1.0 + f.abs()));
    }
    CheckEntry::judged("composition", n, worst, 1e-10, None, None)
}

/// `‖c⁻¹(c(x)) − x‖ ≤ 1e-10 (1 + ‖x‖)`.
pub fn check_round_trip(p: &HiddenConvexProblem, n: usize, rs: &mut RandomSource) -> CheckEntry {
    let mut worst = 0.0f64;
    let mut back = vec![0.0; p.dim()];
    for i in 0..n {
        let x = p.set().sample_uniform(rs);
        if let Err(e) = p.model().inverse(&forward(p, &x), &mut back) {
            return CheckEntry::failed("round_trip", i, e.to_string());
        }
        worst = worst.max(linalg::dist(&back, &x) / (1.0 + linalg::norm(&x)));
    }
    CheckEntry::judged("round_trip", n, worst, 1e-10, None, None)
}

/// `F(x*) = F*`, stationarity of the declared `x*` (smooth box problems) and no sampled
/// value below `F* − 1e-8`.
pub fn check_optimality(p: &HiddenConvexProblem, n_samples: usize, rs: &mut RandomSource) -> CheckEntry {
    let k = p.constants();
    let model = p.model();
    let f_at_star = model.objective(&k.x_star);
    let mut worst = (f_at_star - k.f_star).abs() / (1.0 + k.f_star.abs());
    let mut detail = format!("F(x*) - F* = {:.3e}; sampling", f_at_star - k.f_star);
    if p.is_smooth() && is_box(p.set()) {
        if let Ok(s) = p.set().stationarity_measure(&k.x_star, &grad(p, &k.x_star)) {
            worst = worst.max(s);
            detail = format!("F(x*) - F* = {:.3e}; stationarity at x* = {s:.3e}; sampling", f_at_star - k.f_star);
        }
    }
    let mut min_f = f64::INFINITY;
    for _ in 0..n_samples {
        let x = p.set().sample_uniform(rs);
        let f = model.objective(&x);
        min_f = min_f.min(f);
        worst = worst.max(k.f_star - f);
    }
    CheckEntry::judged("optimality", n_samples, worst, 1e-8, Some(k.f_star), Some(min_f)).with_detail(detail)
}

struct PairMaxima {
    lipschitz: f64,
    hypomonotone: f64,
}

fn gradient_pair_maxima(p: &HiddenConvexProblem, n: usize, rs: &mut RandomSource) -> PairMaxima {
    let mut out = PairMaxima { lipschitz: 0.0, hypomonotone: 0.0 };
    for _ in 0..n {
        let x = p.set().sample_uniform(rs);
        // mix of far and near pairs so local curvature is probed
        let y = if rs.uniform() < 0.5 {
            p.set().sample_uniform(rs)
        } else {
            let r = 1e-3 * rs.uniform();
            let mut y: Vec<f64> = x.iter().map(|v| v + r * (2.0 * rs.uniform() - 1.0)).collect();
            p.set().project_in_place(&mut y);
            y
        };
        let dx2 = linalg::dist_sq(&x, &y);
        if dx2 < 1e-20 {
            continue;
        }
        let (gx, gy) = (grad(p, &x), grad(p, &y));
        let dg: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a - b).collect();
        let dxv: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        out.lipschitz = out.lipschitz.max(linalg::norm(&dg) / dx2.sqrt());
        out.hypomonotone = out.hypomonotone.max(-linalg::dot(&dg, &dxv) / dx2);
    }
    out
}

/// Declared `L` and `ℓ` are not exceeded by sampled gradient-difference ratios.
pub fn check_declared_smoothness(p: &HiddenConvexProblem, n_pairs: usize, rs: &mut RandomSource) -> CheckEntry {
    let k = p.constants();
    let m = gradient_pair_maxima(p, n_pairs, rs);
    let mut worst = m.hypomonotone - k.ell * (1.0 + 1e-6);
    let mut detail = format!("empirical ell {:.4e}", m.hypomonotone);
    if p.is_smooth() {
        let l = k.l.unwrap_or(f64::INFINITY);
        worst = worst.max(m.lipschitz - l * (1.0 + 1e-6));
        detail.push_str(&format!(", empirical L {:.4e}", m.lipschitz));
    }
    CheckEntry::judged("declared_smoothness", n_pairs, worst, 0.0, k.l, p.is_smooth().then_some(m.lipschitz)).with_detail(detail)
}

struct MomentEstimate {
    second: f64,
    second_se: f64,
    variance: f64,
    variance_se: f64,
}

fn oracle_moments(p: &HiddenConvexProblem, x: &[f64], draws: usize, rs: &mut RandomSource) -> MomentEstimate {
    let g_true = grad(p, x);
    let mut g = vec![0.0; p.dim()];
    let (mut s1, mut s2, mut v1, mut v2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..draws {
        p.model().sample_gradient(x, rs, &mut g);
        let a = linalg::dot(&g, &g);
        let b = linalg::dist_sq(&g, &g_true);
        s1 += a;
        s2 += a * a;
        v1 += b;
        v2 += b * b;
    }
    let n = draws as f64;
    let se = |m1: f64, m2: f64| ((m2 / n - (m1 / n).powi(2)).max(0.0) / n).sqrt();
    MomentEstimate { second: s1 / n, second_se: se(s1, s2), variance: v1 / n, variance_se: se(v1, v2) }
}

/// Monte Carlo `E‖g‖² ≤ G_F²` and, for smooth problems, `E‖g − ∇F‖² ≤ σ²`, each allowing
/// five standard errors.
pub fn check_oracle_moments(p: &HiddenConvexProblem, n_points: usize, draws: usize, rs: &mut RandomSource) -> CheckEntry {
    let k = p.constants();
    let mut worst = f64::NEG_INFINITY;
    let mut max_second = 0.0f64;
    for _ in 0..n_points {
        let x = p.set().sample_uniform(rs);
        let m = oracle_moments(p, &x, draws, rs);
        max_second = max_second.max(m.second);
        if let Some(g) = k.g_f {
            worst = worst.max(m.second - 5.0 * m.second_se - g * g * (1.0 + 1e-6));
        }
        if p.is_smooth() {
            worst = worst.max(m.variance - 5.0 * m.variance_se - k.sigma * k.sigma * (1.0 + 1e-6));
        }
    }
    CheckEntry::judged("oracle_moments", n_points * draws, worst, 0.0, k.g_f, Some(max_second.sqrt()))
}

/// `‖mean of N draws − ∇F(x)‖ ≤ 5 s/√N` with `s = σ` (smooth) or `G_F`.
pub fn check_oracle_unbiased(p: &HiddenConvexProblem, n_points: usize, draws: usize, rs: &mut RandomSource) -> CheckEntry {
    let k = p.constants();
    let scale = if p.is_smooth() { k.sigma } else { k.g_f.unwrap_or(0.0) };
    let d = p.dim();
    let mut worst = f64::NEG_INFINITY;
    let mut g = vec![0.0; d];
    for _ in 0..n_points {
        let x = p.set().sample_uniform(rs);
        let mut mean = vec![0.0; d];
        for _ in 0..draws {
            p.model().sample_gradient(&x, rs, &mut g);
            for (m, v) in mean.iter_mut().zip(&g) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= draws as f64;
        }
        let gt = grad(p, &x);
        let bound = 5.0 * scale / (draws as f64).sqrt() + 1e-12 * (1.0 + linalg::norm(&gt));
        worst = worst.max(linalg::dist(&mean, &gt) - bound);
    }
    CheckEntry::judged("oracle_unbiased", n_points * draws, worst, 0.0, Some(scale), None)
}

/// Empirical constants and the declared values they contradict.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantEstimate {
    pub candidate: ConstantBundle,
    pub violations: Vec<String>,
}

impl ConstantEstimate {
    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Estimates `μ_c, μ_H, ℓ, L, G_F, σ, D_U, F*, x*` by sampling. Deterministic quantities
/// are compared with the declared ones directly, Monte Carlo moments with five standard
/// errors of slack.
pub fn estimate_constants(p: &HiddenConvexProblem, n_samples: usize, rs: &mut RandomSource) -> ConstantEstimate {
    let k = p.constants();
    let model = p.model();
    let mut violations = Vec::new();

    let c2 = check_c2(p, n_samples, rs);
    let mu_c = c2.certified.unwrap_or(f64::INFINITY);
    if c2.status == CheckStatus::Fail {
        violations.push(format!("declared mu_c {} exceeds empirical {}", k.mu_c, mu_c));
    }
    let hc = check_h_convexity(p, n_samples, rs);
    if hc.status == CheckStatus::Fail {
        violations.push(format!("declared mu_H {} exceeds what H supports", k.mu_h));
    }
    let pairs = gradient_pair_maxima(p, n_samples, rs);
    if pairs.hypomonotone > k.ell * (1.0 + 1e-6) {
        violations.push(format!("declared ell {} below empirical {}", k.ell, pairs.hypomonotone));
    }
    if p.is_smooth() {
        if let Some(l) = k.l {
            if pairs.lipschitz > l * (1.0 + 1e-6) {
                violations.push(format!("declared L {l} below empirical {}", pairs.lipschitz));
            }
        }
    }

    let mut d_u = 0.0f64;
    let mut f_min = f64::INFINITY;
    let mut x_min = k.x_star.clone();
    for _ in 0..n_samples {
        let x = p.set().sample_uniform(rs);
        let y = p.set().sample_uniform(rs);
        d_u = d_u.max(linalg::dist(&forward(p, &x), &forward(p, &y)));
        let f = model.objective(&x);
        if f < f_min {
            f_min = f;
            x_min = x;
        }
    }
    if d_u > k.d_u * (1.0 + 1e-9) {
        violations.push(format!("declared D_U {} below empirical {}", k.d_u, d_u));
    }
    if f_min < k.f_star - 1e-8 {
        violations.push(format!("sampled value {f_min} below declared F* {}", k.f_star));
    }

    let n_points = 20.min(n_samples.max(1));
    let draws = (n_samples / n_points).max(100);
    let (mut g2, mut s2) = (0.0f64, 0.0f64);
    for _ in 0..n_points {
        let x = p.set().sample_uniform(rs);
        let m = oracle_moments(p, &x, draws, rs);
        g2 = g2.max(m.second);
        s2 = s2.max(m.variance);
        if let Some(g) = k.g_f {
            if m.second - 5.0 * m.second_se > g * g * (1.0 + 1e-6) {
                violations.push(format!("declared G_F {g} below empirical {}", m.second.sqrt()));
            }
        }
        if p.is_smooth() && m.variance - 5.0 * m.variance_se > k.sigma * k.sigma * (1.0 + 1e-6) {
            violations.push(format!("declared sigma {} below empirical {}", k.sigma, m.variance.sqrt()));
        }
    }
    violations.dedup();

    ConstantEstimate {
        candidate: ConstantBundle {
            mu_c,
            mu_h: hc.certified.unwrap_or(0.0),
            ell: pairs.hypomonotone.max(0.0),
            l: p.is_smooth().then_some(pairs.lipschitz),
            g_f: Some(g2.sqrt()),
            sigma: s2.sqrt(),
            d_u,
            f_star: f_min,
            x_star: x_min,
        },
        violations,
    }
}

/// Sample sizes for [`certify`].
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsConfig {
    pub pairs: usize,
    pub segments: usize,
    pub prop33_samples: usize,
    pub domination_samples: usize,
    pub fd_points: usize,
    pub fd_step: f64,
    pub identity_samples: usize,
    pub optimality_samples: usize,
    pub oracle_points: usize,
    pub oracle_draws: usize,
    pub moment_points: usize,
    pub moment_draws: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            pairs: 10_000,
            segments: 10_000,
            prop33_samples: 1_000,
            domination_samples: 1_000,
            fd_points: 200,
            fd_step: 1e-5,
            identity_samples: 10_000,
            optimality_samples: 100_000,
            oracle_points: 10,
            oracle_draws: 100_000,
            moment_points: 20,
            moment_draws: 20_000,
        }
    }
}

impl DiagnosticsConfig {
    /// Smaller samples for the pre-run gate of the harness.
    pub fn quick() -> Self {
        DiagnosticsConfig {
            pairs: 2_000,
            segments: 2_000,
            prop33_samples: 500,
            domination_samples: 500,
            fd_points: 50,
            fd_step: 1e-5,
            identity_samples: 2_000,
            optimality_samples: 10_000,
            oracle_points: 5,
            oracle_draws: 20_000,
            moment_points: 5,
            moment_draws: 5_000,
        }
    }
}

/// Runs every applicable check; each uses its own substream of `seed`.
pub fn certify(p: &HiddenConvexProblem, cfg: &DiagnosticsConfig, seed: u64) -> DiagnosticsReport {
    let mut report = DiagnosticsReport::new(p.name(), seed);
    let rs = |k: u64| RandomSource::for_run(seed, k);
    report.push(check_c2(p, cfg.pairs, &mut rs(1)));
    report.push(check_h_convexity(p, cfg.segments, &mut rs(2)));
    report.push(check_prop33(p, cfg.prop33_samples, &mut rs(3)));
    report.push(check_composition(p, cfg.identity_samples, &mut rs(4)));
    report.push(check_round_trip(p, cfg.identity_samples, &mut rs(5)));
    report.push(check_optimality(p, cfg.optimality_samples, &mut rs(6)));
    report.push(check_gradient_domination(p, cfg.domination_samples, &mut rs(7)));
    report.push(check_gradient_fd(p, cfg.fd_points, cfg.fd_step, &mut rs(8)));
    report.push(check_declared_smoothness(p, cfg.pairs, &mut rs(9)));
    report.push(check_oracle_moments(p, cfg.moment_points, cfg.moment_draws, &mut rs(10)));
    report.push(check_oracle_unbiased(p, cfg.oracle_points, cfg.oracle_draws, &mut rs(11)));
    report
}

/// Error summarizing a failed report.
pub fn report_error(report: &DiagnosticsReport) -> Error {
    let names: Vec<&str> = report.failures().iter().map(|e| e.name.as_str()).collect();
    Error::DiagnosticsFailed(format!("{}: {}", report.problem, names.join(", ")))
}
