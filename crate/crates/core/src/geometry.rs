//! Euclidean projections onto simple convex sets and the normal-cone stationarity measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::RandomSource;

/// Absolute tolerance of the membership test.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet {
    /// Hyperrectangle `{lower ≤ x ≤ upper}`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Scaled probability simplex `{x ≥ 0, Σx = scale}`.
    Simplex { dim: usize, scale: f64 },
    /// Product of closed intervals; same geometry as a box, kept as its own kind.
    ProductOfIntervals { intervals: Vec<(f64, f64)> },
}

impl FeasibleSet {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Configuration("box bounds must be nonempty and of equal length".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::Configuration(format!("box coordinate {i}: need finite lower < upper, got [{l}, {u}]")));
            }
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new_box(vec![lo; d], vec![hi; d])
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new_box(vec![lo], vec![hi])
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Configuration("ball center must be a nonempty finite point".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Configuration(format!("ball radius must be positive, got {radius}")));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn new_simplex(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Configuration("simplex dimension must be positive".into()));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Configuration(format!("simplex scale must be positive, got {scale}")));
        }
        Ok(FeasibleSet::Simplex { dim, scale })
    }

    pub fn new_product(intervals: Vec<(f64, f64)>) -> Result<Self> {
        let (lower, upper): (Vec<f64>, Vec<f64>) = intervals.iter().copied().unzip();
        Self::new_box(lower, upper)?;
        Ok(FeasibleSet::ProductOfIntervals { intervals })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Ball { center, .. } => center.len(),
            FeasibleSet::Simplex { dim, .. } => *dim,
            FeasibleSet::ProductOfIntervals { intervals } => intervals.len(),
        }
    }

    /// Per-coordinate bounds for box-like sets.
    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            FeasibleSet::Box { lower, upper } => Some((lower.clone(), upper.clone())),
            FeasibleSet::ProductOfIntervals { intervals } => Some(intervals.iter().copied().unzip()),
            _ => None,
        }
    }

    #[inline]
    fn coord_bounds(&self, i: usize) -> (f64, f64) {
        match self {
            FeasibleSet::Box { lower, upper } => (lower[i], upper[i]),
            FeasibleSet::ProductOfIntervals { intervals } => intervals[i],
            _ => unreachable!("coord_bounds on a non-box set"),
        }
    }

    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        let mut x = y.to_vec();
        self.project_in_place(&mut x);
        x
    }

    pub fn project_in_place(&self, y: &mut [f64]) {
        match self {
            FeasibleSet::Box { lower, upper } => {
                for ((v, l), u) in y.iter_mut().zip(lower).zip(upper) {
                    *v = v.clamp(*l, *u);
                }
            }
            FeasibleSet::ProductOfIntervals { intervals } => {
                for (v, (l, u)) in y.iter_mut().zip(intervals) {
                    *v = v.clamp(*l, *u);
                }
            }
            FeasibleSet::Ball { center, radius } => {
                let r = linalg::dist(y, center);
                if r > *radius {
                    let s = radius / r;
                    for (v, c) in y.iter_mut().zip(center) {
                        *v = c + s * (*v - c);
                    }
                }
            }
            FeasibleSet::Simplex { scale, .. } => project_simplex(y, *scale),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.check_membership(x).is_ok()
    }

    /// Membership test with absolute tolerance [`MEMBERSHIP_TOL`].
    pub fn check_membership(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!("expected a point of length {}, got {}", self.dim(), x.len())));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("coordinate {i} is not finite")));
        }
        match self {
            FeasibleSet::Box { .. } | FeasibleSet::ProductOfIntervals { .. } => {
                for (i, v) in x.iter().enumerate() {
                    let (l, u) = self.coord_bounds(i);
                    if *v < l - MEMBERSHIP_TOL {
                        return Err(Error::Domain(format!("coordinate {i} = {v} is below the lower bound {l}")));
                    }
                    if *v > u + MEMBERSHIP_TOL {
                        return Err(Error::Domain(format!("coordinate {i} = {v} exceeds the upper bound {u}")));
                    }
                }
            }
            FeasibleSet::Ball { center, radius } => {
                let r = linalg::dist(x, center);
                if r > radius + MEMBERSHIP_TOL {
                    return Err(Error::Domain(format!("distance {r} to the ball center exceeds the radius {radius}")));
                }
            }
            FeasibleSet::Simplex { scale, .. } => {
                if let Some(i) = x.iter().position(|v| *v < -MEMBERSHIP_TOL) {
                    return Err(Error::Domain(format!("coordinate {i} = {} is negative", x[i])));
                }
                let s: f64 = x.iter().sum();
                if (s - scale).abs() > MEMBERSHIP_TOL * (1.0 + scale) {
                    return Err(Error::Domain(format!("coordinates sum to {s}, expected {scale}")));
                }
            }
        }
        Ok(())
    }

    /// `dist(0, g + N_X(x))`; closed form on box-like sets only.
    pub fn stationarity_measure(&self, x: &[f64], g: &[f64]) -> Result<f64> {
        match self {
            FeasibleSet::Box { .. } | FeasibleSet::ProductOfIntervals { .. } => {
                self.check_membership(x)?;
                if g.len() != x.len() {
                    return Err(Error::Domain("gradient length does not match the point".into()));
                }
                let mut s = 0.0;
                for (i, (xi, gi)) in x.iter().zip(g).enumerate() {
                    let (l, u) = self.coord_bounds(i);
                    let c = if *xi <= l + MEMBERSHIP_TOL {
                        gi.min(0.0)
                    } else if *xi >= u - MEMBERSHIP_TOL {
                        gi.max(0.0)
                    } else {
                        *gi
                    };
                    s += c * c;
                }
                Ok(s.sqrt())
            }
            FeasibleSet::Ball { .. } => Err(Error::Unsupported("stationarity measure on a ball".into())),
            FeasibleSet::Simplex { .. } => Err(Error::Unsupported("stationarity measure on a simplex".into())),
        }
    }

    /// Uniform sample from the set.
    pub fn sample_uniform(&self, rs: &mut RandomSource) -> Vec<f64> {
        self.sample_shrunk(rs, 0.0)
    }

    /// Uniform sample from a box-like set shrunk by `margin` on every face.
    /// Other kinds ignore the margin.
    pub fn sample_shrunk(&self, rs: &mut RandomSource, margin: f64) -> Vec<f64> {
        match self {
            FeasibleSet::Box { .. } | FeasibleSet::ProductOfIntervals { .. } => (0..self.dim())
                .map(|i| {
                    let (l, u) = self.coord_bounds(i);
                    let m = margin.min(0.25 * (u - l));
                    rs.uniform_in(l + m, u - m)
                })
                .collect(),
            FeasibleSet::Ball { center, radius } => {
                let d = center.len();
                let mut z = vec![0.0; d];
                rs.fill_normal(&mut z);
                let n = linalg::norm(&z).max(f64::MIN_POSITIVE);
                let r = radius * rs.uniform().powf(1.0 / d as f64);
                center.iter().zip(&z).map(|(c, zi)| c + r * zi / n).collect()
            }
            FeasibleSet::Simplex { dim, scale } => {
                let e: Vec<f64> = (0..*dim).map(|_| -(1.0 - rs.uniform()).ln()).collect();
                let s: f64 = e.iter().sum();
                e.iter().map(|v| scale * v / s).collect()
            }
        }
    }
}

/// Sort-and-threshold projection onto `{x ≥ 0, Σx = scale}`.
fn project_simplex(y: &mut [f64], scale: f64) {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - scale) / (k + 1) as f64;
        if *v - t > 0.0 {
            theta = t;
        }
    }
    for v in y.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn box_clamps() {
        let s = FeasibleSet::cube(2, 0.0, 1.0).unwrap();
        assert_eq!(s.project(&[2.0, -1.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn simplex_symmetric_point() {
        let s = FeasibleSet::new_simplex(2, 1.0).unwrap();
        assert_eq!(s.project(&[1.0, 1.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn simplex_known_projection() {
        // (2, 0, 0) - theta with theta = 1 on the single active coordinate
        let s = FeasibleSet::new_simplex(3, 1.0).unwrap();
        assert_eq!(s.project(&[2.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0]);
        let p = s.project(&[0.5, 0.3, -1.0]);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.4).abs() < 1e-15 && p[2] == 0.0);
    }

    #[test]
    fn ball_radial() {
        let s = FeasibleSet::new_ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = s.project(&[3.0, 4.0]);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(FeasibleSet::interval(1.0, 1.0).is_err());
        assert!(FeasibleSet::new_ball(vec![0.0], 0.0).is_err());
        assert!(FeasibleSet::new_simplex(3, -1.0).is_err());
        assert!(FeasibleSet::new_product(vec![(0.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn membership_error_names_constraint() {
        let s = FeasibleSet::interval(0.1, 1.0).unwrap();
        let e = s.check_membership(&[1.5]).unwrap_err().to_string();
        assert!(e.contains("upper bound"), "{e}");
        assert!(s.contains(&[1.0 + 1e-13]));
    }

    #[test]
    fn stationarity_examples() {
        let s = FeasibleSet::cube(2, -10.0, 10.0).unwrap();
        assert_eq!(s.stationarity_measure(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let s = FeasibleSet::interval(0.0, 1.0).unwrap();
        assert_eq!(s.stationarity_measure(&[1.0], &[-2.0]).unwrap(), 0.0);
        assert_eq!(s.stationarity_measure(&[1.0], &[2.0]).unwrap(), 2.0);
        assert_eq!(s.stationarity_measure(&[0.0], &[2.0]).unwrap(), 0.0);
        assert_eq!(s.stationarity_measure(&[0.0], &[-2.0]).unwrap(), 2.0);
    }

    #[test]
    fn stationarity_unsupported_kinds() {
        let b = FeasibleSet::new_ball(vec![0.0], 1.0).unwrap();
        assert!(matches!(b.stationarity_measure(&[0.0], &[1.0]), Err(Error::Unsupported(_))));
        let s = FeasibleSet::new_simplex(2, 1.0).unwrap();
        assert!(matches!(s.stationarity_measure(&[0.5, 0.5], &[1.0, 1.0]), Err(Error::Unsupported(_))));
    }

    fn sets() -> Vec<FeasibleSet> {
        vec![
            FeasibleSet::new_box(vec![-1.0, 0.0, 2.0], vec![1.0, 0.5, 3.0]).unwrap(),
            FeasibleSet::new_ball(vec![0.5, -0.5, 1.0], 1.5).unwrap(),
            FeasibleSet::new_simplex(3, 2.0).unwrap(),
            FeasibleSet::new_product(vec![(0.0, 1.0), (-2.0, -1.0), (5.0, 6.0)]).unwrap(),
        ]
    }

    #[test]
    fn projection_variational_inequality() {
        let mut rs = RandomSource::new(3);
        for s in sets() {
            for _ in 0..1000 {
                let y: Vec<f64> = (0..3).map(|_| rs.uniform_in(-5.0, 5.0)).collect();
                let z = s.sample_uniform(&mut rs);
                let p = s.project(&y);
                let ip: f64 = (0..3).map(|i| (y[i] - p[i]) * (z[i] - p[i])).sum();
                assert!(ip <= 1e-10, "{s:?}: {ip}");
            }
        }
    }

    #[test]
    fn nonexpansive_on_many_pairs() {
        let mut rs = RandomSource::new(4);
        for s in sets() {
            for _ in 0..10_000 {
                let y: Vec<f64> = (0..3).map(|_| rs.uniform_in(-5.0, 5.0)).collect();
                let z: Vec<f64> = (0..3).map(|_| rs.uniform_in(-5.0, 5.0)).collect();
                let d = linalg::dist(&s.project(&y), &s.project(&z));
                assert!(d <= linalg::dist(&y, &z) + 1e-12);
            }
        }
    }

    #[test]
    fn uniform_samples_are_members() {
        let mut rs = RandomSource::new(5);
        for s in sets() {
            for _ in 0..100 {
                assert!(s.contains(&s.sample_uniform(&mut rs)));
            }
        }
    }

    proptest! {
        #[test]
        fn projection_feasible_idempotent(y in prop::collection::vec(-1e3f64..1e3, 3), k in 0usize..4) {
            let s = &sets()[k];
            let p = s.project(&y);
            prop_assert!(s.contains(&p));
            let q = s.project(&p);
            prop_assert!(linalg::dist(&p, &q) <= 1e-12 * (1.0 + linalg::norm(&p)));
        }

        #[test]
        fn projection_nonexpansive(y in prop::collection::vec(-50f64..50.0, 3),
                                   z in prop::collection::vec(-50f64..50.0, 3), k in 0usize..4) {
            let s = &sets()[k];
            let d = linalg::dist(&s.project(&y), &s.project(&z));
            prop_assert!(d <= linalg::dist(&y, &z) + 1e-12);
        }

        #[test]
        fn members_are_fixed(seed in 0u64..1000, k in 0usize..4) {
            let s = &sets()[k];
            let mut rs = RandomSource::new(seed);
            let x = s.sample_uniform(&mut rs);
            let p = s.project(&x);
            prop_assert!(linalg::dist(&p, &x) <= 1e-12);
        }
    }
}
