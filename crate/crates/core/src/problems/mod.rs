//! Built-in hidden-convex test problems and the catalog used by the harness.

mod chain;
mod cosine;
mod neg_square;
mod posynomial;
mod revenue;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

pub use chain::{build_rosenbrock_chain, chain_solution, empirical_mu_c, RosenbrockChain, MU_C_SAFETY, MU_C_SAMPLES};
pub use cosine::{build_cosine, Cosine};
pub use neg_square::{build_neg_square, NegSquare};
pub use posynomial::{build_posynomial, Posynomial, PosynomialOracle};
pub use revenue::{build_revenue_truncation, Revenue};

use crate::error::{Error, Result};
use crate::model::HiddenConvexProblem;

/// A problem parameter as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Flag(bool),
    Int(i64),
    Num(f64),
    Text(String),
    List(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

pub type Params = BTreeMap<String, ParamValue>;

/// Typed access to a parameter map that rejects unknown keys.
struct ParamReader<'a> {
    problem: &'a str,
    params: &'a Params,
    seen: BTreeSet<&'static str>,
}

impl<'a> ParamReader<'a> {
    fn new(problem: &'a str, params: &'a Params) -> Self {
        ParamReader { problem, params, seen: BTreeSet::new() }
    }

    fn err(&self, key: &str, want: &str) -> Error {
        Error::Configuration(format!("{}: parameter '{key}' must be {want}", self.problem))
    }

    fn num(&mut self, key: &'static str, default: f64) -> Result<f64> {
        self.seen.insert(key);
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::Num(v)) => Ok(*v),
            Some(ParamValue::Int(v)) => Ok(*v as f64),
            Some(_) => Err(self.err(key, "a number")),
        }
    }

    fn count(&mut self, key: &'static str, default: usize) -> Result<usize> {
        self.seen.insert(key);
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::Int(v)) if *v >= 0 => Ok(*v as usize),
            Some(_) => Err(self.err(key, "a nonnegative integer")),
        }
    }

    fn flag(&mut self, key: &'static str, default: bool) -> Result<bool> {
        self.seen.insert(key);
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::Flag(v)) => Ok(*v),
            Some(_) => Err(self.err(key, "true or false")),
        }
    }

    fn text(&mut self, key: &'static str, default: &str) -> Result<String> {
        self.seen.insert(key);
        match self.params.get(key) {
            None => Ok(default.to_string()),
            Some(ParamValue::Text(v)) => Ok(v.clone()),
            Some(_) => Err(self.err(key, "a string")),
        }
    }

    /// A list, or a scalar broadcast to length `d`.
    fn list(&mut self, key: &'static str, default: Vec<f64>, d: usize) -> Result<Vec<f64>> {
        self.seen.insert(key);
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::List(v)) => Ok(v.clone()),
            Some(ParamValue::Num(v)) => Ok(vec![*v; d]),
            Some(ParamValue::Int(v)) => Ok(vec![*v as f64; d]),
            Some(_) => Err(self.err(key, "a number or a list of numbers")),
        }
    }

    fn matrix(&mut self, key: &'static str, default: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
        self.seen.insert(key);
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::Matrix(v)) => Ok(v.clone()),
            Some(ParamValue::List(v)) if v.is_empty() => Ok(Vec::new()),
            Some(_) => Err(self.err(key, "a list of lists of numbers")),
        }
    }

    fn finish(self) -> Result<()> {
        for key in self.params.keys() {
            if !self.seen.contains(key.as_str()) {
                return Err(Error::Configuration(format!("{}: unknown parameter '{key}'", self.problem)));
            }
        }
        Ok(())
    }
}

/// A named builder with its documented parameter schema.
pub struct ProblemCatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    /// `(key, description with default)` pairs.
    pub schema: &'static [(&'static str, &'static str)],
    build: fn(&Params) -> Result<HiddenConvexProblem>,
}

impl ProblemCatalogEntry {
    pub fn build(&self, params: &Params) -> Result<HiddenConvexProblem> {
        (self.build)(params)
    }
}

impl std::fmt::Debug for ProblemCatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemCatalogEntry").field("name", &self.name).finish()
    }
}

fn neg_square_entry(p: &Params) -> Result<HiddenConvexProblem> {
    let mut r = ParamReader::new("neg_square", p);
    let delta = r.num("delta", 0.1)?;
    let sigma = r.num("sigma", 0.5)?;
    r.finish()?;
    build_neg_square(delta, sigma)
}

fn cosine_entry(p: &Params) -> Result<HiddenConvexProblem> {
    let mut r = ParamReader::new("cosine", p);
    let delta = r.num("delta", FRAC_PI_2)?;
    let sigma = r.num("sigma", 0.5)?;
    r.finish()?;
    build_cosine(delta, sigma)
}

fn chain_entry(p: &Params) -> Result<HiddenConvexProblem> {
    let mut r = ParamReader::new("rosenbrock_chain", p);
    let d = r.count("d", 2)?;
    let c_coef = r.num("c_coef", 0.5)?;
    let a = r.num("box_halfwidth", 20.0)?;
    let sigma = r.num("sigma", 0.1)?;
    let smooth = r.flag("smooth", true)?;
    r.finish()?;
    build_rosenbrock_chain(d, c_coef, a, sigma, smooth)
}

fn posynomial_entry(p: &Params) -> Result<HiddenConvexProblem> {
    let mut r = ParamReader::new("posynomial", p);
    let d = r.count("d", 3)?;
    // default: x1 x2 x3 + 1/x1 + 1/x2 + 1/x3, generalized to any d
    let mut default_exps = vec![vec![1.0; d]];
    for i in 0..d {
        let mut row = vec![0.0; d];
        row[i] = -1.0;
        default_exps.push(row);
    }
    let coeffs = r.list("coeffs", vec![1.0; d + 1], d + 1)?;
    let exponents = r.matrix("exponents", default_exps)?;
    let lower = r.list("lower", vec![2.0 / 3.0; d], d)?;
    let upper = r.list("upper", vec![1.5; d], d)?;
    let mode = r.text("oracle", "additive")?;
    let sigma = r.num("sigma", 0.05)?;
    r.finish()?;
    let oracle = match mode.as_str() {
        "additive" => PosynomialOracle::Additive { sigma },
        "term_sampling" => PosynomialOracle::TermSampling,
        other => {
            return Err(Error::Configuration(format!(
                "posynomial: oracle must be 'additive' or 'term_sampling', got '{other}'"
            )))
        }
    };
    build_posynomial(coeffs, exponents, lower, upper, oracle)
}

fn revenue_entry(p: &Params) -> Result<HiddenConvexProblem> {
    let mut r = ParamReader::new("revenue", p);
    let d = r.count("d", 2)?;
    let caps = r.list("caps", vec![4.0; d], d)?;
    let limit = r.num("limit", 3.0)?;
    let prices = r.list("prices", vec![3.0; d], d)?;
    let lambda = r.num("lambda", 2.0)?;
    r.finish()?;
    build_revenue_truncation(caps, limit, prices, lambda)
}

pub static CATALOG: &[ProblemCatalogEntry] = &[
    ProblemCatalogEntry {
        name: "neg_square",
        summary: "F(x) = -x^2 on [delta, 1]; c(x) = x^2, H(u) = -u",
        schema: &[("delta", "left endpoint in (0, 1), default 0.1"), ("sigma", "additive noise level, default 0.5")],
        build: neg_square_entry,
    },
    ProblemCatalogEntry {
        name: "cosine",
        summary: "F(x) = cos x on [delta, 2pi - delta]; c(x) = cos(x/2), H(u) = 2u^2 - 1",
        schema: &[("delta", "margin in (0, pi), default pi/2"), ("sigma", "additive noise level, default 0.5")],
        build: cosine_entry,
    },
    ProblemCatalogEntry {
        name: "rosenbrock_chain",
        summary: "chained Rosenbrock function on [-a, a]^d (smooth) or its d = 2 max variant",
        schema: &[
            ("d", "dimension >= 2, default 2"),
            ("c_coef", "chain weight, default 0.5"),
            ("box_halfwidth", "a, default 20"),
            ("sigma", "additive noise level, default 0.1"),
            ("smooth", "false selects the max variant, default true"),
        ],
        build: chain_entry,
    },
    ProblemCatalogEntry {
        name: "posynomial",
        summary: "sum_k b_k prod_i x_i^a_ki on a positive box; c = log",
        schema: &[
            ("d", "dimension, default 3"),
            ("coeffs", "term coefficients b_k, default all ones"),
            ("exponents", "K x d exponent rows, default x1...xd + sum 1/x_i"),
            ("lower", "box lower bounds, default 2/3"),
            ("upper", "box upper bounds, default 1.5"),
            ("oracle", "'additive' or 'term_sampling', default additive"),
            ("sigma", "additive noise level, default 0.05"),
        ],
        build: posynomial_entry,
    },
    ProblemCatalogEntry {
        name: "revenue",
        summary: "separable booking limits with uniform demand; c_i(x) = E min(x_i, xi_i)",
        schema: &[
            ("d", "dimension, default 2"),
            ("caps", "demand caps b_i, default 4"),
            ("limit", "booking limit D < min b, default 3"),
            ("prices", "prices r_i, default 3"),
            ("lambda", "regularizer weight, default 2"),
        ],
        build: revenue_entry,
    },
];

pub fn catalog_entry(name: &str) -> Result<&'static ProblemCatalogEntry> {
    CATALOG.iter().find(|e| e.name == name).ok_or_else(|| {
        let known: Vec<&str> = CATALOG.iter().map(|e| e.name).collect();
        Error::Configuration(format!("unknown problem '{name}' (known: {})", known.join(", ")))
    })
}

pub fn build_problem(name: &str, params: &Params) -> Result<HiddenConvexProblem> {
    catalog_entry(name)?.build(params)
}

/// Every catalog problem at its default parameters, plus the chain max variant.
pub fn default_instances() -> Result<Vec<HiddenConvexProblem>> {
    let mut out = Vec::new();
    for e in CATALOG {
        out.push(e.build(&Params::new())?);
    }
    let mut p = Params::new();
    p.insert("smooth".into(), ParamValue::Flag(false));
    out.push(build_problem("rosenbrock_chain", &p)?);
    Ok(out)
}
