//! The Beta-Binomial Markov chain driving the length variables.
//!
//! `v_1 ~ Beta(alpha, theta)`, then `x_i | v_i ~ Bin(kappa, v_i)` and
//! `v_{i+1} | x_i ~ Beta(alpha + x_i, theta + kappa - x_i)`. The chain on `v`
//! is reversible with stationary law Beta(alpha, theta); `kappa = 0` gives
//! i.i.d. draws and `kappa = inf` a single shared `lambda`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_open_unit, invalid, Error, Result};
use crate::sampling;
use crate::special::{ln_beta_pdf, ln_binomial_pmf, ln_choose, ln_rising, log_sum_exp};

/// Dependence parameter: a non-negative integer or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kappa {
    Finite(u64),
    Infinite,
}

impl Kappa {
    pub fn finite(self) -> Option<u64> {
        match self {
            Kappa::Finite(k) => Some(k),
            Kappa::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Kappa::Infinite)
    }
}

impl From<u64> for Kappa {
    fn from(k: u64) -> Self {
        Kappa::Finite(k)
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kappa::Finite(k) => write!(f, "{k}"),
            Kappa::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Kappa {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Kappa::Infinite),
            _ => t
                .parse::<u64>()
                .map(Kappa::Finite)
                .map_err(|_| invalid("kappa", format!("expected a non-negative integer or `inf`, got {s:?}"))),
        }
    }
}

impl Serialize for Kappa {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Kappa::Finite(k) => serializer.serialize_u64(*k),
            Kappa::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Kappa {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(k) => Ok(Kappa::Finite(k)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `(kappa, alpha, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BbsbParams {
    pub kappa: Kappa,
    pub alpha: f64,
    pub theta: f64,
}

impl BbsbParams {
    pub fn new(kappa: impl Into<Kappa>, alpha: f64, theta: f64) -> Result<Self> {
        let p = BbsbParams {
            kappa: kappa.into(),
            alpha,
            theta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", format!("must be positive and finite, got {}", self.alpha)));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(invalid("theta", format!("must be positive and finite, got {}", self.theta)));
        }
        Ok(())
    }

    pub fn with_kappa(self, kappa: impl Into<Kappa>) -> Self {
        BbsbParams {
            kappa: kappa.into(),
            ..self
        }
    }

    fn finite_kappa(&self) -> Result<u64> {
        self.kappa.finite().ok_or(Error::InfiniteKappa)
    }
}

/// A finite prefix of the chain. `x[i]` sits between `v[i]` and `v[i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSample {
    pub v: Vec<f64>,
    /// Absent when kappa is infinite.
    pub x: Option<Vec<u64>>,
}

/// One transition `v_prev -> (x, v_next)`.
pub fn step<R: Rng + ?Sized>(v_prev: f64, params: &BbsbParams, rng: &mut R) -> Result<(u64, f64)> {
    let kappa = params.finite_kappa()?;
    check_open_unit("v_prev", v_prev)?;
    Ok(step_unchecked(v_prev, kappa, params.alpha, params.theta, rng))
}

pub(crate) fn step_unchecked<R: Rng + ?Sized>(
    v_prev: f64,
    kappa: u64,
    alpha: f64,
    theta: f64,
    rng: &mut R,
) -> (u64, f64) {
    let x = sampling::binomial(kappa, v_prev, rng);
    let v = sampling::beta(alpha + x as f64, theta + (kappa - x) as f64, rng);
    (x, v)
}

/// Simulates `n` length variables. Without `v1` the chain starts from its
/// stationary law.
pub fn sample_chain<R: Rng + ?Sized>(
    params: &BbsbParams,
    n: usize,
    v1: Option<f64>,
    rng: &mut R,
) -> Result<ChainSample> {
    params.validate()?;
    if n == 0 {
        return Err(invalid("n", "chain length must be at least 1"));
    }
    let first = match v1 {
        Some(v) => {
            check_open_unit("v1", v)?;
            v
        }
        None => sampling::beta(params.alpha, params.theta, rng),
    };
    match params.kappa {
        Kappa::Infinite => Ok(ChainSample {
            v: vec![first; n],
            x: None,
        }),
        Kappa::Finite(kappa) => {
            let mut v = Vec::with_capacity(n);
            let mut x = Vec::with_capacity(n - 1);
            v.push(first);
            for _ in 1..n {
                let (xi, vi) = step_unchecked(*v.last().unwrap(), kappa, params.alpha, params.theta, rng);
                x.push(xi);
                v.push(vi);
            }
            Ok(ChainSample { v, x: Some(x) })
        }
    }
}

/// Log of the transition density of `v_next` given `v_prev`, a
/// `(kappa + 1)`-component Beta mixture with Binomial weights.
pub fn ln_v_transition_density(v_next: f64, v_prev: f64, params: &BbsbParams) -> Result<f64> {
    let kappa = params.finite_kappa()?;
    check_open_unit("v_next", v_next)?;
    check_open_unit("v_prev", v_prev)?;
    let terms: Vec<f64> = (0..=kappa)
        .map(|x| {
            ln_beta_pdf(
                v_next,
                params.alpha + x as f64,
                params.theta + (kappa - x) as f64,
            ) + ln_binomial_pmf(x, kappa, v_prev)
        })
        .collect();
    Ok(log_sum_exp(&terms))
}

pub fn v_transition_density(v_next: f64, v_prev: f64, params: &BbsbParams) -> Result<f64> {
    ln_v_transition_density(v_next, v_prev, params).map(f64::exp)
}

fn check_x(name: &'static str, x: u64, kappa: u64) -> Result<()> {
    if x > kappa {
        Err(invalid(name, format!("{x} exceeds kappa = {kappa}")))
    } else {
        Ok(())
    }
}

/// P[x_i = x_next | x_{i-1} = x_prev] for the Binomial chain.
pub fn x_transition_pmf(x_next: u64, x_prev: u64, params: &BbsbParams) -> Result<f64> {
    let kappa = params.finite_kappa()?;
    check_x("x_next", x_next, kappa)?;
    check_x("x_prev", x_prev, kappa)?;
    let (a, t) = (params.alpha, params.theta);
    let ln_p = ln_choose(kappa, x_next)
        + ln_rising(a + x_prev as f64, x_next)
        + ln_rising(t + (kappa - x_prev) as f64, kappa - x_next)
        - ln_rising(a + t + kappa as f64, kappa);
    Ok(ln_p.exp())
}

/// Beta-Binomial stationary pmf of the Binomial chain.
pub fn x_stationary_pmf(x: u64, params: &BbsbParams) -> Result<f64> {
    let kappa = params.finite_kappa()?;
    check_x("x", x, kappa)?;
    let (a, t) = (params.alpha, params.theta);
    let ln_p = ln_choose(kappa, x) + ln_rising(a, x) + ln_rising(t, kappa - x) - ln_rising(a + t, kappa);
    Ok(ln_p.exp())
}

/// E[v_{i+1} | v_i = v]. Infinite kappa gives the limit `v`.
pub fn conditional_mean(v: f64, params: &BbsbParams) -> Result<f64> {
    check_open_unit("v", v)?;
    let (a, t) = (params.alpha, params.theta);
    Ok(match params.kappa {
        Kappa::Finite(k) => {
            let k = k as f64;
            (a + k * v) / (a + t + k)
        }
        Kappa::Infinite => v,
    })
}

/// Var(v_{i+1} | v_i = v). Infinite kappa gives the limit zero.
pub fn conditional_variance(v: f64, params: &BbsbParams) -> Result<f64> {
    check_open_unit("v", v)?;
    let (a, t) = (params.alpha, params.theta);
    Ok(match params.kappa {
        Kappa::Finite(k) => {
            let k = k as f64;
            let s = a + t + k;
            ((a + k * v) * (t + k * (1.0 - v)) + k * v * (1.0 - v) * s) / (s * s * (s + 1.0))
        }
        Kappa::Infinite => 0.0,
    })
}

/// Stationary Cov(v_i, v_{i+1}).
pub fn stationary_cov(params: &BbsbParams) -> f64 {
    let (a, t) = (params.alpha, params.theta);
    let beta_var = a * t / ((a + t).powi(2) * (a + t + 1.0));
    match params.kappa {
        Kappa::Finite(k) => beta_var * k as f64 / (a + t + k as f64),
        Kappa::Infinite => beta_var,
    }
}

/// Stationary lag-one correlation `kappa / (alpha + theta + kappa)`.
pub fn lag1_correlation(params: &BbsbParams) -> f64 {
    match params.kappa {
        Kappa::Finite(k) => k as f64 / (params.alpha + params.theta + k as f64),
        Kappa::Infinite => 1.0,
    }
}

/// Cached log-gamma tables for evaluating the `v` transition density at many
/// kappa values with fixed `(alpha, theta)`.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    alpha: f64,
    theta: f64,
    ln_gamma_alpha: Vec<f64>,
    ln_gamma_theta: Vec<f64>,
    ln_gamma_total: Vec<f64>,
    ln_factorial: Vec<f64>,
}

impl TransitionTable {
    pub fn new(alpha: f64, theta: f64, max_kappa: u64) -> Self {
        let m = max_kappa as usize + 1;
        TransitionTable {
            alpha,
            theta,
            ln_gamma_alpha: (0..m).map(|x| ln_gamma(alpha + x as f64)).collect(),
            ln_gamma_theta: (0..m).map(|x| ln_gamma(theta + x as f64)).collect(),
            ln_gamma_total: (0..m).map(|k| ln_gamma(alpha + theta + k as f64)).collect(),
            ln_factorial: (0..m).map(|k| ln_gamma(k as f64 + 1.0)).collect(),
        }
    }

    pub fn max_kappa(&self) -> u64 {
        self.ln_factorial.len() as u64 - 1
    }

    /// Same value as [`ln_v_transition_density`], without domain checks.
    pub fn ln_density(&self, kappa: u64, v_next: f64, v_prev: f64) -> f64 {
        let k = kappa as usize;
        let lv_next = v_next.ln();
        let l1v_next = (-v_next).ln_1p();
        let lv_prev = v_prev.ln();
        let l1v_prev = (-v_prev).ln_1p();
        let r = lv_next - l1v_next + lv_prev - l1v_prev;
        let term = |x: usize| {
            x as f64 * r
                - self.ln_factorial[x]
                - self.ln_factorial[k - x]
                - self.ln_gamma_alpha[x]
                - self.ln_gamma_theta[k - x]
        };
        let mut max = f64::NEG_INFINITY;
        for x in 0..=k {
            max = max.max(term(x));
        }
        let sum: f64 = (0..=k).map(|x| (term(x) - max).exp()).sum();
        (self.alpha - 1.0) * lv_next
            + (self.theta + kappa as f64 - 1.0) * l1v_next
            + kappa as f64 * l1v_prev
            + self.ln_gamma_total[k]
            + self.ln_factorial[k]
            + max
            + sum.ln()
    }
}
