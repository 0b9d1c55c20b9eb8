use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MixtureState;
use crate::chain::{BbsbParams, Kappa, TransitionTable};
use crate::error::{invalid, Result};
use crate::sampling;

/// Discrete prior on a finite set of `kappa` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaPrior {
    support: Vec<u64>,
    ln_pmf: Vec<f64>,
}

impl KappaPrior {
    /// Uniform on `{0, 1, ..., max}`.
    pub fn uniform(max: u64) -> Self {
        let ln_p = -((max + 1) as f64).ln();
        KappaPrior {
            support: (0..=max).collect(),
            ln_pmf: vec![ln_p; max as usize + 1],
        }
    }

    pub fn point(kappa: u64) -> Self {
        KappaPrior {
            support: vec![kappa],
            ln_pmf: vec![0.0],
        }
    }

    /// Arbitrary nonnegative weights; they need not sum to one.
    pub fn from_weights(support: Vec<u64>, weights: &[f64]) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(invalid("kappa prior", "support and weights must be non-empty and of equal length"));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(invalid("kappa prior", "weights must be finite and nonnegative"));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != support.len() {
            return Err(invalid("kappa prior", "support values must be distinct"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(invalid("kappa prior", "weights sum to zero"));
        }
        let ln_pmf = weights.iter().map(|w| (w / total).ln()).collect();
        Ok(KappaPrior { support, ln_pmf })
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn ln_pmf(&self, kappa: u64) -> f64 {
        self.support
            .iter()
            .position(|&k| k == kappa)
            .map_or(f64::NEG_INFINITY, |i| self.ln_pmf[i])
    }

    pub fn max(&self) -> u64 {
        self.support.iter().copied().max().unwrap_or(0)
    }

    /// Most probable value; ties go to the smallest.
    pub fn mode(&self) -> u64 {
        let mut best = (f64::NEG_INFINITY, u64::MAX);
        for (&k, &lp) in self.support.iter().zip(&self.ln_pmf) {
            if lp > best.0 || (lp == best.0 && k < best.1) {
                best = (lp, k);
            }
        }
        best.1
    }
}

/// Draws `kappa` from its full conditional given the instantiated length
/// variables, using a prebuilt table covering the prior support.
pub fn update_kappa_with_table<R: Rng + ?Sized>(
    state: &mut MixtureState,
    prior: &KappaPrior,
    table: &TransitionTable,
    rng: &mut R,
) -> u64 {
    assert!(table.max_kappa() >= prior.max(), "transition table too small for the prior");
    let v = state.sticks.v();
    let ln_w: Vec<f64> = prior
        .support
        .iter()
        .zip(&prior.ln_pmf)
        .map(|(&k, &lp)| lp + v.windows(2).map(|p| table.ln_density(k, p[1], p[0])).sum::<f64>())
        .collect();
    let kappa = prior.support[sampling::ln_categorical(&ln_w, rng)];
    state.kappa = Kappa::Finite(kappa);
    kappa
}

/// As [`update_kappa_with_table`], building the table from `params`.
pub fn update_kappa<R: Rng + ?Sized>(
    state: &mut MixtureState,
    params: &BbsbParams,
    prior: &KappaPrior,
    rng: &mut R,
) -> u64 {
    let table = TransitionTable::new(params.alpha, params.theta, prior.max());
    update_kappa_with_table(state, prior, &table, rng)
}
