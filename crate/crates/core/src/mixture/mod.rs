//! Slice-Gibbs sampler for univariate Gaussian BBSB mixtures.
//!
//! Each sweep updates, in order: the atoms, the length variables together
//! with the slice variables, the memberships, and (when random) `kappa`.
//! Memberships are stored zero based; `d[k] = j` means observation `k` sits
//! in component `j + 1`.

mod atoms;
mod gibbs;
mod kappa;
mod membership;
mod summary;
mod vblock;

pub use atoms::{update_atoms, AtomPosterior};
pub use gibbs::{run_gibbs, run_gibbs_with_observer, GibbsConfig, Model, Sampler, Variant};
pub use kappa::{update_kappa, update_kappa_with_table, KappaPrior};
pub use membership::update_memberships;
pub use summary::{
    density_estimate, posterior_kappa, posterior_kn, DensityAccumulator, ParamHistogram,
    PosteriorSummary, TraceRow,
};
pub use vblock::{
    augmented_prefix_sweep, grow_tail, refresh_slices, sequential_prefix_draw, update_v_u_block,
    update_v_u_block_augmented, update_v_u_block_geometric, v_mixture_ln_weights,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::Kappa;
use crate::error::{invalid, Result};
use crate::sampling;
use crate::special::{ln_gamma_pdf, ln_normal_pdf};
use crate::stickbreak::StickWeights;

/// Normal-Gamma base measure: `p ~ Ga(a, b)` (rate `b`) and
/// `m | p ~ N(location, scale / p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalGammaBase {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
    pub rate: f64,
}

impl NormalGammaBase {
    pub fn new(location: f64, scale: f64, shape: f64, rate: f64) -> Result<Self> {
        let base = NormalGammaBase {
            location,
            scale,
            shape,
            rate,
        };
        base.validate()?;
        Ok(base)
    }

    /// `a = b = 0.5`, `scale = 100`, location at the sample mean.
    pub fn default_for(data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return Err(crate::Error::Empty("data"));
        }
        let mean = data.iter().sum::<f64>() / data.len() as f64;
        Self::new(mean, 100.0, 0.5, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.location.is_finite() {
            return Err(invalid("location", "must be finite"));
        }
        for (name, value) in [("scale", self.scale), ("shape", self.shape), ("rate", self.rate)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {value}")));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Atom {
        AtomPosterior::prior(self).sample(rng)
    }

    pub fn ln_density(&self, atom: &Atom) -> f64 {
        ln_normal_pdf(atom.mean, self.location, atom.precision / self.scale)
            + ln_gamma_pdf(atom.precision, self.shape, self.rate)
    }
}

/// Gaussian kernel parameters `(mean, precision)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub mean: f64,
    pub precision: f64,
}

impl Atom {
    pub fn ln_kernel(&self, y: f64) -> f64 {
        ln_normal_pdf(y, self.mean, self.precision)
    }

    pub fn kernel(&self, y: f64) -> f64 {
        self.ln_kernel(y).exp()
    }
}

/// `alpha[i]` observations sit in component `i + 1` and `theta[i]` beyond it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountProfile {
    pub alpha: Vec<u64>,
    pub theta: Vec<u64>,
}

impl CountProfile {
    /// Profile over the first `len` components. Memberships must be `< len`.
    pub fn from_memberships(d: &[usize], len: usize) -> Self {
        let mut alpha = vec![0u64; len];
        for &j in d {
            alpha[j] += 1;
        }
        let mut theta = vec![0u64; len];
        let mut beyond = 0;
        for i in (0..len).rev() {
            theta[i] = beyond;
            beyond += alpha[i];
        }
        CountProfile { alpha, theta }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// Upper limit of the slice variable attached to each component.
///
/// `Weights` is the plain slice `u_k < w_{d_k}`. `Geometric` bounds the
/// slices by the fixed sequence `xi_j = (1 - rate) rate^j` and reweights the
/// memberships by `w_j / xi_j`; the truncation then needs only as many
/// sticks as there are `xi_j` above the smallest slice, however slowly the
/// weights decay.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceBound {
    #[default]
    Weights,
    Geometric { rate: f64 },
}

impl SliceBound {
    pub fn geometric(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(invalid("rate", format!("must lie in (0, 1), got {rate}")));
        }
        Ok(SliceBound::Geometric { rate })
    }

    /// `ln xi_j` for the geometric bound, `None` for the weight bound.
    pub fn ln_xi(&self, j: usize) -> Option<f64> {
        match *self {
            SliceBound::Weights => None,
            SliceBound::Geometric { rate } => Some((1.0 - rate).ln() + j as f64 * rate.ln()),
        }
    }

    /// Number of leading geometric bounds strictly above `u`.
    pub(crate) fn geometric_cover(rate: f64, u: f64) -> usize {
        let xi = |j: usize| SliceBound::Geometric { rate }.ln_xi(j).unwrap();
        let ln_u = u.ln();
        let guess = ((ln_u - (1.0 - rate).ln()) / rate.ln()).ceil().max(0.0) as usize;
        let mut j = guess.saturating_sub(1);
        while j > 0 && xi(j - 1) <= ln_u {
            j -= 1;
        }
        while xi(j) > ln_u {
            j += 1;
        }
        j
    }
}

/// Full sampler state. `atoms`, the sticks and the truncation level `phi`
/// always agree in length.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureState {
    pub atoms: Vec<Atom>,
    pub sticks: StickWeights,
    pub u: Vec<f64>,
    pub d: Vec<usize>,
    pub kappa: Kappa,
    pub bound: SliceBound,
}

impl MixtureState {
    pub fn phi(&self) -> usize {
        self.sticks.len()
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// Number of components holding at least one observation.
    pub fn occupied(&self) -> usize {
        let mut seen = vec![false; self.phi()];
        let mut k = 0;
        for &j in &self.d {
            if !seen[j] {
                seen[j] = true;
                k += 1;
            }
        }
        k
    }

    /// One past the largest occupied index, i.e. the one-based maximum of `d`.
    pub fn max_membership(&self) -> usize {
        self.d.iter().map(|&j| j + 1).max().unwrap_or(0)
    }

    pub fn counts(&self) -> CountProfile {
        CountProfile::from_memberships(&self.d, self.max_membership())
    }

    /// Upper limit of a slice whose observation sits in component `j`.
    pub fn slice_limit(&self, j: usize) -> f64 {
        match self.bound.ln_xi(j) {
            Some(ln_xi) => ln_xi.exp(),
            None => self.sticks.w()[j],
        }
    }

    /// Membership weight of component `j` relative to its slice limit, in
    /// log space: zero for the weight bound, `ln(w_j / xi_j)` otherwise.
    pub fn ln_slice_ratio(&self, j: usize) -> f64 {
        match self.bound.ln_xi(j) {
            Some(ln_xi) => self.sticks.w()[j].ln() - ln_xi,
            None => 0.0,
        }
    }

    /// Whether the truncation already holds every component a slice of
    /// height `min_u` can reach.
    pub fn covers(&self, min_u: f64) -> bool {
        match self.bound {
            SliceBound::Weights => self.sticks.ln_residual() <= min_u.ln(),
            SliceBound::Geometric { rate } => self.phi() >= SliceBound::geometric_cover(rate, min_u),
        }
    }

    pub fn truncate(&mut self, len: usize) {
        self.sticks.truncate(len);
        self.atoms.truncate(len);
    }

    /// Checks the slice constraints and the truncation sufficiency condition.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.atoms.len() != self.phi() {
            return Err(format!("{} atoms for {} sticks", self.atoms.len(), self.phi()));
        }
        if self.u.len() != self.d.len() {
            return Err("slice and membership vectors differ in length".into());
        }
        for (k, (&uk, &dk)) in self.u.iter().zip(&self.d).enumerate() {
            if dk >= self.phi() {
                return Err(format!("observation {k} points past the truncation"));
            }
            let limit = self.slice_limit(dk);
            if !(uk > 0.0 && uk < limit) {
                return Err(format!("slice violated at {k}: u = {uk}, limit = {limit}"));
            }
        }
        if let Some(min_u) = self.u.iter().copied().reduce(f64::min) {
            if !self.covers(min_u) {
                return Err(format!(
                    "truncation too short: {} sticks, residual {}, min u {min_u}",
                    self.phi(),
                    self.sticks.residual()
                ));
            }
        }
        Ok(())
    }
}

/// Draws `n` fresh atoms from the base measure.
pub(crate) fn base_atoms<R: Rng + ?Sized>(base: &NormalGammaBase, n: usize, rng: &mut R) -> Vec<Atom> {
    (0..n).map(|_| base.sample(rng)).collect()
}

/// Standard normal scaled to `N(mean, 1/precision)`.
pub(crate) fn normal<R: Rng + ?Sized>(mean: f64, precision: f64, rng: &mut R) -> f64 {
    mean + sampling::standard_normal(rng) / precision.sqrt()
}
