//! Pitman-Yor stick-breaking baseline, with the DP as `sigma = 0`.
//!
//! `v_i ~ Beta(1 - sigma, theta + i sigma)` independently. The same slice
//! sampler applies; `sigma` gets a griddy-Gibbs update.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mixture::{grow_tail, refresh_slices, CountProfile, MixtureState, NormalGammaBase, SliceBound};
use crate::sampling;
use crate::special::ln_beta_pdf;
use crate::stickbreak::LengthSource;

pub const DEFAULT_SIGMA_GRID_POINTS: usize = 201;
pub const DEFAULT_SIGMA_GRID_MAX: f64 = 0.995;
/// Decay of the geometric slice bounds used once `sigma` can leave zero.
pub const PY_SLICE_RATE: f64 = 0.95;

/// Discrete prior for `sigma` on a grid in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaPrior {
    grid: Vec<f64>,
    ln_pmf: Vec<f64>,
}

impl SigmaPrior {
    /// Uniform on `points` equally spaced values from 0 to `max`.
    pub fn uniform_grid(points: usize, max: f64) -> Result<Self> {
        if points == 0 {
            return Err(invalid("sigma grid", "needs at least one point"));
        }
        if !(0.0..1.0).contains(&max) {
            return Err(invalid("sigma grid", format!("maximum {max} outside [0, 1)")));
        }
        let grid = if points == 1 {
            vec![0.0]
        } else {
            (0..points).map(|i| max * i as f64 / (points - 1) as f64).collect()
        };
        let ln_p = -(points as f64).ln();
        Ok(SigmaPrior {
            grid,
            ln_pmf: vec![ln_p; points],
        })
    }

    pub fn point(sigma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&sigma) {
            return Err(invalid("sigma", format!("{sigma} outside [0, 1)")));
        }
        Ok(SigmaPrior {
            grid: vec![sigma],
            ln_pmf: vec![0.0],
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn ln_pmf(&self, sigma: f64) -> f64 {
        self.grid
            .iter()
            .position(|&s| s == sigma)
            .map_or(f64::NEG_INFINITY, |i| self.ln_pmf[i])
    }

    pub fn is_fixed(&self) -> bool {
        self.grid.len() == 1
    }
}

impl Default for SigmaPrior {
    fn default() -> Self {
        Self::uniform_grid(DEFAULT_SIGMA_GRID_POINTS, DEFAULT_SIGMA_GRID_MAX).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitmanYorParams {
    /// Starting (or fixed) discount.
    pub sigma: f64,
    pub theta: f64,
    pub sigma_prior: SigmaPrior,
}

impl PitmanYorParams {
    /// The Dirichlet case keeps the weight slice, so its sampler matches the
    /// BBSB one draw for draw. Any other discount uses geometric bounds:
    /// for `sigma` near one the residual decays like a small power of the
    /// truncation level and the weight slice would need astronomically many
    /// sticks.
    pub fn slice_bound(&self) -> SliceBound {
        if self.sigma_prior.is_fixed() && self.sigma == 0.0 {
            SliceBound::Weights
        } else {
            SliceBound::Geometric { rate: PY_SLICE_RATE }
        }
    }

    pub fn new(sigma: f64, theta: f64, sigma_prior: SigmaPrior) -> Result<Self> {
        let p = PitmanYorParams {
            sigma,
            theta,
            sigma_prior,
        };
        p.validate()?;
        Ok(p)
    }

    /// Dirichlet process with concentration `theta`.
    pub fn dirichlet(theta: f64) -> Result<Self> {
        Self::new(0.0, theta, SigmaPrior::point(0.0)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.sigma) {
            return Err(invalid("sigma", format!("{} outside [0, 1)", self.sigma)));
        }
        if !(self.theta > -self.sigma && self.theta.is_finite()) {
            return Err(invalid("theta", format!("{} must exceed -sigma", self.theta)));
        }
        if !self.sigma_prior.grid.iter().any(|&s| self.theta > -s) {
            return Err(invalid("sigma grid", "no grid point satisfies theta > -sigma"));
        }
        Ok(())
    }
}

/// Independent Pitman-Yor length variables as a [`LengthSource`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitmanYorLengths {
    pub sigma: f64,
    pub theta: f64,
}

impl LengthSource for PitmanYorLengths {
    fn next_length(&self, index: usize, _prev: Option<f64>, rng: &mut dyn RngCore) -> f64 {
        let i = (index + 1) as f64;
        sampling::beta(1.0 - self.sigma, self.theta + i * self.sigma, rng)
    }
}

/// `sum_i ln Beta(v_i | 1 - sigma, theta + i sigma)` over the instantiated sticks.
pub fn py_ln_prior(v: &[f64], sigma: f64, theta: f64) -> f64 {
    v.iter()
        .enumerate()
        .map(|(i, &vi)| ln_beta_pdf(vi, 1.0 - sigma, theta + (i + 1) as f64 * sigma))
        .sum()
}

/// (V, U) block: conjugate Beta updates on the occupied prefix, then slice
/// refresh and extension.
pub fn py_update_v_u<R: Rng + ?Sized>(
    state: &mut MixtureState,
    sigma: f64,
    theta: f64,
    base: &NormalGammaBase,
    rng: &mut R,
) -> Result<()> {
    let m = state.max_membership();
    let counts = CountProfile::from_memberships(&state.d, m);
    let v: Vec<f64> = (0..m)
        .map(|i| {
            sampling::beta(
                (1.0 - sigma) + counts.alpha[i] as f64,
                (theta + (i + 1) as f64 * sigma) + counts.theta[i] as f64,
                rng,
            )
        })
        .collect();
    state.truncate(m);
    state.sticks.reset(v);
    refresh_slices(state, &PitmanYorLengths { sigma, theta }, base, rng)
}

/// Griddy-Gibbs draw of `sigma` given the length variables up to the largest
/// occupied component. The unoccupied tail carries no information beyond
/// the prior, so it is left out here and regenerated by [`py_update_sigma_block`].
/// A one-point grid returns immediately without touching the generator.
pub fn py_update_sigma<R: Rng + ?Sized>(state: &MixtureState, params: &PitmanYorParams, rng: &mut R) -> f64 {
    let prior = &params.sigma_prior;
    if prior.is_fixed() {
        return prior.grid[0];
    }
    let v = &state.sticks.v()[..state.max_membership()];
    let ln_w: Vec<f64> = prior
        .grid
        .iter()
        .zip(&prior.ln_pmf)
        .map(|(&s, &lp)| {
            if params.theta > -s {
                lp + py_ln_prior(v, s, params.theta)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    prior.grid[sampling::ln_categorical(&ln_w, rng)]
}

/// Joint draw of `sigma` and the unoccupied tail: `sigma` from its
/// conditional given the occupied prefix, then the tail afresh from the
/// prior under the new `sigma`, grown until it covers the slices.
pub fn py_update_sigma_block<R: Rng + ?Sized>(
    state: &mut MixtureState,
    params: &PitmanYorParams,
    base: &NormalGammaBase,
    rng: &mut R,
) -> Result<f64> {
    if params.sigma_prior.is_fixed() {
        return Ok(params.sigma_prior.grid[0]);
    }
    let sigma = py_update_sigma(state, params, rng);
    state.truncate(state.max_membership());
    let source = PitmanYorLengths {
        sigma,
        theta: params.theta,
    };
    grow_tail(state, &source, base, rng)?;
    Ok(sigma)
}
