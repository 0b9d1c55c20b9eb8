//! Joint update of the length variables and the slice variables.
//!
//! Only the prefix up to the largest occupied component carries likelihood
//! information; it is resampled, the slices are redrawn given the new
//! weights, and the tail is regrown from the prior chain until it covers
//! every slice.

use rand::Rng;

use super::{base_atoms, CountProfile, MixtureState, NormalGammaBase, SliceBound};
use crate::chain::{BbsbParams, Kappa};
use crate::error::{invalid, Error, Result};
use crate::sampling;
use crate::special::{ln_beta_pdf, ln_binomial_pmf, ln_rising};
use crate::stickbreak::{LengthSource, DEFAULT_STICK_CAP};

/// Unnormalized log weights of the `kappa + 1` Beta components in the full
/// conditional of `v_{i+1}` given `v_i = v_prev`, when component `i + 1`
/// holds `a_next` observations and `t_next` lie beyond it.
pub fn v_mixture_ln_weights(
    v_prev: f64,
    a_next: u64,
    t_next: u64,
    kappa: u64,
    alpha: f64,
    theta: f64,
) -> Vec<f64> {
    let denom = ln_rising(alpha + theta + kappa as f64, a_next + t_next);
    (0..=kappa)
        .map(|x| {
            ln_rising(alpha + x as f64, a_next) + ln_rising(theta + (kappa - x) as f64, t_next) - denom
                + ln_binomial_pmf(x, kappa, v_prev)
        })
        .collect()
}

/// Draws `v_1, ..., v_L` (with `L = counts.len()`) sequentially: `v_1` from
/// `Beta(alpha + alpha_1, theta + theta_1)`, then each `v_{i+1}` from the
/// normalized Beta mixture given the freshly drawn `v_i`.
pub fn sequential_prefix_draw<R: Rng + ?Sized>(
    counts: &CountProfile,
    kappa: u64,
    alpha: f64,
    theta: f64,
    rng: &mut R,
) -> Vec<f64> {
    let len = counts.len();
    let mut v = Vec::with_capacity(len);
    if len == 0 {
        return v;
    }
    v.push(sampling::beta(
        counts.alpha[0] as f64 + alpha,
        counts.theta[0] as f64 + theta,
        rng,
    ));
    for i in 1..len {
        let (a, t) = (counts.alpha[i], counts.theta[i]);
        let ln_w = v_mixture_ln_weights(v[i - 1], a, t, kappa, alpha, theta);
        let x = sampling::ln_categorical(&ln_w, rng) as u64;
        v.push(sampling::beta(
            a as f64 + alpha + x as f64,
            t as f64 + theta + (kappa - x) as f64,
            rng,
        ));
    }
    v
}

/// One Gibbs pass over the augmented Beta-Binomial chain restricted to the
/// prefix `v`: every `x_i | v_i, v_{i+1}`, then every `v_i` given its
/// neighbouring `x`'s and the counts.
pub fn augmented_prefix_sweep<R: Rng + ?Sized>(
    v: &mut [f64],
    counts: &CountProfile,
    kappa: u64,
    alpha: f64,
    theta: f64,
    rng: &mut R,
) {
    let len = v.len();
    debug_assert_eq!(len, counts.len());
    let mut x = Vec::with_capacity(len.saturating_sub(1));
    let mut ln_w = Vec::with_capacity(kappa as usize + 1);
    for i in 0..len.saturating_sub(1) {
        ln_w.clear();
        ln_w.extend((0..=kappa).map(|xi| {
            ln_binomial_pmf(xi, kappa, v[i])
                + ln_beta_pdf(v[i + 1], alpha + xi as f64, theta + (kappa - xi) as f64)
        }));
        x.push(sampling::ln_categorical(&ln_w, rng) as u64);
    }
    for i in 0..len {
        let mut successes = 0u64;
        let mut failures = 0u64;
        if i > 0 {
            successes += x[i - 1];
            failures += kappa - x[i - 1];
        }
        if i + 1 < len {
            successes += x[i];
            failures += kappa - x[i];
        }
        v[i] = sampling::beta(
            counts.alpha[i] as f64 + alpha + successes as f64,
            counts.theta[i] as f64 + theta + failures as f64,
            rng,
        );
    }
}

/// Redraws `u_k ~ U(0, w_{d_k})` (or below `xi_{d_k}` for the geometric
/// bound), then grows the sticks from `source` until the truncation covers
/// the smallest slice, giving new sticks base atoms.
pub fn refresh_slices<R: Rng + ?Sized>(
    state: &mut MixtureState,
    source: &dyn LengthSource,
    base: &NormalGammaBase,
    rng: &mut R,
) -> Result<()> {
    let limits: Vec<f64> = state.d.iter().map(|&dk| state.slice_limit(dk)).collect();
    for ((uk, &dk), &wk) in state.u.iter_mut().zip(&state.d).zip(&limits) {
        if !(wk > 0.0) {
            return Err(invalid(
                "state",
                format!("occupied component {} has zero weight", dk + 1),
            ));
        }
        *uk = loop {
            let u = wk * sampling::open_unit(rng);
            if u > 0.0 && u < wk {
                break u;
            }
        };
    }
    grow_tail(state, source, base, rng)
}

/// Keeps the slices and grows the sticks from `source` until they cover
/// every slice, giving new sticks base atoms.
pub fn grow_tail<R: Rng + ?Sized>(
    state: &mut MixtureState,
    source: &dyn LengthSource,
    base: &NormalGammaBase,
    rng: &mut R,
) -> Result<()> {
    let min_u = state.u.iter().copied().reduce(f64::min).unwrap_or(f64::INFINITY);
    match state.bound {
        SliceBound::Weights => {
            let ln_min_u = min_u.ln();
            state
                .sticks
                .extend_while_not(source, DEFAULT_STICK_CAP, rng, |ln_rest| ln_rest <= ln_min_u)?;
        }
        SliceBound::Geometric { rate } => {
            let len = SliceBound::geometric_cover(rate, min_u).max(1);
            if len > DEFAULT_STICK_CAP {
                return Err(Error::StickCapExceeded { cap: DEFAULT_STICK_CAP });
            }
            state.sticks.extend_to(source, len, rng);
        }
    }
    let missing = state.sticks.len() - state.atoms.len();
    let fresh = base_atoms(base, missing, rng);
    state.atoms.extend(fresh);
    Ok(())
}

fn prefix_counts(state: &MixtureState) -> (usize, CountProfile) {
    let m = state.max_membership();
    (m, CountProfile::from_memberships(&state.d, m))
}

/// (V, U) block using the sequential Beta-mixture factorization.
pub fn update_v_u_block<R: Rng + ?Sized>(
    state: &mut MixtureState,
    params: &BbsbParams,
    base: &NormalGammaBase,
    rng: &mut R,
) -> Result<()> {
    let kappa = params.kappa.finite().ok_or(Error::InfiniteKappa)?;
    let (m, counts) = prefix_counts(state);
    let v = sequential_prefix_draw(&counts, kappa, params.alpha, params.theta, rng);
    state.truncate(m);
    state.sticks.reset(v);
    refresh_slices(state, params, base, rng)
}

/// (V, U) block using an explicit Gibbs pass over the Binomial chain.
pub fn update_v_u_block_augmented<R: Rng + ?Sized>(
    state: &mut MixtureState,
    params: &BbsbParams,
    base: &NormalGammaBase,
    rng: &mut R,
) -> Result<()> {
    let kappa = params.kappa.finite().ok_or(Error::InfiniteKappa)?;
    let (m, counts) = prefix_counts(state);
    let mut v = state.sticks.v()[..m].to_vec();
    augmented_prefix_sweep(&mut v, &counts, kappa, params.alpha, params.theta, rng);
    state.truncate(m);
    state.sticks.reset(v);
    refresh_slices(state, params, base, rng)
}

/// Geometric case: all length variables share `lambda`, whose full
/// conditional is `Beta(alpha + n, theta + sum_k (d_k - 1))`.
pub fn update_v_u_block_geometric<R: Rng + ?Sized>(
    state: &mut MixtureState,
    params: &BbsbParams,
    base: &NormalGammaBase,
    rng: &mut R,
) -> Result<()> {
    let n = state.n() as u64;
    let depth: u64 = state.d.iter().map(|&j| j as u64).sum();
    let lambda = sampling::beta(params.alpha + n as f64, params.theta + depth as f64, rng);
    let m = state.max_membership().max(1);
    state.truncate(m);
    state.sticks.reset(std::iter::repeat_n(lambda, m));
    let source = params.with_kappa(Kappa::Infinite);
    refresh_slices(state, &source, base, rng)
}
