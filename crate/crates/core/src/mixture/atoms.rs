use rand::Rng;

use super::{normal, Atom, MixtureState, NormalGammaBase};
use crate::sampling;

/// Normal-Gamma law of an atom, either the base measure itself or its
/// conjugate update given the observations assigned to the atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomPosterior {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
    pub rate: f64,
}

impl AtomPosterior {
    pub fn prior(base: &NormalGammaBase) -> Self {
        AtomPosterior {
            location: base.location,
            scale: base.scale,
            shape: base.shape,
            rate: base.rate,
        }
    }

    /// Update from `n` points with sample mean `mean` and centred sum of
    /// squares `ss`.
    pub fn from_stats(base: &NormalGammaBase, n: usize, mean: f64, ss: f64) -> Self {
        if n == 0 {
            return Self::prior(base);
        }
        let nf = n as f64;
        let denom = 1.0 + base.scale * nf;
        AtomPosterior {
            location: (base.location + base.scale * nf * mean) / denom,
            scale: base.scale / denom,
            shape: base.shape + 0.5 * nf,
            rate: base.rate + 0.5 * ss + nf * (mean - base.location).powi(2) / (2.0 * denom),
        }
    }

    pub fn from_observations(base: &NormalGammaBase, ys: &[f64]) -> Self {
        let mut acc = Welford::default();
        for &y in ys {
            acc.push(y);
        }
        Self::from_stats(base, acc.n, acc.mean, acc.ss)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Atom {
        let precision = sampling::gamma(self.shape, self.rate, rng);
        let mean = normal(self.location, precision / self.scale, rng);
        Atom { mean, precision }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    ss: f64,
}

impl Welford {
    fn push(&mut self, y: f64) {
        self.n += 1;
        let delta = y - self.mean;
        self.mean += delta / self.n as f64;
        self.ss += delta * (y - self.mean);
    }
}

/// Redraws every instantiated atom from its full conditional; components
/// without observations are refreshed from the base measure.
pub fn update_atoms<R: Rng + ?Sized>(
    state: &mut MixtureState,
    data: &[f64],
    base: &NormalGammaBase,
    rng: &mut R,
) {
    debug_assert_eq!(data.len(), state.n());
    let mut stats = vec![Welford::default(); state.phi()];
    for (&y, &j) in data.iter().zip(&state.d) {
        stats[j].push(y);
    }
    for (atom, s) in state.atoms.iter_mut().zip(&stats) {
        *atom = AtomPosterior::from_stats(base, s.n, s.mean, s.ss).sample(rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Kappa;
    use crate::mixture::SliceBound;
    use crate::sampling::seeded_rng;
    use crate::stickbreak::stick_break;

    #[test]
    fn single_observation_at_location() {
        let base = NormalGammaBase::new(1.5, 100.0, 0.5, 0.5).unwrap();
        let post = AtomPosterior::from_observations(&base, &[1.5]);
        assert_eq!(post.location, 1.5);
        assert_eq!(post.shape, 1.0);
        assert_eq!(post.rate, 0.5);
        assert!((post.scale - 100.0 / 101.0).abs() < 1e-15);
    }

    #[test]
    fn empty_is_prior() {
        let base = NormalGammaBase::new(0.0, 2.0, 3.0, 4.0).unwrap();
        assert_eq!(AtomPosterior::from_observations(&base, &[]), AtomPosterior::prior(&base));
    }

    #[test]
    fn hand_evaluated_update() {
        // n = 2, ybar = 2, S = 2, location 0, scale 1 -> denom 3
        let base = NormalGammaBase::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let post = AtomPosterior::from_observations(&base, &[1.0, 3.0]);
        assert!((post.location - 4.0 / 3.0).abs() < 1e-15);
        assert!((post.scale - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(post.shape, 2.0);
        assert!((post.rate - (1.0 + 1.0 + 2.0 * 4.0 / 6.0)).abs() < 1e-14);
    }

    #[test]
    fn posterior_mean_draws_centre_on_location() {
        let base = NormalGammaBase::new(0.0, 100.0, 0.5, 0.5).unwrap();
        let post = AtomPosterior::from_observations(&base, &[2.0]);
        let mut rng = seeded_rng(8);
        let draws: Vec<f64> = (0..100_000).map(|_| post.sample(&mut rng).mean).collect();
        let m = crate::diagnostics::mean(&draws);
        let se = (crate::diagnostics::variance(&draws) / draws.len() as f64).sqrt();
        assert!((m - post.location).abs() < 3.0 * se, "{m} vs {}", post.location);
    }

    #[test]
    fn update_touches_every_atom() {
        let base = NormalGammaBase::new(0.0, 1.0, 2.0, 2.0).unwrap();
        let mut rng = seeded_rng(1);
        let mut state = MixtureState {
            atoms: vec![Atom { mean: 99.0, precision: 1.0 }; 3],
            sticks: stick_break(&[0.5, 0.5, 0.5]).unwrap(),
            u: vec![0.1, 0.1],
            d: vec![0, 0],
            kappa: Kappa::Finite(0),
            bound: SliceBound::Weights,
        };
        update_atoms(&mut state, &[0.1, -0.1], &base, &mut rng);
        assert!(state.atoms.iter().all(|a| a.mean != 99.0 && a.precision > 0.0));
    }
}
