use rand::Rng;

use super::MixtureState;
use crate::sampling;

/// Redraws each `d_k` from the components whose slice limit exceeds `u_k`,
/// with probability proportional to the kernel at `y_k` (times `w_j / xi_j`
/// under the geometric bound).
pub fn update_memberships<R: Rng + ?Sized>(state: &mut MixtureState, data: &[f64], rng: &mut R) {
    debug_assert_eq!(data.len(), state.n());
    let limit: Vec<f64> = (0..state.phi()).map(|j| state.slice_limit(j)).collect();
    let ratio: Vec<f64> = (0..state.phi()).map(|j| state.ln_slice_ratio(j)).collect();
    let mut candidates = Vec::new();
    let mut ln_w = Vec::new();
    for ((dk, &uk), &y) in state.d.iter_mut().zip(&state.u).zip(data) {
        candidates.clear();
        ln_w.clear();
        for (j, (&lj, atom)) in limit.iter().zip(&state.atoms).enumerate() {
            if lj > uk {
                candidates.push(j);
                ln_w.push(atom.ln_kernel(y) + ratio[j]);
            }
        }
        assert!(!candidates.is_empty(), "slice admits no component");
        *dk = candidates[sampling::ln_categorical(&ln_w, rng)];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Kappa;
    use crate::mixture::SliceBound;
    use crate::mixture::Atom;
    use crate::sampling::seeded_rng;
    use crate::stickbreak::stick_break;

    fn state(u: f64) -> MixtureState {
        MixtureState {
            atoms: vec![
                Atom { mean: -5.0, precision: 1.0 },
                Atom { mean: 5.0, precision: 1.0 },
                Atom { mean: 0.0, precision: 1.0 },
            ],
            sticks: stick_break(&[0.5, 0.6, 0.5]).unwrap(),
            u: vec![u; 2],
            d: vec![0, 0],
            kappa: Kappa::Finite(0),
            bound: SliceBound::Weights,
        }
    }

    #[test]
    fn respects_slice() {
        // weights 0.5, 0.3, 0.1: only the first two survive u = 0.2
        let mut s = state(0.2);
        let mut rng = seeded_rng(1);
        for _ in 0..200 {
            update_memberships(&mut s, &[0.0, 0.1], &mut rng);
            assert!(s.d.iter().all(|&j| j < 2));
        }
    }

    #[test]
    fn follows_kernel() {
        let mut s = state(1e-3);
        let mut rng = seeded_rng(2);
        update_memberships(&mut s, &[-5.0, 5.0], &mut rng);
        assert_eq!(s.d, vec![0, 1]);
    }

    #[test]
    fn single_candidate_draws_nothing() {
        let mut s = state(0.45);
        let mut rng = seeded_rng(3);
        let before = rng.clone();
        update_memberships(&mut s, &[5.0, 5.0], &mut rng);
        assert_eq!(s.d, vec![0, 0]);
        assert_eq!(rng, before);
    }
}
