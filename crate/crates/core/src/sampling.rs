//! Random variates used throughout the crate.
//!
//! Everything takes the random stream explicitly so that a seeded
//! [`rand_chacha::ChaCha8Rng`] reproduces every draw.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, Open01, StandardNormal};

/// Largest double strictly below one.
pub const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

/// Binomial counts up to this size are drawn by inversion.
const BINOMIAL_INVERSION_MAX: u64 = 64;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw on the open interval (0, 1).
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Log of a Gamma(shape, 1) variate. Shapes below one use the
/// `G(a) = G(a + 1) U^{1/a}` boost in log-space so tiny shapes do not
/// underflow to zero.
pub fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0 && shape.is_finite(), "gamma shape {shape}");
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("valid gamma shape").sample(rng);
        g.ln()
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0)
            .expect("valid gamma shape")
            .sample(rng);
        g.ln() + open_unit(rng).ln() / shape
    }
}

/// Gamma variate with the given shape and rate.
pub fn gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    (ln_gamma_variate(shape, rng) - rate.ln()).exp()
}

/// Beta(a, b) variate built from two Gamma draws, clamped into the open unit
/// interval.
pub fn beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let lx = ln_gamma_variate(a, rng);
    let ly = ln_gamma_variate(b, rng);
    let v = 1.0 / (1.0 + (ly - lx).exp());
    v.clamp(f64::MIN_POSITIVE, ONE_MINUS_ULP)
}

/// Binomial(n, p) variate. Bin(0, p) is the point mass at zero and consumes
/// no randomness.
pub fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    if n <= BINOMIAL_INVERSION_MAX {
        if p > 0.5 {
            n - binomial_inversion(n, 1.0 - p, rng)
        } else {
            binomial_inversion(n, p, rng)
        }
    } else {
        Binomial::new(n, p).expect("valid binomial").sample(rng)
    }
}

// Sequential search from zero; p <= 1/2 keeps (1-p)^n away from underflow.
fn binomial_inversion<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    let q = 1.0 - p;
    let ratio = p / q;
    let mut pmf = q.powi(n as i32);
    let mut cdf = pmf;
    let u: f64 = rng.random();
    let mut k = 0;
    while u > cdf && k < n {
        pmf *= ratio * (n - k) as f64 / (k + 1) as f64;
        k += 1;
        cdf += pmf;
    }
    k
}

/// Draws an index with probability proportional to `exp(ln_weights[i])`.
/// A single candidate is returned without touching the stream.
pub fn ln_categorical<R: Rng + ?Sized>(ln_weights: &[f64], rng: &mut R) -> usize {
    assert!(!ln_weights.is_empty(), "categorical over empty support");
    if ln_weights.len() == 1 {
        return 0;
    }
    let max = ln_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(max.is_finite(), "categorical weights are all zero or NaN");
    let total: f64 = ln_weights.iter().map(|&w| (w - max).exp()).sum();
    let mut target = rng.random::<f64>() * total;
    for (i, &w) in ln_weights.iter().enumerate() {
        target -= (w - max).exp();
        if target < 0.0 {
            return i;
        }
    }
    // Rounding left a sliver at the end: return the last positive weight.
    ln_weights
        .iter()
        .rposition(|&w| w > f64::NEG_INFINITY)
        .expect("at least one finite weight")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn beta_mean_matches() {
        let mut rng = seeded_rng(1);
        for &(a, b) in &[(0.3, 2.0), (10.0, 10.0), (1.0, 1.0), (0.05, 0.05)] {
            let xs: Vec<f64> = (0..100_000).map(|_| beta(a, b, &mut rng)).collect();
            let m = a / (a + b);
            let sd = (a * b / ((a + b).powi(2) * (a + b + 1.0))).sqrt();
            assert!(
                (mean(&xs) - m).abs() < 4.0 * sd / (xs.len() as f64).sqrt(),
                "Beta({a},{b})"
            );
            assert!(xs.iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn tiny_shapes_stay_inside_unit_interval() {
        let mut rng = seeded_rng(2);
        for _ in 0..10_000 {
            let v = beta(1e-3, 1e-3, &mut rng);
            assert!(v > 0.0 && v < 1.0);
        }
    }

    #[test]
    fn binomial_moments_both_regimes() {
        let mut rng = seeded_rng(3);
        for &(n, p) in &[(5u64, 0.3), (64, 0.9), (1000, 0.25), (65, 0.5)] {
            let reps = 50_000;
            let s: f64 = (0..reps).map(|_| binomial(n, p, &mut rng) as f64).sum();
            let m = s / reps as f64;
            let sd = (n as f64 * p * (1.0 - p)).sqrt() / (reps as f64).sqrt();
            assert!((m - n as f64 * p).abs() < 4.0 * sd, "Bin({n},{p}) mean {m}");
        }
    }

    #[test]
    fn binomial_zero_trials_consumes_nothing() {
        let mut a = seeded_rng(9);
        let mut b = seeded_rng(9);
        assert_eq!(binomial(0, 0.4, &mut a), 0);
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn binomial_near_one() {
        let mut rng = seeded_rng(4);
        for _ in 0..1000 {
            assert_eq!(binomial(5, 1.0 - 1e-12, &mut rng), 5);
        }
    }

    #[test]
    fn categorical_frequencies() {
        let mut rng = seeded_rng(5);
        let w = [0.2f64.ln(), 0.5f64.ln(), f64::NEG_INFINITY, 0.3f64.ln()];
        let mut counts = [0usize; 4];
        for _ in 0..100_000 {
            counts[ln_categorical(&w, &mut rng)] += 1;
        }
        assert_eq!(counts[2], 0);
        assert!((counts[1] as f64 / 1e5 - 0.5).abs() < 0.01);
    }
}
