//! Closed-form checks evaluated in exact rational arithmetic, for integer
//! `alpha`, `theta` and rational evaluation points.

use bbsb::chain::{
    conditional_mean, conditional_variance, v_transition_density, x_stationary_pmf, x_transition_pmf,
};
use bbsb::mixture::v_mixture_ln_weights;
use bbsb::BbsbParams;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ratio(p: u64, q: u64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn factorial(n: u64) -> BigRational {
    (1..=n).fold(BigRational::one(), |acc, k| acc * int(k))
}

fn choose(n: u64, k: u64) -> BigRational {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Rising factorial `(y)_m` for integer `y`.
fn rising(y: u64, m: u64) -> BigRational {
    (0..m).fold(BigRational::one(), |acc, i| acc * int(y + i))
}

fn pow(x: &BigRational, e: u64) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

/// Beta density with integer parameters at a rational point.
fn beta_pdf(x: &BigRational, a: u64, b: u64) -> BigRational {
    factorial(a + b - 1) / (factorial(a - 1) * factorial(b - 1)) * pow(x, a - 1) * pow(&(int(1) - x), b - 1)
}

fn binomial(k: u64, n: u64, p: &BigRational) -> BigRational {
    choose(n, k) * pow(p, k) * pow(&(int(1) - p), n - k)
}

fn transition(v_next: &BigRational, v_prev: &BigRational, kappa: u64, a: u64, t: u64) -> BigRational {
    (0..=kappa).fold(BigRational::zero(), |acc, x| {
        acc + binomial(x, kappa, v_prev) * beta_pdf(v_next, a + x, t + kappa - x)
    })
}

fn f(x: &BigRational) -> f64 {
    x.to_f64().unwrap()
}

fn assert_rel(got: f64, want: f64, tol: f64) {
    assert!(
        (got - want).abs() <= tol * want.abs().max(1e-300),
        "got {got}, want {want}"
    );
}

#[test]
fn transition_density_at_one_half() {
    let half = ratio(1, 2);
    let exact = transition(&half, &half, 2, 1, 1);
    assert_eq!(exact, ratio(9, 8));
    let p = BbsbParams::new(2, 1.0, 1.0).unwrap();
    assert_rel(v_transition_density(0.5, 0.5, &p).unwrap(), 1.125, 1e-14);
}

#[test]
fn transition_density_grid() {
    for (kappa, a, t) in [(1, 1, 1), (3, 2, 5), (7, 1, 3), (12, 4, 2)] {
        let p = BbsbParams::new(kappa, a as f64, t as f64).unwrap();
        for (pn, qn) in [(1, 7), (1, 2), (5, 6)] {
            for (pp, qp) in [(1, 9), (2, 3), (9, 10)] {
                let (vn, vp) = (ratio(pn, qn), ratio(pp, qp));
                let exact = f(&transition(&vn, &vp, kappa, a, t));
                let got = v_transition_density(f(&vn), f(&vp), &p).unwrap();
                assert_rel(got, exact, 1e-11);
            }
        }
    }
}

#[test]
fn mixture_weights_are_three_eight_three() {
    let ln_w = v_mixture_ln_weights(0.5, 1, 1, 2, 1.0, 1.0);
    let w: Vec<f64> = ln_w.iter().map(|l| l.exp()).collect();
    let total: f64 = w.iter().sum();
    for (got, want) in w.iter().zip([3.0 / 14.0, 8.0 / 14.0, 3.0 / 14.0]) {
        assert_rel(got / total, want, 1e-14);
    }
}

/// The weight of component `x` is the Binomial weight times the marginal
/// likelihood of the counts under `Beta(alpha + x, theta + kappa - x)`.
#[test]
fn mixture_weights_against_rational_oracle() {
    for (kappa, a, t, an, tn) in [(3, 1, 1, 2, 0), (5, 2, 3, 1, 4), (8, 1, 2, 6, 3)] {
        let v = ratio(2, 5);
        let exact: Vec<BigRational> = (0..=kappa)
            .map(|x| {
                binomial(x, kappa, &v) * rising(a + x, an) * rising(t + kappa - x, tn)
                    / rising(a + t + kappa, an + tn)
            })
            .collect();
        let got = v_mixture_ln_weights(0.4, an, tn, kappa, a as f64, t as f64);
        for (g, e) in got.iter().zip(&exact) {
            assert_rel(g.exp(), f(e), 1e-11);
        }
    }
}

#[test]
fn binomial_chain_detailed_balance() {
    for (kappa, a, t) in [(2, 1, 1), (5, 2, 3), (9, 1, 4)] {
        let p = BbsbParams::new(kappa, a as f64, t as f64).unwrap();
        let pi = |x: u64| choose(kappa, x) * rising(a, x) * rising(t, kappa - x) / rising(a + t, kappa);
        let step = |xn: u64, xp: u64| {
            choose(kappa, xn) * rising(a + xp, xn) * rising(t + kappa - xp, kappa - xn)
                / rising(a + t + kappa, kappa)
        };
        let mut mass = BigRational::zero();
        for x in 0..=kappa {
            mass += pi(x);
            assert_rel(x_stationary_pmf(x, &p).unwrap(), f(&pi(x)), 1e-12);
            let row: BigRational = (0..=kappa).fold(BigRational::zero(), |acc, y| acc + step(y, x));
            assert!(row.is_one());
            for y in 0..=kappa {
                assert_eq!(pi(x) * step(y, x), pi(y) * step(x, y));
                assert_rel(x_transition_pmf(y, x, &p).unwrap(), f(&step(y, x)), 1e-12);
            }
        }
        assert!(mass.is_one());
    }
}

#[test]
fn v_chain_detailed_balance() {
    let (kappa, a, t) = (4, 2, 3);
    for (p1, q1, p2, q2) in [(1, 3, 3, 4), (1, 10, 1, 2), (7, 8, 2, 9)] {
        let (u, v) = (ratio(p1, q1), ratio(p2, q2));
        let forward = beta_pdf(&u, a, t) * transition(&v, &u, kappa, a, t);
        let backward = beta_pdf(&v, a, t) * transition(&u, &v, kappa, a, t);
        assert_eq!(forward, backward);
    }
}

fn simpson<F: Fn(f64) -> f64>(g: F, intervals: usize) -> f64 {
    let h = 1.0 / intervals as f64;
    let mut total = g(h * 1e-9) + g(1.0 - h * 1e-9);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        total += w * g(i as f64 * h);
    }
    total * h / 3.0
}

#[test]
fn transition_density_integrates_with_stated_moments() {
    for (kappa, a, t) in [(1u64, 1.0, 1.0), (5, 2.0, 3.0), (20, 1.5, 2.5)] {
        let p = BbsbParams::new(kappa, a, t).unwrap();
        for v in [0.2, 0.5, 0.85] {
            let dens = |x: f64| v_transition_density(x, v, &p).unwrap();
            let mass = simpson(dens, 4000);
            let m1 = simpson(|x| x * dens(x), 4000);
            let m2 = simpson(|x| x * x * dens(x), 4000);
            assert!((mass - 1.0).abs() < 1e-6, "{mass}");
            assert!((m1 - conditional_mean(v, &p).unwrap()).abs() < 1e-6);
            assert!((m2 - m1 * m1 - conditional_variance(v, &p).unwrap()).abs() < 1e-6);
        }
    }
}
