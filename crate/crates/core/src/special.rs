//! Log-space special functions shared by the chain, the samplers and the
//! posterior summaries.

use statrs::function::gamma::ln_gamma;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln (y)_m`, the log of the rising factorial `y (y+1) ... (y+m-1)`.
pub fn ln_rising(y: f64, m: u64) -> f64 {
    if m == 0 {
        0.0
    } else {
        ln_gamma(y + m as f64) - ln_gamma(y)
    }
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

pub fn ln_beta_fn(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Log density of Beta(a, b) at `x` in (0, 1).
pub fn ln_beta_pdf(x: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta_fn(a, b)
}

/// Log pmf of Binomial(n, p) at `k`, with Bin(0, p) the point mass at zero.
pub fn ln_binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let mut out = ln_choose(n, k);
    if k > 0 {
        out += k as f64 * p.ln();
    }
    if n > k {
        out += (n - k) as f64 * (-p).ln_1p();
    }
    out
}

/// Log density of Normal(mean, 1/precision) at `y`.
pub fn ln_normal_pdf(y: f64, mean: f64, precision: f64) -> f64 {
    let z = y - mean;
    0.5 * precision.ln() - LN_SQRT_2PI - 0.5 * precision * z * z
}

/// Log density of Gamma(shape, rate) at `x > 0`.
pub fn ln_gamma_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}
