//! Stick-breaking weights, adaptive truncation and the prior law of the number
//! of occupied groups `K_n`.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::chain::{step_unchecked, BbsbParams, Kappa};
use crate::error::{invalid, Error, Result};
use crate::sampling;

/// Default bound on the number of sticks a single extension may create.
pub const DEFAULT_STICK_CAP: usize = 1_000_000;

/// Length variables together with their weights `w_j = v_j prod_{i<j}(1 - v_i)`.
///
/// The unbroken remainder `prod_{i<=j}(1 - v_i)` is tracked as a log so deep
/// sticks never underflow it, and `cum_j = 1 - remainder_j`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StickWeights {
    v: Vec<f64>,
    w: Vec<f64>,
    cum: Vec<f64>,
    ln_rest: Vec<f64>,
}

impl StickWeights {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn cum(&self) -> &[f64] {
        &self.cum
    }

    /// `ln prod_{i<=len}(1 - v_i)`, zero for an empty stick.
    pub fn ln_residual(&self) -> f64 {
        self.ln_rest.last().copied().unwrap_or(0.0)
    }

    pub fn residual(&self) -> f64 {
        self.ln_residual().exp()
    }

    pub fn last_v(&self) -> Option<f64> {
        self.v.last().copied()
    }

    /// Appends one length variable. Values must lie in [0, 1]; `v = 1`
    /// exhausts the stick.
    pub fn push(&mut self, v: f64) {
        debug_assert!((0.0..=1.0).contains(&v), "length variable {v}");
        let before = self.ln_residual();
        let after = before + (-v).ln_1p();
        self.w.push(v * before.exp());
        self.cum.push(-after.exp_m1());
        self.ln_rest.push(after);
        self.v.push(v);
    }

    pub fn truncate(&mut self, len: usize) {
        self.v.truncate(len);
        self.w.truncate(len);
        self.cum.truncate(len);
        self.ln_rest.truncate(len);
    }

    /// Replaces every length variable, recomputing weights.
    pub fn reset(&mut self, v: impl IntoIterator<Item = f64>) {
        self.truncate(0);
        for x in v {
            self.push(x);
        }
    }

    /// Appends sticks from `source` until there are at least `len`.
    pub fn extend_to<S, R>(&mut self, source: &S, len: usize, mut rng: &mut R)
    where
        S: LengthSource + ?Sized,
        R: Rng + ?Sized,
    {
        while self.len() < len {
            let v = source.next_length(self.len(), self.last_v(), &mut rng);
            self.push(v);
        }
    }

    /// Appends sticks from `source` until the remainder satisfies
    /// `done(ln_residual)`. An empty stick always receives at least one draw.
    pub fn extend_while_not<S, R, F>(
        &mut self,
        source: &S,
        cap: usize,
        mut rng: &mut R,
        mut done: F,
    ) -> Result<()>
    where
        S: LengthSource + ?Sized,
        R: Rng + ?Sized,
        F: FnMut(f64) -> bool,
    {
        let mut added = 0;
        while self.is_empty() || !done(self.ln_residual()) {
            if added == cap {
                return Err(Error::StickCapExceeded { cap });
            }
            let v = source.next_length(self.len(), self.last_v(), &mut rng);
            self.push(v);
            added += 1;
        }
        Ok(())
    }
}

/// Produces the next length variable given the stick position (zero based)
/// and the previous length variable.
pub trait LengthSource {
    fn next_length(&self, index: usize, prev: Option<f64>, rng: &mut dyn RngCore) -> f64;
}

impl LengthSource for BbsbParams {
    fn next_length(&self, _index: usize, prev: Option<f64>, rng: &mut dyn RngCore) -> f64 {
        match (prev, self.kappa) {
            (None, _) => sampling::beta(self.alpha, self.theta, rng),
            (Some(v), Kappa::Infinite) => v,
            (Some(v), Kappa::Finite(k)) => step_unchecked(v, k, self.alpha, self.theta, rng).1,
        }
    }
}

/// Stick-breaking map from length variables to weights.
pub fn stick_break(v: &[f64]) -> Result<StickWeights> {
    let mut sticks = StickWeights::new();
    for &x in v {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain {
                name: "v",
                value: x,
                domain: "[0, 1]",
            });
        }
        sticks.push(x);
    }
    Ok(sticks)
}

/// Continues the chain behind `state` until the cumulative weight exceeds
/// `threshold`.
pub fn extend_until<R: Rng + ?Sized>(
    params: &BbsbParams,
    threshold: f64,
    state: StickWeights,
    rng: &mut R,
) -> Result<StickWeights> {
    extend_until_capped(params, threshold, state, DEFAULT_STICK_CAP, rng)
}

pub fn extend_until_capped<R: Rng + ?Sized>(
    params: &BbsbParams,
    threshold: f64,
    mut state: StickWeights,
    cap: usize,
    rng: &mut R,
) -> Result<StickWeights> {
    params.validate()?;
    if !(0.0..1.0).contains(&threshold) {
        return Err(invalid("threshold", format!("must lie in [0, 1), got {threshold}")));
    }
    // cum > t  <=>  remainder < 1 - t
    let bound = (-threshold).ln_1p();
    state.extend_while_not(params, cap, rng, |ln_rest| ln_rest < bound)?;
    Ok(state)
}

/// Frequencies of the number of distinct groups over Monte Carlo replicates
/// (or kept Gibbs iterations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnHistogram {
    pub n: usize,
    pub counts: BTreeMap<usize, u64>,
    pub reps: u64,
}

impl KnHistogram {
    pub fn new(n: usize) -> Self {
        KnHistogram {
            n,
            counts: BTreeMap::new(),
            reps: 0,
        }
    }

    pub fn from_values(n: usize, values: impl IntoIterator<Item = usize>) -> Self {
        let mut h = Self::new(n);
        for m in values {
            h.record(m);
        }
        h
    }

    pub fn record(&mut self, m: usize) {
        *self.counts.entry(m).or_insert(0) += 1;
        self.reps += 1;
    }

    pub fn proportion(&self, m: usize) -> f64 {
        self.counts.get(&m).copied().unwrap_or(0) as f64 / self.reps as f64
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().map(|(&m, &c)| m as f64 * c as f64).sum::<f64>() / self.reps as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let ss: f64 = self
            .counts
            .iter()
            .map(|(&m, &c)| c as f64 * (m as f64 - mean).powi(2))
            .sum();
        ss / (self.reps as f64 - 1.0)
    }

    /// Smallest `m` whose cumulative proportion reaches `q`.
    pub fn quantile(&self, q: f64) -> usize {
        let target = q * self.reps as f64;
        let mut acc = 0.0;
        for (&m, &c) in &self.counts {
            acc += c as f64;
            if acc >= target {
                return m;
            }
        }
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// Most frequent value; ties go to the smaller one.
    pub fn mode(&self) -> Option<usize> {
        let mut best: Option<(usize, u64)> = None;
        for (&m, &c) in &self.counts {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((m, c));
            }
        }
        best.map(|(m, _)| m)
    }

    /// CSV with columns `m,count,proportion`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["m", "count", "proportion"])?;
        for (&m, &c) in &self.counts {
            wtr.write_record([m.to_string(), c.to_string(), (c as f64 / self.reps as f64).to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Index of the stick whose cumulative interval contains `u`
/// (`cum_{i-1} < u <= cum_i`, so ties fall to the lower index).
pub fn locate(cum: &[f64], u: f64) -> usize {
    cum.partition_point(|&c| c < u)
}

fn count_distinct(indices: &mut [usize]) -> usize {
    indices.sort_unstable();
    let mut k = 0;
    let mut last = None;
    for &i in indices.iter() {
        if Some(i) != last {
            k += 1;
            last = Some(i);
        }
    }
    k
}

/// Monte Carlo draws of `K_n` under the prior.
pub fn sample_kn<R: Rng + ?Sized>(
    n: usize,
    params: &BbsbParams,
    reps: u64,
    rng: &mut R,
) -> Result<KnHistogram> {
    params.validate()?;
    if n == 0 {
        return Err(invalid("n", "sample size must be at least 1"));
    }
    if reps == 0 {
        return Err(invalid("reps", "at least one replicate is required"));
    }
    let mut hist = KnHistogram::new(n);
    let mut u = vec![0.0; n];
    let mut d = vec![0usize; n];
    for _ in 0..reps {
        for uk in u.iter_mut() {
            *uk = sampling::open_unit(rng);
        }
        let max_u = u.iter().copied().fold(0.0, f64::max);
        match params.kappa {
            // Geometric weights: cum_i = 1 - (1 - lambda)^i, located in closed
            // form so tiny lambda does not require millions of sticks.
            Kappa::Infinite => {
                let lambda = sampling::beta(params.alpha, params.theta, rng);
                let ln_keep = (-lambda).ln_1p();
                for (dk, &uk) in d.iter_mut().zip(&u) {
                    let i = ((-uk).ln_1p() / ln_keep).ceil();
                    *dk = if i < 1.0 { 1 } else { i as usize };
                }
            }
            Kappa::Finite(_) => {
                let sticks = extend_until(params, max_u, StickWeights::new(), rng)?;
                for (dk, &uk) in d.iter_mut().zip(&u) {
                    *dk = locate(sticks.cum(), uk);
                }
            }
        }
        hist.record(count_distinct(&mut d));
    }
    Ok(hist)
}

/// A Monte Carlo proportion and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Estimates `P[w_{j+1} < w_j]`, i.e. `P[v_{j+1}(1 - v_j) < v_j]`, under the
/// stationary chain.
pub fn prob_decreasing<R: Rng + ?Sized>(
    j: usize,
    params: &BbsbParams,
    reps: u64,
    rng: &mut R,
) -> Result<Estimate> {
    params.validate()?;
    if j == 0 {
        return Err(invalid("j", "index must be at least 1"));
    }
    if reps == 0 {
        return Err(invalid("reps", "at least one replicate is required"));
    }
    let mut hits = 0u64;
    for _ in 0..reps {
        let chain = crate::chain::sample_chain(params, j + 1, None, rng)?;
        let (vj, vnext) = (chain.v[j - 1], chain.v[j]);
        if vnext * (1.0 - vj) < vj {
            hits += 1;
        }
    }
    let p = hits as f64 / reps as f64;
    Ok(Estimate {
        value: p,
        std_error: (p * (1.0 - p) / reps as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::seeded_rng;
    use proptest::prelude::*;

    #[test]
    fn whole_stick() {
        let s = stick_break(&[1.0]).unwrap();
        assert_eq!(s.w(), &[1.0]);
        assert_eq!(s.cum(), &[1.0]);
        assert_eq!(s.residual(), 0.0);
    }

    #[test]
    fn halves() {
        let s = stick_break(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(s.w(), &[0.5, 0.25, 0.125]);
        assert_eq!(s.cum(), &[0.5, 0.75, 0.875]);
    }

    #[test]
    fn constant_lengths_are_geometric() {
        let lambda = 0.3;
        let s = stick_break(&[lambda; 30]).unwrap();
        for (j, &w) in s.w().iter().enumerate() {
            let expect = lambda * (1.0f64 - lambda).powi(j as i32);
            assert!((w - expect).abs() < 1e-15 * expect.max(1.0) + 1e-17);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(stick_break(&[0.5, 1.5]).is_err());
        assert!(stick_break(&[-0.1]).is_err());
    }

    #[test]
    fn terminated_stick_has_zero_tail() {
        let s = stick_break(&[0.4, 1.0, 0.7]).unwrap();
        assert_eq!(s.w()[2], 0.0);
        assert_eq!(s.cum()[2], 1.0);
    }

    #[test]
    fn deep_sticks_keep_log_residual() {
        let s = stick_break(&vec![0.9; 400]).unwrap();
        assert!((s.ln_residual() - 400.0 * 0.1f64.ln()).abs() < 1e-9);
        assert_eq!(s.residual(), 0.0);
    }

    #[test]
    fn truncate_restores_residual() {
        let mut s = stick_break(&[0.2, 0.3, 0.4]).unwrap();
        s.truncate(1);
        assert_eq!(s.len(), 1);
        assert!((s.residual() - 0.8).abs() < 1e-15);
        s.push(0.5);
        assert!((s.w()[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn zero_threshold_takes_one_stick() {
        let mut rng = seeded_rng(3);
        let params = BbsbParams::new(2, 1.0, 1.0).unwrap();
        let s = extend_until(&params, 0.0, StickWeights::new(), &mut rng).unwrap();
        assert_eq!(s.len(), 1);
        let again = extend_until(&params, 0.0, s.clone(), &mut rng).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn threshold_must_be_below_one() {
        let mut rng = seeded_rng(3);
        let params = BbsbParams::new(2, 1.0, 1.0).unwrap();
        assert!(extend_until(&params, 1.0, StickWeights::new(), &mut rng).is_err());
    }

    #[test]
    fn cap_is_an_error() {
        let mut rng = seeded_rng(3);
        let params = BbsbParams::new(0, 1e-3, 1e3).unwrap();
        let r = extend_until_capped(&params, 0.999, StickWeights::new(), 10, &mut rng);
        assert!(matches!(r, Err(Error::StickCapExceeded { cap: 10 })));
    }

    #[test]
    fn extension_continues_the_chain() {
        // Appending to an existing prefix must continue from its last value:
        // at kappa = inf every appended value repeats it.
        let mut rng = seeded_rng(4);
        let params = BbsbParams::new(Kappa::Infinite, 1.0, 1.0).unwrap();
        let start = stick_break(&[0.05]).unwrap();
        let s = extend_until(&params, 0.99, start, &mut rng).unwrap();
        assert!(s.v().iter().all(|&v| v == 0.05));
        assert!(*s.cum().last().unwrap() > 0.99);
    }

    #[test]
    fn kn_of_one_observation() {
        let mut rng = seeded_rng(5);
        for kappa in [Kappa::Finite(0), Kappa::Finite(10), Kappa::Infinite] {
            let params = BbsbParams::new(kappa, 1.0, 3.0).unwrap();
            let h = sample_kn(1, &params, 500, &mut rng).unwrap();
            assert_eq!(h.counts.len(), 1);
            assert_eq!(h.counts[&1], 500);
        }
    }

    #[test]
    fn histogram_summaries() {
        let h = KnHistogram::from_values(10, [1, 2, 2, 3, 3, 3]);
        assert_eq!(h.reps, 6);
        assert_eq!(h.mode(), Some(3));
        assert!((h.mean() - 14.0 / 6.0).abs() < 1e-15);
        assert_eq!(h.quantile(0.5), 2);
        assert_eq!(h.quantile(0.95), 3);
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("m,count,proportion\n1,1,0.16666666666666666\n"));
    }

    #[test]
    fn locate_ties_go_low() {
        let cum = [0.5, 0.75, 1.0];
        assert_eq!(locate(&cum, 0.5), 0);
        assert_eq!(locate(&cum, 0.500001), 1);
        assert_eq!(locate(&cum, 0.1), 0);
    }

    #[test]
    fn geometric_is_always_decreasing() {
        let mut rng = seeded_rng(6);
        let params = BbsbParams::new(Kappa::Infinite, 1.0, 1.0).unwrap();
        let e = prob_decreasing(3, &params, 2000, &mut rng).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    proptest! {
        #[test]
        fn cum_increases_and_stays_below_one(
            kappa in 0u64..50,
            alpha in 0.2f64..5.0,
            theta in 0.2f64..5.0,
            threshold in 0.0f64..0.999,
            seed in any::<u64>(),
        ) {
            let mut rng = seeded_rng(seed);
            let params = BbsbParams::new(kappa, alpha, theta).unwrap();
            let s = extend_until(&params, threshold, StickWeights::new(), &mut rng).unwrap();
            prop_assert!(*s.cum().last().unwrap() > threshold);
            let mut prev = 0.0;
            for (j, &c) in s.cum().iter().enumerate() {
                prop_assert!(c <= 1.0);
                prop_assert!(c >= prev);
                prop_assert!((c - prev - s.w()[j]).abs() < 1e-12);
                prev = c;
            }
        }

        #[test]
        fn stick_identity(v in proptest::collection::vec(0.001f64..0.999, 1..60)) {
            let s = stick_break(&v).unwrap();
            let mut rest = 1.0;
            for (j, &vj) in v.iter().enumerate() {
                prop_assert!((s.w()[j] - vj * rest).abs() < 1e-12);
                rest *= 1.0 - vj;
            }
        }
    }
}
