use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{MixtureState, SliceBound};
use crate::chain::Kappa;
use crate::error::Result;
use crate::stickbreak::KnHistogram;

/// One kept Gibbs iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub k_n: usize,
    pub kappa: Option<Kappa>,
    pub sigma: Option<f64>,
    pub phi: usize,
    pub log_joint: f64,
}

/// Frequencies of a scalar parameter taking values on a discrete set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamHistogram {
    pub values: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl ParamHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, value: f64) {
        match self.values.binary_search_by(|v| v.total_cmp(&value)) {
            Ok(i) => self.counts[i] += 1,
            Err(i) => {
                self.values.insert(i, value);
                self.counts.insert(i, 1);
            }
        }
        self.total += 1;
    }

    pub fn count(&self, value: f64) -> u64 {
        self.values
            .binary_search_by(|v| v.total_cmp(&value))
            .map_or(0, |i| self.counts[i])
    }

    pub fn proportion(&self, value: f64) -> f64 {
        self.count(value) as f64 / self.total as f64
    }

    /// Most frequent value; ties go to the smaller one.
    pub fn mode(&self) -> Option<f64> {
        let mut best: Option<(f64, u64)> = None;
        for (&v, &c) in self.values.iter().zip(&self.counts) {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((v, c));
            }
        }
        best.map(|(v, _)| v)
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.counts)
            .map(|(v, &c)| v * c as f64)
            .sum::<f64>()
            / self.total as f64
    }

    /// CSV with columns `<name>,count,proportion`.
    pub fn write_csv<W: Write>(&self, name: &str, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record([name, "count", "proportion"])?;
        for (&v, &c) in self.values.iter().zip(&self.counts) {
            wtr.write_record([v.to_string(), c.to_string(), (c as f64 / self.total as f64).to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Running average over Gibbs states of the conditional density estimate
/// `sum_j c_j N(y | m_j, 1/p_j)`, where
/// `c_j = (1/n) sum_k 1{w_j > u_k} / |{i : w_i > u_k}|`.
#[derive(Debug, Clone)]
pub struct DensityAccumulator {
    grid: Vec<f64>,
    sum: Vec<f64>,
    states: usize,
}

impl DensityAccumulator {
    pub fn new(grid: Vec<f64>) -> Self {
        let sum = vec![0.0; grid.len()];
        DensityAccumulator { grid, sum, states: 0 }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn states(&self) -> usize {
        self.states
    }

    /// Per-component coefficients `c_j` for one state.
    pub fn coefficients(state: &MixtureState) -> Vec<f64> {
        let w = state.sticks.w();
        let n = state.n();
        if n == 0 {
            return vec![0.0; w.len()];
        }
        if let SliceBound::Geometric { rate } = state.bound {
            return geometric_coefficients(state, rate);
        }
        let mut sorted_w = w.to_vec();
        sorted_w.sort_by(f64::total_cmp);
        // (u_k, 1/|A_k|) sorted by u_k, with prefix sums of the second entry
        let mut slices: Vec<(f64, f64)> = state
            .u
            .iter()
            .map(|&uk| {
                let size = sorted_w.len() - sorted_w.partition_point(|&wj| wj <= uk);
                (uk, 1.0 / size as f64)
            })
            .collect();
        slices.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(slices.len() + 1);
        prefix.push(0.0);
        for &(_, inv) in &slices {
            prefix.push(prefix.last().unwrap() + inv);
        }
        w.iter()
            .map(|&wj| prefix[slices.partition_point(|&(uk, _)| uk < wj)] / n as f64)
            .collect()
    }

    pub fn add(&mut self, state: &MixtureState) {
        let c = Self::coefficients(state);
        for (atom, &cj) in state.atoms.iter().zip(&c) {
            if cj > 0.0 {
                for (s, &y) in self.sum.iter_mut().zip(&self.grid) {
                    *s += cj * atom.kernel(y);
                }
            }
        }
        self.states += 1;
    }

    /// Average over the states added so far.
    pub fn mean(&self) -> Vec<f64> {
        let k = self.states.max(1) as f64;
        self.sum.iter().map(|s| s / k).collect()
    }
}

/// Under the geometric bound each slice admits a prefix `j < J_k` and weighs
/// component `j` by `r_j = w_j / xi_j`, so
/// `c_j = r_j / n * sum_{k: J_k > j} 1 / (r_0 + ... + r_{J_k - 1})`.
fn geometric_coefficients(state: &MixtureState, rate: f64) -> Vec<f64> {
    let phi = state.phi();
    let r: Vec<f64> = (0..phi).map(|j| state.ln_slice_ratio(j).exp()).collect();
    let mut prefix = vec![0.0; phi + 1];
    for j in 0..phi {
        prefix[j + 1] = prefix[j] + r[j];
    }
    let mut at_len = vec![0.0; phi + 1];
    for &uk in &state.u {
        let len = SliceBound::geometric_cover(rate, uk).min(phi);
        at_len[len] += 1.0 / prefix[len];
    }
    let n = state.n() as f64;
    let mut tail = 0.0;
    let mut c = vec![0.0; phi];
    for j in (0..phi).rev() {
        tail += at_len[j + 1];
        c[j] = r[j] * tail / n;
    }
    c
}

pub fn density_estimate(states: &[MixtureState], grid: &[f64]) -> Vec<f64> {
    let mut acc = DensityAccumulator::new(grid.to_vec());
    for s in states {
        acc.add(s);
    }
    acc.mean()
}

pub fn posterior_kn(states: &[MixtureState]) -> KnHistogram {
    let n = states.first().map_or(0, MixtureState::n);
    KnHistogram::from_values(n, states.iter().map(MixtureState::occupied))
}

/// Histogram of `kappa`, with the geometric case recorded as `inf`.
pub fn posterior_kappa(states: &[MixtureState]) -> ParamHistogram {
    let mut h = ParamHistogram::new();
    for s in states {
        h.record(s.kappa.finite().map_or(f64::INFINITY, |k| k as f64));
    }
    h
}

/// Everything retained from a Gibbs run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub n: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub kn: KnHistogram,
    pub kappa: Option<ParamHistogram>,
    pub sigma: Option<ParamHistogram>,
    #[serde(skip)]
    pub grid: Vec<f64>,
    #[serde(skip)]
    pub density: Vec<f64>,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl PosteriorSummary {
    pub fn kept(&self) -> usize {
        self.iterations - self.burn_in
    }

    pub fn kn_mode(&self) -> Option<usize> {
        self.kn.mode()
    }

    pub fn kappa_mode(&self) -> Option<f64> {
        self.kappa.as_ref().and_then(ParamHistogram::mode)
    }

    pub fn sigma_mode(&self) -> Option<f64> {
        self.sigma.as_ref().and_then(ParamHistogram::mode)
    }

    pub fn write_density_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["y", "density"])?;
        for (y, f) in self.grid.iter().zip(&self.density) {
            wtr.write_record([y.to_string(), f.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Columns `iteration,k_n,<kappa|sigma>,phi,log_joint`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let param = if self.sigma.is_some() { "sigma" } else { "kappa" };
        wtr.write_record(["iteration", "k_n", param, "phi", "log_joint"])?;
        for r in &self.trace {
            let value = match (r.sigma, r.kappa) {
                (Some(s), _) => s.to_string(),
                (None, Some(k)) => k.to_string(),
                (None, None) => String::new(),
            };
            wtr.write_record([
                r.iteration.to_string(),
                r.k_n.to_string(),
                value,
                r.phi.to_string(),
                r.log_joint.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Writes `density.csv`, `kn_hist.csv`, `trace.csv`, `summary.json` and,
    /// when present, `kappa_hist.csv` / `sigma_hist.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut open = |name: &str| -> Result<BufWriter<File>> {
            let path = dir.join(name);
            let f = File::create(&path)?;
            written.push(path);
            Ok(BufWriter::new(f))
        };
        self.write_density_csv(open("density.csv")?)?;
        self.kn.write_csv(open("kn_hist.csv")?)?;
        if let Some(h) = &self.kappa {
            h.write_csv("kappa", open("kappa_hist.csv")?)?;
        }
        if let Some(h) = &self.sigma {
            h.write_csv("sigma", open("sigma_hist.csv")?)?;
        }
        self.write_trace_csv(open("trace.csv")?)?;
        let mut json = open("summary.json")?;
        self.write_json(&mut json)?;
        json.write_all(b"\n")?;
        json.flush()?;
        Ok(written)
    }
}
