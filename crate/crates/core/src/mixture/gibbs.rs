use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::summary::{DensityAccumulator, ParamHistogram, PosteriorSummary, TraceRow};
use super::{
    update_atoms, update_kappa_with_table, update_memberships, update_v_u_block, update_v_u_block_augmented,
    update_v_u_block_geometric, KappaPrior, MixtureState, NormalGammaBase, SliceBound,
};
use crate::baselines::{py_ln_prior, py_update_sigma_block, py_update_v_u, PitmanYorLengths, PitmanYorParams};
use crate::chain::{BbsbParams, Kappa, TransitionTable};
use crate::error::{invalid, Error, Result};
use crate::mixture::refresh_slices;
use crate::sampling::seeded_rng;
use crate::special::ln_beta_pdf;
use crate::stickbreak::{KnHistogram, LengthSource};

/// How the length variables of a finite-`kappa` BBSB are resampled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Sequential draw from the Beta-mixture full conditionals.
    #[default]
    Paper,
    /// Gibbs pass over the explicit Binomial chain.
    Augmented,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Variant::Paper),
            "augmented" => Ok(Variant::Augmented),
            other => Err(invalid("variant", format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    /// BBSB prior. With `kappa_prior` set, `kappa` is random and starts at
    /// the prior mode; otherwise it is fixed at `params.kappa`.
    Bbsb {
        params: BbsbParams,
        kappa_prior: Option<KappaPrior>,
    },
    PitmanYor(PitmanYorParams),
}

impl Model {
    pub fn bbsb(params: BbsbParams) -> Self {
        Model::Bbsb {
            params,
            kappa_prior: None,
        }
    }

    pub fn bbsb_random_kappa(alpha: f64, theta: f64, prior: KappaPrior) -> Result<Self> {
        Ok(Model::Bbsb {
            params: BbsbParams::new(prior.mode(), alpha, theta)?,
            kappa_prior: Some(prior),
        })
    }

    pub fn dirichlet(theta: f64) -> Result<Self> {
        Ok(Model::PitmanYor(PitmanYorParams::dirichlet(theta)?))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Bbsb { params, .. } => params.validate(),
            Model::PitmanYor(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub variant: Variant,
    /// Evaluation points for the density estimate.
    pub grid: Vec<f64>,
}

impl GibbsConfig {
    pub fn new(iterations: usize, burn_in: usize, seed: u64, grid: Vec<f64>) -> Self {
        GibbsConfig {
            iterations,
            burn_in,
            seed,
            variant: Variant::Paper,
            grid,
        }
    }

    /// `points` equally spaced values over the data range widened by a
    /// quarter of the range (at least 1) on each side.
    pub fn default_grid(data: &[f64], points: usize) -> Vec<f64> {
        let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) || points == 0 {
            return Vec::new();
        }
        let pad = (0.25 * (hi - lo)).max(1.0);
        linspace(lo - pad, hi + pad, points)
    }
}

fn length_source(model: &Model, kappa: Kappa, sigma: f64) -> Box<dyn LengthSource> {
    match model {
        Model::Bbsb { params, .. } => Box::new(params.with_kappa(kappa)),
        Model::PitmanYor(p) => Box::new(PitmanYorLengths { sigma, theta: p.theta }),
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Slice-Gibbs sampler holding the data, the model and its current state.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    data: &'a [f64],
    base: NormalGammaBase,
    model: Model,
    variant: Variant,
    state: MixtureState,
    sigma: f64,
    table: Option<TransitionTable>,
    rng: ChaCha8Rng,
    iteration: usize,
}

impl<'a> Sampler<'a> {
    /// Starts with every observation in the first component, `v_1` from its
    /// prior, slices under `w_1`, and the tail grown from the prior.
    pub fn new(data: &'a [f64], model: Model, base: NormalGammaBase, variant: Variant, seed: u64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty("data"));
        }
        if let Some(y) = data.iter().find(|y| !y.is_finite()) {
            return Err(invalid("data", format!("non-finite observation {y}")));
        }
        model.validate()?;
        base.validate()?;
        let mut rng = seeded_rng(seed);
        let (kappa, sigma, table, bound) = match &model {
            Model::Bbsb { params, kappa_prior } => {
                let kappa = match kappa_prior {
                    Some(prior) => Kappa::Finite(prior.mode()),
                    None => params.kappa,
                };
                let max = match (kappa_prior, kappa) {
                    (Some(prior), _) => Some(prior.max()),
                    (None, Kappa::Finite(k)) => Some(k),
                    (None, Kappa::Infinite) => None,
                };
                let table = max.map(|m| TransitionTable::new(params.alpha, params.theta, m));
                (kappa, 0.0, table, SliceBound::Weights)
            }
            Model::PitmanYor(p) => (Kappa::Finite(0), p.sigma, None, p.slice_bound()),
        };
        let mut state = MixtureState {
            atoms: Vec::new(),
            sticks: Default::default(),
            u: vec![0.0; data.len()],
            d: vec![0; data.len()],
            kappa,
            bound,
        };
        let source = length_source(&model, kappa, sigma);
        let v1 = source.next_length(0, None, &mut rng);
        state.sticks.push(v1);
        refresh_slices(&mut state, source.as_ref(), &base, &mut rng)?;
        Ok(Sampler {
            data,
            base,
            model,
            variant,
            state,
            sigma,
            table,
            rng,
            iteration: 0,
        })
    }

    pub fn state(&self) -> &MixtureState {
        &self.state
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn data(&self) -> &[f64] {
        self.data
    }

    /// Current `sigma` (always 0 for BBSB models).
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// One full sweep: atoms, (V, U), memberships, then `kappa` or `sigma`.
    pub fn sweep(&mut self) -> Result<()> {
        let rng = &mut self.rng;
        let state = &mut self.state;
        update_atoms(state, self.data, &self.base, rng);
        match &self.model {
            Model::Bbsb { params, .. } => {
                let p = params.with_kappa(state.kappa);
                match (state.kappa, self.variant) {
                    (Kappa::Infinite, _) => update_v_u_block_geometric(state, &p, &self.base, rng)?,
                    (Kappa::Finite(_), Variant::Paper) => update_v_u_block(state, &p, &self.base, rng)?,
                    (Kappa::Finite(_), Variant::Augmented) => {
                        update_v_u_block_augmented(state, &p, &self.base, rng)?
                    }
                }
            }
            Model::PitmanYor(p) => py_update_v_u(state, self.sigma, p.theta, &self.base, rng)?,
        }
        update_memberships(state, self.data, rng);
        match &self.model {
            Model::Bbsb {
                kappa_prior: Some(prior),
                ..
            } => {
                let table = self.table.as_ref().expect("table built for random kappa");
                update_kappa_with_table(state, prior, table, rng);
            }
            Model::Bbsb { .. } => {}
            Model::PitmanYor(p) => self.sigma = py_update_sigma_block(state, p, &self.base, rng)?,
        }
        self.iteration += 1;
        Ok(())
    }

    /// Log density of the data, memberships, atoms, length variables and
    /// (when random) `kappa` or `sigma`, with the slices integrated out.
    pub fn log_joint(&self) -> f64 {
        let s = &self.state;
        let w = s.sticks.w();
        let v = s.sticks.v();
        let mut total: f64 = self
            .data
            .iter()
            .zip(&s.d)
            .map(|(&y, &j)| s.atoms[j].ln_kernel(y) + w[j].ln())
            .sum();
        total += s.atoms.iter().map(|a| self.base.ln_density(a)).sum::<f64>();
        match &self.model {
            Model::Bbsb { params, kappa_prior } => {
                total += ln_beta_pdf(v[0], params.alpha, params.theta);
                if let (Kappa::Finite(k), Some(table)) = (s.kappa, &self.table) {
                    total += v.windows(2).map(|p| table.ln_density(k, p[1], p[0])).sum::<f64>();
                }
                if let (Some(prior), Some(k)) = (kappa_prior, s.kappa.finite()) {
                    total += prior.ln_pmf(k);
                }
            }
            Model::PitmanYor(p) => {
                total += py_ln_prior(v, self.sigma, p.theta);
                if !p.sigma_prior.is_fixed() {
                    total += p.sigma_prior.ln_pmf(self.sigma);
                }
            }
        }
        total
    }

    pub fn trace_row(&self) -> TraceRow {
        let is_py = matches!(self.model, Model::PitmanYor(_));
        TraceRow {
            iteration: self.iteration,
            k_n: self.state.occupied(),
            kappa: (!is_py).then_some(self.state.kappa),
            sigma: is_py.then_some(self.sigma),
            phi: self.state.phi(),
            log_joint: self.log_joint(),
        }
    }
}

pub fn run_gibbs(
    data: &[f64],
    model: Model,
    base: NormalGammaBase,
    config: &GibbsConfig,
) -> Result<PosteriorSummary> {
    run_gibbs_with_observer(data, model, base, config, |_, _| {})
}

/// Runs the sampler, calling `observer` after every sweep (burn-in
/// included). Only kept sweeps enter the summary and the trace.
pub fn run_gibbs_with_observer<F>(
    data: &[f64],
    model: Model,
    base: NormalGammaBase,
    config: &GibbsConfig,
    mut observer: F,
) -> Result<PosteriorSummary>
where
    F: FnMut(&Sampler<'_>, &TraceRow),
{
    if config.burn_in >= config.iterations {
        return Err(invalid(
            "burn_in",
            format!("{} leaves no kept iterations out of {}", config.burn_in, config.iterations),
        ));
    }
    if config.grid.is_empty() || config.grid.iter().any(|g| !g.is_finite()) {
        return Err(invalid("grid", "must be non-empty and finite"));
    }
    let random_kappa = matches!(&model, Model::Bbsb { kappa_prior: Some(_), .. });
    let random_sigma = matches!(&model, Model::PitmanYor(p) if !p.sigma_prior.is_fixed());
    let mut sampler = Sampler::new(data, model, base, config.variant, config.seed)?;
    let mut density = DensityAccumulator::new(config.grid.clone());
    let mut kn = KnHistogram::new(data.len());
    let mut kappa = random_kappa.then(ParamHistogram::new);
    let mut sigma = random_sigma.then(ParamHistogram::new);
    let mut trace = Vec::with_capacity(config.iterations - config.burn_in);
    for it in 0..config.iterations {
        sampler.sweep()?;
        let row = sampler.trace_row();
        observer(&sampler, &row);
        if it < config.burn_in {
            continue;
        }
        density.add(sampler.state());
        kn.record(row.k_n);
        if let (Some(h), Some(k)) = (kappa.as_mut(), row.kappa) {
            h.record(k.finite().map_or(f64::INFINITY, |k| k as f64));
        }
        if let (Some(h), Some(s)) = (sigma.as_mut(), row.sigma) {
            h.record(s);
        }
        trace.push(row);
    }
    Ok(PosteriorSummary {
        n: data.len(),
        iterations: config.iterations,
        burn_in: config.burn_in,
        seed: config.seed,
        kn,
        kappa,
        sigma,
        grid: config.grid.clone(),
        density: density.mean(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::SigmaPrior;

    fn data() -> Vec<f64> {
        let mut rng = seeded_rng(11);
        (0..40)
            .map(|i| {
                let c = if i % 2 == 0 { -3.0 } else { 3.0 };
                c + crate::sampling::standard_normal(&mut rng)
            })
            .collect()
    }

    fn models() -> Vec<Model> {
        vec![
            Model::bbsb(BbsbParams::new(5, 1.0, 1.0).unwrap()),
            Model::bbsb(BbsbParams::new(Kappa::Infinite, 1.0, 1.0).unwrap()),
            Model::bbsb_random_kappa(1.0, 1.0, KappaPrior::uniform(20)).unwrap(),
            Model::dirichlet(1.0).unwrap(),
            Model::PitmanYor(PitmanYorParams::new(0.0, 1.0, SigmaPrior::uniform_grid(21, 0.9).unwrap()).unwrap()),
        ]
    }

    #[test]
    fn invariants_hold_every_sweep() {
        let y = data();
        let base = NormalGammaBase::default_for(&y).unwrap();
        for model in models() {
            for variant in [Variant::Paper, Variant::Augmented] {
                let mut cfg = GibbsConfig::new(60, 10, 3, GibbsConfig::default_grid(&y, 64));
                cfg.variant = variant;
                let summary = run_gibbs_with_observer(&y, model.clone(), base, &cfg, |s, row| {
                    s.state().check_invariants().unwrap();
                    assert!(row.log_joint.is_finite());
                })
                .unwrap();
                assert_eq!(summary.trace.len(), 50);
                assert_eq!(summary.kn.reps, 50);
                assert_eq!(summary.trace[0].iteration, 11);
            }
        }
    }

    #[test]
    fn geometric_slices_leave_posterior_unchanged() {
        let y = data()[..12].to_vec();
        let base = NormalGammaBase::default_for(&y).unwrap();
        let model = Model::dirichlet(1.0).unwrap();
        let kn = |bound: SliceBound| {
            let mut s = Sampler::new(&y, model.clone(), base, Variant::Paper, 4).unwrap();
            s.state.bound = bound;
            let source = length_source(&model, s.state.kappa, 0.0);
            refresh_slices(&mut s.state, source.as_ref(), &base, &mut s.rng).unwrap();
            let mut h = std::collections::BTreeMap::new();
            for i in 0..40_000 {
                s.sweep().unwrap();
                if i >= 1000 {
                    *h.entry(s.state.occupied()).or_insert(0u64) += 1;
                }
            }
            h
        };
        let plain = kn(SliceBound::Weights);
        let geometric = kn(SliceBound::geometric(0.8).unwrap());
        let tv = crate::diagnostics::total_variation(&plain, &geometric);
        assert!(tv < 0.04, "{tv}: {plain:?} vs {geometric:?}");
    }

    #[test]
    fn deterministic_given_seed() {
        let y = data();
        let base = NormalGammaBase::default_for(&y).unwrap();
        let cfg = GibbsConfig::new(30, 5, 17, GibbsConfig::default_grid(&y, 32));
        let model = Model::bbsb_random_kappa(1.0, 1.0, KappaPrior::uniform(10)).unwrap();
        let a = run_gibbs(&y, model.clone(), base, &cfg).unwrap();
        let b = run_gibbs(&y, model, base, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.density, b.density);
    }

    #[test]
    fn rejects_bad_config() {
        let y = data();
        let base = NormalGammaBase::default_for(&y).unwrap();
        let model = Model::dirichlet(1.0).unwrap();
        let cfg = GibbsConfig::new(10, 10, 1, vec![0.0]);
        assert!(run_gibbs(&y, model.clone(), base, &cfg).is_err());
        let cfg = GibbsConfig::new(10, 0, 1, vec![]);
        assert!(run_gibbs(&y, model.clone(), base, &cfg).is_err());
        let cfg = GibbsConfig::new(10, 0, 1, vec![0.0]);
        assert!(run_gibbs(&[], model.clone(), base, &cfg).is_err());
        assert!(run_gibbs(&[f64::NAN], model, base, &cfg).is_err());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("paper".parse::<Variant>().unwrap(), Variant::Paper);
        assert_eq!("augmented".parse::<Variant>().unwrap(), Variant::Augmented);
        assert!("other".parse::<Variant>().is_err());
    }

    #[test]
    fn kappa_zero_variants_identical() {
        let y = data();
        let base = NormalGammaBase::default_for(&y).unwrap();
        let model = Model::bbsb(BbsbParams::new(0, 1.0, 1.0).unwrap());
        let mut cfg = GibbsConfig::new(40, 0, 9, GibbsConfig::default_grid(&y, 16));
        let a = run_gibbs(&y, model.clone(), base, &cfg).unwrap();
        cfg.variant = Variant::Augmented;
        let b = run_gibbs(&y, model, base, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn dp_matches_kappa_zero_bbsb() {
        let y = data();
        let base = NormalGammaBase::default_for(&y).unwrap();
        let cfg = GibbsConfig::new(40, 0, 21, GibbsConfig::default_grid(&y, 16));
        let a = run_gibbs(&y, Model::dirichlet(1.3).unwrap(), base, &cfg).unwrap();
        let b = run_gibbs(&y, Model::bbsb(BbsbParams::new(0, 1.0, 1.3).unwrap()), base, &cfg).unwrap();
        let ka: Vec<_> = a.trace.iter().map(|r| (r.k_n, r.phi)).collect();
        let kb: Vec<_> = b.trace.iter().map(|r| (r.k_n, r.phi)).collect();
        assert_eq!(ka, kb);
        assert_eq!(a.density, b.density);
    }
}
