use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bbsb::baselines::{PitmanYorParams, SigmaPrior, DEFAULT_SIGMA_GRID_MAX, DEFAULT_SIGMA_GRID_POINTS};
use bbsb::chain::sample_chain;
use bbsb::data::{self, Dataset, Format, GaussianMixtureSpec};
use bbsb::mixture::{run_gibbs, GibbsConfig, KappaPrior, Model, NormalGammaBase};
use bbsb::sampling::{beta, seeded_rng};
use bbsb::stickbreak::{sample_kn, stick_break};
use bbsb::{BbsbParams, Kappa};
use serde::Serialize;

use crate::config::{KappaList, KappaSetting, Location, ModelKind, RunConfig, SigmaSetting};
use crate::CliError;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT: &str = "out";
pub const DEFAULT_ITERATIONS: usize = 8000;
pub const DEFAULT_BURN_IN: usize = 3000;
pub const DB1_ITERATIONS: usize = 3000;
pub const DEFAULT_KAPPA_MAX: u64 = 100;
pub const DEFAULT_GRID_POINTS: usize = 512;
pub const DEFAULT_STICKS: usize = 25;
pub const DEFAULT_KN_SAMPLE: usize = 20;
pub const DEFAULT_KN_REPS: usize = 10_000;
pub const DEFAULT_THETA_SWEEP: [f64; 5] = [0.5, 1.0, 3.0, 6.0, 10.0];
pub const DEFAULT_ALPHA_SWEEP: [f64; 5] = [0.5, 0.75, 1.0, 3.0, 6.0];

fn default_kappas() -> KappaList {
    KappaList(
        [Kappa::Finite(0), Kappa::Finite(10), Kappa::Finite(100), Kappa::Infinite]
            .into_iter()
            .map(KappaSetting::Fixed)
            .collect(),
    )
}

fn fixed_kappas(list: &KappaList) -> Result<Vec<Kappa>, CliError> {
    list.0
        .iter()
        .map(|k| match k {
            KappaSetting::Fixed(k) => Ok(*k),
            KappaSetting::Random => Err(CliError::Config("`random` kappa is only meaningful for fit".into())),
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(bbsb::Error::from)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Length-variable and weight trajectories, one CSV per kappa, all chains
/// sharing the same `v_1`.
pub fn simulate_chain(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let out = cfg.out.clone().unwrap_or_else(|| DEFAULT_OUT.into());
    let alpha = cfg.alpha.unwrap_or(1.0);
    let theta = cfg.theta.unwrap_or(1.0);
    let sticks = cfg.sticks.unwrap_or(DEFAULT_STICKS);
    let kappas = fixed_kappas(cfg.kappa.as_ref().unwrap_or(&default_kappas()))?;
    BbsbParams::new(0, alpha, theta)?;
    if sticks == 0 {
        return Err(CliError::Config("sticks must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    let v1 = match cfg.v1 {
        Some(v) => v,
        None => beta(alpha, theta, &mut rng),
    };
    let mut written = Vec::new();
    for kappa in kappas {
        let params = BbsbParams::new(kappa, alpha, theta)?;
        let chain = sample_chain(&params, sticks, Some(v1), &mut rng)?;
        let sw = stick_break(&chain.v)?;
        let path = out.join(format!("chain_kappa-{kappa}.csv"));
        let mut f = create(&path)?;
        writeln!(f, "j,v,w")?;
        for (j, (v, w)) in sw.v().iter().zip(sw.w()).enumerate() {
            writeln!(f, "{},{v},{w}", j + 1)?;
        }
        f.flush()?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
struct KnRecord {
    sweep: &'static str,
    kappa: Kappa,
    alpha: f64,
    theta: f64,
    reps: u64,
    mean: f64,
    mode: Option<usize>,
    q95: usize,
    file: String,
}

/// Prior distribution of `K_n` over kappa x (theta sweep, alpha sweep).
pub fn prior_kn(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let out = cfg.out.clone().unwrap_or_else(|| DEFAULT_OUT.into());
    let n = cfg.n.unwrap_or(DEFAULT_KN_SAMPLE);
    let reps = cfg.reps.unwrap_or(DEFAULT_KN_REPS) as u64;
    let kappas = fixed_kappas(cfg.kappa.as_ref().unwrap_or(&default_kappas()))?;
    let (thetas, alphas) = match (&cfg.thetas, &cfg.alphas) {
        (None, None) => (DEFAULT_THETA_SWEEP.to_vec(), DEFAULT_ALPHA_SWEEP.to_vec()),
        (t, a) => (t.clone().unwrap_or_default(), a.clone().unwrap_or_default()),
    };
    let fixed_alpha = cfg.alpha.unwrap_or(1.0);
    let fixed_theta = cfg.theta.unwrap_or(1.0);
    let mut settings = Vec::new();
    for &theta in &thetas {
        settings.push(("theta-sweep", fixed_alpha, theta));
    }
    for &alpha in &alphas {
        settings.push(("alpha-sweep", alpha, fixed_theta));
    }
    let mut rng = seeded_rng(seed);
    let mut written = Vec::new();
    let mut records = Vec::new();
    for &(sweep, alpha, theta) in &settings {
        for &kappa in &kappas {
            let params = BbsbParams::new(kappa, alpha, theta)?;
            let hist = sample_kn(n, &params, reps, &mut rng)?;
            let name = format!("{sweep}/kn_kappa-{kappa}_alpha-{alpha}_theta-{theta}.csv");
            let path = out.join(&name);
            let mut f = create(&path)?;
            hist.write_csv(&mut f)?;
            f.flush()?;
            records.push(KnRecord {
                sweep,
                kappa,
                alpha,
                theta,
                reps,
                mean: hist.mean(),
                mode: hist.mode(),
                q95: hist.quantile(0.95),
                file: name,
            });
            written.push(path);
        }
    }
    let path = out.join("prior_kn.json");
    write_json(&path, &records)?;
    written.push(path);
    Ok(written)
}

fn spec_from(cfg: &RunConfig, default_db: Option<u32>) -> Result<GaussianMixtureSpec, CliError> {
    match (&cfg.spec, cfg.db.or(default_db)) {
        (Some(path), _) => Ok(data::load_spec(path)?),
        (None, Some(id)) => Ok(data::builtin_database(id)?),
        (None, None) => Err(CliError::Config("give either --db or --spec".into())),
    }
}

/// Materializes a built-in or custom-spec dataset as `data.csv` plus a
/// `dataset.json` recording the spec and seed.
pub fn generate_data(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let out = cfg.out.clone().unwrap_or_else(|| DEFAULT_OUT.into());
    let spec = spec_from(cfg, None)?;
    let ds = data::generate(&spec, cfg.n.unwrap_or(data::DEFAULT_N), seed)?;
    fs::create_dir_all(&out)?;
    let csv_path = out.join("data.csv");
    let json_path = out.join("dataset.json");
    data::save(&ds, &csv_path, Format::Csv)?;
    data::save(&ds, &json_path, Format::Json)?;
    Ok(vec![csv_path, json_path])
}

fn load_fit_data(cfg: &RunConfig, seed: u64, default_db: u32) -> Result<Dataset, CliError> {
    match &cfg.data {
        Some(path) => Ok(data::load(path, Format::from_path(path))?),
        None => {
            let spec = spec_from(cfg, Some(default_db))?;
            Ok(data::generate(&spec, cfg.n.unwrap_or(data::DEFAULT_N), seed)?)
        }
    }
}

fn base_measure(cfg: &RunConfig, values: &[f64]) -> Result<NormalGammaBase, CliError> {
    let location = match cfg.base_location.unwrap_or(Location::DataMean) {
        Location::DataMean => values.iter().sum::<f64>() / values.len() as f64,
        Location::Value(v) => v,
    };
    Ok(NormalGammaBase::new(
        location,
        cfg.base_scale.unwrap_or(100.0),
        cfg.base_shape.unwrap_or(0.5),
        cfg.base_rate.unwrap_or(0.5),
    )?)
}

fn evaluation_grid(cfg: &RunConfig, values: &[f64]) -> Result<Vec<f64>, CliError> {
    let points = cfg.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
    if points < 2 {
        return Err(CliError::Config("grid_points must be at least 2".into()));
    }
    let auto = GibbsConfig::default_grid(values, 2);
    let lo = cfg.grid_min.unwrap_or(auto[0]);
    let hi = cfg.grid_max.unwrap_or(auto[1]);
    if !(lo < hi) {
        return Err(CliError::Config(format!("grid_min {lo} must be below grid_max {hi}")));
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

fn build_model(cfg: &RunConfig, kind: ModelKind, kappa: KappaSetting) -> Result<Model, CliError> {
    let alpha = cfg.alpha.unwrap_or(1.0);
    let theta = cfg.theta.unwrap_or(1.0);
    Ok(match kind {
        ModelKind::Bbsb => match kappa {
            KappaSetting::Fixed(k) => Model::bbsb(BbsbParams::new(k, alpha, theta)?),
            KappaSetting::Random => Model::bbsb_random_kappa(
                alpha,
                theta,
                KappaPrior::uniform(cfg.kappa_max.unwrap_or(DEFAULT_KAPPA_MAX)),
            )?,
        },
        ModelKind::Geometric => Model::bbsb(BbsbParams::new(Kappa::Infinite, alpha, theta)?),
        ModelKind::Dp => Model::dirichlet(theta)?,
        ModelKind::PitmanYor => {
            let (start, prior) = match cfg.sigma.unwrap_or(SigmaSetting::Random) {
                SigmaSetting::Fixed(s) => (s, SigmaPrior::point(s)?),
                SigmaSetting::Random => (
                    0.0,
                    SigmaPrior::uniform_grid(
                        cfg.sigma_grid_points.unwrap_or(DEFAULT_SIGMA_GRID_POINTS),
                        DEFAULT_SIGMA_GRID_MAX,
                    )?,
                ),
            };
            Model::PitmanYor(PitmanYorParams::new(start, theta, prior)?)
        }
    })
}

/// Fits the mixture model and writes the posterior summaries. With several
/// kappa values each run goes to its own `kappa-<value>` subdirectory.
pub fn fit(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let replicate = cfg.replicate_db1.unwrap_or(false);
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let out = cfg.out.clone().unwrap_or_else(|| DEFAULT_OUT.into());
    let (iterations, burn_in, default_db, default_kappa) = if replicate {
        (DB1_ITERATIONS, 0, 1, default_kappas())
    } else {
        (DEFAULT_ITERATIONS, DEFAULT_BURN_IN, 2, KappaList(vec![KappaSetting::Random]))
    };
    let iterations = cfg.iterations.unwrap_or(iterations);
    let burn_in = cfg.burn_in.unwrap_or(burn_in);
    if burn_in >= iterations {
        return Err(CliError::Config(format!(
            "burn_in ({burn_in}) must be below iterations ({iterations})"
        )));
    }
    let kind = cfg.model.unwrap_or(ModelKind::Bbsb);
    let kappas = match kind {
        ModelKind::Bbsb => cfg.kappa.clone().unwrap_or(default_kappa).0,
        _ => vec![KappaSetting::Random],
    };
    let dataset = load_fit_data(cfg, seed, default_db)?;
    let base = base_measure(cfg, &dataset.values)?;
    let grid = evaluation_grid(cfg, &dataset.values)?;
    let mut written = Vec::new();
    for &kappa in &kappas {
        let dir = if kappas.len() == 1 {
            out.clone()
        } else {
            out.join(format!("kappa-{kappa}"))
        };
        let model = build_model(cfg, kind, kappa)?;
        let gibbs = GibbsConfig {
            iterations,
            burn_in,
            seed,
            variant: cfg.variant.unwrap_or_default(),
            grid: grid.clone(),
        };
        let summary = run_gibbs(&dataset.values, model, base, &gibbs)?;
        written.extend(summary.write_outputs(&dir)?);
        let data_path = dir.join("data.csv");
        data::write_csv(&dataset.values, create(&data_path)?)?;
        written.push(data_path);
        let resolved = RunConfig {
            out: None,
            seed: Some(seed),
            model: Some(kind),
            kappa: (kind == ModelKind::Bbsb).then(|| KappaList(vec![kappa])),
            iterations: Some(iterations),
            burn_in: Some(burn_in),
            variant: Some(gibbs.variant),
            grid_min: grid.first().copied(),
            grid_max: grid.last().copied(),
            grid_points: Some(grid.len()),
            base_location: Some(Location::Value(base.location)),
            base_scale: Some(base.scale),
            base_shape: Some(base.shape),
            base_rate: Some(base.rate),
            ..cfg.clone()
        };
        let path = dir.join("run_config.json");
        write_json(&path, &resolved)?;
        written.push(path);
    }
    Ok(written)
}
