//! Run configuration: a flat JSON object whose keys mirror the command-line
//! flags. Values given on the command line take precedence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bbsb::mixture::Variant;
use bbsb::Kappa;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Bbsb,
    Dp,
    Geometric,
    PitmanYor,
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bbsb" => Ok(ModelKind::Bbsb),
            "dp" => Ok(ModelKind::Dp),
            "geometric" => Ok(ModelKind::Geometric),
            "pitman-yor" => Ok(ModelKind::PitmanYor),
            other => Err(format!("unknown model `{other}` (bbsb, dp, geometric, pitman-yor)")),
        }
    }
}

/// A `kappa` setting: a fixed value (possibly `inf`) or `random`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaSetting {
    Fixed(Kappa),
    Random,
}

impl fmt::Display for KappaSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KappaSetting::Fixed(k) => k.fmt(f),
            KappaSetting::Random => f.write_str("random"),
        }
    }
}

impl FromStr for KappaSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "random" => Ok(KappaSetting::Random),
            other => other
                .parse::<Kappa>()
                .map(KappaSetting::Fixed)
                .map_err(|e| format!("kappa `{other}`: {e}")),
        }
    }
}

/// Comma-separated list of kappa settings, e.g. `0,10,100,inf`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KappaList(pub Vec<KappaSetting>);

impl FromStr for KappaList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let items = s
            .split(',')
            .map(KappaSetting::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        if items.is_empty() {
            return Err("empty kappa list".into());
        }
        Ok(KappaList(items))
    }
}

impl fmt::Display for KappaList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for KappaList {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for KappaList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Item {
            Int(u64),
            Text(String),
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            One(Item),
            Many(Vec<Item>),
        }
        let text = |item: Item| match item {
            Item::Int(k) => k.to_string(),
            Item::Text(s) => s,
        };
        let joined = match Repr::deserialize(d)? {
            Repr::One(item) => text(item),
            Repr::Many(items) => items.into_iter().map(text).collect::<Vec<_>>().join(","),
        };
        joined.parse().map_err(serde::de::Error::custom)
    }
}

/// A real parameter that is either fixed or given a grid prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSetting {
    Fixed(f64),
    Random,
}

impl FromStr for SigmaSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "random" => Ok(SigmaSetting::Random),
            other => other
                .parse::<f64>()
                .map(SigmaSetting::Fixed)
                .map_err(|_| format!("sigma `{other}` is neither a number nor `random`")),
        }
    }
}

/// Location of the base measure: a number or the sample mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    DataMean,
    Value(f64),
}

impl FromStr for Location {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "data-mean" => Ok(Location::DataMean),
            other => other
                .parse::<f64>()
                .map(Location::Value)
                .map_err(|_| format!("location `{other}` is neither a number nor `data-mean`")),
        }
    }
}

macro_rules! string_or_number_serde {
    ($ty:ty, $fixed:path, $word:path, $name:literal) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                match self {
                    $fixed(v) => s.serialize_f64(*v),
                    $word => s.serialize_str($name),
                }
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                #[derive(Deserialize)]
                #[serde(untagged)]
                enum Repr {
                    Num(f64),
                    Text(String),
                }
                match Repr::deserialize(d)? {
                    Repr::Num(v) => Ok($fixed(v)),
                    Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
                }
            }
        }
    };
}

string_or_number_serde!(SigmaSetting, SigmaSetting::Fixed, SigmaSetting::Random, "random");
string_or_number_serde!(Location, Location::Value, Location::DataMean, "data-mean");

/// Every configurable value. `None` means "use the command default".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<KappaList>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaSetting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub db: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sticks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_location: Option<Location>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_shape: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicate_db1: Option<bool>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field; } )*
    };
}

impl RunConfig {
    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: RunConfig) -> RunConfig {
        overlay!(self, other;
            seed, out, model, kappa, kappa_max, alpha, theta, alphas, thetas, sigma,
            sigma_grid_points, iterations, burn_in, variant, db, data, spec, n, reps,
            sticks, v1, grid_min, grid_max, grid_points, base_location, base_scale,
            base_shape, base_rate, replicate_db1,
        );
        self
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
