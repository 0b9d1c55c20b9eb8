//! Synthetic Gaussian-mixture datasets and their persistence.
//!
//! The three built-in databases are pinned in `databases/db{1,2,3}.json`.
//! Database 3 is a stand-in: seven components with heterogeneous weights,
//! means and scales, not a reproduction of any published specification.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sampling::{seeded_rng, standard_normal};
use crate::special::ln_normal_pdf;

/// Observations per built-in database.
pub const DEFAULT_N: usize = 200;

const DB1: &str = include_str!("../databases/db1.json");
const DB2: &str = include_str!("../databases/db2.json");
const DB3: &str = include_str!("../databases/db3.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMixtureSpec {
    pub components: Vec<Component>,
}

impl GaussianMixtureSpec {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let spec = GaussianMixtureSpec { components };
        spec.validate()?;
        Ok(spec)
    }

    /// Weights positive and summing to one within `1e-12`, finite means,
    /// positive finite sds.
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Empty("mixture components"));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(invalid("weight", format!("component {}: {} is not positive", i + 1, c.weight)));
            }
            if !c.mean.is_finite() {
                return Err(invalid("mean", format!("component {}: {} is not finite", i + 1, c.mean)));
            }
            if !(c.sd > 0.0 && c.sd.is_finite()) {
                return Err(invalid("sd", format!("component {}: {} is not positive", i + 1, c.sd)));
            }
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("weight", format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn density(&self, y: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * ln_normal_pdf(y, c.mean, 1.0 / (c.sd * c.sd)).exp())
            .sum()
    }

    /// One draw: a component from the weights, then a Normal value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.components.last().unwrap();
        for c in &self.components {
            acc += c.weight;
            if u < acc {
                chosen = c;
                break;
            }
        }
        chosen.mean + chosen.sd * standard_normal(rng)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// Parses and validates a JSON spec of the form
/// `{"components": [{"weight": .., "mean": .., "sd": ..}, ...]}`.
pub fn parse_spec_json(text: &str) -> Result<GaussianMixtureSpec> {
    let spec: GaussianMixtureSpec = serde_json::from_str(text)?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_spec(path: &Path) -> Result<GaussianMixtureSpec> {
    parse_spec_json(&fs::read_to_string(path)?)
}

pub fn builtin_database(id: u32) -> Result<GaussianMixtureSpec> {
    let text = match id {
        1 => DB1,
        2 => DB2,
        3 => DB3,
        other => return Err(Error::UnknownDatabase(other)),
    };
    parse_spec_json(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<GaussianMixtureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let ds = Dataset {
            values,
            spec: None,
            seed: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if let Some(i) = self.values.iter().position(|y| !y.is_finite()) {
            return Err(invalid("values", format!("entry {} is not finite", i + 1)));
        }
        if let Some(spec) = &self.spec {
            spec.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `n` i.i.d. draws from `spec` using a generator seeded with `seed`.
pub fn generate(spec: &GaussianMixtureSpec, n: usize, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    let mut rng = seeded_rng(seed);
    let values = (0..n).map(|_| spec.sample(&mut rng)).collect();
    Ok(Dataset {
        values,
        spec: Some(spec.clone()),
        seed: Some(seed),
    })
}

/// Reads a one-column CSV with header `y`. Errors carry the file line.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = rdr.headers()?.clone();
    if header.is_empty() {
        return Err(Error::Empty("csv file"));
    }
    if header.len() != 1 || &header[0] != "y" {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected the single header `y`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected one field, found {}", record.len()),
            });
        }
        let field = &record[0];
        let y: f64 = field.parse().map_err(|_| Error::Parse {
            line,
            message: format!("`{field}` is not a number"),
        })?;
        if !y.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("non-finite value `{field}`"),
            });
        }
        values.push(y);
    }
    if values.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    Ok(values)
}

pub fn parse_csv(text: &str) -> Result<Vec<f64>> {
    read_csv(text.as_bytes())
}

/// Writes the values under header `y`, each in shortest round-trip form.
pub fn write_csv<W: Write>(values: &[f64], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["y"])?;
    for y in values {
        wtr.write_record([y.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Accepts either a [`Dataset`] object or a bare array of numbers.
pub fn parse_dataset_json(text: &str) -> Result<Dataset> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Bare(Vec<f64>),
        Full(Dataset),
    }
    let ds = match serde_json::from_str::<Repr>(text)? {
        Repr::Bare(values) => Dataset {
            values,
            spec: None,
            seed: None,
        },
        Repr::Full(ds) => ds,
    };
    ds.validate()?;
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` means JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

pub fn load(path: &Path, format: Format) -> Result<Dataset> {
    match format {
        Format::Csv => Dataset::new(read_csv(fs::File::open(path)?)?),
        Format::Json => parse_dataset_json(&fs::read_to_string(path)?),
    }
}

pub fn save(dataset: &Dataset, path: &Path, format: Format) -> Result<()> {
    dataset.validate()?;
    match format {
        Format::Csv => write_csv(&dataset.values, fs::File::create(path)?),
        Format::Json => {
            let mut f = fs::File::create(path)?;
            serde_json::to_writer_pretty(&mut f, dataset)?;
            f.write_all(b"\n")?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_specs() {
        let db1 = builtin_database(1).unwrap();
        assert_eq!(db1.components.len(), 11);
        let gaps: Vec<f64> = db1.components.windows(2).map(|c| c[1].mean - c[0].mean).collect();
        assert!(gaps.iter().all(|&g| g == gaps[0]));
        assert_eq!(builtin_database(2).unwrap().components.len(), 2);
        let db3 = builtin_database(3).unwrap();
        assert_eq!(db3.components.len(), 7);
        assert!(db3.components.iter().any(|c| c.weight != db3.components[0].weight));
        assert!(db3.components.iter().any(|c| c.sd != db3.components[0].sd));
        assert!(matches!(builtin_database(4), Err(Error::UnknownDatabase(4))));
    }

    #[test]
    fn spec_validation() {
        let c = |weight, sd| Component { weight, mean: 0.0, sd };
        assert!(GaussianMixtureSpec::new(vec![c(1.0, 1.0)]).is_ok());
        assert!(GaussianMixtureSpec::new(vec![c(0.5, 1.0)]).is_err());
        assert!(GaussianMixtureSpec::new(vec![c(1.0, 0.0)]).is_err());
        assert!(GaussianMixtureSpec::new(vec![c(1.5, 1.0), c(-0.5, 1.0)]).is_err());
        assert!(GaussianMixtureSpec::new(vec![]).is_err());
        assert!(parse_spec_json(r#"{"components":[{"weight":1,"mean":0,"sd":1,"x":2}]}"#).is_err());
    }

    #[test]
    fn generation_is_seeded() {
        let spec = builtin_database(2).unwrap();
        let a = generate(&spec, 50, 3).unwrap();
        assert_eq!(a, generate(&spec, 50, 3).unwrap());
        assert_ne!(a.values, generate(&spec, 50, 4).unwrap().values);
        assert!(generate(&spec, 0, 3).is_err());
    }

    #[test]
    fn single_component_mean() {
        let spec = GaussianMixtureSpec::new(vec![Component { weight: 1.0, mean: 0.0, sd: 1.0 }]).unwrap();
        let n = 100_000;
        let ds = generate(&spec, n, 1).unwrap();
        let mean = ds.values.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn symmetric_pair_mean() {
        let c = |mean| Component { weight: 0.5, mean, sd: 1.0 };
        let spec = GaussianMixtureSpec::new(vec![c(-10.0), c(10.0)]).unwrap();
        let n = 20_000;
        let ds = generate(&spec, n, 2).unwrap();
        let mean = ds.values.iter().sum::<f64>() / n as f64;
        // variance 1 + 100
        assert!(mean.abs() < 3.0 * (101.0 / n as f64).sqrt());
    }

    #[test]
    fn csv_round_trip() {
        let values = vec![0.1, -1e-300, 1.0 / 3.0, 12345.678901234567, f64::MIN_POSITIVE];
        let mut buf = Vec::new();
        write_csv(&values, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), values);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(parse_csv(""), Err(Error::Empty(_))));
        assert!(matches!(parse_csv("y\n"), Err(Error::Empty(_))));
        assert!(matches!(parse_csv("x\n1\n"), Err(Error::Parse { line: 1, .. })));
        match parse_csv("y\n1.0\nNaN\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_csv("y\n1.0\n2.0\nabc\n") {
            Err(e @ Error::Parse { line: 4, .. }) => assert!(e.to_string().contains("line 4")),
            other => panic!("{other:?}"),
        }
        assert!(parse_csv("y\n1,2\n").is_err());
    }

    #[test]
    fn json_dataset_forms() {
        assert_eq!(parse_dataset_json("[1.5, 2]").unwrap().values, vec![1.5, 2.0]);
        let ds = generate(&builtin_database(2).unwrap(), 5, 1).unwrap();
        let text = serde_json::to_string(&ds).unwrap();
        assert_eq!(parse_dataset_json(&text).unwrap(), ds);
        assert!(parse_dataset_json("[]").is_err());
        assert!(parse_dataset_json("{}").is_err());
    }
}
