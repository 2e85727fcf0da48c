//! Experiment configuration: one JSON document, every field overridable by
//! `--dotted.name value` on the command line.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use rnndcor::pipeline::StandardizeOn;
use rnndcor::rnn::{DatasetTag, RnnConfig};
use rnndcor::tsgen::{
    self, ArParams, ColumnSelector, CsvOptions, GarchForm, GarchParams, MaForm, MaParams, NoiseSpec,
    TimeSeries, DEFAULT_LAG_COEFF,
};

/// Series source. Processes given by `order` alone put a single coefficient
/// `coeff` at the largest lag; explicit `coeffs` win when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProcessSpec {
    Ar {
        #[serde(default)]
        coeffs: Option<Vec<f64>>,
        #[serde(default = "one")]
        order: usize,
        #[serde(default = "lag_coeff")]
        coeff: f64,
    },
    Ma {
        #[serde(default)]
        coeffs: Option<Vec<f64>>,
        #[serde(default = "one")]
        order: usize,
        #[serde(default = "lag_coeff")]
        coeff: f64,
        #[serde(default)]
        delta: f64,
        #[serde(default)]
        form: MaForm,
    },
    Arma {
        #[serde(default)]
        ar: Option<Vec<f64>>,
        #[serde(default)]
        ma: Option<Vec<f64>>,
        #[serde(default = "one")]
        ar_order: usize,
        #[serde(default = "one")]
        ma_order: usize,
        #[serde(default = "lag_coeff")]
        coeff: f64,
        #[serde(default)]
        delta: f64,
        #[serde(default)]
        form: MaForm,
    },
    Garch {
        #[serde(default = "garch_alpha0")]
        alpha0: f64,
        #[serde(default = "garch_alpha")]
        alpha: Vec<f64>,
        #[serde(default = "garch_beta")]
        beta: Vec<f64>,
        #[serde(default)]
        form: GarchForm,
    },
    Csv {
        path: PathBuf,
        #[serde(default = "first_column")]
        column: ColumnSelector,
        #[serde(default = "comma")]
        delimiter: char,
        #[serde(default)]
        has_header: bool,
        #[serde(default)]
        rows: Option<(usize, usize)>,
    },
}

fn one() -> usize {
    1
}
fn lag_coeff() -> f64 {
    DEFAULT_LAG_COEFF
}
fn garch_alpha0() -> f64 {
    0.1
}
fn garch_alpha() -> Vec<f64> {
    vec![0.2, 0.1]
}
fn garch_beta() -> Vec<f64> {
    vec![0.3, 0.2]
}
fn first_column() -> ColumnSelector {
    ColumnSelector::Index(0)
}
fn comma() -> char {
    ','
}

impl Default for ProcessSpec {
    fn default() -> Self {
        ProcessSpec::Ar {
            coeffs: None,
            order: 1,
            coeff: DEFAULT_LAG_COEFF,
        }
    }
}

fn single_lag(order: usize, coeff: f64) -> Vec<f64> {
    let mut v = vec![0.0; order.max(1)];
    *v.last_mut().expect("non-empty") = coeff;
    v
}

impl ProcessSpec {
    /// Short label such as `AR(6)` or `GARCH(4,4)`.
    pub fn label(&self) -> String {
        match self {
            ProcessSpec::Ar { coeffs, order, .. } => {
                format!("AR({})", coeffs.as_ref().map_or(*order, Vec::len))
            }
            ProcessSpec::Ma { coeffs, order, .. } => {
                format!("MA({})", coeffs.as_ref().map_or(*order, Vec::len))
            }
            ProcessSpec::Arma {
                ar,
                ma,
                ar_order,
                ma_order,
                ..
            } => format!(
                "ARMA({},{})",
                ar.as_ref().map_or(*ar_order, Vec::len),
                ma.as_ref().map_or(*ma_order, Vec::len)
            ),
            ProcessSpec::Garch { alpha, beta, .. } => {
                format!("GARCH({},{})", alpha.len(), beta.len())
            }
            ProcessSpec::Csv { path, .. } => path
                .file_stem()
                .map_or_else(|| "CSV".into(), |s| s.to_string_lossy().into_owned()),
        }
    }

    /// Generates (or loads) the series. `length` and `burn_in` are ignored
    /// for CSV input.
    pub fn build(&self, noise: &NoiseSpec, length: usize, burn_in: usize) -> rnndcor::Result<TimeSeries> {
        match self {
            ProcessSpec::Ar { coeffs, order, coeff } => {
                let c = coeffs.clone().unwrap_or_else(|| single_lag(*order, *coeff));
                tsgen::gen_ar(&ArParams::new(c)?, noise, length, burn_in)
            }
            ProcessSpec::Ma {
                coeffs,
                order,
                coeff,
                delta,
                form,
            } => {
                let c = coeffs.clone().unwrap_or_else(|| single_lag(*order, *coeff));
                tsgen::gen_ma(&MaParams::new(c, *delta)?, *form, noise, length, burn_in)
            }
            ProcessSpec::Arma {
                ar,
                ma,
                ar_order,
                ma_order,
                coeff,
                delta,
                form,
            } => {
                let a = ar.clone().unwrap_or_else(|| single_lag(*ar_order, *coeff));
                let m = ma.clone().unwrap_or_else(|| single_lag(*ma_order, *coeff));
                tsgen::gen_arma(&ArParams::new(a)?, &MaParams::new(m, *delta)?, *form, noise, length, burn_in)
            }
            ProcessSpec::Garch {
                alpha0,
                alpha,
                beta,
                form,
            } => {
                let p = GarchParams::new(*alpha0, alpha.clone(), beta.clone())?;
                tsgen::gen_garch(&p, *form, noise, length, burn_in)
            }
            ProcessSpec::Csv {
                path,
                column,
                delimiter,
                has_header,
                rows,
            } => {
                let opts = CsvOptions {
                    column: column.clone(),
                    delimiter: *delimiter,
                    has_header: *has_header,
                    rows: *rows,
                };
                tsgen::load_csv(path, &opts)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub mean: f64,
    pub std: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { mean: 0.0, std: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process: ProcessSpec,
    pub length: usize,
    pub burn_in: usize,
    pub noise: NoiseConfig,
    pub split_ratio: f64,
    pub standardize_on: StandardizeOn,
    /// Window `T` and horizon `H` live here. The run seed overrides
    /// `rnn.seed`.
    pub rnn: RnnConfig,
    pub runs: usize,
    pub base_seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Cap on the number of dcor sample columns; `None` uses every sample.
    pub subsample: Option<usize>,
    /// Samples used for profiles and metrics.
    pub evaluate_on: DatasetTag,
    /// Decimals in CSV and SVG output.
    pub precision: usize,
    /// Decimals of the rounded information loss.
    pub loss_decimals: u32,
    /// Worker threads for multi-run commands; `None` uses all cores.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            process: ProcessSpec::default(),
            length: 4000,
            burn_in: 500,
            noise: NoiseConfig::default(),
            split_ratio: 0.8,
            standardize_on: StandardizeOn::Train,
            rnn: RnnConfig::default(),
            runs: 5,
            base_seed: 0,
            output_dir: None,
            subsample: None,
            evaluate_on: DatasetTag::Test,
            precision: 6,
            loss_decimals: 0,
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            bail!("runs must be >= 1");
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            bail!("split_ratio must lie in (0, 1), got {}", self.split_ratio);
        }
        if !(self.noise.std > 0.0) {
            bail!("noise.std must be > 0, got {}", self.noise.std);
        }
        if self.subsample.is_some_and(|s| s < 2) {
            bail!("subsample must keep at least 2 columns");
        }
        if self.workers == Some(0) {
            bail!("workers must be >= 1");
        }
        self.rnn.validate()?;
        Ok(())
    }

    pub fn run_seed(&self, run_index: usize) -> u64 {
        self.base_seed.wrapping_add(run_index as u64)
    }

    pub fn noise_spec(&self, seed: u64) -> Result<NoiseSpec> {
        Ok(NoiseSpec::new(self.noise.mean, self.noise.std, seed)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| rnndcor::Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Applies `--dotted.name value` pairs on top of `self`.
    pub fn with_overrides(&self, args: &[String]) -> Result<Self> {
        let mut doc = serde_json::to_value(self)?;
        for (key, raw) in parse_pairs(args)? {
            apply_override(&mut doc, &key, &raw)?;
        }
        serde_json::from_value(doc).context("config overrides produce an invalid configuration")
    }
}

/// Short flag names accepted in addition to full dotted paths.
const ALIASES: &[(&str, &str)] = &[
    ("process", "process.kind"),
    ("coeffs", "process.coeffs"),
    ("order", "process.order"),
    ("len", "length"),
    ("seed", "base_seed"),
    ("out", "output_dir"),
    ("window", "rnn.window"),
    ("hidden", "rnn.hidden"),
    ("epochs", "rnn.epochs"),
    ("activation", "rnn.activation"),
    ("lr", "rnn.learning_rate"),
    ("dropout", "rnn.dropout_final"),
];

fn parse_pairs(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(flag) = a.strip_prefix("--") else {
            bail!("unexpected argument {a:?}; overrides look like --rnn.hidden 128");
        };
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .with_context(|| format!("--{flag} needs a value"))?;
                (flag.to_string(), v.clone())
            }
        };
        let key = ALIASES
            .iter()
            .find(|(short, _)| *short == key)
            .map_or(key.clone(), |(_, full)| full.to_string());
        out.push((key, value));
    }
    Ok(out)
}

/// Turns a command-line string into JSON: valid JSON is taken as is,
/// colon-separated numbers become arrays, anything else is a string.
fn parse_value(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if raw.contains(':') {
        let parts: Option<Vec<Value>> = raw
            .split(':')
            .map(|p| serde_json::from_str::<f64>(p).ok().map(Value::from))
            .collect();
        if let Some(parts) = parts {
            return Value::Array(parts);
        }
    }
    Value::String(raw.to_string())
}

fn apply_override(doc: &mut Value, key: &str, raw: &str) -> Result<()> {
    let path: Vec<&str> = key.split('.').collect();
    let mut value = parse_value(raw);
    // a single number where a list is expected
    if matches!(path.last(), Some(&("coeffs" | "alpha" | "beta" | "ar" | "ma"))) && value.is_number() {
        value = Value::Array(vec![value]);
    }
    if path == ["process", "kind"] {
        // switching process kind starts from that kind's defaults
        let same = doc["process"]["kind"] == value;
        if !same {
            doc["process"] = serde_json::json!({ "kind": value });
        }
        return Ok(());
    }
    let mut node = doc;
    for (i, part) in path.iter().enumerate() {
        let obj = match node {
            Value::Object(map) => map,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().expect("just set")
            }
            _ => bail!("cannot set {key}: {} is not an object", path[..i].join(".")),
        };
        if i + 1 == path.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn defaults_follow_the_reference_setup() {
        let c = ExperimentConfig::default();
        assert_eq!((c.length, c.rnn.window, c.rnn.hidden, c.rnn.epochs), (4000, 20, 64, 35));
        assert_eq!(c.runs, 5);
        c.validate().unwrap();
    }

    #[test]
    fn dotted_overrides() {
        let c = ExperimentConfig::default()
            .with_overrides(&args("--rnn.hidden 128 --rnn.activation tanh --length=800 --runs 2"))
            .unwrap();
        assert_eq!(c.rnn.hidden, 128);
        assert_eq!(c.rnn.activation, rnndcor::rnn::Activation::Tanh);
        assert_eq!(c.length, 800);
        assert_eq!(c.runs, 2);
    }

    #[test]
    fn alias_overrides_and_coefficient_lists() {
        let c = ExperimentConfig::default()
            .with_overrides(&args("--process ar --coeffs 0:0:0:0:0:0.8 --len 4000 --seed 7"))
            .unwrap();
        assert_eq!(c.base_seed, 7);
        assert_eq!(c.process.label(), "AR(6)");
        let c = ExperimentConfig::default()
            .with_overrides(&args("--process garch --process.alpha 0.1"))
            .unwrap();
        assert_eq!(c.process.label(), "GARCH(1,2)");
        let c = ExperimentConfig::default()
            .with_overrides(&args("--process ma --order 20 --process.form standard"))
            .unwrap();
        assert_eq!(c.process.label(), "MA(20)");
    }

    #[test]
    fn bad_overrides_are_rejected() {
        let base = ExperimentConfig::default();
        assert!(base.with_overrides(&args("--rnn.hidden")).is_err());
        assert!(base.with_overrides(&args("--nonsense 3")).is_err());
        assert!(base.with_overrides(&args("stray")).is_err());
        assert!(base.with_overrides(&args("--rnn.hidden many")).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let c = ExperimentConfig::default()
            .with_overrides(&args("--process arma --process.ar_order 10 --process.form standard"))
            .unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn single_lag_processes() {
        let noise = NoiseSpec::standard(1);
        let s = ProcessSpec::Ar {
            coeffs: None,
            order: 7,
            coeff: 0.8,
        }
        .build(&noise, 100, 10)
        .unwrap();
        match s.origin {
            tsgen::Origin::Ar { coeffs, .. } => assert_eq!(coeffs, single_lag(7, 0.8)),
            other => panic!("{other:?}"),
        }
    }
}
