//! Synthetic AR / MA / ARMA / GARCH generators and CSV ingestion.
//!
//! All generators share one recursion driver. White noise is drawn once per
//! time step (burn-in included) from the [`Stream::Noise`] stream of the
//! noise seed, pre-history values are zero (and `alpha0` for GARCH
//! variances), and the first `burn_in` values are discarded.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Gaussian, Stream};

/// Variance level above which the GARCH recursion is aborted.
pub const GARCH_VARIANCE_LIMIT: f64 = 1e12;

/// Default coefficient placed at the largest lag when none are given.
pub const DEFAULT_LAG_COEFF: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub mean: f64,
    pub std: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(mean: f64, std: f64, seed: u64) -> Result<Self> {
        if !(std > 0.0) || !std.is_finite() || !mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise needs finite mean and std > 0, got N({mean}, {std}^2)"
            )));
        }
        Ok(Self { mean, std, seed })
    }

    /// N(0, 1) noise.
    pub fn standard(seed: u64) -> Self {
        Self {
            mean: 0.0,
            std: 1.0,
            seed,
        }
    }

    fn draw(&self, count: usize) -> Vec<f64> {
        let mut g = Gaussian::new(rng::stream(self.seed, Stream::Noise));
        (0..count).map(|_| g.next(self.mean, self.std)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArParams {
    coeffs: Vec<f64>,
}

impl ArParams {
    /// Validates stationarity with the Durbin-Levinson step-down recursion:
    /// the AR polynomial has all roots outside the unit circle iff every
    /// reflection coefficient has modulus below one.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite AR coefficient in {coeffs:?}"
            )));
        }
        let mut a = coeffs.clone();
        while let Some(&last) = a.last() {
            if last != 0.0 {
                break;
            }
            a.pop();
        }
        for k in (1..=a.len()).rev() {
            let kappa = a[k - 1];
            if kappa.abs() >= 1.0 || !kappa.is_finite() {
                return Err(Error::Stationarity {
                    coeffs,
                    order: k,
                    reflection: kappa,
                });
            }
            let denom = 1.0 - kappa * kappa;
            let prev: Vec<f64> = (1..k)
                .map(|j| (a[j - 1] + kappa * a[k - j - 1]) / denom)
                .collect();
            a = prev;
        }
        Ok(Self { coeffs })
    }

    /// AR(p) with a single coefficient at lag `p`.
    pub fn single_lag(p: usize, coeff: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("AR order must be >= 1".into()));
        }
        let mut c = vec![0.0; p];
        c[p - 1] = coeff;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaParams {
    coeffs: Vec<f64>,
    delta: f64,
}

impl MaParams {
    /// An empty coefficient list is promoted to `q = 1` with `theta_1 = 0`.
    pub fn new(coeffs: Vec<f64>, delta: f64) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite MA parameter in {coeffs:?}, delta {delta}"
            )));
        }
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Ok(Self { coeffs, delta })
    }

    pub fn single_lag(q: usize, coeff: f64, delta: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("MA order must be >= 1".into()));
        }
        let mut c = vec![0.0; q];
        c[q - 1] = coeff;
        Self::new(c, delta)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }
}

/// Which MA recursion to run.
///
/// `Printed` omits the contemporaneous noise term:
/// `z_l = delta + sum theta_i e_{l-i}`. `Standard` is the textbook MA(q)
/// with `+ e_l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaForm {
    #[default]
    Printed,
    Standard,
}

/// Which GARCH variance recursion to run.
///
/// `Printed` squares the lagged variances (`beta_j h_{l-j}^2`); `Standard`
/// uses `beta_j h_{l-j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GarchForm {
    #[default]
    Printed,
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    alpha0: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl GarchParams {
    pub fn new(alpha0: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if !(alpha0 > 0.0) || !alpha0.is_finite() {
            return Err(Error::GarchConstraint(format!("alpha0 must be > 0, got {alpha0}")));
        }
        if let Some(a) = alpha.iter().chain(&beta).find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::GarchConstraint(format!(
                "alpha and beta coefficients must be finite and >= 0, got {a}"
            )));
        }
        let persistence: f64 = alpha.iter().chain(&beta).sum();
        if persistence >= 1.0 {
            return Err(Error::GarchConstraint(format!(
                "sum of alpha and beta must be < 1, got {persistence}"
            )));
        }
        Ok(Self { alpha0, alpha, beta })
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }
}

/// Where a series came from, with enough detail to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Origin {
    Ar {
        coeffs: Vec<f64>,
        burn_in: usize,
    },
    Ma {
        coeffs: Vec<f64>,
        delta: f64,
        form: MaForm,
        burn_in: usize,
    },
    Arma {
        ar: Vec<f64>,
        ma: Vec<f64>,
        delta: f64,
        form: MaForm,
        burn_in: usize,
    },
    Garch {
        alpha0: f64,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        form: GarchForm,
        burn_in: usize,
    },
    Csv {
        path: PathBuf,
        column: String,
        rows: usize,
    },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Ar { coeffs, .. } => write!(f, "AR({})", coeffs.len()),
            Origin::Ma { coeffs, .. } => write!(f, "MA({})", coeffs.len()),
            Origin::Arma { ar, ma, .. } => write!(f, "ARMA({},{})", ar.len(), ma.len()),
            Origin::Garch { alpha, beta, .. } => {
                write!(f, "GARCH({},{})", alpha.len(), beta.len())
            }
            Origin::Csv { path, column, .. } => write!(f, "{}[{}]", path.display(), column),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub origin: Origin,
    pub noise: Option<NoiseSpec>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Single-column CSV, optionally headed by `value`. Values are written in
    /// shortest round-trip form.
    pub fn write_csv<W: Write>(&self, out: W, header: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if header {
            w.write_record(["value"])?;
        }
        for v in &self.values {
            w.write_record([v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

fn check_length(length: usize) -> Result<()> {
    if length < 2 {
        return Err(Error::InvalidLength(length));
    }
    Ok(())
}

/// `z_l = sum c_i z_{l-i} + (delta + [e_l] + sum theta_i e_{l-i})`, zero pre-history.
fn arma_recursion(
    ar: &[f64],
    theta: &[f64],
    delta: f64,
    include_current: bool,
    eps: &[f64],
) -> Vec<f64> {
    let mut z = Vec::with_capacity(eps.len());
    for l in 0..eps.len() {
        let mut ar_sum = 0.0;
        for (i, c) in ar.iter().enumerate() {
            if let Some(prev) = l.checked_sub(i + 1) {
                ar_sum += c * z[prev];
            }
        }
        let mut ma = delta;
        if include_current {
            ma += eps[l];
        }
        for (i, th) in theta.iter().enumerate() {
            if let Some(prev) = l.checked_sub(i + 1) {
                ma += th * eps[prev];
            }
        }
        z.push(ar_sum + ma);
    }
    z
}

fn finish(mut z: Vec<f64>, burn_in: usize, stage: &'static str) -> Result<Vec<f64>> {
    if let Some(step) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::NumericalInstability {
            stage,
            step,
            detail: "non-finite value".into(),
        });
    }
    Ok(z.split_off(burn_in))
}

pub fn gen_ar(params: &ArParams, noise: &NoiseSpec, length: usize, burn_in: usize) -> Result<TimeSeries> {
    check_length(length)?;
    let eps = noise.draw(burn_in + length);
    let z = arma_recursion(params.coeffs(), &[], 0.0, true, &eps);
    Ok(TimeSeries {
        values: finish(z, burn_in, "ar")?,
        origin: Origin::Ar {
            coeffs: params.coeffs().to_vec(),
            burn_in,
        },
        noise: Some(*noise),
    })
}

pub fn gen_ma(
    params: &MaParams,
    form: MaForm,
    noise: &NoiseSpec,
    length: usize,
    burn_in: usize,
) -> Result<TimeSeries> {
    check_length(length)?;
    let eps = noise.draw(burn_in + length);
    let z = arma_recursion(&[], params.coeffs(), params.delta(), form == MaForm::Standard, &eps);
    Ok(TimeSeries {
        values: finish(z, burn_in, "ma")?,
        origin: Origin::Ma {
            coeffs: params.coeffs().to_vec(),
            delta: params.delta(),
            form,
            burn_in,
        },
        noise: Some(*noise),
    })
}

/// ARMA recursion. The MA part follows `form`, so with `MaForm::Printed`
/// no contemporaneous noise enters and zeroing the MA side does not reduce
/// to [`gen_ar`]; with `MaForm::Standard` both reductions are exact.
pub fn gen_arma(
    ar: &ArParams,
    ma: &MaParams,
    form: MaForm,
    noise: &NoiseSpec,
    length: usize,
    burn_in: usize,
) -> Result<TimeSeries> {
    check_length(length)?;
    let eps = noise.draw(burn_in + length);
    let z = arma_recursion(ar.coeffs(), ma.coeffs(), ma.delta(), form == MaForm::Standard, &eps);
    Ok(TimeSeries {
        values: finish(z, burn_in, "arma")?,
        origin: Origin::Arma {
            ar: ar.coeffs().to_vec(),
            ma: ma.coeffs().to_vec(),
            delta: ma.delta(),
            form,
            burn_in,
        },
        noise: Some(*noise),
    })
}

/// GARCH series together with its conditional variances (burn-in removed).
#[derive(Debug, Clone)]
pub struct GarchPath {
    pub series: TimeSeries,
    pub variance: Vec<f64>,
}

pub fn gen_garch(
    params: &GarchParams,
    form: GarchForm,
    noise: &NoiseSpec,
    length: usize,
    burn_in: usize,
) -> Result<TimeSeries> {
    gen_garch_path(params, form, noise, length, burn_in).map(|p| p.series)
}

pub fn gen_garch_path(
    params: &GarchParams,
    form: GarchForm,
    noise: &NoiseSpec,
    length: usize,
    burn_in: usize,
) -> Result<GarchPath> {
    check_length(length)?;
    let total = burn_in + length;
    let eps = noise.draw(total);
    let mut z: Vec<f64> = Vec::with_capacity(total);
    let mut h: Vec<f64> = Vec::with_capacity(total);
    for l in 0..total {
        let mut hl = params.alpha0;
        for (i, a) in params.alpha.iter().enumerate() {
            let zp = l.checked_sub(i + 1).map_or(0.0, |p| z[p]);
            hl += a * zp * zp;
        }
        for (j, b) in params.beta.iter().enumerate() {
            let hp = l.checked_sub(j + 1).map_or(params.alpha0, |p| h[p]);
            hl += match form {
                GarchForm::Printed => b * hp * hp,
                GarchForm::Standard => b * hp,
            };
        }
        if !hl.is_finite() || hl > GARCH_VARIANCE_LIMIT {
            return Err(Error::NumericalInstability {
                stage: "garch",
                step: l,
                detail: format!("conditional variance {hl} exceeds {GARCH_VARIANCE_LIMIT}"),
            });
        }
        h.push(hl);
        z.push(hl.sqrt() * eps[l]);
    }
    let values = finish(z, burn_in, "garch")?;
    Ok(GarchPath {
        series: TimeSeries {
            values,
            origin: Origin::Garch {
                alpha0: params.alpha0,
                alpha: params.alpha.clone(),
                beta: params.beta.clone(),
                form,
                burn_in,
            },
            noise: Some(*noise),
        },
        variance: h.split_off(burn_in),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{i}"),
            ColumnSelector::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub column: ColumnSelector,
    pub delimiter: char,
    pub has_header: bool,
    /// Half-open range of data rows (0-based, header excluded).
    pub rows: Option<(usize, usize)>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            column: ColumnSelector::Index(0),
            delimiter: ',',
            has_header: false,
            rows: None,
        }
    }
}

/// Reads one numeric column. Parse errors report the 1-based line number in
/// the file.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<TimeSeries> {
    let path = path.as_ref();
    if !opts.delimiter.is_ascii() {
        return Err(Error::InvalidParameter(format!(
            "delimiter {:?} is not ASCII",
            opts.delimiter
        )));
    }
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter as u8)
        .has_headers(opts.has_header)
        .flexible(true)
        .from_reader(file);

    let index = match &opts.column {
        ColumnSelector::Index(i) => *i,
        ColumnSelector::Name(name) => {
            if !opts.has_header {
                return Err(Error::MissingColumn(format!("{name} (file has no header)")));
            }
            reader
                .headers()?
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::MissingColumn(name.clone()))?
        }
    };

    let (start, end) = opts.rows.unwrap_or((0, usize::MAX));
    let mut values = Vec::new();
    for (k, record) in reader.records().enumerate() {
        if k >= end {
            break;
        }
        let record = record?;
        if k < start {
            continue;
        }
        let line = record.position().map_or(k as u64 + 1, |p| p.line());
        let cell = record
            .get(index)
            .ok_or_else(|| Error::MissingColumn(format!("{} at row {line}", opts.column)))?;
        let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
            row: line,
            value: cell.to_string(),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                row: line,
                value: cell.to_string(),
            });
        }
        values.push(v);
    }
    if values.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} has {} usable rows, need at least 2",
            path.display(),
            values.len()
        )));
    }
    let rows = values.len();
    Ok(TimeSeries {
        values,
        origin: Origin::Csv {
            path: path.to_path_buf(),
            column: opts.column.to_string(),
            rows,
        },
        noise: None,
    })
}
