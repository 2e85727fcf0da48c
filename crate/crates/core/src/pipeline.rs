//! Z-score standardization, chronological splitting and sliding-window
//! sample construction.

use std::io::Write;
use std::ops::Range;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which segment supplies the standardization statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StandardizeOn {
    #[default]
    Train,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedSeries {
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl StandardizedSeries {
    pub fn destandardize(&self, v: f64) -> f64 {
        v * self.std + self.mean
    }

    pub fn original(&self) -> Vec<f64> {
        self.values.iter().map(|v| self.destandardize(*v)).collect()
    }
}

/// Mean and population standard deviation (divisor `n`).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Standardizes the whole series with statistics from `fit`.
pub fn standardize(values: &[f64], fit: Range<usize>) -> Result<StandardizedSeries> {
    if fit.start >= fit.end || fit.end > values.len() {
        return Err(Error::InsufficientData(format!(
            "fit segment {fit:?} is empty or exceeds series length {}",
            values.len()
        )));
    }
    let (mean, std) = mean_std(&values[fit]);
    if !(std > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    Ok(StandardizedSeries {
        values: values.iter().map(|v| (v - mean) / std).collect(),
        mean,
        std,
    })
}

/// Chronological train/test split: the first `floor(ratio * len)` points
/// train, the remainder test. Both parts must hold at least one window.
pub fn split(
    len: usize,
    ratio: f64,
    window: usize,
    horizon: usize,
) -> Result<(Range<usize>, Range<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let cut = (ratio * len as f64).floor() as usize;
    let need = window + horizon;
    if cut < need || len - cut < need {
        return Err(Error::InsufficientData(format!(
            "split of {len} points at {ratio} gives segments of {cut} and {}, each needs {need}",
            len - cut
        )));
    }
    Ok((0..cut, cut..len))
}

/// Sliding-window samples: column `i` of `x` is `T` consecutive values and
/// column `i` of `y` the `H` values that follow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub window: usize,
    pub horizon: usize,
    /// Absolute series index of each sample's first input value.
    pub offsets: Vec<usize>,
}

impl SampleSet {
    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    /// Absolute series index of each sample's first target value.
    pub fn target_indices(&self) -> Vec<usize> {
        self.offsets.iter().map(|o| o + self.window).collect()
    }

    pub fn select(&self, idx: &[usize]) -> SampleSet {
        SampleSet {
            x: self.x.select(Axis(1), idx),
            y: self.y.select(Axis(1), idx),
            window: self.window,
            horizon: self.horizon,
            offsets: idx.iter().map(|&i| self.offsets[i]).collect(),
        }
    }

    /// Debug export: `n` rows with header `x1..xT,y1..yH`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = (1..=self.window)
            .map(|t| format!("x{t}"))
            .chain((1..=self.horizon).map(|h| format!("y{h}")))
            .collect();
        w.write_record(&header)?;
        for i in 0..self.n() {
            let row: Vec<String> = self
                .x
                .column(i)
                .iter()
                .chain(self.y.column(i).iter())
                .map(|v| v.to_string())
                .collect();
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

pub fn make_samples(values: &[f64], window: usize, horizon: usize) -> Result<SampleSet> {
    make_samples_at(values, 0, window, horizon)
}

/// Windows over `values`, recording offsets relative to `start`, the
/// absolute index of `values[0]` in the full series.
pub fn make_samples_at(
    values: &[f64],
    start: usize,
    window: usize,
    horizon: usize,
) -> Result<SampleSet> {
    if window == 0 || horizon == 0 {
        return Err(Error::InvalidParameter(
            "window and horizon must both be >= 1".into(),
        ));
    }
    let len = values.len();
    if len < window + horizon {
        return Err(Error::InsufficientData(format!(
            "segment of {len} points is shorter than window {window} + horizon {horizon}"
        )));
    }
    let n = len - window - horizon + 1;
    let x = Array2::from_shape_fn((window, n), |(t, i)| values[i + t]);
    let y = Array2::from_shape_fn((horizon, n), |(h, i)| values[i + window + h]);
    Ok(SampleSet {
        x,
        y,
        window,
        horizon,
        offsets: (0..n).map(|i| start + i).collect(),
    })
}
