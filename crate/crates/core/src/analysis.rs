//! Layer profiles, cross-model grids, information loss, forecast metrics and
//! multi-run aggregation.

use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estat::{self, CenteredDistanceMatrix, SampleMatrix};
use crate::pipeline::SampleSet;
use crate::rng::{self, Stream};
use crate::rnn::{ActivationTensor, DatasetTag};

/// Targets with `|y| < MAPE_THRESHOLD` are left out of MAPE.
pub const MAPE_THRESHOLD: f64 = 1e-8;

/// One layer of a profile paired with the ACF at its mirrored lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcfPair {
    pub layer: usize,
    pub lag: usize,
    pub acf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcorProfile {
    /// `values[t - 1] = dcor(A_t, Y)`.
    pub values: Vec<f64>,
    pub tag: DatasetTag,
    pub epoch: usize,
    pub acf: Vec<AcfPair>,
}

impl DcorProfile {
    pub fn window(&self) -> usize {
        self.values.len()
    }

    pub fn final_r(&self) -> f64 {
        *self.values.last().expect("profile is never empty")
    }

    /// Largest value and its 1-based layer (first one on ties).
    pub fn max(&self) -> (usize, f64) {
        let mut best = (1, self.values[0]);
        for (i, v) in self.values.iter().enumerate().skip(1) {
            if *v > best.1 {
                best = (i + 1, *v);
            }
        }
        best
    }

    pub fn with_acf(mut self, acf: &[f64]) -> Result<Self> {
        self.acf = acf_alignment(self.window(), acf)?;
        Ok(self)
    }

    /// CSV `layer,dcor,acf_lag,acf`; the ACF columns are empty when no ACF
    /// is attached. `precision` fixes the number of decimals.
    pub fn write_csv<W: Write>(&self, out: W, precision: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["layer", "dcor", "acf_lag", "acf"])?;
        for (i, v) in self.values.iter().enumerate() {
            let (lag, acf) = match self.acf.get(i) {
                Some(p) => (p.lag.to_string(), fixed(p.acf, precision)),
                None => (String::new(), String::new()),
            };
            w.write_record([(i + 1).to_string(), fixed(*v, precision), lag, acf])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

/// Fixed-precision decimal formatting shared by CSV and SVG output.
pub fn fixed(v: f64, precision: usize) -> String {
    let s = format!("{v:.precision$}");
    // "-0.000" and "0.000" must compare equal byte-wise
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn centered_layers(acts: &ActivationTensor) -> Result<Vec<CenteredDistanceMatrix>> {
    acts.layers
        .par_iter()
        .map(|a| Ok(CenteredDistanceMatrix::from_samples(&SampleMatrix::new(a.clone())?)))
        .collect()
}

/// `r_t = dcor(A_t, Y)` for every layer.
pub fn layer_profile(acts: &ActivationTensor, y: &SampleMatrix) -> Result<DcorProfile> {
    if acts.n() != y.n() {
        return Err(Error::SampleCountMismatch {
            left: acts.n(),
            right: y.n(),
        });
    }
    if acts.layers.is_empty() {
        return Err(Error::InsufficientData("activation tensor has no layers".into()));
    }
    let c = CenteredDistanceMatrix::from_samples(y);
    let c_self = c.self_dcov2();
    let values = acts
        .layers
        .par_iter()
        .map(|a| {
            let b = CenteredDistanceMatrix::from_samples(&SampleMatrix::new(a.clone())?);
            let r2 = estat::dcor_squared_centered(&b, b.self_dcov2(), &c, c_self)?;
            Ok(r2.sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DcorProfile {
        values,
        tag: acts.tag,
        epoch: acts.epoch,
        acf: Vec::new(),
    })
}

/// Pairs layer `t` with lag `T + 1 - t`. `acf[h]` is the ACF at lag `h`, so
/// it must reach lag `T`.
pub fn acf_alignment(window: usize, acf: &[f64]) -> Result<Vec<AcfPair>> {
    if acf.len() < window + 1 {
        return Err(Error::InsufficientData(format!(
            "ACF has lags up to {} but window {window} needs lag {window}",
            acf.len().saturating_sub(1)
        )));
    }
    Ok((1..=window)
        .map(|layer| {
            let lag = window + 1 - layer;
            AcfPair {
                layer,
                lag,
                acf: acf[lag],
            }
        })
        .collect())
}

/// Raw information loss `100 (max r - r_T) / max r`.
pub fn info_loss(values: &[f64]) -> Result<f64> {
    let last = *values.last().ok_or(Error::DegenerateProfile)?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::DegenerateProfile);
    }
    Ok(100.0 * (max - last) / max)
}

/// Rounds to `decimals` places; 0 gives the nearest integer.
pub fn round_to(v: f64, decimals: u32) -> f64 {
    let k = 10f64.powi(decimals as i32);
    (v * k).round() / k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    /// `grid[[v - 1, m - 1]] = dcor(A_v of model a, A_m of model b)`.
    pub grid: Array2<f64>,
    pub model_a: String,
    pub model_b: String,
}

impl HeatmapGrid {
    /// Matrix CSV: header `layer,b1..bT2`, one row per layer of model a.
    pub fn write_csv<W: Write>(&self, out: W, precision: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["layer".to_string()];
        header.extend((1..=self.grid.ncols()).map(|m| format!("b{m}")));
        w.write_record(&header)?;
        for (v, row) in self.grid.rows().into_iter().enumerate() {
            let mut rec = vec![format!("a{}", v + 1)];
            rec.extend(row.iter().map(|g| fixed(*g, precision)));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    /// For each column `m`, the 1-based row with the largest entry.
    pub fn column_argmax(&self) -> Vec<usize> {
        self.grid
            .columns()
            .into_iter()
            .map(|col| {
                let mut best = 0;
                for (i, v) in col.iter().enumerate() {
                    if *v > col[best] {
                        best = i;
                    }
                }
                best + 1
            })
            .collect()
    }
}

/// `g[v, m] = dcor(A_v, B_m)`. Both tensors must cover the same forecast
/// targets in the same order.
pub fn cross_model_grid(
    a: &ActivationTensor,
    b: &ActivationTensor,
    model_a: &str,
    model_b: &str,
) -> Result<HeatmapGrid> {
    if a.n() != b.n() {
        return Err(Error::Alignment(format!(
            "sample counts differ ({} vs {}); align the windows first",
            a.n(),
            b.n()
        )));
    }
    if a.targets != b.targets {
        let first = a.targets.iter().zip(&b.targets).position(|(x, y)| x != y).unwrap_or(0);
        return Err(Error::Alignment(format!(
            "column {first} forecasts index {} in one model and {} in the other",
            a.targets[first], b.targets[first]
        )));
    }
    let ca = centered_layers(a)?;
    let same = std::ptr::eq(a, b) || a.layers == b.layers;
    let cb_owned;
    let cb = if same {
        &ca
    } else {
        cb_owned = centered_layers(b)?;
        &cb_owned
    };
    let selfs_a: Vec<f64> = ca.iter().map(|c| c.self_dcov2()).collect();
    let selfs_b: Vec<f64> = cb.iter().map(|c| c.self_dcov2()).collect();
    let (t1, t2) = (ca.len(), cb.len());
    let cells: Vec<(usize, usize)> = (0..t1).flat_map(|v| (0..t2).map(move |m| (v, m))).collect();
    let values = cells
        .par_iter()
        .map(|&(v, m)| {
            if same && m < v {
                return Ok(f64::NAN);
            }
            estat::dcor_squared_centered(&ca[v], selfs_a[v], &cb[m], selfs_b[m]).map(f64::sqrt)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut grid = Array2::from_shape_vec((t1, t2), values).expect("grid shape");
    if same {
        for v in 0..t1 {
            for m in 0..v {
                grid[[v, m]] = grid[[m, v]];
            }
        }
    }
    Ok(HeatmapGrid {
        grid,
        model_a: model_a.to_string(),
        model_b: model_b.to_string(),
    })
}

/// Column indices into each set that share the same absolute forecast
/// targets, in increasing target order.
pub fn align_windows(s1: &SampleSet, s2: &SampleSet) -> Result<(Vec<usize>, Vec<usize>)> {
    if s1.horizon != s2.horizon {
        return Err(Error::Alignment(format!(
            "horizons differ ({} vs {})",
            s1.horizon, s2.horizon
        )));
    }
    let t1 = s1.target_indices();
    let t2 = s2.target_indices();
    let (mut i, mut j) = (0, 0);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    while i < t1.len() && j < t2.len() {
        match t1[i].cmp(&t2[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                a.push(i);
                b.push(j);
                i += 1;
                j += 1;
            }
        }
    }
    if a.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub mape: f64,
    /// Targets excluded from MAPE by the near-zero guard.
    pub mape_skipped: usize,
}

pub fn eval_metrics(pred: &[f64], target: &[f64]) -> Result<Metrics> {
    if pred.len() != target.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} targets",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InsufficientData("no predictions".into()));
    }
    let n = pred.len();
    let mse = pred.iter().zip(target).map(|(p, y)| (p - y) * (p - y)).sum::<f64>() / n as f64;
    let (mut sum, mut used) = (0.0, 0usize);
    for (p, y) in pred.iter().zip(target) {
        if y.abs() >= MAPE_THRESHOLD {
            sum += (p - y).abs() / y.abs();
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::DegenerateTargets(n));
    }
    Ok(Metrics {
        mse,
        mape: sum / used as f64,
        mape_skipped: n - used,
    })
}

pub fn destandardize_predictions(pred: &[f64], mean: f64, std: f64) -> Result<Vec<f64>> {
    if !(std > 0.0) {
        return Err(Error::InvalidParameter(format!("std must be > 0, got {std}")));
    }
    Ok(pred.iter().map(|p| p * std + mean).collect())
}

/// Seeded sorted subset of `max` column indices out of `n`, or `None` when
/// `n <= max`.
pub fn subsample_columns(n: usize, max: usize, seed: u64) -> Option<Vec<usize>> {
    if n <= max {
        return None;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut r = rng::stream(seed, Stream::Subsample);
    // partial Fisher-Yates: the first `max` slots are a uniform sample
    for i in 0..max {
        let j = i + rng::below(&mut r, n - i);
        idx.swap(i, j);
    }
    idx.truncate(max);
    idx.sort_unstable();
    Some(idx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mse: f64,
    pub mape: f64,
    pub mape_skipped: usize,
    pub profile: DcorProfile,
    pub max_r: f64,
    pub max_layer: usize,
    pub final_r: f64,
    pub info_loss_pct: f64,
    pub info_loss_rounded: f64,
    pub seed: u64,
    /// Number of columns used for dcor when subsampling was applied.
    pub subsampled: Option<usize>,
}

impl RunSummary {
    pub fn new(
        metrics: Metrics,
        profile: DcorProfile,
        seed: u64,
        subsampled: Option<usize>,
        loss_decimals: u32,
    ) -> Result<Self> {
        let (max_layer, max_r) = profile.max();
        let final_r = profile.final_r();
        let info_loss_pct = info_loss(&profile.values)?;
        Ok(Self {
            mse: metrics.mse,
            mape: metrics.mape,
            mape_skipped: metrics.mape_skipped,
            max_r,
            max_layer,
            final_r,
            info_loss_pct,
            info_loss_rounded: round_to(info_loss_pct, loss_decimals),
            profile,
            seed,
            subsampled,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (divisor `n - 1`, 0 for one value).
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if values.iter().all(|v| *v == values[0]) {
            return Self { mean: values[0], std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { mean, std }
    }

    pub fn format(&self, precision: usize) -> String {
        format!("{} ± {}", fixed(self.mean, precision), fixed(self.std, precision))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub runs: usize,
    pub mse: MeanStd,
    pub mape: MeanStd,
    pub max_r: MeanStd,
    pub final_r: MeanStd,
    pub info_loss_pct: MeanStd,
    /// Elementwise mean of the run profiles.
    pub mean_profile: Vec<f64>,
    /// ACF pairing carried over from the first run.
    pub acf: Vec<AcfPair>,
}

impl AggregateSummary {
    /// Information loss of the mean profile, as opposed to the mean of the
    /// per-run losses.
    pub fn mean_profile_info_loss(&self) -> Result<f64> {
        info_loss(&self.mean_profile)
    }
}

pub fn aggregate(runs: &[RunSummary]) -> Result<AggregateSummary> {
    let first = runs
        .first()
        .ok_or_else(|| Error::InsufficientData("no runs to aggregate".into()))?;
    let t = first.profile.window();
    if runs.iter().any(|r| r.profile.window() != t) {
        return Err(Error::ShapeMismatch("runs have profiles of different lengths".into()));
    }
    let col = |f: fn(&RunSummary) -> f64| MeanStd::of(&runs.iter().map(f).collect::<Vec<_>>());
    let mean_profile = (0..t)
        .map(|i| MeanStd::of(&runs.iter().map(|r| r.profile.values[i]).collect::<Vec<_>>()).mean)
        .collect();
    Ok(AggregateSummary {
        runs: runs.len(),
        mse: col(|r| r.mse),
        mape: col(|r| r.mape),
        max_r: col(|r| r.max_r),
        final_r: col(|r| r.final_r),
        info_loss_pct: col(|r| r.info_loss_pct),
        mean_profile,
        acf: first.profile.acf.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{make_samples, make_samples_at, standardize};
    use crate::rng::Gaussian;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;

    fn tensor(layers: Vec<Array2<f64>>, targets: Vec<usize>) -> ActivationTensor {
        ActivationTensor {
            layers,
            epoch: 35,
            tag: DatasetTag::Test,
            targets,
        }
    }

    fn profile(values: Vec<f64>) -> DcorProfile {
        DcorProfile {
            values,
            tag: DatasetTag::Test,
            epoch: 35,
            acf: Vec::new(),
        }
    }

    #[test]
    fn replicated_target_gives_unit_profile() {
        let y: Vec<f64> = (0..30).map(|i| ((i * 7) % 11) as f64 * 0.3).collect();
        let rows = Array2::from_shape_fn((4, 30), |(_, i)| y[i]);
        let acts = tensor(vec![rows.clone(); 5], (0..30).collect());
        let p = layer_profile(&acts, &SampleMatrix::from_values(&y).unwrap()).unwrap();
        assert_eq!(p.window(), 5);
        for r in p.values {
            assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn independent_noise_profile_is_small() {
        for seed in 0..20 {
            let mut g = Gaussian::new(rng::stream(seed, Stream::Noise));
            let n = 800;
            let y: Vec<f64> = (0..n).map(|_| g.next_standard()).collect();
            let layers = (0..3)
                .map(|_| Array2::from_shape_simple_fn((4, n), || g.next_standard()))
                .collect();
            let p = layer_profile(&tensor(layers, (0..n).collect()), &SampleMatrix::from_values(&y).unwrap())
                .unwrap();
            assert!(p.values.iter().all(|r| *r < 0.25), "{:?}", p.values);
        }
    }

    #[test]
    fn profile_rejects_count_mismatch() {
        let acts = tensor(vec![Array2::zeros((2, 5))], (0..5).collect());
        let y = SampleMatrix::from_values(&[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(layer_profile(&acts, &y), Err(Error::SampleCountMismatch { .. })));
    }

    #[test]
    fn alignment_pairs() {
        let acf: Vec<f64> = (0..=20).map(|h| h as f64 / 100.0).collect();
        let pairs = acf_alignment(20, &acf).unwrap();
        assert_eq!(pairs[15].layer, 16);
        assert_eq!(pairs[15].lag, 5);
        assert_eq!(pairs[19].lag, 1);
        assert_eq!(pairs[19].acf, 0.01);
        assert_eq!(acf_alignment(5, &acf[..6]).unwrap()[0].lag, 5);
        assert!(acf_alignment(20, &acf[..20]).is_err());
    }

    #[test]
    fn info_loss_cases() {
        assert_eq!(info_loss(&[0.1, 0.5, 0.9, 0.927]).unwrap(), 0.0);
        let mut v = vec![0.2; 20];
        v[3] = 0.964;
        v[19] = 0.356;
        assert_eq!(round_to(info_loss(&v).unwrap(), 0), 63.0);
        assert_eq!(info_loss(&[0.4; 7]).unwrap(), 0.0);
        assert!(matches!(info_loss(&[0.0; 4]), Err(Error::DegenerateProfile)));
    }

    #[test]
    fn metrics_cases() {
        let m = eval_metrics(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((m.mse, m.mape), (0.0, 0.0));
        let m = eval_metrics(&[2.0, 4.0], &[1.0, 2.0]).unwrap();
        assert_eq!((m.mse, m.mape), (2.5, 1.0));
        let m = eval_metrics(&[1.0, 3.0], &[0.0, 2.0]).unwrap();
        assert_eq!(m.mse, 1.0);
        assert_eq!(m.mape, 0.5);
        assert_eq!(m.mape_skipped, 1);
        assert!(matches!(eval_metrics(&[1.0], &[0.0]), Err(Error::DegenerateTargets(1))));
    }

    fn run(mse: f64, values: Vec<f64>) -> RunSummary {
        let metrics = Metrics {
            mse,
            mape: 0.5,
            mape_skipped: 0,
        };
        RunSummary::new(metrics, profile(values), 0, None, 0).unwrap()
    }

    #[test]
    fn aggregate_cases() {
        let one = run(0.02, vec![0.5, 0.9]);
        let a = aggregate(std::slice::from_ref(&one)).unwrap();
        assert_eq!(a.mse, MeanStd { mean: 0.02, std: 0.0 });
        assert_eq!(a.mean_profile, vec![0.5, 0.9]);

        let a = aggregate(&[run(0.02, vec![0.5, 0.9]), run(0.03, vec![0.7, 0.3])]).unwrap();
        assert_abs_diff_eq!(a.mse.mean, 0.025, epsilon = 1e-15);
        assert_abs_diff_eq!(a.mse.std, 0.00707, epsilon = 1e-5);
        assert_abs_diff_eq!(a.mean_profile[0], 0.6, epsilon = 1e-15);

        let copies = vec![one.clone(); 50];
        let a = aggregate(&copies).unwrap();
        assert_eq!(a.mse.std, 0.0);
        assert_eq!(a.info_loss_pct.std, 0.0);
        assert_eq!(a.final_r.mean, one.final_r);
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn destandardize_cases() {
        assert_eq!(destandardize_predictions(&[0.3, -1.0], 0.0, 1.0).unwrap(), vec![0.3, -1.0]);
        assert_eq!(destandardize_predictions(&[0.0], 4.5, 2.0).unwrap(), vec![4.5]);
        let values = [3.0, 1.5, -2.0, 8.25];
        let s = standardize(&values, 0..4).unwrap();
        let back = destandardize_predictions(&s.values, s.mean, s.std).unwrap();
        for (a, b) in values.iter().zip(back) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(destandardize_predictions(&[1.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn window_alignment() {
        let seg: Vec<f64> = (0..800).map(|v| v as f64).collect();
        let s6 = make_samples(&seg, 6, 1).unwrap();
        let s10 = make_samples(&seg, 10, 1).unwrap();
        let (a, b) = align_windows(&s6, &s10).unwrap();
        assert_eq!(a.len(), 790);
        assert_eq!(b.len(), 790);
        assert_eq!(s6.select(&a).y, s10.select(&b).y);

        let (a, b) = align_windows(&s6, &s6).unwrap();
        assert_eq!(a, (0..s6.n()).collect::<Vec<_>>());
        assert_eq!(a, b);

        let other = make_samples_at(&seg[..100], 5000, 6, 1).unwrap();
        assert!(matches!(align_windows(&s6, &other), Err(Error::EmptyIntersection)));
    }

    #[test]
    fn self_grid_symmetric_unit_diagonal() {
        let mut g = Gaussian::new(rng::stream(8, Stream::Noise));
        let layers: Vec<Array2<f64>> = (0..6)
            .map(|_| Array2::from_shape_simple_fn((5, 60), || g.next_standard()))
            .collect();
        let acts = tensor(layers, (0..60).collect());
        let grid = cross_model_grid(&acts, &acts, "a", "a").unwrap();
        for v in 0..6 {
            assert!((grid.grid[[v, v]] - 1.0).abs() < 1e-9);
            for m in 0..6 {
                assert!((grid.grid[[v, m]] - grid.grid[[m, v]]).abs() < 1e-9);
                assert!((0.0..=1.0).contains(&grid.grid[[v, m]]));
            }
        }
        let clone = acts.clone();
        let grid2 = cross_model_grid(&acts, &clone, "a", "b").unwrap();
        assert_eq!(grid.grid, grid2.grid);
    }

    #[test]
    fn grid_rejects_misaligned_targets() {
        let a = tensor(vec![Array2::from_elem((1, 3), 1.0)], vec![1, 2, 3]);
        let b = tensor(vec![Array2::from_elem((1, 3), 1.0)], vec![2, 3, 4]);
        assert!(matches!(cross_model_grid(&a, &b, "a", "b"), Err(Error::Alignment(_))));
        let c = tensor(vec![Array2::from_elem((1, 2), 1.0)], vec![1, 2]);
        assert!(matches!(cross_model_grid(&a, &c, "a", "c"), Err(Error::Alignment(_))));
    }

    #[test]
    fn subsample_is_seeded_and_sorted() {
        assert!(subsample_columns(100, 2000, 1).is_none());
        let a = subsample_columns(5000, 2000, 3).unwrap();
        assert_eq!(a, subsample_columns(5000, 2000, 3).unwrap());
        assert_eq!(a.len(), 2000);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_ne!(a, subsample_columns(5000, 2000, 4).unwrap());
    }

    #[test]
    fn fixed_format_normalizes_negative_zero() {
        assert_eq!(fixed(-0.00001, 3), "0.000");
        assert_eq!(fixed(0.12345, 3), "0.123");
        assert_eq!(fixed(-1.5, 1), "-1.5");
    }

    #[test]
    fn profile_csv() {
        let p = profile(vec![0.25, 0.5]).with_acf(&[1.0, 0.8, 0.64]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf, 3).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "layer,dcor,acf_lag,acf\n1,0.250,2,0.640\n2,0.500,1,0.800\n"
        );
    }

    proptest::proptest! {
        #[test]
        fn info_loss_is_a_percentage(values in proptest::collection::vec(0.0f64..=1.0, 1..30)) {
            proptest::prop_assume!(values.iter().any(|v| *v > 0.0));
            let l = info_loss(&values).unwrap();
            proptest::prop_assert!((0.0..=100.0).contains(&l));
        }
    }
}
