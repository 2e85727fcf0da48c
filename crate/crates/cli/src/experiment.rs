//! Experiment orchestration: single runs, multi-seed simulations, paired
//! heatmaps and parameter sweeps, plus writing their artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rnndcor::analysis::{
    self, fixed, AggregateSummary, HeatmapGrid, MeanStd, Metrics, RunSummary,
};
use rnndcor::estat::{self, SampleMatrix};
use rnndcor::pipeline::{self, SampleSet, StandardizeOn, StandardizedSeries};
use rnndcor::rnn::{self, Activation, DatasetTag, RnnConfig, RnnModel};
use rnndcor::tsgen::TimeSeries;

use crate::config::ExperimentConfig;
use crate::svg;

/// Attaches the pipeline stage to a library error.
pub fn stage<T>(name: &'static str, r: rnndcor::Result<T>) -> Result<T> {
    r.map_err(|e| anyhow::Error::new(e).context(format!("{name} stage failed")))
}

/// A generated (or loaded) series cut into standardized train and test
/// windows.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub series: TimeSeries,
    pub standardized: StandardizedSeries,
    pub train: SampleSet,
    pub test: SampleSet,
}

impl Prepared {
    pub fn samples(&self, tag: DatasetTag) -> &SampleSet {
        match tag {
            DatasetTag::Train => &self.train,
            DatasetTag::Test => &self.test,
        }
    }
}

pub fn prepare(config: &ExperimentConfig, seed: u64, window: usize, horizon: usize) -> Result<Prepared> {
    let noise = config.noise_spec(seed)?;
    let series = stage("generate", config.process.build(&noise, config.length, config.burn_in))?;
    let len = series.len();
    let (train_r, test_r) = stage("split", pipeline::split(len, config.split_ratio, window, horizon))?;
    let fit = match config.standardize_on {
        StandardizeOn::Train => train_r.clone(),
        StandardizeOn::Full => 0..len,
    };
    let standardized = stage("standardize", pipeline::standardize(&series.values, fit))?;
    let z = &standardized.values;
    let train = stage(
        "window",
        pipeline::make_samples_at(&z[train_r.clone()], train_r.start, window, horizon),
    )?;
    let test = stage(
        "window",
        pipeline::make_samples_at(&z[test_r.clone()], test_r.start, window, horizon),
    )?;
    Ok(Prepared {
        series,
        standardized,
        train,
        test,
    })
}

/// One forecast point on the original scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastPoint {
    pub index: usize,
    pub actual: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub label: String,
    pub config: ExperimentConfig,
    pub summary: RunSummary,
    pub epoch_losses: Vec<f64>,
    pub model: RnnModel,
    pub forecast: Vec<ForecastPoint>,
    pub wall_clock_secs: f64,
}

/// Model predictions and metrics for one sample set (standardized scale).
fn evaluate(model: &RnnModel, samples: &SampleSet) -> Result<(ndarray::Array2<f64>, Metrics)> {
    let pred = stage("predict", model.predict(samples.x.view()))?;
    let p: Vec<f64> = pred.iter().copied().collect();
    let y: Vec<f64> = samples.y.iter().copied().collect();
    let metrics = stage("metrics", analysis::eval_metrics(&p, &y))?;
    Ok((pred, metrics))
}

/// Trains on the training windows and analyses the evaluation windows.
pub fn run_once(config: &ExperimentConfig, run_index: usize) -> Result<RunOutcome> {
    config.validate()?;
    let seed = config.run_seed(run_index);
    let mut resolved = config.clone();
    resolved.rnn.seed = seed;
    resolved.base_seed = seed;
    resolved.runs = 1;
    let rc = &resolved.rnn;
    let data = prepare(&resolved, seed, rc.window, rc.horizon)?;
    let report = stage("train", rnn::train(rc, &data.train))?;
    let model = report.model;

    let eval = data.samples(resolved.evaluate_on);
    let (pred, metrics) = evaluate(&model, eval)?;
    let acts = stage(
        "capture",
        rnn::capture_activations(&model, eval, rc.epochs, resolved.evaluate_on),
    )?;

    let sub = resolved
        .subsample
        .and_then(|max| analysis::subsample_columns(eval.n(), max, seed));
    let (acts, y) = match &sub {
        Some(idx) => (acts.select(idx), eval.y.select(ndarray::Axis(1), idx)),
        None => (acts, eval.y.clone()),
    };
    let y = stage("analysis", SampleMatrix::new(y))?;
    let acf = stage("analysis", estat::acf(&data.series.values, rc.window))?;
    let profile = stage("analysis", analysis::layer_profile(&acts, &y))?;
    let profile = stage("analysis", profile.with_acf(&acf))?;
    let summary = stage(
        "analysis",
        RunSummary::new(metrics, profile, seed, sub.map(|s| s.len()), resolved.loss_decimals),
    )?;

    let s = &data.standardized;
    let predicted = stage(
        "analysis",
        analysis::destandardize_predictions(&pred.row(0).to_vec(), s.mean, s.std),
    )?;
    let forecast = eval
        .target_indices()
        .into_iter()
        .zip(predicted)
        .map(|(index, predicted)| ForecastPoint {
            index,
            actual: data.series.values[index],
            predicted,
        })
        .collect();

    Ok(RunOutcome {
        label: resolved.process.label(),
        config: resolved,
        summary,
        epoch_losses: report.epoch_losses,
        model,
        forecast,
        wall_clock_secs: report.wall_clock_secs,
    })
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .context("cannot start worker pool")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunFailure {
    pub run: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub label: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunOutcome>,
    pub failures: Vec<RunFailure>,
    pub aggregate: AggregateSummary,
}

/// Runs seeds `base_seed .. base_seed + runs` and aggregates them. Fails
/// when fewer than 80% of the runs succeed.
pub fn simulate(config: &ExperimentConfig) -> Result<Simulation> {
    config.validate()?;
    let results: Vec<Result<RunOutcome>> =
        pool(config.workers)?.install(|| (0..config.runs).into_par_iter().map(|i| run_once(config, i)).collect());
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => runs.push(o),
            Err(e) => failures.push(RunFailure {
                run: i,
                seed: config.run_seed(i),
                error: format!("{e:#}"),
            }),
        }
    }
    if runs.len() * 5 < config.runs * 4 {
        let first = failures.first().map(|f| f.error.clone()).unwrap_or_default();
        bail!(
            "only {} of {} runs succeeded (need 80%); first failure: {first}",
            runs.len(),
            config.runs
        );
    }
    let summaries: Vec<RunSummary> = runs.iter().map(|r| r.summary.clone()).collect();
    let aggregate = stage("aggregate", analysis::aggregate(&summaries))?;
    Ok(Simulation {
        label: config.process.label(),
        config: config.clone(),
        runs,
        failures,
        aggregate,
    })
}

#[derive(Debug, Clone)]
pub struct HeatmapOutcome {
    pub grid: HeatmapGrid,
    pub metrics: [Metrics; 2],
    pub configs: [ExperimentConfig; 2],
    pub samples: usize,
}

/// Trains one model per config on the same series and compares their
/// layers on the evaluation windows both can forecast.
pub fn heatmap(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<HeatmapOutcome> {
    a.validate()?;
    b.validate()?;
    let same_data = a.process == b.process
        && a.length == b.length
        && a.burn_in == b.burn_in
        && a.noise == b.noise
        && a.split_ratio == b.split_ratio
        && a.standardize_on == b.standardize_on
        && a.evaluate_on == b.evaluate_on;
    if !same_data {
        return Err(anyhow::Error::new(rnndcor::Error::Alignment(
            "the two configs describe different series; process, length, burn_in, noise, split_ratio, standardize_on and evaluate_on must match".into(),
        )));
    }
    let seed = a.base_seed;
    let models: Vec<(RnnConfig, Prepared, RnnModel)> = pool(a.workers)?.install(|| {
        [a, b]
            .par_iter()
            .map(|c| {
                let mut rc = c.rnn.clone();
                rc.seed = c.base_seed;
                let data = prepare(a, seed, rc.window, rc.horizon)?;
                let report = stage("train", rnn::train(&rc, &data.train))?;
                Ok((rc, data, report.model))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let tag = a.evaluate_on;
    let (ia, ib) = stage(
        "align",
        analysis::align_windows(models[0].1.samples(tag), models[1].1.samples(tag)),
    )?;
    let mut tensors = Vec::new();
    let mut metrics = Vec::new();
    for ((rc, data, model), idx) in models.iter().zip([&ia, &ib]) {
        let eval = data.samples(tag).select(idx);
        metrics.push(evaluate(model, &eval)?.1);
        tensors.push(stage("capture", rnn::capture_activations(model, &eval, rc.epochs, tag))?);
    }
    if let Some(idx) = a
        .subsample
        .and_then(|max| analysis::subsample_columns(ia.len(), max, seed))
    {
        tensors = tensors.iter().map(|t| t.select(&idx)).collect();
    }
    let name = |c: &ExperimentConfig| {
        format!("T={} b={} {:?} seed {}", c.rnn.window, c.rnn.hidden, c.rnn.activation, c.base_seed)
    };
    let grid = if a.rnn == b.rnn && a.base_seed == b.base_seed {
        stage("grid", analysis::cross_model_grid(&tensors[0], &tensors[0], &name(a), &name(b)))?
    } else {
        stage("grid", analysis::cross_model_grid(&tensors[0], &tensors[1], &name(a), &name(b)))?
    };
    Ok(HeatmapOutcome {
        grid,
        metrics: [metrics[0], metrics[1]],
        configs: [a.clone(), b.clone()],
        samples: tensors[0].n(),
    })
}

/// Values to sweep; an empty axis keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub hidden: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub dropout: Vec<f64>,
    pub window: Vec<usize>,
    pub activation: Vec<Activation>,
}

impl SweepAxes {
    /// Parses `name=v1,v2` (names: hidden, lr, dropout, window, activation).
    pub fn push_spec(&mut self, spec: &str) -> Result<()> {
        let (name, values) = spec
            .split_once('=')
            .with_context(|| format!("axis {spec:?} should look like hidden=64,128"))?;
        let items: Vec<&str> = values.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        let num = |s: &&str| s.parse::<f64>().with_context(|| format!("bad number {s:?} in axis {name}"));
        let int = |s: &&str| s.parse::<usize>().with_context(|| format!("bad integer {s:?} in axis {name}"));
        match name {
            "hidden" | "b" => self.hidden.extend(items.iter().map(int).collect::<Result<Vec<_>>>()?),
            "window" | "T" => self.window.extend(items.iter().map(int).collect::<Result<Vec<_>>>()?),
            "lr" | "learning_rate" => {
                self.learning_rate.extend(items.iter().map(num).collect::<Result<Vec<_>>>()?)
            }
            "dropout" => self.dropout.extend(items.iter().map(num).collect::<Result<Vec<_>>>()?),
            "activation" => {
                for s in items {
                    self.activation.push(match s.to_ascii_lowercase().as_str() {
                        "relu" => Activation::Relu,
                        "tanh" => Activation::Tanh,
                        other => bail!("unknown activation {other:?}"),
                    });
                }
            }
            other => bail!("unknown sweep axis {other:?}"),
        }
        Ok(())
    }

    /// Cartesian product applied to `base`, in axis order hidden, lr,
    /// dropout, window, activation.
    pub fn variants(&self, base: &ExperimentConfig) -> Vec<ExperimentConfig> {
        fn axis<T: Clone>(v: &[T], base: T) -> Vec<T> {
            if v.is_empty() {
                vec![base]
            } else {
                v.to_vec()
            }
        }
        let r = &base.rnn;
        let mut out = Vec::new();
        for h in axis(&self.hidden, r.hidden) {
            for lr in axis(&self.learning_rate, r.learning_rate) {
                for d in axis(&self.dropout, r.dropout_final) {
                    for w in axis(&self.window, r.window) {
                        for act in axis(&self.activation, r.activation) {
                            let mut c = base.clone();
                            c.rnn.hidden = h;
                            c.rnn.learning_rate = lr;
                            c.rnn.dropout_final = d;
                            c.rnn.window = w;
                            c.rnn.activation = act;
                            out.push(c);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub config: ExperimentConfig,
    pub result: std::result::Result<Simulation, String>,
}

pub fn sweep(base: &ExperimentConfig, axes: &SweepAxes) -> Result<Vec<SweepRow>> {
    base.validate()?;
    Ok(axes
        .variants(base)
        .into_iter()
        .map(|config| {
            let result = simulate(&config).map_err(|e| format!("{e:#}"));
            SweepRow { config, result }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// artifacts

pub const OUT_ENV: &str = "RNNDCOR_OUT";

/// `config.output_dir`, else `$RNNDCOR_OUT`, else `./rnndcor-out`.
pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    config
        .output_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("rnndcor-out"))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> rnndcor::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    stage("export", f(&mut buf))?;
    Ok(buf)
}

#[derive(Serialize)]
struct SidecarSeries<'a> {
    origin: &'a rnndcor::tsgen::Origin,
    noise: &'a Option<rnndcor::tsgen::NoiseSpec>,
}

/// Config as stored in artifacts. The output location is left out so the
/// same experiment written to two places produces identical files.
fn recorded(config: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        output_dir: None,
        ..config.clone()
    }
}

/// Writes `series.csv` and `series.json`.
pub fn write_generate(config: &ExperimentConfig, dir: &Path) -> Result<TimeSeries> {
    config.validate()?;
    let noise = config.noise_spec(config.base_seed)?;
    let series = stage("generate", config.process.build(&noise, config.length, config.burn_in))?;
    write(dir, "series.csv", &csv_bytes(|b| series.write_csv(b, true))?)?;
    let sidecar = serde_json::json!({
        "label": config.process.label(),
        "length": series.len(),
        "seed": config.base_seed,
        "origin": SidecarSeries { origin: &series.origin, noise: &series.noise },
        "config": recorded(config),
    });
    write(dir, "series.json", &json(&sidecar)?)?;
    Ok(series)
}

fn profile_labels(n: usize) -> Vec<String> {
    (1..=n).map(|t| t.to_string()).collect()
}

fn profile_chart(title: &str, values: &[f64], acf: &[f64], precision: usize, source: &str) -> Result<svg::SvgChart> {
    let labels = profile_labels(values.len());
    let mut series: Vec<(&str, &[f64])> = vec![("dcor", values)];
    if acf.len() == values.len() {
        series.push(("acf (lag T+1-t)", acf));
    }
    svg::render_bar_chart(title, &labels, &series, precision, source)
}

#[derive(Serialize)]
struct RunDocument<'a> {
    label: &'a str,
    config: ExperimentConfig,
    summary: &'a RunSummary,
    epoch_losses: &'a [f64],
}

/// Writes summary.json, profile.csv/.svg, forecast.csv/.svg, model.json and
/// timing.json (the only file that changes between identical runs).
pub fn write_run(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    let p = outcome.config.precision;
    let doc = RunDocument {
        label: &outcome.label,
        config: recorded(&outcome.config),
        summary: &outcome.summary,
        epoch_losses: &outcome.epoch_losses,
    };
    write(dir, "summary.json", &json(&doc)?)?;
    let profile = &outcome.summary.profile;
    write(dir, "profile.csv", &csv_bytes(|b| profile.write_csv(b, p))?)?;
    let acf: Vec<f64> = profile.acf.iter().map(|a| a.acf).collect();
    let title = format!("{} distance correlation by layer", outcome.label);
    write(dir, "profile.svg", profile_chart(&title, &profile.values, &acf, p, "profile.csv")?.text.as_bytes())?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "actual", "predicted"])?;
    for f in &outcome.forecast {
        w.write_record([f.index.to_string(), fixed(f.actual, p), fixed(f.predicted, p)])?;
    }
    write(dir, "forecast.csv", &w.into_inner().context("csv buffer")?)?;
    let actual: Vec<f64> = outcome.forecast.iter().map(|f| f.actual).collect();
    let predicted: Vec<f64> = outcome.forecast.iter().map(|f| f.predicted).collect();
    let chart = svg::render_forecast(&format!("{} forecast", outcome.label), &actual, &predicted, p, "forecast.csv")?;
    write(dir, "forecast.svg", chart.text.as_bytes())?;

    let mut model = Vec::new();
    stage("export", outcome.model.to_json(&mut model))?;
    write(dir, "model.json", &model)?;
    write(
        dir,
        "timing.json",
        &json(&serde_json::json!({ "wall_clock_secs": outcome.wall_clock_secs }))?,
    )?;
    Ok(())
}

/// Table row in the layout `MSE | MAPE | max r | final r | change`.
pub fn table_row(label: &str, a: &AggregateSummary, precision: usize) -> String {
    format!(
        "| {label} | {} | {} | {} | {} | {} |",
        a.mse.format(precision),
        a.mape.format(precision),
        a.max_r.format(precision),
        a.final_r.format(precision),
        format!(
            "{}% ± {}",
            fixed(a.info_loss_pct.mean.round(), 0),
            fixed(a.info_loss_pct.std.round(), 0)
        )
    )
}

pub const TABLE_HEADER: &str = "| process | MSE | MAPE | max r | final r | change |\n|---|---|---|---|---|---|";

fn stat_columns(a: &MeanStd, precision: usize) -> [String; 2] {
    [fixed(a.mean, precision), fixed(a.std, precision)]
}

const TABLE_COLUMNS: [&str; 10] = [
    "mse_mean", "mse_std", "mape_mean", "mape_std", "max_r_mean", "max_r_std", "final_r_mean",
    "final_r_std", "change_mean", "change_std",
];

fn aggregate_fields(a: &AggregateSummary, p: usize) -> Vec<String> {
    [&a.mse, &a.mape, &a.max_r, &a.final_r, &a.info_loss_pct]
        .iter()
        .flat_map(|m| stat_columns(m, p))
        .collect()
}

#[derive(Serialize)]
struct SimulationDocument<'a> {
    label: &'a str,
    config: ExperimentConfig,
    run_seeds: Vec<u64>,
    aggregate: &'a AggregateSummary,
    runs: Vec<&'a RunSummary>,
    failures: &'a [RunFailure],
}

/// Writes aggregate.json, table.csv, table.md, mean_profile.csv/.svg and a
/// `runs/run_NNN` directory per successful run.
pub fn write_simulation(sim: &Simulation, dir: &Path) -> Result<()> {
    let p = sim.config.precision;
    let doc = SimulationDocument {
        label: &sim.label,
        config: recorded(&sim.config),
        run_seeds: (0..sim.config.runs).map(|i| sim.config.run_seed(i)).collect(),
        aggregate: &sim.aggregate,
        runs: sim.runs.iter().map(|r| &r.summary).collect(),
        failures: &sim.failures,
    };
    write(dir, "aggregate.json", &json(&doc)?)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["process", "runs"];
    header.extend(TABLE_COLUMNS);
    w.write_record(&header)?;
    let mut row = vec![sim.label.clone(), sim.aggregate.runs.to_string()];
    row.extend(aggregate_fields(&sim.aggregate, p));
    w.write_record(&row)?;
    write(dir, "table.csv", &w.into_inner().context("csv buffer")?)?;
    let md = format!("{TABLE_HEADER}\n{}\n", table_row(&sim.label, &sim.aggregate, 3));
    write(dir, "table.md", md.as_bytes())?;

    let mean = analysis::DcorProfile {
        values: sim.aggregate.mean_profile.clone(),
        tag: sim.config.evaluate_on,
        epoch: sim.config.rnn.epochs,
        acf: sim.aggregate.acf.clone(),
    };
    write(dir, "mean_profile.csv", &csv_bytes(|b| mean.write_csv(b, p))?)?;
    let acf: Vec<f64> = mean.acf.iter().map(|a| a.acf).collect();
    let title = format!("{} mean distance correlation over {} runs", sim.label, sim.aggregate.runs);
    write(
        dir,
        "mean_profile.svg",
        profile_chart(&title, &mean.values, &acf, p, "mean_profile.csv")?.text.as_bytes(),
    )?;
    for r in &sim.runs {
        let run_dir = dir.join("runs").join(format!("run_{:03}", r.summary.seed - sim.config.base_seed));
        write_run(r, &run_dir)?;
    }
    Ok(())
}

/// Writes grid.csv, heatmap.svg and heatmap.json.
pub fn write_heatmap(h: &HeatmapOutcome, dir: &Path) -> Result<()> {
    let p = h.configs[0].precision;
    write(dir, "grid.csv", &csv_bytes(|b| h.grid.write_csv(b, p))?)?;
    let caption: Vec<String> = h
        .grid
        .model_a
        .lines()
        .chain(h.grid.model_b.lines())
        .zip(&h.metrics)
        .map(|(name, m)| format!("{name}: MSE {} MAPE {}", fixed(m.mse, 4), fixed(m.mape, 4)))
        .collect();
    let chart = svg::render_heatmap(&h.grid, &caption, p, "grid.csv")?;
    write(dir, "heatmap.svg", chart.text.as_bytes())?;
    let doc = serde_json::json!({
        "configs": h.configs.iter().map(recorded).collect::<Vec<_>>(),
        "metrics": &h.metrics,
        "samples": h.samples,
        "model_a": &h.grid.model_a,
        "model_b": &h.grid.model_b,
        "grid": &h.grid.grid,
    });
    write(dir, "heatmap.json", &json(&doc)?)?;
    Ok(())
}

/// Writes sweep.csv with one row per variant plus each variant's
/// simulation artifacts under `variant_NN`.
pub fn write_sweep(rows: &[SweepRow], dir: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "variant", "process", "hidden", "learning_rate", "dropout", "window", "activation", "runs",
    ];
    header.extend(TABLE_COLUMNS);
    header.push("error");
    w.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        let c = &row.config;
        let p = c.precision;
        let mut rec = vec![
            i.to_string(),
            c.process.label(),
            c.rnn.hidden.to_string(),
            c.rnn.learning_rate.to_string(),
            c.rnn.dropout_final.to_string(),
            c.rnn.window.to_string(),
            format!("{:?}", c.rnn.activation).to_lowercase(),
        ];
        match &row.result {
            Ok(sim) => {
                rec.push(sim.aggregate.runs.to_string());
                rec.extend(aggregate_fields(&sim.aggregate, p));
                rec.push(String::new());
                write_simulation(sim, &dir.join(format!("variant_{i:02}")))?;
            }
            Err(e) => {
                rec.push("0".into());
                rec.extend(std::iter::repeat_n(String::new(), TABLE_COLUMNS.len()));
                rec.push(e.clone());
            }
        }
        w.write_record(&rec)?;
    }
    write(dir, "sweep.csv", &w.into_inner().context("csv buffer")?)?;
    Ok(())
}

/// Table rows for every `aggregate.json` directly under the given paths
/// (a path may also be the file itself).
pub fn report(paths: &[PathBuf]) -> Result<String> {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    let mut files = Vec::new();
    for p in paths {
        if p.is_file() {
            files.push(p.clone());
            continue;
        }
        let direct = p.join("aggregate.json");
        if direct.is_file() {
            files.push(direct);
        }
        let mut nested: Vec<PathBuf> = fs::read_dir(p)
            .with_context(|| format!("cannot read {}", p.display()))?
            .filter_map(|e| e.ok().map(|e| e.path().join("aggregate.json")))
            .filter(|f| f.is_file())
            .collect();
        nested.sort();
        files.extend(nested);
    }
    if files.is_empty() {
        bail!("no aggregate.json found under the given paths");
    }
    for f in files {
        let text = fs::read_to_string(&f).with_context(|| format!("cannot read {}", f.display()))?;
        let doc: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("invalid {}", f.display()))?;
        let label = doc["label"].as_str().unwrap_or("?").to_string();
        let agg: AggregateSummary = serde_json::from_value(doc["aggregate"].clone())
            .with_context(|| format!("{} has no aggregate section", f.display()))?;
        out.push_str(&table_row(&label, &agg, 3));
        out.push('\n');
    }
    Ok(out)
}
