use std::io::Write;

use ndarray::Array2;
use proptest::prelude::*;
use rnndcor::analysis::{self, DcorProfile};
use rnndcor::estat::{self, SampleMatrix};
use rnndcor::pipeline;
use rnndcor::rnn::{self, Activation, DatasetTag, RnnConfig};
use rnndcor::tsgen::{self, ArParams, ColumnSelector, CsvOptions, NoiseSpec};

fn small_config(window: usize) -> RnnConfig {
    RnnConfig {
        window,
        hidden: 12,
        epochs: 8,
        learning_rate: 1e-3,
        seed: 4,
        ..RnnConfig::default()
    }
}

fn profile_for(values: &[f64], config: &RnnConfig) -> (DcorProfile, analysis::Metrics) {
    let (train_r, test_r) = pipeline::split(values.len(), 0.8, config.window, 1).unwrap();
    let z = pipeline::standardize(values, train_r.clone()).unwrap();
    let train = pipeline::make_samples_at(&z.values[train_r.clone()], 0, config.window, 1).unwrap();
    let test = pipeline::make_samples_at(&z.values[test_r.clone()], test_r.start, config.window, 1).unwrap();
    let report = rnn::train(config, &train).unwrap();
    let pred = report.model.predict(test.x.view()).unwrap();
    let metrics = analysis::eval_metrics(pred.as_slice().unwrap(), test.y.as_slice().unwrap()).unwrap();
    let acts = rnn::capture_activations(&report.model, &test, config.epochs, DatasetTag::Test).unwrap();
    let y = SampleMatrix::new(test.y.clone()).unwrap();
    let acf = estat::acf(values, config.window).unwrap();
    let profile = analysis::layer_profile(&acts, &y).unwrap().with_acf(&acf).unwrap();
    (profile, metrics)
}

#[test]
fn ar1_pipeline_learns_the_last_lag() {
    let params = ArParams::single_lag(1, 0.9).unwrap();
    let series = tsgen::gen_ar(&params, &NoiseSpec::standard(11), 1500, 200).unwrap();
    let config = RnnConfig { epochs: 40, hidden: 32, ..small_config(8) };
    let (profile, metrics) = profile_for(&series.values, &config);
    assert_eq!(profile.window(), 8);
    assert!(profile.values.iter().all(|r| (0.0..=1.0).contains(r)));
    assert!(profile.final_r() > 0.7, "{:?}", profile.values);
    assert!(metrics.mse < 0.5, "{metrics:?}");
    assert_eq!(profile.acf[7].lag, 1);
}

#[test]
fn csv_series_runs_through_the_pipeline() {
    let params = ArParams::single_lag(2, 0.7).unwrap();
    let series = tsgen::gen_ar(&params, &NoiseSpec::standard(3), 600, 100).unwrap();
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "time;load").unwrap();
    for (i, v) in series.values.iter().enumerate() {
        writeln!(file, "{i};{v}").unwrap();
    }
    let opts = CsvOptions {
        column: ColumnSelector::Name("load".into()),
        delimiter: ';',
        has_header: true,
        rows: None,
    };
    let loaded = tsgen::load_csv(file.path(), &opts).unwrap();
    assert_eq!(loaded.values, series.values);
    let (profile, _) = profile_for(&loaded.values, &small_config(5));
    assert_eq!(profile.window(), 5);
}

#[test]
fn self_grid_of_trained_model() {
    let params = ArParams::single_lag(3, 0.8).unwrap();
    let series = tsgen::gen_ar(&params, &NoiseSpec::standard(5), 800, 100).unwrap();
    let z = pipeline::standardize(&series.values, 0..640).unwrap();
    let samples = pipeline::make_samples(&z.values[..640], 6, 1).unwrap();
    let mut config = small_config(6);
    config.activation = Activation::Tanh;
    let model = rnn::train(&config, &samples).unwrap().model;
    let acts = rnn::capture_activations(&model, &samples, 8, DatasetTag::Train).unwrap();
    let grid = analysis::cross_model_grid(&acts, &acts, "m", "m").unwrap();
    for v in 0..6 {
        assert!((grid.grid[[v, v]] - 1.0).abs() < 1e-9);
        for m in 0..6 {
            assert!((grid.grid[[v, m]] - grid.grid[[m, v]]).abs() < 1e-9);
        }
    }
}

#[test]
fn different_windows_align_to_the_same_targets() {
    let params = ArParams::single_lag(8, 0.8).unwrap();
    let series = tsgen::gen_ar(&params, &NoiseSpec::standard(2), 1000, 100).unwrap();
    let z = pipeline::standardize(&series.values, 0..800).unwrap();
    let seg = &z.values[800..];
    let s6 = pipeline::make_samples_at(seg, 800, 6, 1).unwrap();
    let s10 = pipeline::make_samples_at(seg, 800, 10, 1).unwrap();
    let (a, b) = analysis::align_windows(&s6, &s10).unwrap();
    let (s6, s10) = (s6.select(&a), s10.select(&b));
    assert_eq!(s6.y, s10.y);
    let m6 = rnn::init_kaiming(&small_config(6)).unwrap();
    let m10 = rnn::init_kaiming(&small_config(10)).unwrap();
    let a6 = rnn::capture_activations(&m6, &s6, 0, DatasetTag::Test).unwrap();
    let a10 = rnn::capture_activations(&m10, &s10, 0, DatasetTag::Test).unwrap();
    let grid = analysis::cross_model_grid(&a6, &a10, "T=6", "T=10").unwrap();
    assert_eq!(grid.grid.dim(), (6, 10));
    assert!(grid.grid.iter().all(|g| (0.0..=1.0).contains(g)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn dcor_is_bounded_and_symmetric(
        n in 2usize..30,
        p in 1usize..4,
        q in 1usize..4,
        seed in 0u64..1000,
    ) {
        let mut g = rnndcor::rng::Gaussian::new(rnndcor::rng::stream(seed, rnndcor::rng::Stream::Noise));
        let x = SampleMatrix::new(Array2::from_shape_simple_fn((p, n), || g.next_standard())).unwrap();
        let y = SampleMatrix::new(Array2::from_shape_simple_fn((q, n), || g.next_standard())).unwrap();
        let xy = estat::dcor(&x, &y).unwrap();
        let yx = estat::dcor(&y, &x).unwrap();
        prop_assert!((0.0..=1.0).contains(&xy));
        prop_assert!((xy - yx).abs() < 1e-12);
        prop_assert!((estat::dcor(&x, &x).unwrap() - 1.0).abs() < 1e-12);
    }
}
