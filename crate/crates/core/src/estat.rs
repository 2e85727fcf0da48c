//! Energy statistics: distance matrices, double centering, distance
//! covariance / correlation, and the sample autocorrelation function.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Negative distance covariances down to `-DCOV_CLAMP_TOL * scale` are
/// rounding noise and clamp to zero; `scale` is the product of the mean
/// absolute entries of the two centered matrices (at least 1).
pub const DCOV_CLAMP_TOL: f64 = 1e-12;

/// `n` samples in `R^d`, stored column-wise as a `d x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Array2<f64>,
}

impl SampleMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if data.ncols() < 2 {
            return Err(Error::InsufficientData(format!(
                "sample matrix needs at least 2 columns, got {}",
                data.ncols()
            )));
        }
        if let Some((idx, _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteInput { column: idx.1 });
        }
        Ok(Self { data })
    }

    /// One-dimensional samples.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(Array2::from_shape_vec((1, values.len()), values.to_vec()).expect("1 x n shape"))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn n(&self) -> usize {
        self.data.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }
}

/// Euclidean distances between the columns of `m`.
pub fn pairwise_distances(m: &SampleMatrix) -> Array2<f64> {
    distances_of(m.view())
}

fn distances_of(cols: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = cols.ncols();
    // samples as contiguous rows
    let rows = cols.t().as_standard_layout().into_owned();
    let flat = rows.as_slice().expect("standard layout");
    let d = rows.ncols();
    let mut out = Array2::<f64>::zeros((n, n));
    const BLOCK: usize = 64;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (ib..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                let xi = &flat[i * d..(i + 1) * d];
                for j in jb.max(i + 1)..(jb + BLOCK).min(n) {
                    let xj = &flat[j * d..(j + 1) * d];
                    let mut s = 0.0;
                    for k in 0..d {
                        let diff = xi[k] - xj[k];
                        s += diff * diff;
                    }
                    let dist = s.sqrt();
                    out[[i, j]] = dist;
                    out[[j, i]] = dist;
                }
            }
        }
    }
    out
}

/// Double-centered distance matrix `B_ij = b_ij - b_i. - b_.j + b_..`.
#[derive(Debug, Clone)]
pub struct CenteredDistanceMatrix {
    entries: Array2<f64>,
    source_dim: usize,
    mean_abs: f64,
}

impl CenteredDistanceMatrix {
    pub fn from_samples(m: &SampleMatrix) -> Self {
        let d = pairwise_distances(m);
        let mut c = center_unchecked(d);
        c.source_dim = m.dim();
        c
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    /// `V^2` of the sample with itself.
    pub fn self_dcov2(&self) -> f64 {
        dcov2_centered(self, self).expect("self covariance is nonnegative")
    }
}

pub fn double_center(d: &Array2<f64>) -> Result<CenteredDistanceMatrix> {
    let n = d.nrows();
    if n != d.ncols() {
        return Err(Error::InvalidDistanceMatrix(format!(
            "matrix is {}x{}, not square",
            n,
            d.ncols()
        )));
    }
    for i in 0..n {
        if d[[i, i]] != 0.0 {
            return Err(Error::InvalidDistanceMatrix(format!(
                "diagonal entry {i} is {}",
                d[[i, i]]
            )));
        }
        for j in (i + 1)..n {
            let (a, b) = (d[[i, j]], d[[j, i]]);
            if !a.is_finite() || !b.is_finite() || (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                return Err(Error::InvalidDistanceMatrix(format!(
                    "entries ({i},{j})={a} and ({j},{i})={b} differ"
                )));
            }
        }
    }
    let mut c = center_unchecked(d.clone());
    c.source_dim = 0;
    Ok(c)
}

/// Centering for a symmetric matrix: row means double as column means, and
/// `b_ij - (b_i. + b_.j) + b_..` keeps the result exactly symmetric.
fn center_unchecked(mut d: Array2<f64>) -> CenteredDistanceMatrix {
    let n = d.nrows();
    let nf = n as f64;
    let row_means: Vec<f64> = d
        .axis_iter(Axis(0))
        .map(|r| r.iter().sum::<f64>() / nf)
        .collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let mut abs_sum = 0.0;
    for ((i, j), v) in d.indexed_iter_mut() {
        *v = *v - (row_means[i] + row_means[j]) + grand;
        abs_sum += v.abs();
    }
    CenteredDistanceMatrix {
        entries: d,
        source_dim: 0,
        mean_abs: abs_sum / (nf * nf),
    }
}

/// `V^2 = (1/n^2) sum B_ij C_ij` over two centered matrices.
pub fn dcov2_centered(b: &CenteredDistanceMatrix, c: &CenteredDistanceMatrix) -> Result<f64> {
    if b.n() != c.n() {
        return Err(Error::SampleCountMismatch {
            left: b.n(),
            right: c.n(),
        });
    }
    let n = b.n() as f64;
    let bs = b.entries.as_slice().expect("owned standard layout");
    let cs = c.entries.as_slice().expect("owned standard layout");
    let sum: f64 = bs.iter().zip(cs).map(|(x, y)| x * y).sum();
    let v = sum / (n * n);
    if v >= 0.0 {
        return Ok(v);
    }
    let scale = (b.mean_abs * c.mean_abs).max(1.0);
    if v >= -DCOV_CLAMP_TOL * scale {
        Ok(0.0)
    } else {
        Err(Error::InternalConsistency(format!(
            "distance covariance {v} is negative beyond rounding"
        )))
    }
}

pub fn dcov2(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    check_counts(x, y)?;
    dcov2_centered(
        &CenteredDistanceMatrix::from_samples(x),
        &CenteredDistanceMatrix::from_samples(y),
    )
}

/// Squared distance correlation from centered matrices, using precomputed
/// self-covariances where the caller has them.
pub fn dcor_squared_centered(
    b: &CenteredDistanceMatrix,
    b_self: f64,
    c: &CenteredDistanceMatrix,
    c_self: f64,
) -> Result<f64> {
    let cross = dcov2_centered(b, c)?;
    let denom = b_self * c_self;
    if denom > 0.0 {
        Ok((cross / denom.sqrt()).clamp(0.0, 1.0))
    } else {
        Ok(0.0)
    }
}

pub fn dcor_squared(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    check_counts(x, y)?;
    let b = CenteredDistanceMatrix::from_samples(x);
    let c = CenteredDistanceMatrix::from_samples(y);
    let (bs, cs) = (b.self_dcov2(), c.self_dcov2());
    dcor_squared_centered(&b, bs, &c, cs)
}

/// Empirical distance correlation `R` in [0, 1] (the square root of the
/// normalized distance covariance; zero when either sample is degenerate).
pub fn dcor(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    dcor_squared(x, y).map(f64::sqrt)
}

fn check_counts(x: &SampleMatrix, y: &SampleMatrix) -> Result<()> {
    if x.n() != y.n() {
        return Err(Error::SampleCountMismatch {
            left: x.n(),
            right: y.n(),
        });
    }
    Ok(())
}

/// Sample ACF for lags `0..=max_lag`, biased divisor (full-series sum of
/// squares in the denominator). Element 0 is 1.
pub fn acf(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if n <= max_lag + 1 {
        return Err(Error::InsufficientData(format!(
            "ACF to lag {max_lag} needs more than {} points, got {n}",
            max_lag + 1
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let denom: f64 = centered.iter().map(|v| v * v).sum();
    if !(denom > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    for h in 1..=max_lag {
        let num: f64 = centered[h..]
            .iter()
            .zip(&centered[..n - h])
            .map(|(a, b)| a * b)
            .sum();
        out.push(num / denom);
    }
    Ok(out)
}

/// 95% white-noise band `1.96 / sqrt(L)`.
pub fn acf_significance_band(len: usize) -> f64 {
    1.96 / (len as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, Gaussian, Stream};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    fn sm(a: Array2<f64>) -> SampleMatrix {
        SampleMatrix::new(a).unwrap()
    }

    fn random_matrix(d: usize, n: usize, seed: u64) -> SampleMatrix {
        let mut g = Gaussian::new(rng::stream(seed, Stream::Noise));
        sm(Array2::from_shape_fn((d, n), |_| g.next_standard()))
    }

    /// Brute-force reference: means recomputed inside explicit loops.
    fn naive_dcov2(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
        let n = x.ncols();
        let dist = |m: ArrayView2<'_, f64>, i: usize, j: usize| -> f64 {
            (0..m.nrows()).map(|k| (m[[k, i]] - m[[k, j]]).powi(2)).sum::<f64>().sqrt()
        };
        let centered = |m: ArrayView2<'_, f64>, i: usize, j: usize| -> f64 {
            let mut ri = 0.0;
            let mut cj = 0.0;
            let mut g = 0.0;
            for k in 0..n {
                ri += dist(m, i, k);
                cj += dist(m, k, j);
                for l in 0..n {
                    g += dist(m, k, l);
                }
            }
            let nf = n as f64;
            dist(m, i, j) - ri / nf - cj / nf + g / (nf * nf)
        };
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += centered(x, i, j) * centered(y, i, j);
            }
        }
        s / (n * n) as f64
    }

    #[test]
    fn distances_345() {
        let d = pairwise_distances(&sm(array![[0.0, 3.0], [0.0, 4.0]]));
        assert_eq!(d, array![[0.0, 5.0], [5.0, 0.0]]);
        let same = pairwise_distances(&sm(array![[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]));
        assert!(same.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn distances_match_double_loop() {
        let m = random_matrix(3, 5, 1);
        let d = pairwise_distances(&m);
        let v = m.view();
        for i in 0..5 {
            for j in 0..5 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += (v[[k, i]] - v[[k, j]]) * (v[[k, i]] - v[[k, j]]);
                }
                assert_abs_diff_eq!(d[[i, j]], s.sqrt(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn blocked_traversal_covers_large_n() {
        let m = random_matrix(2, 150, 2);
        let d = pairwise_distances(&m);
        let v = m.view();
        for (i, j) in [(0, 149), (63, 64), (64, 128), (140, 3)] {
            let e = ((v[[0, i]] - v[[0, j]]).powi(2) + (v[[1, i]] - v[[1, j]]).powi(2)).sqrt();
            assert_abs_diff_eq!(d[[i, j]], e, epsilon = 1e-12);
        }
    }

    #[test]
    fn center_two_points() {
        let b = double_center(&array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(b.entries(), &array![[-0.5, 0.5], [0.5, -0.5]]);
        let z = double_center(&Array2::zeros((4, 4))).unwrap();
        assert!(z.entries().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn center_rejects_asymmetric() {
        let r = double_center(&array![[0.0, 1.0], [2.0, 0.0]]);
        assert!(matches!(r, Err(Error::InvalidDistanceMatrix(_))));
        let r = double_center(&array![[1.0, 1.0], [1.0, 0.0]]);
        assert!(matches!(r, Err(Error::InvalidDistanceMatrix(_))));
    }

    #[test]
    fn centered_rows_sum_to_zero() {
        let d = pairwise_distances(&random_matrix(4, 6, 3));
        let b = double_center(&d).unwrap();
        for r in b.entries().axis_iter(Axis(0)) {
            assert!(r.sum().abs() < 1e-12);
        }
        for c in b.entries().axis_iter(Axis(1)) {
            assert!(c.sum().abs() < 1e-12);
        }
    }

    #[test]
    fn dcov_hand_values() {
        let x = sm(array![[0.0, 1.0]]);
        assert_abs_diff_eq!(dcov2(&x, &x).unwrap(), 0.25, epsilon = 1e-15);
        let c = sm(array![[2.0, 2.0, 2.0]]);
        let y = random_matrix(2, 3, 4);
        assert_eq!(dcov2(&c, &y).unwrap(), 0.0);
    }

    #[test]
    fn dcov_matches_naive_n30() {
        let x = random_matrix(3, 30, 5);
        let y = random_matrix(2, 30, 6);
        assert_abs_diff_eq!(
            dcov2(&x, &y).unwrap(),
            naive_dcov2(x.view(), y.view()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn dcor_self_and_degenerate() {
        let x = random_matrix(3, 20, 7);
        assert_abs_diff_eq!(dcor(&x, &x).unwrap(), 1.0, epsilon = 1e-12);
        let c = sm(Array2::from_elem((2, 20), 3.0));
        assert_eq!(dcor(&c, &x).unwrap(), 0.0);
    }

    #[test]
    fn dcor_affine_map() {
        let xs: Vec<f64> = (1..=10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|v| 2.0 * v + 3.0).collect();
        let r = dcor(
            &SampleMatrix::from_values(&xs).unwrap(),
            &SampleMatrix::from_values(&ys).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn dcor_count_mismatch() {
        let x = random_matrix(1, 5, 8);
        let y = random_matrix(1, 6, 9);
        assert!(matches!(dcor(&x, &y), Err(Error::SampleCountMismatch { left: 5, right: 6 })));
    }

    #[test]
    fn dcor_rises_with_dimension_for_iid() {
        let dims = [1, 10, 100, 1000];
        let means: Vec<f64> = dims
            .iter()
            .map(|&d| {
                (0..20)
                    .map(|s| dcor(&random_matrix(d, 50, 100 + s), &random_matrix(d, 50, 500 + s)).unwrap())
                    .sum::<f64>()
                    / 20.0
            })
            .collect();
        assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
        assert!(means[3] > 0.95, "{means:?}");
    }

    #[test]
    fn independence_smoke() {
        let hits = (0..100)
            .filter(|s| {
                dcor(&random_matrix(1, 200, 1000 + s), &random_matrix(1, 200, 2000 + s)).unwrap() < 0.25
            })
            .count();
        assert!(hits >= 95, "{hits}");
    }

    #[test]
    fn acf_basics() {
        let r = acf(&[1.0, 3.0, 2.0, 5.0, 4.0], 2).unwrap();
        assert_eq!(r[0], 1.0);
        // mean 3; centered [-2,0,-1,2,1]; denom 10; lag1: 0-0-2+2 = 0 -> 0; lag2: 2+0-1 = 1
        assert_abs_diff_eq!(r[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[2], 0.1, epsilon = 1e-15);
        assert!(matches!(acf(&[2.0; 10], 3), Err(Error::DegenerateSeries)));
        assert!(acf(&[1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn significance_band() {
        assert_abs_diff_eq!(acf_significance_band(400), 0.098, epsilon = 1e-15);
        assert_abs_diff_eq!(acf_significance_band(4), 0.98, epsilon = 1e-15);
        assert_abs_diff_eq!(acf_significance_band(10000), 0.0196, epsilon = 1e-15);
    }

    fn matrix_strategy(max_n: usize) -> impl Strategy<Value = (Array2<f64>, Array2<f64>)> {
        (2..=max_n, 1usize..5, 1usize..5).prop_flat_map(|(n, dx, dy)| {
            (
                proptest::collection::vec(-10.0f64..10.0, dx * n),
                proptest::collection::vec(-10.0f64..10.0, dy * n),
            )
                .prop_map(move |(a, b)| {
                    (
                        Array2::from_shape_vec((dx, n), a).unwrap(),
                        Array2::from_shape_vec((dy, n), b).unwrap(),
                    )
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dcor_symmetric_and_bounded((a, b) in matrix_strategy(25)) {
            let x = sm(a);
            let y = sm(b);
            let xy = dcor(&x, &y).unwrap();
            let yx = dcor(&y, &x).unwrap();
            prop_assert_eq!(xy.to_bits(), yx.to_bits());
            prop_assert!((0.0..=1.0).contains(&xy));
        }

        #[test]
        fn dcor_translation_and_scale_invariant((a, b) in matrix_strategy(25), shift in -50.0f64..50.0, scale in 0.01f64..100.0) {
            let base = dcor(&sm(a.clone()), &sm(b.clone())).unwrap();
            let shifted = dcor(&sm(a.mapv(|v| v + shift)), &sm(b.clone())).unwrap();
            let scaled = dcor(&sm(a.mapv(|v| v * scale)), &sm(b)).unwrap();
            prop_assert!((base - shifted).abs() < 1e-12, "base {} shifted {}", base, shifted);
            prop_assert!((base - scaled).abs() < 1e-12, "base {} scaled {}", base, scaled);
        }

        #[test]
        fn centered_sums_vanish((a, _b) in matrix_strategy(30)) {
            let m = sm(a);
            let n = m.n() as f64;
            let c = CenteredDistanceMatrix::from_samples(&m);
            for r in c.entries().axis_iter(Axis(0)) {
                prop_assert!(r.sum().abs() < 1e-9 * n);
            }
            for col in c.entries().axis_iter(Axis(1)) {
                prop_assert!(col.sum().abs() < 1e-9 * n);
            }
        }
    }
}
