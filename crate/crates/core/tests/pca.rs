mod common;

use common::fixtures::build_words;
use common::*;
use minsyn::neuralnet::{pca_fit, Pca};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use proptest::prelude::*;

fn covariance(data: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    let mean = data.mean_axis(Axis(0)).unwrap();
    let centered = &data - &mean;
    let cov = centered.t().dot(&centered) / (data.nrows() - 1) as f64;
    (centered, cov)
}

/// Checks orthonormal rows, `C v = λ v` and the sign convention.
fn check_eigenpairs(pca: &Pca, apply_cov: &dyn Fn(&Array1<f64>) -> Array1<f64>, tol: f64) {
    let k = pca.components.nrows();
    let gram = pca.components.dot(&pca.components.t());
    for a in 0..k {
        for b in 0..k {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((gram[(a, b)] - want).abs() < 1e-9);
        }
    }
    for c in 0..k {
        let v = pca.components.row(c).to_owned();
        let cv = apply_cov(&v);
        let resid = (&cv - &(&v * pca.variances[c])).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        assert!(resid < tol * pca.variances[0].max(1.0), "component {c}: residual {resid}");
        let peak = v.iter().cloned().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        assert!(peak > 0.0);
    }
}

#[test]
fn matches_jacobi_on_random_matrix() {
    let mut rng = SplitMix(31);
    let data = Array2::from_shape_simple_fn((50, 8), || rng.normal());
    // Give the columns different scales so the spectrum is well separated.
    let data = &data * &Array1::from_iter((0..8).map(|j| 1.0 + j as f64 * 0.5));
    let (_, cov) = covariance(data.view());
    let want = jacobi_eigenvalues(cov.as_slice().unwrap(), 8);
    let pca = pca_fit(data.view(), 3).unwrap();
    for c in 0..3 {
        assert!((pca.variances[c] - want[c]).abs() < 1e-9, "{} vs {}", pca.variances[c], want[c]);
    }
    check_eigenpairs(&pca, &|v| cov.dot(v), 1e-9);
}

#[test]
fn word_images_nine_components() {
    let dir = tempfile::tempdir().unwrap();
    let ds = build_words(dir.path());
    let data = ds.train_images.view();
    let rows = data.nrows();
    let mean = data.mean_axis(Axis(0)).unwrap();
    let centered = &data - &mean;
    let gram = centered.dot(&centered.t()) / (rows - 1) as f64;
    let want = jacobi_eigenvalues(gram.as_slice().unwrap(), rows);
    let pca = pca_fit(data, 9).unwrap();
    for c in 0..9 {
        assert!((pca.variances[c] - want[c]).abs() < 1e-6 * want[0], "{}", c);
    }
    let apply = |v: &Array1<f64>| centered.t().dot(&centered.dot(v)) / (rows - 1) as f64;
    check_eigenpairs(&pca, &apply, 1e-6);
}

fn squared_error(pca: &Pca, data: ArrayView2<f64>) -> f64 {
    let r = pca.reconstruct(data).unwrap();
    (&r - &data).mapv(|v| v * v).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn error_non_increasing_in_k(seed in any::<u64>()) {
        let mut rng = SplitMix(seed);
        let data = Array2::from_shape_simple_fn((20, 6), || rng.normal());
        let mut last = f64::INFINITY;
        for k in 1..=6 {
            let err = squared_error(&pca_fit(data.view(), k).unwrap(), data.view());
            prop_assert!(err <= last + 1e-9);
            last = err;
        }
        prop_assert!(last < 1e-12);
    }
}
