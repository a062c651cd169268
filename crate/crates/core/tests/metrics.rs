mod common;

use common::{acc_literal, SplitMix};
use minsyn::metrics::{acc_score, build_report, corrupted_loss, nats_to_bits, ReportRow};
use minsyn::neuralnet::{pca_fit, LossKind};
use ndarray::Array2;
use proptest::prelude::*;

fn layout(pixels_per_slot: usize, slots: usize) -> Vec<usize> {
    (0..slots).flat_map(|s| std::iter::repeat_n(s, pixels_per_slot)).collect()
}

fn to_rows(w: &Array2<f64>) -> Vec<Vec<f64>> {
    w.rows().into_iter().map(|r| r.to_vec()).collect()
}

#[test]
fn block_concentrated_weights_score_zero() {
    let lay = layout(4, 3);
    let mut w = Array2::zeros((12, 3));
    let mut rng = SplitMix(61);
    for i in 0..12 {
        w[(i, lay[i])] = rng.range(0.1, 2.0);
    }
    assert_eq!(acc_score(w.view(), &lay, 3).unwrap(), 0.0);
}

#[test]
fn uniform_three_slot_weights_score_ln3() {
    let lay = layout(5, 3);
    let w = Array2::from_elem((15, 4), 0.7);
    let acc = acc_score(w.view(), &lay, 3).unwrap();
    assert!((acc - 3f64.ln()).abs() < 1e-12);
    assert!((nats_to_bits(acc) - 3f64.log2()).abs() < 1e-12);
}

#[test]
fn report_is_sorted_and_rejects_duplicates() {
    let row = |m: &str, a: f64| ReportRow { method: m.into(), train_loss: 1.0, test_loss: 2.0, acc: a };
    let r = build_report(&[row("pca", 0.5), row("autoencoder", 1.0)]).unwrap();
    assert_eq!(
        r.csv,
        "method,train_loss,test_loss,acc\nautoencoder,1.0000,2.0000,1.0000\npca,1.0000,2.0000,0.5000\n"
    );
    assert!(build_report(&[row("a", 0.0), row("a", 1.0)]).is_err());
    assert!(build_report(&[]).is_err());
}

#[test]
fn full_rank_pca_reconstructs_exactly() {
    let mut rng = SplitMix(62);
    let data = Array2::from_shape_simple_fn((12, 5), || rng.uniform());
    let pca = pca_fit(data.view(), 5).unwrap();
    assert!(corrupted_loss(&pca, data.view(), data.view(), LossKind::Mse).unwrap() < 1e-20);
}

proptest! {
    #[test]
    fn matches_literal_and_is_bounded(seed in any::<u64>(), slots in 1usize..5, per in 1usize..4, m in 1usize..5) {
        let lay = layout(per, slots);
        let mut rng = SplitMix(seed);
        let w = Array2::from_shape_simple_fn((lay.len(), m), || rng.range(-1.0, 1.0));
        let acc = acc_score(w.view(), &lay, slots).unwrap();
        prop_assert!((acc - acc_literal(&to_rows(&w), &lay, slots)).abs() < 1e-12);
        prop_assert!(acc >= 0.0 && acc <= (slots as f64).ln() + 1e-12);
    }

    #[test]
    fn invariant_under_factor_scaling(seed in any::<u64>()) {
        let lay = layout(3, 3);
        let mut rng = SplitMix(seed);
        let w = Array2::from_shape_simple_fn((9, 4), || rng.range(-1.0, 1.0));
        let mut scaled = w.clone();
        for mut col in scaled.columns_mut() {
            let c = rng.range(0.01, 100.0);
            col.mapv_inplace(|v| v * c);
        }
        let a = acc_score(w.view(), &lay, 3).unwrap();
        let b = acc_score(scaled.view(), &lay, 3).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn invariant_under_factor_permutation(seed in any::<u64>()) {
        let lay = layout(2, 3);
        let mut rng = SplitMix(seed);
        let w = Array2::from_shape_simple_fn((6, 4), || rng.range(-1.0, 1.0));
        let perm = [2, 0, 3, 1];
        let permuted = Array2::from_shape_fn((6, 4), |(i, j)| w[(i, perm[j])]);
        let a = acc_score(w.view(), &lay, 3).unwrap();
        let b = acc_score(permuted.view(), &lay, 3).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn moving_mass_toward_balance_raises_score(t in 0.0f64..0.49) {
        // One factor, two slots: slot masses (1 - t, t) get closer to even as t grows.
        let lay = vec![0, 1];
        let score = |t: f64| {
            let w = Array2::from_shape_vec((2, 1), vec![(1.0 - t).sqrt(), t.sqrt()]).unwrap();
            acc_score(w.view(), &lay, 2).unwrap()
        };
        prop_assert!(score(t) <= score(t + 0.01) + 1e-15);
    }
}
