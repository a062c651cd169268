mod common;

use std::f64::consts::LN_2;

use common::*;
use minsyn::discrete_info::*;
use minsyn::minsyn_decoder::{binary_decoder_params, Moments, StatsKind};
use minsyn::neuralnet::sigmoid;
use ndarray::{Array1, Array2};
use proptest::prelude::*;

#[test]
fn xor_canon() {
    let xor = DiscreteJoint::xor();
    assert!((discrete_ci_synergy(&xor).unwrap() - LN_2).abs() < 1e-12);
    assert!((discrete_wms_synergy(&xor).unwrap() - LN_2).abs() < 1e-12);
    assert!(total_correlation(&xor).abs() < 1e-12);
    for j in 0..2 {
        assert!(mutual_information(&xor, &[j]).unwrap().abs() < 1e-12);
    }
    assert!((mutual_information(&xor, &[0, 1]).unwrap() - LN_2).abs() < 1e-12);
}

fn random_joint(rng: &mut SplitMix, arities: &[usize]) -> DiscreteJoint {
    let size: usize = arities.iter().product();
    let raw: Vec<f64> = (0..size).map(|_| rng.range(0.01, 1.0)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteJoint::new(arities.to_vec(), raw.iter().map(|v| v / total).collect()).unwrap()
}

#[test]
fn ci_synergy_matches_literal_summation() {
    let mut rng = SplitMix(21);
    for trial in 0..30 {
        let m = 1 + trial % 3;
        let mut arities: Vec<usize> = (0..m).map(|_| 2 + (rng.next_u64() % 2) as usize).collect();
        arities.push(2 + (rng.next_u64() % 2) as usize);
        let joint = random_joint(&mut rng, &arities);
        let nx = *arities.last().unwrap();
        let lookup = |z: &[usize], x: usize| {
            let idx = z.iter().zip(&arities).fold(0, |acc, (&v, &a)| acc * a + v);
            joint.probs()[idx * nx + x]
        };
        let want = literal_ci_synergy(&arities[..m], nx, &lookup);
        let got = discrete_ci_synergy(&joint).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

/// Hand-built moments of a conditionally independent binary model for one output.
fn ci_moments(prior: f64, on: &[f64], off: &[f64]) -> Moments {
    let m = on.len();
    let mean_z: Vec<f64> = (0..m).map(|j| prior * on[j] + (1.0 - prior) * off[j]).collect();
    let mean_xz: Vec<f64> = (0..m).map(|j| prior * on[j]).collect();
    Moments {
        kind: StatsKind::Binary,
        mean_x: Array1::from_vec(vec![prior]),
        mean_z: Array1::from_vec(mean_z),
        mean_x2: Array1::zeros(0),
        mean_z2: Array1::zeros(0),
        mean_xz: Array2::from_shape_vec((1, m), mean_xz).unwrap(),
    }
}

#[test]
fn binary_decoder_is_bayes_posterior() {
    let mut rng = SplitMix(22);
    for trial in 0..50 {
        let m = 1 + trial % 6;
        let prior = rng.range(0.05, 0.95);
        let on: Vec<f64> = (0..m).map(|_| rng.range(0.05, 0.95)).collect();
        let off: Vec<f64> = (0..m).map(|_| rng.range(0.05, 0.95)).collect();
        let params = binary_decoder_params(&ci_moments(prior, &on, &off).binary_stats());
        for config in 0..(1usize << m) {
            let z: Vec<u8> = (0..m).map(|j| ((config >> j) & 1) as u8).collect();
            let logit: f64 = params.bias[0]
                + (0..m).map(|j| params.weights[(0, j)] * z[j] as f64).sum::<f64>();
            let want = naive_bayes_posterior(prior, &on, &off, &z);
            assert!((sigmoid(logit) - want).abs() < 1e-9, "{} vs {want}", sigmoid(logit));
        }
    }
}

#[test]
fn ci_table_of_ci_joint_is_exact_posterior() {
    let prior = 0.3;
    let on = [0.8, 0.2, 0.6];
    let off = [0.1, 0.5, 0.4];
    let joint = DiscreteJoint::from_fn(vec![2, 2, 2, 2], |c| {
        let px = if c[3] == 1 { prior } else { 1.0 - prior };
        (0..3).fold(px, |acc, j| {
            let p1 = if c[3] == 1 { on[j] } else { off[j] };
            acc * if c[j] == 1 { p1 } else { 1.0 - p1 }
        })
    })
    .unwrap();
    assert!(discrete_ci_synergy(&joint).unwrap().abs() < 1e-12);
    let table = ci_decoder_distribution(&joint).unwrap();
    for config in 0..8usize {
        let z: Vec<usize> = (0..3).map(|j| (config >> (2 - j)) & 1).collect();
        let zb: Vec<u8> = z.iter().map(|&v| v as u8).collect();
        let row = table.row(&z).unwrap();
        assert!((row[1] - naive_bayes_posterior(prior, &on, &off, &zb)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn information_quantities_are_nonnegative(seed in any::<u64>(), m in 1usize..4) {
        let mut rng = SplitMix(seed);
        let mut arities = vec![2; m];
        arities.push(2 + (seed % 2) as usize);
        let joint = random_joint(&mut rng, &arities);
        let latents: Vec<usize> = (0..m).collect();
        prop_assert!(discrete_ci_synergy(&joint).unwrap() >= 0.0);
        prop_assert!(mutual_information(&joint, &latents).unwrap() >= -1e-15);
        prop_assert!(total_correlation(&joint) >= 0.0);
        let h = entropy(&joint.marginal(&[m])).unwrap();
        prop_assert!(mutual_information(&joint, &latents).unwrap() <= h + 1e-12);
    }
}
