mod common;

use common::SplitMix;
use minsyn::minsyn_decoder::{Moments, MovingAverageState, StatsKind};
use minsyn::neuralnet::{
    refresh_statistics, train_autoencoder, Activation, DecoderKind, LayerSpec, Mode, Regularizer,
    TrainConfig,
};
use ndarray::{Array2, Axis};
use rand::SeedableRng;

fn data(seed: u64) -> Array2<f64> {
    let mut rng = SplitMix(seed);
    Array2::from_shape_simple_fn((30, 8), || rng.uniform())
}

fn config(kind: DecoderKind, lr: f64) -> TrainConfig {
    let act = if kind == DecoderKind::MinsynBinary { Activation::Sigmoid } else { Activation::Softplus };
    TrainConfig {
        epochs: 4,
        batch_size: 7,
        seed: 9,
        lr,
        decoder_kind: kind,
        regularizer: Regularizer::LatentGaussianNoise { sigma: 0.1 },
        encoder: vec![LayerSpec { size: 4, activation: act }, LayerSpec { size: 3, activation: act }],
        momentum: 0.9,
        refresh_stats: false,
    }
}

const KINDS: [DecoderKind; 4] = [
    DecoderKind::LearnedSigmoid,
    DecoderKind::LearnedLinear,
    DecoderKind::MinsynBinary,
    DecoderKind::MinsynGaussian,
];

#[test]
fn training_is_deterministic() {
    let x = data(1);
    for kind in KINDS {
        let a = train_autoencoder(&config(kind, 0.01), x.view()).unwrap();
        let b = train_autoencoder(&config(kind, 0.01), x.view()).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.history, b.history);
        let mut other = config(kind, 0.01);
        other.seed += 1;
        assert_ne!(train_autoencoder(&other, x.view()).unwrap().history, a.history);
    }
}

#[test]
fn zero_learning_rate_keeps_initial_weights() {
    let x = data(2);
    for kind in KINDS {
        let cfg = config(kind, 0.0);
        let init = cfg.init_model(8).unwrap();
        let out = train_autoencoder(&cfg, x.view()).unwrap();
        assert_eq!(out.model.encoder, init.encoder);
        if !kind.is_minsyn() {
            assert_eq!(out.model.decoder, init.decoder);
        }
    }
}

#[test]
fn moving_average_counts_every_step() {
    let x = data(3);
    let out = train_autoencoder(&config(DecoderKind::MinsynGaussian, 0.01), x.view()).unwrap();
    // 30 rows in batches of 7: 4 full batches and a trailing batch of 2.
    assert_eq!(out.steps, 4 * 5);
    assert_eq!(out.model.moving_average().unwrap().step_count, 20);
}

#[test]
fn moving_average_blends_raw_moments() {
    let x = data(4);
    let z = data(5).slice(ndarray::s![.., ..3]).to_owned();
    let first = Moments::from_batch(StatsKind::Gaussian, x.slice(ndarray::s![..10, ..]), z.slice(ndarray::s![..10, ..])).unwrap();
    let second = Moments::from_batch(StatsKind::Gaussian, x.slice(ndarray::s![10.., ..]), z.slice(ndarray::s![10.., ..])).unwrap();
    let mut ma = MovingAverageState::new(0.75).unwrap();
    ma.update(&first).unwrap();
    assert_eq!(ma.running().unwrap(), &first);
    ma.update(&second).unwrap();
    let run = ma.running().unwrap();
    for (got, (a, b)) in run.mean_xz.iter().zip(first.mean_xz.iter().zip(&second.mean_xz)) {
        assert!((got - (0.75 * a + 0.25 * b)).abs() < 1e-15);
    }
}

#[test]
fn refresh_uses_full_data_moments() {
    let x = data(6);
    let mut model = train_autoencoder(&config(DecoderKind::MinsynBinary, 0.01), x.view()).unwrap().model;
    let steps = model.moving_average().unwrap().step_count;
    refresh_statistics(&mut model, x.view()).unwrap();
    let z = model.encode(x.view()).unwrap();
    let want_x = x.mean_axis(Axis(0)).unwrap();
    let want_xz = x.t().dot(&z) / x.nrows() as f64;
    let ma = model.moving_average().unwrap();
    let run = ma.running().unwrap();
    assert_eq!(ma.step_count, steps);
    assert!(run.mean_x.iter().zip(&want_x).all(|(a, b)| (a - b).abs() < 1e-14));
    assert!(run.mean_xz.iter().zip(&want_xz).all(|(a, b)| (a - b).abs() < 1e-14));
    // Evaluation now reconstructs with decoder parameters derived from those moments.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let eval = model.forward(x.view(), Mode::Eval, &mut rng).unwrap();
    assert_eq!(eval.params.unwrap(), run.decoder_params().unwrap());
}
