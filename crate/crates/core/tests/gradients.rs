mod common;

use common::grad::{build, cases, max_relative_error, Case};
use minsyn::neuralnet::{DecoderKind, Regularizer};

#[test]
fn twenty_random_models_match_finite_differences() {
    for case in cases(20) {
        let err = max_relative_error(&case);
        assert!(err <= 1e-4, "{case:?}: relative error {err}");
    }
}

#[test]
fn suite_covers_every_kind_and_regularizer() {
    let all = cases(20);
    for kind in [
        DecoderKind::LearnedSigmoid,
        DecoderKind::LearnedLinear,
        DecoderKind::MinsynBinary,
        DecoderKind::MinsynGaussian,
    ] {
        assert!(all.iter().any(|c| c.kind == kind));
    }
    let active = |r: &Regularizer| match r {
        Regularizer::None => false,
        Regularizer::Dropout { p } => *p > 0.0,
        Regularizer::InputGaussianNoise { sigma } | Regularizer::LatentGaussianNoise { sigma } => {
            *sigma > 0.0
        }
    };
    assert!(all.iter().any(|c| active(&c.regularizer)));
    assert!(all.iter().any(|c| !active(&c.regularizer) && c.regularizer != Regularizer::None));
}

#[test]
fn dropout_zeroes_flow_into_gradients() {
    let case = Case {
        kind: DecoderKind::LearnedLinear,
        regularizer: Regularizer::Dropout { p: 0.9 },
        seed: 7,
    };
    let (model, _) = build(&case);
    assert!(model.parameter_count() > 0);
    assert!(max_relative_error(&case) <= 1e-4);
}
