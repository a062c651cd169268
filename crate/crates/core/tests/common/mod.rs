//! Independent reference computations shared by the integration tests and
//! the acceptance harness. Nothing here calls into the library's numerics.
#![allow(dead_code)]

/// Cyclic Jacobi eigenvalues of a symmetric matrix (row-major, `n x n`).
pub fn jacobi_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[piv * n + col].abs() < 1e-14 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut v = x[col];
        for k in col + 1..n {
            v -= m[col * n + k] * x[k];
        }
        x[col] = v / m[col * n + col];
    }
    Some(x)
}

/// Determinant by elimination.
pub fn det(a: &[f64], n: usize) -> f64 {
    let mut m = a.to_vec();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap();
        if m[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            d = -d;
        }
        d *= m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
        }
    }
    d
}

/// Cholesky test for positive definiteness.
pub fn is_positive_definite(a: &[f64], n: usize) -> bool {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 1e-12 {
                    return false;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    true
}

/// Joint covariance of (X, Z) with unit variances: `[[1, ρᵀ], [ρ, Σ]]`.
pub fn joint(rho: &[f64], sigma: &[f64]) -> Vec<f64> {
    let m = rho.len();
    let n = m + 1;
    let mut j = vec![0.0; n * n];
    j[0] = 1.0;
    for a in 0..m {
        j[a + 1] = rho[a];
        j[(a + 1) * n] = rho[a];
        for b in 0..m {
            j[(a + 1) * n + b + 1] = sigma[a * m + b];
        }
    }
    j
}

/// `ρᵀ Σ⁻¹ ρ` via elimination, `None` if Σ is singular.
pub fn explained(rho: &[f64], sigma: &[f64]) -> Option<f64> {
    let x = solve(sigma, rho, rho.len())?;
    Some(rho.iter().zip(&x).map(|(a, b)| a * b).sum())
}

/// I(X; Z) for unit-variance Gaussians from determinants:
/// `½ ln(det Σ_Z · 1 / det Σ_joint)`.
pub fn mi_by_determinants(rho: &[f64], sigma: &[f64]) -> f64 {
    let m = rho.len();
    0.5 * (det(sigma, m) / det(&joint(rho, sigma), m + 1)).ln()
}

/// Mutual information of a standard bivariate normal with correlation `r`
/// by midpoint quadrature of `∬ p ln(p / (p_x p_y))` on `[-L, L]²`.
pub fn bivariate_mi_quadrature(r: f64, half_width: f64, cells: usize) -> f64 {
    let h = 2.0 * half_width / cells as f64;
    let det = 1.0 - r * r;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * det.sqrt());
    let phi = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut total = 0.0;
    for a in 0..cells {
        let x = -half_width + (a as f64 + 0.5) * h;
        for b in 0..cells {
            let y = -half_width + (b as f64 + 0.5) * h;
            let q = (x * x - 2.0 * r * x * y + y * y) / det;
            let p = norm * (-0.5 * q).exp();
            if p > 0.0 {
                total += p * (p / (phi(x) * phi(y))).ln() * h * h;
            }
        }
    }
    total
}

/// Mean and variance of the density proportional to
/// `N(x; 0, 1) · Π_j N(z_j; ρ_j x, 1 − ρ_j²)`, by quadrature on a fine grid.
pub fn ci_posterior_by_quadrature(rho: &[f64], z: &[f64]) -> (f64, f64) {
    let (lo, hi, cells) = (-12.0, 12.0, 240_000);
    let h = (hi - lo) / cells as f64;
    let mut log_w = Vec::with_capacity(cells);
    for c in 0..cells {
        let x = lo + (c as f64 + 0.5) * h;
        let mut l = -0.5 * x * x;
        for (r, zj) in rho.iter().zip(z) {
            let v = 1.0 - r * r;
            l += -0.5 * (zj - r * x).powi(2) / v;
        }
        log_w.push(l);
    }
    let peak = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (c, l) in log_w.iter().enumerate() {
        let x = lo + (c as f64 + 0.5) * h;
        let w = (l - peak).exp();
        s0 += w;
        s1 += w * x;
        s2 += w * x * x;
    }
    let mean = s1 / s0;
    (mean, s2 / s0 - mean * mean)
}

/// KL(N(m1, v1) || N(m2, v2)).
pub fn gaussian_kl(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    0.5 * ((v2 / v1).ln() + (v1 + (m1 - m2).powi(2)) / v2 - 1.0)
}

/// SplitMix64, a tiny self-contained generator for oracle sampling.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Box-Muller standard normal.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Lower Cholesky factor (row-major) of a positive-definite matrix.
pub fn cholesky(a: &[f64], n: usize) -> Vec<f64> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = if i == j { s.sqrt() } else { s / l[j * n + j] };
        }
    }
    l
}

/// Monte-Carlo estimate of `E_z KL(p(x|z) || p_CI(x|z))` for unit-variance
/// Gaussians, where `p_CI` is built by multiplying the per-latent likelihoods
/// (closed-form product of Gaussians evaluated per sample).
pub fn ci_synergy_monte_carlo(rho: &[f64], sigma: &[f64], samples: usize, seed: u64) -> f64 {
    let m = rho.len();
    let l = cholesky(sigma, m);
    let beta = solve(sigma, rho, m).unwrap();
    let s2 = 1.0 - rho.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
    // Product of N(x;0,1) and N(z_j; ρ_j x, 1-ρ_j²) has precision 1 + Σ ρ_j²/(1-ρ_j²).
    let precision = 1.0 + rho.iter().map(|r| r * r / (1.0 - r * r)).sum::<f64>();
    let v = 1.0 / precision;
    let mut rng = SplitMix(seed);
    let mut total = 0.0;
    let mut e = vec![0.0; m];
    let mut z = vec![0.0; m];
    for _ in 0..samples {
        e.iter_mut().for_each(|x| *x = rng.normal());
        for i in 0..m {
            z[i] = (0..=i).map(|k| l[i * m + k] * e[k]).sum();
        }
        let true_mean: f64 = beta.iter().zip(&z).map(|(b, zj)| b * zj).sum();
        let ci_mean = v * rho.iter().zip(&z).map(|(r, zj)| r * zj / (1.0 - r * r)).sum::<f64>();
        total += gaussian_kl(true_mean, s2, ci_mean, v);
    }
    total / samples as f64
}

/// Brute-force minimum of `ρᵀΣ⁻¹ρ` over correlation matrices Σ with
/// `[[1, ρᵀ], [ρ, Σ]]` positive definite, by a zooming grid over the
/// off-diagonal entries.
pub fn grid_min_explained(rho: &[f64], points: usize, zooms: usize) -> f64 {
    let m = rho.len();
    let pairs: Vec<(usize, usize)> =
        (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
    let d = pairs.len();
    let mut center = vec![0.0; d];
    let mut half = 1.0;
    let mut best = f64::INFINITY;
    let mut best_at: Option<Vec<f64>> = None;
    for _ in 0..zooms {
        let total = points.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut sigma = vec![0.0; m * m];
            for a in 0..m {
                sigma[a * m + a] = 1.0;
            }
            let mut coords = vec![0.0; d];
            for (k, &(a, b)) in pairs.iter().enumerate() {
                let t = (rem % points) as f64 / (points - 1) as f64;
                rem /= points;
                let v = (center[k] - half + 2.0 * half * t).clamp(-0.999_999, 0.999_999);
                coords[k] = v;
                sigma[a * m + b] = v;
                sigma[b * m + a] = v;
            }
            if !is_positive_definite(&joint(rho, &sigma), m + 1) {
                continue;
            }
            if let Some(val) = explained(rho, &sigma) {
                if val < best {
                    best = val;
                    best_at = Some(coords);
                }
            }
        }
        if let Some(c) = &best_at {
            center = c.clone();
        }
        half *= 4.0 / (points - 1) as f64;
    }
    best
}

/// Enumerated Bayes posterior `p(x=1 | z)` of a conditionally independent
/// binary model with prior `prior` and likelihoods `on[j] = p(z_j=1|x=1)`,
/// `off[j] = p(z_j=1|x=0)`.
pub fn naive_bayes_posterior(prior: f64, on: &[f64], off: &[f64], z: &[u8]) -> f64 {
    let mut p1 = prior;
    let mut p0 = 1.0 - prior;
    for j in 0..z.len() {
        if z[j] == 1 {
            p1 *= on[j];
            p0 *= off[j];
        } else {
            p1 *= 1.0 - on[j];
            p0 *= 1.0 - off[j];
        }
    }
    p1 / (p1 + p0)
}

/// Literal CI synergy of a discrete joint given as `p[(z_config, x)]`:
/// `Σ_{z,x} p(z,x) ln(p(x|z) / p_CI(x|z))` with
/// `p_CI(x|z) ∝ p(x) Π_j p(z_j|x)`.
pub fn literal_ci_synergy(arities: &[usize], target: usize, p: &dyn Fn(&[usize], usize) -> f64) -> f64 {
    let m = arities.len();
    let configs: usize = arities.iter().product();
    let decode = |mut c: usize| {
        let mut z = vec![0; m];
        for j in 0..m {
            z[j] = c % arities[j];
            c /= arities[j];
        }
        z
    };
    let mut px = vec![0.0; target];
    let mut pzx: Vec<Vec<Vec<f64>>> = arities.iter().map(|&a| vec![vec![0.0; target]; a]).collect();
    for c in 0..configs {
        let z = decode(c);
        for x in 0..target {
            let v = p(&z, x);
            px[x] += v;
            for j in 0..m {
                pzx[j][z[j]][x] += v;
            }
        }
    }
    let mut total = 0.0;
    for c in 0..configs {
        let z = decode(c);
        let pz: f64 = (0..target).map(|x| p(&z, x)).sum();
        if pz == 0.0 {
            continue;
        }
        let unnorm: Vec<f64> = (0..target)
            .map(|x| {
                if px[x] == 0.0 {
                    return 0.0;
                }
                let mut v = px[x];
                for j in 0..m {
                    v *= pzx[j][z[j]][x] / px[x];
                }
                v
            })
            .collect();
        let zsum: f64 = unnorm.iter().sum();
        for x in 0..target {
            let v = p(&z, x);
            if v > 0.0 {
                total += v * ((v / pz) / (unnorm[x] / zsum)).ln();
            }
        }
    }
    total
}

pub mod grad {
    use minsyn::neuralnet::{
        loss, Activation, AutoencoderModel, DecoderKind, LayerSpec, Mode, Regularizer,
    };
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub const H: f64 = 1e-4;
    pub const FLOOR: f64 = 1e-6;

    /// One randomized gradient-check case.
    #[derive(Debug, Clone)]
    pub struct Case {
        pub kind: DecoderKind,
        pub regularizer: Regularizer,
        pub seed: u64,
    }

    /// Kinds x regularizers (inactive and active), cycled to `count` cases.
    pub fn cases(count: usize) -> Vec<Case> {
        let kinds = [
            DecoderKind::LearnedSigmoid,
            DecoderKind::LearnedLinear,
            DecoderKind::MinsynBinary,
            DecoderKind::MinsynGaussian,
        ];
        let regs = [
            Regularizer::None,
            Regularizer::Dropout { p: 0.0 },
            Regularizer::InputGaussianNoise { sigma: 0.0 },
            Regularizer::LatentGaussianNoise { sigma: 0.0 },
            Regularizer::Dropout { p: 0.3 },
            Regularizer::InputGaussianNoise { sigma: 0.2 },
            Regularizer::LatentGaussianNoise { sigma: 0.2 },
        ];
        (0..count)
            .map(|i| Case {
                kind: kinds[i % kinds.len()],
                regularizer: regs[(i + i / kinds.len()) % regs.len()],
                seed: 100 + i as u64,
            })
            .collect()
    }

    /// Builds a small model and batch for a case.
    pub fn build(case: &Case) -> (AutoencoderModel, Array2<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
        let inputs = rng.random_range(3..7);
        let hidden = rng.random_range(2..5);
        let latents = rng.random_range(2..4);
        let batch = rng.random_range(4..8);
        let mid = if rng.random::<bool>() {
            Activation::Softplus
        } else {
            Activation::Sigmoid
        };
        let last = match case.kind {
            DecoderKind::MinsynBinary => Activation::Sigmoid,
            _ if rng.random::<bool>() => Activation::Softplus,
            _ => Activation::Sigmoid,
        };
        let layers = [
            LayerSpec { size: hidden, activation: mid },
            LayerSpec { size: latents, activation: last },
        ];
        let mut model =
            AutoencoderModel::new(inputs, &layers, case.kind, case.regularizer, 0.99, &mut rng)
                .unwrap();
        // Nonzero biases so every path is exercised.
        for t in model.parameters_mut() {
            for v in t.iter_mut() {
                *v += rng.random_range(-0.3..0.3);
            }
        }
        let x = Array2::from_shape_simple_fn((batch, inputs), || rng.random_range(0.05..0.95));
        (model, x)
    }

    /// Largest relative error between analytic and central-difference
    /// gradients over every parameter.
    pub fn max_relative_error(case: &Case) -> f64 {
        let (model, x) = build(case);
        let noise_seed = case.seed ^ 0xABCD;
        let frozen = if case.kind.is_minsyn() {
            let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
            model.forward(x.view(), Mode::Train, &mut rng).unwrap().params
        } else {
            None
        };
        let objective = |m: &AutoencoderModel| -> f64 {
            let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
            let fwd = match &frozen {
                Some(p) => m.forward_frozen(x.view(), &mut rng, p).unwrap(),
                None => m.forward(x.view(), Mode::Train, &mut rng).unwrap(),
            };
            loss(x.view(), fwd.xbar.view(), m.loss_kind).unwrap()
        };
        let analytic: Vec<Vec<f64>> = {
            let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
            let grads = match &frozen {
                Some(p) => model.gradients_frozen(x.view(), &mut rng, p).unwrap().1,
                None => model.gradients(x.view(), &mut rng).unwrap().1,
            };
            grads.tensors().iter().map(|t| t.to_vec()).collect()
        };
        let mut probe = model.clone();
        let mut worst: f64 = 0.0;
        for (t, grad) in analytic.iter().enumerate() {
            for k in 0..grad.len() {
                let orig = probe.parameters_mut()[t][k];
                let mut central = |h: f64| {
                    probe.parameters_mut()[t][k] = orig + h;
                    let up = objective(&probe);
                    probe.parameters_mut()[t][k] = orig - h;
                    let down = objective(&probe);
                    probe.parameters_mut()[t][k] = orig;
                    (up - down) / (2.0 * h)
                };
                // Richardson step removes the h² term of the central difference.
                let coarse = central(H);
                let numeric = (4.0 * central(H / 2.0) - coarse) / 3.0;
                let err = (grad[k] - numeric).abs() / grad[k].abs().max(numeric.abs()).max(FLOOR);
                worst = worst.max(err);
            }
        }
        worst
    }
}

pub mod fixtures {
    use std::path::{Path, PathBuf};

    use minsyn::cli::{
        dataset_build, Checkpoint, ExperimentConfig, TrainedModel, DEFAULT_LETTER_GRID,
        DEFAULT_WORD_LIST,
    };
    use minsyn::datasets::{IdxTensor, WordDataset};
    use minsyn::neuralnet::{pca_fit, train_autoencoder};
    use ndarray::Array2;

    use super::SplitMix;

    pub fn workspace_root() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
    }

    /// Builds the bundled word benchmark into `out`.
    pub fn build_words(out: &Path) -> WordDataset {
        dataset_build(
            &workspace_root().join("data/letters"),
            out,
            Path::new(DEFAULT_WORD_LIST),
            Path::new(DEFAULT_LETTER_GRID),
        )
        .unwrap()
    }

    /// Random IDX tensor of rank 1 to 4, u8 or i32.
    pub fn random_idx(rng: &mut SplitMix) -> IdxTensor {
        let rank = 1 + (rng.next_u64() % 4) as usize;
        let dims: Vec<usize> = (0..rank).map(|_| (rng.next_u64() % 6) as usize).collect();
        let len: usize = dims.iter().product();
        if rng.next_u64() % 2 == 0 {
            IdxTensor::u8(dims, (0..len).map(|_| rng.next_u64() as u8).collect()).unwrap()
        } else {
            IdxTensor::i32(dims, (0..len).map(|_| rng.next_u64() as i32).collect()).unwrap()
        }
    }

    fn config(model: &str, training: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"name": "fixture", "dataset": {{"kind": "words", "path": "unused"}},
                "model": {model}, {training}
                "evaluation": {{"loss": "mse"}}, "output_dir": "unused"}}"#
        ))
        .unwrap()
    }

    /// One checkpoint per model family, trained briefly on random data.
    pub fn sample_checkpoints() -> Vec<Checkpoint> {
        let mut rng = SplitMix(41);
        let data = Array2::from_shape_simple_fn((24, 10), || rng.uniform());
        let mut out = Vec::new();
        for (kind, act, reg) in [
            ("learned_sigmoid", "softplus", r#"{"kind": "input_gaussian_noise", "sigma": 0.1}"#),
            ("learned_linear", "softplus", r#"{"kind": "dropout", "p": 0.2}"#),
            ("minsyn_binary", "sigmoid", r#"{"kind": "none"}"#),
            ("minsyn_gaussian", "softplus", r#"{"kind": "latent_gaussian_noise", "sigma": 0.3}"#),
        ] {
            let cfg = config(
                &format!(
                    r#"{{"kind": "autoencoder", "decoder_kind": "{kind}",
                        "encoder": [{{"size": 5, "activation": "{act}"}}, {{"size": 3, "activation": "{act}"}}]}}"#
                ),
                &format!(
                    r#""training": {{"epochs": 3, "batch_size": 5, "lr": 0.01, "seed": 3, "regularizer": {reg}}},"#
                ),
            );
            let trained = train_autoencoder(&cfg.train_config().unwrap(), data.view()).unwrap();
            out.push(Checkpoint {
                config: cfg,
                model: TrainedModel::Autoencoder(trained.model),
                history: trained.history,
            });
        }
        out.push(Checkpoint {
            config: config(r#"{"kind": "pca", "components": 4}"#, ""),
            model: TrainedModel::Pca(pca_fit(data.view(), 4).unwrap()),
            history: Vec::new(),
        });
        out
    }

    /// Every file in `dir`, sorted by name, with its bytes.
    pub fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    }
}

/// Average over factors of `-Σ_k C_jk ln C_jk`, with
/// `C_jk = Σ_{i in S_k} w_ij² / Σ_i w_ij²`; weights are `rows[i][j]`.
pub fn acc_literal(rows: &[Vec<f64>], layout: &[usize], slots: usize) -> f64 {
    let m = rows[0].len();
    let mut total = 0.0;
    for j in 0..m {
        let all: f64 = rows.iter().map(|r| r[j] * r[j]).sum();
        for k in 0..slots {
            let part: f64 = rows
                .iter()
                .zip(layout)
                .filter(|(_, &s)| s == k)
                .map(|(r, _)| r[j] * r[j])
                .sum();
            let c = part / all;
            if c > 0.0 {
                total -= c * c.ln();
            }
        }
    }
    total / m as f64
}
