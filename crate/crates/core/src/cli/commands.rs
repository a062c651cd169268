use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::checkpoint::{Checkpoint, TrainedModel};
use super::config::{DatasetConfig, DatasetKind, ExperimentConfig, ModelConfig};
use super::curve::{curve_csv, curve_svg, synergy_curve};
use crate::datasets::{
    apply_noise, build_word_dataset, load_letter_glyphs, load_mnist, read_letter_grid,
    read_word_list, MnistSplit, NoiseKind, WordDataset, WordManifest,
};
use crate::error::{Error, Result};
use crate::metrics::{acc_score, build_report, corrupted_loss, nats_to_bits, Report, ReportRow};
use crate::neuralnet::{pca_fit, train_autoencoder, LossKind};

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const HISTORY_FILE: &str = "history.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const EVAL_FILE: &str = "eval.csv";

/// Bundled word list and letter grid.
pub const DEFAULT_WORD_LIST: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../data/words/three_letter_words.txt"
);
pub const DEFAULT_LETTER_GRID: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../data/words/letters_by_position.json"
);

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Train and test images of a configured dataset.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub train: Array2<f64>,
    pub test: Array2<f64>,
    pub height: usize,
    pub width: usize,
    pub words: Option<WordDataset>,
}

pub fn load_data(cfg: &DatasetConfig) -> Result<LoadedData> {
    let dir = cfg.resolve_path()?;
    if !dir.is_dir() {
        return Err(Error::Config(format!(
            "dataset directory {} does not exist",
            dir.display()
        )));
    }
    let truncate = |m: Array2<f64>, limit: Option<usize>| match limit {
        Some(n) if n < m.nrows() => m.slice(ndarray::s![..n, ..]).to_owned(),
        _ => m,
    };
    match cfg.kind {
        DatasetKind::Words => {
            let words = WordDataset::load(&dir)?;
            Ok(LoadedData {
                train: truncate(words.train_images.clone(), cfg.train_limit),
                test: truncate(words.test_images.clone(), cfg.test_limit),
                height: words.height,
                width: words.width,
                words: Some(words),
            })
        }
        DatasetKind::Mnist => Ok(LoadedData {
            train: load_mnist(&dir, MnistSplit::Train, cfg.train_limit)?.0,
            test: load_mnist(&dir, MnistSplit::Test, cfg.test_limit)?.0,
            height: 28,
            width: 28,
            words: None,
        }),
    }
}

/// Composes the word benchmark and writes it under `out`. Inputs are read
/// completely before anything is written.
pub fn dataset_build(
    letters_dir: &Path,
    out: &Path,
    word_list: &Path,
    letter_grid: &Path,
) -> Result<WordDataset> {
    if !letters_dir.is_dir() {
        return Err(Error::Config(format!(
            "letter image directory {} does not exist",
            letters_dir.display()
        )));
    }
    let glyphs = load_letter_glyphs(letters_dir)?;
    let words = read_word_list(word_list)?;
    let grid = read_letter_grid(letter_grid)?;
    let ds = build_word_dataset(&glyphs, &words, &grid)?;
    ds.save(out)?;
    Ok(ds)
}

/// Trains (or fits) the configured model and writes the checkpoint, the
/// loss history and a copy of the config into the output directory.
pub fn train(cfg: &ExperimentConfig) -> Result<Checkpoint> {
    cfg.validate()?;
    let data = load_data(&cfg.dataset)?;
    let (model, history) = match &cfg.model {
        ModelConfig::Pca { components } => (
            TrainedModel::Pca(pca_fit(data.train.view(), *components)?),
            Vec::new(),
        ),
        ModelConfig::Autoencoder { .. } => {
            let out = train_autoencoder(&cfg.train_config()?, data.train.view())?;
            (TrainedModel::Autoencoder(out.model), out.history)
        }
    };
    let ckpt = Checkpoint {
        config: cfg.clone(),
        model,
        history,
    };
    create_dir(&cfg.output_dir)?;
    ckpt.save(&cfg.output_dir.join(CHECKPOINT_FILE))?;
    let mut csv = String::from("epoch,loss\n");
    for (e, l) in ckpt.history.iter().enumerate() {
        csv.push_str(&format!("{},{l}\n", e + 1));
    }
    write(&cfg.output_dir.join(HISTORY_FILE), csv)?;
    let mut json = serde_json::to_string_pretty(cfg)?;
    json.push('\n');
    write(&cfg.output_dir.join(CONFIG_FILE), json)?;
    Ok(ckpt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub noise: NoiseKind,
    pub loss: f64,
}

/// Loss between clean test images and reconstructions of corrupted ones.
pub fn evaluate(
    model: &TrainedModel,
    data: &LoadedData,
    noise: &[NoiseKind],
    loss: LossKind,
    seed: u64,
) -> Result<Vec<EvalRow>> {
    if model.inputs() != data.test.ncols() {
        return Err(Error::Shape(format!(
            "model expects {} pixels, dataset has {}",
            model.inputs(),
            data.test.ncols()
        )));
    }
    noise
        .iter()
        .map(|&kind| {
            let input = apply_noise(data.test.view(), data.height, data.width, kind, seed)?;
            Ok(EvalRow {
                noise: kind,
                loss: corrupted_loss(model, input.view(), data.test.view(), loss)?,
            })
        })
        .collect()
}

pub fn eval_csv(rows: &[EvalRow], loss: LossKind) -> String {
    let name = match loss {
        LossKind::Bce => "bce",
        LossKind::Mse => "mse",
    };
    let mut out = format!("noise,label,{name}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.noise.tag(),
            r.noise.label(),
            r.loss
        ));
    }
    out
}

pub fn synergy_curve_files(
    rho1: f64,
    rho2: f64,
    steps: usize,
    out: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let rows = synergy_curve(rho1, rho2, steps)?;
    create_dir(out)?;
    let csv = out.join("synergy_curve.csv");
    let svg = out.join("synergy_curve.svg");
    write(&csv, curve_csv(&rows))?;
    write(&svg, curve_svg(&rows, rho1, rho2))?;
    Ok((csv, svg))
}

/// Table of train/test loss and ACC over completed word-benchmark runs.
pub fn report(run_dirs: &[PathBuf], loss: LossKind, bits: bool) -> Result<Report> {
    if run_dirs.is_empty() {
        return Err(Error::Config(
            "report needs at least one run directory".into(),
        ));
    }
    let mut manifest: Option<WordManifest> = None;
    let mut rows = Vec::new();
    for dir in run_dirs {
        let ckpt = Checkpoint::load(&dir.join(CHECKPOINT_FILE))?;
        let data = load_data(&ckpt.config.dataset)?;
        let words = data.words.as_ref().ok_or_else(|| {
            Error::Config(format!(
                "{} was not trained on the word benchmark",
                dir.display()
            ))
        })?;
        let m = words.manifest();
        match &manifest {
            None => manifest = Some(m),
            Some(first) if *first != m => {
                return Err(Error::Config(format!(
                    "{} uses a different word dataset than the other runs",
                    dir.display()
                )))
            }
            Some(_) => {}
        }
        let weights = ckpt.model.decoder_weights()?;
        let mut acc = acc_score(weights.view(), &words.char_layout, words.slots())?;
        if bits {
            acc = nats_to_bits(acc);
        }
        rows.push(ReportRow {
            method: ckpt.config.name.clone(),
            train_loss: corrupted_loss(&ckpt.model, data.train.view(), data.train.view(), loss)?,
            test_loss: corrupted_loss(&ckpt.model, data.test.view(), data.test.view(), loss)?,
            acc,
        });
    }
    build_report(&rows)
}
