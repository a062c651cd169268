//! Experiment configs, checkpoints and the subcommands behind the binary.

mod checkpoint;
mod commands;
mod config;
mod curve;

pub use checkpoint::{Checkpoint, TrainedModel, FORMAT_VERSION, MAGIC};
pub use commands::{
    dataset_build, eval_csv, evaluate, load_data, report, synergy_curve_files, train, EvalRow,
    LoadedData, CHECKPOINT_FILE, CONFIG_FILE, DEFAULT_LETTER_GRID, DEFAULT_WORD_LIST, EVAL_FILE,
    HISTORY_FILE,
};
pub use config::{
    DatasetConfig, DatasetKind, EvaluationConfig, ExperimentConfig, ModelConfig, TrainingConfig,
    DATA_DIR_ENV,
};
pub use curve::{curve_csv, curve_svg, synergy_curve, CurveRow, CURVE_HEADER};
