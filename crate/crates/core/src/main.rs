use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use minsyn::cli::{self, Checkpoint, DATA_DIR_ENV};
use minsyn::datasets::NoiseKind;
use minsyn::neuralnet::LossKind;
use minsyn::{Error, Result};

#[derive(Parser)]
#[command(
    name = "minsyn",
    version,
    about = "Synergy measures and MinSyn autoencoder experiments"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Bce,
    Mse,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Bce => LossKind::Bce,
            LossArg::Mse => LossKind::Mse,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compose the word-image benchmark from letter IDX files.
    DatasetBuild {
        /// Directory with EMNIST-letters (or bundled `letters-*`) IDX files.
        /// Defaults to $MINSYN_DATA_DIR.
        #[arg(long)]
        letters_dir: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = cli::DEFAULT_WORD_LIST)]
        word_list: PathBuf,
        #[arg(long, default_value = cli::DEFAULT_LETTER_GRID)]
        letter_grid: PathBuf,
    },
    /// Train the model described by a JSON experiment config.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a checkpoint on corrupted test images.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Dataset directory; defaults to the one in the checkpoint's config.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Comma-separated noise kinds; defaults to the config's list.
        #[arg(long, value_delimiter = ',')]
        noise: Vec<String>,
        #[arg(long, value_enum)]
        loss: Option<LossArg>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV; defaults to eval.csv next to the checkpoint.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Information measures of two correlated latents over their feasible range.
    SynergyCurve {
        #[arg(long, allow_hyphen_values = true)]
        rho1: f64,
        #[arg(long, allow_hyphen_values = true)]
        rho2: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train/test loss and ACC table over completed runs.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "mse")]
        loss: LossArg,
        /// Report ACC in bits instead of nats.
        #[arg(long)]
        bits: bool,
        /// Directory for report.csv and report.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn data_dir(arg: Option<PathBuf>) -> Result<PathBuf> {
    arg.or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .ok_or_else(|| Error::Config(format!("pass --letters-dir or set {DATA_DIR_ENV}")))
}

fn write(path: &std::path::Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(args: Args) -> Result<()> {
    match args.command {
        Command::DatasetBuild {
            letters_dir,
            out,
            word_list,
            letter_grid,
        } => {
            let ds = cli::dataset_build(&data_dir(letters_dir)?, &out, &word_list, &letter_grid)?;
            println!(
                "train {} test {}",
                ds.train_words.len(),
                ds.test_words.len()
            );
        }
        Command::Train { config } => {
            let cfg = minsyn::cli::ExperimentConfig::load(&config)?;
            let ckpt = cli::train(&cfg)?;
            let out = cfg.output_dir.join(cli::CHECKPOINT_FILE);
            match ckpt.history.last() {
                Some(l) => println!(
                    "{} epochs, final loss {l:.6}, wrote {}",
                    ckpt.history.len(),
                    out.display()
                ),
                None => println!("wrote {}", out.display()),
            }
        }
        Command::Eval {
            checkpoint,
            dataset,
            noise,
            loss,
            seed,
            out,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let mut dcfg = ckpt.config.dataset.clone();
            if dataset.is_some() {
                dcfg.path = dataset;
            }
            let kinds = if noise.is_empty() {
                ckpt.config.evaluation.noise.clone()
            } else {
                noise
                    .iter()
                    .map(|s| s.parse::<NoiseKind>())
                    .collect::<Result<Vec<_>>>()?
            };
            let loss = loss
                .map(LossKind::from)
                .unwrap_or(ckpt.config.evaluation.loss);
            let data = cli::load_data(&dcfg)?;
            let seed = seed.unwrap_or(ckpt.config.evaluation.noise_seed);
            let rows = cli::evaluate(&ckpt.model, &data, &kinds, loss, seed)?;
            let csv = cli::eval_csv(&rows, loss);
            let out = out.unwrap_or_else(|| {
                checkpoint
                    .parent()
                    .unwrap_or(std::path::Path::new("."))
                    .join(cli::EVAL_FILE)
            });
            write(&out, &csv)?;
            print!("{csv}");
        }
        Command::SynergyCurve {
            rho1,
            rho2,
            steps,
            out,
        } => {
            let (csv, svg) = cli::synergy_curve_files(rho1, rho2, steps, &out)?;
            println!("wrote {} and {}", csv.display(), svg.display());
        }
        Command::Report {
            runs,
            loss,
            bits,
            out,
        } => {
            let report = cli::report(&runs, loss.into(), bits)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                    path: dir.clone(),
                    source: e,
                })?;
                write(&dir.join("report.csv"), &report.csv)?;
                write(&dir.join("report.txt"), &report.text)?;
            }
            print!("{}", report.text);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
