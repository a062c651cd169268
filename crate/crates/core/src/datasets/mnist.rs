use std::path::Path;

use ndarray::{s, Array2};

use super::idx::{find_idx, read_idx_file};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MnistSplit {
    Train,
    Test,
}

impl MnistSplit {
    fn prefix(self) -> &'static str {
        match self {
            MnistSplit::Train => "train",
            MnistSplit::Test => "t10k",
        }
    }
}

/// Digits in [0, 1] (`count x 784`) and their labels, optionally truncated
/// to the first `limit` entries.
pub fn load_mnist(
    dir: &Path,
    split: MnistSplit,
    limit: Option<usize>,
) -> Result<(Array2<f64>, Vec<i64>)> {
    let p = split.prefix();
    let missing =
        |what: &str| Error::Config(format!("no MNIST {p} {what} file in {}", dir.display()));
    let images = find_idx(
        dir,
        &[
            &format!("{p}-images-idx3-ubyte"),
            &format!("{p}-images.idx3-ubyte"),
        ],
    )
    .ok_or_else(|| missing("images"))?;
    let labels = find_idx(
        dir,
        &[
            &format!("{p}-labels-idx1-ubyte"),
            &format!("{p}-labels.idx1-ubyte"),
        ],
    )
    .ok_or_else(|| missing("labels"))?;
    let images = read_idx_file(&images)?.as_images()?;
    let labels = read_idx_file(&labels)?.integers();
    if labels.len() != images.nrows() {
        return Err(Error::Shape(format!(
            "{} MNIST labels for {} images",
            labels.len(),
            images.nrows()
        )));
    }
    let n = limit.unwrap_or(labels.len()).min(labels.len());
    Ok((images.slice(s![..n, ..]).to_owned(), labels[..n].to_vec()))
}
