//! Disentanglement score, reconstruction losses and result tables.

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::neuralnet::{loss, AutoencoderModel, LossKind, Pca};

/// Average character concentration in nats.
///
/// `weights` is `n x m` (pixel by factor). For each factor the squared weight
/// mass is split over the `slots` given by `char_layout`, and the entropy of
/// that split is averaged over factors. A factor with no weight at all scores
/// the maximum `ln slots`.
pub fn acc_score(weights: ArrayView2<f64>, char_layout: &[usize], slots: usize) -> Result<f64> {
    let (n, m) = weights.dim();
    if n != char_layout.len() {
        return Err(Error::Shape(format!(
            "{n} weight rows but {} layout entries",
            char_layout.len()
        )));
    }
    if m == 0 || slots == 0 {
        return Err(Error::Shape("need at least one factor and one slot".into()));
    }
    if let Some(&bad) = char_layout.iter().find(|&&s| s >= slots) {
        return Err(Error::Shape(format!(
            "layout slot {bad} is not below {slots}"
        )));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Domain("decoder weights must be finite".into()));
    }
    let mut total = 0.0;
    let mut mass = vec![0.0; slots];
    for j in 0..m {
        mass.fill(0.0);
        for (i, &slot) in char_layout.iter().enumerate() {
            let w = weights[(i, j)];
            mass[slot] += w * w;
        }
        let sum: f64 = mass.iter().sum();
        if sum == 0.0 {
            log::warn!("factor {j} has no decoder weight; scoring it ln {slots}");
            total += (slots as f64).ln();
            continue;
        }
        total -= mass
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| {
                let p = c / sum;
                p * p.ln()
            })
            .sum::<f64>();
    }
    Ok(total / m as f64)
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

/// Anything that maps a batch of inputs to reconstructions.
pub trait Reconstructor {
    fn reconstruct_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>>;
}

impl Reconstructor for AutoencoderModel {
    fn reconstruct_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.reconstruct(x)
    }
}

impl Reconstructor for Pca {
    fn reconstruct_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.reconstruct(x)
    }
}

/// Loss of a model's reconstructions of `input` against `target`.
pub fn corrupted_loss<M: Reconstructor + ?Sized>(
    model: &M,
    input: ArrayView2<f64>,
    target: ArrayView2<f64>,
    kind: LossKind,
) -> Result<f64> {
    let xbar = model.reconstruct_batch(input)?;
    match kind {
        // Linear reconstructions may leave [0, 1]; clip them for the log loss.
        LossKind::Bce => loss(target, xbar.mapv(|v| v.clamp(0.0, 1.0)).view(), kind),
        LossKind::Mse => loss(target, xbar.view(), kind),
    }
}

/// Per-sample summed loss averaged over each split.
pub fn reconstruction_losses<M: Reconstructor + ?Sized>(
    model: &M,
    train: ArrayView2<f64>,
    test: ArrayView2<f64>,
    kind: LossKind,
) -> Result<(f64, f64)> {
    Ok((
        corrupted_loss(model, train, train, kind)?,
        corrupted_loss(model, test, test, kind)?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub train_loss: f64,
    pub test_loss: f64,
    pub acc: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub csv: String,
    pub text: String,
}

const HEADER: [&str; 4] = ["method", "train_loss", "test_loss", "acc"];

/// Rows sorted by method name, as CSV and as an aligned text table.
pub fn build_report(rows: &[ReportRow]) -> Result<Report> {
    if rows.is_empty() {
        return Err(Error::Config("a report needs at least one row".into()));
    }
    let mut seen = BTreeSet::new();
    for row in rows {
        if !seen.insert(row.method.as_str()) {
            return Err(Error::Config(format!("duplicate method {:?}", row.method)));
        }
        if row.method.contains([',', '"', '\n']) {
            return Err(Error::Config(format!(
                "method name {:?} is not CSV-safe",
                row.method
            )));
        }
    }
    let mut sorted: Vec<&ReportRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.method.cmp(&b.method));
    let cells: Vec<[String; 4]> = sorted
        .iter()
        .map(|r| {
            [
                r.method.clone(),
                format!("{:.4}", r.train_loss),
                format!("{:.4}", r.test_loss),
                format!("{:.4}", r.acc),
            ]
        })
        .collect();
    let mut csv = HEADER.join(",");
    csv.push('\n');
    for c in &cells {
        csv.push_str(&c.join(","));
        csv.push('\n');
    }
    let mut widths = HEADER.map(str::len);
    for c in &cells {
        for (w, cell) in widths.iter_mut().zip(c) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |c: [&str; 4]| {
        let mut s = format!("{:<w$}", c[0], w = widths[0]);
        for k in 1..4 {
            s.push_str(&format!("  {:>w$}", c[k], w = widths[k]));
        }
        s.push('\n');
        s
    };
    let mut text = line(HEADER);
    for c in &cells {
        text.push_str(&line([&c[0], &c[1], &c[2], &c[3]]));
    }
    Ok(Report { csv, text })
}
