use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side of the square chunks zeroed by [`NoiseKind::EraseChunk`].
pub const CHUNK: usize = 4;

/// Test-time corruptions of 28-row image rasters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    BottomHalf,
    RightHalf,
    EraseChunk,
    VStripe,
    HStripe,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 6] = [
        NoiseKind::None,
        NoiseKind::BottomHalf,
        NoiseKind::RightHalf,
        NoiseKind::EraseChunk,
        NoiseKind::VStripe,
        NoiseKind::HStripe,
    ];

    /// Row label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            NoiseKind::None => "no noise",
            NoiseKind::BottomHalf => "bottom half",
            NoiseKind::RightHalf => "right half",
            NoiseKind::EraseChunk => "erase chunk",
            NoiseKind::VStripe => "v stripe",
            NoiseKind::HStripe => "h stripe",
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::BottomHalf => "bottom_half",
            NoiseKind::RightHalf => "right_half",
            NoiseKind::EraseChunk => "erase_chunk",
            NoiseKind::VStripe => "v_stripe",
            NoiseKind::HStripe => "h_stripe",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            NoiseKind::EraseChunk | NoiseKind::VStripe | NoiseKind::HStripe
        )
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown noise kind {s:?}")))
    }
}

/// Corrupts each row of `images` (a `height x width` raster per row).
/// Image `i` draws from its own stream of a generator seeded by `seed`, so
/// the result does not depend on how images are batched.
pub fn apply_noise(
    images: ArrayView2<f64>,
    height: usize,
    width: usize,
    kind: NoiseKind,
    seed: u64,
) -> Result<Array2<f64>> {
    if height == 0 || width == 0 || images.ncols() != height * width {
        return Err(Error::Shape(format!(
            "rows of {} pixels are not {height}x{width} rasters",
            images.ncols()
        )));
    }
    let mut out = images.to_owned();
    if kind == NoiseKind::None {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (i, mut img) in out.rows_mut().into_iter().enumerate() {
        rng.set_stream(i as u64);
        rng.set_word_pos(0);
        let mut set = |r: usize, c: usize, v: f64| img[r * width + c] = v;
        match kind {
            NoiseKind::None => {}
            NoiseKind::BottomHalf => {
                for r in height / 2..height {
                    (0..width).for_each(|c| set(r, c, 0.0));
                }
            }
            NoiseKind::RightHalf => {
                for r in 0..height {
                    (width / 2..width).for_each(|c| set(r, c, 0.0));
                }
            }
            NoiseKind::EraseChunk => {
                for r0 in (0..height).step_by(CHUNK) {
                    for c0 in (0..width).step_by(CHUNK) {
                        if rng.random_bool(0.5) {
                            for r in r0..(r0 + CHUNK).min(height) {
                                (c0..(c0 + CHUNK).min(width)).for_each(|c| set(r, c, 0.0));
                            }
                        }
                    }
                }
            }
            NoiseKind::VStripe => {
                for c in 0..width {
                    if rng.random_bool(0.5) {
                        (0..height).for_each(|r| set(r, c, 0.5));
                    }
                }
            }
            NoiseKind::HStripe => {
                for r in 0..height {
                    if rng.random_bool(0.5) {
                        (0..width).for_each(|c| set(r, c, 0.5));
                    }
                }
            }
        }
    }
    Ok(out)
}
