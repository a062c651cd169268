use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::idx::{find_idx, read_idx_file, write_idx_file, IdxTensor};
use crate::error::{Error, Result};

/// Glyph side length in pixels.
pub const GLYPH: usize = 28;
pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

const LETTER_STEMS: [(&str, &str); 2] = [
    (
        "emnist-letters-train-images-idx3-ubyte",
        "emnist-letters-train-labels-idx1-ubyte",
    ),
    ("letters-images-idx3-ubyte", "letters-labels-idx1-ubyte"),
];

/// One upright 28x28 glyph per lowercase letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetterGlyphs {
    pub glyphs: BTreeMap<char, Vec<u8>>,
    /// Position of each glyph in the source file.
    pub indices: BTreeMap<char, usize>,
    pub source: String,
}

/// Transposes a column-major glyph (EMNIST storage order) into row-major.
pub fn transpose_glyph(raw: &[u8]) -> Vec<u8> {
    let mut out = vec![0; GLYPH * GLYPH];
    for r in 0..GLYPH {
        for c in 0..GLYPH {
            out[r * GLYPH + c] = raw[c * GLYPH + r];
        }
    }
    out
}

/// First image of each letter label (1 = 'a' .. 26 = 'z'), transposed upright.
pub fn select_first_glyphs(
    images: &IdxTensor,
    labels: &IdxTensor,
    source: &str,
) -> Result<LetterGlyphs> {
    if images.dims.len() != 3 || images.dims[1] != GLYPH || images.dims[2] != GLYPH {
        return Err(Error::Shape(format!(
            "letter images have dims {:?}",
            images.dims
        )));
    }
    let labels = labels.integers();
    if labels.len() != images.dims[0] {
        return Err(Error::Shape(format!(
            "{} labels for {} letter images",
            labels.len(),
            images.dims[0]
        )));
    }
    let bytes = match &images.data {
        super::idx::IdxData::U8(b) => b,
        _ => return Err(Error::Shape("letter images must be unsigned bytes".into())),
    };
    let mut out = LetterGlyphs {
        glyphs: BTreeMap::new(),
        indices: BTreeMap::new(),
        source: source.to_string(),
    };
    for (i, &label) in labels.iter().enumerate() {
        if !(1..=26).contains(&label) {
            continue;
        }
        let letter = (b'a' + (label - 1) as u8) as char;
        if out.glyphs.contains_key(&letter) {
            continue;
        }
        let raw = &bytes[i * GLYPH * GLYPH..(i + 1) * GLYPH * GLYPH];
        out.glyphs.insert(letter, transpose_glyph(raw));
        out.indices.insert(letter, i);
    }
    Ok(out)
}

/// Loads letter glyphs from EMNIST-letters IDX files in `dir` (raw or gzip),
/// falling back to the `letters-*` names used by the bundled glyph set.
pub fn load_letter_glyphs(dir: &Path) -> Result<LetterGlyphs> {
    for (images, labels) in LETTER_STEMS {
        if let (Some(ip), Some(lp)) = (find_idx(dir, &[images]), find_idx(dir, &[labels])) {
            let name = ip
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            return select_first_glyphs(&read_idx_file(&ip)?, &read_idx_file(&lp)?, &name);
        }
    }
    Err(Error::Config(format!(
        "no letter IDX files ({}) found in {}",
        LETTER_STEMS.map(|(i, _)| i).join(" or "),
        dir.display()
    )))
}

/// Lowercase words, one per line; blank lines and `#` comments are skipped.
pub fn read_word_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

/// A JSON array of per-position letter lists, e.g. `[["a","b"],["c"]]`.
pub fn read_letter_grid(path: &Path) -> Result<Vec<Vec<char>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let grid: Vec<Vec<char>> = serde_json::from_str(&text)?;
    Ok(grid)
}

/// Word-image benchmark: every combination of per-position letters rendered
/// from fixed glyphs; dictionary words train, the rest test.
#[derive(Debug, Clone, PartialEq)]
pub struct WordDataset {
    pub height: usize,
    pub width: usize,
    pub train_images: Array2<f64>,
    pub test_images: Array2<f64>,
    pub train_words: Vec<String>,
    pub test_words: Vec<String>,
    pub letters_by_position: Vec<Vec<char>>,
    /// Character slot of every pixel.
    pub char_layout: Vec<usize>,
    pub glyph_source: String,
    pub glyph_indices: BTreeMap<char, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordManifest {
    pub version: u32,
    pub image_height: usize,
    pub image_width: usize,
    pub train_count: usize,
    pub test_count: usize,
    pub letters_by_position: Vec<Vec<char>>,
    pub glyph_source: String,
    pub glyph_indices: BTreeMap<char, usize>,
    pub train_words: Vec<String>,
    pub test_words: Vec<String>,
    pub char_layout: Vec<usize>,
    pub files: BTreeMap<String, String>,
}

const FILES: [(&str, &str); 4] = [
    ("train_images", "words-train-images-idx3-ubyte"),
    ("train_labels", "words-train-labels-idx1-ubyte"),
    ("test_images", "words-test-images-idx3-ubyte"),
    ("test_labels", "words-test-labels-idx1-ubyte"),
];

fn grid_index(word: &str, grid: &[Vec<char>]) -> Option<usize> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() != grid.len() {
        return None;
    }
    chars
        .iter()
        .zip(grid)
        .try_fold(0usize, |acc, (ch, letters)| {
            letters
                .iter()
                .position(|l| l == ch)
                .map(|p| acc * letters.len() + p)
        })
}

fn grid_word(mut index: usize, grid: &[Vec<char>]) -> String {
    let mut chars = vec![' '; grid.len()];
    for (pos, letters) in grid.iter().enumerate().rev() {
        chars[pos] = letters[index % letters.len()];
        index /= letters.len();
    }
    chars.into_iter().collect()
}

fn render(words: &[String], glyphs: &BTreeMap<char, Vec<u8>>, len: usize) -> Array2<f64> {
    let width = GLYPH * len;
    let mut out = Array2::zeros((words.len(), GLYPH * width));
    for (w, word) in words.iter().enumerate() {
        for (slot, ch) in word.chars().enumerate() {
            let glyph = &glyphs[&ch];
            for r in 0..GLYPH {
                for c in 0..GLYPH {
                    out[(w, r * width + slot * GLYPH + c)] =
                        f64::from(glyph[r * GLYPH + c]) / 255.0;
                }
            }
        }
    }
    out
}

pub fn char_layout(len: usize) -> Vec<usize> {
    let width = GLYPH * len;
    (0..GLYPH * width).map(|p| (p % width) / GLYPH).collect()
}

pub fn build_word_dataset(
    glyphs: &LetterGlyphs,
    word_list: &[String],
    letters_by_position: &[Vec<char>],
) -> Result<WordDataset> {
    if letters_by_position.is_empty() {
        return Err(Error::Config("the letter grid is empty".into()));
    }
    for (pos, letters) in letters_by_position.iter().enumerate() {
        let distinct: BTreeSet<&char> = letters.iter().collect();
        if letters.is_empty() || distinct.len() != letters.len() {
            return Err(Error::Config(format!(
                "position {pos} needs a nonempty list of distinct letters"
            )));
        }
        for ch in letters {
            match glyphs.glyphs.get(ch) {
                None => return Err(Error::Config(format!("no glyph for letter {ch:?}"))),
                Some(g) if g.len() != GLYPH * GLYPH => {
                    return Err(Error::Shape(format!("glyph for {ch:?} is not 28x28")))
                }
                Some(_) => {}
            }
        }
    }
    let total: usize = letters_by_position.iter().map(Vec::len).product();
    let mut is_train = vec![false; total];
    let mut skipped = 0usize;
    for word in word_list {
        match grid_index(word, letters_by_position) {
            Some(i) => is_train[i] = true,
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::info!("skipped {skipped} words not expressible in the letter grid");
    }
    let (mut train_words, mut test_words) = (Vec::new(), Vec::new());
    for (i, &train) in is_train.iter().enumerate() {
        let word = grid_word(i, letters_by_position);
        if train {
            train_words.push(word);
        } else {
            test_words.push(word);
        }
    }
    let len = letters_by_position.len();
    Ok(WordDataset {
        height: GLYPH,
        width: GLYPH * len,
        train_images: render(&train_words, &glyphs.glyphs, len),
        test_images: render(&test_words, &glyphs.glyphs, len),
        train_words,
        test_words,
        letters_by_position: letters_by_position.to_vec(),
        char_layout: char_layout(len),
        glyph_source: glyphs.source.clone(),
        glyph_indices: glyphs.indices.clone(),
    })
}

fn to_bytes(images: &Array2<f64>) -> Vec<u8> {
    images
        .iter()
        .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect()
}

impl WordDataset {
    pub fn slots(&self) -> usize {
        self.letters_by_position.len()
    }

    pub fn grid_labels(&self, words: &[String]) -> Vec<i32> {
        words
            .iter()
            .map(|w| grid_index(w, &self.letters_by_position).expect("grid word") as i32)
            .collect()
    }

    pub fn manifest(&self) -> WordManifest {
        WordManifest {
            version: MANIFEST_VERSION,
            image_height: self.height,
            image_width: self.width,
            train_count: self.train_words.len(),
            test_count: self.test_words.len(),
            letters_by_position: self.letters_by_position.clone(),
            glyph_source: self.glyph_source.clone(),
            glyph_indices: self.glyph_indices.clone(),
            train_words: self.train_words.clone(),
            test_words: self.test_words.clone(),
            char_layout: self.char_layout.clone(),
            files: FILES
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Writes the four IDX files and the JSON manifest into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let dims = |n: usize| vec![n, self.height, self.width];
        let parts = [
            IdxTensor::u8(dims(self.train_words.len()), to_bytes(&self.train_images))?,
            IdxTensor::i32(
                vec![self.train_words.len()],
                self.grid_labels(&self.train_words),
            )?,
            IdxTensor::u8(dims(self.test_words.len()), to_bytes(&self.test_images))?,
            IdxTensor::i32(
                vec![self.test_words.len()],
                self.grid_labels(&self.test_words),
            )?,
        ];
        for ((_, name), tensor) in FILES.iter().zip(&parts) {
            write_idx_file(&dir.join(name), tensor)?;
        }
        let mut json = serde_json::to_string_pretty(&self.manifest())?;
        json.push('\n');
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, json).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: WordManifest = serde_json::from_str(&text)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Config(format!(
                "unsupported manifest version {}",
                m.version
            )));
        }
        let file = |key: &str| -> Result<IdxTensor> {
            let name = m
                .files
                .get(key)
                .ok_or_else(|| Error::Config(format!("manifest lacks file entry {key:?}")))?;
            read_idx_file(&dir.join(name))
        };
        let train_images = file("train_images")?.as_images()?;
        let test_images = file("test_images")?.as_images()?;
        let ds = WordDataset {
            height: m.image_height,
            width: m.image_width,
            train_images,
            test_images,
            train_words: m.train_words,
            test_words: m.test_words,
            letters_by_position: m.letters_by_position,
            char_layout: m.char_layout,
            glyph_source: m.glyph_source,
            glyph_indices: m.glyph_indices,
        };
        let consistent = ds.train_images.nrows() == ds.train_words.len()
            && ds.test_images.nrows() == ds.test_words.len()
            && ds.train_images.ncols() == ds.height * ds.width
            && ds.test_images.ncols() == ds.height * ds.width
            && ds.char_layout.len() == ds.height * ds.width
            && m.train_count == ds.train_words.len()
            && m.test_count == ds.test_words.len()
            && file("train_labels")?.integers()
                == ds
                    .grid_labels(&ds.train_words)
                    .iter()
                    .map(|&v| i64::from(v))
                    .collect::<Vec<_>>();
        if !consistent {
            return Err(Error::Shape(format!(
                "word dataset in {} disagrees with its manifest",
                dir.display()
            )));
        }
        Ok(ds)
    }
}
