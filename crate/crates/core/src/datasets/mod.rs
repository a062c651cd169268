//! IDX image files, the word-image benchmark and test-time corruptions.

mod idx;
mod mnist;
mod noise;
mod words;

pub use idx::{find_idx, parse_idx, read_idx_file, write_idx, write_idx_file, IdxData, IdxTensor};
pub use mnist::{load_mnist, MnistSplit};
pub use noise::{apply_noise, NoiseKind, CHUNK};
pub use words::{
    build_word_dataset, char_layout, load_letter_glyphs, read_letter_grid, read_word_list,
    select_first_glyphs, transpose_glyph, LetterGlyphs, WordDataset, WordManifest, GLYPH,
    MANIFEST_FILE, MANIFEST_VERSION,
};
