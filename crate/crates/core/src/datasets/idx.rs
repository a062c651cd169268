use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use ndarray::Array2;

use crate::error::{Error, Result};

const TYPE_U8: u8 = 0x08;
const TYPE_I32: u8 = 0x0C;
const MAX_DIMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxData {
    U8(Vec<u8>),
    I32(Vec<i32>),
}

impl IdxData {
    pub fn len(&self) -> usize {
        match self {
            IdxData::U8(v) => v.len(),
            IdxData::I32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An IDX tensor: big-endian header with a type byte and dimension sizes,
/// followed by a row-major payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxTensor {
    pub dims: Vec<usize>,
    pub data: IdxData,
}

fn parse_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

fn take<'a>(bytes: &'a [u8], at: usize, n: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < at + n {
        return Err(parse_error(bytes.len(), format!("truncated {what}")));
    }
    Ok(&bytes[at..at + n])
}

impl IdxTensor {
    pub fn new(dims: Vec<usize>, data: IdxData) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_DIMS {
            return Err(Error::Shape(format!(
                "IDX supports 1..={MAX_DIMS} dimensions"
            )));
        }
        if dims.iter().any(|&d| d > u32::MAX as usize) {
            return Err(Error::Shape("IDX dimension does not fit in 32 bits".into()));
        }
        let count: usize = dims.iter().product();
        if count != data.len() {
            return Err(Error::Shape(format!(
                "dims {dims:?} need {count} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn u8(dims: Vec<usize>, data: Vec<u8>) -> Result<Self> {
        Self::new(dims, IdxData::U8(data))
    }

    pub fn i32(dims: Vec<usize>, data: Vec<i32>) -> Result<Self> {
        Self::new(dims, IdxData::I32(data))
    }

    /// Byte values divided by 255.
    pub fn unit_values(&self) -> Result<Vec<f64>> {
        match &self.data {
            IdxData::U8(v) => Ok(v.iter().map(|&b| f64::from(b) / 255.0).collect()),
            IdxData::I32(_) => Err(Error::Shape("expected an unsigned-byte tensor".into())),
        }
    }

    /// Integer view of the payload (labels).
    pub fn integers(&self) -> Vec<i64> {
        match &self.data {
            IdxData::U8(v) => v.iter().map(|&b| i64::from(b)).collect(),
            IdxData::I32(v) => v.iter().map(|&b| i64::from(b)).collect(),
        }
    }

    /// Images as a `count x (rows*cols)` matrix in [0, 1].
    pub fn as_images(&self) -> Result<Array2<f64>> {
        if self.dims.len() != 3 {
            return Err(Error::Shape(format!(
                "image tensor needs 3 dimensions, has {:?}",
                self.dims
            )));
        }
        let values = self.unit_values()?;
        let pixels = self.dims[1] * self.dims[2];
        Array2::from_shape_vec((self.dims[0], pixels), values)
            .map_err(|e| Error::Shape(e.to_string()))
    }
}

pub fn parse_idx(bytes: &[u8]) -> Result<IdxTensor> {
    let magic = take(bytes, 0, 4, "magic number")?;
    if magic[0] != 0 || magic[1] != 0 {
        return Err(parse_error(0, "bad magic: first two bytes must be zero"));
    }
    let ty = magic[2];
    let width = match ty {
        TYPE_U8 => 1,
        TYPE_I32 => 4,
        other => {
            return Err(parse_error(
                2,
                format!("unsupported element type 0x{other:02X}"),
            ))
        }
    };
    let ndims = magic[3] as usize;
    if ndims == 0 || ndims > MAX_DIMS {
        return Err(parse_error(
            3,
            format!("unsupported dimension count {ndims}"),
        ));
    }
    let header = take(bytes, 4, 4 * ndims, "dimension sizes")?;
    let dims: Vec<usize> = header
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .and_then(|c| c.checked_mul(width))
        .ok_or_else(|| parse_error(4, "tensor size overflows"))?;
    let start = 4 + 4 * ndims;
    let payload = take(bytes, start, count, "payload")?;
    if bytes.len() > start + count {
        return Err(parse_error(start + count, "trailing bytes after payload"));
    }
    let data = match ty {
        TYPE_U8 => IdxData::U8(payload.to_vec()),
        _ => IdxData::I32(
            payload
                .chunks_exact(4)
                .map(|c| i32::from_be_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        ),
    };
    IdxTensor::new(dims, data)
}

pub fn write_idx(tensor: &IdxTensor) -> Vec<u8> {
    let ty = match tensor.data {
        IdxData::U8(_) => TYPE_U8,
        IdxData::I32(_) => TYPE_I32,
    };
    let mut out = vec![0, 0, ty, tensor.dims.len() as u8];
    for &d in &tensor.dims {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    match &tensor.data {
        IdxData::U8(v) => out.extend_from_slice(v),
        IdxData::I32(v) => v
            .iter()
            .for_each(|x| out.extend_from_slice(&x.to_be_bytes())),
    }
    out
}

/// Reads a raw or gzip-compressed IDX file.
pub fn read_idx_file(path: &Path) -> Result<IdxTensor> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bytes = if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        out
    } else {
        raw
    };
    parse_idx(&bytes).map_err(|e| match e {
        Error::Parse { offset, message } => Error::Parse {
            offset,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

pub fn write_idx_file(path: &Path, tensor: &IdxTensor) -> Result<()> {
    fs::write(path, write_idx(tensor)).map_err(|e| Error::io(path, e))
}

/// First existing file among `stem` and `stem.gz` for each stem, in order.
pub fn find_idx(dir: &Path, stems: &[&str]) -> Option<PathBuf> {
    stems.iter().find_map(|stem| {
        [stem.to_string(), format!("{stem}.gz")]
            .into_iter()
            .map(|name| dir.join(name))
            .find(|p| p.is_file())
    })
}
