//! Binary model and index files (little-endian).
//!
//! Model: `TITL-EMB`, version u32, hyperparameters in declaration order,
//! vocabulary count u64, per word a u32-length-prefixed UTF-8 string and a u64
//! count, then the input-word, input-bucket and output matrices as row-major
//! f32.
//!
//! Index: `TITL-IDX`, version u32, dim u32, entry count u64, then per entry
//! the id u64, a u32-length-prefixed UTF-8 text and `dim` f32 values.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::{Path, PathBuf};

use super::index::{IndexEntry, SentenceIndex};
use super::matrix::Matrix;
use super::model::{EmbeddingModel, Hyperparams, Vocab};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 8] = b"TITL-EMB";
pub const MODEL_VERSION: u32 = 1;
pub const INDEX_MAGIC: &[u8; 8] = b"TITL-IDX";
pub const INDEX_VERSION: u32 = 1;

const CHUNK_FLOATS: usize = 16 * 1024;

struct FieldWriter<W> {
    inner: W,
    source: PathBuf,
}

impl<W: Write> FieldWriter<W> {
    fn bytes(&mut self, b: &[u8]) -> Result<()> {
        self.inner
            .write_all(b)
            .map_err(|e| Error::io(&self.source, e))
    }

    fn u32(&mut self, v: u32) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }

    fn u64(&mut self, v: u64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }

    fn f64(&mut self, v: f64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }

    fn string(&mut self, s: &str) -> Result<()> {
        let len = u32::try_from(s.len())
            .map_err(|_| Error::Validation(format!("string of {} bytes is too long", s.len())))?;
        self.u32(len)?;
        self.bytes(s.as_bytes())
    }

    fn floats(&mut self, values: &[f32]) -> Result<()> {
        let mut buf = Vec::with_capacity(CHUNK_FLOATS * 4);
        for chunk in values.chunks(CHUNK_FLOATS) {
            buf.clear();
            for v in chunk {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            self.bytes(&buf)?;
        }
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| Error::io(&self.source, e))
    }
}

struct FieldReader<R> {
    inner: R,
    source: PathBuf,
    /// Bytes left in the underlying file, when known.
    remaining: Option<u64>,
}

impl<R: Read> FieldReader<R> {
    fn fill(&mut self, field: &str, buf: &mut [u8]) -> Result<()> {
        match self.inner.read_exact(buf) {
            Ok(()) => {
                if let Some(r) = &mut self.remaining {
                    *r = r.saturating_sub(buf.len() as u64);
                }
                Ok(())
            }
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => {
                Err(Error::format(field, "file is truncated"))
            }
            Err(e) => Err(Error::io(&self.source, e)),
        }
    }

    fn array<const N: usize>(&mut self, field: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.fill(field, &mut buf)?;
        Ok(buf)
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        self.array(field).map(u32::from_le_bytes)
    }

    fn u64(&mut self, field: &str) -> Result<u64> {
        self.array(field).map(u64::from_le_bytes)
    }

    fn f64(&mut self, field: &str) -> Result<f64> {
        self.array(field).map(f64::from_le_bytes)
    }

    /// Fails early when a declared length cannot fit in the rest of the file.
    fn ensure_available(&self, field: &str, bytes: u128) -> Result<()> {
        match self.remaining {
            Some(r) if u128::from(r) < bytes => Err(Error::format(
                field,
                format!("file is truncated: needs {bytes} more bytes, {r} remain"),
            )),
            _ => Ok(()),
        }
    }

    fn string(&mut self, field: &str) -> Result<String> {
        let len = self.u32(field)? as usize;
        self.ensure_available(field, len as u128)?;
        let mut buf = Vec::new();
        let read = (&mut self.inner)
            .take(len as u64)
            .read_to_end(&mut buf)
            .map_err(|e| Error::io(&self.source, e))?;
        if read < len {
            return Err(Error::format(field, "file is truncated"));
        }
        if let Some(r) = &mut self.remaining {
            *r = r.saturating_sub(len as u64);
        }
        String::from_utf8(buf).map_err(|e| {
            Error::format(field, format!("invalid UTF-8 at byte {}", e.utf8_error().valid_up_to()))
        })
    }

    fn floats(&mut self, field: &str, count: usize) -> Result<Vec<f32>> {
        self.ensure_available(field, count as u128 * 4)?;
        let mut out = Vec::with_capacity(count.min(1 << 20));
        let mut buf = vec![0u8; CHUNK_FLOATS * 4];
        let mut left = count;
        while left > 0 {
            let n = left.min(CHUNK_FLOATS);
            self.fill(field, &mut buf[..n * 4])?;
            out.extend(
                buf[..n * 4]
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            );
            left -= n;
        }
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::format(field, "contains non-finite values"));
        }
        Ok(out)
    }

    fn magic(&mut self, expected: &[u8; 8]) -> Result<()> {
        let found: [u8; 8] = self.array("magic")?;
        if &found != expected {
            return Err(Error::format(
                "magic",
                format!(
                    "expected {:?}, found {:?}",
                    String::from_utf8_lossy(expected),
                    String::from_utf8_lossy(&found)
                ),
            ));
        }
        Ok(())
    }

    fn version(&mut self, expected: u32) -> Result<()> {
        let v = self.u32("version")?;
        if v != expected {
            return Err(Error::format(
                "version",
                format!("unsupported format version {v} (expected {expected})"),
            ));
        }
        Ok(())
    }

    fn expect_eof(&mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe) {
            Ok(0) => Ok(()),
            Ok(_) => Err(Error::format("eof", "unexpected trailing bytes")),
            Err(e) => Err(Error::io(&self.source, e)),
        }
    }
}

fn to_usize(field: &str, v: u64) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::format(field, format!("value {v} is too large")))
}

pub fn write_model<W: Write>(model: &EmbeddingModel, writer: W) -> Result<()> {
    write_model_to(model, writer, PathBuf::from("<stream>"))
}

fn write_model_to<W: Write>(model: &EmbeddingModel, writer: W, source: PathBuf) -> Result<()> {
    let mut w = FieldWriter {
        inner: writer,
        source,
    };
    let hp = model.hyperparams();
    w.bytes(MODEL_MAGIC)?;
    w.u32(MODEL_VERSION)?;
    w.u32(hp.dim)?;
    w.u32(hp.window)?;
    w.u32(hp.negatives)?;
    w.u32(hp.epochs)?;
    w.f64(hp.lr0)?;
    w.u32(hp.ngram_min)?;
    w.u32(hp.ngram_max)?;
    w.u64(hp.buckets)?;
    w.u32(hp.min_count)?;
    w.f64(hp.subsample_t)?;
    w.u64(hp.seed)?;
    w.u64(model.vocab().len() as u64)?;
    for (word, count) in model.vocab().iter() {
        w.string(word)?;
        w.u64(count)?;
    }
    w.floats(model.input_word_vectors().as_slice())?;
    w.floats(model.input_bucket_vectors().as_slice())?;
    w.floats(model.output_vectors().as_slice())?;
    w.finish()
}

pub fn read_model<R: Read>(reader: R) -> Result<EmbeddingModel> {
    read_model_from(FieldReader {
        inner: reader,
        source: PathBuf::from("<stream>"),
        remaining: None,
    })
}

fn read_model_from<R: Read>(mut r: FieldReader<R>) -> Result<EmbeddingModel> {
    r.magic(MODEL_MAGIC)?;
    r.version(MODEL_VERSION)?;
    let hp = Hyperparams {
        dim: r.u32("dim")?,
        window: r.u32("window")?,
        negatives: r.u32("negatives")?,
        epochs: r.u32("epochs")?,
        lr0: r.f64("lr0")?,
        ngram_min: r.u32("ngram_min")?,
        ngram_max: r.u32("ngram_max")?,
        buckets: r.u64("buckets")?,
        min_count: r.u32("min_count")?,
        subsample_t: r.f64("subsample_t")?,
        seed: r.u64("seed")?,
    };
    hp.validate()
        .map_err(|e| Error::format("hyperparams", e.to_string()))?;
    let vocab_len = to_usize("vocab_count", r.u64("vocab_count")?)?;
    // Each vocabulary entry takes at least 12 bytes.
    r.ensure_available("vocab_count", vocab_len as u128 * 12)?;
    let mut entries = Vec::with_capacity(vocab_len.min(1 << 20));
    for i in 0..vocab_len {
        let word = r.string(&format!("vocab[{i}].word"))?;
        let count = r.u64(&format!("vocab[{i}].count"))?;
        entries.push((word, count));
    }
    let vocab = Vocab::from_entries(entries).map_err(|e| Error::format("vocab", e.to_string()))?;

    let dim = hp.dim as usize;
    let buckets = to_usize("buckets", hp.buckets)?;
    let matrix = |r: &mut FieldReader<R>, field: &str, rows: usize| -> Result<Matrix> {
        let count = rows
            .checked_mul(dim)
            .ok_or_else(|| Error::format(field, "dimensions overflow"))?;
        Ok(Matrix::from_vec(rows, dim, r.floats(field, count)?))
    };
    let input_words = matrix(&mut r, "input_word_vectors", vocab.len())?;
    let input_buckets = matrix(&mut r, "input_bucket_vectors", buckets)?;
    let output = matrix(&mut r, "output_vectors", vocab.len())?;
    r.expect_eof()?;
    EmbeddingModel::from_parts(hp, vocab, input_words, input_buckets, output)
        .map_err(|e| Error::format("model", e.to_string()))
}

pub fn save_model(model: &EmbeddingModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_model_to(model, BufWriter::new(file), path.to_path_buf())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EmbeddingModel> {
    let path = path.as_ref();
    let (file, len) = open(path)?;
    read_model_from(FieldReader {
        inner: BufReader::new(file),
        source: path.to_path_buf(),
        remaining: Some(len),
    })
}

pub fn write_index<W: Write>(index: &SentenceIndex, writer: W) -> Result<()> {
    write_index_to(index, writer, PathBuf::from("<stream>"))
}

fn write_index_to<W: Write>(index: &SentenceIndex, writer: W, source: PathBuf) -> Result<()> {
    let mut w = FieldWriter {
        inner: writer,
        source,
    };
    let dim = u32::try_from(index.dim())
        .map_err(|_| Error::Validation("index dimension exceeds u32".into()))?;
    w.bytes(INDEX_MAGIC)?;
    w.u32(INDEX_VERSION)?;
    w.u32(dim)?;
    w.u64(index.len() as u64)?;
    for entry in index.entries() {
        w.u64(entry.id)?;
        w.string(&entry.text)?;
        w.floats(&entry.vector)?;
    }
    w.finish()
}

pub fn read_index<R: Read>(reader: R) -> Result<SentenceIndex> {
    read_index_from(FieldReader {
        inner: reader,
        source: PathBuf::from("<stream>"),
        remaining: None,
    })
}

fn read_index_from<R: Read>(mut r: FieldReader<R>) -> Result<SentenceIndex> {
    r.magic(INDEX_MAGIC)?;
    r.version(INDEX_VERSION)?;
    let dim = r.u32("dim")? as usize;
    if dim == 0 {
        return Err(Error::format("dim", "dimension must be positive"));
    }
    let count = to_usize("entry_count", r.u64("entry_count")?)?;
    // id + text length + vector per entry.
    r.ensure_available("entry_count", count as u128 * (12 + 4 * dim as u128))?;
    let mut entries = Vec::with_capacity(count.min(1 << 20));
    for i in 0..count {
        let id = r.u64(&format!("entries[{i}].id"))?;
        let text = r.string(&format!("entries[{i}].text"))?;
        let vector = r
            .floats(&format!("entries[{i}].vector"), dim)
            .map_err(|e| match e {
                Error::Format { field, message } => Error::Format {
                    field,
                    message: format!("{message} (header dim = {dim})"),
                },
                other => other,
            })?;
        entries.push(IndexEntry { id, text, vector });
    }
    r.expect_eof()
        .map_err(|_| Error::format("dim", format!("trailing bytes after {count} entries of dim {dim}")))?;
    SentenceIndex::new(dim, entries).map_err(|e| Error::format("entries", e.to_string()))
}

pub fn save_index(index: &SentenceIndex, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_index_to(index, BufWriter::new(file), path.to_path_buf())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<SentenceIndex> {
    let path = path.as_ref();
    let (file, len) = open(path)?;
    read_index_from(FieldReader {
        inner: BufReader::new(file),
        source: path.to_path_buf(),
        remaining: Some(len),
    })
}

fn open(path: &Path) -> Result<(File, u64)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    Ok((file, len))
}
