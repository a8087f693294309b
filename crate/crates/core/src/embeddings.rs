//! Word embedding matrices and the standard interchange formats.
//!
//! Three on-disk formats are supported: text with a `V D` header (word2vec
//! `.vec` / fastText), headerless text (GloVe), and the word2vec binary
//! format. Vectors are stored internally as `f64` regardless of the file
//! precision so that downstream gram accumulation and eigendecomposition
//! stay tight.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// How words are matched against the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LookupMode {
    /// Exact string match only.
    Exact,
    /// Exact match wins; otherwise the lowest row id whose lowercased form
    /// matches the lowercased query.
    #[default]
    CaseFold,
}

/// An ordered set of unique words with O(1) word -> row id lookup.
///
/// The order is the input-file order, which for the common pre-trained
/// models is descending frequency.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    folded: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        let mut folded = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::DuplicateWord(w.clone()));
            }
            folded.entry(w.to_lowercase()).or_insert(i);
        }
        Ok(Vocabulary {
            words,
            index,
            folded,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Row id of `word` under the given lookup mode.
    pub fn lookup(&self, word: &str, mode: LookupMode) -> Option<usize> {
        match self.index.get(word) {
            Some(&i) => Some(i),
            None => match mode {
                LookupMode::Exact => None,
                LookupMode::CaseFold => self.folded.get(&word.to_lowercase()).copied(),
            },
        }
    }
}

/// A vocabulary paired with a dense row-major matrix; row `i` is the vector
/// of word `i`. Immutable after construction and safe to share across
/// threads.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    vocab: Vocabulary,
    data: Array2<f64>,
}

impl EmbeddingMatrix {
    /// Build from parts, checking the row count and that every entry is
    /// finite.
    pub fn new(vocab: Vocabulary, data: Array2<f64>) -> Result<Self> {
        if vocab.is_empty() {
            return Err(Error::EmptyEmbedding);
        }
        if data.nrows() != vocab.len() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                actual: data.nrows(),
            });
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            let (r, c) = (bad / data.ncols(), bad % data.ncols());
            return Err(Error::Parse {
                path: "<memory>".into(),
                line: r + 1,
                msg: format!("non-finite value at row {r}, column {c}"),
            });
        }
        Ok(EmbeddingMatrix { vocab, data })
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn row(&self, id: usize) -> ArrayView1<'_, f64> {
        self.data.row(id)
    }

    pub fn lookup(&self, word: &str, mode: LookupMode) -> Option<usize> {
        self.vocab.lookup(word, mode)
    }

    /// Replace the matrix while keeping the vocabulary. The new matrix must
    /// have the same number of rows.
    pub(crate) fn with_data(&self, data: Array2<f64>) -> Result<Self> {
        EmbeddingMatrix::new(self.vocab.clone(), data)
    }

    /// The first `min(k, len)` rows as their own matrix.
    pub fn take_prefix(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyEmbedding);
        }
        let k = k.min(self.len());
        if k == self.len() {
            return Ok(self.clone());
        }
        let words = self.vocab.words[..k].to_vec();
        let data = self.data.slice(ndarray::s![..k, ..]).to_owned();
        EmbeddingMatrix::new(Vocabulary::new(words)?, data)
    }
}

/// On-disk embedding formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    /// First line `V D`, then `word v1 ... vD` per line (word2vec/fastText
    /// text).
    TextWithHeader,
    /// `word v1 ... vD` per line, no header (GloVe); `d` inferred from the
    /// first line.
    TextHeaderless,
    /// ASCII header `V D\n`, then per word: the word's bytes, a single
    /// 0x20, and D little-endian 32-bit floats (word2vec binary).
    Binary,
}

/// Load an embedding file, keeping at most `max_vocab` unique words in file
/// order. Duplicate words keep their first occurrence; later ones are
/// dropped and counted in a warning.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    format: EmbeddingFormat,
    max_vocab: Option<usize>,
) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let (words, flat, dim, duplicates) = match format {
        EmbeddingFormat::TextWithHeader => load_text(path, &mut reader, true, max_vocab)?,
        EmbeddingFormat::TextHeaderless => load_text(path, &mut reader, false, max_vocab)?,
        EmbeddingFormat::Binary => load_binary(path, &mut reader, max_vocab)?,
    };
    if duplicates > 0 {
        log::warn!(
            "{}: dropped {duplicates} duplicate word(s), keeping first occurrences",
            path.display()
        );
    }
    if words.is_empty() {
        return Err(Error::EmptyEmbedding);
    }
    let rows = words.len();
    let data = Array2::from_shape_vec((rows, dim), flat).expect("row-major shape");
    EmbeddingMatrix::new(Vocabulary::new(words)?, data)
}

fn parse_header(path: &Path, line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let (v, d) = match (it.next(), it.next(), it.next()) {
        (Some(v), Some(d), None) => (v, d),
        _ => {
            return Err(Error::parse(
                path,
                1,
                format!("malformed header {line:?}, expected \"V D\""),
            ))
        }
    };
    let v: usize = v
        .parse()
        .map_err(|_| Error::parse(path, 1, format!("malformed header: bad count {v:?}")))?;
    let d: usize = d
        .parse()
        .map_err(|_| Error::parse(path, 1, format!("malformed header: bad dimension {d:?}")))?;
    if d == 0 {
        return Err(Error::parse(path, 1, "malformed header: dimension is 0"));
    }
    Ok((v, d))
}

fn load_text(
    path: &Path,
    reader: &mut impl BufRead,
    with_header: bool,
    max_vocab: Option<usize>,
) -> Result<(Vec<String>, Vec<f64>, usize, usize)> {
    let cap = max_vocab.unwrap_or(usize::MAX);
    let mut lines = reader.lines().enumerate();
    let mut declared: Option<(usize, usize)> = None;
    if with_header {
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty file, expected header"))?;
        let first = first.map_err(|e| Error::io(path, e))?;
        declared = Some(parse_header(path, &first)?);
    }

    let mut words = Vec::new();
    let mut flat = Vec::new();
    let mut seen: HashMap<String, ()> = HashMap::new();
    let mut dim: Option<usize> = None;
    let mut duplicates = 0usize;
    let mut rows_read = 0usize;

    for (i, line) in lines {
        let lineno = i + 1;
        if let Some((v, _)) = declared {
            if rows_read == v {
                break;
            }
        }
        let line = line.map_err(|e| Error::io(path, e))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(Error::parse(path, lineno, "empty line"));
        }
        let d = match dim {
            Some(d) => d,
            None => {
                let d = declared.map(|(_, d)| d).unwrap_or(tokens.len() - 1);
                if d == 0 {
                    return Err(Error::parse(path, lineno, "no vector values on first row"));
                }
                dim = Some(d);
                d
            }
        };
        if tokens.len() < d + 1 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {} tokens (word + {d} values), got {}", d + 1, tokens.len()),
            ));
        }
        // Rows can exceed d+1 tokens: some published models contain words
        // with embedded spaces, so the last d tokens are the vector and
        // everything before them is the word.
        let (word_tokens, values) = tokens.split_at(tokens.len() - d);
        let word = word_tokens.join(" ");
        rows_read += 1;
        if seen.insert(word.clone(), ()).is_some() {
            duplicates += 1;
            continue;
        }
        if words.len() == cap {
            // Cap reached; keep scanning only to honor the declared row
            // count, but nothing more is stored.
            break;
        }
        for v in values {
            let x: f64 = v
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad float {v:?}")))?;
            if !x.is_finite() {
                return Err(Error::parse(path, lineno, format!("non-finite value {v:?}")));
            }
            flat.push(x);
        }
        words.push(word);
    }

    if let Some((v, _)) = declared {
        if rows_read < v && words.len() < cap {
            return Err(Error::parse(
                path,
                rows_read + 1,
                format!("header declares {v} rows but file has {rows_read}"),
            ));
        }
    }
    let dim = dim.ok_or(Error::EmptyEmbedding)?;
    Ok((words, flat, dim, duplicates))
}

fn load_binary(
    path: &Path,
    reader: &mut impl BufRead,
    max_vocab: Option<usize>,
) -> Result<(Vec<String>, Vec<f64>, usize, usize)> {
    let cap = max_vocab.unwrap_or(usize::MAX);
    let mut offset: u64 = 0;

    let mut header = Vec::new();
    reader
        .read_until(b'\n', &mut header)
        .map_err(|e| Error::io(path, e))?;
    offset += header.len() as u64;
    let header_str = String::from_utf8_lossy(&header);
    let (v, d) = parse_header(path, header_str.trim_end())?;

    let mut words = Vec::new();
    let mut flat: Vec<f64> = Vec::new();
    let mut seen: HashMap<String, ()> = HashMap::new();
    let mut duplicates = 0usize;
    let mut vec_buf = vec![0f32; d];

    for record in 0..v {
        if words.len() == cap {
            break;
        }
        // Word bytes up to the 0x20 separator; a leading '\n' left over
        // from the previous record's optional terminator is skipped.
        let mut word_bytes = Vec::new();
        reader
            .read_until(b' ', &mut word_bytes)
            .map_err(|e| Error::io(path, e))?;
        offset += word_bytes.len() as u64;
        if word_bytes.pop() != Some(b' ') {
            return Err(Error::ParseAt {
                path: path.into(),
                offset,
                msg: format!("short read in word {} of {v}", record + 1),
            });
        }
        while word_bytes.first() == Some(&b'\n') || word_bytes.first() == Some(&b'\r') {
            word_bytes.remove(0);
        }
        let word = String::from_utf8_lossy(&word_bytes).into_owned();

        reader
            .read_f32_into::<LittleEndian>(&mut vec_buf)
            .map_err(|e| Error::ParseAt {
                path: path.into(),
                offset,
                msg: format!("short read in vector of word {word:?}: {e}"),
            })?;
        offset += 4 * d as u64;
        if let Some(k) = vec_buf.iter().position(|x| !x.is_finite()) {
            return Err(Error::ParseAt {
                path: path.into(),
                offset,
                msg: format!("non-finite value at component {k} of word {word:?}"),
            });
        }

        if seen.insert(word.clone(), ()).is_some() {
            duplicates += 1;
            continue;
        }
        flat.extend(vec_buf.iter().map(|&x| x as f64));
        words.push(word);
    }

    Ok((words, flat, d, duplicates))
}

/// Save embeddings. Text formats emit 6 significant digits; the binary
/// format emits 32-bit floats.
pub fn save_embeddings(
    emb: &EmbeddingMatrix,
    path: impl AsRef<Path>,
    format: EmbeddingFormat,
) -> Result<()> {
    let path = path.as_ref();
    if emb.is_empty() {
        return Err(Error::EmptyEmbedding);
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = match format {
        EmbeddingFormat::TextWithHeader => save_text(emb, &mut w, true),
        EmbeddingFormat::TextHeaderless => save_text(emb, &mut w, false),
        EmbeddingFormat::Binary => save_binary(emb, &mut w),
    };
    res.and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn save_text(emb: &EmbeddingMatrix, w: &mut impl Write, with_header: bool) -> std::io::Result<()> {
    if with_header {
        writeln!(w, "{} {}", emb.len(), emb.dim())?;
    }
    for (i, word) in emb.vocab().words().iter().enumerate() {
        w.write_all(word.as_bytes())?;
        for v in emb.row(i) {
            write!(w, " {}", format_sig(*v, 6))?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn save_binary(emb: &EmbeddingMatrix, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "{} {}", emb.len(), emb.dim())?;
    for (i, word) in emb.vocab().words().iter().enumerate() {
        w.write_all(word.as_bytes())?;
        w.write_all(b" ")?;
        for v in emb.row(i) {
            w.write_f32::<LittleEndian>(*v as f32)?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Format `v` in plain decimal with `sig` significant digits.
fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Scale each nonzero row to unit Euclidean length. Zero rows are left as
/// zero; their ids are returned alongside the matrix.
pub fn normalize_rows(emb: &EmbeddingMatrix) -> (EmbeddingMatrix, Vec<usize>) {
    let mut data = emb.data.clone();
    let mut zero_rows = Vec::new();
    for (i, mut row) in data.rows_mut().into_iter().enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            zero_rows.push(i);
        } else {
            row.mapv_inplace(|v| v / norm);
        }
    }
    let emb = EmbeddingMatrix {
        vocab: emb.vocab.clone(),
        data,
    };
    (emb, zero_rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy(words: &[&str], data: Array2<f64>) -> EmbeddingMatrix {
        let vocab = Vocabulary::new(words.iter().map(|s| s.to_string()).collect()).unwrap();
        EmbeddingMatrix::new(vocab, data).unwrap()
    }

    #[test]
    fn text_header_load() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "5 4").unwrap();
        for i in 0..5 {
            writeln!(f, "w{i} {i} 0.5 -1.25 3").unwrap();
        }
        let emb = load_embeddings(f.path(), EmbeddingFormat::TextWithHeader, None).unwrap();
        assert_eq!(emb.len(), 5);
        assert_eq!(emb.dim(), 4);
        assert_eq!(emb.vocab().word(3), "w3");
        assert_eq!(emb.row(2)[0], 2.0);

        let emb = load_embeddings(f.path(), EmbeddingFormat::TextWithHeader, Some(3)).unwrap();
        assert_eq!(emb.len(), 3);
        assert_eq!(emb.vocab().words(), &["w0", "w1", "w2"]);
    }

    #[test]
    fn text_bad_token_count_names_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "2 3").unwrap();
        writeln!(f, "a 1 2 3").unwrap();
        writeln!(f, "b 1 2").unwrap();
        let err = load_embeddings(f.path(), EmbeddingFormat::TextWithHeader, None).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn text_non_finite_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a 1 nan").unwrap();
        let err = load_embeddings(f.path(), EmbeddingFormat::TextHeaderless, None).unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");
    }

    #[test]
    fn multi_token_word_takes_last_d_values() {
        // published GloVe releases contain a few words with embedded
        // spaces; the last d tokens are the vector
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a 1 2 3").unwrap();
        writeln!(f, ". . . 4 5 6").unwrap();
        let emb = load_embeddings(f.path(), EmbeddingFormat::TextHeaderless, None).unwrap();
        assert_eq!(emb.vocab().words(), &["a", ". . ."]);
        assert_eq!(emb.row(1)[0], 4.0);
    }

    #[test]
    fn headerless_infers_dim() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a 1 2").unwrap();
        writeln!(f, "b 3 4").unwrap();
        let emb = load_embeddings(f.path(), EmbeddingFormat::TextHeaderless, None).unwrap();
        assert_eq!((emb.len(), emb.dim()), (2, 2));
    }

    #[test]
    fn duplicates_keep_first() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a 1 2").unwrap();
        writeln!(f, "b 3 4").unwrap();
        writeln!(f, "a 5 6").unwrap();
        writeln!(f, "c 7 8").unwrap();
        let emb = load_embeddings(f.path(), EmbeddingFormat::TextHeaderless, None).unwrap();
        assert_eq!(emb.vocab().words(), &["a", "b", "c"]);
        assert_eq!(emb.row(0)[0], 1.0);
        // max_vocab counts unique words
        let emb = load_embeddings(f.path(), EmbeddingFormat::TextHeaderless, Some(3)).unwrap();
        assert_eq!(emb.vocab().words(), &["a", "b", "c"]);
    }

    #[test]
    fn binary_round_trip_f32_exact() {
        let emb = toy(
            &["alpha", "beta"],
            array![[0.125, -3.5, 7.0], [1.0e-3, 2.25, -0.75]],
        );
        let f = tempfile::NamedTempFile::new().unwrap();
        save_embeddings(&emb, f.path(), EmbeddingFormat::Binary).unwrap();
        let back = load_embeddings(f.path(), EmbeddingFormat::Binary, None).unwrap();
        assert_eq!(back.vocab().words(), emb.vocab().words());
        for i in 0..emb.len() {
            for j in 0..emb.dim() {
                assert_eq!(back.row(i)[j], emb.row(i)[j] as f32 as f64);
            }
        }
    }

    #[test]
    fn binary_short_read_reports_offset() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"2 3\n").unwrap();
        f.write_all(b"a ").unwrap();
        f.write_all(&1.0f32.to_le_bytes()).unwrap();
        let err = load_embeddings(f.path(), EmbeddingFormat::Binary, None).unwrap_err();
        assert!(matches!(err, Error::ParseAt { .. }), "{err}");
    }

    #[test]
    fn text_round_trip_within_six_digits() {
        let emb = toy(
            &["x", "y"],
            array![[0.123456789, -45.6789123, 0.0], [1.0e-4, 9.87654321, -2.0]],
        );
        let f = tempfile::NamedTempFile::new().unwrap();
        save_embeddings(&emb, f.path(), EmbeddingFormat::TextWithHeader).unwrap();
        let back = load_embeddings(f.path(), EmbeddingFormat::TextWithHeader, None).unwrap();
        let max_abs = emb.data().iter().fold(0f64, |m, v| m.max(v.abs()));
        for i in 0..emb.len() {
            for j in 0..emb.dim() {
                assert!((back.row(i)[j] - emb.row(i)[j]).abs() <= 1e-5 * max_abs);
            }
        }
    }

    #[test]
    fn save_empty_rejected() {
        let vocab = Vocabulary::new(vec![]).unwrap();
        assert!(matches!(
            EmbeddingMatrix::new(vocab, Array2::zeros((0, 3))),
            Err(Error::EmptyEmbedding)
        ));
    }

    #[test]
    fn lookup_modes() {
        let emb = toy(&["Paris", "paris"], array![[1.0], [2.0]]);
        assert_eq!(emb.lookup("Paris", LookupMode::Exact), Some(0));
        assert_eq!(emb.lookup("paris", LookupMode::Exact), Some(1));
        assert_eq!(emb.lookup("PARIS", LookupMode::Exact), None);
        assert_eq!(emb.lookup("PARIS", LookupMode::CaseFold), Some(0));

        let emb = toy(&["Paris"], array![[1.0]]);
        assert_eq!(emb.lookup("paris", LookupMode::CaseFold), Some(0));
        assert_eq!(emb.lookup("Rome", LookupMode::CaseFold), None);
        assert_eq!(emb.lookup("Rome", LookupMode::Exact), None);
    }

    #[test]
    fn normalize_three_four_five() {
        let emb = toy(&["a", "z"], array![[3.0, 4.0], [0.0, 0.0]]);
        let (n, zeros) = normalize_rows(&emb);
        assert_eq!(n.row(0)[0], 0.6);
        assert_eq!(n.row(0)[1], 0.8);
        assert_eq!(n.row(1)[0], 0.0);
        assert_eq!(zeros, vec![1]);
    }

    #[test]
    fn normalize_unit_norms_and_idempotent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let data = Array2::from_shape_fn((20, 5), |_| rng.gen_range(-1.0..1.0));
        let words: Vec<&str> = (0..20).map(|_| "w").collect();
        let words: Vec<String> = words
            .iter()
            .enumerate()
            .map(|(i, w)| format!("{w}{i}"))
            .collect();
        let emb =
            EmbeddingMatrix::new(Vocabulary::new(words).unwrap(), data).unwrap();
        let (n1, _) = normalize_rows(&emb);
        for row in n1.data().rows() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
        let (n2, _) = normalize_rows(&n1);
        for (a, b) in n1.data().iter().zip(n2.data().iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn take_prefix_rows() {
        let emb = toy(&["a", "b", "c"], array![[1.0], [2.0], [3.0]]);
        let head = emb.take_prefix(2).unwrap();
        assert_eq!(head.vocab().words(), &["a", "b"]);
        assert_eq!(head.row(1)[0], 2.0);
        assert_eq!(emb.take_prefix(9).unwrap().len(), 3);
        assert!(matches!(emb.take_prefix(0), Err(Error::EmptyEmbedding)));
    }

    #[test]
    fn format_sig_digits() {
        assert_eq!(format_sig(0.6, 6), "0.600000");
        assert_eq!(format_sig(123.456789, 6), "123.457");
        assert_eq!(format_sig(-0.000123456789, 6), "-0.000123457");
        assert_eq!(format_sig(0.0, 6), "0");
    }
}
