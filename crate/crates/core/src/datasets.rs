//! Parsers for the evaluation benchmark files: the questions-words analogy
//! set, scored word-pair sets (SimLex-999, MEN, generic 3-column), and the
//! STS Benchmark sentence pairs.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Semantic,
    Syntactic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogySection {
    pub name: String,
    pub questions: Vec<[String; 4]>,
}

impl AnalogySection {
    /// Syntactic iff the section name starts with "gram".
    pub fn category(&self) -> Category {
        if self.name.starts_with("gram") {
            Category::Syntactic
        } else {
            Category::Semantic
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyDataset {
    pub sections: Vec<AnalogySection>,
}

impl AnalogyDataset {
    pub fn total_questions(&self) -> usize {
        self.sections.iter().map(|s| s.questions.len()).sum()
    }

    pub fn count(&self, category: Category) -> usize {
        self.sections
            .iter()
            .filter(|s| s.category() == category)
            .map(|s| s.questions.len())
            .sum()
    }
}

/// Parse the questions-words format: `: name` opens a section, every other
/// line is 4 space-separated words.
pub fn parse_analogy(path: impl AsRef<Path>) -> Result<AnalogyDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut sections: Vec<AnalogySection> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(name) = line.strip_prefix(": ") {
            sections.push(AnalogySection {
                name: name.trim().to_string(),
                questions: Vec::new(),
            });
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 4 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 4 words, got {}", words.len()),
            ));
        }
        let section = sections.last_mut().ok_or_else(|| {
            Error::parse(path, lineno, "question line before any section header")
        })?;
        section.questions.push([
            words[0].to_string(),
            words[1].to_string(),
            words[2].to_string(),
            words[3].to_string(),
        ]);
    }
    Ok(AnalogyDataset { sections })
}

pub fn write_analogy(ds: &AnalogyDataset, w: &mut impl Write) -> std::io::Result<()> {
    for s in &ds.sections {
        writeln!(w, ": {}", s.name)?;
        for q in &s.questions {
            writeln!(w, "{} {} {} {}", q[0], q[1], q[2], q[3])?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub word1: String,
    pub word2: String,
    pub gold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPairDataset {
    pub name: String,
    pub pairs: Vec<ScoredPair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoredPairFormat {
    /// Tab-separated with a header row; gold is the SimLex999 column.
    SimLex,
    /// `word1 word2 score`, optionally with lemma-POS suffixes to strip.
    Men { strip_pos: bool },
    /// `word1 word2 score`, whitespace-separated.
    Generic3Col,
}

pub fn parse_scored_pairs(
    path: impl AsRef<Path>,
    format: ScoredPairFormat,
) -> Result<ScoredPairDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "pairs".to_string());
    let pairs = match format {
        ScoredPairFormat::SimLex => parse_simlex(path, reader)?,
        ScoredPairFormat::Men { strip_pos } => parse_three_col(path, reader, strip_pos)?,
        ScoredPairFormat::Generic3Col => parse_three_col(path, reader, false)?,
    };
    if pairs.len() < 2 {
        return Err(Error::parse(
            path,
            pairs.len() + 1,
            format!("dataset has {} pairs, need at least 2", pairs.len()),
        ));
    }
    Ok(ScoredPairDataset { name, pairs })
}

fn parse_simlex(path: &Path, reader: impl BufRead) -> Result<Vec<ScoredPair>> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file, expected header"))?;
    let header = header.map_err(|e| Error::io(path, e))?;
    let cols: Vec<&str> = header.split('\t').collect();
    let col = |name: &str| -> Result<usize> {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::parse(path, 1, format!("missing expected column {name:?}")))
    };
    let w1 = col("word1")?;
    let w2 = col("word2")?;
    let gold = col("SimLex999")?;

    let mut pairs = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let need = w1.max(w2).max(gold) + 1;
        if fields.len() < need {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected at least {need} columns, got {}", fields.len()),
            ));
        }
        let score: f64 = fields[gold].parse().map_err(|_| {
            Error::parse(path, lineno, format!("non-numeric score {:?}", fields[gold]))
        })?;
        if !score.is_finite() {
            return Err(Error::parse(path, lineno, "non-finite score"));
        }
        pairs.push(ScoredPair {
            word1: fields[w1].to_string(),
            word2: fields[w2].to_string(),
            gold: score,
        });
    }
    Ok(pairs)
}

fn strip_lemma_pos(word: &str) -> &str {
    for suffix in ["-n", "-v", "-j"] {
        if let Some(stripped) = word.strip_suffix(suffix) {
            if !stripped.is_empty() {
                return stripped;
            }
        }
    }
    word
}

fn parse_three_col(path: &Path, reader: impl BufRead, strip_pos: bool) -> Result<Vec<ScoredPair>> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected \"word1 word2 score\", got {} fields", fields.len()),
            ));
        }
        let score: f64 = fields[2].parse().map_err(|_| {
            Error::parse(path, lineno, format!("non-numeric score {:?}", fields[2]))
        })?;
        if !score.is_finite() {
            return Err(Error::parse(path, lineno, "non-finite score"));
        }
        let (w1, w2) = if strip_pos {
            (strip_lemma_pos(fields[0]), strip_lemma_pos(fields[1]))
        } else {
            (fields[0], fields[1])
        };
        pairs.push(ScoredPair {
            word1: w1.to_string(),
            word2: w2.to_string(),
            gold: score,
        });
    }
    Ok(pairs)
}

pub fn write_scored_pairs(ds: &ScoredPairDataset, w: &mut impl Write) -> std::io::Result<()> {
    for p in &ds.pairs {
        writeln!(w, "{} {} {}", p.word1, p.word2, p.gold)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StsSplit {
    Train,
    Dev,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StsItem {
    pub gold: f64,
    pub sentence1: String,
    pub sentence2: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StsDataset {
    pub split: StsSplit,
    pub items: Vec<StsItem>,
}

/// Parse an STS Benchmark file: tab-separated
/// `genre file year id score sentence1 sentence2 [...]`. The split is
/// inferred from the file name ("train"/"dev", otherwise test).
pub fn parse_sts(path: impl AsRef<Path>) -> Result<StsDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let split = if name.contains("train") {
        StsSplit::Train
    } else if name.contains("dev") {
        StsSplit::Dev
    } else {
        StsSplit::Test
    };

    let mut items = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 7 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected at least 7 tab-separated fields, got {}", fields.len()),
            ));
        }
        let gold: f64 = fields[4].parse().map_err(|_| {
            Error::parse(path, lineno, format!("non-numeric score {:?}", fields[4]))
        })?;
        if !(0.0..=5.0).contains(&gold) {
            return Err(Error::parse(
                path,
                lineno,
                format!("score {gold} outside [0,5]"),
            ));
        }
        let s1 = fields[5].trim();
        let s2 = fields[6].trim();
        if s1.is_empty() || s2.is_empty() {
            return Err(Error::parse(path, lineno, "empty sentence"));
        }
        items.push(StsItem {
            gold,
            sentence1: s1.to_string(),
            sentence2: s2.to_string(),
        });
    }
    Ok(StsDataset { split, items })
}

pub fn write_sts(ds: &StsDataset, w: &mut impl Write) -> std::io::Result<()> {
    for (i, item) in ds.items.iter().enumerate() {
        writeln!(
            w,
            "genre\tfile\t2017\t{:04}\t{}\t{}\t{}",
            i + 1,
            item.gold,
            item.sentence1,
            item.sentence2
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn analogy_single_section() {
        let f = write_tmp(": family\nboy girl brother sister\n");
        let ds = parse_analogy(f.path()).unwrap();
        assert_eq!(ds.sections.len(), 1);
        assert_eq!(ds.count(Category::Semantic), 1);
        assert_eq!(ds.count(Category::Syntactic), 0);
    }

    #[test]
    fn analogy_gram_prefix_is_syntactic() {
        let f = write_tmp(": gram1-adjective-to-adverb\ncalm calmly quick quickly\n");
        let ds = parse_analogy(f.path()).unwrap();
        assert_eq!(ds.sections[0].category(), Category::Syntactic);
        assert_eq!(ds.count(Category::Syntactic), 1);
    }

    #[test]
    fn analogy_bad_line_reports_number() {
        let f = write_tmp(": family\nboy girl brother\n");
        match parse_analogy(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn analogy_question_before_header_rejected() {
        let f = write_tmp("boy girl brother sister\n");
        assert!(parse_analogy(f.path()).is_err());
    }

    #[test]
    fn analogy_round_trip() {
        let f = write_tmp(": family\nboy girl brother sister\n: gram8-plural\ncat cats dog dogs\n");
        let ds = parse_analogy(f.path()).unwrap();
        let mut buf = Vec::new();
        write_analogy(&ds, &mut buf).unwrap();
        let f2 = write_tmp(std::str::from_utf8(&buf).unwrap());
        assert_eq!(parse_analogy(f2.path()).unwrap(), ds);
    }

    #[test]
    fn simlex_columns_by_name() {
        let f = write_tmp(
            "word1\tword2\tPOS\tSimLex999\tconc(w1)\n\
             old\tnew\tA\t1.58\t2.72\n\
             smart\tintelligent\tA\t9.2\t1.75\n",
        );
        let ds = parse_scored_pairs(f.path(), ScoredPairFormat::SimLex).unwrap();
        assert_eq!(ds.pairs.len(), 2);
        assert_eq!(ds.pairs[0].word1, "old");
        assert_eq!(ds.pairs[0].gold, 1.58);
    }

    #[test]
    fn simlex_missing_column_rejected() {
        let f = write_tmp("word1\tword2\tPOS\tScore\na\tb\tN\t1.0\nc\td\tN\t2.0\n");
        let err = parse_scored_pairs(f.path(), ScoredPairFormat::SimLex).unwrap_err();
        assert!(err.to_string().contains("SimLex999"), "{err}");
    }

    #[test]
    fn men_strip_suffixes() {
        let f = write_tmp("sun-n sunlight-n 50.0\nrun-v jog-v 42.5\n");
        let ds = parse_scored_pairs(f.path(), ScoredPairFormat::Men { strip_pos: true }).unwrap();
        assert_eq!(ds.pairs[0].word1, "sun");
        assert_eq!(ds.pairs[1].word2, "jog");
        let ds = parse_scored_pairs(f.path(), ScoredPairFormat::Men { strip_pos: false }).unwrap();
        assert_eq!(ds.pairs[0].word1, "sun-n");
    }

    #[test]
    fn generic_three_col() {
        let f = write_tmp("cat dog 7.5\nhouse home 9.0\n");
        let ds = parse_scored_pairs(f.path(), ScoredPairFormat::Generic3Col).unwrap();
        assert_eq!(ds.pairs[0], ScoredPair {
            word1: "cat".into(),
            word2: "dog".into(),
            gold: 7.5
        });
    }

    #[test]
    fn generic_non_numeric_score_rejected() {
        let f = write_tmp("cat dog high\nx y 1\n");
        assert!(parse_scored_pairs(f.path(), ScoredPairFormat::Generic3Col).is_err());
    }

    #[test]
    fn scored_pairs_round_trip() {
        let f = write_tmp("cat dog 7.5\nhouse home 9\n");
        let ds = parse_scored_pairs(f.path(), ScoredPairFormat::Generic3Col).unwrap();
        let mut buf = Vec::new();
        write_scored_pairs(&ds, &mut buf).unwrap();
        let f2 = write_tmp(std::str::from_utf8(&buf).unwrap());
        let ds2 = parse_scored_pairs(f2.path(), ScoredPairFormat::Generic3Col).unwrap();
        assert_eq!(ds.pairs, ds2.pairs);
    }

    #[test]
    fn sts_synthetic_line() {
        let f = write_tmp("main-captions\tMSRvid\t2012\t0001\t5.000\ta man sings\ta man sings\n");
        let ds = parse_sts(f.path()).unwrap();
        assert_eq!(ds.items.len(), 1);
        assert_eq!(ds.items[0].gold, 5.0);
        assert_eq!(ds.items[0].sentence1, ds.items[0].sentence2);
        assert_eq!(ds.split, StsSplit::Test);
    }

    #[test]
    fn sts_tolerates_trailing_fields() {
        let f = write_tmp("g\tf\t2016\t1\t2.6\tfirst sentence\tsecond sentence\textra\turl\n");
        let ds = parse_sts(f.path()).unwrap();
        assert_eq!(ds.items[0].sentence2, "second sentence");
    }

    #[test]
    fn sts_too_few_fields_names_line() {
        let f = write_tmp("g\tf\t2016\t1\t2.6\tonly one sentence\n");
        match parse_sts(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sts_score_range_enforced() {
        let f = write_tmp("g\tf\t2016\t1\t5.5\ta\tb\n");
        assert!(parse_sts(f.path()).is_err());
    }

    #[test]
    fn sts_round_trip() {
        let f = write_tmp(
            "g\tf\t2016\t1\t2.6\tfirst sentence\tsecond one\ng\tf\t2016\t2\t0\tmore text\tagain\n",
        );
        let ds = parse_sts(f.path()).unwrap();
        let mut buf = Vec::new();
        write_sts(&ds, &mut buf).unwrap();
        let f2 = write_tmp(std::str::from_utf8(&buf).unwrap());
        assert_eq!(parse_sts(f2.path()).unwrap().items, ds.items);
    }
}
