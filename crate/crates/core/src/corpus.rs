//! Parallel abstract/PLS corpora: ingestion, sentence segmentation and the
//! canonical tokenizer shared by matching and every n-gram metric.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Combined abstract + PLS token length above which a pair is flagged at ingestion.
pub const TOKEN_BOUND: usize = 1024;

/// Abbreviations that never end a sentence. Compared case-insensitively.
const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "vs.", "v.", "cf.", "ca.", "approx.", "al.", "etc.", "dr.", "mr.", "mrs.",
    "ms.", "prof.", "st.", "jr.", "fig.", "figs.", "eq.", "ref.", "refs.", "vol.", "pp.", "min.",
    "max.", "resp.", "incl.",
];

/// Abbreviations that only act as exceptions when a digit follows ("No. 5").
const NUMERIC_ABBREVIATIONS: &[&str] = &["no.", "nos."];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed JSON at line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("missing field {field} at line {line}")]
    MissingField { field: &'static str, line: usize },
    #[error("field {field} at line {line} must be a non-empty string")]
    InvalidField { field: &'static str, line: usize },
    #[error("unknown split {value:?} at line {line}")]
    InvalidSplit { value: String, line: usize },
    #[error("duplicate document id {id:?} at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("cochrane import from {}: {message}", path.display())]
    Import { path: PathBuf, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// A sentence of a source document together with its canonical tokens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn new(index: usize, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Sentence {
            index,
            text,
            tokens,
        }
    }
}

/// Lowercases and keeps maximal runs of letters or digits; everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn is_terminal(ch: char) -> bool {
    matches!(ch, '.' | '!' | '?')
}

fn is_closing(ch: char) -> bool {
    matches!(ch, ')' | ']' | '"' | '\'' | '\u{201d}' | '\u{2019}')
}

/// The whitespace-delimited word that ends at byte `dot` (inclusive), stripped of
/// leading brackets and quotes.
fn word_ending_at(text: &str, dot: usize) -> &str {
    let head = &text[..=dot];
    let start = head
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    head[start..].trim_start_matches(['(', '[', '"', '\'', '\u{201c}'])
}

fn is_abbreviation(word: &str, next: char) -> bool {
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
        || (next.is_ascii_digit() && NUMERIC_ABBREVIATIONS.contains(&lower.as_str()))
}

/// Rule-based splitter: a boundary follows a run of `.`/`!`/`?` (plus closing
/// brackets or quotes) when whitespace and then an uppercase letter or digit comes
/// next, unless the run is a single period closing a listed abbreviation.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;

    while i < chars.len() {
        let (pos, ch) = chars[i];
        if !is_terminal(ch) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < chars.len() && is_terminal(chars[j].1) {
            j += 1;
        }
        let single_period = j == i + 1 && ch == '.';
        while j < chars.len() && is_closing(chars[j].1) {
            j += 1;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        if k == j || k == chars.len() {
            i = j.max(i + 1);
            continue;
        }
        let next = chars[k].1;
        let starts_sentence = next.is_uppercase() || next.is_ascii_digit();
        let abbreviated = single_period && chars[j - 1].1 == '.' && is_abbreviation(word_ending_at(text, pos), next);
        if starts_sentence && !abbreviated {
            let end = chars[j - 1].0 + chars[j - 1].1.len_utf8();
            let piece = text[start..end].trim();
            if !piece.is_empty() {
                sentences.push(Sentence::new(sentences.len(), piece));
            }
            start = chars[k].0;
        }
        i = k;
    }

    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(Sentence::new(sentences.len(), tail));
    }
    sentences
}

/// One abstract/PLS parallel instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentPair {
    pub id: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(rename = "pls")]
    pub pls_text: String,
    pub split: Split,
    /// Combined canonical token count exceeds [`TOKEN_BOUND`]; truncation is left to assembly.
    #[serde(skip)]
    pub exceeds_token_bound: bool,
}

impl DocumentPair {
    pub fn new(
        id: impl Into<String>,
        abstract_text: impl Into<String>,
        pls_text: impl Into<String>,
        split: Split,
    ) -> Self {
        let abstract_text = abstract_text.into();
        let pls_text = pls_text.into();
        let exceeds_token_bound =
            tokenize(&abstract_text).len() + tokenize(&pls_text).len() > TOKEN_BOUND;
        DocumentPair {
            id: id.into(),
            abstract_text,
            pls_text,
            split,
            exceeds_token_bound,
        }
    }

    pub fn abstract_sentences(&self) -> Vec<Sentence> {
        segment_sentences(&self.abstract_text)
    }

    pub fn pls_sentences(&self) -> Vec<Sentence> {
        segment_sentences(&self.pls_text)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Dev => self.dev,
            Split::Test => self.test,
        }
    }

    pub fn add(&mut self, split: Split, n: usize) {
        match split {
            Split::Train => self.train += n,
            Split::Dev => self.dev += n,
            Split::Test => self.test += n,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.dev + self.test
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub pairs: Vec<DocumentPair>,
}

impl Corpus {
    pub fn new(pairs: Vec<DocumentPair>) -> Self {
        Corpus { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn split_counts(&self) -> SplitCounts {
        let mut counts = SplitCounts::default();
        for pair in &self.pairs {
            counts.add(pair.split, 1);
        }
        counts
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &DocumentPair> {
        self.pairs.iter().filter(move |p| p.split == split)
    }

    pub fn get(&self, id: &str) -> Option<&DocumentPair> {
        self.pairs.iter().find(|p| p.id == id)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for pair in &self.pairs {
            serde_json::to_writer(&mut out, pair)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let io_err = |source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        self.write_jsonl(BufWriter::new(file)).map_err(io_err)
    }
}

fn string_field(obj: &serde_json::Map<String, Value>, field: &'static str, line: usize) -> Result<String, CorpusError> {
    match obj.get(field) {
        None => Err(CorpusError::MissingField { field, line }),
        Some(Value::String(s)) if !s.trim().is_empty() => Ok(s.clone()),
        Some(_) => Err(CorpusError::InvalidField { field, line }),
    }
}

/// Parses canonical corpus JSONL. Blank lines are ignored; line numbers are 1-based.
pub fn parse_corpus<R: BufRead>(reader: R, origin: &Path) -> Result<Corpus, CorpusError> {
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| CorpusError::Json {
            line: line_no,
            message: e.to_string(),
        })?;
        let Value::Object(obj) = value else {
            return Err(CorpusError::Json {
                line: line_no,
                message: "expected a JSON object".into(),
            });
        };
        let id = string_field(&obj, "id", line_no)?;
        let abstract_text = string_field(&obj, "abstract", line_no)?;
        let pls_text = string_field(&obj, "pls", line_no)?;
        let split_raw = string_field(&obj, "split", line_no)?;
        let split = split_raw.parse().map_err(|_| CorpusError::InvalidSplit {
            value: split_raw.clone(),
            line: line_no,
        })?;
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { id, line: line_no });
        }
        pairs.push(DocumentPair::new(id, abstract_text, pls_text, split));
    }
    Ok(Corpus { pairs })
}

pub fn load_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus(BufReader::new(file), path)
}

fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text.lines().map(str::to_owned).collect())
}

/// Imports the published release layout: per split, `<name>.source` (abstracts) and
/// `<name>.target` (PLS), one document per line, with an optional `<name>.doi` for
/// ids. The development split may be named `val`, `dev` or `valid`.
pub fn import_cochrane(dir: &Path) -> Result<Corpus, CorpusError> {
    let layout: [(Split, &[&str]); 3] = [
        (Split::Train, &["train"]),
        (Split::Dev, &["val", "dev", "valid"]),
        (Split::Test, &["test"]),
    ];
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (split, names) in layout {
        let Some(name) = names
            .iter()
            .find(|name| dir.join(format!("{name}.source")).is_file())
        else {
            return Err(CorpusError::Import {
                path: dir.to_path_buf(),
                message: format!("no source file for split {split}"),
            });
        };
        let sources = read_lines(&dir.join(format!("{name}.source")))?;
        let targets = read_lines(&dir.join(format!("{name}.target")))?;
        if sources.len() != targets.len() {
            return Err(CorpusError::Import {
                path: dir.to_path_buf(),
                message: format!(
                    "{name}.source has {} lines but {name}.target has {}",
                    sources.len(),
                    targets.len()
                ),
            });
        }
        let doi_path = dir.join(format!("{name}.doi"));
        let dois = if doi_path.is_file() {
            Some(read_lines(&doi_path)?)
        } else {
            None
        };
        for (i, (abs, pls)) in sources.into_iter().zip(targets).enumerate() {
            if abs.trim().is_empty() || pls.trim().is_empty() {
                return Err(CorpusError::Import {
                    path: dir.to_path_buf(),
                    message: format!("empty document at {name} line {}", i + 1),
                });
            }
            let id = dois
                .as_ref()
                .and_then(|d| d.get(i))
                .map(|d| d.trim().to_owned())
                .filter(|d| !d.is_empty())
                .unwrap_or_else(|| format!("{split}-{i:05}"));
            if !seen.insert(id.clone()) {
                return Err(CorpusError::Import {
                    path: dir.to_path_buf(),
                    message: format!("duplicate id {id:?}"),
                });
            }
            pairs.push(DocumentPair::new(id, abs, pls, split));
        }
    }
    Ok(Corpus { pairs })
}
