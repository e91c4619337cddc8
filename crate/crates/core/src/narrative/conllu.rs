//! Minimal CoNLL-U reader: keeps FORM, HEAD, DEPREL and the UPOS punctuation flag.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepToken {
    pub form: String,
    /// 1-based position in the sentence.
    pub id: usize,
    /// 0 marks the root.
    pub head: usize,
    pub deprel: String,
    pub is_punct: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepParse {
    pub sentence_index: usize,
    pub sent_id: Option<String>,
    pub tokens: Vec<DepToken>,
}

impl DepParse {
    pub fn root(&self) -> Option<&DepToken> {
        self.tokens.iter().find(|t| t.head == 0)
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = &DepToken> {
        self.tokens.iter().filter(move |t| t.head == id)
    }
}

/// Identifies a sentence block in error messages (1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockRef {
    pub block: usize,
    pub sent_id: Option<String>,
}

impl fmt::Display for BlockRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block {}", self.block)?;
        if let Some(id) = &self.sent_id {
            write!(f, " (sent_id {id})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConlluError {
    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected 10 tab-separated columns, found {found}")]
    Columns { line: usize, found: usize },
    #[error("line {line}: invalid token id {value:?}")]
    InvalidId { line: usize, value: String },
    #[error("line {line}: non-integer head {value:?}")]
    InvalidHead { line: usize, value: String },
    #[error("{0}: no root token")]
    NoRoot(BlockRef),
    #[error("{block}: {count} root tokens")]
    MultipleRoots { block: BlockRef, count: usize },
    #[error("{block}: token ids must run 1..n without gaps")]
    NonSequentialIds { block: BlockRef },
    #[error("{block}: head {head} of token {id} is out of range")]
    HeadOutOfRange { block: BlockRef, id: usize, head: usize },
    #[error("{0}: head links contain a cycle")]
    Cycle(BlockRef),
}

/// A group of parses introduced by `# newdoc id = ...` (or the implicit leading group).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedDocument {
    pub doc_id: Option<String>,
    pub parses: Vec<DepParse>,
}

fn comment_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix(key)?.trim_start();
    let value = rest.strip_prefix('=')?.trim();
    Some(value)
}

fn validate(block: BlockRef, tokens: &[DepToken]) -> Result<(), ConlluError> {
    if tokens.iter().enumerate().any(|(i, t)| t.id != i + 1) {
        return Err(ConlluError::NonSequentialIds { block });
    }
    let n = tokens.len();
    if let Some(t) = tokens.iter().find(|t| t.head > n) {
        return Err(ConlluError::HeadOutOfRange {
            block,
            id: t.id,
            head: t.head,
        });
    }
    match tokens.iter().filter(|t| t.head == 0).count() {
        0 => return Err(ConlluError::NoRoot(block)),
        1 => {}
        count => return Err(ConlluError::MultipleRoots { block, count }),
    }
    // With one root and in-range heads, the graph is a tree iff every token reaches
    // the root within n steps.
    for t in tokens {
        let mut cur = t.head;
        let mut steps = 0;
        while cur != 0 {
            cur = tokens[cur - 1].head;
            steps += 1;
            if steps > n {
                return Err(ConlluError::Cycle(block));
            }
        }
    }
    Ok(())
}

/// Parses CoNLL-U text, grouping sentences by `# newdoc` markers. Sentence indices
/// restart at 0 in each document. Multiword ranges and empty nodes are skipped.
pub fn parse_conllu_documents(text: &str) -> Result<Vec<ParsedDocument>, ConlluError> {
    let mut docs = vec![ParsedDocument {
        doc_id: None,
        parses: Vec::new(),
    }];
    let mut block_no = 0usize;
    let mut sent_id: Option<String> = None;
    let mut tokens: Vec<DepToken> = Vec::new();
    let mut in_block = false;

    let flush = |docs: &mut Vec<ParsedDocument>,
                     tokens: &mut Vec<DepToken>,
                     sent_id: &mut Option<String>,
                     block_no: usize|
     -> Result<(), ConlluError> {
        let taken = std::mem::take(tokens);
        let id = sent_id.take();
        if taken.is_empty() {
            return Ok(());
        }
        validate(
            BlockRef {
                block: block_no,
                sent_id: id.clone(),
            },
            &taken,
        )?;
        let doc = docs.last_mut().expect("at least one document");
        doc.parses.push(DepParse {
            sentence_index: doc.parses.len(),
            sent_id: id,
            tokens: taken,
        });
        Ok(())
    };

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if in_block {
                flush(&mut docs, &mut tokens, &mut sent_id, block_no)?;
                in_block = false;
            }
            continue;
        }
        if !in_block {
            in_block = true;
            block_no += 1;
        }
        if line.starts_with('#') {
            if let Some(id) = comment_value(line, "newdoc id").or_else(|| {
                line.trim_start_matches('#').trim().eq("newdoc").then_some("")
            }) {
                let doc_id = (!id.is_empty()).then(|| id.to_owned());
                let last = docs.last_mut().expect("at least one document");
                if last.parses.is_empty() && last.doc_id.is_none() {
                    last.doc_id = doc_id;
                } else {
                    docs.push(ParsedDocument {
                        doc_id,
                        parses: Vec::new(),
                    });
                }
            } else if let Some(id) = comment_value(line, "sent_id") {
                sent_id = Some(id.to_owned());
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ConlluError::Columns {
                line: line_no,
                found: cols.len(),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id = cols[0].parse::<usize>().ok().filter(|&i| i > 0).ok_or_else(|| ConlluError::InvalidId {
            line: line_no,
            value: cols[0].to_owned(),
        })?;
        let head = cols[6].parse::<usize>().map_err(|_| ConlluError::InvalidHead {
            line: line_no,
            value: cols[6].to_owned(),
        })?;
        tokens.push(DepToken {
            form: cols[1].to_owned(),
            id,
            head,
            deprel: cols[7].to_owned(),
            is_punct: cols[3] == "PUNCT",
        });
    }
    if in_block {
        flush(&mut docs, &mut tokens, &mut sent_id, block_no)?;
    }
    if docs.len() > 1 && docs[0].doc_id.is_none() && docs[0].parses.is_empty() {
        docs.remove(0);
    }
    Ok(docs)
}

/// All sentences of the text in order, ignoring document markers.
pub fn parse_conllu(text: &str) -> Result<Vec<DepParse>, ConlluError> {
    let mut out = Vec::new();
    for doc in parse_conllu_documents(text)? {
        out.extend(doc.parses);
    }
    for (i, p) in out.iter_mut().enumerate() {
        p.sentence_index = i;
    }
    Ok(out)
}

pub fn read_conllu(path: &Path) -> Result<Vec<DepParse>, ConlluError> {
    let text = fs::read_to_string(path).map_err(|source| ConlluError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_conllu(&text)
}
