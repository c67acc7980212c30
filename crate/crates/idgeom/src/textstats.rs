//! Text-level complexity metrics: DEFLATE compression ratio, POS-tag
//! compression on supplied tag sequences, type-token ratio variants with a
//! moving-average window, adjacent-sentence overlap, and repeated content
//! lemmas. Tokenization and tagging are ingestion-time inputs, never
//! computed here.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use flate2::write::GzEncoder;
use flate2::{Compression, GzBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A text record with optional annotation layers. When `tokens` is present,
/// `lemmas` and `pos` must align with it and `sentences` must partition it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<Vec<String>>,
    /// Half-open token-index ranges, contiguous from 0 to the token count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentences: Option<Vec<[usize; 2]>>,
    /// Per-document function-word override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function_words: Option<Vec<String>>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            tokens: None,
            lemmas: None,
            pos: None,
            sentences: None,
            function_words: None,
        }
    }

    /// Check the annotation invariants. The reference length is the token
    /// count when tokens are present, else the lemma count.
    pub fn validate(&self) -> Result<()> {
        let reference = self
            .tokens
            .as_ref()
            .map(|t| t.len())
            .or_else(|| self.lemmas.as_ref().map(|l| l.len()));
        if let (Some(tokens), Some(lemmas)) = (&self.tokens, &self.lemmas) {
            if tokens.len() != lemmas.len() {
                return Err(Error::InvalidInput(format!(
                    "document '{}': {} lemmas for {} tokens",
                    self.id,
                    lemmas.len(),
                    tokens.len()
                )));
            }
        }
        if let (Some(tokens), Some(pos)) = (&self.tokens, &self.pos) {
            if tokens.len() != pos.len() {
                return Err(Error::InvalidInput(format!(
                    "document '{}': {} pos tags for {} tokens",
                    self.id,
                    pos.len(),
                    tokens.len()
                )));
            }
        }
        if let Some(sentences) = &self.sentences {
            let len = reference.ok_or_else(|| {
                Error::InvalidInput(format!(
                    "document '{}': sentence ranges without tokens or lemmas",
                    self.id
                ))
            })?;
            let mut cursor = 0usize;
            for (i, &[s, e]) in sentences.iter().enumerate() {
                if s != cursor || e < s || e > len {
                    return Err(Error::InvalidInput(format!(
                        "document '{}': sentence range {i} = [{s}, {e}) does not partition [0, {len})",
                        self.id
                    )));
                }
                cursor = e;
            }
            if cursor != len {
                return Err(Error::InvalidInput(format!(
                    "document '{}': sentence ranges cover [0, {cursor}) of [0, {len})",
                    self.id
                )));
            }
        }
        Ok(())
    }

    fn lemmas(&self) -> Result<&[String]> {
        self.lemmas
            .as_deref()
            .ok_or_else(|| Error::MissingAnnotation(format!("document '{}': lemmas", self.id)))
    }
}

/// Lemma set treated as non-content words. The embedded default ships with
/// the crate; callers may load their own list.
#[derive(Debug, Clone)]
pub struct FunctionWords(HashSet<String>);

impl FunctionWords {
    pub fn from_words<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        Self(words.into_iter().map(|w| w.into()).collect())
    }

    /// Parse one lemma per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect(),
        )
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.0.contains(lemma)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for FunctionWords {
    fn default() -> Self {
        Self::parse(include_str!("../data/function_words.txt"))
    }
}

/// Compressed size over original size under DEFLATE at maximum compression
/// in a gzip container with pinned header fields (mtime 0, OS byte 255), so
/// the output bytes are identical across runs and platforms.
pub fn compression_ratio(payload: &[u8]) -> Result<f64> {
    Ok(gzip_bytes(payload)?.len() as f64 / payload.len() as f64)
}

/// The pinned gzip compression itself, exposed so callers can check
/// bit-stability directly.
pub fn gzip_bytes(payload: &[u8]) -> Result<Vec<u8>> {
    if payload.is_empty() {
        return Err(Error::InvalidArgument("empty payload".into()));
    }
    let builder = GzBuilder::new().mtime(0);
    let mut encoder: GzEncoder<Vec<u8>> = builder.write(Vec::new(), Compression::best());
    encoder.write_all(payload)?;
    let mut bytes = encoder.finish()?;
    // Gzip header: magic(2) method(1) flags(1) mtime(4) xfl(1) os(1).
    bytes[9] = 255;
    Ok(bytes)
}

/// Compression ratio of the space-joined POS tag sequence.
pub fn pos_compression_ratio(doc: &Document) -> Result<f64> {
    let pos = doc
        .pos
        .as_ref()
        .ok_or_else(|| Error::MissingAnnotation(format!("document '{}': pos", doc.id)))?;
    if pos.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "document '{}': empty pos sequence",
            doc.id
        )));
    }
    compression_ratio(pos.join(" ").as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtrFamily {
    pub lemma_ttr: f64,
    pub bigram_lemma_ttr: f64,
    pub trigram_lemma_ttr: f64,
    /// Mean type-token ratio over all sliding windows of the given size;
    /// equals `lemma_ttr` when the window covers the whole document.
    pub mattr: f64,
}

pub fn ttr_family(doc: &Document, mattr_window: usize) -> Result<TtrFamily> {
    let lemmas = doc.lemmas()?;
    if lemmas.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "document '{}': empty lemma list",
            doc.id
        )));
    }
    if mattr_window == 0 {
        return Err(Error::InvalidArgument("mattr window must be positive".into()));
    }
    let lemma_ttr = ttr_of(lemmas.iter());
    let mattr = if mattr_window >= lemmas.len() {
        lemma_ttr
    } else {
        let mut acc = 0.0;
        let mut count = 0usize;
        for w in lemmas.windows(mattr_window) {
            acc += ttr_of(w.iter());
            count += 1;
        }
        acc / count as f64
    };
    Ok(TtrFamily {
        lemma_ttr,
        bigram_lemma_ttr: ngram_ttr(lemmas, 2),
        trigram_lemma_ttr: ngram_ttr(lemmas, 3),
        mattr,
    })
}

fn ttr_of<'a, I: Iterator<Item = &'a String>>(lemmas: I) -> f64 {
    let mut total = 0usize;
    let mut types = HashSet::new();
    for l in lemmas {
        total += 1;
        types.insert(l.as_str());
    }
    types.len() as f64 / total as f64
}

/// Distinct adjacent n-grams over total n-grams; 1 when the document is too
/// short to form any.
fn ngram_ttr(lemmas: &[String], n: usize) -> f64 {
    if lemmas.len() < n {
        return 1.0;
    }
    let mut types: HashSet<&[String]> = HashSet::new();
    let mut total = 0usize;
    for w in lemmas.windows(n) {
        types.insert(w);
        total += 1;
    }
    types.len() as f64 / total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapScope {
    All,
    /// Drop function-word lemmas before measuring overlap.
    Content,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapCounting {
    /// Shared types over the second sentence's type count.
    Binary,
    /// Tokens of the second sentence whose lemma occurred in the first,
    /// over the second sentence's token count.
    Counted,
}

/// Mean lexical overlap between adjacent sentences. Pairs whose second
/// sentence is empty (after content filtering) are skipped.
pub fn adjacent_overlap(
    doc: &Document,
    scope: OverlapScope,
    counting: OverlapCounting,
    function_words: Option<&FunctionWords>,
) -> Result<f64> {
    let lemmas = doc.lemmas()?;
    let sentences = doc
        .sentences
        .as_ref()
        .ok_or_else(|| Error::MissingAnnotation(format!("document '{}': sentences", doc.id)))?;
    if sentences.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "document '{}': need at least 2 sentences",
            doc.id
        )));
    }
    doc.validate()?;

    let doc_fw = doc.function_words.as_ref().map(|w| {
        FunctionWords::from_words(w.iter().cloned())
    });
    let fw = match scope {
        OverlapScope::All => None,
        OverlapScope::Content => Some(function_words.or(doc_fw.as_ref()).ok_or_else(|| {
            Error::MissingAnnotation(format!(
                "document '{}': function words required for content scope",
                doc.id
            ))
        })?),
    };

    let sentence_lemmas: Vec<Vec<&str>> = sentences
        .iter()
        .map(|&[s, e]| {
            lemmas[s..e]
                .iter()
                .map(String::as_str)
                .filter(|l| fw.is_none_or(|f| !f.contains(l)))
                .collect()
        })
        .collect();

    let mut acc = 0.0;
    let mut pairs = 0usize;
    for pair in sentence_lemmas.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        if next.is_empty() {
            continue;
        }
        let prev_types: HashSet<&str> = prev.iter().copied().collect();
        let value = match counting {
            OverlapCounting::Binary => {
                let next_types: HashSet<&str> = next.iter().copied().collect();
                let shared = next_types.iter().filter(|l| prev_types.contains(**l)).count();
                shared as f64 / next_types.len() as f64
            }
            OverlapCounting::Counted => {
                let hits = next.iter().filter(|l| prev_types.contains(**l)).count();
                hits as f64 / next.len() as f64
            }
        };
        acc += value;
        pairs += 1;
    }
    if pairs == 0 {
        return Err(Error::DegenerateInput(format!(
            "document '{}': every adjacent pair had an empty second sentence",
            doc.id
        )));
    }
    Ok(acc / pairs as f64)
}

/// Among content-lemma types, the proportion whose total count is at
/// least 2.
pub fn repeated_content_lemmas(
    doc: &Document,
    function_words: Option<&FunctionWords>,
) -> Result<f64> {
    let lemmas = doc.lemmas()?;
    let doc_fw = doc
        .function_words
        .as_ref()
        .map(|w| FunctionWords::from_words(w.iter().cloned()));
    let fw = function_words.or(doc_fw.as_ref()).ok_or_else(|| {
        Error::MissingAnnotation(format!("document '{}': function words", doc.id))
    })?;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for l in lemmas {
        if !fw.contains(l) {
            *counts.entry(l.as_str()).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "document '{}': no content lemmas",
            doc.id
        )));
    }
    let repeated = counts.values().filter(|&&c| c >= 2).count();
    Ok(repeated as f64 / counts.len() as f64)
}
