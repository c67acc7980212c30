//! Seeded text transformations: independent homoglyph substitution, homoglyph
//! substitution drawn once per word type, and interior-letter shuffling with
//! fixed first and last letters. Whitespace and punctuation pass through
//! verbatim, and equal words stay equal under the per-type transforms.

use std::collections::BTreeMap;
use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{fnv1a64, RngSpec};

/// Substream salts decouple the per-word-type draws of the two word-type
/// transforms from each other and from positional draws.
const TYPE2_SALT: u64 = 0x7479_7065_325f_7331;
const TYPE3_SALT: u64 = 0x7479_7065_335f_7332;

/// Injective character-replacement table with no fixed points.
#[derive(Debug, Clone)]
pub struct HomoglyphMap {
    map: BTreeMap<char, char>,
}

impl HomoglyphMap {
    /// Parse the two-characters-per-line tab-separated format. Blank lines
    /// are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut targets = std::collections::BTreeSet::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let from = single_char(fields.next(), lineno)?;
            let to = single_char(fields.next(), lineno)?;
            if fields.next().is_some() {
                return Err(Error::Parse(format!(
                    "homoglyph map line {}: expected exactly two tab-separated characters",
                    lineno + 1
                )));
            }
            if from == to {
                return Err(Error::Parse(format!(
                    "homoglyph map line {}: character maps to itself",
                    lineno + 1
                )));
            }
            if map.insert(from, to).is_some() {
                return Err(Error::Parse(format!(
                    "homoglyph map line {}: duplicate source character '{from}'",
                    lineno + 1
                )));
            }
            if !targets.insert(to) {
                return Err(Error::Parse(format!(
                    "homoglyph map line {}: duplicate target character (map must be injective)",
                    lineno + 1
                )));
            }
        }
        if map.is_empty() {
            return Err(Error::Parse("homoglyph map is empty".into()));
        }
        Ok(Self { map })
    }

    /// The Latin-to-Cyrillic/Greek confusable table shipped with the crate.
    pub fn default_table() -> Self {
        Self::parse(include_str!("../data/homoglyphs.tsv")).expect("embedded table is valid")
    }

    pub fn get(&self, c: char) -> Option<char> {
        self.map.get(&c).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn single_char(field: Option<&str>, lineno: usize) -> Result<char> {
    let field = field.ok_or_else(|| {
        Error::Parse(format!(
            "homoglyph map line {}: missing field",
            lineno + 1
        ))
    })?;
    let mut chars = field.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::Parse(format!(
            "homoglyph map line {}: field '{field}' is not a single character",
            lineno + 1
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbKind {
    /// Each mappable letter independently replaced with probability p.
    Type1,
    /// Replacement decisions drawn once per (word type, character position):
    /// equal words stay equal.
    Type2,
    /// Interior letters of each word (length >= 4) shuffled, first and last
    /// fixed, one permutation per word type.
    Type3,
}

impl PerturbKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "type1" => Ok(Self::Type1),
            "type2" => Ok(Self::Type2),
            "type3" => Ok(Self::Type3),
            other => Err(Error::InvalidArgument(format!(
                "unknown transform kind '{other}'"
            ))),
        }
    }
}

/// Apply one transformation. `p` and `map` are required for the homoglyph
/// kinds; type 3 ignores both. Identical `(text, kind, p, rng, map)` always
/// produce identical output.
pub fn transform(
    text: &str,
    kind: PerturbKind,
    p: f64,
    rng: RngSpec,
    map: Option<&HomoglyphMap>,
) -> Result<String> {
    match kind {
        PerturbKind::Type1 => {
            let map = require_map(map)?;
            validate_p(p)?;
            Ok(type1(text, p, rng, map))
        }
        PerturbKind::Type2 => {
            let map = require_map(map)?;
            validate_p(p)?;
            Ok(type2(text, p, rng, map))
        }
        PerturbKind::Type3 => Ok(type3(text, rng)),
    }
}

fn require_map(map: Option<&HomoglyphMap>) -> Result<&HomoglyphMap> {
    map.ok_or_else(|| {
        Error::InvalidArgument("homoglyph transforms need a replacement map".into())
    })
}

fn validate_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "replacement probability must lie in [0, 1], got {p}"
        )));
    }
    Ok(())
}

fn type1(text: &str, p: f64, rng: RngSpec, map: &HomoglyphMap) -> String {
    let mut gen = rng.rng();
    text.chars()
        .map(|c| match map.get(c) {
            Some(to) if c.is_alphabetic() && gen.random::<f64>() < p => to,
            _ => c,
        })
        .collect()
}

fn type2(text: &str, p: f64, rng: RngSpec, map: &HomoglyphMap) -> String {
    // Decisions are keyed by the word type alone, so two occurrences of the
    // same word transform identically no matter where they appear.
    let mut decisions: HashMap<String, Vec<bool>> = HashMap::new();
    let mut out = String::with_capacity(text.len());
    for segment in segments(text) {
        match segment {
            Segment::Other(chars) => out.extend(chars),
            Segment::Word(chars) => {
                let word: String = chars.iter().collect();
                let flags = decisions.entry(word.clone()).or_insert_with(|| {
                    let mut gen = rng.substream(TYPE2_SALT ^ fnv1a64(&word)).rng();
                    (0..chars.len()).map(|_| gen.random::<f64>() < p).collect()
                });
                for (c, &flip) in chars.iter().zip(flags.iter()) {
                    match map.get(*c) {
                        Some(to) if flip => out.push(to),
                        _ => out.push(*c),
                    }
                }
            }
        }
    }
    out
}

fn type3(text: &str, rng: RngSpec) -> String {
    let mut perms: HashMap<String, Vec<usize>> = HashMap::new();
    let mut out = String::with_capacity(text.len());
    for segment in segments(text) {
        match segment {
            Segment::Other(chars) => out.extend(chars),
            Segment::Word(chars) => {
                if chars.len() < 4 {
                    out.extend(chars);
                    continue;
                }
                let word: String = chars.iter().collect();
                let interior = chars.len() - 2;
                let perm = perms.entry(word.clone()).or_insert_with(|| {
                    let mut gen = rng.substream(TYPE3_SALT ^ fnv1a64(&word)).rng();
                    let mut idx: Vec<usize> = (0..interior).collect();
                    // Fisher-Yates.
                    for i in (1..interior).rev() {
                        let j = gen.random_range(0..=i);
                        idx.swap(i, j);
                    }
                    idx
                });
                out.push(chars[0]);
                for &i in perm.iter() {
                    out.push(chars[1 + i]);
                }
                out.push(chars[chars.len() - 1]);
            }
        }
    }
    out
}

enum Segment {
    /// Maximal run of alphabetic characters.
    Word(Vec<char>),
    Other(Vec<char>),
}

fn segments(text: &str) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut word: Vec<char> = Vec::new();
    let mut other: Vec<char> = Vec::new();
    for c in text.chars() {
        if c.is_alphabetic() {
            if !other.is_empty() {
                out.push(Segment::Other(std::mem::take(&mut other)));
            }
            word.push(c);
        } else {
            if !word.is_empty() {
                out.push(Segment::Word(std::mem::take(&mut word)));
            }
            other.push(c);
        }
    }
    if !word.is_empty() {
        out.push(Segment::Word(word));
    }
    if !other.is_empty() {
        out.push(Segment::Other(other));
    }
    out
}
