//! JSON-Lines corpora: one [`Document`] per line.

use crate::error::{Error, Result};
use crate::textstats::Document;

/// Strict parse: the first malformed or invalid line fails the whole corpus.
pub fn parse_jsonl(text: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        docs.push(parse_line(line).map_err(|e| {
            Error::Parse(format!("line {}: {e}", lineno + 1))
        })?);
    }
    Ok(docs)
}

/// Good documents with their line numbers, and failed lines with their
/// errors.
pub type LenientParse = (Vec<(usize, Document)>, Vec<(usize, String)>);

/// Lenient parse for corpus runs: good documents come back with their line
/// numbers, bad lines are reported and skipped.
pub fn parse_jsonl_lenient(text: &str) -> LenientParse {
    let mut docs = Vec::new();
    let mut failures = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(doc) => docs.push((lineno + 1, doc)),
            Err(e) => failures.push((lineno + 1, e.to_string())),
        }
    }
    (docs, failures)
}

fn parse_line(line: &str) -> Result<Document> {
    let doc: Document =
        serde_json::from_str(line).map_err(|e| Error::Parse(e.to_string()))?;
    doc.validate()?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documents() {
        let text = r#"{"id":"a","text":"hello"}
{"id":"b","text":"world","lemmas":["world"],"tokens":["world"]}
"#;
        let docs = parse_jsonl(text).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].lemmas.as_ref().unwrap()[0], "world");
    }

    #[test]
    fn strict_fails_on_bad_line() {
        let text = "{\"id\":\"a\",\"text\":\"x\"}\nnot json\n";
        assert!(matches!(parse_jsonl(text), Err(Error::Parse(_))));
    }

    #[test]
    fn strict_fails_on_invalid_annotations() {
        let text = r#"{"id":"a","text":"x","tokens":["a","b"],"lemmas":["a"]}"#;
        assert!(parse_jsonl(text).is_err());
    }

    #[test]
    fn lenient_reports_and_continues() {
        let text = "{\"id\":\"a\",\"text\":\"x\"}\ngarbage\n{\"id\":\"b\",\"text\":\"y\"}\n";
        let (docs, failures) = parse_jsonl_lenient(text);
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].0, 1);
        assert_eq!(docs[1].0, 3);
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].0, 2);
    }
}
