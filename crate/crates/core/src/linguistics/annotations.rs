//! Sidecar annotations from an external parser.
//!
//! One JSON object per line:
//!
//! ```json
//! {"doc_id": "17", "sentences": [{
//!     "tokens": [{"surface": "Dogs", "pos": "NOUN", "lemma": "dog", "depth": 2}],
//!     "noun_phrases": [[0, 1]], "verb_phrases": [],
//!     "passives": [{"span": [0, 1], "agentless": true}]}]}
//! ```
//!
//! Spans are half-open `[start, end)` token ranges. `noun_phrases`,
//! `verb_phrases` and `passives` may be omitted (treated as empty); every
//! token field is required. Blank lines are skipped.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde_json::{Map, Value};

use super::syllables::SyllableCounter;
use super::{PassiveConstruction, PosTag, Sentence, Span, Token};
use crate::error::{Error, Result};

/// Parsed sentences keyed by doc_id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Annotations {
    docs: BTreeMap<String, Vec<Sentence>>,
}

impl Annotations {
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&[Sentence]> {
        self.docs.get(doc_id).map(Vec::as_slice)
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.docs.keys().map(String::as_str)
    }

    /// Fails on the first annotated doc_id that is not among `known`.
    pub fn validate_against<'a>(&self, known: impl IntoIterator<Item = &'a str>) -> Result<()> {
        let known: HashSet<&str> = known.into_iter().collect();
        match self.docs.keys().find(|id| !known.contains(id.as_str())) {
            Some(id) => Err(Error::UnknownDocId(id.clone())),
            None => Ok(()),
        }
    }

    pub fn parse(text: &str, syllables: &SyllableCounter) -> Result<Self> {
        let mut docs = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let value: Value = serde_json::from_str(raw).map_err(|e| Error::Annotation {
                line,
                message: format!("malformed JSON: {e}"),
            })?;
            let obj = as_object(&value, line, "record")?;
            let doc_id = match field(obj, "doc_id", line)? {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                _ => return Err(bad(line, "doc_id must be a string")),
            };
            let sentences = as_array(field(obj, "sentences", line)?, line, "sentences")?
                .iter()
                .map(|s| parse_sentence(s, line, syllables))
                .collect::<Result<Vec<_>>>()?;
            if docs.insert(doc_id.clone(), sentences).is_some() {
                return Err(bad(line, &format!("duplicate doc_id '{doc_id}'")));
            }
        }
        Ok(Self { docs })
    }
}

/// Reads a sidecar annotation file.
pub fn load_external_annotations(path: &Path, syllables: &SyllableCounter) -> Result<Annotations> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Annotations::parse(&text, syllables)
}

fn bad(line: usize, message: &str) -> Error {
    Error::Annotation {
        line,
        message: message.to_string(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str, line: usize) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| Error::MissingField {
        line,
        field: name.to_string(),
    })
}

fn as_object<'a>(v: &'a Value, line: usize, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| bad(line, &format!("{what} must be an object")))
}

fn as_array<'a>(v: &'a Value, line: usize, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(line, &format!("{what} must be an array")))
}

fn as_usize(v: &Value, line: usize, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| bad(line, &format!("{what} must be a non-negative integer")))
}

fn parse_span(v: &Value, n_tokens: usize, line: usize) -> Result<Span> {
    let pair = as_array(v, line, "span")?;
    if pair.len() != 2 {
        return Err(bad(line, "span must have two elements"));
    }
    let start = as_usize(&pair[0], line, "span start")?;
    let end = as_usize(&pair[1], line, "span end")?;
    if start >= end || end > n_tokens {
        return Err(bad(line, &format!("span [{start}, {end}) out of bounds for {n_tokens} tokens")));
    }
    Ok(Span::new(start, end))
}

fn parse_spans(obj: &Map<String, Value>, name: &str, n: usize, line: usize) -> Result<Vec<Span>> {
    let Some(v) = obj.get(name) else {
        return Ok(Vec::new());
    };
    let mut spans = as_array(v, line, name)?
        .iter()
        .map(|s| parse_span(s, n, line))
        .collect::<Result<Vec<_>>>()?;
    spans.sort_by_key(|s| s.start);
    if spans.windows(2).any(|w| w[0].end > w[1].start) {
        return Err(bad(line, &format!("{name} spans overlap")));
    }
    Ok(spans)
}

fn parse_token(v: &Value, line: usize, syllables: &SyllableCounter) -> Result<Token> {
    let obj = as_object(v, line, "token")?;
    let text = |name: &str| -> Result<String> {
        field(obj, name, line)?
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| bad(line, &format!("{name} must be a string")))
    };
    let surface = text("surface")?;
    let pos: PosTag = text("pos")?.parse().map_err(|e: String| bad(line, &e))?;
    let lemma = text("lemma")?;
    let depth = as_usize(field(obj, "depth", line)?, line, "depth")? as u32;
    let char_len = surface.chars().filter(|c| c.is_alphabetic()).count();
    let syllables = match pos {
        PosTag::Punct | PosTag::Num => 0,
        _ => syllables.count(&surface),
    };
    Ok(Token {
        surface,
        lemma,
        pos,
        char_len,
        syllables,
        depth,
    })
}

fn parse_sentence(v: &Value, line: usize, syllables: &SyllableCounter) -> Result<Sentence> {
    let obj = as_object(v, line, "sentence")?;
    let tokens = as_array(field(obj, "tokens", line)?, line, "tokens")?
        .iter()
        .map(|t| parse_token(t, line, syllables))
        .collect::<Result<Vec<_>>>()?;
    let n = tokens.len();
    let noun_phrases = parse_spans(obj, "noun_phrases", n, line)?;
    let verb_phrases = parse_spans(obj, "verb_phrases", n, line)?;
    let passive_constructions = match obj.get("passives") {
        None => Vec::new(),
        Some(v) => as_array(v, line, "passives")?
            .iter()
            .map(|p| {
                let p = as_object(p, line, "passive")?;
                let span = parse_span(field(p, "span", line)?, n, line)?;
                let agentless = field(p, "agentless", line)?
                    .as_bool()
                    .ok_or_else(|| bad(line, "agentless must be a boolean"))?;
                Ok(PassiveConstruction { span, agentless })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(Sentence {
        tokens,
        noun_phrases,
        verb_phrases,
        passive_constructions,
    })
}
