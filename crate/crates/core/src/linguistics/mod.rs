//! Deterministic text analysis: tokens, sentences, syllables, tags, phrases,
//! voice and word senses.
//!
//! Everything here is rule-based and pure. When a real parser is available,
//! its output can replace the built-in tagging and chunking through the
//! sidecar format in [`annotations`].

pub mod annotations;
mod chunk;
pub mod lexicon;
mod sentences;
mod syllables;
mod tagger;
mod tokenize;
mod voice;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use annotations::{load_external_annotations, Annotations};
pub use chunk::chunk_phrases;
pub use lexicon::{lemmatize, SenseLexicon};
pub use sentences::{split_sentences, split_sentences_with};
pub use syllables::{count_syllables, SyllableCounter};
pub use tagger::tag_pos;
pub use tokenize::{tokenize, tokenize_with};
pub use voice::detect_voice;

/// Coarse part-of-speech tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Noun,
    Verb,
    Aux,
    Adj,
    Adv,
    Adp,
    Det,
    Pron,
    Num,
    Conj,
    Part,
    Punct,
    X,
}

impl PosTag {
    pub const ALL: [PosTag; 13] = [
        Self::Noun,
        Self::Verb,
        Self::Aux,
        Self::Adj,
        Self::Adv,
        Self::Adp,
        Self::Det,
        Self::Pron,
        Self::Num,
        Self::Conj,
        Self::Part,
        Self::Punct,
        Self::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Noun => "NOUN",
            Self::Verb => "VERB",
            Self::Aux => "AUX",
            Self::Adj => "ADJ",
            Self::Adv => "ADV",
            Self::Adp => "ADP",
            Self::Det => "DET",
            Self::Pron => "PRON",
            Self::Num => "NUM",
            Self::Conj => "CONJ",
            Self::Part => "PART",
            Self::Punct => "PUNCT",
            Self::X => "X",
        }
    }

    pub fn is_content(self) -> bool {
        matches!(self, Self::Noun | Self::Verb | Self::Adj | Self::Adv)
    }

    /// Verb or auxiliary.
    pub fn is_verbal(self) -> bool {
        matches!(self, Self::Verb | Self::Aux)
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown POS tag '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: PosTag,
    /// Alphabetic characters in the surface.
    pub char_len: usize,
    pub syllables: u32,
    /// Distance to the clause root, filled by [`assign_depths`] or a sidecar file.
    pub depth: u32,
}

impl Token {
    pub fn has_alphanumeric(&self) -> bool {
        self.surface.chars().any(char::is_alphanumeric)
    }

    /// Words are tokens with at least one alphanumeric character.
    pub fn is_word(&self) -> bool {
        self.has_alphanumeric()
    }

    pub fn is_alphabetic(&self) -> bool {
        self.char_len > 0
    }

    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }
}

/// Half-open token range `[start, end)` within one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassiveConstruction {
    /// From the "be" form through the participle.
    pub span: Span,
    pub agentless: bool,
}

impl PassiveConstruction {
    pub fn participle_index(&self) -> usize {
        self.span.end - 1
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub noun_phrases: Vec<Span>,
    pub verb_phrases: Vec<Span>,
    pub passive_constructions: Vec<PassiveConstruction>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Self {
            tokens,
            ..Self::default()
        }
    }
}

/// Sets each token's depth to 1 + the number of commas and subordinating
/// conjunctions strictly before it in the sentence.
pub fn assign_depths(sentence: &mut Sentence) {
    let mut markers = 0u32;
    for tok in &mut sentence.tokens {
        tok.depth = 1 + markers;
        let lower = tok.lower();
        if tok.surface == "," || lexicon::is_in(lexicon::SUBORDINATORS, &lower) {
            markers += 1;
        }
    }
}

/// Full rule-based analysis bundle: lexicon plus syllable counter.
#[derive(Debug, Clone, Default)]
pub struct Analyzer {
    pub lexicon: SenseLexicon,
    pub syllables: SyllableCounter,
}

impl Analyzer {
    pub fn new(lexicon: SenseLexicon, syllables: SyllableCounter) -> Self {
        Self { lexicon, syllables }
    }

    pub fn split_sentences<'a>(&self, text: &'a str) -> Vec<&'a str> {
        split_sentences_with(text, |w| self.lexicon.is_abbreviation(w))
    }

    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        tokenize_with(text, &self.syllables)
    }

    /// Splits, tokenizes, tags, chunks, detects voice and assigns depths.
    pub fn analyze(&self, text: &str) -> Vec<Sentence> {
        self.split_sentences(text)
            .into_iter()
            .map(|s| {
                let tokens = tag_pos(self.tokenize(s), &self.lexicon);
                let mut sentence = detect_voice(chunk_phrases(Sentence::new(tokens)));
                assign_depths(&mut sentence);
                sentence
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_counts_preceding_markers() {
        let a = Analyzer::default();
        let s = &a.analyze("When it rains, the dog sleeps.")[0];
        let depths: Vec<u32> = s.tokens.iter().map(|t| t.depth).collect();
        // When it rains , the dog sleeps .
        assert_eq!(depths, vec![1, 2, 2, 2, 3, 3, 3, 3]);
    }

    #[test]
    fn tag_round_trip() {
        for t in PosTag::ALL {
            assert_eq!(t.as_str().parse::<PosTag>().unwrap(), t);
        }
        assert!("NOPE".parse::<PosTag>().is_err());
    }
}
