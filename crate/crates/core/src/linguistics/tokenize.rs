//! Whitespace tokenizer with punctuation detachment and clitic splitting.
//!
//! Rules, applied to each whitespace-delimited chunk:
//! 1. every leading non-alphanumeric character becomes its own token;
//! 2. every trailing non-alphanumeric character becomes its own token;
//! 3. the remaining core is split before a clitic suffix (`n't`, `'s`, `'re`,
//!    `'ve`, `'ll`, `'d`; straight or curly apostrophe, any case) when a
//!    non-empty stem with an alphanumeric character precedes it.

use super::lexicon::lemmatize;
use super::syllables::SyllableCounter;
use super::{PosTag, Token};

const CLITICS: &[&str] = &["n't", "'s", "'re", "'ve", "'ll", "'d"];

/// Tokenizes with the heuristic syllable counter.
pub fn tokenize(text: &str) -> Vec<Token> {
    tokenize_with(text, &SyllableCounter::default())
}

pub fn tokenize_with(text: &str, syllables: &SyllableCounter) -> Vec<Token> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        for surface in split_chunk(chunk) {
            out.push(make_token(surface, syllables));
        }
    }
    out
}

fn split_chunk(chunk: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    let mut start = 0;
    let mut end = chunk.len();

    // leading punctuation
    for (i, c) in chunk.char_indices() {
        if c.is_alphanumeric() {
            break;
        }
        pieces.push(&chunk[i..i + c.len_utf8()]);
        start = i + c.len_utf8();
    }
    if start == end {
        return pieces;
    }

    // trailing punctuation, collected back to front
    let mut trailing = Vec::new();
    for (i, c) in chunk[start..].char_indices().rev() {
        if c.is_alphanumeric() {
            break;
        }
        let abs = start + i;
        trailing.push(&chunk[abs..abs + c.len_utf8()]);
        end = abs;
    }

    let core = &chunk[start..end];
    match clitic_split(core) {
        Some(at) => {
            pieces.push(&core[..at]);
            pieces.push(&core[at..]);
        }
        None => pieces.push(core),
    }
    pieces.extend(trailing.into_iter().rev());
    pieces
}

/// Byte offset where a clitic suffix begins, if any.
fn clitic_split(core: &str) -> Option<usize> {
    let normalized = core.replace('\u{2019}', "'").to_lowercase();
    for clitic in CLITICS {
        if normalized.ends_with(clitic) && normalized.len() > clitic.len() {
            // Map the offset back to `core`; the curly apostrophe is 3 bytes vs 1.
            let clitic_chars = clitic.chars().count();
            let at = core
                .char_indices()
                .rev()
                .nth(clitic_chars - 1)
                .map(|(i, _)| i)?;
            let stem = &core[..at];
            if stem.chars().any(char::is_alphanumeric) {
                return Some(at);
            }
        }
    }
    None
}

fn make_token(surface: &str, syllables: &SyllableCounter) -> Token {
    let has_alnum = surface.chars().any(char::is_alphanumeric);
    let char_len = surface.chars().filter(|c| c.is_alphabetic()).count();
    let has_digit = surface.chars().any(|c| c.is_numeric());
    let pos = if !has_alnum {
        PosTag::Punct
    } else if has_digit && char_len == 0 {
        PosTag::Num
    } else {
        PosTag::X
    };
    let syl = match pos {
        PosTag::Punct | PosTag::Num => 0,
        _ => syllables.count(surface),
    };
    Token {
        surface: surface.to_string(),
        lemma: if has_alnum { lemmatize(surface) } else { surface.to_string() },
        pos,
        char_len,
        syllables: syl,
        depth: 1,
    }
}
