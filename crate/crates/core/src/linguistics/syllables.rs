//! Syllable counting: optional pronunciation dictionary, vowel-group fallback.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Heuristic syllable count of a word.
///
/// Only the alphabetic characters are considered. Counts maximal runs of
/// `a e i o u y`, subtracts one for a final silent `e` (the `e` follows a
/// non-vowel and the word does not end in consonant + `le`), and never returns
/// less than 1 for a word with a letter. Words without letters count 0.
pub fn count_syllables(word: &str) -> u32 {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if letters.is_empty() {
        return 0;
    }

    let mut groups = 0u32;
    let mut in_group = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }

    let n = letters.len();
    if n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2]) {
        let consonant_le = n >= 3 && letters[n - 2] == 'l' && !is_vowel(letters[n - 3]);
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    groups.max(1)
}

/// Syllable counter backed by an optional `word<TAB>count` dictionary.
#[derive(Debug, Clone, Default)]
pub struct SyllableCounter {
    dictionary: HashMap<String, u32>,
}

impl SyllableCounter {
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut dictionary = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::Domain(format!("syllable dictionary line {}: expected 2 columns", i + 1)))?;
            let count: u32 = count
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("syllable dictionary line {}: bad count", i + 1)))?;
            dictionary.insert(word.trim().to_lowercase(), count);
        }
        Ok(Self { dictionary })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text)
    }

    pub fn len(&self) -> usize {
        self.dictionary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dictionary.is_empty()
    }

    /// Dictionary entry for the lowercased word if present, else the heuristic.
    pub fn count(&self, word: &str) -> u32 {
        if !word.chars().any(char::is_alphabetic) {
            return 0;
        }
        if !self.dictionary.is_empty() {
            if let Some(&n) = self.dictionary.get(&word.to_lowercase()) {
                return n;
            }
        }
        count_syllables(word)
    }
}
