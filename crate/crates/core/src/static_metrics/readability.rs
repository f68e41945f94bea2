//! The seven readability indices.
//!
//! With W words, S sentences, Y syllables, C alphabetic characters,
//! CW words of three or more syllables and P adpositions:
//!
//! | index | formula |
//! |---|---|
//! | Flesch reading ease | 206.835 − 1.015·W/S − 84.6·Y/W |
//! | Flesch-Kincaid grade | 0.39·W/S + 11.8·Y/W − 15.59 |
//! | Gunning Fog | 0.4·(W/S + 100·CW/W) |
//! | SMOG | 1.0430·√(CW·30/S) + 3.1291 |
//! | Coleman-Liau | 0.0588·(100·C/W) − 0.296·(100·S/W) − 15.8 |
//! | ARI | 4.71·C/W + 0.5·W/S − 21.43 |
//! | Tränkle-Bailer | 224.6814 − 79.8304·C/W − 12.24032·W/S − 1.292857·(100·P/W) |
//!
//! SMOG has no 30-sentence minimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linguistics::{PosTag, Sentence};
use crate::scalar::Scalar;

/// Words with at least this many syllables are complex.
pub const COMPLEX_WORD_SYLLABLES: u32 = 3;

/// Raw counts behind the indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadabilityCounts {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    pub letters: usize,
    pub complex_words: usize,
    pub prepositions: usize,
}

impl ReadabilityCounts {
    /// Counts over analyzed sentences. Sentences without a word are not counted.
    pub fn from_sentences<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> Self {
        let mut c = Self::default();
        for s in sentences {
            let mut any_word = false;
            for t in &s.tokens {
                if t.pos == PosTag::Adp {
                    c.prepositions += 1;
                }
                if !t.is_word() {
                    continue;
                }
                any_word = true;
                c.words += 1;
                c.syllables += t.syllables as usize;
                c.letters += t.char_len;
                if t.syllables >= COMPLEX_WORD_SYLLABLES {
                    c.complex_words += 1;
                }
            }
            if any_word {
                c.sentences += 1;
            }
        }
        c
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            words: self.words + other.words,
            sentences: self.sentences + other.sentences,
            syllables: self.syllables + other.syllables,
            letters: self.letters + other.letters,
            complex_words: self.complex_words + other.complex_words,
            prepositions: self.prepositions + other.prepositions,
        }
    }

    pub fn indices<T: Scalar>(&self) -> Result<ReadabilityIndices<T>> {
        ReadabilityIndices::from_counts(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityIndices<T> {
    pub flesch_kincaid_grade: T,
    pub flesch_kincaid_ease: T,
    pub coleman_liau_index: T,
    pub automated_readability_index: T,
    pub smog_index: T,
    pub gunning_fog: T,
    pub traenkle_bailer_index: T,
}

impl<T: Scalar> ReadabilityIndices<T> {
    pub fn from_counts(c: &ReadabilityCounts) -> Result<Self> {
        if c.words == 0 || c.sentences == 0 {
            return Err(Error::DegenerateInput(format!(
                "readability needs words and sentences, got {} words in {} sentences",
                c.words, c.sentences
            )));
        }
        let k = T::lit;
        let w = T::from_count(c.words);
        let s = T::from_count(c.sentences);
        let y = T::from_count(c.syllables);
        let ch = T::from_count(c.letters);
        let cw = T::from_count(c.complex_words);
        let p = T::from_count(c.prepositions);
        let hundred = k(100.0);

        let wps = w / s;
        let spw = y / w;
        let cpw = ch / w;
        Ok(Self {
            flesch_kincaid_ease: k(206.835) - k(1.015) * wps - k(84.6) * spw,
            flesch_kincaid_grade: k(0.39) * wps + k(11.8) * spw - k(15.59),
            gunning_fog: k(0.4) * (wps + hundred * cw / w),
            smog_index: k(1.0430) * (cw * k(30.0) / s).sqrt() + k(3.1291),
            coleman_liau_index: k(0.0588) * (hundred * ch / w) - k(0.296) * (hundred * s / w) - k(15.8),
            automated_readability_index: k(4.71) * cpw + k(0.5) * wps - k(21.43),
            traenkle_bailer_index: k(224.6814) - k(79.8304) * cpw - k(12.24032) * wps
                - k(1.292857) * (hundred * p / w),
        })
    }

    /// Values in feature-vector order.
    pub fn to_array(&self) -> [T; 7] {
        [
            self.flesch_kincaid_grade,
            self.flesch_kincaid_ease,
            self.coleman_liau_index,
            self.automated_readability_index,
            self.smog_index,
            self.gunning_fog,
            self.traenkle_bailer_index,
        ]
    }
}

/// Indices of a single text analyzed as one unit.
pub fn readability_indices<T: Scalar>(text: &str, analyzer: &crate::linguistics::Analyzer) -> Result<ReadabilityIndices<T>> {
    ReadabilityCounts::from_sentences(&analyzer.analyze(text)).indices()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linguistics::Analyzer;

    #[test]
    fn the_cat_sat() {
        let a = Analyzer::default();
        let r: ReadabilityIndices<f64> = readability_indices("The cat sat.", &a).unwrap();
        // W=3 S=1 Y=3 C=9
        assert!((r.flesch_kincaid_ease - 119.19).abs() < 1e-9);
        assert!((r.automated_readability_index - (-5.80)).abs() < 1e-9);
        assert!((r.smog_index - 3.1291).abs() < 1e-12);
    }

    #[test]
    fn f32_matches_f64() {
        let c = ReadabilityCounts {
            words: 120,
            sentences: 7,
            syllables: 190,
            letters: 560,
            complex_words: 14,
            prepositions: 11,
        };
        let a = c.indices::<f64>().unwrap().to_array();
        let b = c.indices::<f32>().unwrap().to_array();
        for (x, y) in a.iter().zip(b) {
            assert!((x - y as f64).abs() < 1e-3 * x.abs().max(1.0));
        }
    }

    #[test]
    fn no_words_is_degenerate() {
        let a = Analyzer::default();
        assert!(matches!(readability_indices::<f64>("", &a), Err(Error::DegenerateInput(_))));
        assert!(matches!(readability_indices::<f64>("?!", &a), Err(Error::DegenerateInput(_))));
    }
}
