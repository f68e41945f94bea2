//! Lexicon + suffix-rule part-of-speech tagger.

use super::lexicon::{closed_class_tag, SenseLexicon};
use super::{PosTag, Token};

/// Suffix rules tried in order on the lowercased surface. A rule applies only
/// when the word is longer than the suffix by at least `min_stem` letters.
const SUFFIX_RULES: &[(&str, usize, PosTag)] = &[
    ("ly", 3, PosTag::Adv),
    ("tion", 2, PosTag::Noun),
    ("sion", 2, PosTag::Noun),
    ("ment", 3, PosTag::Noun),
    ("ness", 3, PosTag::Noun),
    ("ity", 3, PosTag::Noun),
    ("ism", 3, PosTag::Noun),
    ("ance", 3, PosTag::Noun),
    ("ence", 3, PosTag::Noun),
    ("ship", 3, PosTag::Noun),
    ("hood", 3, PosTag::Noun),
    ("ize", 3, PosTag::Verb),
    ("ise", 3, PosTag::Verb),
    ("ify", 3, PosTag::Verb),
    ("ous", 3, PosTag::Adj),
    ("ful", 3, PosTag::Adj),
    ("ive", 3, PosTag::Adj),
    ("able", 3, PosTag::Adj),
    ("ible", 3, PosTag::Adj),
    ("less", 3, PosTag::Adj),
    ("ical", 3, PosTag::Adj),
    ("al", 4, PosTag::Adj),
    ("ic", 4, PosTag::Adj),
    ("ing", 3, PosTag::Verb),
    ("ed", 3, PosTag::Verb),
];

/// Context-free tag of one token.
///
/// Order: PUNCT/NUM from the characters; closed-class lists; the lexicon's
/// majority tag for the lowercased surface, then for the lemma; suffix rules;
/// NOUN.
pub fn tag_word(token: &Token, lexicon: &SenseLexicon) -> PosTag {
    if !token.has_alphanumeric() {
        return PosTag::Punct;
    }
    if token.char_len == 0 {
        return PosTag::Num;
    }
    let lower = token.lower().replace('\u{2019}', "'");
    if let Some(tag) = closed_class_tag(&lower) {
        return tag;
    }
    if lower.starts_with('\'') && lower.len() > 1 {
        // 's 're 've 'll 'd
        return if lower == "'s" { PosTag::Part } else { PosTag::Aux };
    }
    if let Some(tag) = lexicon
        .majority_tag(&lower)
        .or_else(|| lexicon.majority_tag(&token.lemma))
    {
        return tag;
    }
    let len = lower.chars().count();
    SUFFIX_RULES
        .iter()
        .find(|(suffix, min_stem, _)| lower.ends_with(suffix) && len >= suffix.len() + min_stem)
        .map_or(PosTag::Noun, |&(_, _, tag)| tag)
}

/// Tags every token. One contextual rule: `to` directly before a VERB is PART.
pub fn tag_pos(mut tokens: Vec<Token>, lexicon: &SenseLexicon) -> Vec<Token> {
    for t in tokens.iter_mut() {
        t.pos = tag_word(t, lexicon);
    }
    for i in 0..tokens.len().saturating_sub(1) {
        if tokens[i].surface.eq_ignore_ascii_case("to") && tokens[i + 1].pos == PosTag::Verb {
            tokens[i].pos = PosTag::Part;
        }
    }
    tokens
}
