//! Noun- and verb-phrase chunking over tags.

use super::{PosTag, Sentence, Span};

/// Fills `noun_phrases` and `verb_phrases`.
///
/// Noun phrases are leftmost-longest matches of `DET? ADJ* NOUN+`; verb phrases
/// are maximal runs over {AUX, VERB, PART, ADV} containing a VERB or AUX.
pub fn chunk_phrases(mut sentence: Sentence) -> Sentence {
    let tags: Vec<PosTag> = sentence.tokens.iter().map(|t| t.pos).collect();
    sentence.noun_phrases = noun_phrases(&tags);
    sentence.verb_phrases = verb_phrases(&tags);
    sentence
}

fn match_np(tags: &[PosTag], start: usize) -> Option<usize> {
    let mut i = start;
    if tags.get(i) == Some(&PosTag::Det) {
        i += 1;
    }
    while tags.get(i) == Some(&PosTag::Adj) {
        i += 1;
    }
    let nouns_from = i;
    while tags.get(i) == Some(&PosTag::Noun) {
        i += 1;
    }
    (i > nouns_from).then_some(i)
}

pub(crate) fn noun_phrases(tags: &[PosTag]) -> Vec<Span> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        match match_np(tags, i) {
            Some(end) => {
                out.push(Span::new(i, end));
                i = end;
            }
            None => i += 1,
        }
    }
    out
}

pub(crate) fn verb_phrases(tags: &[PosTag]) -> Vec<Span> {
    let in_vp = |t: PosTag| matches!(t, PosTag::Aux | PosTag::Verb | PosTag::Part | PosTag::Adv);
    let mut out = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        if !in_vp(tags[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < tags.len() && in_vp(tags[i]) {
            i += 1;
        }
        if tags[start..i].iter().any(|t| t.is_verbal()) {
            out.push(Span::new(start, i));
        }
    }
    out
}
