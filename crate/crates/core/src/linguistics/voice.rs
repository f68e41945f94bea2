//! Passive voice detection.

use super::lexicon::{is_in, BE_FORMS, IRREGULAR_PARTICIPLES};
use super::{PassiveConstruction, PosTag, Sentence, Span, Token};

fn is_participle(t: &Token) -> bool {
    if t.pos != PosTag::Verb {
        return false;
    }
    let lower = t.lower();
    let n = lower.chars().count();
    (n > 3 && (lower.ends_with("ed") || lower.ends_with("en"))) || is_in(IRREGULAR_PARTICIPLES, &lower)
}

/// Fills `passive_constructions`.
///
/// A passive is a form of "be" followed, one or two tokens later, by a VERB
/// that ends in `-ed`/`-en` or is an irregular participle. It is agentless
/// when none of the three tokens after the participle is "by". Detection
/// resumes after the participle.
pub fn detect_voice(mut sentence: Sentence) -> Sentence {
    let toks = &sentence.tokens;
    let mut found = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        if !is_in(BE_FORMS, &toks[i].lower()) {
            i += 1;
            continue;
        }
        let participle = (i + 1..=i + 2)
            .take_while(|&j| j < toks.len())
            .find(|&j| is_participle(&toks[j]));
        match participle {
            Some(p) => {
                let agentless = !toks
                    .iter()
                    .skip(p + 1)
                    .take(3)
                    .any(|t| t.surface.eq_ignore_ascii_case("by"));
                found.push(PassiveConstruction {
                    span: Span::new(i, p + 1),
                    agentless,
                });
                i = p + 1;
            }
            None => i += 1,
        }
    }
    sentence.passive_constructions = found;
    sentence
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linguistics::{tag_pos, tokenize, SenseLexicon};

    fn passives(text: &str) -> Vec<PassiveConstruction> {
        let tokens = tag_pos(tokenize(text), &SenseLexicon::builtin());
        detect_voice(Sentence::new(tokens)).passive_constructions
    }

    #[test]
    fn pinned_examples() {
        let p = passives("was eaten by dogs");
        assert_eq!(p.len(), 1);
        assert!(!p[0].agentless);
        let p = passives("was eaten");
        assert_eq!(p.len(), 1);
        assert!(p[0].agentless);
        assert!(passives("the dog ate").is_empty());
    }

    #[test]
    fn regular_participle_with_gap() {
        let p = passives("The ball is quickly kicked into the goal by Sam.");
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].span, Span::new(2, 5));
        // "into the goal" fills the three-token window before "by"
        assert!(p[0].agentless);
    }

    #[test]
    fn be_without_participle() {
        assert!(passives("The sky is blue.").is_empty());
        assert!(passives("It was a chicken.").is_empty());
    }
}
