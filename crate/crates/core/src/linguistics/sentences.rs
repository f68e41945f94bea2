//! Sentence splitting.
//!
//! A sentence ends after a run of `.`, `!` or `?` (optionally followed by
//! closing quotes or brackets) when the run is followed by whitespace and an
//! uppercase letter (opening quotes or brackets may precede the letter), or by
//! the end of the text. A run ending in `.` does not
//! split when the whitespace-delimited word carrying it, stripped of leading
//! punctuation and lowercased, is a listed abbreviation.
//!
//! Returned sentences are trimmed slices of the input; only whitespace lies
//! between consecutive sentences.

use super::lexicon::SenseLexicon;

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '{' | '\u{201C}' | '\u{2018}')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '\u{201D}' | '\u{2019}')
}

/// Splits with the bundled abbreviation list.
pub fn split_sentences(text: &str) -> Vec<&str> {
    thread_local! {
        static LEXICON: SenseLexicon = SenseLexicon::builtin();
    }
    LEXICON.with(|lex| split_sentences_with(text, |w| lex.is_abbreviation(w)))
}

pub fn split_sentences_with<'a>(text: &'a str, is_abbreviation: impl Fn(&str) -> bool) -> Vec<&'a str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut sentence_start = 0usize;
    let mut i = 0usize;

    while i < chars.len() {
        let (_, c) = chars[i];
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < chars.len() && is_terminator(chars[j + 1].1) {
            j += 1;
        }
        let last_terminator = chars[j].1;
        let mut k = j + 1;
        while k < chars.len() && is_closer(chars[k].1) {
            k += 1;
        }
        let boundary = chars.get(k).map_or(text.len(), |&(b, _)| b);

        let at_end = text[boundary..].trim().is_empty();
        let mut splits = at_end;
        if !at_end && chars[k].1.is_whitespace() {
            let next = chars[k..]
                .iter()
                .find(|(_, ch)| !ch.is_whitespace() && !is_opener(*ch));
            splits = matches!(next, Some((_, ch)) if ch.is_uppercase());
        }
        if splits && last_terminator == '.' && !at_end {
            let word_start = chars[..=j]
                .iter()
                .rev()
                .find(|(_, ch)| ch.is_whitespace())
                .map_or(0, |&(b, ch)| b + ch.len_utf8());
            let word = text[word_start..chars[j].0 + 1]
                .trim_start_matches(|ch: char| !ch.is_alphanumeric())
                .to_lowercase();
            if is_abbreviation(&word) {
                splits = false;
            }
        }

        if splits {
            let s = text[sentence_start..boundary].trim();
            if !s.is_empty() {
                out.push(s);
            }
            sentence_start = boundary;
        }
        i = k.max(i + 1);
    }

    let rest = text[sentence_start..].trim();
    if !rest.is_empty() {
        out.push(rest);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_examples() {
        assert!(split_sentences("").is_empty());
        assert_eq!(split_sentences("A b. C d!"), ["A b.", "C d!"]);
        assert_eq!(split_sentences("Dr. Li ran."), ["Dr. Li ran."]);
    }

    #[test]
    fn no_terminator_is_one_sentence() {
        assert_eq!(split_sentences("just some words"), ["just some words"]);
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(split_sentences("It is 3.5 m. long. Yes?"), ["It is 3.5 m. long.", "Yes?"]);
    }

    #[test]
    fn terminator_runs_and_closers() {
        assert_eq!(
            split_sentences("Really?! \"Yes.\" Then go."),
            ["Really?!", "\"Yes.\"", "Then go."]
        );
    }

    #[test]
    fn separators_are_whitespace_only() {
        let text = "  One. Two!\n\nThree? four  ";
        let parts = split_sentences(text);
        assert_eq!(parts, ["One.", "Two!", "Three? four"]);
        let mut rest = text;
        for p in parts {
            let at = rest.find(p).unwrap();
            assert!(rest[..at].trim().is_empty());
            rest = &rest[at + p.len()..];
        }
        assert!(rest.trim().is_empty());
    }
}
