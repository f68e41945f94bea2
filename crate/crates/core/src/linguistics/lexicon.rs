//! Word lists, lemmatization and the word-sense lexicon.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::PosTag;
use crate::error::{Error, Result};

const DEFAULT_SENSES: &str = include_str!("../../data/senses.tsv");
const DEFAULT_TAGS: &str = include_str!("../../data/tag_lexicon.tsv");
const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");
const DEFAULT_ABBREVIATIONS: &str = include_str!("../../data/abbreviations.txt");

pub const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "each", "every", "some", "any", "no",
    "all", "both", "either", "neither", "another", "my", "your", "his", "her", "its", "our",
    "their",
];

pub const PRONOUNS: &[&str] = &[
    "i", "me", "you", "he", "him", "she", "it", "we", "us", "they", "them", "myself",
    "yourself", "himself", "herself", "itself", "ourselves", "yourselves", "themselves", "who",
    "whom", "whose", "what", "which", "whoever", "whatever", "something", "anything", "nothing",
    "everything", "someone", "anyone", "everyone", "nobody", "somebody", "anybody", "everybody",
    "mine", "yours", "hers", "ours", "theirs",
];

pub const ADPOSITIONS: &[&str] = &[
    "of", "in", "on", "at", "by", "for", "with", "about", "against", "between", "into",
    "through", "during", "before", "after", "above", "below", "to", "from", "up", "down",
    "over", "under", "around", "among", "across", "behind", "beyond", "near", "inside",
    "outside", "onto", "upon", "within", "without", "toward", "towards", "like", "than", "per",
    "via", "off", "out", "along", "beside", "besides", "throughout", "underneath", "past",
];

pub const CONJUNCTIONS: &[&str] = &[
    "and", "or", "but", "nor", "so", "yet", "because", "although", "though", "while", "if",
    "unless", "whereas", "whether", "since", "until",
];

/// Auxiliaries. These never count as non-auxiliary verbs.
pub const AUXILIARIES: &[&str] = &[
    "be", "am", "is", "are", "was", "were", "been", "being", "have", "has", "had", "having",
    "do", "does", "did", "will", "would", "shall", "should", "can", "could", "may", "might",
    "must",
];

pub const PARTICLES: &[&str] = &["not", "n't"];

pub const CLOSED_ADVERBS: &[&str] = &[
    "very", "too", "also", "just", "only", "then", "there", "here", "now", "often", "always",
    "never", "sometimes", "how", "when", "where", "why", "however", "still", "even", "already",
    "quite", "rather", "almost", "again", "ever", "soon", "once",
];

/// Forms of "be" that open a passive construction.
pub const BE_FORMS: &[&str] = &["be", "is", "are", "was", "were", "been", "being"];

pub const IRREGULAR_PARTICIPLES: &[&str] = &[
    "eaten", "given", "taken", "written", "seen", "known", "shown", "grown", "drawn", "thrown",
    "born", "done", "gone", "begun", "broken", "chosen", "driven", "fallen", "forgotten",
    "frozen", "hidden", "ridden", "risen", "spoken", "stolen", "woken", "worn", "torn", "sung",
    "swum", "flown", "blown", "bitten", "shaken", "mistaken", "made", "built", "found", "held",
    "kept", "left", "lost", "paid", "said", "sold", "sent", "told", "taught", "thought",
    "bought", "brought", "caught", "put", "set", "cut", "hit", "shut", "read", "led", "fed",
    "felt", "heard", "meant", "met", "understood", "stood", "won", "struck", "spun", "hung",
    "dug", "stuck", "bent", "spent", "lent", "bound", "wound", "ground", "shot", "slept",
];

/// Clause-boundary words used by the distance-to-root approximation.
pub const SUBORDINATORS: &[&str] = &[
    "because", "although", "though", "while", "if", "unless", "whereas", "whether", "since",
    "which", "who", "whom", "whose", "where", "when", "until",
];

/// Sentence-initial negators counted as "lead-in" negation.
pub const LEAD_IN_NEGATORS: &[&str] = &["no", "not", "never", "n't"];

pub const NEGATION_PREFIXES: &[&str] = &["non", "dis", "un", "in", "im", "ir"];

const IRREGULAR_LEMMAS: &[(&str, &str)] = &[
    ("am", "be"), ("is", "be"), ("are", "be"), ("was", "be"), ("were", "be"), ("been", "be"),
    ("being", "be"), ("has", "have"), ("had", "have"), ("having", "have"), ("does", "do"),
    ("did", "do"), ("done", "do"), ("ran", "run"), ("sat", "sit"), ("ate", "eat"),
    ("eaten", "eat"), ("went", "go"), ("gone", "go"), ("came", "come"), ("saw", "see"),
    ("seen", "see"), ("made", "make"), ("took", "take"), ("taken", "take"), ("gave", "give"),
    ("given", "give"), ("found", "find"), ("knew", "know"), ("known", "know"), ("grew", "grow"),
    ("grown", "grow"), ("wrote", "write"), ("written", "write"), ("drew", "draw"),
    ("drawn", "draw"), ("threw", "throw"), ("thrown", "throw"), ("flew", "fly"),
    ("flown", "fly"), ("fell", "fall"), ("fallen", "fall"), ("rose", "rise"), ("risen", "rise"),
    ("chose", "choose"), ("chosen", "choose"), ("spoke", "speak"), ("spoken", "speak"),
    ("broke", "break"), ("broken", "break"), ("froze", "freeze"), ("frozen", "freeze"),
    ("thought", "think"), ("told", "tell"), ("said", "say"), ("got", "get"), ("held", "hold"),
    ("kept", "keep"), ("felt", "feel"), ("brought", "bring"), ("bought", "buy"),
    ("caught", "catch"), ("taught", "teach"), ("built", "build"), ("sent", "send"),
    ("spent", "spend"), ("left", "leave"), ("lost", "lose"), ("paid", "pay"), ("met", "meet"),
    ("led", "lead"), ("fed", "feed"), ("heard", "hear"), ("meant", "mean"), ("stood", "stand"),
    ("understood", "understand"), ("won", "win"), ("sold", "sell"), ("slept", "sleep"),
    ("began", "begin"), ("begun", "begin"), ("became", "become"), ("children", "child"),
    ("people", "person"), ("men", "man"), ("women", "woman"), ("mice", "mouse"),
    ("feet", "foot"), ("teeth", "tooth"), ("geese", "goose"), ("n't", "not"),
];

pub fn is_in(list: &[&str], word: &str) -> bool {
    list.contains(&word)
}

/// Closed-class tag of a lowercased word, if it has one.
///
/// Lookup order: particles, auxiliaries, determiners, pronouns, adpositions,
/// conjunctions, closed adverbs. The first list containing the word wins.
pub fn closed_class_tag(lower: &str) -> Option<PosTag> {
    let tables: [(&[&str], PosTag); 7] = [
        (PARTICLES, PosTag::Part),
        (AUXILIARIES, PosTag::Aux),
        (DETERMINERS, PosTag::Det),
        (PRONOUNS, PosTag::Pron),
        (ADPOSITIONS, PosTag::Adp),
        (CONJUNCTIONS, PosTag::Conj),
        (CLOSED_ADVERBS, PosTag::Adv),
    ];
    tables
        .iter()
        .find(|(list, _)| list.contains(&lower))
        .map(|&(_, tag)| tag)
}

pub fn is_closed_class(lower: &str) -> bool {
    closed_class_tag(lower).is_some()
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn restore_stem(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n >= 2 && chars[n - 1] == chars[n - 2] && !is_vowel(chars[n - 1]) && !matches!(chars[n - 1], 'l' | 's' | 'z') {
        return chars[..n - 1].iter().collect();
    }
    if ["at", "bl", "iz", "us", "v", "c", "dg"].iter().any(|s| stem.ends_with(s)) {
        return format!("{stem}e");
    }
    stem.to_string()
}

/// Lowercased surface with inflectional suffixes stripped.
///
/// Rules, first match wins: irregular table; closed-class words unchanged;
/// `-ies`→`-y`; `-sses`→`-ss`; `-es` after s/x/z/ch/sh dropped; `-s` dropped
/// unless the word ends in `ss`/`us`/`is` or is shorter than 4 letters;
/// `-ied`→`-y`; `-ed` (word longer than 4) and `-ing` (longer than 5) dropped,
/// then a doubled final consonant other than l/s/z is undoubled, or an `e` is
/// restored after at/bl/iz/us/v/c/dg.
pub fn lemmatize(surface: &str) -> String {
    let lower = surface.to_lowercase();
    if let Some(&(_, lemma)) = IRREGULAR_LEMMAS.iter().find(|(form, _)| *form == lower) {
        return lemma.to_string();
    }
    if is_closed_class(&lower) || !lower.chars().all(|c| c.is_alphabetic()) {
        return lower;
    }
    let len = lower.chars().count();
    if len > 4 && lower.ends_with("ies") {
        return format!("{}y", &lower[..lower.len() - 3]);
    }
    if lower.ends_with("sses") {
        return lower[..lower.len() - 2].to_string();
    }
    if len > 3
        && lower.ends_with("es")
        && ["ses", "xes", "zes", "ches", "shes"].iter().any(|s| lower.ends_with(s))
    {
        return lower[..lower.len() - 2].to_string();
    }
    if len >= 4 && lower.ends_with('s') && !["ss", "us", "is"].iter().any(|s| lower.ends_with(s)) {
        return lower[..lower.len() - 1].to_string();
    }
    if len > 4 && lower.ends_with("ied") {
        return format!("{}y", &lower[..lower.len() - 3]);
    }
    if len > 4 && lower.ends_with("ed") {
        return restore_stem(&lower[..lower.len() - 2]);
    }
    if len > 5 && lower.ends_with("ing") {
        return restore_stem(&lower[..lower.len() - 3]);
    }
    lower
}

/// Word-sense counts, stopwords, majority tags and negation prefixes.
#[derive(Debug, Clone)]
pub struct SenseLexicon {
    entries: HashMap<(String, PosTag), u32>,
    stopwords: HashSet<String>,
    tag_lexicon: HashMap<String, PosTag>,
    negation_prefixes: Vec<String>,
    abbreviations: HashSet<String>,
}

impl Default for SenseLexicon {
    fn default() -> Self {
        Self::builtin()
    }
}

impl SenseLexicon {
    /// Lexicon assembled from the data files compiled into the crate.
    pub fn builtin() -> Self {
        Self {
            entries: parse_senses(DEFAULT_SENSES).expect("bundled sense lexicon is valid"),
            stopwords: parse_list(DEFAULT_STOPWORDS),
            tag_lexicon: parse_tags(DEFAULT_TAGS).expect("bundled tag lexicon is valid"),
            negation_prefixes: NEGATION_PREFIXES.iter().map(|s| s.to_string()).collect(),
            abbreviations: parse_list(DEFAULT_ABBREVIATIONS),
        }
    }

    pub fn empty() -> Self {
        Self {
            entries: HashMap::new(),
            stopwords: HashSet::new(),
            tag_lexicon: HashMap::new(),
            negation_prefixes: NEGATION_PREFIXES.iter().map(|s| s.to_string()).collect(),
            abbreviations: HashSet::new(),
        }
    }

    /// Replaces the sense table with a `lemma<TAB>pos<TAB>sense_count` file.
    pub fn with_senses_file(mut self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.entries = parse_senses(&text)?;
        Ok(self)
    }

    pub fn with_stopwords_file(mut self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.stopwords = parse_list(&text);
        Ok(self)
    }

    pub fn with_abbreviations_file(mut self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.abbreviations = parse_list(&text);
        Ok(self)
    }

    pub fn with_tag_lexicon_file(mut self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.tag_lexicon = parse_tags(&text)?;
        Ok(self)
    }

    pub fn insert_sense(&mut self, lemma: &str, pos: PosTag, count: u32) {
        assert!(count >= 1, "sense counts are positive");
        self.entries.insert((lemma.to_lowercase(), pos), count);
    }

    pub fn insert_tag(&mut self, lemma: &str, pos: PosTag) {
        self.tag_lexicon.insert(lemma.to_lowercase(), pos);
    }

    /// Stored sense count, 0 when `(lemma, pos)` is absent.
    pub fn sense_count(&self, lemma: &str, pos: PosTag) -> u32 {
        self.entries
            .get(&(lemma.to_lowercase(), pos))
            .copied()
            .unwrap_or(0)
    }

    pub fn is_polysemic(&self, lemma: &str, pos: PosTag) -> bool {
        self.sense_count(lemma, pos) > 1
    }

    pub fn is_stopword(&self, lower: &str) -> bool {
        self.stopwords.contains(lower)
    }

    pub fn majority_tag(&self, lemma: &str) -> Option<PosTag> {
        self.tag_lexicon.get(lemma).copied()
    }

    pub fn negation_prefixes(&self) -> &[String] {
        &self.negation_prefixes
    }

    pub fn is_abbreviation(&self, lower: &str) -> bool {
        self.abbreviations.contains(lower)
    }

    /// Whether a lowercased word is known to either the tag or the sense table.
    pub fn knows(&self, lower: &str) -> bool {
        self.tag_lexicon.contains_key(lower)
            || PosTag::ALL.iter().any(|&p| self.entries.contains_key(&(lower.to_string(), p)))
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn parse_list(text: &str) -> HashSet<String> {
    content_lines(text).map(|(_, l)| l.trim().to_lowercase()).collect()
}

fn parse_senses(text: &str) -> Result<HashMap<(String, PosTag), u32>> {
    let mut out = HashMap::new();
    for (line, l) in content_lines(text) {
        let cols: Vec<&str> = l.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Domain(format!("sense lexicon line {line}: expected 3 columns")));
        }
        let pos: PosTag = cols[1]
            .parse()
            .map_err(|_| Error::Domain(format!("sense lexicon line {line}: bad tag '{}'", cols[1])))?;
        let count: u32 = cols[2]
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("sense lexicon line {line}: bad count '{}'", cols[2])))?;
        if count == 0 {
            return Err(Error::Domain(format!("sense lexicon line {line}: sense_count must be >= 1")));
        }
        out.insert((cols[0].trim().to_lowercase(), pos), count);
    }
    Ok(out)
}

fn parse_tags(text: &str) -> Result<HashMap<String, PosTag>> {
    let mut out = HashMap::new();
    for (line, l) in content_lines(text) {
        let (word, tag) = l
            .split_once('\t')
            .ok_or_else(|| Error::Domain(format!("tag lexicon line {line}: expected 2 columns")))?;
        let tag: PosTag = tag
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("tag lexicon line {line}: bad tag '{tag}'")))?;
        out.insert(word.trim().to_lowercase(), tag);
    }
    Ok(out)
}
