//! The 46 static features of a document.
//!
//! Sentences are found per section (question, each choice, solution,
//! lecture), so a sentence never spans two sections and the order of the
//! choices cannot change any feature. Readability counts are summed over all
//! sections.

pub mod readability;

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::document::EduDocument;
use crate::error::{Error, Result};
use crate::linguistics::lexicon::{is_in, AUXILIARIES, LEAD_IN_NEGATORS};
use crate::linguistics::{Analyzer, Annotations, PosTag, Sentence, SenseLexicon, Token};
use readability::{ReadabilityCounts, ReadabilityIndices, COMPLEX_WORD_SYLLABLES};

pub const N_STATIC: usize = 46;

/// Feature names in output order.
pub const STATIC_FEATURE_NAMES: [&str; N_STATIC] = [
    "n_words_q",
    "n_words_a_solution",
    "n_words_a_lecture",
    "Text_Length",
    "Word_Count",
    "Nouns",
    "Verbs",
    "Adjectives",
    "Adverbs",
    "Num_Numbers",
    "Num_Commas",
    "Num_Complex_Words",
    "Num_Unique_Words",
    "Num_Content_Words",
    "Num_Content_Words_No_Stopwords",
    "Word_Length_Syllables",
    "Avg_Sentence_Length",
    "Num_Prepositional_Phrases",
    "Num_Negated_Words_Stem",
    "Num_Negated_Words_Lead_In",
    "Num_Main_Noun_Phrases",
    "Avg_Main_NP_Length",
    "Num_Verb_Phrases",
    "Prop_Active_Voice_Verbs",
    "Prop_Passive_Voice_Verbs",
    "Ratio_Active_to_Passive_Verbs",
    "Num_Words_Before_Main_Verb",
    "Num_Agentless_Passive_Constructions",
    "Word_Length_Std_Dev",
    "Num_Polysemic_Words",
    "Num_Word_Senses",
    "Num_Word_Senses_For_Content_Words",
    "Num_Word_Senses_For_Nouns",
    "Num_Word_Senses_For_Verbs",
    "Num_Word_Senses_For_Non_Auxiliary_Verbs",
    "Num_Word_Senses_For_Adjectives",
    "Num_Word_Senses_For_Adverbs",
    "Distance_To_Root_Nouns",
    "Distance_To_Root_Verbs",
    "flesch_kincaid_grade",
    "flesch_kincaid_ease",
    "coleman_liau_index",
    "automated_readability_index",
    "smog_index",
    "gunning_fog",
    "traenkle_bailer_index",
];

/// Position of a static feature by name.
pub fn feature_index(name: &str) -> Option<usize> {
    STATIC_FEATURE_NAMES.iter().position(|n| *n == name)
}

/// Named subset of features produced by one extraction step.
pub type Partial = Vec<(&'static str, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticFeatureVector {
    values: Vec<f64>,
}

impl StaticFeatureVector {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() != N_STATIC {
            return Err(Error::Shape {
                expected: N_STATIC,
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    fn from_partials(parts: impl IntoIterator<Item = Partial>) -> Self {
        let mut values = vec![f64::NAN; N_STATIC];
        for (name, value) in parts.into_iter().flatten() {
            let i = feature_index(name).expect("partial names are static feature names");
            values[i] = value;
        }
        debug_assert!(values.iter().all(|v| v.is_finite()), "every feature filled");
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        STATIC_FEATURE_NAMES.iter().copied().zip(self.values.iter().copied())
    }
}

/// Sentences of every section, in section order.
pub fn analyze_document(doc: &EduDocument, analyzer: &Analyzer) -> Vec<Sentence> {
    doc.sections().flat_map(|s| analyzer.analyze(s)).collect()
}

fn words<'a>(sentences: &'a [Sentence]) -> impl Iterator<Item = &'a Token> + 'a {
    sentences.iter().flat_map(|s| &s.tokens).filter(|t| t.is_word())
}

fn count(n: usize) -> f64 {
    n as f64
}

fn mean(sum: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn word_count(text: &str, analyzer: &Analyzer) -> usize {
    analyzer.tokenize(text).iter().filter(|t| t.is_word()).count()
}

/// Section word counts, character counts and word-level lexical statistics.
pub fn surface_counts(doc: &EduDocument, sentences: &[Sentence], analyzer: &Analyzer) -> Partial {
    let lexicon = &analyzer.lexicon;
    let full_text = doc.full_text();
    let ws: Vec<&Token> = words(sentences).collect();
    let n = ws.len();
    let counts = ReadabilityCounts::from_sentences(sentences);

    let unique: HashSet<String> = ws.iter().map(|t| t.lower()).collect();
    let content: Vec<&&Token> = ws.iter().filter(|t| t.pos.is_content()).collect();
    let content_no_stop = content.iter().filter(|t| !lexicon.is_stopword(&t.lower())).count();

    let lengths: Vec<f64> = ws.iter().filter(|t| t.is_alphabetic()).map(|t| t.char_len as f64).collect();
    let len_mean = mean(lengths.iter().sum(), lengths.len());
    let len_var = mean(lengths.iter().map(|l| (l - len_mean).powi(2)).sum(), lengths.len());

    vec![
        ("n_words_q", count(word_count(&doc.question, analyzer))),
        ("n_words_a_solution", count(word_count(&doc.solution, analyzer))),
        ("n_words_a_lecture", count(word_count(&doc.lecture, analyzer))),
        ("Text_Length", count(full_text.chars().count())),
        ("Word_Count", count(n)),
        ("Num_Numbers", count(full_text.chars().filter(|c| c.is_numeric()).count())),
        ("Num_Commas", count(full_text.chars().filter(|&c| c == ',').count())),
        (
            "Num_Complex_Words",
            count(ws.iter().filter(|t| t.syllables >= COMPLEX_WORD_SYLLABLES).count()),
        ),
        ("Num_Unique_Words", count(unique.len())),
        ("Num_Content_Words", count(content.len())),
        ("Num_Content_Words_No_Stopwords", count(content_no_stop)),
        ("Word_Length_Syllables", mean(counts.syllables as f64, n)),
        ("Avg_Sentence_Length", mean(n as f64, counts.sentences)),
        ("Word_Length_Std_Dev", len_var.sqrt()),
    ]
}

fn is_negated_stem(lemma: &str, lexicon: &SenseLexicon) -> bool {
    lexicon.negation_prefixes().iter().any(|p| {
        lemma
            .strip_prefix(p.as_str())
            .is_some_and(|rest| rest.chars().count() >= 3 && lexicon.knows(rest))
    })
}

/// Tag counts, phrases, voice, negation and depth.
pub fn syntactic_counts(sentences: &[Sentence], lexicon: &SenseLexicon) -> Partial {
    let tokens = || sentences.iter().flat_map(|s| &s.tokens);
    let with_pos = |pred: fn(PosTag) -> bool| tokens().filter(|t| pred(t.pos)).count();

    let mut prep_phrases = 0;
    let mut lead_in = 0;
    let mut nps = 0;
    let mut np_tokens = 0;
    let mut vps = 0;
    let mut passive_vps = 0;
    let mut agentless = 0;
    let mut before_verb_sum = 0usize;
    let mut sentences_with_verb = 0usize;
    for s in sentences {
        prep_phrases += s
            .tokens
            .iter()
            .enumerate()
            .filter(|(i, t)| t.pos == PosTag::Adp && s.noun_phrases.iter().any(|np| np.start == i + 1))
            .count();
        if s
            .tokens
            .iter()
            .find(|t| t.is_word())
            .is_some_and(|t| is_in(LEAD_IN_NEGATORS, &t.lower()))
        {
            lead_in += 1;
        }
        nps += s.noun_phrases.len();
        np_tokens += s.noun_phrases.iter().map(|np| np.len()).sum::<usize>();
        vps += s.verb_phrases.len();
        passive_vps += s
            .verb_phrases
            .iter()
            .filter(|vp| {
                s.passive_constructions
                    .iter()
                    .any(|p| vp.contains(p.participle_index()))
            })
            .count();
        agentless += s.passive_constructions.iter().filter(|p| p.agentless).count();
        if let Some(i) = s.tokens.iter().position(|t| t.pos.is_verbal()) {
            before_verb_sum += i;
            sentences_with_verb += 1;
        }
    }
    let active_vps = vps - passive_vps;
    let ratio = if passive_vps == 0 {
        active_vps as f64
    } else {
        active_vps as f64 / passive_vps as f64
    };

    let negated_stem = tokens()
        .filter(|t| t.is_alphabetic() && is_negated_stem(&t.lemma.to_lowercase(), lexicon))
        .count();

    let depth_mean = |pred: fn(PosTag) -> bool| {
        let ds: Vec<f64> = tokens().filter(|t| pred(t.pos)).map(|t| t.depth as f64).collect();
        mean(ds.iter().sum(), ds.len())
    };

    vec![
        ("Nouns", count(with_pos(|p| p == PosTag::Noun))),
        ("Verbs", count(with_pos(PosTag::is_verbal))),
        ("Adjectives", count(with_pos(|p| p == PosTag::Adj))),
        ("Adverbs", count(with_pos(|p| p == PosTag::Adv))),
        ("Num_Prepositional_Phrases", count(prep_phrases)),
        ("Num_Negated_Words_Stem", count(negated_stem)),
        ("Num_Negated_Words_Lead_In", count(lead_in)),
        ("Num_Main_Noun_Phrases", count(nps)),
        ("Avg_Main_NP_Length", mean(np_tokens as f64, nps)),
        ("Num_Verb_Phrases", count(vps)),
        ("Prop_Active_Voice_Verbs", mean(active_vps as f64, vps)),
        ("Prop_Passive_Voice_Verbs", mean(passive_vps as f64, vps)),
        ("Ratio_Active_to_Passive_Verbs", ratio),
        ("Num_Words_Before_Main_Verb", mean(before_verb_sum as f64, sentences_with_verb)),
        ("Num_Agentless_Passive_Constructions", count(agentless)),
        ("Distance_To_Root_Nouns", depth_mean(|p| p == PosTag::Noun)),
        ("Distance_To_Root_Verbs", depth_mean(PosTag::is_verbal)),
    ]
}

/// Sense lookups use the lemma; auxiliaries are looked up as verbs.
fn senses(t: &Token, lexicon: &SenseLexicon) -> u32 {
    let pos = if t.pos == PosTag::Aux { PosTag::Verb } else { t.pos };
    lexicon.sense_count(&t.lemma, pos)
}

/// Word-sense statistics from the lexicon.
pub fn sense_stats(sentences: &[Sentence], lexicon: &SenseLexicon) -> Partial {
    let looked_up: Vec<(&Token, u32)> = words(sentences).map(|t| (t, senses(t, lexicon))).collect();
    let sum_where = |pred: &dyn Fn(&Token) -> bool| -> f64 {
        looked_up.iter().filter(|(t, _)| pred(t)).map(|&(_, n)| n as f64).sum()
    };
    vec![
        ("Num_Polysemic_Words", count(looked_up.iter().filter(|(_, n)| *n > 1).count())),
        ("Num_Word_Senses", sum_where(&|_| true)),
        ("Num_Word_Senses_For_Content_Words", sum_where(&|t| t.pos.is_content())),
        ("Num_Word_Senses_For_Nouns", sum_where(&|t| t.pos == PosTag::Noun)),
        ("Num_Word_Senses_For_Verbs", sum_where(&|t| t.pos.is_verbal())),
        (
            "Num_Word_Senses_For_Non_Auxiliary_Verbs",
            sum_where(&|t| t.pos == PosTag::Verb && !is_in(AUXILIARIES, &t.lower())),
        ),
        ("Num_Word_Senses_For_Adjectives", sum_where(&|t| t.pos == PosTag::Adj)),
        ("Num_Word_Senses_For_Adverbs", sum_where(&|t| t.pos == PosTag::Adv)),
    ]
}

fn readability_partial(sentences: &[Sentence]) -> Result<Partial> {
    let r: ReadabilityIndices<f64> = ReadabilityCounts::from_sentences(sentences).indices()?;
    Ok(vec![
        ("flesch_kincaid_grade", r.flesch_kincaid_grade),
        ("flesch_kincaid_ease", r.flesch_kincaid_ease),
        ("coleman_liau_index", r.coleman_liau_index),
        ("automated_readability_index", r.automated_readability_index),
        ("smog_index", r.smog_index),
        ("gunning_fog", r.gunning_fog),
        ("traenkle_bailer_index", r.traenkle_bailer_index),
    ])
}

/// Features from already-analyzed sentences. Section word counts and
/// character counts still come from the raw document.
pub fn static_vector_from_sentences(
    doc: &EduDocument,
    sentences: &[Sentence],
    analyzer: &Analyzer,
) -> Result<StaticFeatureVector> {
    let readability = readability_partial(sentences).map_err(|e| match e {
        Error::DegenerateInput(msg) => Error::DegenerateInput(format!("document '{}': {msg}", doc.doc_id)),
        other => other,
    })?;
    Ok(StaticFeatureVector::from_partials([
        surface_counts(doc, sentences, analyzer),
        syntactic_counts(sentences, &analyzer.lexicon),
        sense_stats(sentences, &analyzer.lexicon),
        readability,
    ]))
}

/// Fails only when the document has no words.
pub fn compute_static_vector(doc: &EduDocument, analyzer: &Analyzer) -> Result<StaticFeatureVector> {
    static_vector_from_sentences(doc, &analyze_document(doc, analyzer), analyzer)
}

/// Vectors for many documents in parallel, in input order. Documents with a
/// sidecar annotation use it instead of the built-in analysis.
pub fn compute_static_vectors(
    docs: &[EduDocument],
    analyzer: &Analyzer,
    annotations: Option<&Annotations>,
) -> Result<Vec<StaticFeatureVector>> {
    if let Some(a) = annotations {
        a.validate_against(docs.iter().map(|d| d.doc_id.as_str()))?;
    }
    docs.par_iter()
        .map(|doc| match annotations.and_then(|a| a.get(&doc.doc_id)) {
            Some(sentences) => static_vector_from_sentences(doc, sentences, analyzer),
            None => compute_static_vector(doc, analyzer),
        })
        .collect()
}
