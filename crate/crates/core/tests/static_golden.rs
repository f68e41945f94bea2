mod support;

use std::collections::HashMap;

use edudiff::dataset::read_documents;
use edudiff::linguistics::{load_external_annotations, Analyzer};
use edudiff::static_metrics::readability::ReadabilityCounts;
use edudiff::static_metrics::{analyze_document, compute_static_vector, compute_static_vectors, STATIC_FEATURE_NAMES};
use edudiff::EduDocument;
use proptest::prelude::*;
use serde::Deserialize;

#[derive(Deserialize)]
struct Golden {
    names: Vec<String>,
    documents: HashMap<String, Vec<f64>>,
}

const READABILITY: [&str; 7] = [
    "flesch_kincaid_grade",
    "flesch_kincaid_ease",
    "coleman_liau_index",
    "automated_readability_index",
    "smog_index",
    "gunning_fog",
    "traenkle_bailer_index",
];

#[test]
fn golden_fixture_matches_oracle() {
    let golden: Golden =
        serde_json::from_str(&std::fs::read_to_string(support::fixture("golden_static.json")).unwrap()).unwrap();
    assert_eq!(golden.names, STATIC_FEATURE_NAMES);
    let docs = read_documents(&support::fixture("golden_docs.jsonl")).unwrap();
    assert_eq!(docs.len(), 10);
    let analyzer = Analyzer::default();
    let ann = load_external_annotations(&support::fixture("golden_annotations.jsonl"), &analyzer.syllables).unwrap();
    let vectors = compute_static_vectors(&docs, &analyzer, Some(&ann)).unwrap();
    for (doc, v) in docs.iter().zip(&vectors) {
        let want = &golden.documents[&doc.doc_id];
        for ((name, got), want) in v.iter().zip(want) {
            let tol = if READABILITY.contains(&name) || got.fract() != 0.0 || want.fract() != 0.0 { 1e-9 } else { 0.0 };
            assert!((got - want).abs() <= tol, "{} {name}: got {got}, oracle {want}", doc.doc_id);
        }
    }
}

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{1,12}",
        "[A-Z][a-z]{0,9}",
        "[0-9]{1,4}",
        Just("photosynthesis".to_string()),
        Just("the".to_string())
    ]
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(
        (prop::collection::vec(word(), 1..15), prop_oneof![Just("."), Just("?"), Just("!"), Just(",")]),
        1..6,
    )
    .prop_map(|sentences| {
        sentences
            .into_iter()
            .map(|(ws, end)| format!("{}{end}", ws.join(" ")))
            .collect::<Vec<_>>()
            .join(" ")
    })
}

fn has_letters(s: &str) -> bool {
    s.chars().any(char::is_alphanumeric)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// The seven indices equal their textbook formulas applied to the counts.
    #[test]
    fn readability_reevaluates_from_counts(q in text(), sol in text(), lec in text()) {
        prop_assume!(has_letters(&q));
        let doc = EduDocument::new("p", q).with_solution(sol).with_lecture(lec);
        let analyzer = Analyzer::default();
        let v = compute_static_vector(&doc, &analyzer).unwrap();
        let c = ReadabilityCounts::from_sentences(&analyze_document(&doc, &analyzer));
        let (w, s, y) = (c.words as f64, c.sentences as f64, c.syllables as f64);
        let (l, cw, p) = (c.letters as f64, c.complex_words as f64, c.prepositions as f64);
        let expected = [
            0.39 * w / s + 11.8 * y / w - 15.59,
            206.835 - 1.015 * w / s - 84.6 * y / w,
            0.0588 * (100.0 * l / w) - 0.296 * (100.0 * s / w) - 15.8,
            4.71 * l / w + 0.5 * w / s - 21.43,
            1.043 * (cw * 30.0 / s).sqrt() + 3.1291,
            0.4 * (w / s + 100.0 * cw / w),
            224.6814 - 79.8304 * l / w - 12.24032 * w / s - 1.292857 * (100.0 * p / w),
        ];
        for (name, e) in READABILITY.iter().zip(expected) {
            let got = v.get(name).unwrap();
            prop_assert!((got - e).abs() <= 1e-9 * e.abs().max(1.0), "{name}: {got} vs {e}");
        }
        prop_assert_eq!(v.get("Word_Count").unwrap(), w);
    }
}
