//! Fixtures and generators shared by the integration tests and the
//! acceptance harness.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use edudiff::prompt_metrics::stub::{StubReply, StubServer};
use edudiff::prompt_metrics::{builtin_templates, LlmClient, LlmConfig};
use edudiff::rng::{derive_seed, rng_for, uniform_index, unit_f64};
use edudiff::{EduDocument, EducationLevel};
use serde_json::{json, Map, Value};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Client for a local stub: no retries, no backoff.
pub fn stub_client(base_url: &str) -> LlmClient {
    LlmClient::new(LlmConfig {
        base_url: base_url.to_string(),
        retry_count: 0,
        backoff_ms: 0,
        max_parallel: 8,
        timeout_secs: 10,
        ..LlmConfig::default()
    })
    .expect("valid stub config")
}

pub fn constant_stub(reply: &'static str) -> StubServer {
    StubServer::start(move |_| StubReply::Content(reply.to_string())).expect("stub starts")
}

const SHORT: &[&str] = &[
    "cat", "dog", "sun", "run", "big", "red", "hot", "cold", "fish", "tree", "rock", "seed", "leaf", "rain", "wind",
    "sand", "milk", "egg", "bird", "frog", "ball", "hill", "pond", "snow",
];
const MEDIUM: &[&str] = &[
    "water", "animal", "planet", "energy", "river", "mountain", "forest", "simple", "answer", "problem", "magnet",
    "summer", "winter", "pattern", "measure", "balance", "current", "signal", "region", "volume",
];
const LONG: &[&str] = &[
    "photosynthesis", "temperature", "environment", "evaporation", "organism", "population", "molecular",
    "observation", "electricity", "ecosystem", "hypothesis", "civilization", "classification", "experimental",
    "circulatory", "interpretation", "approximately", "characteristic",
];
const FUNCTION: &[&str] = &["the", "a", "of", "in", "and", "to", "with", "for", "on", "by"];

fn pick<'a>(rng: &mut impl rand::RngCore, list: &[&'a str]) -> &'a str {
    list[uniform_index(rng, list.len())]
}

fn sentence(rng: &mut impl rand::RngCore, level: usize, end: char) -> String {
    // Length and vocabulary drift with the level but overlap heavily.
    let len = 4 + uniform_index(rng, 7) + 2 * level;
    let p_long = [0.08, 0.16, 0.26][level];
    let p_medium = 0.3;
    let mut words = Vec::with_capacity(len);
    for i in 0..len {
        let u = unit_f64(rng);
        let w = if i % 3 == 1 {
            pick(rng, FUNCTION)
        } else if u < p_long {
            pick(rng, LONG)
        } else if u < p_long + p_medium {
            pick(rng, MEDIUM)
        } else {
            pick(rng, SHORT)
        };
        words.push(w.to_string());
    }
    let mut first = words[0].chars();
    let head = first.next().map(|c| c.to_uppercase().collect::<String>()).unwrap_or_default();
    words[0] = head + first.as_str();
    format!("{}{end}", words.join(" "))
}

/// Documents whose sentence length and word length depend weakly on the level.
pub fn synthetic_corpus(per_level: usize, seed: u64) -> Vec<EduDocument> {
    let mut docs = Vec::with_capacity(3 * per_level);
    for i in 0..per_level {
        for level in EducationLevel::ALL {
            let k = level.ordinal();
            let id = format!("s{k}_{i:04}");
            let mut rng = rng_for(seed, &id);
            let question = sentence(&mut rng, k, '?');
            let choices = vec![pick(&mut rng, SHORT).to_string(), pick(&mut rng, MEDIUM).to_string()];
            let solution = (0..1 + uniform_index(&mut rng, 2)).map(|_| sentence(&mut rng, k, '.')).collect::<Vec<_>>();
            let lecture = (0..1 + uniform_index(&mut rng, 3)).map(|_| sentence(&mut rng, k, '.')).collect::<Vec<_>>();
            docs.push(
                EduDocument::new(id, question)
                    .with_choices(choices)
                    .with_solution(solution.join(" "))
                    .with_lecture(lecture.join(" "))
                    .with_level(level),
            );
        }
    }
    docs
}

/// Stub whose answers carry the gold level on `informative` templates:
/// template `i` of that list asks about level `i mod 3`, answered correctly
/// with probability `accuracy`. Other templates get label-independent noise.
pub fn label_stub(docs: &[EduDocument], informative: usize, accuracy: f64, seed: u64) -> StubServer {
    let by_text: HashMap<String, (String, EducationLevel)> = docs
        .iter()
        .map(|d| (d.full_text(), (d.doc_id.clone(), d.level.expect("labelled"))))
        .collect();
    let templates: HashMap<String, usize> = builtin_templates()
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t.text, i))
        .collect();
    let by_text = Arc::new(by_text);
    StubServer::start(move |req| {
        let (head, rest) = req.prompt.split_once("\nText: ").unwrap_or(("", ""));
        let text = rest.strip_suffix("\nAnswer yes or no.").unwrap_or(rest);
        let (Some(&t), Some((id, level))) = (templates.get(head), by_text.get(text)) else {
            return StubReply::Status(400, "unknown prompt".into());
        };
        let h = derive_seed(seed, &format!("{id}:{t}"));
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        let answer = if t < informative {
            let truth = level.ordinal() == t % 3;
            truth == (u < accuracy)
        } else {
            u < 0.5
        };
        StubReply::Content(if answer { "Yes." } else { "No." }.to_string())
    })
    .expect("stub starts")
}

fn problem(question: String, grade: u32, image: bool) -> Value {
    json!({
        "question": question,
        "choices": ["first option", "second option"],
        "answer": 0,
        "hint": "",
        "image": if image { Value::from("image.png") } else { Value::Null },
        "task": "closed choice",
        "grade": format!("grade{grade}"),
        "subject": "natural science",
        "lecture": "A lecture explains the idea.",
        "solution": "The solution follows.",
        "split": "train",
    })
}

/// ScienceQA-shaped problems file with `clean` image-free unique items per
/// level, plus `images` image items and `duplicates` textual repeats per level.
pub fn synthetic_scienceqa(clean: usize, images: usize, duplicates: usize) -> String {
    let mut map = Map::new();
    let mut id = 1usize;
    let grades = [[1, 2, 3, 4, 5], [6, 7, 8, 6, 7], [9, 10, 11, 12, 9]];
    for (k, g) in grades.iter().enumerate() {
        for i in 0..clean {
            map.insert(id.to_string(), problem(format!("Level {k} question number {i}?"), g[i % 5], false));
            id += 1;
        }
        for i in 0..images {
            map.insert(id.to_string(), problem(format!("Level {k} picture question {i}?"), g[i % 5], true));
            id += 1;
        }
        for i in 0..duplicates {
            map.insert(id.to_string(), problem(format!("  LEVEL {k} question   number {i}?"), g[i % 5], false));
            id += 1;
        }
    }
    Value::Object(map).to_string()
}

/// Macro-F1 of the static, prompt and combined feature sets on a synthetic
/// corpus scored through the real pipelines against `label_stub`.
pub struct EndToEnd {
    pub macro_f1: [f64; 3],
    pub requests: usize,
}

pub fn end_to_end(per_level: usize, informative: usize, accuracy: f64, seed: u64) -> EndToEnd {
    use edudiff::classifier::{train, DesignMatrix, FeatureSet, Hyperparams};
    use edudiff::linguistics::Analyzer;
    use edudiff::prompt_metrics::{compute_prompt_vectors, ResponseCache};
    use edudiff::report::FeatureTable;
    use edudiff::static_metrics::{compute_static_vectors, STATIC_FEATURE_NAMES};

    let docs = synthetic_corpus(per_level, seed);
    let server = label_stub(&docs, informative, accuracy, seed);
    let client = stub_client(&server.base_url());
    let templates = builtin_templates();

    let vectors = compute_static_vectors(&docs, &Analyzer::default(), None).expect("static features");
    let mut static_table = FeatureTable::new(STATIC_FEATURE_NAMES);
    for (d, v) in docs.iter().zip(vectors) {
        static_table.push(d.doc_id.clone(), d.level, v.into_values()).unwrap();
    }
    let (results, _) = compute_prompt_vectors(&docs, &templates, &client, &ResponseCache::in_memory());
    let mut prompt_table = FeatureTable::new(templates.iter().map(|t| t.id.clone()));
    for (d, r) in docs.iter().zip(results) {
        prompt_table.push(d.doc_id.clone(), d.level, r.expect("prompt features").values).unwrap();
    }
    let all = DesignMatrix::from_table(&static_table.join(&prompt_table).unwrap()).unwrap();

    // First three quarters of each level train, the rest test.
    let cut = per_level * 3 / 4;
    let (tr, te): (Vec<usize>, Vec<usize>) = (0..docs.len()).partition(|&i| i / 3 < cut);
    let sets = [FeatureSet::Static, FeatureSet::Prompt, FeatureSet::Combo];
    let macro_f1 = sets.map(|set| {
        let m = all.feature_set(set).unwrap();
        let model = train(&m.select_rows(&tr), &Hyperparams::default()).unwrap();
        model.evaluate(&m.select_rows(&te)).unwrap().macro_f1
    });
    EndToEnd {
        macro_f1,
        requests: server.request_count(),
    }
}
