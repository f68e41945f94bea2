//! Yes/no questions put to an LLM, one per template, turned into features.

pub mod cache;
pub mod client;
pub mod stub;

use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::document::EduDocument;
use crate::error::{Error, Result};
pub use cache::{cache_key, CacheEntry, ResponseCache};
pub use client::{ChatTransport, HttpReply, LlmClient, LlmConfig};

pub const N_PROMPT: usize = 63;

const BUILTIN_TEMPLATES: &str = include_str!("../../data/prompt_templates.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateCategory {
    EducationLevel,
    Complexity,
    Topic,
    Readability,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: String,
    pub category: TemplateCategory,
    pub text: String,
}

/// The 63 shipped templates, ordered by id.
pub fn builtin_templates() -> Vec<PromptTemplate> {
    parse_templates(BUILTIN_TEMPLATES).expect("bundled templates are valid")
}

pub fn parse_templates(json: &str) -> Result<Vec<PromptTemplate>> {
    let mut templates: Vec<PromptTemplate> = serde_json::from_str(json)?;
    templates.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = templates.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::Config(format!("duplicate template id '{}'", w[0].id)));
    }
    Ok(templates)
}

pub fn load_templates(path: &Path) -> Result<Vec<PromptTemplate>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_templates(&text)
}

/// `question \n Text: full_text \n Answer yes or no.`
pub fn render_prompt(template: &PromptTemplate, doc: &EduDocument) -> String {
    format!("{}\nText: {}\nAnswer yes or no.", template.text, doc.full_text())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YesNo {
    Yes,
    No,
    Na,
}

impl YesNo {
    pub fn value(self) -> f64 {
        match self {
            Self::Yes => 1.0,
            Self::No => 0.0,
            Self::Na => 0.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Yes => "yes",
            Self::No => "no",
            Self::Na => "na",
        }
    }
}

/// The first standalone `yes` or `no` (any case) decides; otherwise `Na`.
/// Tokens are maximal runs of alphanumeric characters.
pub fn parse_yes_no(response: &str) -> YesNo {
    response
        .split(|c: char| !c.is_alphanumeric())
        .find_map(|w| {
            if w.eq_ignore_ascii_case("yes") {
                Some(YesNo::Yes)
            } else if w.eq_ignore_ascii_case("no") {
                Some(YesNo::No)
            } else {
                None
            }
        })
        .unwrap_or(YesNo::Na)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptMetricVector {
    /// One value per template, in template order; each is 0, 0.5 or 1.
    pub values: Vec<f64>,
    /// Unparseable answers.
    pub na_count: usize,
}

/// Counters from one batch run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PromptRunStats {
    pub cache_hits: usize,
    pub fetched: usize,
}

/// Vectors for many documents, in input order, each `Ok` or the first error
/// hit for that document.
///
/// Requests run on up to `max_parallel` threads, issued per document in
/// template order. A failed document stops issuing its remaining requests;
/// answers already fetched stay cached. Values are assembled by index, so
/// completion order never matters.
pub fn compute_prompt_vectors(
    docs: &[EduDocument],
    templates: &[PromptTemplate],
    client: &LlmClient,
    cache: &ResponseCache,
) -> (Vec<Result<PromptMetricVector>>, PromptRunStats) {
    let n_t = templates.len();
    let jobs = docs.len() * n_t;
    let texts: Vec<String> = docs.iter().map(EduDocument::full_text).collect();
    let answers: Vec<Mutex<Option<Result<YesNo>>>> = (0..jobs).map(|_| Mutex::new(None)).collect();
    let failed: Vec<AtomicBool> = docs.iter().map(|_| AtomicBool::new(false)).collect();
    let next = AtomicUsize::new(0);
    let hits = AtomicUsize::new(0);
    let fetched = AtomicUsize::new(0);
    let workers = client.config().max_parallel.clamp(1, jobs.max(1));

    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let job = next.fetch_add(1, Ordering::SeqCst);
                if job >= jobs {
                    break;
                }
                let (d, t) = (job / n_t, job % n_t);
                if failed[d].load(Ordering::SeqCst) {
                    continue;
                }
                let template = &templates[t];
                let prompt = render_prompt(template, &docs[d]);
                let outcome = client
                    .query_cached(cache, &template.id, &texts[d], &prompt, |r| {
                        parse_yes_no(r).as_str().to_string()
                    })
                    .map(|(entry, hit)| {
                        if hit {
                            hits.fetch_add(1, Ordering::SeqCst);
                        } else {
                            fetched.fetch_add(1, Ordering::SeqCst);
                        }
                        parse_yes_no(&entry.response_text)
                    });
                if outcome.is_err() {
                    failed[d].store(true, Ordering::SeqCst);
                }
                *answers[job].lock().unwrap_or_else(|p| p.into_inner()) = Some(outcome);
            });
        }
    });

    let mut answers = answers.into_iter().map(|m| m.into_inner().unwrap_or_else(|p| p.into_inner()));
    let results = docs
        .iter()
        .map(|doc| {
            let mut values = Vec::with_capacity(n_t);
            let mut na_count = 0;
            let mut error = None;
            for a in answers.by_ref().take(n_t) {
                match a {
                    Some(Ok(yn)) => {
                        na_count += usize::from(yn == YesNo::Na);
                        values.push(yn.value());
                    }
                    Some(Err(e)) if error.is_none() => error = Some(e),
                    _ => {}
                }
            }
            match error {
                Some(e) => Err(annotate(e, &doc.doc_id)),
                None if values.len() == n_t => Ok(PromptMetricVector { values, na_count }),
                None => Err(Error::Transport(format!("document '{}' incomplete", doc.doc_id))),
            }
        })
        .collect();
    let stats = PromptRunStats {
        cache_hits: hits.into_inner(),
        fetched: fetched.into_inner(),
    };
    (results, stats)
}

fn annotate(e: Error, doc_id: &str) -> Error {
    match e {
        Error::Transport(m) => Error::Transport(format!("document '{doc_id}': {m} (fetched answers remain cached)")),
        other => other,
    }
}

/// Single-document form of [`compute_prompt_vectors`].
pub fn compute_prompt_vector(
    doc: &EduDocument,
    templates: &[PromptTemplate],
    client: &LlmClient,
    cache: &ResponseCache,
) -> Result<PromptMetricVector> {
    let (mut results, _) = compute_prompt_vectors(std::slice::from_ref(doc), templates, client, cache);
    results.pop().expect("one result per document")
}
