//! Direct LLM classification: the model is asked for the education level
//! outright, with or without labelled exemplars.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::EvalReport;
use crate::document::{EduDocument, EducationLevel};
use crate::error::{Error, Result};
use crate::prompt_metrics::{LlmClient, LlmConfig, ResponseCache};
use crate::rng::{rng_for, shuffle};

/// `[text]` is replaced by the document's full text.
pub const ZERO_SHOT_PROMPT: &str = "Your task is to predict the education level corresponding to a given text. You are provided with three labels to choose from: 1) elementary school 2) middle school 3) high school. Text: [text] Educational level: ";

/// Level assigned to responses that name no level or several.
pub const DEFAULT_LEVEL: EducationLevel = EducationLevel::Elementary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    ZeroShot,
    FewShot,
}

impl std::str::FromStr for BaselineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "zero_shot" | "zero" => Ok(Self::ZeroShot),
            "few_shot" | "few" => Ok(Self::FewShot),
            other => Err(Error::Config(format!("unknown baseline mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub mode: BaselineMode,
    pub shots_per_class: usize,
    /// Explicit exemplars; drawn from the training split when empty.
    pub exemplar_doc_ids: Vec<String>,
    pub seed: u64,
    pub llm: LlmConfig,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            mode: BaselineMode::ZeroShot,
            shots_per_class: 2,
            exemplar_doc_ids: Vec::new(),
            seed: 42,
            llm: LlmConfig::default(),
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        self.llm.validate()?;
        if self.mode == BaselineMode::FewShot && self.shots_per_class == 0 {
            return Err(Error::Config("few-shot needs shots_per_class ≥ 1".into()));
        }
        Ok(())
    }
}

/// Picks the few-shot exemplars from `train`, ordered Elementary, Middle,
/// High. Empty for zero-shot.
pub fn select_exemplars(cfg: &BaselineConfig, train: &[EduDocument]) -> Result<Vec<EduDocument>> {
    cfg.validate()?;
    if cfg.mode == BaselineMode::ZeroShot {
        return Ok(Vec::new());
    }
    let mut chosen: Vec<EduDocument> = if cfg.exemplar_doc_ids.is_empty() {
        let mut out = Vec::new();
        for level in EducationLevel::ALL {
            let mut pool: Vec<&EduDocument> = train.iter().filter(|d| d.level == Some(level)).collect();
            pool.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
            if pool.len() < cfg.shots_per_class {
                return Err(Error::Capacity {
                    level: level.to_string(),
                    available: pool.len(),
                    requested: cfg.shots_per_class,
                });
            }
            shuffle(&mut rng_for(cfg.seed, &format!("exemplars:{level}")), &mut pool);
            out.extend(pool.into_iter().take(cfg.shots_per_class).cloned());
        }
        out
    } else {
        cfg.exemplar_doc_ids
            .iter()
            .map(|id| {
                train
                    .iter()
                    .find(|d| &d.doc_id == id)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("exemplar '{id}' is not a training document")))
            })
            .collect::<Result<_>>()?
    };
    let mut covered = [false; EducationLevel::COUNT];
    for d in &chosen {
        match d.level {
            Some(l) => covered[l.ordinal()] = true,
            None => return Err(Error::Config(format!("exemplar '{}' has no level", d.doc_id))),
        }
    }
    if covered.contains(&false) {
        return Err(Error::Config("few-shot exemplars must cover all three levels".into()));
    }
    chosen.sort_by_key(|d| d.level.map(EducationLevel::ordinal));
    Ok(chosen)
}

/// Errors when an exemplar is also being evaluated.
pub fn check_leakage(exemplars: &[EduDocument], eval: &[EduDocument]) -> Result<()> {
    let ids: HashSet<&str> = eval.iter().map(|d| d.doc_id.as_str()).collect();
    match exemplars.iter().find(|e| ids.contains(e.doc_id.as_str())) {
        Some(e) => Err(Error::Leakage(format!("exemplar '{}' is in the evaluation set", e.doc_id))),
        None => Ok(()),
    }
}

/// Zero-shot prompt, preceded by one `Text: …\nEducational level: …` block per
/// exemplar when there are any.
pub fn build_baseline_prompt(exemplars: &[EduDocument], doc: &EduDocument) -> Result<String> {
    check_leakage(exemplars, std::slice::from_ref(doc))?;
    let query = ZERO_SHOT_PROMPT.replace("[text]", &doc.full_text());
    if exemplars.is_empty() {
        return Ok(query);
    }
    let mut blocks = Vec::with_capacity(exemplars.len() + 1);
    for e in exemplars {
        let level = e
            .level
            .ok_or_else(|| Error::Config(format!("exemplar '{}' has no level", e.doc_id)))?;
        blocks.push(format!("Text: {}\nEducational level: {}", e.full_text(), level.school_label()));
    }
    blocks.push(query);
    Ok(blocks.join("\n\n"))
}

/// The level named in `response`, or `None` when it names none or more than
/// one. Matching is case-insensitive on whole words.
pub fn parse_level_response(response: &str) -> Option<EducationLevel> {
    let mut found: Option<EducationLevel> = None;
    for word in response.split(|c: char| !c.is_alphanumeric()) {
        let level = EducationLevel::ALL.into_iter().find(|l| word.eq_ignore_ascii_case(l.as_str()));
        match (found, level) {
            (_, None) => {}
            (None, Some(l)) => found = Some(l),
            (Some(f), Some(l)) if f == l => {}
            (Some(_), Some(_)) => return None,
        }
    }
    found
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselinePrediction {
    pub doc_id: String,
    /// Already defaulted when the response was invalid.
    pub level: EducationLevel,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineOutcome {
    pub mode: BaselineMode,
    /// Input order.
    pub predictions: Vec<BaselinePrediction>,
    pub invalid_rate: f64,
    /// Share of predictions per level, defaults included.
    pub class_distribution: [f64; EducationLevel::COUNT],
    pub cache_hits: usize,
    pub fetched: usize,
}

impl BaselineOutcome {
    pub fn levels(&self) -> Vec<EducationLevel> {
        self.predictions.iter().map(|p| p.level).collect()
    }

    /// Scores the predictions against the documents' gold levels.
    pub fn evaluate(&self, docs: &[EduDocument]) -> Result<EvalReport<f64>> {
        if docs.len() != self.predictions.len() {
            return Err(Error::Shape {
                expected: self.predictions.len(),
                got: docs.len(),
            });
        }
        let truth = docs
            .iter()
            .map(|d| {
                d.level
                    .ok_or_else(|| Error::DegenerateLabels(format!("document '{}' has no level", d.doc_id)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut report = EvalReport::from_predictions(&truth, &self.levels());
        report.invalid_rate = Some(self.invalid_rate);
        Ok(report)
    }
}

/// Cache namespace; few-shot runs with different exemplars never share entries.
pub fn cache_template_id(exemplars: &[EduDocument]) -> String {
    if exemplars.is_empty() {
        return "baseline:zero_shot".into();
    }
    let mut h = Sha256::new();
    for e in exemplars {
        h.update(e.doc_id.as_bytes());
        h.update([0x1f]);
    }
    format!("baseline:few_shot:{}", &hex::encode(h.finalize())[..16])
}

/// Queries every document, at most `max_parallel` at a time. The first
/// transport error aborts the run; answers fetched so far stay cached.
pub fn run_baseline(
    exemplars: &[EduDocument],
    docs: &[EduDocument],
    client: &LlmClient,
    cache: &ResponseCache,
) -> Result<BaselineOutcome> {
    check_leakage(exemplars, docs)?;
    let mode = if exemplars.is_empty() { BaselineMode::ZeroShot } else { BaselineMode::FewShot };
    let template_id = cache_template_id(exemplars);
    let parsed_label = |r: &str| parse_level_response(r).map_or("invalid", EducationLevel::as_str).to_string();

    let slots: Vec<Mutex<Option<Result<Option<EducationLevel>>>>> = docs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let hits = AtomicUsize::new(0);
    let fetched = AtomicUsize::new(0);
    let workers = client.config().max_parallel.clamp(1, docs.len().max(1));

    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= docs.len() || abort.load(Ordering::SeqCst) {
                    break;
                }
                let outcome = build_baseline_prompt(exemplars, &docs[i]).and_then(|prompt| {
                    client.query_cached(cache, &template_id, &docs[i].full_text(), &prompt, parsed_label)
                });
                let outcome = outcome.map(|(entry, hit)| {
                    if hit { &hits } else { &fetched }.fetch_add(1, Ordering::SeqCst);
                    parse_level_response(&entry.response_text)
                });
                if outcome.is_err() {
                    abort.store(true, Ordering::SeqCst);
                }
                *slots[i].lock().unwrap_or_else(|p| p.into_inner()) = Some(outcome);
            });
        }
    });

    let mut predictions = Vec::with_capacity(docs.len());
    let mut counts = [0usize; EducationLevel::COUNT];
    let mut invalid = 0usize;
    let mut first_error = None;
    for (doc, slot) in docs.iter().zip(slots) {
        match slot.into_inner().unwrap_or_else(|p| p.into_inner()) {
            Some(Ok(parsed)) => {
                let level = parsed.unwrap_or(DEFAULT_LEVEL);
                invalid += usize::from(parsed.is_none());
                counts[level.ordinal()] += 1;
                predictions.push(BaselinePrediction {
                    doc_id: doc.doc_id.clone(),
                    level,
                    valid: parsed.is_some(),
                });
            }
            Some(Err(e)) if first_error.is_none() => first_error = Some(e),
            _ => {}
        }
    }
    if let Some(e) = first_error {
        return Err(e);
    }
    let n = docs.len().max(1) as f64;
    Ok(BaselineOutcome {
        mode,
        predictions,
        invalid_rate: invalid as f64 / n,
        class_distribution: counts.map(|c| c as f64 / n),
        cache_hits: hits.into_inner(),
        fetched: fetched.into_inner(),
    })
}
