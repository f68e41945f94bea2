use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use edudiff::analysis::{bootstrap_compare, rank_features};
use edudiff::baselines::{run_baseline, select_exemplars};
use edudiff::classifier::{train, FeatureSet};
use edudiff::dataset::{load_scienceqa, SplitDataset};
use edudiff::linguistics::{load_external_annotations, Analyzer};
use edudiff::prompt_metrics::{
    builtin_templates, compute_prompt_vectors, load_templates, LlmClient, PromptTemplate, ResponseCache,
};
use edudiff::report::FeatureTable;
use edudiff::static_metrics::{compute_static_vectors, STATIC_FEATURE_NAMES};
use edudiff::{EduDocument, EducationLevel, Matrix};
use serde::Serialize;

use crate::config::RunConfig;

pub const STATIC_CSV: &str = "static.csv";
pub const PROMPT_CSV: &str = "prompt.csv";
pub const COMBINED_CSV: &str = "combined.csv";

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write(path, s)
}

fn load_dataset(cfg: &RunConfig) -> Result<SplitDataset> {
    let dir = cfg.dataset_dir();
    SplitDataset::load(&dir).with_context(|| format!("loading dataset from {} (run `ingest` first)", dir.display()))
}

fn templates(cfg: &RunConfig) -> Result<Vec<PromptTemplate>> {
    Ok(match &cfg.templates {
        Some(p) => load_templates(p)?,
        None => builtin_templates(),
    })
}

fn counts_line(docs: &[EduDocument]) -> String {
    let c = SplitDataset::class_counts(docs);
    EducationLevel::ALL
        .iter()
        .map(|l| format!("{} {}", l.as_str(), c[l.ordinal()]))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn ingest(cfg: &RunConfig) -> Result<()> {
    let Some(input) = &cfg.scienceqa else {
        bail!("no ScienceQA input configured (set `scienceqa` or pass --input)");
    };
    if !input.exists() {
        bail!("ScienceQA input {} does not exist", input.display());
    }
    let items = load_scienceqa(input)?;
    let data = SplitDataset::build(&items, &cfg.split_spec())?;
    data.save(&cfg.dataset_dir())?;
    let all: Vec<EduDocument> = data.train.iter().chain(&data.test).cloned().collect();
    println!("read {} items from {}", items.len(), input.display());
    println!("sampled {} documents: {}", all.len(), counts_line(&all));
    println!("train {} ({}), test {} ({})", data.train.len(), counts_line(&data.train), data.test.len(), counts_line(&data.test));
    println!("wrote {}", cfg.dataset_dir().display());
    Ok(())
}

pub fn featurize(cfg: &RunConfig, static_only: bool) -> Result<()> {
    let data = load_dataset(cfg)?;
    let docs: Vec<EduDocument> = data.all().map(|(d, _)| d.clone()).collect();
    let analyzer = Analyzer::default();
    let annotations = match &cfg.annotations {
        Some(p) => Some(load_external_annotations(p, &analyzer.syllables)?),
        None => None,
    };
    let vectors = compute_static_vectors(&docs, &analyzer, annotations.as_ref())?;
    let mut static_table = FeatureTable::new(STATIC_FEATURE_NAMES);
    for (doc, v) in docs.iter().zip(vectors) {
        static_table.push(doc.doc_id.clone(), doc.level, v.into_values())?;
    }
    let dir = cfg.features_dir();
    write(&dir.join(STATIC_CSV), static_table.to_csv_string())?;
    println!("static features: {} documents × {} columns", static_table.len(), static_table.names.len());
    if static_only {
        return Ok(());
    }

    let templates = templates(cfg)?;
    let client = LlmClient::new(cfg.llm.clone())?;
    let cache_path = cfg.cache_path();
    let cache = ResponseCache::open(&cache_path)?;
    let (results, stats) = compute_prompt_vectors(&docs, &templates, &client, &cache);
    println!(
        "prompt requests: {} fetched, {} from cache ({})",
        stats.fetched,
        stats.cache_hits,
        cache_path.display()
    );
    let mut prompt_table = FeatureTable::new(templates.iter().map(|t| t.id.clone()));
    let mut failures = 0;
    let mut na = 0;
    for (doc, r) in docs.iter().zip(results) {
        match r {
            Ok(v) => {
                na += v.na_count;
                prompt_table.push(doc.doc_id.clone(), doc.level, v.values)?;
            }
            Err(e) => {
                failures += 1;
                eprintln!("error: {e}");
            }
        }
    }
    if failures > 0 {
        bail!("{failures} of {} documents have no prompt features; rerun to resume from the cache", docs.len());
    }
    write(&dir.join(PROMPT_CSV), prompt_table.to_csv_string())?;
    write(&dir.join(COMBINED_CSV), static_table.join(&prompt_table)?.to_csv_string())?;
    println!(
        "prompt features: {} documents × {} columns, {na} unparseable answers scored 0.5",
        prompt_table.len(),
        prompt_table.names.len()
    );
    println!("wrote {}", dir.display());
    Ok(())
}

/// Train and test matrices restricted to `set`.
fn matrices(cfg: &RunConfig, set: FeatureSet) -> Result<(Matrix, Matrix)> {
    let dir = cfg.features_dir();
    let path = if dir.join(COMBINED_CSV).exists() {
        dir.join(COMBINED_CSV)
    } else if set == FeatureSet::Static {
        dir.join(STATIC_CSV)
    } else {
        bail!("no prompt features in {} (run `featurize` without --static-only)", dir.display());
    };
    let table = FeatureTable::load(&path).with_context(|| format!("loading {} (run `featurize` first)", path.display()))?;
    let all = Matrix::from_table(&table)?.feature_set(set)?;
    let data = load_dataset(cfg)?;
    let train_ids: HashSet<&str> = data.train.iter().map(|d| d.doc_id.as_str()).collect();
    let test_ids: HashSet<&str> = data.test.iter().map(|d| d.doc_id.as_str()).collect();
    let rows = |ids: &HashSet<&str>| -> Vec<usize> {
        all.doc_ids().iter().enumerate().filter(|(_, id)| ids.contains(id.as_str())).map(|(i, _)| i).collect()
    };
    let (tr, te) = (rows(&train_ids), rows(&test_ids));
    if tr.len() != train_ids.len() || te.len() != test_ids.len() {
        bail!("{} does not cover the dataset; rerun `featurize`", path.display());
    }
    Ok((all.select_rows(&tr), all.select_rows(&te)))
}

fn model_path(cfg: &RunConfig, set: FeatureSet) -> PathBuf {
    cfg.models_dir().join(format!("{set}.json"))
}

pub fn train_cmd(cfg: &RunConfig, sets: &[FeatureSet]) -> Result<()> {
    for &set in sets {
        let (tr, _) = matrices(cfg, set)?;
        let model = train(&tr, &cfg.hyperparams())?;
        let path = model_path(cfg, set);
        std::fs::create_dir_all(cfg.models_dir())?;
        model.save(&path)?;
        let m = &model.metadata;
        println!(
            "{set}: {} features, {} rows, {} iterations, loss {:.6}{}; wrote {}",
            model.n_features(),
            m.n_train,
            m.iterations,
            m.final_loss,
            if m.converged { "" } else { " (not converged)" },
            path.display()
        );
    }
    Ok(())
}

pub fn eval(cfg: &RunConfig, sets: &[FeatureSet]) -> Result<()> {
    let reports = cfg.reports_dir();
    let mut table = String::from("features      macro-F1  accuracy\n");
    for &set in sets {
        let (tr, te) = matrices(cfg, set)?;
        let model = train(&tr, &cfg.hyperparams())?;
        std::fs::create_dir_all(cfg.models_dir())?;
        model.save(&model_path(cfg, set))?;
        let report = model.evaluate(&te)?;
        write_json(&reports.join(format!("eval_{set}.json")), &report)?;
        let text = format!("{set} ({} test documents)\n{}", report.n, report.to_table());
        write(&reports.join(format!("eval_{set}.txt")), &text)?;
        print!("{text}\n");
        let _ = writeln!(table, "{:<12} {:>9.2} {:>9.2}", set.as_str(), report.macro_f1, report.accuracy);
    }
    if sets.len() > 1 {
        write(&reports.join("table1.txt"), &table)?;
        print!("{table}");
    }
    Ok(())
}

pub fn rank(cfg: &RunConfig, all_rows: bool) -> Result<()> {
    let set = if cfg.features_dir().join(COMBINED_CSV).exists() { FeatureSet::Combo } else { FeatureSet::Static };
    let (tr, te) = matrices(cfg, set)?;
    let m = if all_rows {
        let mut rows: Vec<Vec<f64>> = (0..tr.n_rows()).map(|i| tr.row(i).to_vec()).collect();
        rows.extend((0..te.n_rows()).map(|i| te.row(i).to_vec()));
        let labels = tr.labels().iter().chain(te.labels()).copied().collect();
        let ids = tr.doc_ids().iter().chain(te.doc_ids()).cloned().collect();
        Matrix::with_ids(tr.feature_names().to_vec(), rows, labels, ids)?
    } else {
        tr
    };
    let ranking = rank_features(&m)?;
    let reports = cfg.reports_dir();
    write(&reports.join("ranking.csv"), ranking.to_csv())?;
    let table = ranking.to_table(cfg.top_k, &templates(cfg)?);
    write(&reports.join("ranking.txt"), &table)?;
    print!("{table}");
    println!("ranked {} features over {} documents", ranking.entries.len(), m.n_rows());
    Ok(())
}

pub fn bootstrap(cfg: &RunConfig) -> Result<()> {
    let (tr, te) = matrices(cfg, FeatureSet::Combo)?;
    let combo: Vec<String> = tr.feature_names().to_vec();
    let stat: Vec<String> = combo.iter().filter(|n| FeatureSet::Static.includes(n)).cloned().collect();
    let result = bootstrap_compare(&tr, &te, &combo, &stat, &cfg.bootstrap_config())?;
    write_json(&cfg.reports_dir().join("bootstrap.json"), &result)?;
    let line = format!("combo vs static {}\n", result.summary());
    write(&cfg.reports_dir().join("bootstrap.txt"), &line)?;
    print!("{line}");
    Ok(())
}

pub fn baseline(cfg: &RunConfig) -> Result<()> {
    let data = load_dataset(cfg)?;
    let bcfg = cfg.baseline_config();
    let exemplars = select_exemplars(&bcfg, &data.train)?;
    let client = LlmClient::new(bcfg.llm.clone())?;
    let cache = ResponseCache::open(&cfg.cache_path())?;
    let outcome = run_baseline(&exemplars, &data.test, &client, &cache)?;
    let report = outcome.evaluate(&data.test)?;
    let name = match bcfg.mode {
        edudiff::baselines::BaselineMode::ZeroShot => "zero_shot",
        edudiff::baselines::BaselineMode::FewShot => "few_shot",
    };
    let reports = cfg.reports_dir();
    write_json(&reports.join(format!("baseline_{name}.json")), &serde_json::json!({
        "outcome": outcome,
        "report": report,
        "exemplar_doc_ids": exemplars.iter().map(|d| d.doc_id.as_str()).collect::<Vec<_>>(),
    }))?;
    let d = outcome.class_distribution;
    let text = format!(
        "{name} baseline ({} test documents; {} fetched, {} cached)\n{}predicted share: elementary {:.2}, middle {:.2}, high {:.2}\n",
        report.n,
        outcome.fetched,
        outcome.cache_hits,
        report.to_table(),
        d[0],
        d[1],
        d[2]
    );
    write(&reports.join(format!("baseline_{name}.txt")), &text)?;
    print!("{text}");
    Ok(())
}

/// Concatenates the text reports produced so far.
pub fn report(cfg: &RunConfig) -> Result<()> {
    let dir = cfg.reports_dir();
    let mut names = vec!["table1.txt".to_string()];
    names.extend(FeatureSet::ALL.iter().map(|s| format!("eval_{s}.txt")));
    names.extend(["baseline_zero_shot.txt", "baseline_few_shot.txt", "bootstrap.txt", "ranking.txt"].map(String::from));
    let mut out = String::new();
    for name in names {
        let path = dir.join(&name);
        if let Ok(text) = std::fs::read_to_string(&path) {
            let _ = writeln!(out, "== {name} ==\n{text}");
        }
    }
    if out.is_empty() {
        bail!("no reports in {} yet", dir.display());
    }
    write(&dir.join("summary.txt"), &out)?;
    print!("{out}");
    Ok(())
}
