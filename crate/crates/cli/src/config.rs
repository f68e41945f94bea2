//! Run configuration: defaults, then the JSON file, then command-line flags.
//!
//! All component seeds come from the single top-level `seed`; each component
//! derives its own streams from it by role name.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use edudiff::analysis::{BootstrapConfig, ResampleScheme, TTestKind};
use edudiff::baselines::{BaselineConfig, BaselineMode};
use edudiff::classifier::FeatureSet;
use edudiff::dataset::SplitSpec;
use edudiff::prompt_metrics::LlmConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub per_class: usize,
    pub train_fraction: f64,
    pub stratify: bool,
}

impl Default for SplitSection {
    fn default() -> Self {
        let s = SplitSpec::default();
        Self {
            per_class: s.per_class,
            train_fraction: s.train_fraction,
            stratify: s.stratify,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    /// `null` means `1/n_train`.
    pub l2_lambda: Option<f64>,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        let h = edudiff::Hyperparams::default();
        Self {
            l2_lambda: h.l2_lambda,
            max_iters: h.max_iters,
            tolerance: h.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSection {
    pub n_samples: usize,
    pub scheme: ResampleScheme,
    pub test: TTestKind,
    pub max_redraws: usize,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        let b = BootstrapConfig::<f64>::default();
        Self {
            n_samples: b.n_samples,
            scheme: b.scheme,
            test: b.test,
            max_redraws: b.max_redraws,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub mode: BaselineMode,
    pub shots_per_class: usize,
    pub exemplar_doc_ids: Vec<String>,
}

impl Default for BaselineSection {
    fn default() -> Self {
        let b = BaselineConfig::default();
        Self {
            mode: b.mode,
            shots_per_class: b.shots_per_class,
            exemplar_doc_ids: b.exemplar_doc_ids,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// ScienceQA `problems.json` or the directory holding it.
    pub scienceqa: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Defaults to `<output_dir>/cache/llm_responses.jsonl`.
    pub cache_path: Option<PathBuf>,
    /// Sidecar linguistic annotations (JSONL) replacing the built-in analysis.
    pub annotations: Option<PathBuf>,
    /// Replacement prompt templates (JSON); the bundled 63 otherwise.
    pub templates: Option<PathBuf>,
    pub split: SplitSection,
    pub llm: LlmConfig,
    pub classifier: ClassifierSection,
    pub feature_set: FeatureSet,
    pub bootstrap: BootstrapSection,
    pub baseline: BaselineSection,
    pub top_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            scienceqa: None,
            output_dir: PathBuf::from("edudiff-out"),
            cache_path: None,
            annotations: None,
            templates: None,
            split: SplitSection::default(),
            llm: LlmConfig::default(),
            classifier: ClassifierSection::default(),
            feature_set: FeatureSet::Combo,
            bootstrap: BootstrapSection::default(),
            baseline: BaselineSection::default(),
            top_k: 10,
        }
    }
}

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl RunConfig {
    /// Parses a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        rebase(base, &mut cfg.scienceqa);
        rebase(base, &mut cfg.cache_path);
        rebase(base, &mut cfg.annotations);
        rebase(base, &mut cfg.templates);
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.split_spec().validate()?;
        self.llm.validate()?;
        if self.bootstrap.n_samples < 2 {
            bail!("bootstrap.n_samples must be at least 2");
        }
        for (what, p) in [("annotations", &self.annotations), ("templates", &self.templates)] {
            if let Some(p) = p {
                if !p.exists() {
                    bail!("{what} file {} does not exist", p.display());
                }
            }
        }
        Ok(())
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            seed: self.seed,
            per_class: self.split.per_class,
            train_fraction: self.split.train_fraction,
            stratify: self.split.stratify,
        }
    }

    pub fn hyperparams(&self) -> edudiff::Hyperparams {
        edudiff::Hyperparams {
            l2_lambda: self.classifier.l2_lambda,
            max_iters: self.classifier.max_iters,
            tolerance: self.classifier.tolerance,
            seed: self.seed,
        }
    }

    pub fn bootstrap_config(&self) -> BootstrapConfig<f64> {
        BootstrapConfig {
            n_samples: self.bootstrap.n_samples,
            seed: self.seed,
            hyperparams: self.hyperparams(),
            scheme: self.bootstrap.scheme,
            test: self.bootstrap.test,
            max_redraws: self.bootstrap.max_redraws,
        }
    }

    pub fn baseline_config(&self) -> BaselineConfig {
        BaselineConfig {
            mode: self.baseline.mode,
            shots_per_class: self.baseline.shots_per_class,
            exemplar_doc_ids: self.baseline.exemplar_doc_ids.clone(),
            seed: self.seed,
            llm: self.llm.clone(),
        }
    }

    pub fn cache_path(&self) -> PathBuf {
        self.cache_path
            .clone()
            .unwrap_or_else(|| self.output_dir.join("cache").join("llm_responses.jsonl"))
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.output_dir.join("dataset")
    }

    pub fn features_dir(&self) -> PathBuf {
        self.output_dir.join("features")
    }

    pub fn models_dir(&self) -> PathBuf {
        self.output_dir.join("models")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.output_dir.join("reports")
    }
}
