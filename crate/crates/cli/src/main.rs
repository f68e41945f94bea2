mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use edudiff::analysis::{ResampleScheme, TTestKind};
use edudiff::baselines::BaselineMode;
use edudiff::classifier::FeatureSet;
use edudiff::prompt_metrics::stub::{StubReply, StubServer};

use config::RunConfig;

/// Education-level difficulty classification pipeline.
#[derive(Parser)]
#[command(name = "edudiff", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Overrides for values in the config file.
#[derive(Args)]
struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// ScienceQA problems.json or its directory.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// LLM response cache (JSONL).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    annotations: Option<PathBuf>,
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
    #[arg(long, global = true)]
    per_class: Option<usize>,
    #[arg(long, global = true)]
    train_fraction: Option<f64>,
    #[arg(long, global = true)]
    no_stratify: bool,
    /// static, prompt or combo.
    #[arg(long, global = true)]
    feature_set: Option<FeatureSet>,
    #[arg(long, global = true)]
    base_url: Option<String>,
    #[arg(long, global = true)]
    model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, global = true)]
    api_key_env: Option<String>,
    #[arg(long, global = true)]
    max_parallel: Option<usize>,
    #[arg(long, global = true)]
    l2_lambda: Option<f64>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a balanced, image-free dataset and split it.
    Ingest,
    /// Compute static and prompt-based features for every document.
    Featurize {
        /// Skip the LLM metrics.
        #[arg(long)]
        static_only: bool,
    },
    /// Fit the classifier on the training split and save it.
    Train {
        /// All three feature sets.
        #[arg(long)]
        all: bool,
    },
    /// Train and score on the test split.
    Eval {
        /// Static, prompt and combo, plus a summary table.
        #[arg(long)]
        all: bool,
    },
    /// Rank features by ANOVA F statistic.
    Rank {
        /// Rank over train and test instead of train only.
        #[arg(long)]
        all_rows: bool,
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Bootstrap comparison of combo against static features.
    Bootstrap {
        #[arg(long)]
        samples: Option<usize>,
        /// train or test.
        #[arg(long, value_parser = parse_scheme)]
        scheme: Option<ResampleScheme>,
        /// Welch instead of the paired t-test.
        #[arg(long)]
        welch: bool,
    },
    /// Ask the LLM for the level directly.
    Baseline {
        /// zero-shot or few-shot.
        #[arg(long)]
        mode: Option<BaselineMode>,
        #[arg(long)]
        shots: Option<usize>,
    },
    /// Collect the text reports written so far.
    Report,
    /// Serve a local chat-completions endpoint that always gives one reply.
    StubServer {
        #[arg(long, default_value = "127.0.0.1:8000")]
        addr: String,
        #[arg(long, default_value = "yes")]
        reply: String,
    },
}

fn parse_scheme(s: &str) -> std::result::Result<ResampleScheme, String> {
    match s {
        "train" => Ok(ResampleScheme::Train),
        "test" => Ok(ResampleScheme::Test),
        other => Err(format!("unknown resampling scheme '{other}' (train or test)")),
    }
}

fn resolve(g: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = &g.input {
        cfg.scienceqa = Some(v.clone());
    }
    if let Some(v) = &g.output_dir {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = &g.cache {
        cfg.cache_path = Some(v.clone());
    }
    if let Some(v) = &g.annotations {
        cfg.annotations = Some(v.clone());
    }
    if let Some(v) = &g.templates {
        cfg.templates = Some(v.clone());
    }
    if let Some(v) = g.per_class {
        cfg.split.per_class = v;
    }
    if let Some(v) = g.train_fraction {
        cfg.split.train_fraction = v;
    }
    if g.no_stratify {
        cfg.split.stratify = false;
    }
    if let Some(v) = g.feature_set {
        cfg.feature_set = v;
    }
    if let Some(v) = &g.base_url {
        cfg.llm.base_url = v.clone();
    }
    if let Some(v) = &g.model {
        cfg.llm.model_name = v.clone();
    }
    if let Some(v) = &g.api_key_env {
        cfg.llm.api_key_env = v.clone();
    }
    if let Some(v) = g.max_parallel {
        cfg.llm.max_parallel = v;
    }
    if let Some(v) = g.l2_lambda {
        cfg.classifier.l2_lambda = Some(v);
    }
    if let Some(v) = g.max_iters {
        cfg.classifier.max_iters = v;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = resolve(&cli.global)?;
    let sets = |all: bool, cfg: &RunConfig| if all { FeatureSet::ALL.to_vec() } else { vec![cfg.feature_set] };
    match cli.command {
        Command::StubServer { addr, reply } => {
            let server = StubServer::bind(&addr, move |_| StubReply::Content(reply.clone()))?;
            println!("serving {}", server.base_url());
            server.wait();
            return Ok(());
        }
        Command::Rank { top_k: Some(k), .. } => cfg.top_k = k,
        Command::Bootstrap { samples, scheme, welch } => {
            if let Some(n) = samples {
                cfg.bootstrap.n_samples = n;
            }
            if let Some(s) = scheme {
                cfg.bootstrap.scheme = s;
            }
            if welch {
                cfg.bootstrap.test = TTestKind::Welch;
            }
        }
        Command::Baseline { mode, shots } => {
            if let Some(m) = mode {
                cfg.baseline.mode = m;
            }
            if let Some(s) = shots {
                cfg.baseline.shots_per_class = s;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    match cli.command {
        Command::Ingest => commands::ingest(&cfg),
        Command::Featurize { static_only } => commands::featurize(&cfg, static_only),
        Command::Train { all } => commands::train_cmd(&cfg, &sets(all, &cfg)),
        Command::Eval { all } => commands::eval(&cfg, &sets(all, &cfg)),
        Command::Rank { all_rows, .. } => commands::rank(&cfg, all_rows),
        Command::Bootstrap { .. } => commands::bootstrap(&cfg),
        Command::Baseline { .. } => commands::baseline(&cfg),
        Command::Report => commands::report(&cfg),
        Command::StubServer { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
