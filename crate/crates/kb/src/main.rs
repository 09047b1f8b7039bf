use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use litreview_core::ingest::{parse_records, InputFormat};
use litreview_core::taxonomy::{builtin_prompt, builtin_taxonomy, load_taxonomy};
use litreview_core::{LabelSet, PromptSpec, Taxonomy};
use litreview_kb::api::{self, envelope, AppState, RecordParams};
use litreview_kb::{ExperimentMeta, GoldSubmission, KnowledgeBase};
use litreview_llm::{ClientConfig, HttpBackend, ModelId};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "litreview", version, about = "Literature-review knowledge base")]
struct Cli {
    /// Ledger file.
    #[arg(long, env = "LITREVIEW_LEDGER", default_value = "litreview.jsonl")]
    ledger: PathBuf,
    /// Taxonomy JSON; the built-in four-dimension taxonomy if omitted.
    #[arg(long, env = "LITREVIEW_TAXONOMY")]
    taxonomy: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// Counts of records, experiments and ledger entries.
    Health,
    /// Store the valid, not yet present records of a CSV or JSON-lines file
    /// without classifying them.
    Import { file: PathBuf },
    /// Store a batch and classify it with the active experiment.
    Ingest { file: PathBuf },
    /// Register, activate or list experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Classify stored records with an experiment.
    Run {
        #[arg(long)]
        experiment: String,
        /// File with one record id per line; all records if omitted.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Only records passing the gate dimension get the other prompts.
        #[arg(long)]
        gated: bool,
    },
    /// Filter records by final labels, year and text.
    Records(RecordArgs),
    /// Records needing expert attention, most disputed first.
    Queue {
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        dim: u32,
    },
    /// Enter an expert label.
    Gold {
        #[arg(long)]
        record: String,
        #[arg(long)]
        dim: u32,
        /// Comma-separated category ids.
        #[arg(long, value_delimiter = ',', required = true)]
        labels: Vec<String>,
        #[arg(long)]
        annotator: String,
        /// Sequence number of the gold label being replaced (0 for none).
        #[arg(long)]
        supersedes: Option<u64>,
    },
    /// Per-model metrics against the gold labels.
    Metrics {
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        dim: u32,
    },
    /// Per-record error counts per model.
    Heatmap {
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        dim: Option<u32>,
        /// Print CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Args)]
struct RecordArgs {
    /// `dim:category`, repeatable.
    #[arg(long = "label")]
    labels: Vec<String>,
    #[arg(long)]
    year_min: Option<i32>,
    #[arg(long)]
    year_max: Option<i32>,
    /// Text term, repeatable.
    #[arg(long = "text")]
    text: Vec<String>,
    #[arg(long, default_value_t = 0)]
    offset: usize,
    #[arg(long, default_value_t = litreview_kb::DEFAULT_LIMIT)]
    limit: usize,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Register an experiment.
    Create {
        #[arg(long)]
        id: String,
        #[arg(long, default_value = "")]
        description: String,
        /// `provider/model`, repeatable. The first one's votes become the
        /// stored final labels.
        #[arg(long = "model", required = true)]
        models: Vec<String>,
        /// Built-in prompt id (dim1, dim2, dim3, dim4_class, dim4_subclass)
        /// or a path to a prompt JSON file, repeatable.
        #[arg(long = "prompt", required = true)]
        prompts: Vec<String>,
        #[arg(long, default_value_t = 3)]
        k: u32,
        /// Client config JSON; defaults otherwise.
        #[arg(long)]
        client: Option<PathBuf>,
        #[arg(long)]
        activate: bool,
    },
    /// Make an experiment the configuration used by `ingest`.
    Activate { id: String },
    List,
}

fn print<T: Serialize>(data: T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(&envelope(data))?);
    Ok(())
}

fn parse_model(s: &str) -> anyhow::Result<ModelId> {
    let (provider, name) = s
        .split_once('/')
        .with_context(|| format!("model `{s}` is not provider/model"))?;
    Ok(ModelId::new(provider, name)?)
}

fn load_prompt(s: &str) -> anyhow::Result<PromptSpec> {
    if let Some(p) = builtin_prompt(s) {
        return Ok(p);
    }
    let path = Path::new(s);
    if !path.exists() {
        bail!("`{s}` is neither a built-in prompt id nor a file");
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {s}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing prompt {s}"))
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let taxonomy: Taxonomy = match &cli.taxonomy {
        Some(p) => load_taxonomy(p)?,
        None => builtin_taxonomy(),
    };
    let kb = Arc::new(KnowledgeBase::open(&cli.ledger, taxonomy)?);

    match cli.command {
        Command::Serve { addr } => {
            let state = AppState::new(kb, api::http_backends());
            let listener = tokio::net::TcpListener::bind(addr).await?;
            tracing::info!(%addr, "listening");
            axum::serve(listener, api::router(state)).await?;
        }
        Command::Health => {
            let s = kb.state();
            print(serde_json::json!({
                "records": s.records.len(),
                "experiments": s.experiments.len(),
                "ledger_entries": s.entries,
                "active_experiment": s.active,
            }))?;
        }
        Command::Import { file } => {
            let corpus = parse_records(&file, InputFormat::from_path(&file))?;
            let parsed = corpus.records.len();
            let (added, skipped, filter) = kb.import_records(corpus)?;
            print(serde_json::json!({
                "parsed": parsed,
                "added": added.len(),
                "skipped": skipped,
                "filtered": filter.removed(),
                "filter": filter,
            }))?;
        }
        Command::Ingest { file } => {
            let meta = kb
                .state()
                .active_meta()
                .cloned()
                .context("no active experiment configuration")?;
            let backend = Arc::new(HttpBackend::from_config(&meta.client)?);
            print(kb.ingest_new_batch(&file, backend).await?)?;
        }
        Command::Experiment(cmd) => experiment(&kb, cmd)?,
        Command::Run {
            experiment,
            records,
            gated,
        } => {
            let meta = kb.state().experiment(&experiment)?.meta.clone();
            let ids: Option<Vec<String>> = match records {
                Some(p) => Some(
                    std::fs::read_to_string(&p)
                        .with_context(|| format!("reading {}", p.display()))?
                        .lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .map(str::to_owned)
                        .collect(),
                ),
                None => None,
            };
            let backend = Arc::new(HttpBackend::from_config(&meta.client)?);
            print(kb.run_experiment(&experiment, ids.as_deref(), backend, gated).await?)?;
        }
        Command::Records(a) => {
            let params = RecordParams {
                labels: Some(a.labels.join(",")),
                year_min: a.year_min,
                year_max: a.year_max,
                q: Some(a.text.join(" ")),
                offset: Some(a.offset),
                limit: Some(a.limit),
            };
            print(kb.query_records(&params.to_query()?)?)?;
        }
        Command::Queue { experiment, dim } => print(kb.disagreement_queue(&experiment, dim)?)?,
        Command::Gold {
            record,
            dim,
            labels,
            annotator,
            supersedes,
        } => print(kb.record_gold_label(GoldSubmission {
            record_id: record,
            dim_id: dim,
            labels: labels.iter().map(|l| l.trim()).collect::<LabelSet>(),
            annotator,
            entered_at: None,
            supersedes,
        })?)?,
        Command::Metrics { experiment, dim } => print(kb.metrics(&experiment, dim)?)?,
        Command::Heatmap {
            experiment,
            dim,
            csv,
        } => {
            let maps = kb.heatmap(&experiment, dim)?;
            if csv {
                for h in &maps.heatmaps {
                    if maps.heatmaps.len() > 1 {
                        println!("# dimension {}", h.dim_id);
                    }
                    print!("{}", h.heatmap.to_csv());
                }
            } else {
                print(maps)?;
            }
        }
    }
    Ok(())
}

fn experiment(kb: &KnowledgeBase, cmd: ExperimentCmd) -> anyhow::Result<()> {
    match cmd {
        ExperimentCmd::Create {
            id,
            description,
            models,
            prompts,
            k,
            client,
            activate,
        } => {
            let client: ClientConfig = match client {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(&p)?)
                    .with_context(|| format!("parsing {}", p.display()))?,
                None => ClientConfig::default(),
            };
            let meta = ExperimentMeta {
                experiment_id: id,
                description,
                models: models.iter().map(|m| parse_model(m)).collect::<anyhow::Result<_>>()?,
                prompts: prompts.iter().map(|p| load_prompt(p)).collect::<anyhow::Result<_>>()?,
                k,
                client,
                active: activate,
            };
            let entry = kb.put_experiment(meta)?;
            print(entry)
        }
        ExperimentCmd::Activate { id } => {
            let mut meta = kb.state().experiment(&id)?.meta.clone();
            meta.active = true;
            print(kb.put_experiment(meta)?)
        }
        ExperimentCmd::List => {
            let s = kb.state();
            let list: Vec<&ExperimentMeta> = s.experiments.values().map(|e| &e.meta).collect();
            print(serde_json::json!({ "experiments": list }))
        }
    }
}
