//! The `ttsfc` command line. Every subcommand reads and writes files; data
//! goes to files or stdout, diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 data error, 3
//! transport error.

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{
    classify, derive_levels, fit_prototypes, load_latents, LayerRange, LevelRecord, PrototypeSet,
};
use crate::config::AppConfig;
use crate::evalkit::{
    cost_report, drift_summary, evaluate, judge_batch, render_table, upper_bound, CostReport, EvalReport,
    JudgeCase, UpperBound,
};
use crate::gateway::{ChatProvider, HttpChat, ReplayTransport, SamplingConfig};
use crate::http::{JsonClient, RetryPolicy};
use crate::jsonl;
use crate::retrieval::{
    build_index, load_index, rerank, save_index, EmbeddingProvider, EvidenceDoc, EvidenceHit, FixtureEmbeddings,
    HttpEmbeddings, RankedEvidence,
};
use crate::strategies::{decompose, Pipeline, StrategyConfig};
use crate::types::{check_unique_ids, ClaimRecord, Level, RunRecord, Strategy, Verdict};
use crate::verifier::{build_training_data, positive_rate, FixtureScorer, HttpScorer, ScoringProvider};
use crate::Error;

const DEFAULT_EMBEDDING_MODEL: &str = "text-embedding-3-small";

#[derive(Debug, Parser)]
#[command(name = "ttsfc", version, about = "Claim verification with verifier-guided test-time scaling")]
pub struct Cli {
    /// Config file (default ./ttsfc.toml when present).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads (default: config, else logical CPUs).
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    /// Zero timing fields and omit timestamps so outputs are reproducible.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and persist a BM25 index.
    Index {
        #[command(subcommand)]
        cmd: IndexCmd,
    },
    /// BM25 retrieval followed by embedding rerank.
    Retrieve(RetrieveArgs),
    /// Sample reasoning paths and select verdicts.
    Run(RunArgs),
    /// Verifier training data.
    Verifier {
        #[command(subcommand)]
        cmd: VerifierCmd,
    },
    /// Complexity levels and the latent prototype classifier.
    Complexity {
        #[command(subcommand)]
        cmd: ComplexityCmd,
    },
    /// Metrics, oracle upper bound and cost comparison.
    Eval(EvalArgs),
    /// LLM-judge audits.
    Judge {
        #[command(subcommand)]
        cmd: JudgeCmd,
    },
    /// Split claims into yes/no sub-questions.
    Decompose(DecomposeArgs),
}

#[derive(Debug, Subcommand)]
enum IndexCmd {
    /// Index a JSONL corpus of {doc_id, title?, text}.
    Build {
        #[arg(long, value_name = "F")]
        corpus: PathBuf,
        #[arg(long, value_name = "F")]
        out: PathBuf,
        /// Term-frequency saturation (default: config, else 1.2).
        #[arg(long)]
        k1: Option<f64>,
        /// Length normalisation (default: config, else 0.75).
        #[arg(long)]
        b: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct RetrieveArgs {
    #[arg(long, value_name = "F")]
    index: PathBuf,
    #[arg(long, value_name = "F")]
    claims: PathBuf,
    /// BM25 candidates per claim (default: config, else 100).
    #[arg(long, value_name = "K")]
    topk: Option<usize>,
    /// Documents kept after rerank (default: config, else 3).
    #[arg(long, value_name = "K")]
    rerank_top: Option<usize>,
    /// Embedding source: `fixture:FILE`, `http` (config endpoint) or a URL.
    #[arg(long, value_name = "SPEC", default_value = "http", value_parser = parse_fixture_spec)]
    embedder: ProviderSpec,
    /// Keep the BM25 order and skip embedding rerank.
    #[arg(long)]
    no_rerank: bool,
    #[arg(long, value_name = "F")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// top1 | sc | bon | adaptive (default: config, else adaptive).
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<Strategy>,
    /// Paths per claim (default: config, else 10).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    m: Option<u32>,
    #[arg(long, value_name = "F")]
    claims: PathBuf,
    /// RankedEvidence JSONL with document text.
    #[arg(long, value_name = "F")]
    evidence: PathBuf,
    /// Prefix each prompt with model-generated sub-questions.
    #[arg(long)]
    with_decomp: bool,
    /// Complexity levels JSONL {claim_id, level}, for the adaptive strategy.
    #[arg(long, value_name = "F")]
    levels: Option<PathBuf>,
    /// Chat source: `replay:FILE`, `http` (config endpoint) or a URL.
    #[arg(long, value_name = "SPEC", default_value = "http", value_parser = parse_replay_spec)]
    transport: ProviderSpec,
    /// Verifier source: `fixture:FILE`, `http` (config endpoint) or a URL.
    #[arg(long, value_name = "SPEC", default_value = "http", value_parser = parse_fixture_spec)]
    scorer: ProviderSpec,
    /// Sampling temperature (default: config, else 0.45).
    #[arg(long)]
    temperature: Option<f64>,
    /// Base seed; path i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Chat model name.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_name = "F")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum VerifierCmd {
    /// Label every sampled path 1 if its verdict matches gold, else 0.
    BuildData {
        #[arg(long, value_name = "F")]
        runs: PathBuf,
        #[arg(long, value_name = "F")]
        claims: PathBuf,
        /// Attach retrieved evidence texts from this RankedEvidence JSONL.
        #[arg(long, value_name = "F")]
        evidence: Option<PathBuf>,
        #[arg(long, value_name = "F")]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum ComplexityCmd {
    /// Level 0 where the one-shot baseline was right, level 1 otherwise.
    DeriveLevels {
        #[arg(long, value_name = "F")]
        baseline: PathBuf,
        #[arg(long, value_name = "F")]
        decomp: PathBuf,
        #[arg(long, value_name = "F")]
        claims: PathBuf,
        #[arg(long, value_name = "F")]
        out: PathBuf,
    },
    /// Fit per-class, per-layer prototypes from an LTNT latent file.
    Fit {
        #[arg(long, value_name = "F")]
        latents: PathBuf,
        #[arg(long, value_name = "F")]
        levels: PathBuf,
        /// First layer used (default: config, else 0).
        #[arg(long)]
        first_layer: Option<usize>,
        /// Last layer used, inclusive (default: config, else the top layer).
        #[arg(long)]
        last_layer: Option<usize>,
        #[arg(long, value_name = "F")]
        out: PathBuf,
    },
    /// Assign a level to every stack in an LTNT file.
    Classify {
        #[arg(long, value_name = "F")]
        latents: PathBuf,
        #[arg(long, value_name = "F")]
        protos: PathBuf,
        #[arg(long, value_name = "F")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_name = "F")]
    runs: PathBuf,
    /// Claims JSONL carrying gold labels.
    #[arg(long, value_name = "F")]
    claims: PathBuf,
    /// Also report accuracy and F1 under a perfect verifier.
    #[arg(long)]
    upper_bound: bool,
    /// Second run file; adds its metrics and a cost comparison (second over first).
    #[arg(long, value_name = "F")]
    compare: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write cost comparison rows as CSV (needs --compare).
    #[arg(long, value_name = "F")]
    csv: Option<PathBuf>,
    /// Output file (default stdout).
    #[arg(long, value_name = "F")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum JudgeCmd {
    /// Ask the judge whether verifier-guided reasoning avoided drift.
    Drift {
        #[arg(long, value_name = "F")]
        cases: PathBuf,
        /// Chat source: `replay:FILE`, `http` (config endpoint) or a URL.
        #[arg(long, value_name = "SPEC", default_value = "http", value_parser = parse_replay_spec)]
        transport: ProviderSpec,
        #[arg(long, value_name = "F")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[arg(long, value_name = "F")]
    claims: PathBuf,
    /// Chat source: `replay:FILE`, `http` (config endpoint) or a URL.
    #[arg(long, value_name = "SPEC", default_value = "http", value_parser = parse_replay_spec)]
    transport: ProviderSpec,
    #[arg(long, value_name = "F")]
    out: PathBuf,
}

/// Where a provider's answers come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProviderSpec {
    File(PathBuf),
    /// Configured endpoint when `None`.
    Endpoint(Option<String>),
}

fn parse_spec(s: &str, file_prefix: &str) -> Result<ProviderSpec, String> {
    if let Some(rest) = s.strip_prefix(file_prefix).and_then(|r| r.strip_prefix(':')) {
        if rest.is_empty() {
            return Err(format!("`{file_prefix}:` needs a file path"));
        }
        return Ok(ProviderSpec::File(PathBuf::from(rest)));
    }
    if s == "http" {
        return Ok(ProviderSpec::Endpoint(None));
    }
    if s.starts_with("http://") || s.starts_with("https://") {
        url::Url::parse(s).map_err(|e| format!("invalid URL {s:?}: {e}"))?;
        return Ok(ProviderSpec::Endpoint(Some(s.to_string())));
    }
    Err(format!("expected `{file_prefix}:FILE`, `http` or an http(s) URL, got {s:?}"))
}

fn parse_replay_spec(s: &str) -> Result<ProviderSpec, String> {
    parse_spec(s, "replay")
}

fn parse_fixture_spec(s: &str) -> Result<ProviderSpec, String> {
    parse_spec(s, "fixture")
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

/// Shared state for one invocation.
struct Ctx {
    cfg: AppConfig,
    jobs: usize,
    deterministic: bool,
}

impl Ctx {
    fn client(&self, env_var: &str) -> JsonClient {
        let bearer = std::env::var(env_var).ok().filter(|s| !s.is_empty());
        let retry: RetryPolicy = self.cfg.retry_policy();
        JsonClient::new(bearer, retry, Duration::from_secs(self.cfg.retry.timeout_s.max(1)))
    }

    fn endpoint(&self, given: &Option<String>, configured: &Option<String>, what: &str) -> Result<String, Error> {
        given
            .clone()
            .or_else(|| configured.clone())
            .ok_or_else(|| Error::Usage(format!("no {what} endpoint: set it in the config or pass a URL")))
    }

    fn chat(&self, spec: &ProviderSpec) -> Result<Box<dyn ChatProvider>, Error> {
        Ok(match spec {
            ProviderSpec::File(p) => Box::new(ReplayTransport::load(p)?),
            ProviderSpec::Endpoint(url) => {
                let base = self.endpoint(url, &self.cfg.endpoints.chat, "chat")?;
                Box::new(
                    HttpChat::new(&base, self.client("CHAT_API_KEY"))
                        .with_n_support(self.cfg.endpoints.chat_supports_n.unwrap_or(true)),
                )
            }
        })
    }

    fn scorer(&self, spec: &ProviderSpec) -> Result<Box<dyn ScoringProvider>, Error> {
        Ok(match spec {
            ProviderSpec::File(p) => Box::new(FixtureScorer::load(p)?),
            ProviderSpec::Endpoint(url) => {
                let base = self.endpoint(url, &self.cfg.endpoints.verifier_score, "verifier-score")?;
                Box::new(HttpScorer::new(&base, self.client("VERIFIER_API_KEY")))
            }
        })
    }

    fn embedder(&self, spec: &ProviderSpec) -> Result<Box<dyn EmbeddingProvider>, Error> {
        Ok(match spec {
            ProviderSpec::File(p) => Box::new(FixtureEmbeddings::load(p)?),
            ProviderSpec::Endpoint(url) => {
                let base = self.endpoint(url, &self.cfg.endpoints.embeddings, "embeddings")?;
                let model = self
                    .cfg
                    .endpoints
                    .embedding_model
                    .clone()
                    .unwrap_or_else(|| DEFAULT_EMBEDDING_MODEL.to_string());
                Box::new(HttpEmbeddings::new(&base, model, self.client("EMBEDDINGS_API_KEY")))
            }
        })
    }

    fn install<R: Send>(&self, work: impl FnOnce() -> R + Send) -> R {
        match rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        }
    }
}

fn read_claims(path: &Path) -> Result<Vec<ClaimRecord>, Error> {
    let claims: Vec<ClaimRecord> = jsonl::read(path)?;
    check_unique_ids(claims.iter().map(|c| c.id.as_str()))?;
    Ok(claims)
}

fn gold_map(claims: &[ClaimRecord]) -> HashMap<String, Verdict> {
    claims
        .iter()
        .filter_map(|c| c.gold.map(|g| (c.id.clone(), g)))
        .collect()
}

fn read_levels(path: &Path) -> Result<HashMap<String, Level>, Error> {
    let rows: Vec<LevelRecord> = jsonl::read(path)?;
    Ok(rows.into_iter().map(|r| (r.claim_id, r.level)).collect())
}

fn read_evidence(path: &Path) -> Result<Vec<RankedEvidence>, Error> {
    let rows: Vec<RankedEvidence> = jsonl::read(path)?;
    check_unique_ids(rows.iter().map(|r| r.claim_id.as_str()))?;
    Ok(rows)
}

fn write_json(out: Option<&Path>, value: &impl Serialize) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(out, &text)
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .try_init();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let cfg = AppConfig::load(cli.config.as_deref())?;
    let jobs = cli
        .jobs
        .map(|j| j as usize)
        .or(cfg.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let ctx = Ctx {
        cfg,
        jobs,
        deterministic: cli.deterministic,
    };
    match cli.command {
        Command::Index {
            cmd: IndexCmd::Build { corpus, out, k1, b },
        } => index_build(&ctx, &corpus, &out, k1, b),
        Command::Retrieve(a) => retrieve(&ctx, &a),
        Command::Run(a) => run(&ctx, &a),
        Command::Verifier {
            cmd: VerifierCmd::BuildData {
                runs,
                claims,
                evidence,
                out,
            },
        } => verifier_build_data(&runs, &claims, evidence.as_deref(), &out),
        Command::Complexity { cmd } => complexity(&ctx, cmd),
        Command::Eval(a) => eval(&ctx, &a),
        Command::Judge {
            cmd: JudgeCmd::Drift { cases, transport, out },
        } => judge(&ctx, &cases, &transport, &out),
        Command::Decompose(a) => decompose_cmd(&ctx, &a),
    }
}

fn index_build(ctx: &Ctx, corpus: &Path, out: &Path, k1: Option<f64>, b: Option<f64>) -> Result<(), Error> {
    let mut params = ctx.cfg.bm25_params();
    params.k1 = k1.unwrap_or(params.k1);
    params.b = b.unwrap_or(params.b);
    if (params.k1.is_nan() || params.k1 < 0.0) || !(0.0..=1.0).contains(&params.b) {
        return Err(Error::Usage(format!("need k1 >= 0 and b in [0, 1], got {} and {}", params.k1, params.b)));
    }
    let docs: Vec<EvidenceDoc> = jsonl::read(corpus)?;
    let index = build_index(docs, params)?;
    save_index(out, &index)?;
    log::info!(
        "indexed {} documents ({} terms) into {}",
        index.doc_count(),
        index.terms().count(),
        out.display()
    );
    Ok(())
}

fn retrieve(ctx: &Ctx, a: &RetrieveArgs) -> Result<(), Error> {
    let index = load_index(&a.index)?;
    let claims = read_claims(&a.claims)?;
    let topk = a.topk.unwrap_or(ctx.cfg.retrieval.topk);
    let keep = a.rerank_top.unwrap_or(ctx.cfg.retrieval.rerank_top);
    if topk == 0 || keep == 0 {
        return Err(Error::Usage("--topk and --rerank-top must be at least 1".into()));
    }
    let embedder = if a.no_rerank { None } else { Some(ctx.embedder(&a.embedder)?) };
    let results: Vec<Result<RankedEvidence, Error>> = ctx.install(|| {
        claims
            .par_iter()
            .map(|c| {
                let candidates = index.search_docs(&c.claim, topk);
                if candidates.is_empty() {
                    log::warn!("claim {}: no BM25 matches", c.id);
                    return Ok(RankedEvidence {
                        claim_id: c.id.clone(),
                        hits: Vec::new(),
                    });
                }
                match &embedder {
                    Some(e) => Ok(rerank(&c.id, &c.claim, &candidates, keep, e.as_ref())?),
                    None => {
                        let scores = index.search(&c.claim, topk);
                        let hits = candidates
                            .into_iter()
                            .zip(scores)
                            .take(keep)
                            .map(|(d, (_, score))| EvidenceHit {
                                doc_id: d.doc_id,
                                score,
                                title: d.title,
                                text: Some(d.text),
                            })
                            .collect();
                        Ok(RankedEvidence {
                            claim_id: c.id.clone(),
                            hits,
                        })
                    }
                }
            })
            .collect()
    });
    let ranked = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    jsonl::write(&a.out, &ranked)?;
    log::info!("wrote evidence for {} claims to {}", ranked.len(), a.out.display());
    Ok(())
}

fn run(ctx: &Ctx, a: &RunArgs) -> Result<(), Error> {
    let claims = read_claims(&a.claims)?;
    let evidence: HashMap<String, Vec<EvidenceDoc>> = read_evidence(&a.evidence)?
        .into_iter()
        .map(|r| {
            let docs = r.documents();
            (r.claim_id, docs)
        })
        .collect();
    let levels = a.levels.as_deref().map(read_levels).transpose()?;

    let s = &ctx.cfg.strategy;
    let strategy = StrategyConfig {
        kind: a.strategy.unwrap_or(s.kind),
        m: a.m.unwrap_or(s.m),
        with_decomposition: a.with_decomp || s.with_decomposition,
        level0_m: s.level0_m,
    };
    strategy.validate()?;
    let sampling = SamplingConfig {
        m: strategy.m,
        temperature: a.temperature.unwrap_or(ctx.cfg.sampling.temperature),
        seed: a.seed.or(ctx.cfg.sampling.seed),
        model: a.model.clone().unwrap_or_else(|| ctx.cfg.sampling.model.clone()),
        ..ctx.cfg.sampling.clone()
    };
    sampling.validate()?;

    let template = ctx.cfg.fact_check_template()?;
    let decomposition = ctx.cfg.decompose_template()?;
    let chat = ctx.chat(&a.transport)?;
    let scorer = match strategy.kind {
        Strategy::BoN | Strategy::AdaptiveBoN => Some(ctx.scorer(&a.scorer)?),
        Strategy::Top1 | Strategy::SelfConsistency => None,
    };
    let pipeline = Pipeline {
        template: &template,
        decomposition: &decomposition,
        chat: chat.as_ref(),
        scorer: scorer.as_deref(),
        sampling,
        score_with_evidence: s.score_with_evidence,
        deterministic: ctx.deterministic,
    };
    let results = pipeline.run_batch(&claims, &evidence, &strategy, levels.as_ref(), ctx.jobs);

    let mut records: Vec<RunRecord> = Vec::with_capacity(results.len());
    let mut first_error = None;
    for (claim, r) in claims.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                log::error!("claim {}: {e}", claim.id);
                first_error.get_or_insert(e);
            }
        }
    }
    jsonl::write(&a.out, &records)?;
    let calls: u64 = records.iter().map(RunRecord::llm_calls).sum();
    log::info!(
        "{} run: {}/{} claims, {} llm calls, wrote {}",
        strategy.kind,
        records.len(),
        claims.len(),
        calls,
        a.out.display()
    );
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn verifier_build_data(runs: &Path, claims: &Path, evidence: Option<&Path>, out: &Path) -> Result<(), Error> {
    let runs: Vec<RunRecord> = jsonl::read(runs)?;
    let claims = read_claims(claims)?;
    let texts: Option<HashMap<String, Vec<String>>> = evidence
        .map(read_evidence)
        .transpose()?
        .map(|rows| {
            rows.into_iter()
                .map(|r| {
                    let texts = r.documents().into_iter().map(|d| d.text).collect();
                    (r.claim_id, texts)
                })
                .collect()
        });
    let examples = build_training_data(&runs, &claims, texts.as_ref())?;
    jsonl::write(out, &examples)?;
    log::info!(
        "wrote {} examples, positive rate {:.4}",
        examples.len(),
        positive_rate(&examples).unwrap_or(0.0)
    );
    Ok(())
}

fn complexity(ctx: &Ctx, cmd: ComplexityCmd) -> Result<(), Error> {
    match cmd {
        ComplexityCmd::DeriveLevels {
            baseline,
            decomp,
            claims,
            out,
        } => {
            let baseline: Vec<RunRecord> = jsonl::read(&baseline)?;
            let decomp: Vec<RunRecord> = jsonl::read(&decomp)?;
            let gold = gold_map(&read_claims(&claims)?);
            let levels = derive_levels(&baseline, &decomp, &gold)?;
            let rows: Vec<LevelRecord> = levels
                .into_iter()
                .map(|(claim_id, level)| LevelRecord { claim_id, level })
                .collect();
            let hard = rows.iter().filter(|r| r.level == Level::Level1).count();
            jsonl::write(&out, &rows)?;
            log::info!("{} claims: {} level 0, {} level 1", rows.len(), rows.len() - hard, hard);
        }
        ComplexityCmd::Fit {
            latents,
            levels,
            first_layer,
            last_layer,
            out,
        } => {
            let stacks = load_latents(&latents)?;
            let labels = read_levels(&levels)?;
            let range = LayerRange {
                first: first_layer.or(ctx.cfg.complexity.first_layer).unwrap_or(0),
                last: last_layer.or(ctx.cfg.complexity.last_layer),
            };
            let protos = ctx.install(|| fit_prototypes(&stacks, &labels, range))?;
            protos.save(&out)?;
            log::info!("fitted prototypes over {} layers, h = {}", protos.layers(), protos.hidden());
        }
        ComplexityCmd::Classify { latents, protos, out } => {
            let stacks = load_latents(&latents)?;
            let protos = PrototypeSet::load(&protos)?;
            let results = ctx.install(|| {
                stacks
                    .par_iter()
                    .map(|s| classify(s, &protos))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            jsonl::write(&out, &results)?;
            let hard = results.iter().filter(|c| c.level == Level::Level1).count();
            log::info!("classified {}: {} level 1", results.len(), hard);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub report: EvalReport,
    pub cost: CostReport,
}

/// What `eval` emits in JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub report: EvalReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<UpperBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<Comparison>,
    /// Seconds since the epoch; omitted under `--deterministic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
}

fn eval(ctx: &Ctx, a: &EvalArgs) -> Result<(), Error> {
    if a.csv.is_some() && a.compare.is_none() {
        return Err(Error::Usage("--csv needs --compare".into()));
    }
    let runs: Vec<RunRecord> = jsonl::read(&a.runs)?;
    let gold = gold_map(&read_claims(&a.claims)?);
    let report = evaluate(&runs, &gold)?;
    let upper = a.upper_bound.then(|| upper_bound(&runs, &gold)).transpose()?;
    let compare = match &a.compare {
        Some(path) => {
            let other: Vec<RunRecord> = jsonl::read(path)?;
            Some(Comparison {
                report: evaluate(&other, &gold)?,
                cost: cost_report(&runs, &other)?,
            })
        }
        None => None,
    };
    if let (Some(csv_path), Some(c)) = (&a.csv, &compare) {
        c.cost.write_csv(std::fs::File::create(csv_path)?)?;
    }
    let generated_unix = (!ctx.deterministic).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    });
    let output = EvalOutput {
        report,
        upper_bound: upper,
        compare,
        generated_unix,
    };
    match a.format {
        Format::Json => write_json(a.out.as_deref(), &output),
        Format::Table => {
            let name = |p: &Path| p.file_stem().map_or("runs".into(), |s| s.to_string_lossy().into_owned());
            let first = name(&a.runs);
            let mut rows: Vec<(String, &EvalReport)> = vec![(first, &output.report)];
            if let Some(u) = &output.upper_bound {
                rows.push(("upper bound".into(), &u.report));
            }
            if let (Some(c), Some(p)) = (&output.compare, &a.compare) {
                rows.push((name(p), &c.report));
            }
            let borrowed: Vec<(&str, &EvalReport)> = rows.iter().map(|(n, r)| (n.as_str(), *r)).collect();
            let mut text = render_table(&borrowed);
            if let Some(c) = &output.compare {
                text.push_str(&format!("\nllm calls ratio (compare / runs): {}\n", c.cost.calls_ratio));
                if let Some(w) = c.cost.wall_ratio {
                    text.push_str(&format!("wall time ratio (compare / runs): {w}\n"));
                }
            }
            write_text(a.out.as_deref(), &text)
        }
    }
}

fn judge(ctx: &Ctx, cases: &Path, transport: &ProviderSpec, out: &Path) -> Result<(), Error> {
    let cases: Vec<JudgeCase> = jsonl::read(cases)?;
    let template = ctx.cfg.judge_template()?;
    let chat = ctx.chat(transport)?;
    let judgments = ctx.install(|| judge_batch(&cases, &template, &ctx.cfg.sampling, chat.as_ref()))?;
    jsonl::write(out, &judgments)?;
    write_json(None, &drift_summary(&judgments)?)
}

/// One line of `decompose` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub claim_id: String,
    pub subquestions: Vec<String>,
}

fn decompose_cmd(ctx: &Ctx, a: &DecomposeArgs) -> Result<(), Error> {
    let claims = read_claims(&a.claims)?;
    let template = ctx.cfg.decompose_template()?;
    let chat = ctx.chat(&a.transport)?;
    let rows = ctx.install(|| {
        claims
            .par_iter()
            .map(|c| {
                decompose(c, &template, &ctx.cfg.sampling, chat.as_ref()).map(|subquestions| Decomposition {
                    claim_id: c.id.clone(),
                    subquestions,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    jsonl::write(&a.out, &rows)?;
    log::info!("decomposed {} claims", rows.len());
    Ok(())
}
