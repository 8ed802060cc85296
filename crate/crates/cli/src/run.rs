//! The `run` command: every requested (task, method) pair is planned,
//! verified and executed on a worker pool; results and traces are written
//! in a fixed order so that repeated runs produce identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Deserialize;

use nsplan_core::envsim::FaultConfig;
use nsplan_core::kg::KnowledgeGraph;
use nsplan_core::macrolib::MacroLibrary;
use nsplan_core::metrics::MetricsReport;
use nsplan_core::pddl::{ground_catalog, parse_domain, ActionCatalog, Domain};
use nsplan_core::planner::correction::CorrectionLimits;
use nsplan_core::planner::pipeline::{run_pipeline, PipelineConfig, RunTrace};
use nsplan_core::planner::policy::{transcript_to_jsonl, Policy, RemoteConfig, RemotePolicy, ReplayPolicy};
use nsplan_core::planner::scripted::{ScriptFlaws, ScriptedPolicy};
use nsplan_core::planner::{Grounding, Method};
use nsplan_core::similarity::{SimilarityConfig, SimilarityProvider};
use nsplan_core::tasks::{self, TaskSpec};
use nsplan_core::world::WorldState;
use nsplan_core::{KITCHEN_DOMAIN, KITCHEN_TRIPLES};

use crate::report::{trace_file_name, write_results};

/// `HVR,HV` or `all`.
#[derive(Debug, Clone)]
pub struct MethodList(pub Vec<Method>);

impl FromStr for MethodList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(MethodList(Method::ALL.to_vec()));
        }
        let mut v = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let m: Method = part.parse()?;
            if !v.contains(&m) {
                v.push(m);
            }
        }
        if v.is_empty() {
            return Err("no method given".into());
        }
        Ok(MethodList(v))
    }
}

/// `T1,T3` or `all`.
#[derive(Debug, Clone)]
pub struct TaskList(pub Vec<String>);

impl FromStr for TaskList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let registry: Vec<String> = tasks::registry().into_iter().map(|t| t.id).collect();
        if s.eq_ignore_ascii_case("all") {
            return Ok(TaskList(registry));
        }
        let mut v = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let Some(id) = registry.iter().find(|id| id.eq_ignore_ascii_case(part)) else {
                return Err(format!("unknown task `{part}` (known: {})", registry.join(", ")));
            };
            if !v.contains(id) {
                v.push(id.clone());
            }
        }
        if v.is_empty() {
            return Err("no task given".into());
        }
        Ok(TaskList(v))
    }
}

/// Where policy answers come from.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    /// Recorded transcripts: a single file, or a directory holding
    /// `transcript-<task>-<method>.jsonl`.
    Replay(PathBuf),
    /// A chat-completion endpoint.
    Http(String),
    /// The rule-based stand-in; `clean` disables its first-draft flaws.
    Scripted { clean: bool },
}

impl FromStr for PolicySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            _ if s == "scripted" => Ok(PolicySpec::Scripted { clean: false }),
            Some(("scripted", "clean")) => Ok(PolicySpec::Scripted { clean: true }),
            Some(("replay", p)) if !p.is_empty() => Ok(PolicySpec::Replay(PathBuf::from(p))),
            Some(("http", _)) | Some(("https", _)) => Ok(PolicySpec::Http(s.strip_prefix("http:").filter(|r| !r.starts_with("//")).unwrap_or(s).to_string())),
            _ => Err(format!("unknown policy `{s}` (expected replay:<path>, http:<url>, scripted or scripted:clean)")),
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Comma-separated methods (HVR, HV, HR, VR, R, LLM) or `all`.
    #[arg(long, default_value = "all")]
    pub method: MethodList,
    /// Comma-separated task ids or `all`.
    #[arg(long, default_value = "all")]
    pub tasks: TaskList,
    /// Policy source: `replay:<file|dir>`, `http:<url>`, `scripted` or `scripted:clean`.
    #[arg(long, default_value = "scripted")]
    pub policy: PolicySpec,
    /// Seed of the simulator's fault draws.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fault injection, e.g. `p=0.003,drop@4,reject@7,inc=0.0001`.
    #[arg(long)]
    pub faults: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// TOML configuration; its values take precedence over flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write `transcript-<task>-<method>.jsonl` for later replay.
    #[arg(long)]
    pub record: bool,
    /// Macro library (JSONL) used for block reuse.
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Minimum description similarity for reusing a library block.
    #[arg(long, default_value_t = 0.8)]
    pub library_min_sim: f64,
    /// Store verified blocks of successful runs in the library.
    #[arg(long)]
    pub library_update: bool,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Feed the constructive task phrasing where a task has one.
    #[arg(long)]
    pub constructive: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    faults: Option<String>,
    constructive_input: Option<bool>,
    policy: Option<PolicyFile>,
    limits: Option<CorrectionLimits>,
    similarity: Option<SimilarityConfig>,
    library: Option<LibraryFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    model: Option<String>,
    token_env: Option<String>,
    temperature: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryFile {
    path: Option<PathBuf>,
    min_sim: Option<f64>,
    update: Option<bool>,
}

/// Fully resolved settings for one invocation.
struct Settings {
    methods: Vec<Method>,
    tasks: Vec<TaskSpec>,
    policy: PolicySpec,
    remote: Option<RemoteConfig>,
    pipeline: PipelineConfig,
    similarity: SimilarityConfig,
    library: Option<PathBuf>,
    library_update: bool,
    record: bool,
    out: PathBuf,
}

fn resolve(args: RunArgs) -> Result<Settings> {
    let file: FileConfig = match &args.config {
        Some(p) => toml::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => FileConfig::default(),
    };
    let faults_spec = file.faults.or(args.faults);
    let faults = match faults_spec.as_deref() {
        Some(s) => FaultConfig::parse(s).map_err(anyhow::Error::msg).context("parsing faults")?,
        None => FaultConfig::none(),
    };
    let lib_file = file.library.unwrap_or_default();
    let library = lib_file.path.or(args.library);
    let pipeline = PipelineConfig {
        method: Method::Hvr,
        seed: file.seed.unwrap_or(args.seed),
        faults,
        limits: file.limits.unwrap_or_default(),
        library_min_sim: library.as_ref().map(|_| lib_file.min_sim.unwrap_or(args.library_min_sim)),
        constructive_input: file.constructive_input.unwrap_or(args.constructive),
    };
    let remote = match &args.policy {
        PolicySpec::Http(url) => {
            let p = file.policy.unwrap_or_default();
            Some(RemoteConfig {
                url: url.clone(),
                model: p.model.unwrap_or_else(|| "default".into()),
                token_env: p.token_env.or_else(|| Some("NSPLAN_API_TOKEN".into())),
                temperature: p.temperature.unwrap_or(0.0),
            })
        }
        _ => None,
    };
    let tasks = args
        .tasks
        .0
        .iter()
        .map(|id| tasks::find(id).with_context(|| format!("unknown task {id}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Settings {
        methods: args.method.0,
        tasks,
        policy: args.policy,
        remote,
        pipeline,
        similarity: file.similarity.unwrap_or(SimilarityConfig::LexicalTrigram),
        library_update: lib_file.update.unwrap_or(args.library_update),
        library,
        record: args.record,
        out: args.out,
    })
}

/// The parsed domain and scene, shared read-only by all workers.
pub struct World {
    pub kg: KnowledgeGraph,
    pub domain: Domain,
    pub catalog: ActionCatalog,
    pub state0: WorldState,
}

impl World {
    pub fn kitchen() -> Result<World> {
        let kg = KnowledgeGraph::load_ontology(KITCHEN_TRIPLES).context("parsing the built-in scene")?;
        let domain = parse_domain(KITCHEN_DOMAIN).context("parsing the built-in domain")?;
        let catalog = ground_catalog(&domain, &kg);
        let state0 = WorldState::from_kg(&kg);
        Ok(World { kg, domain, catalog, state0 })
    }
}

fn make_policy(s: &Settings, w: &World, task: &TaskSpec, method: Method) -> Result<Box<dyn Policy>> {
    Ok(match &s.policy {
        PolicySpec::Scripted { clean } => {
            let flaws = if *clean { ScriptFlaws::none() } else { ScriptFlaws::all() };
            Box::new(ScriptedPolicy::new(task, &w.domain, &w.catalog, &w.state0, flaws)?)
        }
        PolicySpec::Http(_) => Box::new(RemotePolicy::new(s.remote.clone().expect("remote config resolved for http policies"))),
        PolicySpec::Replay(path) => {
            let file = if path.is_dir() {
                path.join(format!("transcript-{}-{}.jsonl", task.id, method))
            } else {
                path.clone()
            };
            if !file.is_file() {
                bail!("no transcript for {} {}: {} does not exist", task.id, method, file.display());
            }
            Box::new(ReplayPolicy::from_file(&file)?)
        }
    })
}

fn run_one(s: &Settings, w: &World, library: Option<&MacroLibrary>, task: &TaskSpec, method: Method) -> Result<RunTrace> {
    let mut policy = make_policy(s, w, task, method)?;
    let sim = SimilarityProvider::from_config(&s.similarity);
    let g = Grounding {
        domain: &w.domain,
        catalog: &w.catalog,
        sim: &sim,
    };
    let config = PipelineConfig {
        method,
        ..s.pipeline.clone()
    };
    Ok(run_pipeline(task, &config, &w.kg, g, policy.as_mut(), library)?)
}

pub fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let jobs = args.jobs;
    let s = resolve(args)?;
    if matches!(&s.policy, PolicySpec::Replay(p) if !p.is_dir()) && s.tasks.len() * s.methods.len() > 1 {
        bail!("a single transcript file can only replay one task under one method; pass a directory instead");
    }
    let world = World::kitchen()?;
    let mut library = match &s.library {
        Some(p) if p.exists() => Some(MacroLibrary::load(p).with_context(|| format!("loading {}", p.display()))?),
        Some(_) => Some(MacroLibrary::new()),
        None => None,
    };
    fs::create_dir_all(&s.out).with_context(|| format!("creating {}", s.out.display()))?;

    let pairs: Vec<(&TaskSpec, Method)> = s.tasks.iter().flat_map(|t| s.methods.iter().map(move |&m| (t, m))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let lib_ref = library.as_ref();
    let results: Vec<Result<RunTrace>> = pool.install(|| pairs.par_iter().map(|&(t, m)| run_one(&s, &world, lib_ref, t, m)).collect());

    let mut reports: Vec<MetricsReport> = Vec::new();
    let mut failures = 0;
    let mut candidates = BTreeMap::new();
    for (&(task, method), result) in pairs.iter().zip(results) {
        match result {
            Ok(trace) => {
                write_trace(&s.out, &task.id, method, &trace, s.record)?;
                let report = trace.facts.report();
                log::info!("{} {}: PC {:.2}", task.id, method, report.pc);
                reports.push(report);
                if trace.succeeded() {
                    candidates.insert((task.id.clone(), method), trace.library_candidates);
                }
            }
            Err(e) => {
                failures += 1;
                eprintln!("error: {} {}: {e:#}", task.id, method);
            }
        }
    }
    write_results(&s.out, &mut reports)?;

    if let (true, Some(lib), Some(path)) = (s.library_update, library.as_mut(), &s.library) {
        let mut stored = 0;
        for entry in candidates.into_values().flatten() {
            lib.store(entry)?;
            stored += 1;
        }
        lib.save(path).with_context(|| format!("saving {}", path.display()))?;
        println!("stored {stored} blocks in {}", path.display());
    }
    println!("{} of {} runs completed; results in {}", pairs.len() - failures, pairs.len(), s.out.display());
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn write_trace(out: &Path, task: &str, method: Method, trace: &RunTrace, record: bool) -> Result<()> {
    let path = out.join(trace_file_name(task, method));
    fs::write(&path, trace.to_jsonl()).with_context(|| format!("writing {}", path.display()))?;
    if record {
        let path = out.join(format!("transcript-{task}-{method}.jsonl"));
        fs::write(&path, transcript_to_jsonl(&trace.transcript)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
