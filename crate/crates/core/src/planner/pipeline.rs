//! End-to-end runs: context retrieval, macro planning and verification,
//! block expansion and correction, execution in the simulator with
//! expected-versus-observed alignment, and the run trace.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::conditions::{
    apply_condition_lines, parse_condition_lines, render_macro_plan, verify_macro_plan, MacroAction, MacroVerification,
};
use super::correction::{
    correct_aa_block, correct_macro_conditions, AttemptRecord, BlockRequest, ConditionAttempt, ConditionRequest,
    CorrectionLimits,
};
use super::heuristic::heuristic_correct;
use super::mapping::map_response;
use super::policy::{Policy, PolicyRequest, RecordingPolicy, RequestKind, TranscriptRecord};
use super::prompts::prompt;
use super::{Grounding, Method, PlannerError};
use crate::envsim::{FaultConfig, FaultKind, MonitoredStep, Simulator};
use crate::kg::{KnowledgeGraph, Triple};
use crate::macrolib::{LibraryEntry, MacroLibrary};
use crate::metrics::RunFacts;
use crate::pddl::GroundedAction;
use crate::rag::{object_classes, parse_selected_classes, resolve_instances, retrieve_context, select_objects_lexical, RetrievedContext};
use crate::tasks::TaskSpec;
use crate::text::list_items;
use crate::validator::{verify_plan, ValidationReport};
use crate::world::WorldState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub method: Method,
    pub seed: u64,
    pub faults: FaultConfig,
    pub limits: CorrectionLimits,
    /// Reuse library blocks whose description is at least this similar;
    /// `None` always expands with the policy.
    pub library_min_sim: Option<f64>,
    /// Feed the constructive task phrasing instead of the goal-oriented
    /// one, where the task has it.
    pub constructive_input: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            method: Method::Hvr,
            seed: 0,
            faults: FaultConfig::none(),
            limits: CorrectionLimits::default(),
            library_min_sim: None,
            constructive_input: false,
        }
    }
}

/// The concatenated blocks with the block index of every step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandedPlan {
    pub actions: Vec<GroundedAction>,
    pub provenance: Vec<usize>,
}

impl ExpandedPlan {
    pub fn push_block(&mut self, index: usize, block: &[GroundedAction]) {
        self.actions.extend(block.iter().cloned());
        self.provenance.extend(std::iter::repeat_n(index, block.len()));
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// One line of a run trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TraceRecord {
    Header {
        task: String,
        method: Method,
        seed: u64,
        task_text: String,
        faults: FaultConfig,
    },
    Context {
        retrieval: bool,
        objects: Vec<String>,
        warnings: Vec<String>,
    },
    PolicyCall {
        call_index: usize,
        kind: RequestKind,
        prompt_digest: String,
        response: String,
    },
    MacroPlan {
        descriptions: Vec<String>,
    },
    MacroConditions {
        checkpoint: String,
        index: Option<usize>,
        pre: Vec<String>,
        post: Vec<String>,
    },
    MacroVerification {
        checkpoint: String,
        verification: MacroVerification,
    },
    ConditionCorrection {
        attempts: Vec<ConditionAttempt>,
    },
    Block {
        index: Option<usize>,
        stage: String,
        actions: Vec<String>,
    },
    Validation {
        scope: String,
        index: Option<usize>,
        checkpoint: String,
        report: ValidationReport,
    },
    BlockCorrection {
        index: Option<usize>,
        valid: bool,
        exhausted: bool,
        attempts: Vec<AttemptRecord>,
    },
    Execution {
        step: usize,
        action: String,
        success: bool,
        fault: Option<FaultKind>,
        missing: Vec<Triple>,
        unexpected: Vec<Triple>,
        auditory: Option<String>,
        event: Option<String>,
    },
    Note {
        message: String,
    },
    EPlan {
        actions: Vec<String>,
        provenance: Vec<usize>,
    },
    Facts(RunFacts),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub facts: RunFacts,
    pub macros: Vec<MacroAction>,
    pub eplan: ExpandedPlan,
    /// Every policy exchange, replayable.
    pub transcript: Vec<TranscriptRecord>,
    /// Macro actions with their final blocks, present only when the whole
    /// plan executed without failure.
    pub library_candidates: Vec<LibraryEntry>,
}

impl RunTrace {
    /// JSON lines; the last line holds the run facts.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn succeeded(&self) -> bool {
        !self.facts.execution_failed && self.facts.executed == self.facts.eplan.len()
    }
}

/// Reads the run facts back from a trace file.
pub fn facts_from_jsonl(text: &str) -> Result<RunFacts, String> {
    let mut facts = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        if let TraceRecord::Facts(f) = rec {
            facts = Some(f);
        }
    }
    facts.ok_or_else(|| "trace has no facts record".to_string())
}

/// `name(?x - Class, ...)` lines for prompts.
pub fn render_action_schemas(g: &Grounding) -> String {
    let mut s = String::new();
    for a in &g.domain.actions {
        let params: Vec<String> = a.parameters.iter().map(|p| format!("?{} - {}", p.name, p.class)).collect();
        let _ = writeln!(s, "{}({})", a.name, params.join(", "));
    }
    s
}

fn render_predicates(g: &Grounding) -> String {
    let mut s = String::new();
    for (p, n) in &g.domain.predicates {
        let args: Vec<String> = (0..*n).map(|i| format!("?x{i}")).collect();
        let _ = writeln!(s, "({p}{}{})", if args.is_empty() { "" } else { " " }, args.join(" "));
    }
    s
}

/// Macro plan generation: one macro action per response line.
pub fn generate_macro_plan<P: Policy + ?Sized>(
    task_id: &str,
    task_text: &str,
    context: &str,
    policy: &mut P,
) -> Result<Vec<MacroAction>, PlannerError> {
    let response = policy.complete(&PolicyRequest {
        kind: RequestKind::MacroPlan,
        task_id: task_id.to_string(),
        macro_index: None,
        prompt: prompt(RequestKind::MacroPlan, &[("task", task_text), ("context", context)]),
    })?;
    let mas: Vec<MacroAction> = list_items(&response)
        .into_iter()
        .enumerate()
        .map(|(i, d)| MacroAction::new(i, d))
        .collect();
    if mas.is_empty() {
        return Err(PlannerError::DegeneratePlan);
    }
    Ok(mas)
}

/// Asks for pre/postconditions of every macro action.
pub fn generate_macro_conditions<P: Policy + ?Sized>(
    mas: &mut [MacroAction],
    task_id: &str,
    task_text: &str,
    context: &str,
    g: &Grounding,
    policy: &mut P,
) -> Result<(), PlannerError> {
    let response = policy.complete(&PolicyRequest {
        kind: RequestKind::MacroConditions,
        task_id: task_id.to_string(),
        macro_index: None,
        prompt: prompt(
            RequestKind::MacroConditions,
            &[
                ("predicates", &render_predicates(g)),
                ("context", context),
                ("task", task_text),
                ("macro_plan", &render_macro_plan(mas)),
            ],
        ),
    })?;
    apply_condition_lines(mas, &response);
    Ok(())
}

/// Expands one macro action into a grounded block.
#[allow(clippy::too_many_arguments)]
pub fn expand_macro<P: Policy + ?Sized>(
    ma: &MacroAction,
    mas: &[MacroAction],
    task_id: &str,
    task_text: &str,
    context: &str,
    history: &str,
    g: &Grounding,
    policy: &mut P,
) -> Result<Vec<GroundedAction>, PlannerError> {
    let index = (ma.index + 1).to_string();
    let response = policy.complete(&PolicyRequest {
        kind: RequestKind::ExpandMacro,
        task_id: task_id.to_string(),
        macro_index: Some(ma.index),
        prompt: prompt(
            RequestKind::ExpandMacro,
            &[
                ("action_schemas", &render_action_schemas(g)),
                ("context", context),
                ("task", task_text),
                ("macro_plan", &render_macro_plan(mas)),
                ("history", history),
                ("index", &index),
                ("subtask", &ma.description),
            ],
        ),
    })?;
    let block = map_response(&response, g.catalog, g.sim)?;
    if block.is_empty() {
        return Err(PlannerError::EmptyBlock(ma.index));
    }
    Ok(block)
}

/// Runs one task under one method configuration.
pub fn run_pipeline(
    task: &TaskSpec,
    config: &PipelineConfig,
    kg: &KnowledgeGraph,
    g: Grounding,
    policy: &mut dyn Policy,
    library: Option<&MacroLibrary>,
) -> Result<RunTrace, PlannerError> {
    let state0 = WorldState::from_kg(kg);
    let task_text = match (&task.constructive_text, config.constructive_input) {
        (Some(t), true) => t.clone(),
        _ => task.goal_text.clone(),
    };
    let run = Run {
        task,
        config,
        g,
        task_text,
        rec: RecordingPolicy::new(policy),
        flushed: 0,
        records: Vec::new(),
        sim: Simulator::new(g.domain, g.catalog, state0.clone(), config.faults.clone(), config.seed),
        live_kg: kg.clone(),
        belief: state0.clone(),
        state0,
        alive: true,
        executed: 0,
        eplan: ExpandedPlan::default(),
    };
    run.run(kg, library)
}

struct Run<'a, 'p> {
    task: &'a TaskSpec,
    config: &'a PipelineConfig,
    g: Grounding<'a>,
    task_text: String,
    rec: RecordingPolicy<&'p mut dyn Policy>,
    flushed: usize,
    records: Vec<TraceRecord>,
    sim: Simulator<'a>,
    live_kg: KnowledgeGraph,
    belief: WorldState,
    state0: WorldState,
    alive: bool,
    executed: usize,
    eplan: ExpandedPlan,
}

fn canonical_list(g: &Grounding, actions: &[GroundedAction]) -> Vec<String> {
    actions.iter().map(|a| g.catalog.canonical(a)).collect()
}

impl Run<'_, '_> {
    fn push(&mut self, r: TraceRecord) {
        self.records.push(r);
    }

    /// Moves new policy exchanges into the trace.
    fn flush(&mut self) {
        let new: Vec<TranscriptRecord> = self.rec.records()[self.flushed..].to_vec();
        self.flushed += new.len();
        for t in new {
            self.records.push(TraceRecord::PolicyCall {
                call_index: t.call_index,
                kind: t.kind,
                prompt_digest: t.prompt_digest,
                response: t.response,
            });
        }
    }

    fn note(&mut self, message: impl Into<String>) {
        self.push(TraceRecord::Note { message: message.into() });
    }

    fn block_record(&mut self, index: Option<usize>, stage: &str, actions: &[GroundedAction]) {
        let actions = canonical_list(&self.g, actions);
        self.push(TraceRecord::Block {
            index,
            stage: stage.into(),
            actions,
        });
    }

    fn validation(&mut self, scope: &str, index: Option<usize>, checkpoint: &str, report: &ValidationReport) {
        self.push(TraceRecord::Validation {
            scope: scope.into(),
            index,
            checkpoint: checkpoint.into(),
            report: report.clone(),
        });
    }

    fn conditions_record(&mut self, checkpoint: &str, index: Option<usize>, mas: &[MacroAction]) {
        let sel: Vec<&MacroAction> = mas.iter().filter(|m| index.is_none_or(|i| m.index == i)).collect();
        self.push(TraceRecord::MacroConditions {
            checkpoint: checkpoint.into(),
            index,
            pre: sel.iter().map(|m| m.pre.clone()).collect(),
            post: sel.iter().map(|m| m.post.clone()).collect(),
        });
    }

    fn retrieve(&mut self, kg: &KnowledgeGraph) -> Result<RetrievedContext, PlannerError> {
        let retrieval = self.config.method.retrieval();
        let (instances, mut warnings) = if retrieval {
            let classes = object_classes(kg);
            let text = prompt(
                RequestKind::SelectObjects,
                &[("task", &self.task_text), ("classes", &classes.join("\n"))],
            );
            let response = self.rec.complete(&PolicyRequest {
                kind: RequestKind::SelectObjects,
                task_id: self.task.id.clone(),
                macro_index: None,
                prompt: text,
            })?;
            self.flush();
            let mut selected = parse_selected_classes(&response, &classes);
            let mut warnings = Vec::new();
            if selected.is_empty() {
                warnings.push("object selection returned no known class; using lexical selection".to_string());
                selected = select_objects_lexical(&self.task_text, &classes, self.g.sim)?;
            }
            let (inst, w) = resolve_instances(&selected, kg, self.g.sim)?;
            warnings.extend(w);
            (inst, warnings)
        } else {
            (kg.instances(), Vec::new())
        };
        let mut ctx = retrieve_context(kg, &instances)?;
        warnings.append(&mut ctx.warnings);
        ctx.warnings = warnings.clone();
        self.push(TraceRecord::Context {
            retrieval,
            objects: instances,
            warnings,
        });
        Ok(ctx)
    }

    /// Executes a block while the run is alive; returns whether every step
    /// of the block succeeded.
    fn execute(&mut self, block: &[GroundedAction]) -> bool {
        if !self.alive {
            return false;
        }
        for a in block {
            let step = self.sim.steps_taken();
            let action = self.g.catalog.canonical(a);
            let Ok(MonitoredStep {
                expected,
                outcome,
                alignment,
                success,
            }) = self.sim.monitored_step(&self.belief, a)
            else {
                self.alive = false;
                self.push(TraceRecord::Execution {
                    step,
                    action,
                    success: false,
                    fault: None,
                    missing: vec![],
                    unexpected: vec![],
                    auditory: None,
                    event: None,
                });
                return false;
            };
            let (missing, unexpected) = (alignment.missing, alignment.unexpected);
            let event = if success {
                self.live_kg
                    .record_event(&a.name, &a.args, &outcome.changed, outcome.auditory.as_deref())
                    .ok()
            } else {
                None
            };
            self.push(TraceRecord::Execution {
                step,
                action,
                success,
                fault: outcome.fault,
                missing,
                unexpected,
                auditory: outcome.auditory.clone(),
                event,
            });
            if !success {
                self.alive = false;
                return false;
            }
            self.belief = expected.expect("aligned steps have an expected state");
            self.executed += 1;
        }
        !block.is_empty()
    }

    fn history(mas: &[MacroAction], blocks: &[Vec<String>]) -> String {
        let mut s = String::new();
        for (m, b) in mas.iter().zip(blocks) {
            let _ = writeln!(s, "Subtask {} ({}):", m.index + 1, m.description);
            for a in b {
                let _ = writeln!(s, "  {a}");
            }
        }
        if s.is_empty() {
            s.push_str("(none)\n");
        }
        s
    }

    fn run(mut self, kg: &KnowledgeGraph, library: Option<&MacroLibrary>) -> Result<RunTrace, PlannerError> {
        let (h, v, _) = self.config.method.flags();
        self.push(TraceRecord::Header {
            task: self.task.id.clone(),
            method: self.config.method,
            seed: self.config.seed,
            task_text: self.task_text.clone(),
            faults: self.config.faults.clone(),
        });
        let ctx = self.retrieve(kg)?;
        let context = ctx.describe();
        let mut macros = Vec::new();
        let mut macro_flags = None;
        let mut block_flags = None;
        let mut candidates = Vec::new();
        if h {
            let (mas, flags, blocks) = self.hierarchical(&context, library)?;
            macro_flags = flags;
            block_flags = blocks;
            macros = mas;
        } else {
            self.direct(&context)?;
        }
        let final_verification = if v {
            let report = verify_plan(&self.eplan.actions, &self.state0, self.g.domain, self.g.catalog);
            self.validation("eplan", None, "final", &report);
            Some((report.verified_steps, report.plan_length))
        } else {
            None
        };
        let execution_failed = !self.alive;
        self.push(TraceRecord::EPlan {
            actions: canonical_list(&self.g, &self.eplan.actions),
            provenance: self.eplan.provenance.clone(),
        });
        let facts = RunFacts {
            task: self.task.id.clone(),
            method: self.config.method.name().to_string(),
            complexity: self.task.complexity,
            ground_truths: self.task.ground_truths.clone(),
            eplan: self.eplan.actions.clone(),
            executed: self.executed,
            execution_failed,
            final_verification,
            macro_verified: macro_flags,
            block_verified: block_flags,
        };
        self.push(TraceRecord::Facts(facts.clone()));
        let success = !execution_failed && self.executed == self.eplan.len() && !self.eplan.is_empty();
        if success && h {
            for m in &macros {
                let block: Vec<GroundedAction> = self
                    .eplan
                    .actions
                    .iter()
                    .zip(&self.eplan.provenance)
                    .filter(|(_, &p)| p == m.index)
                    .map(|(a, _)| a.clone())
                    .collect();
                candidates.push(LibraryEntry {
                    id: 0,
                    description: m.description.clone(),
                    pre: m.pre.clone(),
                    post: m.post.clone(),
                    block: canonical_list(&self.g, &block),
                    agent: "single-arm".into(),
                    success: true,
                    cluster: None,
                });
            }
        }
        Ok(RunTrace {
            records: self.records,
            facts,
            macros,
            eplan: self.eplan,
            transcript: self.rec.into_records(),
            library_candidates: candidates,
        })
    }

    #[allow(clippy::type_complexity)]
    fn hierarchical(
        &mut self,
        context: &str,
        library: Option<&MacroLibrary>,
    ) -> Result<(Vec<MacroAction>, Option<(Vec<bool>, Vec<bool>)>, Option<(Vec<bool>, Vec<bool>)>), PlannerError> {
        let v = self.config.method.verification();
        let task_id = self.task.id.clone();
        let task_text = self.task_text.clone();
        let g = self.g;
        let limits = self.config.limits;
        let mut mas = match generate_macro_plan(&task_id, &task_text, context, &mut self.rec) {
            Ok(m) => m,
            Err(PlannerError::DegeneratePlan) => {
                self.flush();
                self.push(TraceRecord::MacroPlan { descriptions: vec![] });
                self.note("degenerate macro plan: the policy returned no subtasks");
                let empty = v.then(|| (Vec::new(), Vec::new()));
                return Ok((Vec::new(), empty.clone(), empty));
            }
            Err(e) => return Err(e),
        };
        self.flush();
        self.push(TraceRecord::MacroPlan {
            descriptions: mas.iter().map(|m| m.description.clone()).collect(),
        });
        let mut macro_flags = None;
        if v {
            generate_macro_conditions(&mut mas, &task_id, &task_text, context, &g, &mut self.rec)?;
            self.flush();
            self.conditions_record("generated", None, &mas);
            let before = verify_macro_plan(&mas, &self.state0, g.domain);
            self.push(TraceRecord::MacroVerification {
                checkpoint: "before".into(),
                verification: before.clone(),
            });
            let req = ConditionRequest {
                task_id: &task_id,
                task_text: &task_text,
                context,
            };
            let (after, attempts) =
                correct_macro_conditions(&mut mas, &self.state0, &g, &mut self.rec, &req, limits.macro_condition_retries)?;
            self.flush();
            self.push(TraceRecord::ConditionCorrection { attempts });
            self.conditions_record("corrected", None, &mas);
            self.push(TraceRecord::MacroVerification {
                checkpoint: "after".into(),
                verification: after.clone(),
            });
            for (m, (&b, &a)) in mas.iter_mut().zip(before.verified.iter().zip(&after.verified)) {
                m.verified_before = Some(b);
                m.verified_after = Some(a);
                m.flagged = !a;
            }
            let flagged: Vec<String> = mas.iter().filter(|m| m.flagged).map(|m| (m.index + 1).to_string()).collect();
            if !flagged.is_empty() {
                self.note(format!("macro conditions still unverified for subtasks {}; expanding anyway", flagged.join(", ")));
            }
            macro_flags = Some((before.verified, after.verified));
        }

        let mut aabv_before = Vec::new();
        let mut aabv_after = Vec::new();
        let mut planned: Vec<Vec<String>> = Vec::new();
        let mut start = self.state0.clone();
        for i in 0..mas.len() {
            let history = Self::history(&mas[..i], &planned);
            let reused = match (library, self.config.library_min_sim) {
                (Some(lib), Some(min)) => lib
                    .lookup(&mas[i].description, min, g.sim)
                    .ok()
                    .flatten()
                    .map(|e| e.block.iter().filter_map(|c| g.catalog.by_canonical(c).cloned()).collect::<Vec<_>>())
                    .filter(|b| !b.is_empty()),
                _ => None,
            };
            let raw = match reused {
                Some(b) => {
                    self.block_record(Some(i), "library", &b);
                    b
                }
                None => match expand_macro(&mas[i], &mas, &task_id, &task_text, context, &history, &g, &mut self.rec) {
                    Ok(b) => {
                        self.flush();
                        self.block_record(Some(i), "raw", &b);
                        b
                    }
                    Err(PlannerError::EmptyBlock(_)) => {
                        self.flush();
                        self.block_record(Some(i), "raw", &[]);
                        self.note(format!("empty block for subtask {}", i + 1));
                        Vec::new()
                    }
                    Err(e) => return Err(e),
                },
            };
            let block = if v {
                let report = verify_plan(&raw, &start, g.domain, g.catalog);
                self.validation("block", Some(i), "before", &report);
                aabv_before.push(!raw.is_empty() && report.valid);
                let mut fixed = heuristic_correct(&raw, &start, g.domain, g.catalog);
                fixed.truncate(limits.max_block_len);
                self.block_record(Some(i), "heuristic", &fixed);
                let req = BlockRequest {
                    task_id: &task_id,
                    macro_index: Some(i),
                    subtask: &mas[i].description,
                    history: &history,
                };
                let corr = correct_aa_block(fixed, &start, &g, &mut self.rec, &req, &limits)?;
                self.flush();
                self.push(TraceRecord::BlockCorrection {
                    index: Some(i),
                    valid: corr.valid,
                    exhausted: corr.exhausted,
                    attempts: corr.attempts.clone(),
                });
                self.block_record(Some(i), "corrected", &corr.block);
                self.validation("block", Some(i), "after", &corr.report);
                aabv_after.push(!corr.block.is_empty() && corr.valid);
                start = corr.report.final_state.clone();
                corr.block
            } else {
                raw
            };
            let ok = self.execute(&block);
            if ok && v {
                self.refine(&mut mas, i)?;
            }
            planned.push(canonical_list(&g, &block));
            self.eplan.push_block(i, &block);
        }
        let block_flags = v.then_some((aabv_before, aabv_after));
        Ok((mas, macro_flags, block_flags))
    }

    /// Re-derives one macro action's conditions after its block executed.
    fn refine(&mut self, mas: &mut [MacroAction], i: usize) -> Result<(), PlannerError> {
        let observed: String = self
            .sim
            .observe()
            .iter()
            .map(|t| format!("{} {} {}\n", t.subject, t.predicate, t.object))
            .collect();
        let index = (i + 1).to_string();
        let conditions = format!("{} pre: {}\n{} post: {}\n", i + 1, mas[i].pre, i + 1, mas[i].post);
        let response = self.rec.complete(&PolicyRequest {
            kind: RequestKind::RefineConditions,
            task_id: self.task.id.clone(),
            macro_index: Some(i),
            prompt: prompt(
                RequestKind::RefineConditions,
                &[
                    ("index", &index),
                    ("subtask", &mas[i].description),
                    ("conditions", &conditions),
                    ("observed", &observed),
                ],
            ),
        })?;
        self.flush();
        if let Some((pre, post)) = parse_condition_lines(&response).remove(&i) {
            if let Some(p) = pre {
                mas[i].pre = p;
            }
            if let Some(p) = post {
                mas[i].post = p;
            }
        }
        self.conditions_record("refined", Some(i), mas);
        Ok(())
    }

    /// Non-hierarchical methods: one expansion of the whole task.
    fn direct(&mut self, context: &str) -> Result<(), PlannerError> {
        let v = self.config.method.verification();
        let g = self.g;
        let limits = self.config.limits;
        let response = self.rec.complete(&PolicyRequest {
            kind: RequestKind::ExpandTask,
            task_id: self.task.id.clone(),
            macro_index: None,
            prompt: prompt(
                RequestKind::ExpandTask,
                &[
                    ("action_schemas", &render_action_schemas(&g)),
                    ("context", context),
                    ("task", &self.task_text),
                ],
            ),
        })?;
        self.flush();
        let raw = map_response(&response, g.catalog, g.sim)?;
        self.block_record(None, "raw", &raw);
        if raw.is_empty() {
            self.note("empty plan: the policy returned no actions");
        }
        let block = if v {
            let mut fixed = heuristic_correct(&raw, &self.state0, g.domain, g.catalog);
            fixed.truncate(limits.max_block_len);
            self.block_record(None, "heuristic", &fixed);
            let task_id = self.task.id.clone();
            let task_text = self.task_text.clone();
            let req = BlockRequest {
                task_id: &task_id,
                macro_index: None,
                subtask: &task_text,
                history: "(none)\n",
            };
            let state0 = self.state0.clone();
            let corr = correct_aa_block(fixed, &state0, &g, &mut self.rec, &req, &limits)?;
            self.flush();
            self.push(TraceRecord::BlockCorrection {
                index: None,
                valid: corr.valid,
                exhausted: corr.exhausted,
                attempts: corr.attempts.clone(),
            });
            self.block_record(None, "corrected", &corr.block);
            corr.block
        } else {
            raw
        };
        self.execute(&block);
        self.eplan.push_block(0, &block);
        Ok(())
    }
}
