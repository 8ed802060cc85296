//! End-to-end runs with the scripted and replay policies over the shipped
//! fixtures.

mod common;

use nsplan_core::envsim::FaultConfig;
use nsplan_core::macrolib::MacroLibrary;
use nsplan_core::pddl::GroundedAction;
use nsplan_core::planner::pipeline::{expand_macro, facts_from_jsonl, generate_macro_plan};
use nsplan_core::planner::policy::{PolicyError, ReplayPolicy, TranscriptRecord};
use nsplan_core::planner::scripted::{ScriptFlaws, ScriptedPolicy};
use nsplan_core::planner::{run_pipeline, Grounding, Method, PipelineConfig, RequestKind, RunTrace, TraceRecord};
use nsplan_core::similarity::SimilarityProvider;
use nsplan_core::tasks::{self, TaskSpec};

fn run(k: &common::Kitchen, task: &TaskSpec, method: Method, flaws: ScriptFlaws, faults: FaultConfig, library: Option<&MacroLibrary>) -> RunTrace {
    let sim = SimilarityProvider::Trigram;
    let g = Grounding { domain: &k.domain, catalog: &k.catalog, sim: &sim };
    let mut policy = ScriptedPolicy::new(task, &k.domain, &k.catalog, &k.state0, flaws).unwrap();
    let config = PipelineConfig {
        method,
        faults,
        library_min_sim: library.map(|_| 0.8),
        ..Default::default()
    };
    run_pipeline(task, &config, &k.kg, g, &mut policy, library).unwrap()
}

fn count(trace: &RunTrace, pred: impl Fn(&TraceRecord) -> bool) -> usize {
    trace.records.iter().filter(|r| pred(r)).count()
}

#[test]
fn every_method_completes_every_task_with_the_expected_sparsity() {
    let k = common::kitchen();
    let started = std::time::Instant::now();
    for task in tasks::registry() {
        for m in Method::ALL {
            let t = run(&k, &task, m, ScriptFlaws::all(), FaultConfig::none(), None);
            let r = t.facts.report();
            let (h, v, _) = m.flags();
            assert_eq!(r.epv.is_some(), v, "{} {m}", task.id);
            assert_eq!(r.mpv_before.is_some() && r.mpv_after.is_some(), h && v, "{} {m}", task.id);
            assert_eq!(r.aabv_before.is_some() && r.aabv_after.is_some(), h && v, "{} {m}", task.id);
            assert_eq!(t.eplan.provenance.len(), t.eplan.actions.len());
            assert_eq!(t.facts.eplan, t.eplan.actions);
            if v {
                // The symbolic corrections repair every scripted flaw.
                assert_eq!((r.pc, r.es, r.epv), (100.0, Some(100.0), Some(100.0)), "{} {m}", task.id);
            } else {
                // Flawed drafts go out uncorrected: missing navigation
                // breaks execution early.
                assert!(r.pc < 100.0, "{} {m}", task.id);
                assert_eq!(r.es, None);
            }
            if h && v {
                assert!(r.mpv_before.unwrap() <= r.mpv_after.unwrap());
                assert!(r.aabv_before.unwrap() <= r.aabv_after.unwrap());
                assert_eq!((r.mpv_after, r.aabv_after), (Some(100.0), Some(100.0)));
            }
        }
    }
    assert!(started.elapsed().as_secs() < 60);
}

#[test]
fn llm_method_makes_one_call_and_never_verifies() {
    let k = common::kitchen();
    let task = tasks::find("T1").unwrap();
    let t = run(&k, &task, Method::Llm, ScriptFlaws::all(), FaultConfig::none(), None);
    assert_eq!(t.transcript.len(), 1);
    assert_eq!(t.transcript[0].kind, RequestKind::ExpandTask);
    let verifying = count(&t, |r| {
        matches!(
            r,
            TraceRecord::Validation { .. } | TraceRecord::MacroVerification { .. } | TraceRecord::BlockCorrection { .. } | TraceRecord::ConditionCorrection { .. }
        )
    });
    assert_eq!(verifying, 0);
    assert!(t.eplan.provenance.iter().all(|&p| p == 0));
}

#[test]
fn hr_never_validates_and_hv_sees_the_whole_graph() {
    let k = common::kitchen();
    let task = tasks::find("T3").unwrap();
    let hr = run(&k, &task, Method::Hr, ScriptFlaws::all(), FaultConfig::none(), None);
    assert_eq!(count(&hr, |r| matches!(r, TraceRecord::Validation { .. })), 0);

    let hv = run(&k, &task, Method::Hv, ScriptFlaws::all(), FaultConfig::none(), None);
    let objects = hv
        .records
        .iter()
        .find_map(|r| match r {
            TraceRecord::Context { retrieval, objects, .. } => Some((*retrieval, objects.clone())),
            _ => None,
        })
        .unwrap();
    assert_eq!(objects, (false, k.kg.instances()));
    assert!(!hv.transcript.iter().any(|c| c.kind == RequestKind::SelectObjects));

    let hvr = run(&k, &task, Method::Hvr, ScriptFlaws::all(), FaultConfig::none(), None);
    assert_eq!(hvr.transcript[0].kind, RequestKind::SelectObjects);
}

#[test]
fn block_provenance_partitions_the_expanded_plan() {
    let k = common::kitchen();
    let task = tasks::find("T5").unwrap();
    let t = run(&k, &task, Method::Hvr, ScriptFlaws::all(), FaultConfig::none(), None);
    let m = t.macros.len();
    assert!(m > 1);
    // Provenance is non-decreasing and covers 0..m.
    assert!(t.eplan.provenance.windows(2).all(|w| w[0] <= w[1]));
    let used: std::collections::BTreeSet<usize> = t.eplan.provenance.iter().copied().collect();
    assert_eq!(used, (0..m).collect());
    let final_blocks: usize = (0..m).map(|i| t.eplan.provenance.iter().filter(|&&p| p == i).count()).sum();
    assert_eq!(final_blocks, t.eplan.len());
}

#[test]
fn runs_are_deterministic_and_traces_round_trip() {
    let k = common::kitchen();
    let task = tasks::find("T9").unwrap();
    let faults = FaultConfig::parse("p=0.05").unwrap();
    let a = run(&k, &task, Method::Hvr, ScriptFlaws::all(), faults.clone(), None);
    let b = run(&k, &task, Method::Hvr, ScriptFlaws::all(), faults, None);
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    assert_eq!(facts_from_jsonl(&a.to_jsonl()).unwrap(), a.facts);
}

#[test]
fn replaying_a_recorded_run_reproduces_it() {
    let k = common::kitchen();
    let task = tasks::find("T3").unwrap();
    let recorded = run(&k, &task, Method::Hvr, ScriptFlaws::all(), FaultConfig::none(), None);
    let sim = SimilarityProvider::Trigram;
    let g = Grounding { domain: &k.domain, catalog: &k.catalog, sim: &sim };
    let mut replay = ReplayPolicy::new(recorded.transcript.clone());
    let again = run_pipeline(&task, &PipelineConfig::default(), &k.kg, g, &mut replay, None).unwrap();
    assert_eq!(again.to_jsonl(), recorded.to_jsonl());
    assert_eq!(replay.remaining(), 0);

    // A shorter transcript runs dry and says so.
    let mut short = ReplayPolicy::new(recorded.transcript[..3].to_vec());
    let err = run_pipeline(&task, &PipelineConfig::default(), &k.kg, g, &mut short, None).unwrap_err();
    assert!(err.to_string().contains("exhausted"), "{err}");
}

#[test]
fn serve_wine_macro_plan_and_expansion() {
    let k = common::kitchen();
    let task = tasks::find("T1").unwrap();
    let t = run(&k, &task, Method::Hvr, ScriptFlaws::none(), FaultConfig::none(), None);
    let descriptions: Vec<&str> = t.macros.iter().map(|m| m.description.as_str()).collect();
    assert!(descriptions.contains(&"Pick up the bottle of wine"), "{descriptions:?}");
    assert!(descriptions.contains(&"Pour wine into the cup"), "{descriptions:?}");

    let sim = SimilarityProvider::Trigram;
    let g = Grounding { domain: &k.domain, catalog: &k.catalog, sim: &sim };
    let mut policy = ScriptedPolicy::new(&task, &k.domain, &k.catalog, &k.state0, ScriptFlaws::none()).unwrap();
    let pick = t.macros.iter().find(|m| m.description == "Pick up the bottle of wine").unwrap();
    let block = expand_macro(pick, &t.macros, "T1", &task.goal_text, "", "(none)\n", &g, &mut policy).unwrap();
    assert_eq!(block, common::acts(&["navigate_to_obj(WineBottle-1)", "pick_up(WineBottle-1)"]));
}

fn one_call(kind: RequestKind, response: &str) -> ReplayPolicy {
    ReplayPolicy::new(vec![TranscriptRecord {
        call_index: 0,
        kind,
        prompt_digest: String::new(),
        response: response.into(),
    }])
}

#[test]
fn single_line_replays() {
    let k = common::kitchen();
    let mut p = one_call(RequestKind::MacroPlan, "1. Pick up the bottle of wine\n");
    let mas = generate_macro_plan("T1", "Serve wine", "", &mut p).unwrap();
    assert_eq!(mas.len(), 1);

    let sim = SimilarityProvider::Trigram;
    let g = Grounding { domain: &k.domain, catalog: &k.catalog, sim: &sim };
    let mut p = one_call(RequestKind::ExpandMacro, "pick_up(WineBottle-1)");
    let block = expand_macro(&mas[0], &mas, "T1", "Serve wine", "", "(none)\n", &g, &mut p).unwrap();
    assert_eq!(block, vec![GroundedAction::new("pick_up", ["winebottle-1"])]);

    // The wrong kind of recorded answer is a loud error.
    let mut p = one_call(RequestKind::ExpandTask, "pick_up(WineBottle-1)");
    let err = generate_macro_plan("T1", "Serve wine", "", &mut p).unwrap_err();
    assert!(matches!(err, nsplan_core::planner::PlannerError::Policy(PolicyError::Mismatch { .. })), "{err}");

    let mut p = one_call(RequestKind::MacroPlan, "\n\n");
    assert!(generate_macro_plan("T1", "Serve wine", "", &mut p).is_err());
}

#[test]
fn empty_conditions_are_flagged_and_the_run_goes_on() {
    let k = common::kitchen();
    let task = tasks::find("T1").unwrap();
    let sim = SimilarityProvider::Trigram;
    let g = Grounding { domain: &k.domain, catalog: &k.catalog, sim: &sim };
    let mut scripted = ScriptedPolicy::new(&task, &k.domain, &k.catalog, &k.state0, ScriptFlaws::none()).unwrap();
    let mut policy = nsplan_core::planner::policy::FnPolicy(|req: &nsplan_core::planner::PolicyRequest| match req.kind {
        RequestKind::MacroConditions | RequestKind::CorrectConditions | RequestKind::RefineConditions => Ok(String::new()),
        _ => nsplan_core::planner::Policy::complete(&mut scripted, req),
    });
    let config = PipelineConfig::default();
    let t = run_pipeline(&task, &config, &k.kg, g, &mut policy, None).unwrap();
    assert!(t.macros.iter().all(|m| m.flagged));
    let r = t.facts.report();
    assert_eq!((r.mpv_before, r.mpv_after), (Some(0.0), Some(0.0)));
    // Expansion proceeds regardless of the flags.
    assert_eq!(r.pc, 100.0);
}

#[test]
fn faults_stop_execution_and_withhold_library_candidates() {
    let k = common::kitchen();
    let task = tasks::find("T3").unwrap();
    let t = run(&k, &task, Method::Hvr, ScriptFlaws::none(), FaultConfig::parse("drop@4").unwrap(), None);
    assert!(!t.succeeded());
    assert_eq!(t.facts.executed, 4);
    assert!(t.library_candidates.is_empty());
    let r = t.facts.report();
    assert_eq!(r.pc, 100.0);
    assert_eq!(r.es, Some(25.0));
    assert_eq!(count(&t, |r| matches!(r, TraceRecord::Execution { .. })), 5);
}

#[test]
fn stored_blocks_are_reused() {
    let k = common::kitchen();
    let task = tasks::find("T1").unwrap();
    let first = run(&k, &task, Method::Hvr, ScriptFlaws::all(), FaultConfig::none(), None);
    assert!(first.succeeded());
    assert_eq!(first.library_candidates.len(), first.macros.len());
    let mut lib = MacroLibrary::new();
    for e in first.library_candidates.clone() {
        lib.store(e).unwrap();
    }
    let second = run(&k, &task, Method::Hvr, ScriptFlaws::all(), FaultConfig::none(), Some(&lib));
    let reused = count(&second, |r| matches!(r, TraceRecord::Block { stage, .. } if stage == "library"));
    assert_eq!(reused, first.macros.len());
    assert!(!second.transcript.iter().any(|c| c.kind == RequestKind::ExpandMacro));
    assert_eq!(second.eplan.actions, first.eplan.actions);
}
