//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed. Everything runs offline against fixtures.

mod common;
#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::distributions::{Distribution, WeightedIndex};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use vispipe::config::generation_config;
use vispipe::io::load_corpus;
use vispipe::llm::{BackendConfig, LlmClient, LlmError, ScriptedBackend};
use vispipe::planner::{plan, PlanOptions};
use vispipe::retriever::timed_retrieve;
use vispipe::service::{CrashHook, CrashPoint, CreateSession, EvaluateRequest, ServiceParts, SessionService, SessionStore};
use vispipe::Error;
use vispipe_core::diff::correction_cost;
use vispipe_core::plan::{tier_of, PLANNING_TEMPLATE, validate_plan, PipelineNode, PipelinePlan, WeightTier};
use vispipe_core::retrieve::{retrieve, DEFAULT_K};
use vispipe_core::static_check::StaticReport;
use vispipe_core::{Corpus, CorpusEntry, Session, WeightMode};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("retrieval latency", retrieval_latency),
        ("correction cost semantics", correction_cost_semantics),
        ("retrieval oracle equivalence", oracle_equivalence),
        ("weight mode ranking invariance", weight_mode_invariance),
        ("lcs identity and metric properties", lcs_metric),
        ("plan schema conformance", plan_schema),
        ("end-to-end offline run", end_to_end),
        ("session crash consistency", crash_consistency),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap()
}

fn module(i: usize) -> String {
    format!("vtkSynth{i:02}")
}

fn synthetic_corpus(rng: &mut StdRng, entries: usize, universe: usize) -> Corpus {
    let entries = (0..entries)
        .map(|i| {
            let n = rng.gen_range(0..=8);
            let code: String = (0..n)
                .map(|_| format!("const o = vtk.Synthetic.{}.newInstance();\n", module(rng.gen_range(0..universe))))
                .collect();
            CorpusEntry::from_parts(&format!("entry{i:03}"), code, format!("synthetic {i}"), None).unwrap()
        })
        .collect();
    Corpus::new(entries).unwrap()
}

fn synthetic_plan(rng: &mut StdRng, nodes: usize, universe: usize) -> PipelinePlan {
    PipelinePlan {
        query: "synthetic".into(),
        nodes: (0..nodes)
            .map(|i| PipelineNode {
                phase: format!("Phase {i}"),
                name: format!("node{i}"),
                modules: (0..rng.gen_range(1..=4)).map(|_| module(rng.gen_range(0..universe))).collect(),
                weight: rng.gen_range(1..=10),
                description: String::new(),
            })
            .collect(),
    }
}

fn retrieval_latency() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(1);
    let corpus = synthetic_corpus(&mut rng, 30, 40);
    let plan = synthetic_plan(&mut rng, 5, 40);
    let mut samples: Vec<Duration> = (0..100)
        .map(|_| timed_retrieve(&corpus, &plan, DEFAULT_K, WeightMode::Raw, &BTreeSet::new()).unwrap().1)
        .collect();
    samples.sort();
    let median = samples[50];
    ensure!(median < Duration::from_millis(10), "median {median:?} is not under 10 ms");
    Ok(format!("median {:.1} us over 100 runs, max {:.1} us", median.as_secs_f64() * 1e6, samples[99].as_secs_f64() * 1e6))
}

fn correction_cost_semantics() -> Result<String, String> {
    let a = common::read("docs/ten_lines_a.txt");
    let b = common::read("docs/ten_lines_b.txt");
    let one = correction_cost(&a, &b);
    ensure!((one.added, one.deleted, one.cost) == (1, 1, 2), "one-line change gave {one:?}");
    let same = correction_cost(&a, &a);
    ensure!((same.added, same.deleted, same.cost) == (0, 0, 0), "identical files gave {same:?}");
    Ok("one-line change: added 1, deleted 1, cost 2; identical: 0".into())
}

struct Instance {
    corpus: Corpus,
    plan: PipelinePlan,
    k: usize,
}

fn instances() -> Vec<Instance> {
    let mut rng = StdRng::seed_from_u64(3);
    (0..1000)
        .map(|_| {
            let universe = rng.gen_range(4..40);
            let (entries, nodes) = (rng.gen_range(1..=50), rng.gen_range(1..=8));
            let corpus = synthetic_corpus(&mut rng, entries, universe);
            let plan = synthetic_plan(&mut rng, nodes, universe + 4);
            Instance { corpus, plan, k: rng.gen_range(1..=10) }
        })
        .collect()
}

fn oracle_equivalence() -> Result<String, String> {
    let started = Instant::now();
    let mut nonempty = 0;
    for (n, inst) in instances().iter().enumerate() {
        for normalized in [false, true] {
            let mode = if normalized { WeightMode::Normalized } else { WeightMode::Raw };
            let got = retrieve(&inst.corpus, &inst.plan, inst.k, mode).map_err(|e| e.to_string())?;
            let got: Vec<_> = got
                .candidates
                .iter()
                .map(|c| (c.entry_id.clone(), c.score, c.node_hits.iter().map(|h| (h.node, h.hits)).collect::<Vec<_>>()))
                .collect();
            let want = oracle::brute_force_retrieve(&inst.corpus, &inst.plan, inst.k, normalized, &[]);
            ensure!(got == want, "instance {n} ({mode:?}) differs:\n got {got:?}\nwant {want:?}");
            nonempty += usize::from(!got.is_empty());
        }
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("1000 instances x 2 modes identical ({nonempty} nonempty results)"))
}

fn weight_mode_invariance() -> Result<String, String> {
    let mut worst = 0.0f64;
    for (n, inst) in instances().iter().enumerate() {
        let raw = retrieve(&inst.corpus, &inst.plan, inst.k, WeightMode::Raw).map_err(|e| e.to_string())?;
        let norm = retrieve(&inst.corpus, &inst.plan, inst.k, WeightMode::Normalized).map_err(|e| e.to_string())?;
        ensure!(
            raw.ids().collect::<Vec<_>>() == norm.ids().collect::<Vec<_>>(),
            "instance {n}: orderings differ"
        );
        let total: i64 = inst.plan.nodes.iter().map(|x| x.weight).sum();
        for (a, b) in raw.candidates.iter().zip(&norm.candidates) {
            let rel = (a.score - b.score * total as f64).abs() / a.score.abs();
            worst = worst.max(rel);
            ensure!(rel <= 1e-9, "instance {n}: {} raw {} vs normalized {} x {total}", a.entry_id, a.score, b.score);
        }
    }
    Ok(format!("orderings identical, worst relative error {worst:.1e}"))
}

fn random_lines(rng: &mut StdRng) -> Vec<String> {
    let len = rng.gen_range(0..=200);
    let alphabet = rng.gen_range(2..12);
    (0..len).map(|_| format!("line {}", rng.gen_range(0..alphabet))).collect()
}

fn lcs_metric() -> Result<String, String> {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(5);
    for n in 0..1000 {
        let (a, b, c) = (random_lines(&mut rng), random_lines(&mut rng), random_lines(&mut rng));
        let text = |v: &Vec<String>| v.iter().map(|l| format!("{l}\n")).collect::<String>();
        let (ta, tb, tc) = (text(&a), text(&b), text(&c));
        let ab = correction_cost(&ta, &tb);
        let lcs = oracle::lcs_table(&a, &b);
        ensure!(ab.cost == a.len() + b.len() - 2 * lcs, "case {n}: cost {} but oracle lcs {lcs}", ab.cost);
        ensure!(ab.lcs_length == lcs, "case {n}: lcs {} vs oracle {lcs}", ab.lcs_length);
        ensure!(ab.cost == correction_cost(&tb, &ta).cost, "case {n}: not symmetric");
        let (bc, ac) = (correction_cost(&tb, &tc).cost, correction_cost(&ta, &tc).cost);
        ensure!(ac <= ab.cost + bc, "case {n}: triangle inequality fails {ac} > {} + {bc}", ab.cost);
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok("1000 triples: identity exact, symmetric, triangle inequality holds".into())
}

fn plan_schema() -> Result<String, String> {
    let query = common::read("queries/rotor.txt");
    let p = runtime()
        .block_on(plan(query.trim(), &common::fixture_client(), PlanOptions::default()))
        .map_err(|e| e.to_string())?;
    let weights: Vec<i64> = p.nodes.iter().map(|n| n.weight).collect();
    ensure!(weights == [3, 10, 6, 2, 2], "weights {weights:?}");
    let violations = validate_plan(&p);
    ensure!(violations.is_empty(), "violations {violations:?}");
    for w in -2..=13 {
        let containing = WeightTier::ALL.iter().filter(|t| t.range().contains(&w)).count();
        ensure!(containing == usize::from((1..=10).contains(&w)), "weight {w} lies in {containing} tiers");
        ensure!(tier_of(w).is_ok() == (1..=10).contains(&w), "tier_of({w}) disagrees");
    }
    Ok("5 nodes, weights (3,10,6,2,2), zero violations, tiers partition [1,10]".into())
}

fn end_to_end() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let csv_path = tmp.path().join("bench.csv");
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_vispipe"))
        .current_dir(tmp.path())
        .env_remove("VISPIPE_BACKEND")
        .args(["bench", "--cases"])
        .arg(common::fixture("cases"))
        .arg("--corpus")
        .arg(common::fixture("corpus"))
        .arg("--backend")
        .arg(common::fixture("backend/fixture.json"))
        .arg("--corrected")
        .arg(common::fixture("corrected"))
        .arg("-o")
        .arg(&csv_path)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure!(out.status.success(), "bench failed: {}", String::from_utf8_lossy(&out.stderr));
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");

    let mut reader = csv::Reader::from_path(&csv_path).map_err(|e| e.to_string())?;
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    ensure!(rows.len() == 8, "{} rows", rows.len());
    let pairs: BTreeSet<(String, String)> = rows.iter().map(|r| (r[0].to_string(), r[1].to_string())).collect();
    ensure!(pairs.len() == 8, "case/arm pairs are not unique");
    let mut costs = Vec::new();
    for r in &rows {
        let cost: u64 = r[2].parse().map_err(|_| format!("cost `{}` is not a nonnegative integer", &r[2]))?;
        costs.push(format!("{}/{}={cost}", &r[0], &r[1]));
    }
    let mirror: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("bench.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    for rec in mirror["records"].as_array().unwrap().iter().filter(|r| r["config"] == "rag") {
        let report: StaticReport = serde_json::from_value(rec["static_report"].clone()).map_err(|e| e.to_string())?;
        ensure!(report.document_ok(), "{} rag artifact fails document/CDN checks: {report:?}", rec["case_id"]);
    }
    Ok(format!("8 rows in {:.2}s: {}", elapsed.as_secs_f64(), costs.join(" ")))
}

const NO_CRASH: u8 = 0;

/// Relative frequency of operations 0..=9 in the crash run, skewed towards
/// plan, retrieve and reject so most sequences reach the later stages.
static OP_MIX: std::sync::LazyLock<WeightedIndex<u32>> =
    std::sync::LazyLock::new(|| WeightedIndex::new([2, 3, 5, 5, 5, 2, 2, 2, 1, 1]).unwrap());

fn point_code(p: CrashPoint) -> u8 {
    match p {
        CrashPoint::BeforeTempWrite => 1,
        CrashPoint::AfterTempWrite => 2,
        CrashPoint::AfterRename => 3,
    }
}

/// Scripted model for the crash run: plans from the fixture rotor plan with
/// random weights, documents that pass the artifact checks, occasional outages.
fn crash_backend(seed: u64) -> LlmClient {
    let rotor: PipelinePlan = serde_json::from_str(&common::read("plans/rotor.json")).unwrap();
    let rng = Mutex::new(StdRng::seed_from_u64(seed));
    let html = common::read("corrected/slice.html");
    let script = ScriptedBackend::new(move |req| {
        let mut rng = rng.lock().unwrap();
        if rng.gen_bool(0.05) {
            return Err(LlmError::Transport { status: Some(503), message: "unavailable".into() });
        }
        if req.messages[0].content == PLANNING_TEMPLATE.trim_end() {
            let mut nodes = rotor.nodes.clone();
            for n in &mut nodes {
                n.weight = rng.gen_range(1..=10);
            }
            return Ok(format!("```json\n{}\n```", serde_json::json!({ "nodes": nodes })));
        }
        Ok(format!("```html\n{html}```"))
    });
    LlmClient::new(Arc::new(script), "crash-model")
}

fn crash_service(dir: &std::path::Path, corpus: &Arc<Corpus>, armed: &Arc<AtomicU8>, seed: u64) -> SessionService {
    let flag = armed.clone();
    let hook: CrashHook = Arc::new(move |p: CrashPoint, _: &str| flag.compare_exchange(point_code(p), NO_CRASH, Ordering::SeqCst, Ordering::SeqCst).is_ok());
    let store = SessionStore::open(dir).unwrap().with_crash_hook(hook);
    let llm = crash_backend(seed);
    let mut parts = ServiceParts::new(store, Corpus::clone(corpus), llm);
    parts.corpus = corpus.clone();
    parts.generation = generation_config(&BackendConfig::fixture("crash-model", dir), None, None, true);
    SessionService::new(parts)
}

fn crash_consistency() -> Result<String, String> {
    let rt = runtime();
    let corpus = Arc::new(load_corpus(&common::fixture("corpus")).map_err(|e| e.to_string())?);
    let mut rng = StdRng::seed_from_u64(8);
    let (mut crashes, mut ops, mut retrieves_after_rejection) = (0, 0, 0);
    for seq in 0..500u64 {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let armed = Arc::new(AtomicU8::new(NO_CRASH));
        let mut svc = crash_service(tmp.path(), &corpus, &armed, seq);
        // last state known to be durable, per session
        let mut model: BTreeMap<String, Session> = BTreeMap::new();
        let mut rejections_pending: BTreeSet<String> = BTreeSet::new();
        for _ in 0..rng.gen_range(4..30) {
            ops += 1;
            let crash = if rng.gen_bool(0.2) {
                let p = *[CrashPoint::BeforeTempWrite, CrashPoint::AfterTempWrite, CrashPoint::AfterRename].choose(&mut rng).unwrap();
                armed.store(point_code(p), Ordering::SeqCst);
                Some(p)
            } else {
                armed.store(NO_CRASH, Ordering::SeqCst);
                None
            };
            let target = model.keys().cloned().collect::<Vec<_>>().choose(&mut rng).cloned();
            let op = if target.is_some() { OP_MIX.sample(&mut rng) } else { 0 };
            let result: Result<Option<Session>, Error> = rt.block_on(async {
                match (op, &target) {
                    (0, _) | (_, None) => svc
                        .create_session(CreateSession { query: "slice the rotor".into(), case_id: None })
                        .await
                        .map(Some),
                    (1, Some(id)) => svc.run_plan(id).await.map(Some),
                    (2 | 3, Some(id)) => svc.run_retrieve(id, Some(rng.gen_range(1..=5))).await.map(Some),
                    (4, Some(id)) => {
                        let seen: Vec<String> = model[id].seen_ids.iter().cloned().collect();
                        let n = rng.gen_range(0..=seen.len());
                        let mut pick: BTreeSet<String> = seen.choose_multiple(&mut rng, n).cloned().collect();
                        if rng.gen_bool(0.1) {
                            pick.insert("never-seen".into());
                        }
                        svc.set_rejections(id, pick).await.map(Some)
                    }
                    (5, Some(id)) => svc.run_generate(id).await.map(Some),
                    (6, Some(id)) => svc.submit_correction(id, common::read("corrected/slice.html")).await.map(Some),
                    (7, Some(id)) => svc.run_evaluate(id, EvaluateRequest::default()).await.map(Some),
                    (8, Some(id)) => svc.delete(id).await.map(|_| None),
                    (_, Some(id)) => Ok(Some(svc.get(id)?)),
                }
            });
            // an armed point that was never reached means the operation did not save
            let fired = crash.is_some() && armed.swap(NO_CRASH, Ordering::SeqCst) == NO_CRASH;
            match &result {
                Ok(Some(s)) => {
                    if op == 4 {
                        rejections_pending.insert(s.id.clone());
                    }
                    if (op == 2 || op == 3) && rejections_pending.contains(&s.id) && !s.rejected_ids.is_empty() {
                        retrieves_after_rejection += 1;
                    }
                    if op == 2 || op == 3 {
                        let r = s.retrieval.as_ref().unwrap();
                        ensure!(r.ids().all(|id| !s.rejected_ids.contains(id)), "seq {seq}: retrieval returned a rejected id");
                    }
                    if op == 5 {
                        let a = s.artifact.as_ref().unwrap();
                        ensure!(a.context_ids.iter().all(|id| !s.rejected_ids.contains(id)), "seq {seq}: rejected id used as evidence");
                    }
                    model.insert(s.id.clone(), s.clone());
                }
                Ok(None) => {
                    model.remove(target.as_deref().unwrap());
                }
                Err(_) => {}
            }
            if fired {
                crashes += 1;
                // abrupt stop: forget all in-memory state and reopen the store
                drop(svc);
                svc = crash_service(tmp.path(), &corpus, &armed, seq * 1000 + ops as u64);
                let on_disk = svc.list().map_err(|e| format!("seq {seq}: reload failed: {e}"))?;
                let leftovers = std::fs::read_dir(tmp.path())
                    .unwrap()
                    .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".tmp"))
                    .count();
                ensure!(leftovers == 0, "seq {seq}: temp files survived a reopen");
                let on_disk: BTreeMap<String, Session> = on_disk.into_iter().map(|s| (s.id.clone(), s)).collect();
                for (id, s) in &on_disk {
                    if let (CrashPoint::BeforeTempWrite | CrashPoint::AfterTempWrite, Some(prev)) = (crash.unwrap(), model.get(id)) {
                        ensure!(s == prev, "seq {seq}: {id} changed although the write was interrupted");
                    }
                }
                model = on_disk;
            }
            for s in svc.list().map_err(|e| format!("seq {seq}: {e}"))? {
                let v = s.invariant_violations();
                ensure!(v.is_empty(), "seq {seq}: {v:?}");
                if let Some(prev) = model.get(&s.id) {
                    ensure!(&s == prev, "seq {seq}: {} on disk differs from the last acknowledged state", s.id);
                } else {
                    return Err(format!("seq {seq}: unexpected session {} on disk", s.id));
                }
            }
        }
    }
    ensure!(crashes > 100, "only {crashes} crashes were injected");
    Ok(format!("500 sequences, {ops} operations, {crashes} injected stops, {retrieves_after_rejection} retrievals with active rejections"))
}
