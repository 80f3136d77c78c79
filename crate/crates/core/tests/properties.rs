mod oracle;

use std::collections::BTreeSet;

use proptest::prelude::*;
use vispipe_core::diff::{line_diff, stats_for, Edit};
use vispipe_core::generate::{assemble_prompt, extract_html, GenerationConfig};
use vispipe_core::plan::{normalize_weights, PipelineNode, PipelinePlan};
use vispipe_core::retrieve::{retrieve, retrieve_excluding, WeightMode};
use vispipe_core::{extract_modules, is_module_name, Corpus, CorpusEntry};

fn module(i: usize) -> String {
    format!("vtkMod{i}")
}

fn corpus_from(sets: &[BTreeSet<usize>]) -> Corpus {
    let entries = sets
        .iter()
        .enumerate()
        .map(|(i, mods)| {
            let code: String = mods
                .iter()
                .map(|m| format!("const x = vtk.Area.{}.newInstance();\n", module(*m)))
                .collect();
            CorpusEntry::from_parts(&format!("e{i:02}"), code, String::new(), None).unwrap()
        })
        .collect();
    Corpus::new(entries).unwrap()
}

fn plan_from(nodes: &[(Vec<usize>, i64)]) -> PipelinePlan {
    PipelinePlan {
        query: "q".into(),
        nodes: nodes
            .iter()
            .map(|(mods, w)| PipelineNode {
                phase: "P".into(),
                name: "n".into(),
                modules: mods.iter().map(|m| module(*m)).collect(),
                weight: *w,
                description: String::new(),
            })
            .collect(),
    }
}

fn instance() -> impl Strategy<Value = (Vec<BTreeSet<usize>>, Vec<(Vec<usize>, i64)>, usize)> {
    (
        prop::collection::vec(prop::collection::btree_set(0usize..16, 0..6), 1..30),
        prop::collection::vec((prop::collection::vec(0usize..20, 1..5), 1i64..=10), 1..=8),
        1usize..=10,
    )
}

proptest! {
    #[test]
    fn extraction_is_duplicate_free_and_well_formed(code in ".{0,400}") {
        let mods = extract_modules(&code);
        let unique: BTreeSet<_> = mods.iter().collect();
        prop_assert_eq!(unique.len(), mods.len());
        prop_assert!(mods.iter().all(|m| is_module_name(m)));
    }

    #[test]
    fn extraction_on_module_soup(parts in prop::collection::vec(
        prop_oneof![
            Just("vtk.Rendering.Core.vtkActor".to_string()),
            Just("import vtkPlane from 'x';\n".to_string()),
            Just("vtk.Filters.vtkCutter.newInstance()".to_string()),
            Just(" vtkNope ".to_string()),
            Just(".".to_string()),
            Just("\n".to_string()),
            "[a-zA-Z. ]{0,12}",
        ], 0..20)) {
        let code: String = parts.concat();
        let once = extract_modules(&code);
        // a statement boundary keeps the copies from forming one member chain
        let doubled = extract_modules(&format!("{code}\n;\n{code}"));
        let a: BTreeSet<_> = once.iter().collect();
        let b: BTreeSet<_> = doubled.iter().collect();
        prop_assert_eq!(a, b);
        prop_assert!(once.iter().all(|m| is_module_name(m)));
    }

    #[test]
    fn index_round_trip((sets, _, _) in instance()) {
        let corpus = corpus_from(&sets);
        for e in corpus.entries() {
            for m in &e.modules {
                prop_assert!(corpus.lookup(m).contains(e.id.as_str()));
            }
        }
        for (m, ids) in corpus.module_index() {
            prop_assert!(!ids.is_empty());
            for id in ids {
                prop_assert!(corpus.get(id).unwrap().modules.contains(m));
            }
        }
    }

    #[test]
    fn retrieval_matches_brute_force((sets, nodes, k) in instance(), normalized in any::<bool>()) {
        let corpus = corpus_from(&sets);
        let plan = plan_from(&nodes);
        let mode = if normalized { WeightMode::Normalized } else { WeightMode::Raw };
        let got = retrieve(&corpus, &plan, k, mode).unwrap();
        let want = oracle::brute_force_retrieve(&corpus, &plan, k, normalized, &[]);
        let got: Vec<_> = got
            .candidates
            .iter()
            .map(|c| (c.entry_id.clone(), c.score, c.node_hits.iter().map(|h| (h.node, h.hits)).collect::<Vec<_>>()))
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn exclusions_match_brute_force((sets, nodes, k) in instance(), drop in prop::collection::vec(0usize..30, 0..5)) {
        let corpus = corpus_from(&sets);
        let plan = plan_from(&nodes);
        let excluded: BTreeSet<String> = drop.iter().map(|i| format!("e{i:02}")).collect();
        let got = retrieve_excluding(&corpus, &plan, k, WeightMode::Raw, &excluded).unwrap();
        let ex: Vec<String> = excluded.iter().cloned().collect();
        let want = oracle::brute_force_retrieve(&corpus, &plan, k, false, &ex);
        prop_assert_eq!(got.ids().map(String::from).collect::<Vec<_>>(), want.into_iter().map(|r| r.0).collect::<Vec<_>>());
        prop_assert!(got.ids().all(|id| !excluded.contains(id)));
    }

    #[test]
    fn scores_decompose_and_hits_are_positive((sets, nodes, k) in instance()) {
        let corpus = corpus_from(&sets);
        let plan = plan_from(&nodes);
        let r = retrieve(&corpus, &plan, k, WeightMode::Raw).unwrap();
        for c in &r.candidates {
            let recomputed: i64 = c.node_hits.iter().map(|h| h.hits as i64 * plan.nodes[h.node].weight).sum();
            prop_assert_eq!(c.score, recomputed as f64);
            prop_assert!(c.total_hits() >= 1);
        }
        prop_assert!(r.candidates.windows(2).all(|w| w[0].score > w[1].score
            || (w[0].score == w[1].score && w[0].entry_id < w[1].entry_id)));
    }

    #[test]
    fn weight_modes_rank_identically((sets, nodes, k) in instance()) {
        let corpus = corpus_from(&sets);
        let plan = plan_from(&nodes);
        let raw = retrieve(&corpus, &plan, k, WeightMode::Raw).unwrap();
        let norm = retrieve(&corpus, &plan, k, WeightMode::Normalized).unwrap();
        prop_assert_eq!(raw.ids().collect::<Vec<_>>(), norm.ids().collect::<Vec<_>>());
        let total = plan.total_weight() as f64;
        for (a, b) in raw.candidates.iter().zip(&norm.candidates) {
            prop_assert!((a.score - b.score * total).abs() <= 1e-9 * a.score.abs().max(1.0));
        }
    }

    #[test]
    fn adding_a_module_never_lowers_scores((sets, nodes, _) in instance(), extra in 0usize..20, node_pick in 0usize..8) {
        let corpus = corpus_from(&sets);
        let plan = plan_from(&nodes);
        let mut bigger = nodes.clone();
        let i = node_pick % bigger.len();
        bigger[i].0.push(extra);
        let bigger = plan_from(&bigger);
        let all = corpus.len();
        let before = retrieve(&corpus, &plan, all, WeightMode::Raw).unwrap();
        let after = retrieve(&corpus, &bigger, all, WeightMode::Raw).unwrap();
        for c in &before.candidates {
            let now = after.candidates.iter().find(|x| x.entry_id == c.entry_id).unwrap();
            prop_assert!(now.score >= c.score);
        }
    }

    #[test]
    fn normalization_preserves_order(weights in prop::collection::vec(1i64..=10, 1..10)) {
        let plan = plan_from(&weights.iter().map(|w| (vec![0], *w)).collect::<Vec<_>>());
        let n = normalize_weights(&plan);
        prop_assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for i in 0..weights.len() {
            for j in 0..weights.len() {
                if weights[i] > weights[j] {
                    prop_assert!(n[i] > n[j]);
                }
            }
        }
    }

    #[test]
    fn line_diff_is_minimal(a in prop::collection::vec(0u8..5, 0..60), b in prop::collection::vec(0u8..5, 0..60)) {
        let a: Vec<String> = a.iter().map(|x| format!("l{x}")).collect();
        let b: Vec<String> = b.iter().map(|x| format!("l{x}")).collect();
        let s = stats_for(&a, &b);
        prop_assert_eq!(s.lcs_length, oracle::lcs_table(&a, &b));
        prop_assert_eq!(s.cost, a.len() + b.len() - 2 * s.lcs_length);
        prop_assert_eq!(s.cost, stats_for(&b, &a).cost);
        // the script is a valid alignment
        let (mut i, mut j) = (0, 0);
        for e in line_diff(&a, &b) {
            match e {
                Edit::Equal { old, new } => { prop_assert_eq!((old, new), (i, j)); prop_assert_eq!(&a[old], &b[new]); i += 1; j += 1; }
                Edit::Delete { old } => { prop_assert_eq!(old, i); i += 1; }
                Edit::Insert { new } => { prop_assert_eq!(new, j); j += 1; }
            }
        }
        prop_assert_eq!((i, j), (a.len(), b.len()));
    }

    #[test]
    fn extract_html_is_idempotent(pre in "[a-z `\n]{0,30}", body in "[a-z<>/ \n`!]{0,60}", post in "[a-z `\n]{0,30}", upper in any::<bool>()) {
        let decl = if upper { "<!DOCTYPE html>" } else { "<!doctype html>" };
        let raw = format!("{pre}```html\n{decl}\n<html>{body}</html>\n```{post}");
        if let Ok(once) = extract_html(&raw) {
            prop_assert_eq!(extract_html(&once).unwrap(), once);
        }
    }

    #[test]
    fn evidence_order_matters(n in 2usize..5, rot in 1usize..4) {
        let entries: Vec<CorpusEntry> = (0..n)
            .map(|i| CorpusEntry::from_parts(&format!("e{i}"), format!("code {i}"), format!("desc {i}"), None).unwrap())
            .collect();
        let refs: Vec<&CorpusEntry> = entries.iter().collect();
        let mut rotated = refs.clone();
        rotated.rotate_left(rot % n);
        prop_assume!(rot % n != 0);
        let plan = plan_from(&[(vec![1], 5)]);
        let c = GenerationConfig::default();
        prop_assert_ne!(assemble_prompt("q", &plan, &refs, &c), assemble_prompt("q", &plan, &rotated, &c));
    }
}
