use danneal::commands::{run_numpart, run_partition, GraphSource, NumberSource, PartitionSettings};
use danneal::datasets::{ieee118, ieee33, karate_club, Builtin};
use danneal::io::{load_edge_list, write_edge_list};
use danneal::report::{emit_report, Format, Report, Run};
use danneal::solve::SolverConfig;
use danneal_core::graph::Graph;
use danneal_core::problems::{modularity, PartitionAssignment};
use proptest::prelude::*;

fn small_config(seed: u64) -> SolverConfig {
    SolverConfig { restarts: Some(3), steps: Some(2_000), seed, ..SolverConfig::default() }
}

fn emit(report: &Report, format: Format) -> Vec<u8> {
    let mut out = Vec::new();
    emit_report(report, format, &mut out).unwrap();
    out
}

proptest! {
    #[test]
    fn edge_list_round_trip(
        n in 1usize..30,
        raw in prop::collection::vec((0usize..30, 0usize..30, 1e-6..1e6f64), 0..60),
    ) {
        let edges = raw.into_iter().filter(|&(u, v, _)| u < n && v < n && u != v);
        let g = Graph::from_merged_edges(n, edges).unwrap();
        let mut text = Vec::new();
        write_edge_list(&g, &mut text).unwrap();
        let back = load_edge_list(text.as_slice()).unwrap();
        prop_assert_eq!(back, g);
    }
}

#[test]
fn degree_identity_for_bundled_graphs() {
    let graphs = [karate_club(), ieee33().graph, ieee118().graph];
    for g in graphs {
        let sum_k: f64 = g.degrees().iter().sum();
        let sum_w: f64 = g.edges().iter().map(|e| e.2).sum();
        assert!((sum_k - 2.0 * sum_w).abs() <= 1e-12 * sum_k);
        assert!((g.total_weight_2m() - sum_k).abs() <= 1e-12 * sum_k);
        let stats = g.stats();
        assert_eq!((stats.n, stats.edge_count), (g.num_nodes(), g.num_edges()));
        assert!(stats.min_weight.unwrap() <= stats.mean_weight.unwrap());
        assert!(stats.mean_weight.unwrap() <= stats.max_weight.unwrap());
    }
}

#[test]
fn partition_report_is_self_consistent() {
    let source = GraphSource::Builtin(Builtin::Ieee33);
    let report = run_partition(&source, 3..=5, PartitionSettings::default(), &small_config(11)).unwrap();
    let json = emit(&report, Format::Json);
    assert_eq!(json, emit(&report, Format::Json));

    let parsed: Report = serde_json::from_slice(&json).unwrap();
    assert_eq!(parsed, report);

    let graph = ieee33();
    let Run::Sweepk(run) = &parsed.run else { panic!("expected a sweep report") };
    assert_eq!(run.results.iter().map(|r| r.k).collect::<Vec<_>>(), [3, 4, 5]);
    for r in &run.results {
        let assignment = r.assignment.as_ref().unwrap();
        let labels: Vec<&str> = assignment.0.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, graph.labels.iter().map(String::as_str).collect::<Vec<_>>());
        let groups = assignment.0.iter().map(|(_, g)| *g).collect();
        let assign = PartitionAssignment::new(groups, r.k).unwrap();
        let q = modularity(&graph.graph, &assign, 1.0).unwrap();
        assert!((q - r.modularity.unwrap()).abs() < 1e-9);
        assert!((q + r.best_energy).abs() < 1e-9);
        assert_eq!(assign.group_sizes(), *r.group_sizes.as_ref().unwrap());
    }
    let best = run.results.iter().filter_map(|r| r.modularity).fold(f64::MIN, f64::max);
    assert_eq!(run.best_modularity, Some(best));

    let csv = String::from_utf8(emit(&report, Format::Csv)).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,modularity,best_energy,feasible,seconds"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn numpart_report_is_self_consistent() {
    let source = NumberSource::Generate { n: 60, max_value: 1000, seed: 5 };
    let report = run_numpart(&source, true, &small_config(5)).unwrap();
    let parsed: Report = serde_json::from_slice(&emit(&report, Format::Json)).unwrap();
    assert_eq!(parsed, report);
    let Run::Numpart(run) = parsed.run else { panic!("expected a numpart report") };
    assert_eq!(run.side.len(), run.values.len());
    let sum_a: u64 = run.values.iter().zip(run.side.chars()).filter(|p| p.1 == '1').map(|p| p.0).sum();
    let total: u64 = run.values.iter().sum();
    assert_eq!((sum_a, total - sum_a), (run.sum_a, run.sum_b));
    assert_eq!(run.d, sum_a.abs_diff(total - sum_a));
    assert_eq!(run.best_energy, (run.d * run.d) as f64);
}

#[test]
fn deterministic_block_is_byte_identical() {
    let source = GraphSource::Builtin(Builtin::Karate);
    let a = run_partition(&source, 2..=4, PartitionSettings::default(), &small_config(9)).unwrap();
    let b = run_partition(&source, 2..=4, PartitionSettings::default(), &small_config(9)).unwrap();
    assert_eq!(a.deterministic_json().unwrap(), b.deterministic_json().unwrap());
    let c = run_partition(&source, 2..=4, PartitionSettings::default(), &small_config(10)).unwrap();
    assert_ne!(a.deterministic_json().unwrap(), c.deterministic_json().unwrap());
}
