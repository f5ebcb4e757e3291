//! Acceptance suite. Every criterion prints one `PASS`, `FAIL` or `WARN` line.
//!
//! Run with `cargo test --release -p danneal --test acceptance -- --nocapture`
//! to watch progress; the lines are written straight to stdout either way.

use std::io::Write;
use std::time::Instant;

use danneal::commands::{run_numpart, run_partition, solve_partition, GraphSource, NumberSource, PartitionSettings};
use danneal::datasets::{ieee118, karate_club, Builtin};
use danneal::io::LabeledGraph;
use danneal::report::{emit_report, Format, KResult, Report, Run};
use danneal::solve::SolverConfig;
use danneal_core::anneal::{
    evaluate_total, AnnealParams, Engine, NoClock, OneHotMode, Plan, Schedule, SearchSpace, Walker,
};
use danneal_core::graph::Graph;
use danneal_core::problems::{build_graph_partition, build_number_partition, NumberSet, PartitionProblem};
use danneal_core::qubo::QuboModel;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Pass,
    Fail,
    Warn,
}

struct Ledger {
    verdicts: Vec<(usize, Verdict)>,
}

impl Ledger {
    fn record(&mut self, id: usize, name: &str, passed: bool, soft: bool, detail: String) {
        let verdict = match (passed, soft) {
            (true, _) => Verdict::Pass,
            (false, true) => Verdict::Warn,
            (false, false) => Verdict::Fail,
        };
        let tag = match verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Warn => "WARN",
        };
        // Bypasses the test harness's output capture.
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{tag} [{id}] {name}: {detail}");
        let _ = out.flush();
        self.verdicts.push((id, verdict));
    }
}

/// Modularity straight from a dense adjacency matrix.
fn naive_modularity(n: usize, adj: &[f64], groups: &[usize]) -> f64 {
    let k: Vec<f64> = (0..n).map(|i| adj[i * n..(i + 1) * n].iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if groups[i] == groups[j] {
                q += adj[i * n + j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

fn dense(graph: &Graph) -> Vec<f64> {
    let n = graph.num_nodes();
    let mut adj = vec![0.0; n * n];
    for &(u, v, w) in graph.edges() {
        adj[u * n + v] += w;
        adj[v * n + u] += w;
    }
    adj
}

fn to_bits(groups: &[usize], k: usize) -> Vec<bool> {
    let mut bits = vec![false; groups.len() * k];
    for (i, &g) in groups.iter().enumerate() {
        bits[i * k + g] = true;
    }
    bits
}

fn criterion_1(ledger: &mut Ledger) {
    let clock = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(101);
    let mut agree = 0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=12);
        let values: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=100)).collect();
        let total: i64 = values.iter().sum::<u64>() as i64;
        let model = build_number_partition(&NumberSet::new(values.clone()).unwrap());
        let mut min_d = i64::MAX;
        let mut min_energy = i128::MAX;
        for mask in 0u32..1 << n {
            let a: i64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| values[i] as i64).sum();
            min_d = min_d.min((2 * a - total).abs());
            let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let e = model.energy(&bits).unwrap();
            assert!(e.fract() == 0.0 && e.abs() < 2f64.powi(53), "energy {e} is not an exact integer");
            min_energy = min_energy.min(e as i128);
        }
        agree += (min_energy == (min_d as i128) * (min_d as i128)) as usize;
    }
    let secs = clock.elapsed().as_secs_f64();
    ledger.record(
        1,
        "number partitioning oracle equivalence",
        agree == 50 && secs < 10.0,
        false,
        format!("{agree}/50 sets exact, {secs:.2}s (limit 10s)"),
    );
}

fn random_connected_graph(rng: &mut impl Rng, n: usize) -> Graph {
    let mut edges = Vec::new();
    let mut linked = vec![false; n * n];
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(0.5..3.0)));
        linked[u * n + v] = true;
    }
    for u in 0..n {
        for v in u + 1..n {
            if !linked[u * n + v] && rng.gen::<f64>() < 0.4 {
                edges.push((u, v, rng.gen_range(0.5..3.0)));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

fn criterion_2(ledger: &mut Ledger) {
    let clock = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(202);
    let (mut unconstrained, mut with_hinges) = (0, 0);
    for t in 0..50 {
        let k = 2 + t % 2;
        let n = rng.gen_range(3..=6);
        let graph = random_connected_graph(&mut rng, n);
        let adj = dense(&graph);
        let q = build_graph_partition(&PartitionProblem::new(graph, k)).unwrap();

        let mut best_qubo = (f64::INFINITY, Vec::new());
        let mut best_total = (f64::INFINITY, Vec::new());
        let (mut q_max, mut q_max_all_used) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for code in 0..k.pow(n as u32) {
            let groups: Vec<usize> = (0..n).map(|i| code / k.pow(i as u32) % k).collect();
            let bits = to_bits(&groups, k);
            let e = q.model.energy(&bits).unwrap();
            if e < best_qubo.0 {
                best_qubo = (e, groups.clone());
            }
            let total = evaluate_total(&q.model, &q.constraints, &bits).unwrap();
            if total < best_total.0 {
                best_total = (total, groups.clone());
            }
            let oracle = naive_modularity(n, &adj, &groups);
            q_max = q_max.max(oracle);
            if (0..k).all(|g| groups.contains(&g)) {
                q_max_all_used = q_max_all_used.max(oracle);
            }
        }
        unconstrained += ((naive_modularity(n, &adj, &best_qubo.1) - q_max).abs() <= 1e-9) as usize;
        with_hinges += ((naive_modularity(n, &adj, &best_total.1) - q_max_all_used).abs() <= 1e-9) as usize;
    }
    let secs = clock.elapsed().as_secs_f64();
    ledger.record(
        2,
        "graph partitioning oracle equivalence",
        unconstrained == 50 && with_hinges == 50 && secs < 30.0,
        false,
        format!(
            "{unconstrained}/50 match the K^n maximum, {with_hinges}/50 match it over all-groups-used \
             assignments once hinges are added, {secs:.2}s (limit 30s)"
        ),
    );
}

fn criterion_3(ledger: &mut Ledger) {
    let mut hits = 0;
    let mut slowest: f64 = 0.0;
    let mut ds = Vec::new();
    for instance in 0..10 {
        let source = NumberSource::Generate { n: 500, max_value: 10_000, seed: 3_000 + instance };
        let config = SolverConfig { seed: instance, ..SolverConfig::default() };
        let clock = Instant::now();
        let report = run_numpart(&source, true, &config).unwrap();
        let secs = clock.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        let Run::Numpart(run) = report.run else { unreachable!() };
        ds.push(run.d);
        hits += (run.d <= 1 && secs < 30.0) as usize;
    }
    ledger.record(
        3,
        "number partitioning quality, n=500",
        hits >= 9,
        false,
        format!("{hits}/10 reached D<=1 (need 9), D={ds:?}, slowest {slowest:.2}s (limit 30s each)"),
    );
}

fn single(report: &Report) -> &KResult {
    match &report.run {
        Run::Graphpart(run) => &run.results[0],
        _ => unreachable!(),
    }
}

fn restarts_used(r: &KResult) -> usize {
    r.solver.restarts
}

fn criterion_4(ledger: &mut Ledger) {
    let source = GraphSource::Builtin(Builtin::Karate);
    let config = SolverConfig { restarts: Some(20), ..SolverConfig::default() };
    let clock = Instant::now();
    let report = run_partition(&source, 4..=4, PartitionSettings::default(), &config).unwrap();
    let secs = clock.elapsed().as_secs_f64();
    let r = single(&report);
    let q = r.modularity.unwrap_or(f64::NAN);

    let sweep = run_partition(&source, 2..=8, PartitionSettings::default(), &config).unwrap();
    let Run::Sweepk(run) = &sweep.run else { unreachable!() };
    let curve: Vec<String> =
        run.results.iter().map(|r| format!("{}:{:.4}", r.k, r.modularity.unwrap_or(f64::NAN))).collect();
    ledger.record(
        4,
        "karate modularity",
        q >= 0.44 && secs < 60.0 && restarts_used(r) >= 20 && run.best_k == Some(4),
        false,
        format!(
            "Q={q:.6} at K=4 over {} restarts in {secs:.2}s (need >=0.44 in 60s); sweep argmax K={:?} [{}]",
            restarts_used(r),
            run.best_k,
            curve.join(" ")
        ),
    );
}

fn criterion_5(ledger: &mut Ledger) {
    let source = GraphSource::Builtin(Builtin::Ieee33);
    let config = SolverConfig { restarts: Some(20), ..SolverConfig::default() };
    let clock = Instant::now();
    let report = run_partition(&source, 7..=7, PartitionSettings::default(), &config).unwrap();
    let secs = clock.elapsed().as_secs_f64();
    let r = single(&report);
    let q = r.modularity.unwrap_or(f64::NAN);
    let b = r.boundary.as_ref().unwrap();
    let (interior, boundary) = (b.interior_mean.unwrap_or(f64::NAN), b.boundary_mean.unwrap_or(f64::NAN));
    ledger.record(
        5,
        "33-bus modularity",
        q >= 0.72 && secs < 120.0 && restarts_used(r) >= 20 && interior > boundary,
        false,
        format!(
            "Q={q:.6} at K=7 over {} restarts in {secs:.2}s (need >=0.72 in 120s); \
             interior mean {interior:.3} vs boundary mean {boundary:.3}",
            restarts_used(r)
        ),
    );
}

fn criterion_6(ledger: &mut Ledger) {
    let graph = ieee118();
    let vars = build_graph_partition(&PartitionProblem::new(graph.graph.clone(), 11)).unwrap().model.num_vars();
    let config = SolverConfig { restarts: Some(20), ..SolverConfig::default() };
    let clock = Instant::now();
    let (r, _) = solve_partition(&graph, 11, PartitionSettings::default(), &config).unwrap();
    let secs = clock.elapsed().as_secs_f64();
    let q = r.modularity.unwrap_or(f64::NAN);
    ledger.record(
        6,
        "118-bus modularity (stretch)",
        q >= 0.78 && secs < 600.0 && vars == 1298,
        true,
        format!(
            "Q={q:.6} at K=11 with {vars} variables over {} restarts in {secs:.1}s (need >=0.78 in 600s)",
            r.solver.restarts
        ),
    );
}

fn criterion_7(ledger: &mut Ledger) {
    let trials = 100_000;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(707);
    let mut cells = 0;
    let mut good = 0;
    let mut worst = 0.0f64;
    for delta in [-1.0, 0.0, 1.0, 2.0] {
        let model = QuboModel::new(1, [], [(0, delta)], 0.0).unwrap();
        let space = SearchSpace::new(&model, &[], None).unwrap();
        let start = Walker::new(&space, vec![false]).unwrap();
        assert_eq!(start.flip_delta(0), delta);
        for t in [0.5, 1.0, 2.0] {
            for offset in [0.0, 1.0] {
                let p = f64::min(1.0, (-(delta - offset) / t).exp());
                let mut engines = vec![Engine::ParallelTrial];
                if offset == 0.0 {
                    engines.push(Engine::Sequential);
                }
                for engine in engines {
                    let mut hits = 0usize;
                    for _ in 0..trials {
                        let mut w = start.clone();
                        let out = match engine {
                            Engine::ParallelTrial => w.parallel_trial_step(t, offset, 0.5, &mut rng),
                            Engine::Sequential => w.sequential_sa_step(t, &mut rng),
                        };
                        hits += out.accepted.is_some() as usize;
                    }
                    let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
                    let dev = (hits as f64 - trials as f64 * p).abs();
                    let ok = if sigma == 0.0 { dev == 0.0 } else { dev <= 3.0 * sigma };
                    if sigma > 0.0 {
                        worst = worst.max(dev / sigma);
                    }
                    cells += 1;
                    good += ok as usize;
                }
            }
        }
    }
    ledger.record(
        7,
        "Metropolis acceptance statistics",
        good == cells,
        false,
        format!("{good}/{cells} cells within 3 sigma at 1e5 samples, worst {worst:.2} sigma"),
    );
}

fn criterion_8(ledger: &mut Ledger) {
    let mut within = 0;
    let mut resets = 0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for seed in 0..100u64 {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(800 + seed);
        let n = 8;
        let barrier = rng.gen_range(1.0..100.0);
        // All-zeros is a strict local minimum: each flip costs its linear term.
        let mut linear: Vec<(usize, f64)> = (0..n).map(|i| (i, barrier * rng.gen_range(1.0..3.0))).collect();
        linear[rng.gen_range(0..n)].1 = barrier;
        let quad: Vec<(usize, usize, f64)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, rng.gen_range(-50.0..50.0)))
            .collect();
        let model = QuboModel::new(n, quad, linear, 0.0).unwrap();
        let space = SearchSpace::new(&model, &[], None).unwrap();
        let mut walker = Walker::new(&space, vec![false; n]).unwrap();
        let increment = barrier / 40.0;
        let temperature = increment * 1e-3;
        let expected = barrier / increment;
        let mut offset = 0.0;
        let mut rejected = 0usize;
        loop {
            let out = walker.parallel_trial_step(temperature, offset, increment, &mut rng);
            if out.accepted.is_some() {
                resets += (out.offset == 0.0) as usize;
                break;
            }
            offset = out.offset;
            rejected += 1;
            assert!(rejected < 100_000, "no escape");
        }
        let ratio = rejected as f64 / expected;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        within += (0.5..=2.0).contains(&ratio) as usize;
    }
    ledger.record(
        8,
        "escape after about B/delta rejections",
        within == 100 && resets == 100,
        false,
        format!(
            "{within}/100 seeds within a factor of 2 (ratio range {lo:.3}..{hi:.3}), {resets}/100 offsets reset to 0"
        ),
    );
}

fn reparse(report: &Report) -> Report {
    let mut bytes = Vec::new();
    emit_report(report, Format::Json, &mut bytes).unwrap();
    serde_json::from_slice(&bytes).unwrap()
}

/// Recomputes every metric of a partition report from its assignments.
fn partition_metrics_hold(graph: &LabeledGraph, report: &Report) -> bool {
    let (Run::Graphpart(run) | Run::Sweepk(run)) = &report.run else { return false };
    let adj = dense(&graph.graph);
    let n = graph.graph.num_nodes();
    run.results.iter().all(|r| {
        let Some(assignment) = &r.assignment else { return !r.feasible };
        let labels_match = assignment.0.iter().map(|e| &e.0).eq(graph.labels.iter());
        let groups: Vec<usize> = assignment.0.iter().map(|e| e.1).collect();
        let q = naive_modularity(n, &adj, &groups);
        let mut sizes = vec![0; r.k];
        groups.iter().for_each(|&g| sizes[g] += 1);
        let (mut inner, mut cross) = ((0.0, 0), (0.0, 0));
        for &(u, v, w) in graph.graph.edges() {
            let slot = if groups[u] == groups[v] { &mut inner } else { &mut cross };
            slot.0 += w;
            slot.1 += 1;
        }
        let b = r.boundary.as_ref().unwrap();
        let mean_ok = |m: Option<f64>, (s, c): (f64, usize)| match m {
            Some(m) => c > 0 && (m - s / c as f64).abs() <= 1e-9 * (1.0 + m.abs()),
            None => c == 0,
        };
        let scale = r.best_energy.abs().max(1.0);
        labels_match
            && (q - r.modularity.unwrap()).abs() <= 1e-9
            && (q + r.best_energy).abs() <= 1e-9 * scale
            && r.group_sizes.as_deref() == Some(sizes.as_slice())
            && (b.interior_count, b.boundary_count) == (inner.1, cross.1)
            && mean_ok(b.interior_mean, inner)
            && mean_ok(b.boundary_mean, cross)
    })
}

fn numpart_metrics_hold(report: &Report) -> bool {
    let Run::Numpart(run) = &report.run else { return false };
    let total: u64 = run.values.iter().sum();
    let a: u64 = run.values.iter().zip(run.side.chars()).filter(|p| p.1 == '1').map(|p| p.0).sum();
    let d = a.abs_diff(total - a);
    run.side.len() == run.values.len()
        && (run.sum_a, run.sum_b, run.d) == (a, total - a, d)
        && run.best_energy == (d as f64).powi(2)
        && run.optimal == (d <= 1)
}

fn criterion_9(ledger: &mut Ledger) {
    let mut checks = Vec::new();

    // Tracked energy against scratch recomputation.
    let graph = karate_club();
    let q = build_graph_partition(&PartitionProblem::new(graph.clone(), 4)).unwrap();
    let schedule = Schedule::geometric(0.05, 5e-5, 3_000).unwrap();
    let mut drift_ok = true;
    for mode in [OneHotMode::StructuredMoves, OneHotMode::Penalty] {
        for engine in [Engine::ParallelTrial, Engine::Sequential] {
            let params = AnnealParams {
                restarts: 4,
                seed: 9,
                one_hot_mode: mode,
                one_hot_penalty: Some(q.one_hot_penalty),
                engine,
                ..AnnealParams::default()
            };
            let plan = Plan::new(&q.model, &q.constraints, schedule, params, Some(&q.groups)).unwrap();
            let space = plan.space().unwrap();
            let shared = plan.shared_walker(&space).unwrap();
            let outcomes = (0..4).map(|r| plan.run_restart(&space, &shared, r, &NoClock).unwrap()).collect();
            let result = plan.finish(outcomes);
            drift_ok &= result
                .per_restart
                .iter()
                .all(|s| (s.final_energy - s.final_energy_tracked).abs() <= 1e-9 * s.final_energy.abs().max(1.0));
            let best = evaluate_total(plan.model(), &q.constraints, &result.best_bits).unwrap();
            drift_ok &= best == result.best_total_energy;
        }
    }
    let values: Vec<u64> = (0..300).map(|i| (i * 7919 % 10_000) + 1).collect();
    let np = build_number_partition(&NumberSet::new(values.clone()).unwrap());
    let params = AnnealParams { restarts: 3, seed: 1, ..AnnealParams::default() };
    let nschedule = Schedule::geometric(1e10, 1e7, 5_000).unwrap();
    let r = danneal_core::anneal::anneal(&np, &[], &nschedule, &params, None, &NoClock).unwrap();
    drift_ok &= r
        .per_restart
        .iter()
        .all(|s| (s.final_energy - s.final_energy_tracked).abs() <= 1e-9 * s.final_energy.abs().max(1.0));
    checks.push(("tracked energy", drift_ok));

    // Reports: reparse and recompute.
    let config = SolverConfig { restarts: Some(4), steps: Some(4_000), seed: 21, ..SolverConfig::default() };
    let penalty = SolverConfig { one_hot_mode: OneHotMode::Penalty, ..config.clone() };
    let mut reports_ok = true;
    let mut deterministic_ok = true;
    for (builtin, cfg) in [(Builtin::Karate, &config), (Builtin::Ieee33, &config), (Builtin::Karate, &penalty)] {
        let source = GraphSource::Builtin(builtin);
        let report = run_partition(&source, 2..=5, PartitionSettings::default(), cfg).unwrap();
        let parsed = reparse(&report);
        reports_ok &= parsed == report && partition_metrics_hold(&builtin.load(), &parsed);
        let again = run_partition(&source, 2..=5, PartitionSettings::default(), cfg).unwrap();
        deterministic_ok &= report.deterministic_json().unwrap() == again.deterministic_json().unwrap();
    }
    let nsource = NumberSource::Values(values);
    let report = run_numpart(&nsource, false, &config).unwrap();
    let parsed = reparse(&report);
    reports_ok &= parsed == report && numpart_metrics_hold(&parsed);
    let again = run_numpart(&nsource, false, &config).unwrap();
    deterministic_ok &= report.deterministic_json().unwrap() == again.deterministic_json().unwrap();
    checks.push(("report recomputation", reports_ok));
    checks.push(("byte-identical run blocks", deterministic_ok));

    let detail: Vec<String> =
        checks.iter().map(|(name, ok)| format!("{name} {}", if *ok { "ok" } else { "broken" })).collect();
    ledger.record(9, "consistency", checks.iter().all(|c| c.1), false, detail.join(", "));
}

#[test]
fn acceptance_criteria() {
    let mut ledger = Ledger { verdicts: Vec::new() };
    criterion_1(&mut ledger);
    criterion_2(&mut ledger);
    criterion_3(&mut ledger);
    criterion_4(&mut ledger);
    criterion_5(&mut ledger);
    criterion_6(&mut ledger);
    criterion_7(&mut ledger);
    criterion_8(&mut ledger);
    criterion_9(&mut ledger);
    let failed: Vec<usize> = ledger.verdicts.iter().filter(|v| v.1 == Verdict::Fail).map(|v| v.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
