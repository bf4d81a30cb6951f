use anb_core::corpus::verification_corpus;
use anb_core::engine::BaselineDetail;
use anb_core::graph::{generate, parse_edge_list};
use anb_core::metrics::collect;
use anb_core::oracle;
use anb_core::protocol::NodeState;
use anb_core::{
    run, run_with_oracle, Algorithm, ExactCount, FaultInjection, Graph, GraphFamily, Mode,
    SimConfig, SimError, TraceLevel,
};

fn full(g: Graph) -> SimConfig {
    SimConfig::new(g, Algorithm::Anb).with_trace(TraceLevel::Full)
}

fn states(r: &anb_core::RunResult, t: u64) -> String {
    r.trace
        .as_ref()
        .unwrap()
        .snapshot(t)
        .unwrap()
        .iter()
        .map(|s| s.state.letter())
        .collect()
}

#[test]
fn triangle_timeline() {
    let g = generate(&GraphFamily::Complete, 3, 0).unwrap();
    let (r, report) = run_with_oracle(&full(g)).unwrap();
    assert_eq!(states(&r, 0), "AAA");
    assert_eq!(states(&r, 1), "LLL");
    assert_eq!(states(&r, 2), "RRR");
    assert_eq!(states(&r, 3), "III");
    assert_eq!(r.t_reduction, Some(2));
    assert_eq!(r.t_converged, Some(3));
    assert_eq!(r.residue_ids, vec![0, 1, 2]);
    assert!(r.final_counts.iter().all(|c| c.to_u64() == Some(3)));
    let m = &r.metrics;
    assert_eq!((m.m1, m.m2, m.m3, m.m4, m.m5), (3, 3, 3, 0, 0));
    // each node relays the two foreign pairs once
    assert_eq!(m.m6, 9);
    assert_eq!(report.resting_times[0], 0);
}

#[test]
fn star_timeline() {
    let g = generate(&GraphFamily::Star, 5, 0).unwrap();
    let (r, report) = run_with_oracle(&full(g)).unwrap();
    assert_eq!(states(&r, 1), "ALLLL");
    assert_eq!(states(&r, 2), "AIIII");
    assert_eq!(states(&r, 4), "LIIII");
    assert_eq!(states(&r, 5), "RIIII");
    assert_eq!(r.t_reduction, Some(5));
    assert_eq!(r.t_converged, Some(6));
    assert_eq!(r.residue_ids, vec![0]);
    let trace = r.trace.as_ref().unwrap();
    assert_eq!(trace.snapshot(3).unwrap()[0].c.to_u64(), Some(5));
    assert_eq!(&report.resting_times[..3], &[0, 3, 5]);
    assert!(!report.resting_times.contains(&2));
    assert_eq!(r.metrics.m4, 4);
    assert_eq!(r.metrics.m5, 4);
}

#[test]
fn single_node() {
    let g = generate(&GraphFamily::Path, 1, 0).unwrap();
    let (r, _) = run_with_oracle(&full(g)).unwrap();
    assert_eq!(r.rounds_executed, 4);
    assert_eq!(r.final_counts[0].to_u64(), Some(1));
    assert_eq!(r.residue_ids, vec![0]);
    let m = &r.metrics;
    assert_eq!((m.m1, m.m2, m.m3, m.m4, m.m5, m.m6), (1, 1, 1, 0, 0, 1));
}

#[test]
fn path_of_three_passes_all_checks() {
    let g = parse_edge_list("0 1\n1 2\n").unwrap();
    let (r, report) = run_with_oracle(&full(g)).unwrap();
    assert!(report.passed(), "{report}");
    assert_eq!(r.residue_ids, vec![1]);
    assert!(r.correct());
    assert_eq!(report.checks.len(), oracle::CHECKS.len());
}

#[test]
fn corpus_passes_oracle_and_metrics_agree() {
    for entry in verification_corpus(None) {
        let g = entry.graph().unwrap();
        let n = g.n() as u64;
        let (r, report) =
            run_with_oracle(&full(g.clone())).unwrap_or_else(|e| panic!("{}: {e}", entry.label()));
        assert!(report.t_reduction.unwrap() <= 3 * n + 2);
        assert!(r.rounds_executed <= 4 * n + 1, "{}", entry.label());
        let recomputed = collect(r.trace.as_ref().unwrap()).unwrap();
        assert_eq!(recomputed, r.metrics, "{}", entry.label());
        let m = &r.metrics;
        assert_eq!((m.m1, m.m2, m.m3), (n, n, n));
        assert_eq!(m.m4, n - m.residue_count);
        assert!(m.m6 <= n * m.residue_count);
    }
}

#[test]
fn trace_level_does_not_change_outcome() {
    let g = generate(&GraphFamily::BA, 120, 5).unwrap();
    let a = run(&full(g.clone())).unwrap();
    let b = run(&SimConfig::new(g.clone(), Algorithm::Anb).with_trace(TraceLevel::None)).unwrap();
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.final_counts, b.final_counts);
    let mut no_stop = SimConfig::new(g, Algorithm::Anb);
    no_stop.early_stop = false;
    let c = run(&no_stop).unwrap();
    assert_eq!(c.rounds_executed, no_stop.t_max());
    assert_eq!(c.final_counts, a.final_counts);
    assert_eq!(c.t_converged, a.t_converged);
}

#[test]
fn fault_injection_breaks_conservation() {
    let g = generate(&GraphFamily::Star, 6, 0).unwrap();
    let mut cfg = full(g);
    cfg.fault = Some(FaultInjection::DoubleCountPayloads);
    match run_with_oracle(&cfg) {
        Err(SimError::Oracle(report)) => {
            let f = report.first_failure().unwrap();
            assert_eq!(f.check, "conservation");
            assert!(f.round.is_some());
            assert_eq!(f.node, Some(0));
        }
        other => panic!("expected an oracle failure, got {other:?}"),
    }
}

#[test]
fn oracle_preconditions() {
    let g = generate(&GraphFamily::Path, 4, 0).unwrap();
    assert!(matches!(
        run_with_oracle(&SimConfig::new(g.clone(), Algorithm::Anb)),
        Err(SimError::TraceRequired)
    ));
    assert!(matches!(
        run_with_oracle(
            &SimConfig::new(g.clone(), Algorithm::All2All).with_trace(TraceLevel::Full)
        ),
        Err(SimError::OracleAlgorithm)
    ));
    let mut cfg = SimConfig::new(g, Algorithm::Anb);
    cfg.n_max = 3;
    assert!(matches!(
        run(&cfg),
        Err(SimError::NMaxTooSmall { n_max: 3, n: 4 })
    ));
}

#[test]
fn summation_on_triangle() {
    let g = generate(&GraphFamily::Complete, 3, 0).unwrap();
    let mut cfg = full(g);
    cfg.mode = Mode::Sum(vec![
        ExactCount::from_integer(2),
        ExactCount::from_integer(3),
        ExactCount::from_integer(5),
    ]);
    let (r, _) = run_with_oracle(&cfg).unwrap();
    assert!(r
        .final_counts
        .iter()
        .all(|c| *c == ExactCount::from_integer(10)));
    cfg.mode = Mode::Sum(vec![ExactCount::one()]);
    assert!(matches!(
        run(&cfg),
        Err(SimError::ValueCount { got: 1, n: 3 })
    ));
    cfg.mode = Mode::Sum(vec![
        ExactCount::one(),
        ExactCount::zero(),
        ExactCount::one(),
    ]);
    assert!(matches!(run(&cfg), Err(SimError::Protocol { node: 1, .. })));
}

#[test]
fn all2all_on_path() {
    let g = parse_edge_list("0 1\n1 2\n").unwrap();
    let r = run(&SimConfig::new(g, Algorithm::All2All).with_trace(TraceLevel::Full)).unwrap();
    assert_eq!(r.t_converged, Some(2));
    assert_eq!(r.metrics.id_broadcasts, Some(9));
    let Some(BaselineDetail::All2All {
        estimates: Some(est),
    }) = &r.baseline
    else {
        panic!("missing estimates")
    };
    assert_eq!(est[0], vec![1, 1, 1]);
    assert_eq!(est[1], vec![2, 3, 2]);
    assert_eq!(est[2], vec![3, 3, 3]);
}

#[test]
fn all2all_ball_sizes() {
    let g = generate(&GraphFamily::WS, 60, 2).unwrap();
    let r =
        run(&SimConfig::new(g.clone(), Algorithm::All2All).with_trace(TraceLevel::Full)).unwrap();
    let Some(BaselineDetail::All2All {
        estimates: Some(est),
    }) = &r.baseline
    else {
        panic!()
    };
    for i in 0..g.n() {
        let dist = g.bfs_distances(i);
        for (t, row) in est.iter().enumerate() {
            let ball = dist.iter().filter(|&&d| d <= t).count() as u64;
            assert_eq!(row[i], ball);
        }
    }
}

#[test]
fn single_tree_spanning_trees() {
    for family in [
        GraphFamily::BA,
        GraphFamily::RGG,
        GraphFamily::Ring,
        GraphFamily::Star,
    ] {
        let g = generate(&family, 40, 9).unwrap();
        let r = run(&SimConfig::new(g.clone(), Algorithm::SingleTree)).unwrap();
        assert!(r.correct());
        let Some(BaselineDetail::SingleTree {
            completion_rounds,
            parents,
        }) = &r.baseline
        else {
            panic!()
        };
        let ecc = g.eccentricities();
        for o in 0..g.n() {
            assert!(
                completion_rounds[o] <= 2 * ecc[o] as u64,
                "{family} origin {o}"
            );
            let dist = g.bfs_distances(o);
            for i in 0..g.n() {
                match parents[o][i] {
                    None => assert_eq!(i, o),
                    Some(p) => {
                        assert!(g.has_edge(i, p));
                        assert_eq!(dist[p] + 1, dist[i]);
                    }
                }
            }
        }
    }
}

#[test]
fn node_states_in_final_snapshot() {
    let g = generate(&GraphFamily::ER, 80, 1).unwrap();
    let r = run(&full(g)).unwrap();
    let t = r.trace.unwrap();
    assert!(t.final_nodes.iter().all(|s| s.state == NodeState::Inactive));
    let dump = t.dump();
    let parsed = anb_core::trace::parse_dump(&dump).unwrap();
    assert_eq!(parsed.len(), 80 * (t.rounds.len() + 1));
}
