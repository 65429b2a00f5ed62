mod common;

use std::collections::BTreeSet;

use common::observed_only;
use latcard::data::{ancestral_sample, Dataset, HiddenAssignments};
use latcard::discovery::{
    find_hidden_pipeline, find_semi_cliques, greedy_hill_climb, is_semi_clique, propose_hidden, FindHiddenConfig,
    HillClimbConfig, MoveKind, SemiClique,
};
use latcard::network::{BayesianNetwork, Cpd, Dag, Variable};
use latcard::scoring::{network_score, PriorSpec};
use latcard::stats::count_all_families;
use latcard::synthetic::{planted_clique_benchmark, PLANTED_HIDDEN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prior() -> PriorSpec {
    PriorSpec::default()
}

fn pair(child_rows: Vec<Vec<f64>>, dependent: bool) -> BayesianNetwork {
    let names: Vec<String> = vec!["A".into(), "B".into()];
    let edges: Vec<(String, String)> = if dependent { vec![("A".into(), "B".into())] } else { vec![] };
    let dag = Dag::new(names, &edges).unwrap();
    let cpds = vec![
        Cpd::from_rows("A", 2, &[vec![0.4, 0.6]]).unwrap(),
        Cpd::from_rows("B", 2, &child_rows).unwrap(),
    ];
    BayesianNetwork::new(vec![Variable::binary("A"), Variable::binary("B")], dag, cpds).unwrap()
}

fn score_of(dag: &Dag, data: &Dataset) -> f64 {
    let net = BayesianNetwork::uniform(data.variables().to_vec(), dag.clone()).unwrap();
    let stats = count_all_families(data, &HiddenAssignments::new(), &net).unwrap();
    network_score(dag, &stats, &prior()).unwrap().total
}

#[test]
fn independent_pair_stays_empty() {
    let data = ancestral_sample(&pair(vec![vec![0.7, 0.3]], false), 10_000, 1).unwrap();
    let result = greedy_hill_climb(&data, &prior(), &HillClimbConfig::default()).unwrap();
    assert_eq!(result.dag.edge_count(), 0);
    assert!(result.moves.is_empty());
}

#[test]
fn dependent_pair_gets_one_edge() {
    let data = ancestral_sample(&pair(vec![vec![0.9, 0.1], vec![0.2, 0.8]], true), 10_000, 2).unwrap();
    let result = greedy_hill_climb(&data, &prior(), &HillClimbConfig::default()).unwrap();
    assert_eq!(result.dag.edge_count(), 1);
    let (a, b) = (result.dag.index_of("A").unwrap(), result.dag.index_of("B").unwrap());
    assert!(result.dag.has_edge(a, b) || result.dag.has_edge(b, a));
}

fn apply(parents: &mut [Vec<usize>], kind: MoveKind, p: usize, c: usize) {
    match kind {
        MoveKind::Add => parents[c].push(p),
        MoveKind::Delete => parents[c].retain(|&x| x != p),
        MoveKind::Reverse => {
            parents[c].retain(|&x| x != p);
            parents[p].push(c);
        }
    }
    parents[c].sort_unstable();
    parents[p].sort_unstable();
}

#[test]
fn hill_climb_trace_matches_rescoring() {
    let net = planted_clique_benchmark().unwrap();
    let data = observed_only(&ancestral_sample(&net, 3_000, 3).unwrap().hide_variables(&[PLANTED_HIDDEN]).unwrap());
    let result = greedy_hill_climb(&data, &prior(), &HillClimbConfig::default()).unwrap();
    assert!((result.score - score_of(&result.dag, &data)).abs() < 1e-9);

    let names: Vec<String> = data.variables().iter().map(|v| v.name().to_string()).collect();
    let mut parents = vec![Vec::new(); names.len()];
    let mut last = score_of(&Dag::empty(names.clone()).unwrap(), &data);
    for mv in &result.moves {
        let p = names.iter().position(|n| *n == mv.parent).unwrap();
        let c = names.iter().position(|n| *n == mv.child).unwrap();
        apply(&mut parents, mv.kind, p, c);
        let now = score_of(&Dag::from_parents(names.clone(), parents.clone()).unwrap(), &data);
        assert!(now > last, "score must rise with every move");
        assert!((now - last - mv.gain).abs() < 1e-9);
        assert!((now - mv.score_after).abs() < 1e-9);
        last = now;
    }
}

#[test]
fn semi_cliques_of_random_sparse_graphs_satisfy_predicate() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let names: Vec<String> = (0..20).map(|i| format!("N{i}")).collect();
    let mut total = 0;
    for _ in 0..200 {
        let parents: Vec<Vec<usize>> = (0..20).map(|c| (0..c).filter(|_| rng.random_bool(0.1)).collect()).collect();
        let dag = Dag::from_parents(names.clone(), parents).unwrap();
        let adjacency = dag.skeleton_adjacency();
        for sc in find_semi_cliques(&dag, 3) {
            let members: Vec<usize> = sc.members.iter().map(|m| dag.index_of(m).unwrap()).collect();
            assert!(members.len() >= 3);
            assert!(is_semi_clique(&adjacency, &members), "{:?}", sc.members);
            for &v in &members {
                let links = members.iter().filter(|&&u| u != v && adjacency[v].contains(&u)).count();
                assert!(links >= members.len().div_ceil(2));
            }
            total += 1;
        }
    }
    assert!(total > 0);
}

#[test]
fn four_nodes_with_four_edges_form_a_semi_clique() {
    let names: Vec<String> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
    let e = |a: &str, b: &str| (a.to_string(), b.to_string());
    let dag = Dag::new(names, &[e("A", "B"), e("B", "C"), e("C", "D"), e("A", "D")]).unwrap();
    let found = find_semi_cliques(&dag, 4);
    assert_eq!(found.len(), 1);
    assert!((found[0].density - 4.0 / 6.0).abs() < 1e-12);
}

#[test]
fn proposal_on_three_clique() {
    let names: Vec<String> = ["P", "A", "B", "C", "Q"].iter().map(|s| s.to_string()).collect();
    let e = |a: &str, b: &str| (a.to_string(), b.to_string());
    let dag = Dag::new(
        names.clone(),
        &[e("A", "B"), e("A", "C"), e("B", "C"), e("P", "A"), e("C", "Q")],
    )
    .unwrap();
    let net = BayesianNetwork::uniform(names.iter().map(|n| Variable::binary(n.as_str())).collect(), dag).unwrap();
    let clique = SemiClique {
        members: vec!["A".into(), "B".into(), "C".into()],
        density: 1.0,
    };
    let proposal = propose_hidden(&net, &clique, "H").unwrap();
    let m = proposal.modified_net.dag();
    let idx = |n: &str| m.index_of(n).unwrap();
    assert_eq!(m.edge_count(), 5);
    for c in ["A", "B", "C"] {
        assert!(m.has_edge(idx("H"), idx(c)));
    }
    for (a, b) in [("A", "B"), ("A", "C"), ("B", "C")] {
        assert!(!m.has_edge(idx(a), idx(b)) && !m.has_edge(idx(b), idx(a)));
    }
    assert!(m.has_edge(idx("P"), idx("A")));
    assert!(m.has_edge(idx("C"), idx("Q")));
    assert_eq!(m.topological_order().len(), m.len());
    assert_eq!(proposal.modified_net.cardinality(idx("H")), 1);
    let members: BTreeSet<&str> = ["A", "B", "C"].into();
    assert!(find_semi_cliques(m, 3)
        .iter()
        .all(|s| !s.members.iter().all(|x| members.contains(x.as_str()))));
}

#[test]
fn sparse_data_gives_empty_report() {
    let names: Vec<String> = (0..6).map(|i| format!("X{i}")).collect();
    let e = |a: usize, b: usize| (names[a].clone(), names[b].clone());
    let dag = Dag::new(names.clone(), &[e(0, 1), e(2, 3), e(4, 5)]).unwrap();
    let cpds = (0..6)
        .map(|i| {
            let rows = if i % 2 == 0 { vec![vec![0.5, 0.5]] } else { vec![vec![0.8, 0.2], vec![0.3, 0.7]] };
            Cpd::from_rows(&names[i], 2, &rows).unwrap()
        })
        .collect();
    let net = BayesianNetwork::new(names.iter().map(|n| Variable::binary(n.as_str())).collect(), dag, cpds).unwrap();
    let data = ancestral_sample(&net, 3_000, 4).unwrap();
    let outcome = find_hidden_pipeline(&data, &prior(), &FindHiddenConfig::default()).unwrap();
    assert!(outcome.report.proposals.is_empty());
    assert_eq!(outcome.report.accepted, None);
    assert_eq!(outcome.accepted_net(), &outcome.base_net);
}

#[test]
fn planted_hidden_parent_is_found_and_sized() {
    let net = planted_clique_benchmark().unwrap();
    let data = observed_only(&ancestral_sample(&net, 5_000, 5).unwrap().hide_variables(&[PLANTED_HIDDEN]).unwrap());
    let config = FindHiddenConfig {
        seed: 5,
        ..Default::default()
    };
    let outcome = find_hidden_pipeline(&data, &prior(), &config).unwrap();
    let report = &outcome.report;
    let i = report.accepted.expect("a proposal is accepted");
    let p = &report.proposals[i];
    assert_eq!(p.clique, vec!["C1", "C2", "C3", "C4"]);
    assert!(p.chosen_k > 2);
    assert!(p.with_hidden.cs_score > report.base.cs_score);
    assert!(p.with_hidden.test_log_loss > p.binary.test_log_loss);
    assert_eq!(report.train_rows + report.test_rows, 5_000);
    let json = serde_json::to_string(report).unwrap();
    assert_eq!(&serde_json::from_str::<latcard::discovery::FindHiddenReport>(&json).unwrap(), report);
}

#[test]
fn incomplete_data_rejected() {
    let net = planted_clique_benchmark().unwrap();
    let data = ancestral_sample(&net, 100, 1).unwrap().hide_variables(&[PLANTED_HIDDEN]).unwrap();
    let err = find_hidden_pipeline(&data, &prior(), &FindHiddenConfig::default()).unwrap_err();
    assert!(err.to_string().contains(PLANTED_HIDDEN));
}
