#![allow(dead_code)]

use std::io::Write;

use latcard::data::{Column, Dataset};
use latcard::network::{BayesianNetwork, Cpd, Dag, Variable};
use rand::Rng;

/// Writes a line straight to the process stdout so it survives test
/// output capture.
pub fn announce(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

pub fn verdict(criterion: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    announce(&format!("criterion {criterion:>2}: {tag} {detail}"));
}

/// Random row of a probability table.
pub fn random_row<R: Rng>(rng: &mut R, card: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..card).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// Random network whose joint state space has at most `2^max_bits` states.
/// Nodes are created in topological order with up to three earlier parents.
pub fn random_network<R: Rng>(rng: &mut R, max_bits: f64) -> BayesianNetwork {
    let mut cards = Vec::new();
    let mut bits = 0.0;
    loop {
        let card = rng.random_range(2..=4usize);
        let b = (card as f64).log2();
        if bits + b > max_bits || cards.len() >= 9 {
            break;
        }
        bits += b;
        cards.push(card);
        if cards.len() >= 2 && rng.random_bool(0.15) {
            break;
        }
    }
    let n = cards.len();
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut parents = Vec::with_capacity(n);
    for i in 0..n {
        let mut ps: Vec<usize> = (0..i).filter(|_| rng.random_bool(0.4)).collect();
        ps.truncate(3);
        parents.push(ps);
    }
    let variables: Vec<Variable> = names
        .iter()
        .zip(&cards)
        .map(|(name, &k)| Variable::with_cardinality(name.as_str(), k).unwrap())
        .collect();
    let cpds = (0..n)
        .map(|i| {
            let configs: usize = parents[i].iter().map(|&p| cards[p]).product();
            let rows: Vec<Vec<f64>> = (0..configs).map(|_| random_row(rng, cards[i])).collect();
            Cpd::from_rows(&names[i], cards[i], &rows).unwrap()
        })
        .collect();
    let dag = Dag::from_parents(names, parents).unwrap();
    BayesianNetwork::new(variables, dag, cpds).unwrap()
}

/// Parent configuration index with the last parent varying fastest.
pub fn parent_config(net: &BayesianNetwork, i: usize, full: &[usize]) -> usize {
    net.dag()
        .parents(i)
        .iter()
        .fold(0, |acc, &p| acc * net.cardinality(p) + full[p])
}

/// Product of CPD entries for a full assignment.
pub fn joint_prob(net: &BayesianNetwork, full: &[usize]) -> f64 {
    (0..net.len())
        .map(|i| net.cpd(i).prob(parent_config(net, i, full), full[i]))
        .product()
}

/// Every full assignment of the network, first variable slowest.
pub fn all_assignments(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &k in cards {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..k).map(move |s| {
                    let mut next = prefix.clone();
                    next.push(s);
                    next
                })
            })
            .collect();
    }
    out
}

pub fn cards_of(net: &BayesianNetwork) -> Vec<usize> {
    (0..net.len()).map(|i| net.cardinality(i)).collect()
}

/// Keeps only the observed columns of `data`.
pub fn observed_only(data: &Dataset) -> Dataset {
    let (vars, cols): (Vec<Variable>, Vec<Column>) = data
        .variables()
        .iter()
        .zip(data.columns())
        .filter(|(_, c)| !c.is_hidden())
        .map(|(v, c)| (v.clone(), c.clone()))
        .unzip();
    Dataset::new(vars, cols, data.num_rows()).unwrap()
}

/// Dataset from integer columns, `None` for a hidden column.
pub fn dataset(variables: Vec<Variable>, columns: Vec<Option<Vec<u32>>>, rows: usize) -> Dataset {
    let columns = columns
        .into_iter()
        .map(|c| c.map_or(Column::Hidden, Column::Observed))
        .collect();
    Dataset::new(variables, columns, rows).unwrap()
}
