//! Fixed benchmark networks with planted hidden variables.

use crate::error::Result;
use crate::network::{BayesianNetwork, Cpd, Dag, Variable};

fn build(variables: Vec<Variable>, edges: &[(&str, &str)], tables: Vec<Vec<Vec<f64>>>) -> Result<BayesianNetwork> {
    let names: Vec<String> = variables.iter().map(|v| v.name().to_string()).collect();
    let edges: Vec<(String, String)> = edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let dag = Dag::new(names, &edges)?;
    let cpds = variables
        .iter()
        .zip(&tables)
        .map(|(v, rows)| Cpd::from_rows(v.name(), v.cardinality(), rows))
        .collect::<Result<_>>()?;
    BayesianNetwork::new(variables, dag, cpds)
}

/// Rows of a `card`-state child that favours state `favoured[u]` under
/// parent configuration `u` with probability `p`.
fn peaked(card: usize, favoured: &[usize], p: f64) -> Vec<Vec<f64>> {
    let rest = (1.0 - p) / (card - 1) as f64;
    favoured
        .iter()
        .map(|&f| (0..card).map(|x| if x == f { p } else { rest }).collect())
        .collect()
}

/// Binary child whose P(1) is `hi` or `lo` according to a 0/1 code per
/// parent configuration.
fn coded(code: &[u8], hi: f64, lo: f64) -> Vec<Vec<f64>> {
    code.iter()
        .map(|&c| {
            let p = if c == 1 { hi } else { lo };
            vec![1.0 - p, p]
        })
        .collect()
}

/// Name of the hidden variable in [`single_hidden_benchmark`].
pub const SINGLE_HIDDEN: &str = "H";

/// Six nodes: binary root `A` → three-state `H` → four ternary children
/// `B`, `C`, `D`, `E`, each favouring a different state per value of `H`.
pub fn single_hidden_benchmark() -> Result<BayesianNetwork> {
    let t = |n: &str| Variable::with_cardinality(n, 3);
    let variables = vec![Variable::binary("A"), t("H")?, t("B")?, t("C")?, t("D")?, t("E")?];
    let edges = [("A", "H"), ("H", "B"), ("H", "C"), ("H", "D"), ("H", "E")];
    let tables = vec![
        vec![vec![0.5, 0.5]],
        vec![vec![0.6, 0.3, 0.1], vec![0.1, 0.3, 0.6]],
        peaked(3, &[0, 1, 2], 0.97),
        peaked(3, &[1, 2, 0], 0.97),
        peaked(3, &[2, 0, 1], 0.95),
        peaked(3, &[0, 2, 1], 0.95),
    ];
    build(variables, &edges, tables)
}

/// Hidden variables of [`multi_hidden_benchmark`] with their planted
/// cardinalities.
pub const MULTI_HIDDEN: [(&str, usize); 4] = [("h0", 3), ("h1", 2), ("h2", 4), ("h3", 3)];

/// Four interacting hidden variables with 3, 2, 4 and 3 states over binary
/// observables. Each has five children of its own whose codes differ in at
/// least three places between states; `h0` is a parent of `h1`, and the
/// children `s01`, `s12`, `s23` are shared by consecutive pairs.
pub fn multi_hidden_benchmark() -> Result<BayesianNetwork> {
    let (hi, lo) = (0.99, 0.01);
    let mut variables = vec![
        Variable::with_cardinality("h0", 3)?,
        Variable::with_cardinality("h1", 2)?,
        Variable::with_cardinality("h2", 4)?,
        Variable::with_cardinality("h3", 3)?,
    ];
    let mut edges: Vec<(String, String)> = vec![("h0".into(), "h1".into())];
    let mut tables = vec![
        vec![vec![0.3, 0.4, 0.3]],
        vec![vec![0.8, 0.2], vec![0.2, 0.8], vec![0.5, 0.5]],
        vec![vec![0.25; 4]],
        vec![vec![0.3, 0.35, 0.35]],
    ];
    // one code column per own child, one row per hidden state
    let own: [(&str, &[&[u8]]); 4] = [
        ("h0", &[&[0, 0, 0, 0, 0], &[1, 1, 1, 0, 0], &[0, 0, 1, 1, 1]]),
        ("h1", &[&[1, 1, 1, 0, 0], &[0, 0, 0, 1, 1]]),
        ("h2", &[&[0, 0, 0, 0, 0], &[1, 1, 1, 0, 0], &[0, 0, 1, 1, 1], &[1, 1, 0, 1, 1]]),
        ("h3", &[&[1, 0, 0, 1, 0], &[0, 1, 1, 1, 1], &[1, 1, 1, 0, 0]]),
    ];
    for (h, codes) in own {
        for c in 0..codes[0].len() {
            let name = format!("o_{h}_{c}");
            variables.push(Variable::binary(name.as_str()));
            edges.push((h.to_string(), name));
            let column: Vec<u8> = codes.iter().map(|row| row[c]).collect();
            tables.push(coded(&column, hi, lo));
        }
    }
    // shared children: parent configurations in mixed radix, second parent fastest
    let shared: [(&str, &str, &str, Vec<u8>); 3] = [
        ("s01", "h0", "h1", vec![1, 0, 0, 1, 1, 0]),
        ("s12", "h1", "h2", vec![1, 0, 1, 0, 0, 1, 0, 1]),
        ("s23", "h2", "h3", vec![1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 1]),
    ];
    for (name, a, b, code) in shared {
        variables.push(Variable::binary(name));
        edges.push((a.to_string(), name.to_string()));
        edges.push((b.to_string(), name.to_string()));
        tables.push(coded(&code, hi, lo));
    }
    let edge_refs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    build(variables, &edge_refs, tables)
}

/// Name of the hidden variable in [`planted_clique_benchmark`].
pub const PLANTED_HIDDEN: &str = "Z";

/// A four-state hidden `Z` with four four-state children `C1`..`C4`, next to
/// an unrelated pair `X` → `Y`. Dropping `Z` leaves the children densely
/// dependent.
pub fn planted_clique_benchmark() -> Result<BayesianNetwork> {
    let f = |n: &str| Variable::with_cardinality(n, 4);
    let variables = vec![
        f("Z")?,
        f("C1")?,
        f("C2")?,
        f("C3")?,
        f("C4")?,
        Variable::binary("X"),
        Variable::binary("Y"),
    ];
    let edges = [("Z", "C1"), ("Z", "C2"), ("Z", "C3"), ("Z", "C4"), ("X", "Y")];
    let tables = vec![
        vec![vec![0.25; 4]],
        peaked(4, &[0, 1, 2, 3], 0.85),
        peaked(4, &[1, 2, 3, 0], 0.85),
        peaked(4, &[2, 3, 0, 1], 0.85),
        peaked(4, &[3, 0, 1, 2], 0.85),
        vec![vec![0.6, 0.4]],
        vec![vec![0.8, 0.2], vec![0.3, 0.7]],
    ];
    build(variables, &edges, tables)
}

const ALARM_EDGES: [(&str, &str); 46] = [
    ("LVFAILURE", "HISTORY"),
    ("LVEDVOLUME", "CVP"),
    ("LVEDVOLUME", "PCWP"),
    ("HYPOVOLEMIA", "LVEDVOLUME"),
    ("LVFAILURE", "LVEDVOLUME"),
    ("HYPOVOLEMIA", "STROKEVOLUME"),
    ("LVFAILURE", "STROKEVOLUME"),
    ("ERRLOWOUTPUT", "HRBP"),
    ("HR", "HRBP"),
    ("ERRCAUTER", "HREKG"),
    ("HR", "HREKG"),
    ("ERRCAUTER", "HRSAT"),
    ("HR", "HRSAT"),
    ("ANAPHYLAXIS", "TPR"),
    ("ARTCO2", "EXPCO2"),
    ("VENTLUNG", "EXPCO2"),
    ("INTUBATION", "MINVOL"),
    ("VENTLUNG", "MINVOL"),
    ("FIO2", "PVSAT"),
    ("VENTALV", "PVSAT"),
    ("PVSAT", "SAO2"),
    ("SHUNT", "SAO2"),
    ("PULMEMBOLUS", "PAP"),
    ("PULMEMBOLUS", "SHUNT"),
    ("INTUBATION", "SHUNT"),
    ("INTUBATION", "PRESS"),
    ("KINKEDTUBE", "PRESS"),
    ("VENTTUBE", "PRESS"),
    ("MINVOLSET", "VENTMACH"),
    ("DISCONNECT", "VENTTUBE"),
    ("VENTMACH", "VENTTUBE"),
    ("INTUBATION", "VENTLUNG"),
    ("KINKEDTUBE", "VENTLUNG"),
    ("VENTTUBE", "VENTLUNG"),
    ("INTUBATION", "VENTALV"),
    ("VENTLUNG", "VENTALV"),
    ("VENTALV", "ARTCO2"),
    ("INSUFFANESTH", "CATECHOL"),
    ("SAO2", "CATECHOL"),
    ("TPR", "CATECHOL"),
    ("ARTCO2", "CATECHOL"),
    ("CATECHOL", "HR"),
    ("HR", "CO"),
    ("STROKEVOLUME", "CO"),
    ("CO", "BP"),
    ("TPR", "BP"),
];

/// Graph of the ALARM monitoring network (37 nodes, 46 edges).
pub fn alarm_structure() -> Result<Dag> {
    let mut names: Vec<String> = Vec::new();
    for (a, b) in ALARM_EDGES {
        for n in [a, b] {
            if !names.iter().any(|m| m == n) {
                names.push(n.to_string());
            }
        }
    }
    let edges: Vec<(String, String)> = ALARM_EDGES.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    Dag::new(names, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmarks_build() {
        assert_eq!(single_hidden_benchmark().unwrap().len(), 6);
        let multi = multi_hidden_benchmark().unwrap();
        for (h, k) in MULTI_HIDDEN {
            assert_eq!(multi.cardinality(multi.index_of(h).unwrap()), k);
        }
        assert_eq!(planted_clique_benchmark().unwrap().len(), 7);
    }

    #[test]
    fn alarm_has_37_nodes_and_46_edges() {
        let dag = alarm_structure().unwrap();
        assert_eq!(dag.len(), 37);
        assert_eq!(dag.edge_count(), 46);
    }
}
