//! Discrete Bayesian networks: variables, the directed acyclic graph, tabular
//! CPDs, and structural queries over them.
//!
//! Parent configurations are indexed in mixed radix with the last parent
//! varying fastest. Sufficient statistics, CPD tables and the JSON file
//! format all share this order.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};

/// A discrete variable with named states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, states: Vec<String>) -> Result<Self> {
        let name = name.into();
        if states.is_empty() {
            return Err(Error::InvalidVariable {
                name,
                reason: "cardinality must be at least 1".into(),
            });
        }
        let unique: BTreeSet<&String> = states.iter().collect();
        if unique.len() != states.len() {
            return Err(Error::InvalidVariable {
                name,
                reason: "state labels must be unique".into(),
            });
        }
        Ok(Variable { name, states })
    }

    /// A variable with `k` generated labels `s0..s{k-1}`.
    pub fn with_cardinality(name: impl Into<String>, k: usize) -> Result<Self> {
        Self::new(name, (0..k).map(|s| format!("s{s}")).collect())
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self::with_cardinality(name, 2).expect("two states")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Directed acyclic graph over named nodes. Parent lists are ordered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl Dag {
    /// Builds a graph from an edge list. Parent order follows edge order.
    pub fn new(names: Vec<String>, edges: &[(String, String)]) -> Result<Self> {
        let index = index_names(&names)?;
        let mut parents = vec![Vec::new(); names.len()];
        for (p, c) in edges {
            let pi = *index.get(p).ok_or_else(|| Error::UnknownVariable(p.clone()))?;
            let ci = *index.get(c).ok_or_else(|| Error::UnknownVariable(c.clone()))?;
            if !parents[ci].contains(&pi) {
                parents[ci].push(pi);
            }
        }
        Self::from_parents(names, parents)
    }

    pub fn from_parents(names: Vec<String>, parents: Vec<Vec<usize>>) -> Result<Self> {
        let index = index_names(&names)?;
        assert_eq!(names.len(), parents.len(), "one parent list per node");
        let mut children = vec![Vec::new(); names.len()];
        for (c, ps) in parents.iter().enumerate() {
            let unique: BTreeSet<usize> = ps.iter().copied().collect();
            if unique.len() != ps.len() {
                return Err(Error::InvalidCpd {
                    child: names[c].clone(),
                    reason: "repeated parent".into(),
                });
            }
            for &p in ps {
                if p >= names.len() {
                    return Err(Error::UnknownVariable(format!("#{p}")));
                }
                if p == c {
                    return Err(Error::Cycle(names[c].clone()));
                }
                children[p].push(c);
            }
        }
        let topo = topological_order(&parents, &children).map_err(|i| Error::Cycle(names[i].clone()))?;
        Ok(Dag {
            names,
            index,
            parents,
            children,
            topo,
        })
    }

    /// Graph with nodes and no edges.
    pub fn empty(names: Vec<String>) -> Result<Self> {
        let n = names.len();
        Self::from_parents(names, vec![Vec::new(); n])
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn parent_lists(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.parents[child].contains(&parent)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// True when `to` is reachable from `from` along directed edges.
    pub fn reachable(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(self.children[v].iter().copied());
        }
        false
    }

    /// Parents, children and spouses of `i`, excluding `i` itself.
    pub fn markov_blanket(&self, i: usize) -> BTreeSet<usize> {
        let mut mb: BTreeSet<usize> = self.parents[i].iter().copied().collect();
        for &c in &self.children[i] {
            mb.insert(c);
            mb.extend(self.parents[c].iter().copied());
        }
        mb.remove(&i);
        mb
    }

    /// Undirected adjacency of the skeleton.
    pub fn skeleton_adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.len()];
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                adj[p].insert(c);
                adj[c].insert(p);
            }
        }
        adj
    }

    /// Undirected adjacency of the moral graph: the skeleton plus edges
    /// between every pair of parents sharing a child.
    pub fn moral_adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.len()];
        for (c, ps) in self.parents.iter().enumerate() {
            for (a, &p) in ps.iter().enumerate() {
                adj[p].insert(c);
                adj[c].insert(p);
                for &q in &ps[a + 1..] {
                    adj[p].insert(q);
                    adj[q].insert(p);
                }
            }
        }
        adj
    }
}

fn index_names(names: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return Err(Error::DuplicateVariable(n.clone()));
        }
    }
    Ok(index)
}

/// Kahn's algorithm. On failure returns a node that lies on a cycle.
fn topological_order(parents: &[Vec<usize>], children: &[Vec<usize>]) -> std::result::Result<Vec<usize>, usize> {
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut queue: VecDeque<usize> = (0..parents.len()).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(parents.len());
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    if order.len() == parents.len() {
        Ok(order)
    } else {
        Err((0..parents.len()).find(|&i| indegree[i] > 0).unwrap_or(0))
    }
}

/// Mixed-radix index of a parent configuration, last parent fastest.
pub fn config_index(cards: &[usize], states: impl IntoIterator<Item = usize>) -> usize {
    cards
        .iter()
        .zip(states)
        .fold(0, |acc, (&card, s)| acc * card + s)
}

/// Inverse of [`config_index`].
pub fn config_states(cards: &[usize], mut index: usize) -> Vec<usize> {
    let mut states = vec![0; cards.len()];
    for (slot, &card) in states.iter_mut().zip(cards).rev() {
        *slot = index % card;
        index /= card;
    }
    states
}

/// Tabular conditional distribution, one row per parent configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpd {
    cardinality: usize,
    probs: Vec<f64>,
}

impl Cpd {
    pub const ROW_TOLERANCE: f64 = 1e-9;

    /// `rows[u][x]` is P(child = x | parents = u).
    pub fn from_rows(child: &str, cardinality: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut probs = Vec::with_capacity(rows.len() * cardinality);
        for (u, row) in rows.iter().enumerate() {
            if row.len() != cardinality {
                return Err(Error::InvalidCpd {
                    child: child.to_string(),
                    reason: format!("row {u} has {} entries, expected {cardinality}", row.len()),
                });
            }
            probs.extend_from_slice(row);
        }
        let cpd = Cpd { cardinality, probs };
        cpd.validate(child)?;
        Ok(cpd)
    }

    pub fn uniform(cardinality: usize, configs: usize) -> Self {
        Cpd {
            cardinality,
            probs: vec![1.0 / cardinality as f64; cardinality * configs],
        }
    }

    fn validate(&self, child: &str) -> Result<()> {
        for (u, row) in self.probs.chunks(self.cardinality).enumerate() {
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::InvalidCpd {
                    child: child.to_string(),
                    reason: format!("row {u} has a negative or non-finite entry"),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > Self::ROW_TOLERANCE {
                return Err(Error::InvalidCpd {
                    child: child.to_string(),
                    reason: format!("row {u} sums to {sum}"),
                });
            }
        }
        Ok(())
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn num_configs(&self) -> usize {
        self.probs.len() / self.cardinality
    }

    pub fn prob(&self, config: usize, state: usize) -> f64 {
        self.probs[config * self.cardinality + state]
    }

    pub fn row(&self, config: usize) -> &[f64] {
        &self.probs[config * self.cardinality..(config + 1) * self.cardinality]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.probs.chunks(self.cardinality).map(<[f64]>::to_vec).collect()
    }
}

/// A DAG with one CPD per node. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesianNetwork {
    variables: Vec<Variable>,
    dag: Dag,
    cpds: Vec<Cpd>,
}

impl BayesianNetwork {
    /// `cpds[i]` must be laid out for the parent order of `dag.parents(i)`.
    pub fn new(variables: Vec<Variable>, dag: Dag, cpds: Vec<Cpd>) -> Result<Self> {
        if variables.len() != dag.len() || cpds.len() != dag.len() {
            return Err(Error::Config(format!(
                "{} variables, {} nodes and {} cpds do not line up",
                variables.len(),
                dag.len(),
                cpds.len()
            )));
        }
        for (i, v) in variables.iter().enumerate() {
            if v.name() != dag.name(i) {
                return Err(Error::Config(format!(
                    "variable `{}` is at node position of `{}`",
                    v.name(),
                    dag.name(i)
                )));
            }
        }
        let net = BayesianNetwork { variables, dag, cpds };
        for i in 0..net.len() {
            let expected = net.num_configs(i);
            let cpd = &net.cpds[i];
            if cpd.cardinality() != net.variables[i].cardinality() || cpd.num_configs() != expected {
                return Err(Error::InvalidCpd {
                    child: net.name(i).to_string(),
                    reason: format!(
                        "table is {}x{}, expected {}x{}",
                        cpd.num_configs(),
                        cpd.cardinality(),
                        expected,
                        net.variables[i].cardinality()
                    ),
                });
            }
        }
        Ok(net)
    }

    /// Network over `dag` with uniform CPDs.
    pub fn uniform(variables: Vec<Variable>, dag: Dag) -> Result<Self> {
        let cpds = (0..dag.len())
            .map(|i| {
                let configs = dag.parents(i).iter().map(|&p| variables[p].cardinality()).product();
                Cpd::uniform(variables[i].cardinality(), configs)
            })
            .collect();
        Self::new(variables, dag, cpds)
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, i: usize) -> &Variable {
        &self.variables[i]
    }

    pub fn name(&self, i: usize) -> &str {
        self.variables[i].name()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.dag.index_of(name)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpd(&self, i: usize) -> &Cpd {
        &self.cpds[i]
    }

    pub fn cpds(&self) -> &[Cpd] {
        &self.cpds
    }

    pub fn cardinality(&self, i: usize) -> usize {
        self.variables[i].cardinality()
    }

    pub fn parent_cards(&self, i: usize) -> Vec<usize> {
        self.dag.parents(i).iter().map(|&p| self.cardinality(p)).collect()
    }

    pub fn num_configs(&self, i: usize) -> usize {
        self.parent_cards(i).iter().product()
    }

    /// Parent configuration index of node `i` under a full assignment.
    pub fn config_of(&self, i: usize, assignment: &[usize]) -> usize {
        self.dag
            .parents(i)
            .iter()
            .fold(0, |acc, &p| acc * self.cardinality(p) + assignment[p])
    }

    pub fn markov_blanket(&self, name: &str) -> Result<BTreeSet<String>> {
        let i = self.index_of(name)?;
        Ok(self
            .dag
            .markov_blanket(i)
            .into_iter()
            .map(|j| self.name(j).to_string())
            .collect())
    }

    /// log P(x) for a full assignment given in node order. Zero factors give
    /// negative infinity.
    pub fn joint_log_prob(&self, assignment: &[Option<usize>]) -> Result<f64> {
        let missing: Vec<String> = (0..self.len())
            .filter(|&i| assignment.get(i).copied().flatten().is_none())
            .map(|i| self.name(i).to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::PartialAssignment(missing));
        }
        let full: Vec<usize> = assignment[..self.len()].iter().map(|s| s.unwrap()).collect();
        for (i, &s) in full.iter().enumerate() {
            if s >= self.cardinality(i) {
                return Err(Error::StateOutOfRange {
                    variable: self.name(i).to_string(),
                    state: s,
                    cardinality: self.cardinality(i),
                });
            }
        }
        Ok(self.log_prob_full(&full))
    }

    /// Unchecked variant of [`Self::joint_log_prob`].
    pub fn log_prob_full(&self, assignment: &[usize]) -> f64 {
        (0..self.len())
            .map(|i| self.family_log_prob(i, assignment))
            .sum()
    }

    pub fn family_log_prob(&self, i: usize, assignment: &[usize]) -> f64 {
        let p = self.cpds[i].prob(self.config_of(i, assignment), assignment[i]);
        if p > 0.0 {
            p.ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    /// True iff the Markov blanket of `h` holds no other member of `hidden`.
    pub fn is_decoupled_hidden(&self, h: &str, hidden: &BTreeSet<String>) -> Result<bool> {
        if !hidden.contains(h) {
            return Err(Error::NotHidden(h.to_string()));
        }
        for v in hidden {
            self.index_of(v)?;
        }
        Ok(self
            .markov_blanket(h)?
            .iter()
            .all(|m| !hidden.contains(m)))
    }

    /// Copy of the network where `name` has `k` states. CPDs of the variable
    /// and of its children are reset to uniform.
    pub fn with_cardinality(&self, name: &str, k: usize) -> Result<Self> {
        let h = self.index_of(name)?;
        let mut variables = self.variables.clone();
        variables[h] = if self.cardinality(h) == k {
            self.variables[h].clone()
        } else {
            Variable::with_cardinality(name, k)?
        };
        let mut cpds = self.cpds.clone();
        for i in std::iter::once(h).chain(self.dag.children(h).iter().copied()) {
            let configs = self.dag.parents(i).iter().map(|&p| variables[p].cardinality()).product();
            cpds[i] = Cpd::uniform(variables[i].cardinality(), configs);
        }
        Self::new(variables, self.dag.clone(), cpds)
    }

    pub fn with_cpds(&self, cpds: Vec<Cpd>) -> Result<Self> {
        Self::new(self.variables.clone(), self.dag.clone(), cpds)
    }

    pub fn with_variables_and_cpds(&self, variables: Vec<Variable>, cpds: Vec<Cpd>) -> Result<Self> {
        Self::new(variables, self.dag.clone(), cpds)
    }
}

pub mod json {
    //! Network file format.
    //!
    //! ```json
    //! { "variables": [{"name": "A", "states": ["a0", "a1"]}],
    //!   "edges": [["A", "B"]],
    //!   "cpds": [{"child": "B", "parents": ["A"], "table": [[0.9, 0.1], [0.2, 0.8]]}] }
    //! ```
    //!
    //! `table` has one row per parent configuration (last parent fastest) and
    //! one column per child state. Probabilities are written with 17
    //! significant digits so values survive a round trip bit for bit.

    use std::collections::BTreeSet;
    use std::path::Path;

    use serde::{Deserialize, Serialize, Serializer};
    use serde_json::value::RawValue;

    use super::{BayesianNetwork, Cpd, Dag, Variable};
    use crate::error::{Error, Result};

    #[derive(Debug, Serialize, Deserialize)]
    pub struct VariableSpec {
        pub name: String,
        pub states: Vec<String>,
    }

    #[derive(Debug, Serialize, Deserialize)]
    pub struct CpdSpec {
        pub child: String,
        pub parents: Vec<String>,
        #[serde(serialize_with = "serialize_table")]
        pub table: Vec<Vec<f64>>,
    }

    #[derive(Debug, Serialize, Deserialize)]
    pub struct NetworkFile {
        pub variables: Vec<VariableSpec>,
        pub edges: Vec<(String, String)>,
        pub cpds: Vec<CpdSpec>,
    }

    fn serialize_table<S: Serializer>(table: &[Vec<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw: Vec<Vec<Box<RawValue>>> = table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| RawValue::from_string(format!("{p:.16e}")).expect("valid number"))
                    .collect()
            })
            .collect();
        raw.serialize(s)
    }

    impl NetworkFile {
        pub fn from_network(net: &BayesianNetwork) -> Self {
            let dag = net.dag();
            NetworkFile {
                variables: net
                    .variables()
                    .iter()
                    .map(|v| VariableSpec {
                        name: v.name().to_string(),
                        states: v.states().to_vec(),
                    })
                    .collect(),
                edges: dag
                    .edges()
                    .into_iter()
                    .map(|(p, c)| (dag.name(p).to_string(), dag.name(c).to_string()))
                    .collect(),
                cpds: (0..net.len())
                    .map(|i| CpdSpec {
                        child: net.name(i).to_string(),
                        parents: dag.parents(i).iter().map(|&p| dag.name(p).to_string()).collect(),
                        table: net.cpd(i).rows(),
                    })
                    .collect(),
            }
        }

        pub fn into_network(self) -> Result<BayesianNetwork> {
            let variables = self
                .variables
                .into_iter()
                .map(|v| Variable::new(v.name, v.states))
                .collect::<Result<Vec<_>>>()?;
            let names: Vec<String> = variables.iter().map(|v| v.name().to_string()).collect();
            let probe = Dag::empty(names.clone())?;
            let mut parents: Vec<Option<Vec<usize>>> = vec![None; names.len()];
            let mut tables: Vec<Option<Vec<Vec<f64>>>> = vec![None; names.len()];
            for spec in self.cpds {
                let c = probe.index_of(&spec.child)?;
                if parents[c].is_some() {
                    return Err(Error::InvalidCpd {
                        child: spec.child,
                        reason: "more than one cpd".into(),
                    });
                }
                parents[c] = Some(
                    spec.parents
                        .iter()
                        .map(|p| probe.index_of(p))
                        .collect::<Result<Vec<_>>>()?,
                );
                tables[c] = Some(spec.table);
            }
            let parents: Vec<Vec<usize>> = parents
                .into_iter()
                .enumerate()
                .map(|(i, p)| {
                    p.ok_or_else(|| Error::InvalidCpd {
                        child: names[i].clone(),
                        reason: "no cpd given".into(),
                    })
                })
                .collect::<Result<_>>()?;
            let dag = Dag::from_parents(names.clone(), parents)?;

            let declared: BTreeSet<(usize, usize)> = self
                .edges
                .iter()
                .map(|(p, c)| Ok((dag.index_of(p)?, dag.index_of(c)?)))
                .collect::<Result<_>>()?;
            let implied: BTreeSet<(usize, usize)> = dag.edges().into_iter().collect();
            if declared != implied {
                let diff: Vec<String> = declared
                    .symmetric_difference(&implied)
                    .map(|&(p, c)| format!("{}->{}", names[p], names[c]))
                    .collect();
                return Err(Error::Config(format!(
                    "edge list disagrees with cpd parents: {}",
                    diff.join(", ")
                )));
            }

            let cpds = tables
                .into_iter()
                .enumerate()
                .map(|(i, t)| Cpd::from_rows(&names[i], variables[i].cardinality(), &t.unwrap_or_default()))
                .collect::<Result<Vec<_>>>()?;
            BayesianNetwork::new(variables, dag, cpds)
        }
    }

    pub fn to_string(net: &BayesianNetwork) -> Result<String> {
        Ok(serde_json::to_string_pretty(&NetworkFile::from_network(net))?)
    }

    pub fn from_str(s: &str) -> Result<BayesianNetwork> {
        serde_json::from_str::<NetworkFile>(s)?.into_network()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<BayesianNetwork> {
        from_str(&std::fs::read_to_string(path)?)
    }

    pub fn write(net: &BayesianNetwork, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, to_string(net)?)?;
        Ok(())
    }
}
