//! Complete-data structure search and hidden-variable discovery over
//! semi-cliques.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::agglomerate::{agglomerate, AgglomerateConfig};
use crate::data::{Dataset, HiddenAssignments};
use crate::em::{complete_data_map, em_parameters, EmConfig, EmInit};
use crate::error::{Error, Result};
use crate::inference::DEFAULT_STATE_CAP;
use crate::network::{BayesianNetwork, Cpd, Dag, Variable};
use crate::scoring::{family_score_bde, log_loss, PriorSpec, SCORE_TOLERANCE};
use crate::stats::count_sufficient_stats;

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Add,
    Delete,
    Reverse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeMove {
    pub kind: MoveKind,
    pub parent: String,
    pub child: String,
    pub gain: f64,
    pub score_after: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HillClimbConfig {
    pub max_parents: usize,
    /// Starting structure as (parent, child) pairs; empty graph when unset.
    pub initial_edges: Option<Vec<(String, String)>>,
}

impl Default for HillClimbConfig {
    fn default() -> Self {
        HillClimbConfig {
            max_parents: 4,
            initial_edges: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HillClimbResult {
    pub dag: Dag,
    pub score: f64,
    pub moves: Vec<EdgeMove>,
}

/// BDe family scores keyed by child and sorted parent set.
struct FamilyCache<'a> {
    data: &'a Dataset,
    names: Vec<String>,
    prior: &'a PriorSpec,
    scores: HashMap<(usize, Vec<usize>), f64>,
    sigma: HiddenAssignments,
}

impl FamilyCache<'_> {
    fn score(&mut self, child: usize, parents: &[usize]) -> Result<f64> {
        let mut key = parents.to_vec();
        key.sort_unstable();
        if let Some(&v) = self.scores.get(&(child, key.clone())) {
            return Ok(v);
        }
        let names: Vec<String> = key.iter().map(|&p| self.names[p].clone()).collect();
        let stats = count_sufficient_stats(self.data, &self.sigma, &self.names[child], &names)?;
        let v = family_score_bde(&stats, self.prior)?.value;
        self.scores.insert((child, key), v);
        Ok(v)
    }
}

/// True when `to` can be reached from `from` along directed edges, ignoring
/// the edge `skip`.
fn reaches(parents: &[Vec<usize>], from: usize, to: usize, skip: Option<(usize, usize)>) -> bool {
    let n = parents.len();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            if skip != Some((p, c)) {
                children[p].push(c);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        stack.extend(children[v].iter().copied());
    }
    false
}

fn without(ps: &[usize], x: usize) -> Vec<usize> {
    ps.iter().copied().filter(|&p| p != x).collect()
}

fn with(ps: &[usize], x: usize) -> Vec<usize> {
    let mut out = ps.to_vec();
    out.push(x);
    out.sort_unstable();
    out
}

/// Greedy single-edge search over add, delete and reverse moves.
pub fn greedy_hill_climb(data: &Dataset, prior: &PriorSpec, config: &HillClimbConfig) -> Result<HillClimbResult> {
    prior.validate()?;
    if !data.is_complete() {
        return Err(Error::IncompleteData(data.hidden_variables().join(", ")));
    }
    let names: Vec<String> = data.variables().iter().map(|v| v.name().to_string()).collect();
    let n = names.len();
    let mut parents: Vec<Vec<usize>> = match &config.initial_edges {
        None => vec![Vec::new(); n],
        Some(edges) => {
            Dag::new(names.clone(), edges)?.parent_lists().to_vec()
        }
    };
    for ps in parents.iter_mut() {
        ps.sort_unstable();
    }
    let mut cache = FamilyCache {
        data,
        names: names.clone(),
        prior,
        scores: HashMap::new(),
        sigma: HiddenAssignments::new(),
    };
    let mut family: Vec<f64> = (0..n).map(|c| cache.score(c, &parents[c])).collect::<Result<_>>()?;
    let mut score: f64 = family.iter().sum();
    let mut moves = Vec::new();
    loop {
        // (gain, kind, parent, child), first in (kind, parent, child) order wins ties
        let mut best: Option<(f64, MoveKind, usize, usize)> = None;
        let mut consider = |gain: f64, kind, p, c| {
            if best.is_none_or(|(g, ..)| gain > g + SCORE_TOLERANCE) {
                best = Some((gain, kind, p, c));
            }
        };
        for p in 0..n {
            for c in 0..n {
                if p == c || parents[c].contains(&p) || parents[p].contains(&c) {
                    continue;
                }
                if parents[c].len() < config.max_parents && !reaches(&parents, c, p, None) {
                    consider(cache.score(c, &with(&parents[c], p))? - family[c], MoveKind::Add, p, c);
                }
            }
        }
        for p in 0..n {
            for c in 0..n {
                if parents[c].contains(&p) {
                    consider(cache.score(c, &without(&parents[c], p))? - family[c], MoveKind::Delete, p, c);
                }
            }
        }
        for p in 0..n {
            for c in 0..n {
                if parents[c].contains(&p) && parents[p].len() < config.max_parents && !reaches(&parents, p, c, Some((p, c)))
                {
                    let gain = cache.score(c, &without(&parents[c], p))? - family[c]
                        + cache.score(p, &with(&parents[p], c))?
                        - family[p];
                    consider(gain, MoveKind::Reverse, p, c);
                }
            }
        }
        let Some((gain, kind, p, c)) = best else { break };
        if gain <= SCORE_TOLERANCE {
            break;
        }
        match kind {
            MoveKind::Add => parents[c] = with(&parents[c], p),
            MoveKind::Delete => parents[c] = without(&parents[c], p),
            MoveKind::Reverse => {
                parents[c] = without(&parents[c], p);
                parents[p] = with(&parents[p], c);
            }
        }
        family[c] = cache.score(c, &parents[c])?;
        family[p] = cache.score(p, &parents[p])?;
        score = family.iter().sum();
        moves.push(EdgeMove {
            kind,
            parent: names[p].clone(),
            child: names[c].clone(),
            gain,
            score_after: score,
        });
    }
    Ok(HillClimbResult {
        dag: Dag::from_parents(names, parents)?,
        score,
        moves,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiClique {
    /// Sorted by name.
    pub members: Vec<String>,
    pub density: f64,
}

/// Every member adjacent to at least ⌈|S|/2⌉ other members.
pub fn is_semi_clique(adjacency: &[BTreeSet<usize>], members: &[usize]) -> bool {
    let need = members.len().div_ceil(2);
    members
        .iter()
        .all(|&v| members.iter().filter(|&&u| u != v && adjacency[v].contains(&u)).count() >= need)
}

fn inner_edges(adjacency: &[BTreeSet<usize>], members: &[usize]) -> usize {
    members
        .iter()
        .map(|&v| members.iter().filter(|&&u| u > v && adjacency[v].contains(&u)).count())
        .sum()
}

fn density(edges: usize, size: usize) -> f64 {
    if size < 2 {
        1.0
    } else {
        edges as f64 / (size * (size - 1) / 2) as f64
    }
}

/// Semi-cliques of the skeleton of `dag` with at least `min_size`
/// members. Each node seeds a greedy expansion that repeatedly adds the
/// neighbour giving the densest set; the largest prefix of that sequence
/// satisfying the predicate is kept. Results are deduplicated, reduced to
/// maximal sets and ordered by density, size, then names.
pub fn find_semi_cliques(dag: &Dag, min_size: usize) -> Vec<SemiClique> {
    let adjacency = dag.skeleton_adjacency();
    let n = dag.len();
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    for seed in 0..n {
        let mut members = vec![seed];
        let mut edges = 0usize;
        let mut best: Option<Vec<usize>> = None;
        loop {
            let mut pick: Option<(usize, usize)> = None;
            for (v, adj) in adjacency.iter().enumerate() {
                if members.contains(&v) {
                    continue;
                }
                let links = members.iter().filter(|&&u| adj.contains(&u)).count();
                if links > 0 && pick.is_none_or(|(_, l)| links > l) {
                    pick = Some((v, links));
                }
            }
            let Some((v, links)) = pick else { break };
            members.push(v);
            edges += links;
            if density(edges, members.len()) < 0.5 {
                break;
            }
            if members.len() >= min_size && is_semi_clique(&adjacency, &members) {
                let mut sorted = members.clone();
                sorted.sort_unstable();
                best = Some(sorted);
            }
        }
        if let Some(set) = best {
            found.insert(set);
        }
    }
    let sets: Vec<Vec<usize>> = found.into_iter().collect();
    let maximal: Vec<&Vec<usize>> = sets
        .iter()
        .filter(|s| !sets.iter().any(|t| t.len() > s.len() && s.iter().all(|x| t.contains(x))))
        .collect();
    let mut out: Vec<SemiClique> = maximal
        .into_iter()
        .map(|s| {
            let mut members: Vec<String> = s.iter().map(|&i| dag.name(i).to_string()).collect();
            members.sort();
            SemiClique {
                members,
                density: density(inner_edges(&adjacency, s), s.len()),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.density
            .total_cmp(&a.density)
            .then(b.members.len().cmp(&a.members.len()))
            .then_with(|| a.members.cmp(&b.members))
    });
    out
}

#[derive(Clone, Debug)]
pub struct HiddenProposal {
    pub base_net: BayesianNetwork,
    pub modified_net: BayesianNetwork,
    pub clique: SemiClique,
    pub hidden: String,
}

/// Adds a one-state variable `hidden` as a parent of every clique member and
/// removes all edges among the members. CPDs of the changed families become
/// uniform; all others are kept.
pub fn propose_hidden(net: &BayesianNetwork, clique: &SemiClique, hidden: &str) -> Result<HiddenProposal> {
    if net.index_of(hidden).is_ok() {
        return Err(Error::DuplicateVariable(hidden.to_string()));
    }
    let members: BTreeSet<usize> = clique.members.iter().map(|m| net.index_of(m)).collect::<Result<_>>()?;
    let h = net.len();
    let mut names: Vec<String> = net.dag().names().to_vec();
    names.push(hidden.to_string());
    let mut parents: Vec<Vec<usize>> = net.dag().parent_lists().to_vec();
    for &m in &members {
        parents[m].retain(|p| !members.contains(p));
        parents[m].push(h);
    }
    parents.push(Vec::new());
    let dag = Dag::from_parents(names, parents)?;
    let mut variables = net.variables().to_vec();
    variables.push(Variable::with_cardinality(hidden, 1)?);
    let cpds: Vec<Cpd> = (0..=net.len())
        .map(|i| {
            if i < net.len() && !members.contains(&i) {
                net.cpd(i).clone()
            } else {
                let configs = dag.parents(i).iter().map(|&p| variables[p].cardinality()).product();
                Cpd::uniform(variables[i].cardinality(), configs)
            }
        })
        .collect();
    Ok(HiddenProposal {
        base_net: net.clone(),
        modified_net: BayesianNetwork::new(variables, dag, cpds)?,
        clique: clique.clone(),
        hidden: hidden.to_string(),
    })
}

#[derive(Clone, Debug)]
pub struct FindHiddenConfig {
    pub seed: u64,
    pub test_fraction: f64,
    pub min_clique_size: usize,
    pub hill_climb: HillClimbConfig,
    pub agglomerate: AgglomerateConfig,
    /// Iteration limits for both EM runs; `init`, `restarts` and `seed` are
    /// set per run.
    pub em: EmConfig,
    /// Random restarts for the two-state comparison model.
    pub binary_restarts: usize,
}

impl Default for FindHiddenConfig {
    fn default() -> Self {
        FindHiddenConfig {
            seed: 0,
            test_fraction: 0.2,
            min_clique_size: 4,
            hill_climb: HillClimbConfig::default(),
            agglomerate: AgglomerateConfig::default(),
            em: EmConfig::default(),
            binary_restarts: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEval {
    pub cs_score: f64,
    /// Mean log-probability per test row; higher is better.
    pub test_log_loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposalReport {
    pub clique: Vec<String>,
    pub density: f64,
    pub hidden: String,
    pub initial_k: usize,
    pub chosen_k: usize,
    pub with_hidden: ModelEval,
    pub binary: ModelEval,
    pub cs_delta: f64,
    pub log_loss_delta: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FindHiddenReport {
    pub version: u32,
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub base_edges: Vec<(String, String)>,
    pub base: ModelEval,
    pub proposals: Vec<ProposalReport>,
    /// Index into `proposals` of the accepted proposal with the best CS.
    pub accepted: Option<usize>,
    /// Structure after a proposal is fixed; only parameters are refined.
    pub fine_tuning: String,
}

#[derive(Clone, Debug)]
pub struct FindHiddenOutcome {
    pub report: FindHiddenReport,
    pub base_net: BayesianNetwork,
    /// Parameters of each proposal's model with the chosen cardinality.
    pub proposal_nets: Vec<BayesianNetwork>,
}

impl FindHiddenOutcome {
    pub fn accepted_net(&self) -> &BayesianNetwork {
        self.report.accepted.map_or(&self.base_net, |i| &self.proposal_nets[i])
    }
}

fn fresh_name(taken: &Dataset, n: usize) -> String {
    let mut name = format!("H{n}");
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

/// Learns a base network, proposes a hidden parent for every semi-clique,
/// sizes it by agglomeration, refines parameters by EM and compares models
/// on training CS score and held-out log-loss.
pub fn find_hidden_pipeline(data: &Dataset, prior: &PriorSpec, config: &FindHiddenConfig) -> Result<FindHiddenOutcome> {
    if !data.is_complete() {
        return Err(Error::IncompleteData(data.hidden_variables().join(", ")));
    }
    if !(config.test_fraction > 0.0 && config.test_fraction < 1.0) {
        return Err(Error::Config("test_fraction must lie in (0, 1)".into()));
    }
    let (train, test) = data.split(config.test_fraction, config.seed);
    let climb = greedy_hill_climb(&train, prior, &config.hill_climb)?;
    let structure = BayesianNetwork::uniform(train.variables().to_vec(), climb.dag.clone())?;
    let base_net = complete_data_map(&structure, &train, &HiddenAssignments::new(), prior)?;
    let base = ModelEval {
        cs_score: climb.score,
        test_log_loss: log_loss(&base_net, &test, DEFAULT_STATE_CAP)?,
    };
    let cliques = find_semi_cliques(&climb.dag, config.min_clique_size);
    let mut proposals = Vec::new();
    let mut proposal_nets = Vec::new();
    for (n, clique) in cliques.iter().enumerate() {
        let name = fresh_name(data, n);
        let proposal = propose_hidden(&base_net, clique, &name)?;
        let hidden_var = Variable::with_cardinality(name.as_str(), 1)?;
        let train_h = train.with_hidden_column(hidden_var.clone())?;
        let test_h = test.with_hidden_column(hidden_var)?;
        let (trace, chosen) = agglomerate(
            &proposal.modified_net,
            &train_h,
            &HiddenAssignments::new(),
            &name,
            prior,
            &config.agglomerate,
        )?;
        let warm_cfg = EmConfig {
            init: EmInit::WarmStart(chosen.warm_start_params.clone()),
            restarts: 1,
            seed: config.seed,
            ..config.em.clone()
        };
        let warm = em_parameters(&chosen.warm_start_params, &train_h, prior, &warm_cfg)?;
        let with_hidden = ModelEval {
            cs_score: warm.cs_score.value,
            test_log_loss: log_loss(&warm.params, &test_h, config.em.state_cap)?,
        };
        let binary_net = proposal.modified_net.with_cardinality(&name, 2)?;
        let binary_cfg = EmConfig {
            init: EmInit::Random,
            restarts: config.binary_restarts,
            seed: config.seed.wrapping_add(n as u64 + 1),
            ..config.em.clone()
        };
        let binary_fit = em_parameters(&binary_net, &train_h, prior, &binary_cfg)?;
        let binary = ModelEval {
            cs_score: binary_fit.cs_score.value,
            test_log_loss: log_loss(&binary_fit.params, &test_h, config.em.state_cap)?,
        };
        proposals.push(ProposalReport {
            clique: clique.members.clone(),
            density: clique.density,
            hidden: name,
            initial_k: trace.initial_k(),
            chosen_k: chosen.chosen_k,
            cs_delta: with_hidden.cs_score - base.cs_score,
            log_loss_delta: with_hidden.test_log_loss - base.test_log_loss,
            accepted: with_hidden.cs_score > base.cs_score + SCORE_TOLERANCE,
            with_hidden,
            binary,
        });
        proposal_nets.push(warm.params);
    }
    let accepted = proposals
        .iter()
        .enumerate()
        .filter(|(_, p)| p.accepted)
        .max_by(|(i, a), (j, b)| a.with_hidden.cs_score.total_cmp(&b.with_hidden.cs_score).then(j.cmp(i)))
        .map(|(i, _)| i);
    let base_edges = climb
        .dag
        .edges()
        .into_iter()
        .map(|(p, c)| (climb.dag.name(p).to_string(), climb.dag.name(c).to_string()))
        .collect();
    Ok(FindHiddenOutcome {
        report: FindHiddenReport {
            version: REPORT_VERSION,
            seed: config.seed,
            train_rows: train.num_rows(),
            test_rows: test.num_rows(),
            base_edges,
            base,
            proposals,
            accepted,
            fine_tuning: "parameters only".into(),
        },
        base_net,
        proposal_nets,
    })
}
