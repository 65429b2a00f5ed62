//! Round-robin agglomeration over several hidden variables.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::agglomerate::{agglomerate, AgglomerateConfig};
use crate::data::{AssignmentMap, Dataset, HiddenAssignments};
use crate::em::complete_data_map;
use crate::error::{Error, Result};
use crate::network::BayesianNetwork;
use crate::scoring::{network_score, PriorSpec, SCORE_TOLERANCE};
use crate::stats::count_all_families;

pub const ROUND_LOG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HiddenPartition {
    /// Variables whose blanket holds no other hidden variable.
    pub decoupled: Vec<String>,
    /// Connected groups of variables that appear in each other's blankets.
    pub groups: Vec<Vec<String>>,
}

/// Splits `hidden` into decoupled variables and interacting groups, both in
/// the order of `hidden`.
pub fn partition_hidden(net: &BayesianNetwork, hidden: &[String]) -> Result<HiddenPartition> {
    let set: BTreeSet<String> = hidden.iter().cloned().collect();
    if set.len() != hidden.len() {
        return Err(Error::Config("hidden variables listed twice".into()));
    }
    let mut blankets = Vec::with_capacity(hidden.len());
    for h in hidden {
        blankets.push(net.markov_blanket(h)?);
    }
    let mut decoupled = Vec::new();
    let mut group_of: Vec<Option<usize>> = vec![None; hidden.len()];
    let mut groups: Vec<Vec<String>> = Vec::new();
    for start in 0..hidden.len() {
        if group_of[start].is_some() {
            continue;
        }
        if !blankets[start].iter().any(|m| set.contains(m)) {
            decoupled.push(hidden[start].clone());
            continue;
        }
        let g = groups.len();
        let mut members = BTreeSet::new();
        let mut stack = vec![start];
        group_of[start] = Some(g);
        while let Some(a) = stack.pop() {
            members.insert(a);
            for b in 0..hidden.len() {
                let linked = blankets[a].contains(&hidden[b]) || blankets[b].contains(&hidden[a]);
                if group_of[b].is_none() && linked {
                    group_of[b] = Some(g);
                    stack.push(b);
                }
            }
        }
        groups.push(members.into_iter().map(|i| hidden[i].clone()).collect());
    }
    Ok(HiddenPartition { decoupled, groups })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRobinConfig {
    /// Visiting order; defaults to the order the hidden set is given in.
    pub order: Option<Vec<String>>,
    pub agglomerate: AgglomerateConfig,
    /// Safety bound on full passes over the hidden set.
    pub max_rounds: usize,
}

impl Default for RoundRobinConfig {
    fn default() -> Self {
        RoundRobinConfig {
            order: None,
            agglomerate: AgglomerateConfig::default(),
            max_rounds: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundLogEntry {
    pub round: usize,
    pub variable: String,
    pub previous_k: usize,
    pub proposal_k: usize,
    pub accepted: bool,
    pub score_before: f64,
    pub score_after: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub version: u32,
    pub entries: Vec<RoundLogEntry>,
    pub cardinalities: BTreeMap<String, usize>,
    pub final_score: f64,
    pub converged: bool,
}

/// Mutable state of a round-robin run.
#[derive(Clone, Debug)]
pub struct RoundRobinState {
    pub sigmas: HiddenAssignments,
    pub prior: PriorSpec,
    pub dirty: BTreeSet<String>,
    pub score: f64,
    pub round_log: Vec<RoundLogEntry>,
}

#[derive(Clone, Debug)]
pub struct RoundRobinResult {
    pub sigmas: HiddenAssignments,
    pub cardinalities: BTreeMap<String, usize>,
    pub prior: PriorSpec,
    pub final_score: f64,
    pub round_log: Vec<RoundLogEntry>,
    pub converged: bool,
    /// MAP parameters of the data completed by `sigmas`.
    pub network: BayesianNetwork,
}

impl RoundRobinResult {
    pub fn log(&self) -> RoundLog {
        RoundLog {
            version: ROUND_LOG_VERSION,
            entries: self.round_log.clone(),
            cardinalities: self.cardinalities.clone(),
            final_score: self.final_score,
            converged: self.converged,
        }
    }
}

/// Complete-data score of `net` with every hidden variable filled in by
/// `sigmas` and weighted by `prior`.
pub fn completed_score(
    net: &BayesianNetwork,
    data: &Dataset,
    sigmas: &HiddenAssignments,
    prior: &PriorSpec,
) -> Result<f64> {
    let stats = count_all_families(data, sigmas, net)?;
    Ok(network_score(net.dag(), &stats, prior)?.total)
}

/// Starts every hidden variable at one state and agglomerates them in turn,
/// keeping a proposal only when it raises the total score.
pub fn round_robin_agglomerate(
    net: &BayesianNetwork,
    data: &Dataset,
    hidden: &[String],
    prior: &PriorSpec,
    config: &RoundRobinConfig,
) -> Result<RoundRobinResult> {
    prior.validate()?;
    let order = config.order.clone().unwrap_or_else(|| hidden.to_vec());
    let listed: BTreeSet<&String> = hidden.iter().collect();
    if order.len() != hidden.len() || order.iter().any(|h| !listed.contains(h)) || listed.len() != hidden.len() {
        return Err(Error::Config("visiting order must list each hidden variable once".into()));
    }
    for h in hidden {
        net.index_of(h)?;
        if !data.is_hidden(h)? {
            return Err(Error::Config(format!("`{h}` is observed in the data")));
        }
    }
    let prior = prior.clone();
    let sigmas: HiddenAssignments = hidden
        .iter()
        .map(|h| AssignmentMap::constant(h.as_str(), data.num_rows()))
        .collect();
    let score = completed_score(net, data, &sigmas, &prior)?;
    let mut state = RoundRobinState {
        sigmas,
        prior,
        dirty: hidden.iter().cloned().collect(),
        score,
        round_log: Vec::new(),
    };
    let hidden_set: BTreeSet<String> = hidden.iter().cloned().collect();
    let mut round = 0;
    while !state.dirty.is_empty() && round < config.max_rounds {
        round += 1;
        for h in &order {
            if !state.dirty.remove(h) {
                continue;
            }
            let previous_k = state.sigmas.get(h).map_or(1, |m| m.num_states);
            let (_, proposal) = agglomerate(net, data, &state.sigmas, h, &state.prior, &config.agglomerate)?;
            let accepted = proposal.score_at_k > state.score + SCORE_TOLERANCE;
            let score_before = state.score;
            if accepted {
                state.score = proposal.score_at_k;
                state.sigmas.insert(proposal.sigma);
                for m in net.markov_blanket(h)? {
                    if hidden_set.contains(&m) {
                        state.dirty.insert(m);
                    }
                }
            }
            state.round_log.push(RoundLogEntry {
                round,
                variable: h.clone(),
                previous_k,
                proposal_k: proposal.chosen_k,
                accepted,
                score_before,
                score_after: state.score,
            });
        }
    }
    let converged = state.dirty.is_empty();
    let network = complete_data_map(net, data, &state.sigmas, &state.prior)?;
    let cardinalities = state.sigmas.iter().map(|m| (m.variable.clone(), m.num_states)).collect();
    Ok(RoundRobinResult {
        sigmas: state.sigmas,
        cardinalities,
        prior: state.prior,
        final_score: state.score,
        round_log: state.round_log,
        converged,
        network,
    })
}
