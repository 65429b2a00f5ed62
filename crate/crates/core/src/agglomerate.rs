//! Cardinality selection for one hidden variable by agglomerative state
//! merging.
//!
//! The variable starts with one state per distinct configuration of its
//! Markov blanket in the data, which completes the data with a hard
//! assignment. Pairs of states are then merged greedily by the change in
//! complete-data score until a single state remains, and the cardinality
//! with the best score is returned.
//!
//! Internally states live in fixed slots numbered by their first leaf; a
//! merge folds the higher slot into the lower one. Slot order therefore
//! matches the dense, re-packed state order used in every output.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::{AssignmentMap, Dataset, HiddenAssignments};
use crate::em::complete_data_map;
use crate::error::{Error, Result};
use crate::network::BayesianNetwork;
use crate::scoring::{family_score_bde, ln_gamma, PriorSpec, SCORE_TOLERANCE};
use crate::stats::{check_merge, count_family, distinct_mb_configs, MbConfig, SufficientStatistics};

pub const TRACE_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgglomerateConfig {
    /// Upper bound on the number of initial states. Rarer blanket
    /// configurations beyond it are folded into their nearest kept one.
    pub max_initial_states: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeCandidate {
    pub i: usize,
    pub j: usize,
    pub delta: f64,
}

/// An initial state and the blanket configuration it stands for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub id: usize,
    /// `VAR=label` for each blanket variable.
    pub configuration: Vec<String>,
    pub rows: usize,
    /// Blanket configurations folded in by the initial-state cap.
    pub absorbed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub step: usize,
    /// Dense state indices before the merge, `i < j`.
    pub i: usize,
    pub j: usize,
    /// The same states named by their lowest leaf id.
    pub leaf_i: usize,
    pub leaf_j: usize,
    pub delta: f64,
    pub score_after: f64,
    pub k_after: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeTrace {
    pub version: u32,
    pub variable: String,
    pub blanket: Vec<String>,
    pub leaves: Vec<Leaf>,
    pub merges: Vec<MergeEvent>,
    /// From the initial cardinality down to 1.
    pub per_k_scores: Vec<KScore>,
    pub cap_triggered: bool,
    pub delta_evaluations: usize,
    pub chosen_k: usize,
}

impl MergeTrace {
    pub fn initial_k(&self) -> usize {
        self.leaves.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Merge tree in Graphviz format. Leaves show their blanket
    /// configuration, internal nodes their step and score change; the
    /// states present at the chosen cardinality are drawn as diamonds.
    pub fn to_dot(&self) -> String {
        let mut node: Vec<String> = (0..self.leaves.len()).map(|i| format!("leaf{i}")).collect();
        let mut out = String::from("digraph merge_trace {\n  rankdir=BT;\n  node [shape=box];\n");
        let frontier_step = self.leaves.len() - self.chosen_k;
        let mut frontier: Vec<String> = Vec::new();
        if frontier_step == 0 {
            frontier = node.clone();
        }
        for leaf in &self.leaves {
            let _ = writeln!(
                out,
                "  leaf{} [label=\"{}\\nn={}\"];",
                leaf.id,
                leaf.configuration.join(", ").replace('"', "'"),
                leaf.rows
            );
        }
        for ev in &self.merges {
            let name = format!("m{}", ev.step);
            let _ = writeln!(out, "  {name} [label=\"{}\\nΔ={}\"];", ev.step, ev.delta);
            let _ = writeln!(out, "  {} -> {name};", node[ev.leaf_i]);
            let _ = writeln!(out, "  {} -> {name};", node[ev.leaf_j]);
            node[ev.leaf_i] = name;
            if ev.step == frontier_step {
                let mut live: Vec<usize> = self.merges[..ev.step].iter().map(|e| e.leaf_j).collect();
                live.sort_unstable();
                frontier = (0..self.leaves.len())
                    .filter(|l| live.binary_search(l).is_err())
                    .map(|l| node[l].clone())
                    .collect();
            }
        }
        for n in &frontier {
            let _ = writeln!(out, "  {n} [shape=diamond];");
        }
        out.push_str("}\n");
        out
    }
}

/// (k, score) pairs from the initial cardinality down to one state.
pub fn score_curve(trace: &MergeTrace) -> Vec<(usize, f64)> {
    trace.per_k_scores.iter().map(|p| (p.k, p.score)).collect()
}

#[derive(Clone, Debug)]
pub struct CardinalityResult {
    pub chosen_k: usize,
    pub sigma: AssignmentMap,
    pub score_at_k: f64,
    /// MAP parameters of the completed data at `chosen_k`.
    pub warm_start_params: BayesianNetwork,
}

/// Part of the score change from merging states `a` and `b` along `axis`
/// of a family table that depends on the two states. Only their cells
/// enter.
pub(crate) fn local_merge_delta(dims: &[usize], axis: usize, counts: &[f64], alpha: f64, a: usize, b: usize) -> f64 {
    let cell = |n: f64| if n > 0.0 { ln_gamma(n + alpha) - ln_gamma(alpha) } else { 0.0 };
    if axis == 0 {
        let configs: usize = dims[1..].iter().product();
        let (ia, ib) = (a * configs, b * configs);
        let mut delta = 0.0;
        for u in 0..configs {
            let (na, nb) = (counts[ia + u], counts[ib + u]);
            if na > 0.0 && nb > 0.0 {
                delta += cell(na + nb) - cell(na) - cell(nb);
            }
        }
        return delta;
    }
    let child = dims[0];
    let a_u = child as f64 * alpha;
    let stride0: usize = dims[1..].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[1..axis].iter().product();
    let span = dims[axis] * inner;
    let config_term = |n_u: f64, cells: f64| {
        if n_u > 0.0 {
            ln_gamma(a_u) - ln_gamma(n_u + a_u) + cells
        } else {
            0.0
        }
    };
    let mut delta = 0.0;
    for o in 0..outer {
        for k in 0..inner {
            let ca = o * span + a * inner + k;
            let cb = o * span + b * inner + k;
            let (mut na_u, mut nb_u) = (0.0, 0.0);
            let (mut cells_a, mut cells_b, mut cells_m) = (0.0, 0.0, 0.0);
            for x in 0..child {
                let (na, nb) = (counts[x * stride0 + ca], counts[x * stride0 + cb]);
                na_u += na;
                nb_u += nb;
                cells_a += cell(na);
                cells_b += cell(nb);
                cells_m += cell(na + nb);
            }
            if na_u == 0.0 || nb_u == 0.0 {
                continue;
            }
            delta += config_term(na_u + nb_u, cells_m) - config_term(na_u, cells_a) - config_term(nb_u, cells_b);
        }
    }
    delta
}

/// Score change of the variable's own family when it drops from `k` to
/// `k - 1` live states, given the per-configuration totals `n_u`. The same
/// for every pair.
pub(crate) fn cardinality_delta(totals: &[f64], alpha: f64, k: usize) -> f64 {
    let (before, after) = (k as f64 * alpha, (k - 1) as f64 * alpha);
    totals
        .iter()
        .filter(|&&n| n > 0.0)
        .map(|&n| ln_gamma(after) - ln_gamma(n + after) - ln_gamma(before) + ln_gamma(n + before))
        .sum()
}

/// Per-configuration totals of a `[child][config]` table.
fn config_totals(dims: &[usize], counts: &[f64]) -> Vec<f64> {
    let configs: usize = dims[1..].iter().product();
    let mut totals = vec![0.0; configs];
    for (idx, &c) in counts.iter().enumerate() {
        totals[idx % configs] += c;
    }
    totals
}

/// Score change of merging states `i` and `j` of `var`, computed from the
/// families that contain `var` (its own and its children's).
pub fn delta_score_merge(
    families: &[SufficientStatistics],
    prior: &PriorSpec,
    var: &str,
    i: usize,
    j: usize,
) -> Result<f64> {
    let mut delta = 0.0;
    for stats in families {
        let axis = stats.axis_of(var).ok_or_else(|| Error::InvalidMerge {
            variable: var.to_string(),
            i,
            j,
            reason: format!("not in the family of `{}`", stats.child),
        })?;
        check_merge(var, i, j, stats.cards[axis])?;
        let counts: Vec<f64> = stats.counts.iter().map(|&c| c as f64).collect();
        delta += local_merge_delta(&stats.cards, axis, &counts, prior.alpha_cell, i, j);
        if axis == 0 {
            delta += cardinality_delta(&config_totals(&stats.cards, &counts), prior.alpha_cell, stats.cards[0]);
        }
    }
    Ok(delta)
}

struct LocalFamily {
    dims: Vec<usize>,
    axis: usize,
    counts: Vec<f64>,
    template: SufficientStatistics,
}

impl LocalFamily {
    fn fold(&mut self, a: usize, b: usize) {
        let inner: usize = self.dims[self.axis + 1..].iter().product();
        let outer: usize = self.dims[..self.axis].iter().product();
        let span = self.dims[self.axis] * inner;
        for o in 0..outer {
            for k in 0..inner {
                let (ia, ib) = (o * span + a * inner + k, o * span + b * inner + k);
                self.counts[ia] += self.counts[ib];
                self.counts[ib] = 0.0;
            }
        }
    }

    /// Table in dense state order over the live slots.
    fn dense(&self, alive: &[bool]) -> SufficientStatistics {
        let live: Vec<usize> = (0..alive.len()).filter(|&s| alive[s]).collect();
        let mut dims = self.dims.clone();
        dims[self.axis] = live.len();
        let mut out = SufficientStatistics::zeros(
            self.template.child.clone(),
            self.template.parents.clone(),
            dims.clone(),
        );
        let inner: usize = self.dims[self.axis + 1..].iter().product();
        let outer: usize = self.dims[..self.axis].iter().product();
        for o in 0..outer {
            for (t, &s) in live.iter().enumerate() {
                for k in 0..inner {
                    let from = (o * self.dims[self.axis] + s) * inner + k;
                    let to = (o * live.len() + t) * inner + k;
                    out.counts[to] = self.counts[from] as u64;
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    delta: f64,
    a: usize,
    b: usize,
    gen_a: u32,
    gen_b: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // max-heap: larger delta first, then the lexicographically smaller pair
    fn cmp(&self, other: &Self) -> Ordering {
        self.delta
            .total_cmp(&other.delta)
            .then_with(|| (other.a, other.b).cmp(&(self.a, self.b)))
    }
}

/// A running agglomeration. [`agglomerate`] drives it to completion; the
/// step-wise interface exposes intermediate state for inspection.
pub struct Agglomeration<'a> {
    net: &'a BayesianNetwork,
    data: &'a Dataset,
    sigma_others: HiddenAssignments,
    prior: PriorSpec,
    variable: String,
    blanket: Vec<String>,
    leaves: Vec<Leaf>,
    leaf_of_row: Vec<u32>,
    families: Vec<LocalFamily>,
    own_totals: Vec<f64>,
    alive: Vec<bool>,
    generation: Vec<u32>,
    heap: BinaryHeap<Entry>,
    score: f64,
    merges: Vec<MergeEvent>,
    per_k: Vec<KScore>,
    cap_triggered: bool,
    delta_evaluations: usize,
}

impl<'a> Agglomeration<'a> {
    pub fn new(
        net: &'a BayesianNetwork,
        data: &'a Dataset,
        sigma_others: &HiddenAssignments,
        h: &str,
        prior: &PriorSpec,
        config: &AgglomerateConfig,
    ) -> Result<Self> {
        prior.validate()?;
        let hi = net.index_of(h)?;
        if !data.is_hidden(h)? {
            return Err(Error::Config(format!("`{h}` is observed in the data")));
        }
        let blanket_idx: Vec<usize> = net.dag().markov_blanket(hi).into_iter().collect();
        if blanket_idx.is_empty() {
            return Err(Error::EmptyBlanket(h.to_string()));
        }
        let blanket: Vec<String> = blanket_idx.iter().map(|&i| net.name(i).to_string()).collect();
        let mut sigma_others = sigma_others.clone();
        sigma_others.remove(h);
        let prior = prior.clone();

        let configs = distinct_mb_configs(data, &sigma_others, &blanket)?;
        let (kept, cap_triggered) = apply_cap(configs, config.max_initial_states)?;
        let mut leaf_of_row = vec![0u32; data.num_rows()];
        let mut leaves = Vec::with_capacity(kept.len());
        for (id, (cfg, absorbed)) in kept.iter().enumerate() {
            for &r in &cfg.rows {
                leaf_of_row[r] = id as u32;
            }
            leaves.push(Leaf {
                id,
                configuration: describe_config(data, &sigma_others, &blanket, &cfg.values),
                rows: cfg.rows.len(),
                absorbed: *absorbed,
            });
        }
        let k0 = leaves.len();

        let mut sigma_all = sigma_others.clone();
        sigma_all.insert(AssignmentMap::new(h, leaf_of_row.clone(), k0.max(1))?);
        let mut families = Vec::new();
        let mut own_totals = Vec::new();
        let mut score = 0.0;
        for i in 0..net.len() {
            let stats = count_family(data, &sigma_all, net, i)?;
            match stats.axis_of(h) {
                Some(axis) => {
                    let fam = LocalFamily {
                        dims: stats.cards.clone(),
                        axis,
                        counts: stats.counts.iter().map(|&c| c as f64).collect(),
                        template: SufficientStatistics::zeros(stats.child.clone(), stats.parents.clone(), vec![]),
                    };
                    if axis == 0 {
                        own_totals = config_totals(&fam.dims, &fam.counts);
                    }
                    score += family_score_bde(&stats, &prior)?.value;
                    families.push(fam);
                }
                None => score += family_score_bde(&stats, &prior)?.value,
            }
        }

        let mut agg = Agglomeration {
            net,
            data,
            sigma_others,
            prior,
            variable: h.to_string(),
            blanket,
            leaves,
            leaf_of_row,
            families,
            own_totals,
            alive: vec![true; k0],
            generation: vec![0; k0],
            heap: BinaryHeap::new(),
            score,
            merges: Vec::new(),
            per_k: vec![KScore { k: k0, score }],
            cap_triggered,
            delta_evaluations: 0,
        };
        for a in 0..k0 {
            for b in a + 1..k0 {
                agg.push_candidate(a, b);
            }
        }
        Ok(agg)
    }

    fn push_candidate(&mut self, a: usize, b: usize) {
        let delta = self.pair_delta(a, b);
        self.delta_evaluations += 1;
        self.heap.push(Entry {
            delta,
            a,
            b,
            gen_a: self.generation[a],
            gen_b: self.generation[b],
        });
    }

    fn is_current(&self, e: &Entry) -> bool {
        self.alive[e.a] && self.alive[e.b] && self.generation[e.a] == e.gen_a && self.generation[e.b] == e.gen_b
    }

    fn pair_delta(&self, a: usize, b: usize) -> f64 {
        self.families
            .iter()
            .map(|f| local_merge_delta(&f.dims, f.axis, &f.counts, self.prior.alpha_cell, a, b))
            .sum()
    }

    /// Part of every Δ at the current cardinality that no pair influences.
    fn common_delta(&self) -> f64 {
        cardinality_delta(&self.own_totals, self.prior.alpha_cell, self.num_states())
    }

    /// Δ of merging live slots `a` and `b`, recomputed from the tables.
    pub fn fresh_delta(&self, a: usize, b: usize) -> f64 {
        self.pair_delta(a, b) + self.common_delta()
    }

    pub fn num_states(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn delta_evaluations(&self) -> usize {
        self.delta_evaluations
    }

    /// Slot ids of the live states, in dense order.
    pub fn live_slots(&self) -> Vec<usize> {
        (0..self.alive.len()).filter(|&s| self.alive[s]).collect()
    }

    /// Cached candidates for every live pair, as slot ids.
    pub fn cached_candidates(&self) -> Vec<MergeCandidate> {
        let common = self.common_delta();
        let mut out: Vec<MergeCandidate> = self
            .heap
            .iter()
            .filter(|e| self.is_current(e))
            .map(|e| MergeCandidate {
                i: e.a,
                j: e.b,
                delta: e.delta + common,
            })
            .collect();
        out.sort_by_key(|c| (c.i, c.j));
        out
    }

    /// Performs the best merge. Returns `None` once one state is left.
    pub fn step(&mut self) -> Option<MergeEvent> {
        let best = loop {
            let e = self.heap.pop()?;
            if self.is_current(&e) {
                break e;
            }
        };
        // equal deltas within tolerance go to the smallest pair
        let mut ties = vec![best];
        while let Some(e) = self.heap.peek().copied() {
            if !self.is_current(&e) {
                self.heap.pop();
                continue;
            }
            if e.delta < best.delta - SCORE_TOLERANCE {
                break;
            }
            ties.push(self.heap.pop().unwrap());
        }
        let pick = ties
            .iter()
            .enumerate()
            .min_by_key(|(_, e)| (e.a, e.b))
            .map(|(n, _)| n)
            .unwrap();
        let chosen = ties.swap_remove(pick);
        self.heap.extend(ties);

        let (a, b) = (chosen.a, chosen.b);
        let delta = chosen.delta + self.common_delta();
        let dense = |s: usize| self.alive[..s].iter().filter(|&&x| x).count();
        let (i, j) = (dense(a), dense(b));
        for fam in &mut self.families {
            fam.fold(a, b);
        }
        self.alive[b] = false;
        self.generation[a] += 1;
        self.score += delta;
        let k_after = self.num_states();
        let event = MergeEvent {
            step: self.merges.len() + 1,
            i,
            j,
            leaf_i: a,
            leaf_j: b,
            delta,
            score_after: self.score,
            k_after,
        };
        self.merges.push(event.clone());
        self.per_k.push(KScore {
            k: k_after,
            score: self.score,
        });
        for x in self.live_slots() {
            if x != a {
                self.push_candidate(a.min(x), a.max(x));
            }
        }
        Some(event)
    }

    /// Current hard assignment in dense state order.
    pub fn current_assignment(&self) -> AssignmentMap {
        let live = self.live_slots();
        let slot_of_leaf = self.slot_of_leaf(self.merges.len());
        let dense_of_slot = |s: usize| live.binary_search(&s).expect("live slot");
        AssignmentMap {
            variable: self.variable.clone(),
            assignment: self
                .leaf_of_row
                .iter()
                .map(|&l| dense_of_slot(slot_of_leaf[l as usize]) as u32)
                .collect(),
            num_states: live.len(),
        }
    }

    /// Incrementally merged statistics of the families containing the
    /// variable, in dense state order.
    pub fn current_stats(&self) -> Vec<SufficientStatistics> {
        self.families.iter().map(|f| f.dense(&self.alive)).collect()
    }

    fn slot_of_leaf(&self, steps: usize) -> Vec<usize> {
        let mut slot: Vec<usize> = (0..self.leaves.len()).collect();
        for ev in &self.merges[..steps] {
            for s in slot.iter_mut() {
                if *s == ev.leaf_j {
                    *s = ev.leaf_i;
                }
            }
        }
        slot
    }

    /// Runs the remaining merges and picks the best cardinality.
    pub fn finish(mut self) -> Result<(MergeTrace, CardinalityResult)> {
        while self.step().is_some() {}
        let best = self
            .per_k
            .iter()
            .map(|p| p.score)
            .fold(f64::NEG_INFINITY, f64::max);
        let chosen = self
            .per_k
            .iter()
            .filter(|p| p.score >= best - SCORE_TOLERANCE)
            .min_by_key(|p| p.k)
            .copied()
            .expect("at least one cardinality");
        let k0 = self.leaves.len();
        let slot_of_leaf = self.slot_of_leaf(k0 - chosen.k);
        let mut live: Vec<usize> = slot_of_leaf.clone();
        live.sort_unstable();
        live.dedup();
        let dense: Vec<usize> = slot_of_leaf
            .iter()
            .map(|s| live.binary_search(s).unwrap())
            .collect();
        let sigma = AssignmentMap::new(
            self.variable.clone(),
            self.leaf_of_row.iter().map(|&l| dense[l as usize] as u32).collect(),
            chosen.k,
        )?;
        let mut completed = self.sigma_others.clone();
        completed.insert(sigma.clone());
        let warm_start_params = complete_data_map(self.net, self.data, &completed, &self.prior)?;

        let trace = MergeTrace {
            version: TRACE_VERSION,
            variable: self.variable.clone(),
            blanket: self.blanket.clone(),
            leaves: self.leaves,
            merges: self.merges,
            per_k_scores: self.per_k,
            cap_triggered: self.cap_triggered,
            delta_evaluations: self.delta_evaluations,
            chosen_k: chosen.k,
        };
        let result = CardinalityResult {
            chosen_k: chosen.k,
            sigma,
            score_at_k: chosen.score,
            warm_start_params,
        };
        Ok((trace, result))
    }
}

/// One state per observed Markov-blanket configuration of `h`.
pub fn init_states_from_mb(
    net: &BayesianNetwork,
    data: &Dataset,
    sigma_others: &HiddenAssignments,
    h: &str,
    config: &AgglomerateConfig,
) -> Result<AssignmentMap> {
    let agg = Agglomeration::new(net, data, sigma_others, h, &PriorSpec::default(), config)?;
    Ok(agg.current_assignment())
}

/// Agglomerates `h` to one state and returns the full trace and the best
/// cardinality.
pub fn agglomerate(
    net: &BayesianNetwork,
    data: &Dataset,
    sigma_others: &HiddenAssignments,
    h: &str,
    prior: &PriorSpec,
    config: &AgglomerateConfig,
) -> Result<(MergeTrace, CardinalityResult)> {
    Agglomeration::new(net, data, sigma_others, h, prior, config)?.finish()
}

/// Keeps the `cap` most frequent configurations and folds every other one
/// into the kept configuration at the smallest Hamming distance (ties go to
/// the more frequent). Returns kept configurations in first-occurrence order
/// with the number each absorbed.
fn apply_cap(configs: Vec<MbConfig>, cap: Option<usize>) -> Result<(Vec<(MbConfig, usize)>, bool)> {
    let cap = match cap {
        Some(0) => return Err(Error::Config("max_initial_states must be ≥ 1".into())),
        Some(c) if configs.len() > c => c,
        _ => return Ok((configs.into_iter().map(|c| (c, 0)).collect(), false)),
    };
    let mut by_freq: Vec<usize> = (0..configs.len()).collect();
    by_freq.sort_by(|&x, &y| configs[y].rows.len().cmp(&configs[x].rows.len()).then(x.cmp(&y)));
    let kept_ids = &by_freq[..cap];
    let mut kept: Vec<(MbConfig, usize)> = kept_ids.iter().map(|&k| (configs[k].clone(), 0)).collect();
    for &r in &by_freq[cap..] {
        let target = (0..cap)
            .min_by_key(|&t| {
                configs[kept_ids[t]]
                    .values
                    .iter()
                    .zip(&configs[r].values)
                    .filter(|(a, b)| a != b)
                    .count()
            })
            .unwrap();
        kept[target].0.rows.extend_from_slice(&configs[r].rows);
        kept[target].1 += 1;
    }
    let mut order: Vec<usize> = (0..cap).collect();
    order.sort_by_key(|&t| kept_ids[t]);
    let kept = order
        .into_iter()
        .map(|t| {
            let (mut cfg, absorbed) = kept[t].clone();
            cfg.rows.sort_unstable();
            (cfg, absorbed)
        })
        .collect();
    Ok((kept, true))
}

fn describe_config(data: &Dataset, sigma: &HiddenAssignments, blanket: &[String], values: &[u32]) -> Vec<String> {
    blanket
        .iter()
        .zip(values)
        .map(|(name, &v)| {
            let label = match data.variable(name) {
                Ok(var) if sigma.get(name).is_none() => var.states()[v as usize].clone(),
                _ => format!("s{v}"),
            };
            format!("{name}={label}")
        })
        .collect()
}
