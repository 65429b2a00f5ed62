//! Count tables N[x, u] per family and the merge operation on them.

use std::collections::HashMap;

use serde::Serialize;

use crate::data::{Column, Dataset, HiddenAssignments};
use crate::error::{Error, Result};
use crate::network::BayesianNetwork;

/// Counts for one family, indexed `[child state][parent configuration]`
/// with the last parent varying fastest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SufficientStatistics {
    pub child: String,
    pub parents: Vec<String>,
    /// Cardinalities, child first then parents in order.
    pub cards: Vec<usize>,
    pub counts: Vec<u64>,
}

impl SufficientStatistics {
    pub fn zeros(child: impl Into<String>, parents: Vec<String>, cards: Vec<usize>) -> Self {
        let size = cards.iter().product();
        SufficientStatistics {
            child: child.into(),
            parents,
            cards,
            counts: vec![0; size],
        }
    }

    pub fn child_card(&self) -> usize {
        self.cards[0]
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.cards[1..]
    }

    pub fn num_configs(&self) -> usize {
        self.cards[1..].iter().product()
    }

    pub fn get(&self, state: usize, config: usize) -> u64 {
        self.counts[state * self.num_configs() + config]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Position of `var` in the table axes: 0 for the child, 1.. for parents.
    pub fn axis_of(&self, var: &str) -> Option<usize> {
        if self.child == var {
            Some(0)
        } else {
            self.parents.iter().position(|p| p == var).map(|p| p + 1)
        }
    }

    /// Variable names along the table axes.
    pub fn axis_names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.child.as_str()).chain(self.parents.iter().map(String::as_str))
    }
}

/// Per-row values and cardinality of one variable, reading hidden columns
/// from their assignment map.
pub(crate) fn resolve_column<'a>(
    data: &'a Dataset,
    sigma: &'a HiddenAssignments,
    name: &str,
) -> Result<(&'a [u32], usize)> {
    match data.column(name)? {
        Column::Observed(values) => Ok((values, data.variable(name)?.cardinality())),
        Column::Hidden => {
            let map = sigma.get(name).ok_or_else(|| Error::MissingAssignment {
                variable: name.to_string(),
            })?;
            if map.assignment.len() != data.num_rows() {
                return Err(Error::Config(format!(
                    "assignment for `{name}` covers {} rows, dataset has {}",
                    map.assignment.len(),
                    data.num_rows()
                )));
            }
            Ok((&map.assignment, map.num_states))
        }
    }
}

/// Tallies the family of `child` with ordered `parents`.
pub fn count_sufficient_stats(
    data: &Dataset,
    sigma: &HiddenAssignments,
    child: &str,
    parents: &[String],
) -> Result<SufficientStatistics> {
    let mut columns = Vec::with_capacity(parents.len() + 1);
    let mut cards = Vec::with_capacity(parents.len() + 1);
    for name in std::iter::once(child).chain(parents.iter().map(String::as_str)) {
        let (col, card) = resolve_column(data, sigma, name)?;
        columns.push(col);
        cards.push(card);
    }
    let mut stats = SufficientStatistics::zeros(child, parents.to_vec(), cards);
    for r in 0..data.num_rows() {
        let idx = columns
            .iter()
            .zip(&stats.cards)
            .fold(0usize, |acc, (col, &card)| acc * card + col[r] as usize);
        stats.counts[idx] += 1;
    }
    Ok(stats)
}

/// Statistics of node `i`'s family in `net`.
pub fn count_family(
    data: &Dataset,
    sigma: &HiddenAssignments,
    net: &BayesianNetwork,
    i: usize,
) -> Result<SufficientStatistics> {
    let parents: Vec<String> = net
        .dag()
        .parents(i)
        .iter()
        .map(|&p| net.name(p).to_string())
        .collect();
    count_sufficient_stats(data, sigma, net.name(i), &parents)
}

/// Statistics of every family of `net`, in node order.
pub fn count_all_families(
    data: &Dataset,
    sigma: &HiddenAssignments,
    net: &BayesianNetwork,
) -> Result<Vec<SufficientStatistics>> {
    (0..net.len()).map(|i| count_family(data, sigma, net, i)).collect()
}

/// One distinct joint configuration of a Markov blanket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MbConfig {
    pub values: Vec<u32>,
    pub rows: Vec<usize>,
}

/// Distinct configurations of `mb` in the data, ordered by first occurrence.
pub fn distinct_mb_configs(data: &Dataset, sigma: &HiddenAssignments, mb: &[String]) -> Result<Vec<MbConfig>> {
    let columns = mb
        .iter()
        .map(|name| resolve_column(data, sigma, name).map(|(c, _)| c))
        .collect::<Result<Vec<_>>>()?;
    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut configs: Vec<MbConfig> = Vec::new();
    for r in 0..data.num_rows() {
        let key: Vec<u32> = columns.iter().map(|c| c[r]).collect();
        match seen.get(&key) {
            Some(&k) => configs[k].rows.push(r),
            None => {
                seen.insert(key.clone(), configs.len());
                configs.push(MbConfig {
                    values: key,
                    rows: vec![r],
                });
            }
        }
    }
    Ok(configs)
}

/// Maps old state `s` of a variable to its index after merging `i` and `j`:
/// the merged state takes the smaller index and later states shift down.
pub fn merged_index(s: usize, i: usize, j: usize) -> usize {
    let (lo, hi) = (i.min(j), i.max(j));
    match s.cmp(&hi) {
        std::cmp::Ordering::Equal => lo,
        std::cmp::Ordering::Greater => s - 1,
        std::cmp::Ordering::Less => s,
    }
}

/// Sums states `i` and `j` of `var` along its axis of the table.
pub fn merge_stats_states(
    stats: &SufficientStatistics,
    var: &str,
    i: usize,
    j: usize,
) -> Result<SufficientStatistics> {
    let axis = stats.axis_of(var).ok_or_else(|| Error::InvalidMerge {
        variable: var.to_string(),
        i,
        j,
        reason: format!("not in the family of `{}`", stats.child),
    })?;
    let card = stats.cards[axis];
    check_merge(var, i, j, card)?;
    let mut cards = stats.cards.clone();
    cards[axis] -= 1;
    let mut out = SufficientStatistics::zeros(stats.child.clone(), stats.parents.clone(), cards);
    for_each_cell_remapped(&stats.cards, &out.cards, axis, i, j, |from, to| {
        out.counts[to] += stats.counts[from];
    });
    Ok(out)
}

pub(crate) fn check_merge(var: &str, i: usize, j: usize, card: usize) -> Result<()> {
    let fail = |reason: String| {
        Err(Error::InvalidMerge {
            variable: var.to_string(),
            i,
            j,
            reason,
        })
    };
    if i == j {
        return fail("states must differ".into());
    }
    if i >= card || j >= card {
        return fail(format!("only {card} states"));
    }
    Ok(())
}

/// Visits every cell of a table with dims `old`, passing its flat index and
/// the flat index in the table `new` where states `i`, `j` on `axis` merged.
pub(crate) fn for_each_cell_remapped(
    old: &[usize],
    new: &[usize],
    axis: usize,
    i: usize,
    j: usize,
    mut f: impl FnMut(usize, usize),
) {
    let inner: usize = old[axis + 1..].iter().product();
    let outer: usize = old[..axis].iter().product();
    let (old_card, new_card) = (old[axis], new[axis]);
    for o in 0..outer {
        for s in 0..old_card {
            let t = merged_index(s, i, j);
            let from = (o * old_card + s) * inner;
            let to = (o * new_card + t) * inner;
            for k in 0..inner {
                f(from + k, to + k);
            }
        }
    }
}
