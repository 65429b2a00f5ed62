//! Closed-form BDe scoring of complete data.
//!
//! Every live (child state, parent configuration) cell carries the same
//! Dirichlet hyperparameter `alpha_cell`, whatever the cardinalities in
//! the family. A merged cell is again a single cell with `alpha_cell`.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::inference::RowEngine;
use crate::network::{BayesianNetwork, Dag};
use crate::stats::SufficientStatistics;

/// Absolute tolerance when deciding whether one score improves on another.
pub const SCORE_TOLERANCE: f64 = 1e-9;

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub alpha_cell: f64,
    /// log P(Pa = U), added once per family.
    pub structure_prior: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec {
            alpha_cell: 1.0,
            structure_prior: 0.0,
        }
    }
}

impl PriorSpec {
    pub fn new(alpha_cell: f64) -> Result<Self> {
        let prior = PriorSpec {
            alpha_cell,
            ..Default::default()
        };
        prior.validate()?;
        Ok(prior)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_cell > 0.0 && self.alpha_cell.is_finite()) {
            return Err(Error::Config(format!("alpha_cell must be > 0, got {}", self.alpha_cell)));
        }
        if !self.structure_prior.is_finite() {
            return Err(Error::Config("structure_prior must be finite".into()));
        }
        Ok(())
    }

    /// Hyperparameter table laid out like `stats.counts`.
    pub fn cell_alphas(&self, stats: &SufficientStatistics) -> Vec<f64> {
        vec![self.alpha_cell; stats.counts.len()]
    }
}

/// Score contribution of one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyScore {
    pub child: String,
    pub parents: Vec<String>,
    pub value: f64,
}

/// Σ_u [lnΓ(α_u) − lnΓ(N_u + α_u) + Σ_x (lnΓ(N_xu + α_xu) − lnΓ(α_xu))]
/// over a `[child][config]` table.
pub(crate) fn bde_table(child_card: usize, counts: &[f64], alpha: &[f64]) -> f64 {
    let configs = counts.len() / child_card;
    let mut value = 0.0;
    for u in 0..configs {
        let (mut n_u, mut a_u, mut cells) = (0.0, 0.0, 0.0);
        for x in 0..child_card {
            let idx = x * configs + u;
            let (n, a) = (counts[idx], alpha[idx]);
            if n > 0.0 {
                cells += ln_gamma(n + a) - ln_gamma(a);
            }
            n_u += n;
            a_u += a;
        }
        if n_u > 0.0 {
            value += ln_gamma(a_u) - ln_gamma(n_u + a_u) + cells;
        }
    }
    value
}

pub fn family_score_bde(stats: &SufficientStatistics, prior: &PriorSpec) -> Result<FamilyScore> {
    let counts: Vec<f64> = stats.counts.iter().map(|&c| c as f64).collect();
    let alpha = prior.cell_alphas(stats);
    Ok(FamilyScore {
        child: stats.child.clone(),
        parents: stats.parents.clone(),
        value: prior.structure_prior + bde_table(stats.child_card(), &counts, &alpha),
    })
}

/// BDe family score for fractional (expected) counts laid out like `shape`.
pub fn family_score_expected(shape: &SufficientStatistics, counts: &[f64], prior: &PriorSpec) -> Result<f64> {
    let alpha = prior.cell_alphas(shape);
    Ok(prior.structure_prior + bde_table(shape.child_card(), counts, &alpha))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkScore {
    pub total: f64,
    pub families: Vec<FamilyScore>,
}

/// Sum of family scores over the families of `dag`. Each node needs a table
/// whose parent list matches the graph.
pub fn network_score(dag: &Dag, stats: &[SufficientStatistics], prior: &PriorSpec) -> Result<NetworkScore> {
    let mut families = Vec::with_capacity(dag.len());
    for i in 0..dag.len() {
        let name = dag.name(i);
        let table = stats
            .iter()
            .find(|s| s.child == name)
            .ok_or_else(|| Error::MissingFamily(name.to_string()))?;
        let parents: Vec<&str> = dag.parents(i).iter().map(|&p| dag.name(p)).collect();
        if table.parents.iter().map(String::as_str).ne(parents.iter().copied()) {
            return Err(Error::MissingFamily(format!(
                "{name} | {} (have {name} | {})",
                parents.join(","),
                table.parents.join(",")
            )));
        }
        families.push(family_score_bde(table, prior)?);
    }
    Ok(NetworkScore {
        total: families.iter().map(|f| f.value).sum(),
        families,
    })
}

/// Mean log-probability of the test rows, summing over the states of every
/// network variable that is hidden in or absent from `test`.
pub fn log_loss(net: &BayesianNetwork, test: &Dataset, state_cap: usize) -> Result<f64> {
    if test.num_rows() == 0 {
        return Err(Error::Config("test set is empty".into()));
    }
    let patterns = test.observed_patterns(net)?;
    let hidden: Vec<usize> = patterns[0]
        .0
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_none())
        .map(|(i, _)| i)
        .collect();
    let engine = RowEngine::new(net, &hidden, state_cap)?;
    let mut total = 0.0;
    for (row, count) in &patterns {
        total += *count as f64 * engine.log_prob(row);
    }
    Ok(total / test.num_rows() as f64)
}
