//! Exact inference over a small set of hidden variables by enumerating
//! their joint states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::BayesianNetwork;

/// Default cap on the number of joint hidden states.
pub const DEFAULT_STATE_CAP: usize = 10_000;

/// Joint posterior over the hidden variables of one row. `probs` is indexed
/// in mixed radix over `variables`, last variable fastest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Posterior {
    pub variables: Vec<String>,
    pub cards: Vec<usize>,
    pub probs: Vec<f64>,
    /// log P(observed part of the row).
    pub log_evidence: f64,
}

/// Evaluates rows that share one hidden set. Only families touching a
/// hidden variable vary across hidden states; the rest form a constant.
pub struct RowEngine<'a> {
    net: &'a BayesianNetwork,
    hidden: Vec<usize>,
    cards: Vec<usize>,
    size: usize,
    touched: Vec<usize>,
    fixed: Vec<usize>,
}

impl<'a> RowEngine<'a> {
    pub fn new(net: &'a BayesianNetwork, hidden: &[usize], cap: usize) -> Result<Self> {
        let cards: Vec<usize> = hidden.iter().map(|&h| net.cardinality(h)).collect();
        let size = cards
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .unwrap_or(usize::MAX);
        if size > cap {
            return Err(Error::StateSpaceTooLarge { size, cap });
        }
        let is_hidden = |v: usize| hidden.contains(&v);
        let (touched, fixed): (Vec<usize>, Vec<usize>) = (0..net.len())
            .partition(|&i| is_hidden(i) || net.dag().parents(i).iter().any(|&p| is_hidden(p)));
        Ok(RowEngine {
            net,
            hidden: hidden.to_vec(),
            cards,
            size,
            touched,
            fixed,
        })
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    /// Number of joint hidden states.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Families whose value depends on the hidden states.
    pub fn touched(&self) -> &[usize] {
        &self.touched
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    /// Writes joint hidden state `z` into `buf`.
    pub fn fill(&self, z: usize, buf: &mut [usize]) {
        let mut rest = z;
        for (&h, &card) in self.hidden.iter().zip(&self.cards).rev() {
            buf[h] = rest % card;
            rest /= card;
        }
    }

    pub(crate) fn base_row(&self, row: &[Option<usize>]) -> Vec<usize> {
        row.iter().map(|s| s.unwrap_or(0)).collect()
    }

    /// Constant log term and per-hidden-state log terms of a row.
    pub fn log_terms(&self, row: &[Option<usize>]) -> (f64, Vec<f64>) {
        let mut buf = self.base_row(row);
        let constant: f64 = self.fixed.iter().map(|&i| self.net.family_log_prob(i, &buf)).sum();
        let terms = (0..self.size)
            .map(|z| {
                self.fill(z, &mut buf);
                self.touched.iter().map(|&i| self.net.family_log_prob(i, &buf)).sum()
            })
            .collect();
        (constant, terms)
    }

    /// Normalized posterior over joint hidden states and the row's log
    /// evidence. A row of probability zero yields all-zero weights.
    pub fn posterior(&self, row: &[Option<usize>]) -> (Vec<f64>, f64) {
        let (constant, mut terms) = self.log_terms(row);
        let lse = log_sum_exp(&terms);
        if lse == f64::NEG_INFINITY {
            return (vec![0.0; terms.len()], f64::NEG_INFINITY);
        }
        for t in terms.iter_mut() {
            *t = (*t - lse).exp();
        }
        (terms, constant + lse)
    }

    pub fn log_prob(&self, row: &[Option<usize>]) -> f64 {
        let (constant, terms) = self.log_terms(row);
        constant + log_sum_exp(&terms)
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Posterior over the variables left unobserved (`None`) in `row`, which is
/// given in node order.
pub fn posterior_hidden(net: &BayesianNetwork, row: &[Option<usize>], cap: usize) -> Result<Posterior> {
    check_row(net, row)?;
    let hidden: Vec<usize> = (0..net.len()).filter(|&i| row[i].is_none()).collect();
    let engine = RowEngine::new(net, &hidden, cap)?;
    let (probs, log_evidence) = engine.posterior(row);
    Ok(Posterior {
        variables: hidden.iter().map(|&h| net.name(h).to_string()).collect(),
        cards: engine.cards.clone(),
        probs,
        log_evidence,
    })
}

/// Posterior of a single hidden variable from its Markov blanket:
/// P(h | mb) ∝ P(h | pa_H) · Π_{C child of H} P(c | pa_C).
pub fn posterior_single(net: &BayesianNetwork, h: &str, row: &[Option<usize>]) -> Result<Vec<f64>> {
    check_row(net, row)?;
    let hi = net.index_of(h)?;
    let missing: Vec<String> = (0..net.len())
        .filter(|&i| i != hi && row[i].is_none())
        .map(|i| net.name(i).to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::PartialAssignment(missing));
    }
    let mut buf: Vec<usize> = row.iter().map(|s| s.unwrap_or(0)).collect();
    let weights: Vec<f64> = (0..net.cardinality(hi))
        .map(|s| {
            buf[hi] = s;
            let own = net.cpd(hi).prob(net.config_of(hi, &buf), s);
            net.dag()
                .children(hi)
                .iter()
                .fold(own, |acc, &c| acc * net.cpd(c).prob(net.config_of(c, &buf), buf[c]))
        })
        .collect();
    let z: f64 = weights.iter().sum();
    Ok(if z > 0.0 {
        weights.into_iter().map(|w| w / z).collect()
    } else {
        vec![0.0; weights.len()]
    })
}

fn check_row(net: &BayesianNetwork, row: &[Option<usize>]) -> Result<()> {
    if row.len() != net.len() {
        return Err(Error::Config(format!(
            "row has {} entries, network has {} variables",
            row.len(),
            net.len()
        )));
    }
    for (i, s) in row.iter().enumerate() {
        if let Some(s) = *s {
            if s >= net.cardinality(i) {
                return Err(Error::StateOutOfRange {
                    variable: net.name(i).to_string(),
                    state: s,
                    cardinality: net.cardinality(i),
                });
            }
        }
    }
    Ok(())
}
