//! Parameter EM with exact inference, Cheeseman-Stutz scoring and the
//! per-cardinality EM sweep.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::data::{Dataset, HiddenAssignments};
use crate::error::{Error, Result};
use crate::inference::{RowEngine, DEFAULT_STATE_CAP};
use crate::network::{BayesianNetwork, Cpd, Variable};
use crate::scoring::{family_score_expected, PriorSpec, SCORE_TOLERANCE};
use crate::stats::{count_family, SufficientStatistics};

#[derive(Clone, Debug)]
pub enum EmInit {
    /// Every CPD row drawn from a symmetric Dirichlet(1).
    Random,
    /// Start from these parameters. One run regardless of `restarts`.
    WarmStart(BayesianNetwork),
}

#[derive(Clone, Debug)]
pub struct EmConfig {
    /// Maximum number of M-steps.
    pub max_iters: usize,
    pub ll_tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
    pub init: EmInit,
    pub state_cap: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iters: 200,
            ll_tolerance: 1e-6,
            restarts: 1,
            seed: 0,
            init: EmInit::Random,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be ≥ 1".into()));
        }
        if self.ll_tolerance.is_nan() || self.ll_tolerance <= 0.0 {
            return Err(Error::Config("ll_tolerance must be > 0".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CsScore {
    pub value: f64,
    /// BDe score of the data completed with expected counts.
    pub completed_score: f64,
    /// log-likelihood of the completed data under the parameters.
    pub completed_log_likelihood: f64,
    pub log_likelihood: f64,
}

#[derive(Clone, Debug)]
pub struct EmResult {
    pub params: BayesianNetwork,
    pub log_likelihood: f64,
    /// Number of M-steps of the selected run.
    pub iters_used: usize,
    pub converged: bool,
    /// Log-likelihood before the first and after every M-step.
    pub ll_trace: Vec<f64>,
    /// Log-likelihood plus Σ α·log θ along the same steps.
    pub objective_trace: Vec<f64>,
    pub restarts: Vec<RestartSummary>,
    /// Expected counts at `params`, one table per family laid out like
    /// [`SufficientStatistics::counts`].
    pub expected_counts: Vec<Vec<f64>>,
    pub cs_score: CsScore,
}

struct Problem<'a> {
    net: &'a BayesianNetwork,
    patterns: Vec<(Vec<Option<usize>>, u64)>,
    shapes: Vec<SufficientStatistics>,
    alphas: Vec<Vec<f64>>,
    hidden: Vec<usize>,
    state_cap: usize,
}

impl<'a> Problem<'a> {
    fn new(net: &'a BayesianNetwork, data: &Dataset, prior: &PriorSpec, state_cap: usize) -> Result<Self> {
        prior.validate()?;
        let patterns = data.observed_patterns(net)?;
        let hidden = match patterns.first() {
            Some((row, _)) => (0..net.len()).filter(|&i| row[i].is_none()).collect(),
            None => return Err(Error::Config("dataset has no rows".into())),
        };
        let shapes = family_shapes(net);
        let alphas = shapes.iter().map(|s| prior.cell_alphas(s)).collect();
        Ok(Problem {
            net,
            patterns,
            shapes,
            alphas,
            hidden,
            state_cap,
        })
    }

    /// Expected counts and log-likelihood at `theta`.
    fn e_step(&self, theta: &BayesianNetwork) -> Result<(Vec<Vec<f64>>, f64)> {
        let engine = RowEngine::new(theta, &self.hidden, self.state_cap)?;
        let mut ess: Vec<Vec<f64>> = self.shapes.iter().map(|s| vec![0.0; s.counts.len()]).collect();
        let mut ll = 0.0;
        for (row, count) in &self.patterns {
            let c = *count as f64;
            let (post, log_evidence) = engine.posterior(row);
            ll += c * log_evidence;
            let mut buf = engine.base_row(row);
            for &i in engine.fixed() {
                ess[i][buf[i] * theta.num_configs(i) + theta.config_of(i, &buf)] += c;
            }
            for (z, &w) in post.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                engine.fill(z, &mut buf);
                for &i in engine.touched() {
                    ess[i][buf[i] * theta.num_configs(i) + theta.config_of(i, &buf)] += c * w;
                }
            }
        }
        Ok((ess, ll))
    }

    fn m_step(&self, ess: &[Vec<f64>]) -> Result<BayesianNetwork> {
        let cpds = (0..self.net.len())
            .map(|i| map_cpd(self.net.name(i), self.net.cardinality(i), &ess[i], &self.alphas[i]))
            .collect::<Result<_>>()?;
        self.net.with_cpds(cpds)
    }

    fn log_prior(&self, theta: &BayesianNetwork) -> f64 {
        (0..self.net.len())
            .map(|i| {
                let cpd = theta.cpd(i);
                let configs = cpd.num_configs();
                self.alphas[i]
                    .iter()
                    .enumerate()
                    .map(|(idx, a)| a * cpd.prob(idx % configs, idx / configs).ln())
                    .sum::<f64>()
            })
            .sum()
    }

    fn random_init(&self, rng: &mut ChaCha8Rng) -> Result<BayesianNetwork> {
        let cpds = (0..self.net.len())
            .map(|i| {
                let card = self.net.cardinality(i);
                let rows: Vec<Vec<f64>> = (0..self.net.num_configs(i))
                    .map(|_| {
                        let draws: Vec<f64> = (0..card).map(|_| Exp1.sample(rng)).collect();
                        let total: f64 = draws.iter().sum();
                        draws.into_iter().map(|d| d / total).collect()
                    })
                    .collect();
                Cpd::from_rows(self.net.name(i), card, &rows)
            })
            .collect::<Result<_>>()?;
        self.net.with_cpds(cpds)
    }

    fn run(&self, start: BayesianNetwork, config: &EmConfig) -> Result<Run> {
        let mut theta = start;
        let (mut ess, mut ll) = self.e_step(&theta)?;
        let mut ll_trace = vec![ll];
        let mut objective_trace = vec![ll + self.log_prior(&theta)];
        let mut converged = false;
        let mut iters = 0;
        while iters < config.max_iters {
            theta = self.m_step(&ess)?;
            iters += 1;
            let (next_ess, next_ll) = self.e_step(&theta)?;
            ess = next_ess;
            let gain = next_ll - ll;
            ll = next_ll;
            ll_trace.push(ll);
            objective_trace.push(ll + self.log_prior(&theta));
            if gain < config.ll_tolerance {
                converged = true;
                break;
            }
        }
        Ok(Run {
            theta,
            ess,
            ll,
            iters,
            converged,
            ll_trace,
            objective_trace,
        })
    }
}

struct Run {
    theta: BayesianNetwork,
    ess: Vec<Vec<f64>>,
    ll: f64,
    iters: usize,
    converged: bool,
    ll_trace: Vec<f64>,
    objective_trace: Vec<f64>,
}

fn family_shapes(net: &BayesianNetwork) -> Vec<SufficientStatistics> {
    (0..net.len())
        .map(|i| {
            let parents: Vec<String> = net.dag().parents(i).iter().map(|&p| net.name(p).to_string()).collect();
            let mut cards = vec![net.cardinality(i)];
            cards.extend(net.parent_cards(i));
            SufficientStatistics::zeros(net.name(i), parents, cards)
        })
        .collect()
}

/// CPD with rows (counts + α) normalized, from a `[child][config]` table.
pub(crate) fn map_cpd(child: &str, card: usize, counts: &[f64], alpha: &[f64]) -> Result<Cpd> {
    let configs = counts.len() / card;
    let rows: Vec<Vec<f64>> = (0..configs)
        .map(|u| {
            let cells: Vec<f64> = (0..card).map(|x| counts[x * configs + u] + alpha[x * configs + u]).collect();
            let total: f64 = cells.iter().sum();
            cells.into_iter().map(|c| c / total).collect()
        })
        .collect();
    Cpd::from_rows(child, card, &rows)
}

/// MAP parameters of the data completed by `sigma`. Hidden variables take
/// the cardinality of their assignment map.
pub fn complete_data_map(
    net: &BayesianNetwork,
    data: &Dataset,
    sigma: &HiddenAssignments,
    prior: &PriorSpec,
) -> Result<BayesianNetwork> {
    let variables: Vec<Variable> = net
        .variables()
        .iter()
        .map(|v| match sigma.get(v.name()) {
            Some(map) if map.num_states != v.cardinality() => Variable::with_cardinality(v.name(), map.num_states),
            _ => Ok(v.clone()),
        })
        .collect::<Result<_>>()?;
    let mut cpds = Vec::with_capacity(net.len());
    for i in 0..net.len() {
        let stats = count_family(data, sigma, net, i)?;
        let counts: Vec<f64> = stats.counts.iter().map(|&c| c as f64).collect();
        let alpha = prior.cell_alphas(&stats);
        cpds.push(map_cpd(net.name(i), stats.child_card(), &counts, &alpha)?);
    }
    net.with_variables_and_cpds(variables, cpds)
}

/// Runs EM on `net`'s structure. Network variables without an observed
/// column in `data` are treated as hidden.
pub fn em_parameters(net: &BayesianNetwork, data: &Dataset, prior: &PriorSpec, config: &EmConfig) -> Result<EmResult> {
    config.validate()?;
    let problem = Problem::new(net, data, prior, config.state_cap)?;
    if problem.hidden.is_empty() {
        return complete_em(&problem, prior);
    }
    let mut best: Option<Run> = None;
    let mut summaries = Vec::new();
    let starts = match &config.init {
        EmInit::WarmStart(_) => 1,
        EmInit::Random => config.restarts,
    };
    for r in 0..starts {
        let start = match &config.init {
            EmInit::WarmStart(params) => {
                check_same_shape(net, params)?;
                net.with_cpds(params.cpds().to_vec())?
            }
            EmInit::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(r as u64);
                problem.random_init(&mut rng)?
            }
        };
        let run = problem.run(start, config)?;
        summaries.push(RestartSummary {
            restart: r,
            log_likelihood: run.ll,
            iterations: run.iters,
            converged: run.converged,
        });
        if best.as_ref().is_none_or(|b| run.ll > b.ll) {
            best = Some(run);
        }
    }
    let run = best.expect("at least one restart");
    let cs_score = cs_from_parts(&problem, &run.theta, &run.ess, run.ll, prior)?;
    Ok(EmResult {
        params: run.theta,
        log_likelihood: run.ll,
        iters_used: run.iters,
        converged: run.converged,
        ll_trace: run.ll_trace,
        objective_trace: run.objective_trace,
        restarts: summaries,
        expected_counts: run.ess,
        cs_score,
    })
}

fn complete_em(problem: &Problem, prior: &PriorSpec) -> Result<EmResult> {
    let (ess, _) = problem.e_step(problem.net)?;
    let theta = problem.m_step(&ess)?;
    let ll = completed_log_likelihood(&theta, &ess);
    let cs_score = cs_from_parts(problem, &theta, &ess, ll, prior)?;
    Ok(EmResult {
        log_likelihood: ll,
        iters_used: 1,
        converged: true,
        ll_trace: vec![ll],
        objective_trace: vec![ll + problem.log_prior(&theta)],
        restarts: vec![RestartSummary {
            restart: 0,
            log_likelihood: ll,
            iterations: 1,
            converged: true,
        }],
        params: theta,
        expected_counts: ess,
        cs_score,
    })
}

fn check_same_shape(net: &BayesianNetwork, params: &BayesianNetwork) -> Result<()> {
    let same = params.len() == net.len()
        && (0..net.len()).all(|i| {
            params.name(i) == net.name(i)
                && params.cardinality(i) == net.cardinality(i)
                && params.dag().parents(i) == net.dag().parents(i)
        });
    if same {
        Ok(())
    } else {
        Err(Error::Config("warm-start parameters do not match the network".into()))
    }
}

/// Σ N·log θ over all families, with 0·log 0 = 0.
fn completed_log_likelihood(theta: &BayesianNetwork, ess: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (i, table) in ess.iter().enumerate() {
        let cpd = theta.cpd(i);
        let configs = cpd.num_configs();
        for (idx, &n) in table.iter().enumerate() {
            if n > 0.0 {
                total += n * cpd.prob(idx % configs, idx / configs).ln();
            }
        }
    }
    total
}

fn cs_from_parts(
    problem: &Problem,
    theta: &BayesianNetwork,
    ess: &[Vec<f64>],
    log_likelihood: f64,
    prior: &PriorSpec,
) -> Result<CsScore> {
    let mut completed_score = 0.0;
    for (shape, counts) in problem.shapes.iter().zip(ess) {
        completed_score += family_score_expected(shape, counts, prior)?;
    }
    let completed_ll = completed_log_likelihood(theta, ess);
    Ok(CsScore {
        value: completed_score - completed_ll + log_likelihood,
        completed_score,
        completed_log_likelihood: completed_ll,
        log_likelihood,
    })
}

/// Cheeseman-Stutz score of an EM result on `(net, data)`.
pub fn cheeseman_stutz_score(
    net: &BayesianNetwork,
    result: &EmResult,
    data: &Dataset,
    prior: &PriorSpec,
) -> Result<CsScore> {
    check_same_shape(net, &result.params)?;
    let problem = Problem::new(net, data, prior, DEFAULT_STATE_CAP.max(1))?;
    if result.expected_counts.len() != net.len()
        || result
            .expected_counts
            .iter()
            .zip(&problem.shapes)
            .any(|(e, s)| e.len() != s.counts.len())
    {
        return Err(Error::Config("expected counts do not match the network".into()));
    }
    cs_from_parts(&problem, &result.params, &result.expected_counts, result.log_likelihood, prior)
}

/// Total log-likelihood of `data`, summing out unobserved variables.
pub fn log_likelihood(net: &BayesianNetwork, data: &Dataset, state_cap: usize) -> Result<f64> {
    let patterns = data.observed_patterns(net)?;
    let Some((first, _)) = patterns.first() else {
        return Ok(0.0);
    };
    let hidden: Vec<usize> = (0..net.len()).filter(|&i| first[i].is_none()).collect();
    let engine = RowEngine::new(net, &hidden, state_cap)?;
    Ok(patterns.iter().map(|(row, c)| *c as f64 * engine.log_prob(row)).sum())
}

#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub k: usize,
    pub result: EmResult,
    pub wall_time_secs: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub variable: String,
    pub entries: Vec<SweepEntry>,
    pub best_k: usize,
}

/// One row per k of a sweep, for export.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub cs_score: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

impl SweepResult {
    pub fn rows(&self, with_timing: bool) -> Vec<SweepRow> {
        self.entries
            .iter()
            .map(|e| SweepRow {
                k: e.k,
                cs_score: e.result.cs_score.value,
                log_likelihood: e.result.log_likelihood,
                iterations: e.result.iters_used,
                wall_time_secs: with_timing.then_some(e.wall_time_secs),
            })
            .collect()
    }

    pub fn entry(&self, k: usize) -> Option<&SweepEntry> {
        self.entries.iter().find(|e| e.k == k)
    }
}

/// EM with `config.restarts` random starts for every cardinality of `h` in
/// `k_min..=k_max`; the best k maximizes the CS score.
pub fn cardinality_sweep_em(
    net: &BayesianNetwork,
    data: &Dataset,
    h: &str,
    k_min: usize,
    k_max: usize,
    prior: &PriorSpec,
    config: &EmConfig,
) -> Result<SweepResult> {
    if k_min == 0 || k_min > k_max {
        return Err(Error::Config(format!("invalid cardinality range {k_min}..={k_max}")));
    }
    if !data.contains(h) || data.is_hidden(h)? {
        net.index_of(h)?;
    } else {
        return Err(Error::Config(format!("`{h}` is observed in the data")));
    }
    let mut entries = Vec::new();
    for k in k_min..=k_max {
        let net_k = net.with_cardinality(h, k)?;
        let cfg = EmConfig {
            init: EmInit::Random,
            seed: config.seed.wrapping_add(k as u64),
            ..config.clone()
        };
        let started = Instant::now();
        let result = em_parameters(&net_k, data, prior, &cfg)?;
        entries.push(SweepEntry {
            k,
            result,
            wall_time_secs: started.elapsed().as_secs_f64(),
        });
    }
    let best = entries
        .iter()
        .map(|e| e.result.cs_score.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let best_k = entries
        .iter()
        .find(|e| e.result.cs_score.value >= best - SCORE_TOLERANCE)
        .map_or(k_min, |e| e.k);
    Ok(SweepResult {
        variable: h.to_string(),
        entries,
        best_k,
    })
}
