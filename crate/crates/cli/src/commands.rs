use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use latcard::agglomerate::{agglomerate, AgglomerateConfig};
use latcard::data::{ancestral_sample, read_csv, read_csv_inferred, write_csv, Dataset, HiddenAssignments};
use latcard::discovery::{find_hidden_pipeline, FindHiddenConfig};
use latcard::em::{cardinality_sweep_em, EmConfig, SweepRow};
use latcard::inference::DEFAULT_STATE_CAP;
use latcard::multi::{round_robin_agglomerate, RoundRobinConfig};
use latcard::network::{json, BayesianNetwork};
use latcard::scoring::{log_loss, PriorSpec};
use latcard::synthetic;

use crate::output::{num, write_csv as write_table, write_json, write_text};
use crate::{
    AgglomerateArgs, Benchmark, Cli, Command, EvalArgs, FindHiddenArgs, RoundRobinArgs, SampleArgs, SweepArgs,
    SynthArgs,
};

pub const SUMMARY_VERSION: u32 = 1;
pub const SWEEP_VERSION: u32 = 1;
pub const EVAL_VERSION: u32 = 1;

pub fn run(cli: &Cli) -> Result<()> {
    let prior = PriorSpec::new(cli.alpha)?;
    match &cli.command {
        Command::Synth(args) => synth(args),
        Command::Sample(args) => sample(args, need_seed(cli, "sample")?),
        Command::Agglomerate(args) => cmd_agglomerate(args, &prior),
        Command::SweepEm(args) => sweep(args, &prior, need_seed(cli, "sweep-em")?, !cli.omit_timing),
        Command::Roundrobin(args) => roundrobin(args, &prior),
        Command::Findhidden(args) => findhidden(args, &prior, need_seed(cli, "findhidden")?),
        Command::Eval(args) => eval(args),
    }
}

fn need_seed(cli: &Cli, command: &str) -> Result<u64> {
    match cli.seed {
        Some(seed) => Ok(seed),
        None => bail!(latcard::Error::Config(format!("`{command}` is stochastic and needs --seed"))),
    }
}

fn read_net(path: &Path) -> Result<BayesianNetwork> {
    json::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_data(path: &Path, net: &BayesianNetwork) -> Result<Dataset> {
    read_csv(path, net.variables()).with_context(|| format!("reading {}", path.display()))
}

fn synth(args: &SynthArgs) -> Result<()> {
    let net = match args.benchmark {
        Benchmark::SingleHidden => synthetic::single_hidden_benchmark()?,
        Benchmark::MultiHidden => synthetic::multi_hidden_benchmark()?,
        Benchmark::PlantedClique => synthetic::planted_clique_benchmark()?,
    };
    write_text(&args.out, &json::to_string(&net)?)
}

fn sample(args: &SampleArgs, seed: u64) -> Result<()> {
    let net = read_net(&args.net)?;
    let data = ancestral_sample(&net, args.rows, seed)?.hide_variables(&args.hide)?;
    write_csv(&data, &args.out).with_context(|| format!("writing {}", args.out.display()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AgglomerateSummary {
    pub version: u32,
    pub variable: String,
    pub initial_k: usize,
    pub chosen_k: usize,
    pub score_at_k: f64,
    pub state_sizes: Vec<usize>,
    pub cap_triggered: bool,
    pub delta_evaluations: usize,
}

fn cmd_agglomerate(args: &AgglomerateArgs, prior: &PriorSpec) -> Result<()> {
    let net = read_net(&args.net)?;
    let data = read_data(&args.data, &net)?;
    let config = AgglomerateConfig {
        max_initial_states: args.max_initial_states,
    };
    let (trace, result) = agglomerate(&net, &data, &HiddenAssignments::new(), &args.hidden, prior, &config)?;
    let prefix = &args.out;
    write_text(format!("{prefix}.trace.json"), &(trace.to_json()? + "\n"))?;
    write_text(format!("{prefix}.tree.dot"), &trace.to_dot())?;
    let curve: Vec<Vec<String>> = trace
        .per_k_scores
        .iter()
        .map(|p| vec![p.k.to_string(), num(p.score)])
        .collect();
    write_table(format!("{prefix}.curve.csv"), &["k", "score"], &curve)?;
    let summary = AgglomerateSummary {
        version: SUMMARY_VERSION,
        variable: trace.variable.clone(),
        initial_k: trace.initial_k(),
        chosen_k: result.chosen_k,
        score_at_k: result.score_at_k,
        state_sizes: result.sigma.state_counts(),
        cap_triggered: trace.cap_triggered,
        delta_evaluations: trace.delta_evaluations,
    };
    write_json(format!("{prefix}.summary.json"), &summary)?;
    write_text(format!("{prefix}.params.json"), &json::to_string(&result.warm_start_params)?)
}

#[derive(Debug, Serialize)]
pub struct SweepFile {
    pub version: u32,
    pub variable: String,
    pub seed: u64,
    pub restarts: usize,
    pub best_k: usize,
    pub rows: Vec<SweepRow>,
}

fn sweep(args: &SweepArgs, prior: &PriorSpec, seed: u64, timing: bool) -> Result<()> {
    let net = read_net(&args.net)?;
    let data = read_data(&args.data, &net)?;
    let config = EmConfig {
        restarts: args.restarts,
        max_iters: args.max_iters,
        ll_tolerance: args.ll_tolerance,
        seed,
        ..Default::default()
    };
    let result = cardinality_sweep_em(&net, &data, &args.hidden, args.k_min, args.k_max, prior, &config)?;
    let rows = result.rows(timing);
    let mut header = vec!["k", "cs_score", "log_likelihood", "iterations"];
    if timing {
        header.push("wall_time_secs");
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.k.to_string(), num(r.cs_score), num(r.log_likelihood), r.iterations.to_string()];
            if let Some(t) = r.wall_time_secs {
                row.push(num(t));
            }
            row
        })
        .collect();
    write_table(format!("{}.sweep.csv", args.out), &header, &table)?;
    let file = SweepFile {
        version: SWEEP_VERSION,
        variable: result.variable.clone(),
        seed,
        restarts: args.restarts,
        best_k: result.best_k,
        rows,
    };
    write_json(format!("{}.sweep.json", args.out), &file)
}

fn roundrobin(args: &RoundRobinArgs, prior: &PriorSpec) -> Result<()> {
    let net = read_net(&args.net)?;
    let data = read_data(&args.data, &net)?;
    let config = RoundRobinConfig {
        order: None,
        agglomerate: AgglomerateConfig {
            max_initial_states: args.max_initial_states,
        },
        max_rounds: args.max_rounds,
    };
    let result = round_robin_agglomerate(&net, &data, &args.hidden, prior, &config)?;
    write_json(format!("{}.roundrobin.json", args.out), &result.log())?;
    write_text(format!("{}.params.json", args.out), &json::to_string(&result.network)?)
}

/// Settings accepted by `findhidden --config`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineFile {
    pub test_fraction: Option<f64>,
    pub min_clique_size: Option<usize>,
    pub max_parents: Option<usize>,
    pub max_initial_states: Option<usize>,
    pub max_iters: Option<usize>,
    pub ll_tolerance: Option<f64>,
    pub binary_restarts: Option<usize>,
    pub state_cap: Option<usize>,
}

impl PipelineFile {
    fn into_config(self, seed: u64) -> FindHiddenConfig {
        let mut c = FindHiddenConfig {
            seed,
            ..Default::default()
        };
        if let Some(v) = self.test_fraction {
            c.test_fraction = v;
        }
        if let Some(v) = self.min_clique_size {
            c.min_clique_size = v;
        }
        if let Some(v) = self.max_parents {
            c.hill_climb.max_parents = v;
        }
        c.agglomerate.max_initial_states = self.max_initial_states;
        if let Some(v) = self.max_iters {
            c.em.max_iters = v;
        }
        if let Some(v) = self.ll_tolerance {
            c.em.ll_tolerance = v;
        }
        if let Some(v) = self.binary_restarts {
            c.binary_restarts = v;
        }
        if let Some(v) = self.state_cap {
            c.em.state_cap = v;
        }
        c
    }
}

fn findhidden(args: &FindHiddenArgs, prior: &PriorSpec, seed: u64) -> Result<()> {
    let settings: PipelineFile = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => PipelineFile::default(),
    };
    let data = read_csv_inferred(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let outcome = find_hidden_pipeline(&data, prior, &settings.into_config(seed))?;
    write_json(format!("{}.report.json", args.out), &outcome.report)?;
    write_text(format!("{}.base.json", args.out), &json::to_string(&outcome.base_net)?)?;
    write_text(format!("{}.params.json", args.out), &json::to_string(outcome.accepted_net())?)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvalFile {
    pub version: u32,
    pub rows: usize,
    /// Mean log-probability per row.
    pub log_loss: f64,
}

fn eval(args: &EvalArgs) -> Result<()> {
    let mut net = read_net(&args.net)?;
    if let Some(path) = &args.params {
        let params = read_net(path)?;
        let same_vars = params.variables() == net.variables();
        if !same_vars || params.dag().edges() != net.dag().edges() {
            bail!(latcard::Error::Config(format!(
                "{} does not match the variables and structure of {}",
                path.display(),
                args.net.display()
            )));
        }
        net = params;
    }
    let test = read_data(&args.test, &net)?;
    let value = log_loss(&net, &test, DEFAULT_STATE_CAP)?;
    write_json(
        &args.out,
        &EvalFile {
            version: EVAL_VERSION,
            rows: test.num_rows(),
            log_loss: value,
        },
    )
}
