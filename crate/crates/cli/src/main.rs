//! `common-learning` command-line front end.
//!
//! Every subcommand writes a JSON run report to stdout or `--out`; tables
//! go to a CSV next to the report. Exit codes: 1 for parse or validation
//! failures, 2 when a capacity limit is exceeded, 3 for internal invariant
//! violations.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use common_learning::bounds;
use common_learning::contraction;
use common_learning::counts::CountVector;
use common_learning::engine::{self, EngineConfig};
use common_learning::golden;
use common_learning::montecarlo::{self, CurveMode, SimulationPlan, Target};
use common_learning::rational;
use common_learning::{
    common_identification, identification_partition, CommonBeliefRule, EpistemicEvent, Error, Horizon, InfoStructure,
    Scenario,
};
use serde_json::{json, Value};

use report::{CliError, Table};

#[derive(Parser, Debug)]
#[command(name = "common-learning", version, about = "Exact common-learning computations on finite information structures")]
struct Cli {
    /// Scenario file; defaults to the bundled two-agent, four-state example.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Write the report here instead of stdout. Tables go to the same path
    /// with a `.csv` extension.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Explicit CSV path for tabular output.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,

    /// Largest horizon handled exactly (overrides the scenario file).
    #[arg(long, global = true)]
    horizon_cap: Option<u32>,

    /// Beliefs count as at least q when they are at least q - slack.
    #[arg(long, global = true, default_value_t = 0.0)]
    slack: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Rule {
    Literal,
    Conjunctive,
}

impl From<Rule> for CommonBeliefRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Literal => CommonBeliefRule::Literal,
            Rule::Conjunctive => CommonBeliefRule::Conjunctive,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exact,
    Montecarlo,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check priors, normalization and pairwise full support.
    Validate,
    /// Identification partition of each agent and their join.
    Identify,
    /// Posterior over states after observing a count vector.
    Posterior {
        /// Agent number, from 1.
        #[arg(long)]
        agent: usize,
        /// Comma-separated signal counts, e.g. `12,8`.
        #[arg(long)]
        counts: String,
    },
    /// Probability of an event at horizon t.
    EventProb {
        #[arg(long)]
        t: u32,
        /// `states:A,B`, `ball:A,B`, `mutual:A,B` or `common:A,B`; states by
        /// label or number from 1.
        #[arg(long)]
        event: String,
        /// Condition on this state; omit for the prior mixture.
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Common q-belief in a set of states.
    CommonBelief {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        t: u32,
        #[arg(long)]
        cell: String,
        #[arg(long, value_enum, default_value = "literal")]
        rule: Rule,
    },
    /// Whether the ε-ball event of a cell is q-evident.
    EvidenceCheck {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        t: u32,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        cell: String,
        #[arg(long, default_value_t = 10)]
        max_witnesses: usize,
    },
    /// Prediction matrices and contraction coefficients.
    Contraction,
    /// Gap, radius, Sanov exponents, β* and the time threshold.
    Bounds {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        epsilon: f64,
        /// Defaults to β*/2.
        #[arg(long)]
        beta: Option<f64>,
        /// Largest horizon scanned for the threshold.
        #[arg(long)]
        search_cap: Option<u32>,
    },
    /// Monte Carlo estimates of ball probabilities.
    Simulate {
        #[arg(long)]
        state: String,
        #[arg(long)]
        t: u32,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// Also estimate the conditional prediction check for agents 1 and 2.
        #[arg(long)]
        prediction: bool,
    },
    /// Ball, mutual-belief and common-belief probabilities over a t grid.
    Curve {
        #[arg(long)]
        state: String,
        #[arg(long)]
        cell: String,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        epsilon: f64,
        /// Comma-separated horizons.
        #[arg(long)]
        t_grid: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Golden checks on the bundled example, with the t=60 region export.
    ReproduceExample1,
}

struct Context {
    scenario: Scenario,
    source: String,
    config: EngineConfig,
    slack: f64,
}

impl Context {
    fn info(&self) -> &InfoStructure {
        &self.scenario.info
    }

    fn horizon(&self, t: u32) -> Result<Horizon<'_>, CliError> {
        Ok(Horizon::new(self.info(), t, self.config)?.with_slack(self.slack))
    }
}

/// A state by label or by number from 1.
fn parse_state(info: &InfoStructure, s: &str) -> Result<usize, CliError> {
    let s = s.trim();
    if let Some(i) = info.state_index(s) {
        return Ok(i);
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 1 && n <= info.num_states() => Ok(n - 1),
        _ => Err(CliError::usage(format!(
            "unknown state {s:?}; use a label ({}) or a number from 1",
            info.states().join(", ")
        ))),
    }
}

fn parse_states(info: &InfoStructure, s: &str) -> Result<Vec<usize>, CliError> {
    let mut out: Vec<usize> = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| parse_state(info, x))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(CliError::usage("empty state list"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_agent(info: &InfoStructure, a: usize) -> Result<usize, CliError> {
    if a >= 1 && a <= info.num_agents() {
        Ok(a - 1)
    } else {
        Err(CliError::usage(format!("agent must be between 1 and {}", info.num_agents())))
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|_| CliError::usage(format!("bad {what} entry {x:?}")))
        })
        .collect()
}

fn labels(info: &InfoStructure, set: &[usize]) -> Vec<String> {
    set.iter().map(|&s| info.state_label(s).to_string()).collect()
}

fn need(v: Option<f64>, flag: &str, kind: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::usage(format!("--{flag} is required for {kind} events")))
}

fn load(cli: &Cli) -> Result<Context, CliError> {
    let (scenario, source) = match &cli.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
            (Scenario::parse(&text)?, path.display().to_string())
        }
        None => (common_learning::example1::scenario(), "bundled:example1".to_string()),
    };
    let mut config = EngineConfig::default();
    if let Some(cap) = cli.horizon_cap.or(scenario.horizon_cap) {
        config = config.with_horizon_cap(cap);
    }
    Ok(Context {
        scenario,
        source,
        config,
        slack: cli.slack,
    })
}

fn validated(ctx: &Context) -> Result<(), CliError> {
    ctx.info().ensure_valid()?;
    Ok(())
}

fn event_table(info: &InfoStructure, event: &EpistemicEvent) -> Result<Table, CliError> {
    let mut buf = Vec::new();
    event.write_csv(info, &mut buf)?;
    Ok(Table::Raw(buf))
}

struct Outcome {
    payload: Value,
    table: Option<Table>,
    seeds: Vec<u64>,
    /// Failed golden checks.
    failed: bool,
}

impl Outcome {
    fn new(payload: Value) -> Self {
        Outcome {
            payload,
            table: None,
            seeds: Vec::new(),
            failed: false,
        }
    }

    fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

fn run(cli: &Cli, ctx: &Context) -> Result<Outcome, CliError> {
    let info = ctx.info();
    match &cli.command {
        Command::Validate => {
            let report = info.validate();
            let payload = json!({ "passed": report.passed, "violations": report::violations(info, report) });
            if !report.passed {
                return Err(CliError::invalid(
                    report.violations.iter().map(|v| v.message.clone()).collect::<Vec<_>>().join("; "),
                    Some(payload),
                ));
            }
            Ok(Outcome::new(payload))
        }
        Command::Identify => {
            let mut agents = Vec::new();
            for a in 0..info.num_agents() {
                let p = identification_partition(info, a)?;
                agents.push(json!({ "agent": a + 1, "cells": p.labelled(info.states()) }));
            }
            let join = common_identification(info)?;
            Ok(Outcome::new(json!({ "agents": agents, "join": join.labelled(info.states()) })))
        }
        Command::Posterior { agent, counts } => {
            validated(ctx)?;
            let a = parse_agent(info, *agent)?;
            let c = CountVector::new(parse_list(counts, "count")?);
            if c.len() != info.alphabet(a) {
                return Err(CliError::usage(format!(
                    "agent {agent} has {} signals, got {} counts",
                    info.alphabet(a),
                    c.len()
                )));
            }
            let exact = engine::posterior_exact(info, a, &c)?;
            let rows: Vec<Value> = exact
                .iter()
                .enumerate()
                .map(|(s, p)| json!({ "state": info.state_label(s), "exact": rational::format(p), "value": rational::to_f64(p) }))
                .collect();
            Ok(Outcome::new(json!({ "agent": agent, "counts": c.counts(), "t": c.horizon(), "posterior": rows })))
        }
        Command::EventProb { t, event, state, epsilon, q } => {
            validated(ctx)?;
            let h = ctx.horizon(*t)?;
            let (kind, rest) = event
                .split_once(':')
                .ok_or_else(|| CliError::usage("event must look like kind:states, e.g. ball:θ4"))?;
            let set = parse_states(info, rest)?;
            let f = match kind {
                "states" => h.state_event(&set)?,
                "ball" => h.identified_ball_event(need(*epsilon, "epsilon", kind)?, &set)?,
                "mutual" => h.mutual_belief_operator(need(*q, "q", kind)?, &h.state_event(&set)?)?,
                "common" => {
                    h.common_belief_event(need(*q, "q", kind)?, &h.state_event(&set)?, CommonBeliefRule::Literal)?
                        .event
                }
                other => return Err(CliError::usage(format!("unknown event kind {other:?}"))),
            };
            let conditioning = state.as_deref().map(|s| parse_state(info, s)).transpose()?;
            let p = h.event_probability(&f, conditioning)?;
            Ok(Outcome::new(json!({
                "t": t,
                "event": { "kind": kind, "states": labels(info, &set), "epsilon": epsilon, "q": q, "size": f.count() },
                "conditioning": conditioning.map(|s| info.state_label(s).to_string()),
                "probability": p,
                "slack": ctx.slack,
            }))
            .with_table(event_table(info, &f)?))
        }
        Command::CommonBelief { q, t, cell, rule } => {
            validated(ctx)?;
            let h = ctx.horizon(*t)?;
            let set = parse_states(info, cell)?;
            let c = h.common_belief_event(*q, &h.state_event(&set)?, (*rule).into())?;
            let probs: Vec<Value> = (0..info.num_states())
                .map(|s| Ok(json!({ "state": info.state_label(s), "probability": h.event_probability(&c.event, Some(s))? })))
                .collect::<Result<_, Error>>()?;
            Ok(Outcome::new(json!({
                "q": q,
                "t": t,
                "cell": labels(info, &set),
                "rule": c.rule,
                "iterations": c.iterations,
                "size": c.event.count(),
                "probability": probs,
                "slack": ctx.slack,
            }))
            .with_table(event_table(info, &c.event)?))
        }
        Command::EvidenceCheck {
            q,
            t,
            epsilon,
            cell,
            max_witnesses,
        } => {
            validated(ctx)?;
            let h = ctx.horizon(*t)?;
            let set = parse_states(info, cell)?;
            let f = h.identified_ball_event(*epsilon, &set)?;
            let r = h.is_q_evident(*q, &f, *max_witnesses)?;
            let witnesses: Vec<Value> = r
                .witnesses
                .iter()
                .map(|w| {
                    json!({
                        "state": info.state_label(w.state),
                        "counts": w.profile.vectors().iter().map(|v| v.counts().to_vec()).collect::<Vec<_>>(),
                        "beliefs": w.beliefs,
                    })
                })
                .collect();
            Ok(Outcome::new(json!({
                "q": q,
                "t": t,
                "epsilon": epsilon,
                "cell": labels(info, &set),
                "is_evident": r.is_evident,
                "violations": r.violations,
                "witnesses": witnesses,
                "slack": r.slack,
            })))
        }
        Command::Contraction => {
            validated(ctx)?;
            let matrices = contraction::all_matrices(info)?;
            let global = contraction::global_contraction_coefficient(info)?;
            let consistency = contraction::verify_marginal_consistency(info)?;
            let mut table = Vec::new();
            let rows: Vec<Value> = matrices
                .iter()
                .map(|m| {
                    table.push(vec![
                        info.state_label(m.state).to_string(),
                        (m.from + 1).to_string(),
                        (m.to + 1).to_string(),
                        rational::format(m.lambda()),
                        format!("{}", m.lambda_f64()),
                    ]);
                    json!({
                        "state": info.state_label(m.state),
                        "from": m.from + 1,
                        "to": m.to + 1,
                        "rows": m.rows().iter().map(|r| r.iter().map(rational::format).collect::<Vec<_>>()).collect::<Vec<_>>(),
                        "lambda": rational::format(m.lambda()),
                        "lambda_f64": m.lambda_f64(),
                    })
                })
                .collect();
            let marg: Vec<Value> = consistency
                .iter()
                .map(|c| json!({ "state": info.state_label(c.state), "from": c.from + 1, "to": c.to + 1, "holds": c.holds }))
                .collect();
            Ok(Outcome::new(json!({
                "matrices": rows,
                "global_lambda": rational::format(&global),
                "global_lambda_f64": rational::to_f64(&global),
                "marginal_consistency": marg,
            }))
            .with_table(Table::Rows {
                header: ["state", "from", "to", "lambda", "lambda_f64"].map(String::from).to_vec(),
                rows: table,
            }))
        }
        Command::Bounds {
            q,
            epsilon,
            beta,
            search_cap,
        } => {
            validated(ctx)?;
            let mut config = ctx.config;
            if let Some(cap) = search_cap {
                config.search_cap = *cap;
            }
            let set = bounds::bound_set(info, *q, *epsilon, *beta, &config)?;
            let mut payload = serde_json::to_value(&set).map_err(CliError::internal)?;
            report::one_based(&mut payload, &["agent"]);
            report::label_states(&mut payload, info, &["state", "rival"]);
            payload["threshold_note"] = json!(
                "T is the larger of the ball-probability horizon and the logarithmic tail term; both are required"
            );
            let rows = set
                .alpha
                .iter()
                .map(|a| {
                    vec![
                        (a.agent + 1).to_string(),
                        info.state_label(a.state).to_string(),
                        format!("{}", a.alpha),
                    ]
                })
                .collect();
            Ok(Outcome::new(payload).with_table(Table::Rows {
                header: ["agent", "state", "alpha"].map(String::from).to_vec(),
                rows,
            }))
        }
        Command::Simulate {
            state,
            t,
            n,
            seed,
            epsilon,
            prediction,
        } => {
            validated(ctx)?;
            let s = parse_state(info, state)?;
            let join = common_identification(info)?;
            let cell = join.cell_of(s).expect("state in range").to_vec();
            let plan = SimulationPlan::new(info, s, *t, *n, *seed)?;
            let mut estimates = Vec::new();
            let mut rows = Vec::new();
            if *t > 0 {
                for (name, set) in [("ball_state", vec![s]), ("ball_cell", cell.clone())] {
                    let pred = montecarlo::ball_predicate(info, *t, *epsilon, &set)?;
                    let e = montecarlo::estimate_event(&plan, &Target::Predicate(Box::new(pred)))?;
                    rows.push(vec![
                        name.to_string(),
                        t.to_string(),
                        format!("{}", e.p_hat),
                        format!("{}", e.se),
                        n.to_string(),
                        seed.to_string(),
                    ]);
                    estimates.push(json!({ "target": name, "states": labels(info, &set), "estimate": e }));
                }
            }
            let mut payload = json!({
                "state": info.state_label(s),
                "t": t,
                "n": n,
                "seed": seed,
                "epsilon": epsilon,
                "estimates": estimates,
            });
            if *prediction && *t > 0 && info.num_agents() >= 2 {
                let r = montecarlo::verify_conditional_prediction(info, s, 0, 1, *t, *epsilon, *n, *seed)?;
                let mut v = serde_json::to_value(&r).map_err(CliError::internal)?;
                report::one_based(&mut v, &["from", "to"]);
                v["state"] = json!(info.state_label(s));
                payload["conditional_prediction"] = v;
            }
            let mut out = Outcome::new(payload).with_table(Table::Rows {
                header: ["target", "t", "estimate", "se", "n", "seed"].map(String::from).to_vec(),
                rows,
            });
            out.seeds = vec![*seed];
            Ok(out)
        }
        Command::Curve {
            state,
            cell,
            q,
            epsilon,
            t_grid,
            mode,
            n,
            seed,
        } => {
            validated(ctx)?;
            let s = parse_state(info, state)?;
            let set = parse_states(info, cell)?;
            let grid: Vec<u32> = parse_list(t_grid, "t")?;
            let mode = match mode {
                Mode::Exact => CurveMode::Exact,
                Mode::Montecarlo => CurveMode::MonteCarlo { n: *n, seed: *seed },
            };
            let rows = montecarlo::convergence_curve(info, s, *q, *epsilon, &set, &grid, mode, &ctx.config)?;
            let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
            let table = rows
                .iter()
                .map(|r| {
                    vec![
                        r.t.to_string(),
                        format!("{}", r.ball),
                        opt(r.ball_se),
                        opt(r.mutual),
                        opt(r.common),
                        r.n.map(|n| n.to_string()).unwrap_or_default(),
                        if matches!(mode, CurveMode::MonteCarlo { .. }) { seed.to_string() } else { String::new() },
                    ]
                })
                .collect();
            let mut out = Outcome::new(json!({
                "state": info.state_label(s),
                "cell": labels(info, &set),
                "q": q,
                "epsilon": epsilon,
                "mode": mode,
                "rows": rows,
            }))
            .with_table(Table::Rows {
                header: ["t", "ball", "ball_se", "mutual", "common", "n", "seed"].map(String::from).to_vec(),
                rows: table,
            });
            if let CurveMode::MonteCarlo { seed, .. } = mode {
                out.seeds = vec![seed];
            }
            Ok(out)
        }
        Command::ReproduceExample1 => {
            if cli.scenario.is_some() {
                return Err(CliError::usage("reproduce-example1 always uses the bundled scenario"));
            }
            let r = golden::reproduce(info)?;
            let region = golden::region_table(info, 60, 0.05)?;
            let rows = region
                .iter()
                .map(|r| {
                    vec![
                        r.a.to_string(),
                        r.b.to_string(),
                        u8::from(r.theta1).to_string(),
                        u8::from(r.theta2).to_string(),
                        u8::from(r.theta3).to_string(),
                        u8::from(r.theta4).to_string(),
                    ]
                })
                .collect();
            let failed = !r.passed;
            let mut out = Outcome::new(serde_json::to_value(&r).map_err(CliError::internal)?).with_table(Table::Rows {
                header: ["c1_0", "c2_0", "ball_theta1", "ball_theta2", "ball_theta3", "ball_theta4"]
                    .map(String::from)
                    .to_vec(),
                rows,
            });
            out.failed = failed;
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return report::fail(&CliError::usage(e.to_string().trim().to_string()));
        }
    };
    let started = std::time::Instant::now();
    let result = load(&cli).and_then(|ctx| {
        std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&cli, &ctx)))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Err(CliError::internal(msg))
            })
            .map(|o| (ctx, o))
    });
    match result {
        Ok((ctx, outcome)) => {
            let r = report::RunReport::new(&argv, &cli_name(&cli.command), &ctx, outcome.payload, &outcome.seeds, started);
            if let Err(e) = report::emit(&r, outcome.table.as_ref(), cli.out.as_deref(), cli.csv.as_deref()) {
                return report::fail(&e);
            }
            if outcome.failed {
                return report::fail(&CliError::internal("golden checks failed; see the report"));
            }
            ExitCode::SUCCESS
        }
        Err(e) => report::fail(&e),
    }
}

fn cli_name(c: &Command) -> String {
    match c {
        Command::Validate => "validate",
        Command::Identify => "identify",
        Command::Posterior { .. } => "posterior",
        Command::EventProb { .. } => "event-prob",
        Command::CommonBelief { .. } => "common-belief",
        Command::EvidenceCheck { .. } => "evidence-check",
        Command::Contraction => "contraction",
        Command::Bounds { .. } => "bounds",
        Command::Simulate { .. } => "simulate",
        Command::Curve { .. } => "curve",
        Command::ReproduceExample1 => "reproduce-example1",
    }
    .into()
}
