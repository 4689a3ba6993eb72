//! The `migrationlab` command line.
//!
//! Every subcommand resolves its flags and trailing `key=value` parameters
//! into a [`RunConfig`]. Reports written with `--out` embed the config's
//! canonical JSON and the library version, so equal configs give equal
//! files.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::algorithms::{paper_constants, run_online, Dlm, MtlmRule, Mtlm, Mtm, MtmRule, OnlinePolicy, PhaseRule, Stay, StayRule};
use crate::analysis::{competitive_report, phase_partition, write_ledger_csv};
use crate::error::{Error, Result};
use crate::instance::{bipartite_instance, linear_instance, random_instance, Instance, RandomKind};
use crate::lowerbound::{epsilon, verify_state_graph, Game, GameParams, RandomRule};
use crate::lp::{
    build_dlm_lp, build_mtlm_lp, export_lp, extract_witness, solve_lp, DlmLpOptions, DlmLpParams, LpModel, LpSolution,
    LpStatus, MtlmLpParams,
};
use crate::metric::tolerance;
use crate::opt::opt_dp;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NON_COMPETITIVE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "migrationlab", version, about = "Online file migration experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a policy on an instance and check it against the offline optimum.
    Simulate(SimulateArgs),
    /// Build and solve a factor-revealing LP.
    Lp(LpArgs),
    /// Play the adversarial game against a fixed-phase policy.
    Lowerbound(LowerboundArgs),
    /// Print the analysis constants.
    Constants,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgName {
    Mtm,
    Mtlm,
    Dlm,
    Stay,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenName {
    Linear,
    Bipartite,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpName {
    Mtlm,
    Dlm,
    DlmNoShort,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "dlm")]
    pub alg: AlgName,
    #[arg(long = "gen", value_enum, conflicts_with = "instance")]
    pub generator: Option<GenName>,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long = "D")]
    pub file_size: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Generator parameters such as `n=5 D=8 T=180 seed=1`.
    pub params: Vec<String>,
}

#[derive(Args, Debug)]
pub struct LpArgs {
    #[arg(value_enum)]
    pub model: Option<LpName>,
    #[arg(long = "lp", value_enum)]
    pub lp: Option<LpName>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long, value_enum, default_value = "on")]
    pub multiset_pairs: OnOff,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LowerboundArgs {
    #[arg(long, alias = "alg", value_enum, default_value = "mtlm")]
    pub policy: AlgName,
    #[arg(long = "L")]
    pub levels: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long = "D")]
    pub file_size: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub verify_state_graph: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Game parameters such as `L=12 k=200 D=400`.
    pub params: Vec<String>,
}

/// Fully resolved settings of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alg: Option<AlgName>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generator: Option<GenName>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub instance: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kind: Option<RandomKind>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none", default)]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c: Option<f64>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none", default)]
    pub levels: Option<usize>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none", default)]
    pub file_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lp: Option<LpName>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub multiset_pairs: Option<bool>,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub verify_state_graph: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<PathBuf>,
    pub tolerance: f64,
}

impl RunConfig {
    fn new(command: &str) -> Self {
        RunConfig { command: command.into(), tolerance: tolerance(), ..Default::default() }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Applies one `key=value` parameter.
    pub fn set_param(&mut self, kv: &str) -> Result<()> {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{kv}`")))?;
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::InvalidParameter(format!("bad value `{v}` for {key}")))
        }
        match key {
            "n" => self.n = Some(num(key, value)?),
            "T" => self.steps = Some(num(key, value)?),
            "k" => self.k = Some(num(key, value)?),
            "f" => self.f = Some(num(key, value)?),
            "c" => self.c = Some(num(key, value)?),
            "L" => self.levels = Some(num(key, value)?),
            "D" => self.file_size = Some(num(key, value)?),
            "epochs" => self.epochs = Some(num(key, value)?),
            "seed" => self.seed = Some(num(key, value)?),
            "kind" => {
                self.kind = Some(match value {
                    "euclidean" | "euclidean-sample" => RandomKind::EuclideanSample,
                    "graph" | "random-graph-shortest-path" => RandomKind::RandomGraphShortestPath,
                    _ => return Err(Error::InvalidParameter(format!("unknown random kind `{value}`"))),
                })
            }
            _ => return Err(Error::InvalidParameter(format!("unknown parameter `{key}`"))),
        }
        Ok(())
    }

    fn from_simulate(a: &SimulateArgs) -> Result<Self> {
        let mut cfg = RunConfig::new("simulate");
        cfg.alg = Some(a.alg);
        cfg.generator = a.generator;
        cfg.instance = a.instance.clone();
        for p in &a.params {
            cfg.set_param(p)?;
        }
        cfg.file_size = a.file_size.or(cfg.file_size);
        cfg.seed = a.seed.or(cfg.seed);
        cfg.out = a.out.clone();
        if cfg.generator.is_none() && cfg.instance.is_none() {
            return Err(Error::InvalidParameter("simulate needs --gen or --instance".into()));
        }
        Ok(cfg)
    }

    fn from_lp(a: &LpArgs) -> Result<Self> {
        let mut cfg = RunConfig::new("lp");
        cfg.lp = Some(
            a.lp.or(a.model).ok_or_else(|| Error::InvalidParameter("lp needs a model: mtlm, dlm or dlm-no-short".into()))?,
        );
        cfg.beta2 = a.beta2;
        cfg.multiset_pairs = Some(a.multiset_pairs == OnOff::On);
        cfg.out = a.out.clone();
        Ok(cfg)
    }

    fn from_lowerbound(a: &LowerboundArgs) -> Result<Self> {
        let mut cfg = RunConfig::new("lowerbound");
        cfg.alg = Some(a.policy);
        for p in &a.params {
            cfg.set_param(p)?;
        }
        cfg.levels = a.levels.or(cfg.levels).or(Some(12));
        cfg.k = a.k.or(cfg.k).or(Some(200));
        cfg.c = a.c.or(cfg.c).or(Some(paper_constants().c0));
        cfg.file_size = a.file_size.or(cfg.file_size).or(Some(400));
        cfg.epochs = a.epochs.or(cfg.epochs).or(Some(20));
        cfg.seed = a.seed.or(cfg.seed).or(Some(0));
        cfg.verify_state_graph = a.verify_state_graph;
        cfg.out = a.out.clone();
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    version: &'static str,
    config: &'a RunConfig,
    result: T,
}

fn write_report<T: Serialize>(dir: &Path, name: &str, cfg: &RunConfig, result: T) -> Result<()> {
    let text = serde_json::to_string_pretty(&Report { version: VERSION, config: cfg, result })?;
    fs::write(dir.join(name), text + "\n")?;
    Ok(())
}

fn out_dir(cfg: &RunConfig) -> Result<Option<PathBuf>> {
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.clone()))
        }
        None => Ok(None),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => RunConfig::from_simulate(a).and_then(|c| cmd_simulate(&c, out)),
        Command::Lp(a) => RunConfig::from_lp(a).and_then(|c| cmd_lp(&c, out)),
        Command::Lowerbound(a) => RunConfig::from_lowerbound(a).and_then(|c| cmd_lowerbound(&c, out)),
        Command::Constants => cmd_constants(out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NonCompetitive { .. } => EXIT_NON_COMPETITIVE,
                Error::NotOptimal(_) => EXIT_SOLVER,
                _ => EXIT_INPUT,
            }
        }
    }
}

fn make_instance(cfg: &RunConfig) -> Result<Instance> {
    if let Some(path) = &cfg.instance {
        return Instance::load(path);
    }
    let p = paper_constants();
    let d = cfg.file_size.unwrap_or(8);
    match cfg.generator.expect("checked when the config was built") {
        GenName::Linear => linear_instance(cfg.c.unwrap_or(p.c0), d),
        GenName::Bipartite => bipartite_instance(cfg.k.unwrap_or(3), cfg.f.unwrap_or(1.0), p.alpha, cfg.c.unwrap_or(p.c0), d),
        GenName::Random => random_instance(
            cfg.n.unwrap_or(5),
            d,
            cfg.steps.unwrap_or(100),
            cfg.seed.unwrap_or(0),
            cfg.kind.unwrap_or(RandomKind::EuclideanSample),
        ),
    }
}

fn make_policy(alg: AlgName, file_size: u64, seed: u64) -> Result<Box<dyn OnlinePolicy>> {
    Ok(match alg {
        AlgName::Mtm => Box::new(Mtm::new(file_size)),
        AlgName::Mtlm => Box::new(Mtlm::new(file_size)),
        AlgName::Dlm => Box::new(Dlm::new(file_size)?),
        AlgName::Stay => Box::new(Stay),
        AlgName::Random => {
            let c = paper_constants().c0;
            Box::new(crate::algorithms::FixedPhase::with_factor(RandomRule::new(seed, 0.5), c, file_size))
        }
    })
}

pub fn cmd_simulate(cfg: &RunConfig, out: &mut dyn std::io::Write) -> Result<i32> {
    let inst = make_instance(cfg)?;
    let mut policy = make_policy(cfg.alg.unwrap_or(AlgName::Dlm), inst.file_size(), cfg.seed.unwrap_or(0))?;
    let run = run_online(policy.as_mut(), &inst)?;
    let opt = opt_dp(&inst);
    let report = competitive_report(&[(&inst, &run, &opt)])?;
    writeln!(out, "config {}", cfg.canonical_json())?;
    writeln!(out, "policy {}  points {}  D {}  steps {}", run.policy, inst.space.len(), inst.file_size(), run.steps())?;
    writeln!(out, "ALG {:.6}  OPT {:.6}", report.total_alg, report.total_opt)?;
    match report.ratio {
        Some(r) => writeln!(out, "ratio {r:.6}  offset {:.6}", report.additive_offset)?,
        None => writeln!(out, "ratio undefined  offset {:.6}", report.additive_offset)?,
    }
    writeln!(out, "checked phases {}  negative slack {}", report.phases.len(), report.negative_slack_phases)?;
    for w in report.warnings.iter().chain(&inst.notes) {
        writeln!(out, "note: {w}")?;
    }
    if let Some(dir) = out_dir(cfg)? {
        write_report(&dir, "run.json", cfg, &run)?;
        write_report(&dir, "report.json", cfg, &report)?;
        let part = phase_partition(&inst.space, &run, &opt)?;
        write_ledger_csv(&inst.space, &part.ledgers, fs::File::create(dir.join("ledger.csv"))?)?;
    }
    Ok(if report.negative_slack_phases == 0 { EXIT_OK } else { EXIT_VERIFICATION })
}

fn build_model(cfg: &RunConfig) -> LpModel {
    let pairs = cfg.multiset_pairs.unwrap_or(true);
    let params = cfg.beta2.map(DlmLpParams::with_beta2).unwrap_or_default();
    match cfg.lp.expect("checked when the config was built") {
        LpName::Mtlm => build_mtlm_lp(&MtlmLpParams::default()),
        LpName::Dlm => build_dlm_lp(&params, &DlmLpOptions { multiset_pairs: pairs, ..Default::default() }),
        LpName::DlmNoShort => {
            build_dlm_lp(&params, &DlmLpOptions { include_short: false, multiset_pairs: pairs, ..Default::default() })
        }
    }
}

#[derive(Serialize)]
struct LpResult<'a> {
    model: &'a str,
    status: LpStatus,
    objective: Option<f64>,
    iterations: usize,
    message: &'a Option<String>,
    witness: Option<crate::lp::Witness>,
}

pub fn cmd_lp(cfg: &RunConfig, out: &mut dyn std::io::Write) -> Result<i32> {
    let model = build_model(cfg);
    let sol: LpSolution = solve_lp(&model);
    let r0 = paper_constants().r0;
    writeln!(out, "config {}", cfg.canonical_json())?;
    writeln!(out, "model {}  variables {}  constraints {}", model.name, model.vars.len(), model.constraints.len())?;
    let code = match sol.status {
        LpStatus::Optimal => {
            writeln!(out, "objective {:.9}", sol.objective_value)?;
            EXIT_OK
        }
        LpStatus::Unbounded if cfg.lp == Some(LpName::DlmNoShort) => {
            writeln!(out, "objective unbounded (>= R0 = {r0:.9})")?;
            EXIT_OK
        }
        status => {
            writeln!(out, "solver status {status:?}: {}", sol.message.clone().unwrap_or_default())?;
            EXIT_SOLVER
        }
    };
    if let Some(dir) = out_dir(cfg)? {
        fs::write(dir.join(format!("{}.lp", model.name)), export_lp(&model))?;
        let result = LpResult {
            model: &model.name,
            status: sol.status,
            objective: sol.is_optimal().then_some(sol.objective_value),
            iterations: sol.iterations,
            message: &sol.message,
            witness: extract_witness(&sol, &model).ok(),
        };
        write_report(&dir, "solution.json", cfg, result)?;
    }
    Ok(code)
}

fn make_rule(alg: AlgName, seed: u64) -> Result<Box<dyn PhaseRule>> {
    Ok(match alg {
        AlgName::Mtm => Box::new(MtmRule),
        AlgName::Mtlm => Box::new(MtlmRule::default()),
        AlgName::Stay => Box::new(StayRule),
        AlgName::Random => Box::new(RandomRule::new(seed, 0.5)),
        AlgName::Dlm => {
            return Err(Error::InvalidParameter("dlm does not use phases of a fixed length".into()));
        }
    })
}

pub fn cmd_lowerbound(cfg: &RunConfig, out: &mut dyn std::io::Write) -> Result<i32> {
    let p = paper_constants();
    let levels = cfg.levels.unwrap_or(12);
    let c = cfg.c.unwrap_or(p.c0);
    writeln!(out, "config {}", cfg.canonical_json())?;
    if cfg.verify_state_graph {
        let r = verify_state_graph(levels, c);
        writeln!(out, "state graph L={levels} c={c:.6}")?;
        writeln!(out, "case 1 telescoped {:.3e}  with finishing {:.9}", r.case1_telescoped, r.case1)?;
        for (m, g) in r.case2.iter().enumerate() {
            writeln!(out, "case 2 m={m:<3} {g:.9}")?;
        }
        writeln!(out, "case 2 minimum {:.9}", r.case2_min)?;
        writeln!(out, "case 2 factor at c {:.6}  at c_T {:.6}", r.case2_factor, r.case2_factor_at_ct)?;
        writeln!(out, "all closed paths nonnegative: {}", r.all_nonnegative)?;
        if let Some(dir) = out_dir(cfg)? {
            write_report(&dir, "state_graph.json", cfg, &r)?;
        }
        return Ok(if r.all_nonnegative && r.case2_factor_at_ct > 0.768 { EXIT_OK } else { EXIT_VERIFICATION });
    }
    let seed = cfg.seed.unwrap_or(0);
    let params =
        GameParams::new(levels, cfg.k.unwrap_or(200), c, cfg.file_size.unwrap_or(400)).with_seed(seed);
    let mut game = Game::new(params)?;
    let mut rule = make_rule(cfg.alg.unwrap_or(AlgName::Mtlm), seed)?;
    let ledger = game.run_epochs(rule.as_mut(), cfg.epochs.unwrap_or(20))?;
    writeln!(out, "{:>5} {:>9} {:>10} {:>10} {:>14} {:>14} {:>14} {:>14}", "epoch", "play", "from", "to", "C_ALG", "C_OPT", "gain", "bound")?;
    for e in &ledger.epochs {
        for pl in &e.plays {
            writeln!(
                out,
                "{:>5} {:>9} {:>10} {:>10} {:>14.6} {:>14.6} {:>14.6} {:>14.6}",
                e.index,
                pl.kind.as_str(),
                pl.state_in.to_string(),
                pl.next.to_string(),
                pl.c_alg,
                pl.c_opt,
                pl.gain,
                pl.bound
            )?;
        }
    }
    let eps = epsilon(levels, ledger.params.k);
    writeln!(out, "policy {}  epochs {}  phase length {}", ledger.policy, ledger.epochs.len(), ledger.phase_len)?;
    writeln!(out, "epsilon {eps:.6}  R0 - epsilon {:.6}", ledger.factor)?;
    writeln!(out, "ratio {:.6}  gamma {:.6}", ledger.ratio, ledger.gamma)?;
    writeln!(out, "bounds met {}  transitions valid {}", ledger.bounds_met, ledger.transitions_valid)?;
    for n in &ledger.notes {
        writeln!(out, "note: {n}")?;
    }
    if let Some(dir) = out_dir(cfg)? {
        write_report(&dir, "ledger.json", cfg, &ledger)?;
        ledger.write_csv(fs::File::create(dir.join("plays.csv"))?)?;
    }
    Ok(if ledger.bounds_met && ledger.transitions_valid { EXIT_OK } else { EXIT_VERIFICATION })
}

pub fn cmd_constants(out: &mut dyn std::io::Write) -> Result<i32> {
    let p = paper_constants();
    writeln!(out, "{:<6} {:>20} {:>7} {:>12}  definition", "name", "value", "approx", "residual")?;
    let rows = [
        ("c0", p.c0, p.c0_residual(), "root of 3c^3 - 8c - 4"),
        ("R0", p.r0, p.r0_residual(), "largest root of R^3 - 5R^2 + 3R + 3"),
        ("alpha", p.alpha, p.alpha * (p.r0 - 1.0) - 1.0, "1/(R0 - 1)"),
        ("c_T", p.c_t, p.c_t * (p.r0 * p.r0 - 2.0 * p.r0 - 1.0) - 2.0 * (p.r0 + 1.0), "2(R0 + 1)/(R0^2 - 2R0 - 1)"),
        ("t", p.t_lin, (p.t_lin - 1.0) * p.r0 - 1.0, "1 + 1/R0"),
    ];
    for (name, v, res, def) in rows {
        writeln!(out, "{name:<6} {v:>20.16} {v:>7.3} {res:>12.1e}  {def}")?;
    }
    Ok(EXIT_OK)
}
