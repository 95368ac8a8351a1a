//! `netctrl` command-line front end.
//!
//! Exit codes: 0 success (and route agreement for `analyze`), 1 input error,
//! 2 infeasible steering, 3 disagreement between decision routes.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::digraph::SpanningForest;
use crate::dot;
use crate::dynamics::{simulate, steer, DynamicsError, LeaderSignal};
use crate::graph_model::{parse_topology, CommunicationTopology};
use crate::numeric_oracle::{oracle_decide_param, OracleConfig, OracleResult, DEFAULT_TRIALS};
use crate::parameterization::{build_parameterization, flow_graph, WeightAssignment};
use crate::structural_analysis::{
    certificate_decision, line_graph, quotient_graph, theorem_decision, transfer_graph, transfer_matrix,
    CertificateOutcome, Decision, MinRankResult, DEFAULT_RANK_CAP,
};

pub const SCHEMA: &str = "netctrl-report/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_DISAGREEMENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "netctrl", version, about = "Structural controllability of leader-follower consensus networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide structural controllability by all routes and emit a JSON report.
    Analyze(AnalyzeArgs),
    /// Write one of the associated graphs as Graphviz DOT.
    Export(ExportArgs),
    /// Simulate the network, or steer the followers to a target.
    Simulate(SimulateArgs),
}

#[derive(Debug, clap::Args)]
struct AnalyzeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Largest σ for the exhaustive min-rank sweep.
    #[arg(long, default_value_t = DEFAULT_RANK_CAP)]
    rank_cap: usize,
    /// Kalman-rank trials; 0 skips the oracle.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    oracle_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the timings field so output is byte-reproducible.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportKind {
    Flow,
    Transfer,
    Line,
    Quotient,
    Topology,
}

#[derive(Debug, clap::Args)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    what: ExportKind,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated positive weights in edge order, or `random:<seed>`.
    #[arg(long)]
    weights: String,
    /// Initial node states (comma-separated); with --target, follower states only is also accepted.
    #[arg(long)]
    x0: String,
    /// Follower target states; switches to steering mode.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    tf: f64,
    /// Step size, default tf/1000.
    #[arg(long)]
    dt: Option<f64>,
    /// Trajectory (or steering plan) CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replay trajectory CSV in steering mode.
    #[arg(long)]
    trajectory_out: Option<PathBuf>,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

/// Runs the CLI with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, stdout),
        Command::Export(a) => cmd_export(&a, stdout),
        Command::Simulate(a) => cmd_simulate(&a, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn load(path: &Path) -> Result<CommunicationTopology, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse_topology(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::input(format!("stdout: {e}"))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TopologySummary {
    pub nodes: usize,
    pub leaders: Vec<usize>,
    pub followers: usize,
    pub sigma: usize,
    pub components: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremSection {
    pub decision: Decision,
    pub route: &'static str,
    pub rule: &'static str,
    pub components: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinRankSection {
    pub value: usize,
    pub required: usize,
    /// 1-based weight ids.
    pub witness: Vec<usize>,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeSection {
    /// 1-based γ index of the root.
    pub root: usize,
    pub spans: bool,
    /// `[parent, child]` pairs, 1-based γ indices.
    pub edges: Vec<[usize; 2]>,
    pub unreachable: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSection {
    /// `decided` or `inconclusive`.
    pub status: &'static str,
    pub decision: Option<Decision>,
    pub route: &'static str,
    pub rank_cap: usize,
    pub min_rank: MinRankSection,
    pub spanning_tree: TreeSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSection {
    pub decision: Decision,
    pub route: &'static str,
    pub trials: usize,
    pub seed: u64,
    pub trials_run: usize,
    pub rank_achieved: usize,
    pub required: usize,
    /// Exact integer weights, `w1` first.
    pub witness: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub parameterization: f64,
    pub theorem: f64,
    pub certificate: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema: &'static str,
    pub topology: TopologySummary,
    pub theorem: TheoremSection,
    pub certificate: CertificateSection,
    pub oracle: Option<OracleSection>,
    pub agreement: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<Timings>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    pub rank_cap: usize,
    /// `None` skips the oracle.
    pub oracle: Option<OracleConfig>,
    pub timings: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            rank_cap: DEFAULT_RANK_CAP,
            oracle: Some(OracleConfig::default()),
            timings: true,
        }
    }
}

fn tree_section(tree: &SpanningForest, root: usize) -> TreeSection {
    TreeSection {
        root: root + 1,
        spans: tree.spans,
        edges: tree.parent.iter().map(|(&c, &p)| [p + 1, c + 1]).collect(),
        unreachable: tree.unreachable.iter().map(|v| v + 1).collect(),
    }
}

fn min_rank_section(r: &MinRankResult, n: usize) -> MinRankSection {
    MinRankSection {
        value: r.value,
        required: n,
        witness: r.witness.iter().map(|k| k + 1).collect(),
        exhaustive: r.exhaustive,
    }
}

fn oracle_section(r: &OracleResult, cfg: &OracleConfig, n: usize) -> OracleSection {
    OracleSection {
        decision: Decision::from_bool(r.controllable),
        route: "Oracle",
        trials: cfg.trials(),
        seed: cfg.seed(),
        trials_run: r.trials_run,
        rank_achieved: r.rank_achieved,
        required: n,
        witness: r
            .witness
            .as_ref()
            .map(|w| w.values().iter().map(|x| x.to_string()).collect()),
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs every decision route on one topology.
pub fn analyze(topology: &CommunicationTopology, opts: &AnalyzeOptions) -> AnalysisReport {
    let t0 = Instant::now();
    let param = build_parameterization(topology);
    let t_param = ms(t0);

    let t0 = Instant::now();
    let theorem = theorem_decision(topology);
    let t_theorem = ms(t0);
    let components: Vec<Vec<usize>> = topology
        .connected_components()
        .components
        .iter()
        .map(|c| c.iter().copied().collect())
        .collect();

    let t0 = Instant::now();
    let outcome = certificate_decision(&param, opts.rank_cap);
    let t_cert = ms(t0);
    let sigma = param.sigma();
    let certificate = match &outcome {
        CertificateOutcome::Decided(v) => {
            let crate::structural_analysis::Evidence::Certificate { min_rank, tree } = &v.evidence else {
                unreachable!("certificate route carries certificate evidence")
            };
            CertificateSection {
                status: "decided",
                decision: Some(v.decision),
                route: "Certificate",
                rank_cap: opts.rank_cap,
                min_rank: min_rank_section(min_rank, param.n()),
                spanning_tree: tree_section(tree, sigma),
            }
        }
        CertificateOutcome::Inconclusive { min_rank, tree } => CertificateSection {
            status: "inconclusive",
            decision: None,
            route: "Certificate",
            rank_cap: opts.rank_cap,
            min_rank: min_rank_section(min_rank, param.n()),
            spanning_tree: tree_section(tree, sigma),
        },
    };

    let t0 = Instant::now();
    let oracle = opts
        .oracle
        .map(|cfg| oracle_section(&oracle_decide_param(&param, &cfg), &cfg, param.n()));
    let t_oracle = ms(t0);

    let mut decisions = vec![theorem.decision];
    decisions.extend(certificate.decision);
    decisions.extend(oracle.as_ref().map(|o| o.decision));
    let agreement = decisions.iter().all(|d| *d == theorem.decision);

    AnalysisReport {
        schema: SCHEMA,
        topology: TopologySummary {
            nodes: topology.node_count(),
            leaders: topology.leaders().iter().copied().collect(),
            followers: topology.follower_count(),
            sigma,
            components: components.clone(),
        },
        theorem: TheoremSection {
            decision: theorem.decision,
            route: "TheoremShortcut",
            rule: if topology.leader_count() == 1 {
                "connected"
            } else {
                "leader-follower connected"
            },
            components,
        },
        certificate,
        oracle,
        agreement,
        timings_ms: opts.timings.then_some(Timings {
            parameterization: t_param,
            theorem: t_theorem,
            certificate: t_cert,
            oracle: t_oracle,
        }),
    }
}

fn cmd_analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let topology = load(&args.input)?;
    let oracle = if args.oracle_trials == 0 {
        None
    } else {
        Some(OracleConfig::with_seed(args.oracle_trials, args.seed).map_err(|e| CliError::input(e.to_string()))?)
    };
    let opts = AnalyzeOptions {
        rank_cap: args.rank_cap,
        oracle,
        timings: !args.no_timings,
    };
    let report = analyze(&topology, &opts);
    emit(args.out.as_deref(), &report.to_json(), stdout)?;
    Ok(if report.agreement { EXIT_OK } else { EXIT_DISAGREEMENT })
}

/// DOT text for one of the associated graphs.
pub fn export(topology: &CommunicationTopology, what: ExportKind) -> String {
    let param = build_parameterization(topology);
    match what {
        ExportKind::Topology => dot::topology_dot(topology),
        ExportKind::Flow => dot::flow_dot(&flow_graph(&param)),
        ExportKind::Transfer => {
            let tm = transfer_matrix(&param);
            dot::transfer_dot(&tm, &transfer_graph(&tm))
        }
        ExportKind::Line => dot::line_dot(&line_graph(&flow_graph(&param))),
        ExportKind::Quotient => dot::quotient_dot(&quotient_graph(&line_graph(&flow_graph(&param)), param.sigma())),
    }
}

fn cmd_export(args: &ExportArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let topology = load(&args.input)?;
    emit(args.out.as_deref(), &export(&topology, args.what), stdout)?;
    Ok(EXIT_OK)
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::input(format!("--{flag}: `{s}` is not a finite number")))
        })
        .collect()
}

/// `random:<seed>` draws uniform weights in [0.5, 2].
fn parse_weights(text: &str, sigma: usize) -> Result<WeightAssignment<f64>, CliError> {
    let values = if let Some(seed) = text.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| CliError::input(format!("--weights: bad seed `{seed}`")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..sigma).map(|_| rng.gen_range(0.5..=2.0)).collect()
    } else if sigma == 0 && text.trim().is_empty() {
        Vec::new()
    } else {
        parse_list("weights", text)?
    };
    if values.len() != sigma {
        return Err(CliError::input(format!(
            "--weights: expected {sigma} values, found {}",
            values.len()
        )));
    }
    WeightAssignment::new(values).map_err(|e| CliError::input(format!("--weights: {e}")))
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let topology = load(&args.input)?;
    let w = parse_weights(&args.weights, topology.sigma())?;
    let x0 = parse_list("x0", &args.x0)?;
    let dt = args.dt.unwrap_or(args.tf * 1e-3);
    let dyn_err = |e: DynamicsError| match e {
        DynamicsError::SteeringInfeasible { .. } => CliError {
            code: EXIT_INFEASIBLE,
            message: e.to_string(),
        },
        other => CliError::input(other.to_string()),
    };
    match &args.target {
        None => {
            let tr = simulate(&topology, &w, &LeaderSignal::Zero, &x0, args.tf, dt).map_err(dyn_err)?;
            emit(args.out.as_deref(), &tr.to_csv(), stdout)?;
        }
        Some(target) => {
            let target = parse_list("target", target)?;
            let plan = steer(&topology, &w, &x0, &target, args.tf, dt).map_err(dyn_err)?;
            emit(args.out.as_deref(), &plan.to_csv(), stdout)?;
            if let Some(p) = &args.trajectory_out {
                emit(Some(p), &plan.replay.to_csv(), stdout)?;
            }
            let norm = target.iter().map(|x| x * x).sum::<f64>().sqrt();
            let _ = writeln!(
                stderr,
                "steering: {} steps of {:e} s, achieved error {:e} (relative {:e})",
                plan.control.len(),
                plan.step,
                plan.predicted_error,
                if norm > 0.0 { plan.predicted_error / norm } else { plan.predicted_error }
            );
        }
    }
    Ok(EXIT_OK)
}
