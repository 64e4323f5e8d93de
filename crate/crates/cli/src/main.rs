//! `crownkernel`: kernelize, solve, verify, generate and benchmark.
//!
//! Exit codes: 0 for a reduced, already small or yes instance (and for a
//! passing verification), 1 for a no-instance (or a failing verification),
//! 2 for usage, parse, cap and precondition errors.

mod bench;
mod report;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use crownkernel::graph::{generate_instance, is_claw_free, parse_graph, render_graph, InstanceKind};
use crownkernel::kernels::{
    kernelize_coc2, kernelize_coc_fpt, kernelize_vi, kernelize_wcoc, kernelize_wvi, replay, Coc2Mode, Instance,
    KernelOptions, KernelOutcome, Problem, Verdict,
};
use crownkernel::oracle::{brute_solve, cap_from_env, CAP_ENV};
use crownkernel::WeightedGraph;
use sha2::{Digest, Sha256};

use report::{render_set, RunReport};

#[derive(Parser)]
#[command(name = "crownkernel", version, about = "Crown-decomposition kernels for vertex integrity and component order connectivity")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Shrink an instance to a kernel and write a replayable report.
    Kernelize(KernelizeArgs),
    /// Solve a small instance exactly.
    Solve(SolveArgs),
    /// Check a kernel against its report and, by exhaustive search, against the input.
    Verify(VerifyArgs),
    /// Generate a seeded instance.
    Gen(GenArgs),
    /// Kernelize a grid of generated instances and tabulate kernel sizes.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Vi,
    Wvi,
    Coc,
    Wcoc,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Vi => Problem::Vi,
            ProblemArg::Wvi => Problem::Wvi,
            ProblemArg::Coc => Problem::Coc,
            ProblemArg::Wcoc => Problem::Wcoc,
        }
    }
}

/// Algorithm choice for `coc`; ignored by the other problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fpt,
    PolyW1,
    PolyClawfree,
    /// `poly-w1` when W = 1, otherwise `poly-clawfree`.
    Poly,
    /// `poly-w1` when W = 1, `poly-clawfree` on claw-free graphs, otherwise `fpt`.
    Auto,
}

#[derive(Args, Clone, Debug)]
pub struct ProblemArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    /// Integrity budget (vi, wvi).
    #[arg(short = 'p')]
    p: Option<u64>,
    /// Deletion budget (coc, wcoc).
    #[arg(short = 'k')]
    k: Option<u64>,
    /// Component bound (coc, wcoc).
    #[arg(short = 'W')]
    w: Option<u64>,
}

#[derive(Args)]
struct KernelizeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    /// Input graph; standard input when omitted.
    #[arg(short = 'i', long)]
    input: Option<PathBuf>,
    /// Kernel graph; standard output when omitted.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Run report; standard error when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Recorded in the report; the kernelizers themselves are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Re-verify every decomposition while running.
    #[arg(long)]
    audit: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(short = 'i', long)]
    input: Option<PathBuf>,
    /// Largest vertex count the exhaustive search accepts.
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// The original input graph.
    #[arg(short = 'i', long)]
    input: PathBuf,
    /// The kernel graph written by `kernelize`.
    #[arg(long)]
    kernel: PathBuf,
    /// The report written by `kernelize`.
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    cap: Option<usize>,
    /// Only check the certificate replay.
    #[arg(long)]
    skip_oracle: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Gnp,
    ClawfreeLine,
    DisjointCliques,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, default_value_t = 20)]
    n: u32,
    #[arg(long, default_value_t = 0.2)]
    edge_p: f64,
    #[arg(long, default_value_t = 1)]
    max_weight: u64,
    /// Vertices of the base graph for `clawfree-line`.
    #[arg(long, default_value_t = 8)]
    base_n: u32,
    #[arg(long, default_value_t = 3)]
    count: u32,
    #[arg(long, default_value_t = 4)]
    size: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

/// A failure with its exit code: 1 for a negative result, 2 for bad input.
struct Failure(u8, anyhow::Error);

fn usage(e: anyhow::Error) -> Failure {
    Failure(2, e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Kernelize(a) => cmd_kernelize(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Gen(a) => cmd_gen(a).map(|()| 0).map_err(usage),
        Cmd::Bench(a) => bench::cmd_bench(a).map(|()| 0).map_err(usage),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn read_input(path: Option<&Path>) -> Result<Vec<u8>> {
    match path {
        Some(p) => fs::read(p).with_context(|| format!("cannot read {}", p.display())),
        None => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf).context("cannot read standard input")?;
            Ok(buf)
        }
    }
}

fn parse_bytes(bytes: &[u8]) -> Result<WeightedGraph> {
    let text = std::str::from_utf8(bytes).context("input is not UTF-8")?;
    Ok(parse_graph(text)?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write through a temporary sibling and rename, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot move {} into place", path.display()))
}

impl ProblemArgs {
    pub fn new(problem: ProblemArg, p: Option<u64>, k: Option<u64>, w: Option<u64>) -> Self {
        ProblemArgs { problem, p, k, w }
    }

    /// The instance, or a usage error naming the missing parameter.
    pub fn instance(&self, graph: WeightedGraph) -> Result<Instance> {
        let need = |v: Option<u64>, flag: &str| v.with_context(|| format!("{} needs {flag}", Problem::from(self.problem)));
        Ok(match self.problem {
            ProblemArg::Vi => Instance::vi(graph, need(self.p, "-p")?),
            ProblemArg::Wvi => Instance::wvi(graph, need(self.p, "-p")?),
            ProblemArg::Coc => Instance::coc(graph, need(self.k, "-k")?, need(self.w, "-W")?),
            ProblemArg::Wcoc => Instance::wcoc(graph, need(self.k, "-k")?, need(self.w, "-W")?),
        })
    }
}

/// The concrete algorithm `mode` stands for on `inst`.
pub fn resolve_mode(mode: ModeArg, inst: &Instance) -> ModeArg {
    match mode {
        ModeArg::Poly if inst.cap == 1 => ModeArg::PolyW1,
        ModeArg::Poly => ModeArg::PolyClawfree,
        ModeArg::Auto if inst.cap == 1 => ModeArg::PolyW1,
        ModeArg::Auto if is_claw_free(&inst.graph) => ModeArg::PolyClawfree,
        ModeArg::Auto => ModeArg::Fpt,
        m => m,
    }
}

pub fn mode_name(m: ModeArg) -> &'static str {
    match m {
        ModeArg::Fpt => "fpt",
        ModeArg::PolyW1 => "poly-w1",
        ModeArg::PolyClawfree => "poly-clawfree",
        ModeArg::Poly => "poly",
        ModeArg::Auto => "auto",
    }
}

/// Run the kernelizer for `inst`; `mode` must already be resolved.
pub fn run_kernel(inst: &Instance, mode: ModeArg, opts: &KernelOptions) -> Result<KernelOutcome> {
    Ok(match inst.problem {
        Problem::Vi => kernelize_vi(inst, opts)?,
        Problem::Wvi => kernelize_wvi(inst, opts)?,
        Problem::Wcoc => kernelize_wcoc(inst, opts)?,
        Problem::Coc => match mode {
            ModeArg::PolyW1 => kernelize_coc2(inst, Coc2Mode::MatchingSeeded, opts)?,
            ModeArg::PolyClawfree => kernelize_coc2(inst, Coc2Mode::Clawfree, opts)?,
            _ => kernelize_coc_fpt(inst, opts)?,
        },
    })
}

fn set_params(r: &mut RunReport, inst: &Instance) {
    r.set("problem", inst.problem);
    if inst.problem.is_integrity() {
        r.set("params.p", inst.budget);
    } else {
        r.set("params.k", inst.budget);
        r.set("params.W", inst.cap);
    }
}

/// The full report of one kernelization run.
pub fn kernel_report(
    inst: &Instance,
    input_hash: &str,
    mode: Option<ModeArg>,
    out: &KernelOutcome,
    seed: u64,
    micros: u128,
) -> RunReport {
    let mut r = RunReport::default();
    set_params(&mut r, inst);
    if let Some(m) = mode {
        r.set("params.mode", mode_name(m));
    }
    r.set("input.sha256", input_hash);
    r.set("input.vertices", inst.graph.vertex_count());
    r.set("input.weight", inst.graph.total_weight());
    r.set("verdict", out.verdict);
    r.set("kernel.vertices", out.instance.graph.vertex_count());
    r.set("kernel.weight", out.instance.graph.total_weight());
    r.set("kernel.budget", out.instance.budget);
    r.set("lambda_lb", out.lambda_lb.map_or_else(|| "none".to_string(), |l| l.to_string()));
    r.set("seed", seed);
    r.set("stats.iterations", out.stats.iterations);
    r.set("stats.bcds", out.stats.bcds);
    r.set("stats.dbes", out.stats.dbes);
    r.set("stats.nodes", out.stats.nodes);
    r.set("stats.guarantee_misses", out.stats.guarantee_misses);
    r.set("timings.kernelize_us", micros);
    r.set_certificate(&out.certificate);
    r
}

pub fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::DecidedNo => 1,
        _ => 0,
    }
}

fn cmd_kernelize(a: KernelizeArgs) -> Result<u8, Failure> {
    let bytes = read_input(a.input.as_deref()).map_err(usage)?;
    let graph = parse_bytes(&bytes).map_err(usage)?;
    let inst = a.problem.instance(graph).map_err(usage)?;
    let mode = (inst.problem == Problem::Coc).then(|| resolve_mode(a.mode, &inst));
    let opts = KernelOptions { audit: a.audit, max_iterations: a.max_iterations };
    let start = Instant::now();
    let out = run_kernel(&inst, mode.unwrap_or(ModeArg::Fpt), &opts).map_err(usage)?;
    let micros = start.elapsed().as_micros();
    let report = kernel_report(&inst, &sha256_hex(&bytes), mode, &out, a.seed, micros).to_text();
    let kernel = render_graph(&out.instance.graph);
    let written = match &a.output {
        Some(p) => write_atomic(p, &kernel),
        None => io::stdout().write_all(kernel.as_bytes()).context("cannot write kernel"),
    };
    written.map_err(usage)?;
    match &a.report {
        Some(p) => write_atomic(p, &report).map_err(usage)?,
        None => eprint!("{report}"),
    }
    if !out.violations.is_empty() {
        return Err(usage(anyhow::anyhow!("audit found violations: {}", out.violations.join("; "))));
    }
    Ok(verdict_code(out.verdict))
}

fn oracle_cap(flag: Option<usize>) -> usize {
    flag.unwrap_or_else(cap_from_env)
}

fn cmd_solve(a: SolveArgs) -> Result<u8, Failure> {
    let bytes = read_input(a.input.as_deref()).map_err(usage)?;
    let graph = parse_bytes(&bytes).map_err(usage)?;
    let inst = a.problem.instance(graph).map_err(usage)?;
    let cap = oracle_cap(a.cap);
    let res = brute_solve(&inst, cap).map_err(|e| usage(anyhow::anyhow!("{e} (raise with --cap or {CAP_ENV})")))?;
    let mut r = RunReport::default();
    set_params(&mut r, &inst);
    r.set("input.sha256", sha256_hex(&bytes));
    r.set("answer", if res.answer { "yes" } else { "no" });
    r.set("optimum", res.optimum.map_or_else(|| "none".to_string(), |o| o.to_string()));
    r.set("witness", res.witness.as_ref().map_or_else(|| "none".to_string(), render_set));
    if inst.problem.is_integrity() {
        r.set("p_ell", res.p_ell.map_or_else(|| "none".to_string(), |o| o.to_string()));
    }
    print!("{}", r.to_text());
    Ok(if res.answer { 0 } else { 1 })
}

/// Rebuild the input instance from the parameters stored in a report.
fn instance_from_report(r: &RunReport, graph: WeightedGraph) -> Result<Instance> {
    let problem: Problem = r.get("problem")?.parse().map_err(anyhow::Error::msg)?;
    Ok(if problem.is_integrity() {
        let p = r.get_u64("params.p")?;
        Instance { problem, graph, budget: p, cap: 0 }
    } else {
        Instance { problem, graph, budget: r.get_u64("params.k")?, cap: r.get_u64("params.W")? }
    })
}

fn cmd_verify(a: VerifyArgs) -> Result<u8, Failure> {
    let bytes = read_input(Some(&a.input)).map_err(usage)?;
    let graph = parse_bytes(&bytes).map_err(usage)?;
    let report_text = fs::read_to_string(&a.report).with_context(|| format!("cannot read {}", a.report.display()));
    let report = report_text.and_then(|t| RunReport::parse(&t)).map_err(usage)?;
    let kernel_text = fs::read_to_string(&a.kernel)
        .with_context(|| format!("cannot read {}", a.kernel.display()))
        .map_err(usage)?;
    let inst = instance_from_report(&report, graph).map_err(usage)?;
    let certificate = report.certificate().map_err(usage)?;

    let mut ok = true;
    let hash_ok = report.get("input.sha256").map_err(usage)? == sha256_hex(&bytes);
    println!("input hash: {}", if hash_ok { "pass" } else { "FAIL" });
    ok &= hash_ok;

    let replayed = replay(&inst, &certificate);
    let (replay_ok, kernel_inst) = match replayed {
        Ok(k) => {
            let budget_ok = report.get_u64("kernel.budget").map_err(usage)? == k.budget;
            (render_graph(&k.graph) == kernel_text && budget_ok, Some(k))
        }
        Err(e) => {
            println!("replay error: {e}");
            (false, None)
        }
    };
    println!("certificate replay: {}", if replay_ok { "pass" } else { "FAIL" });
    ok &= replay_ok;

    if !a.skip_oracle {
        if let Some(kernel_inst) = kernel_inst.filter(|_| replay_ok) {
            let cap = oracle_cap(a.cap);
            let solve = |i: &Instance| brute_solve(i, cap).map(|r| r.answer).map_err(|e| usage(e.into()));
            let original = solve(&inst)?;
            let kernel = match report.get("verdict").map_err(usage)? {
                "decided-yes" => true,
                "decided-no" => false,
                _ => solve(&kernel_inst)?,
            };
            let yn = |b: bool| if b { "yes" } else { "no" };
            let eq = original == kernel;
            println!("equivalence: {} (original {}, kernel {})", if eq { "pass" } else { "FAIL" }, yn(original), yn(kernel));
            ok &= eq;
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let kind = match a.kind {
        KindArg::Gnp => InstanceKind::RandomGnp { n: a.n, p: a.edge_p, max_weight: a.max_weight },
        KindArg::ClawfreeLine => InstanceKind::ClawfreeLinegraph { base_n: a.base_n, p: a.edge_p, max_weight: a.max_weight },
        KindArg::DisjointCliques => InstanceKind::DisjointCliques { count: a.count, size: a.size },
    };
    let text = render_graph(&generate_instance(&kind, a.seed)?);
    match &a.output {
        Some(p) => write_atomic(p, &text),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

