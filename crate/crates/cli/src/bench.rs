//! Grid sweeps over generated instances.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use crownkernel::graph::{generate_instance, InstanceKind};
use crownkernel::kernels::{wcoc, wvi, Instance, KernelOptions, Problem, Verdict};

use crate::{kernel_report, mode_name, resolve_mode, run_kernel, write_atomic, ModeArg, ProblemArg, ProblemArgs};

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    /// Vertex counts, as `a,b,c` or `lo..hi` (inclusive).
    #[arg(long, default_value = "50")]
    n: String,
    /// Edge probabilities, comma separated.
    #[arg(long, default_value = "0.1")]
    edge_p: String,
    /// Integrity budgets (vi, wvi).
    #[arg(short = 'p', default_value = "")]
    p: String,
    /// Deletion budgets (coc, wcoc).
    #[arg(short = 'k', default_value = "")]
    k: String,
    /// Component bounds (coc, wcoc).
    #[arg(short = 'W', default_value = "")]
    w: String,
    #[arg(long, default_value_t = 1)]
    max_weight: u64,
    /// Instances per grid cell.
    #[arg(long, default_value_t = 3)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for one report per run.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Parse `a,b,c` or `lo..hi` into a list of integers.
pub fn parse_int_list(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u64 = lo.trim().parse().with_context(|| format!("bad range start in `{s}`"))?;
        let hi: u64 = hi.trim().parse().with_context(|| format!("bad range end in `{s}`"))?;
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|t| t.trim().parse().with_context(|| format!("bad integer `{t}`"))).collect()
}

fn parse_float_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            let x: f64 = t.trim().parse().with_context(|| format!("bad probability `{t}`"))?;
            if !(0.0..=1.0).contains(&x) {
                bail!("probability {x} is outside [0, 1]");
            }
            Ok(x)
        })
        .collect()
}

/// The size a terminal kernel must respect, measured in vertices for the
/// unweighted problems and in weight for the weighted ones. For wVI the
/// smallest achievable heaviest component is unknown here, so the budget
/// itself stands in for it.
pub fn kernel_bound(inst: &Instance) -> u64 {
    let (b, w) = (inst.budget, inst.cap);
    match inst.problem {
        Problem::Vi => 3 * b * b,
        Problem::Wvi => wvi::weight_gate(b, b),
        Problem::Coc => 2 * b * w,
        Problem::Wcoc => wcoc::weight_gate(b, w),
    }
}

#[derive(Default)]
struct Cell {
    runs: u64,
    yes: u64,
    no: u64,
    reduced: u64,
    small: u64,
    max_size: u64,
    within: u64,
    total_us: u128,
}

pub fn cmd_bench(a: BenchArgs) -> Result<()> {
    let problem = Problem::from(a.problem);
    let ns = parse_int_list(&a.n)?;
    let ps = parse_float_list(&a.edge_p)?;
    let (budgets, caps) = if problem.is_integrity() {
        (parse_int_list(&a.p)?, vec![0])
    } else {
        (parse_int_list(&a.k)?, parse_int_list(&a.w)?)
    };
    if ns.is_empty() || ps.is_empty() || budgets.is_empty() || caps.is_empty() || a.runs == 0 {
        bail!("empty grid: every axis needs at least one value and --runs must be positive");
    }
    if let Some(d) = &a.out_dir {
        fs::create_dir_all(d).with_context(|| format!("cannot create {}", d.display()))?;
    }
    let weighted = matches!(problem, Problem::Wvi | Problem::Wcoc);
    let size_label = if weighted { "weight" } else { "vertices" };
    let mut table = String::new();
    writeln!(
        table,
        "{:<6} {:>5} {:>6} {:>6} {:>4} {:>5} {:>4} {:>4} {:>7} {:>5} {:>9} {:>9} {:>7} {:>10}",
        "prob", "n", "edge_p", "budget", "W", "runs", "yes", "no", "reduced", "small", "max_size", "bound", "within", "mean_ms"
    )?;
    let mut seed = a.seed;
    for &n in &ns {
        for &ep in &ps {
            for &b in &budgets {
                for &w in &caps {
                    let mut cell = Cell::default();
                    for _ in 0..a.runs {
                        seed += 1;
                        let max_weight = if weighted { a.max_weight } else { 1 };
                        let kind = InstanceKind::RandomGnp { n: n as u32, p: ep, max_weight };
                        let graph = generate_instance(&kind, seed)?;
                        let args = if problem.is_integrity() {
                            ProblemArgs::new(a.problem, Some(b), None, None)
                        } else {
                            ProblemArgs::new(a.problem, None, Some(b), Some(w))
                        };
                        let inst = args.instance(graph)?;
                        let mode = resolve_mode(a.mode, &inst);
                        let start = Instant::now();
                        let out = run_kernel(&inst, mode, &KernelOptions::default())
                            .with_context(|| format!("run with seed {seed}"))?;
                        let us = start.elapsed().as_micros();
                        let size = if weighted {
                            out.instance.graph.total_weight()
                        } else {
                            out.instance.graph.vertex_count() as u64
                        };
                        cell.runs += 1;
                        cell.total_us += us;
                        match out.verdict {
                            Verdict::DecidedYes => cell.yes += 1,
                            Verdict::DecidedNo => cell.no += 1,
                            Verdict::Reduced => cell.reduced += 1,
                            Verdict::AlreadySmall => cell.small += 1,
                        }
                        let terminal = matches!(out.verdict, Verdict::Reduced | Verdict::AlreadySmall);
                        if terminal {
                            cell.max_size = cell.max_size.max(size);
                        }
                        if !terminal || size <= kernel_bound(&out.instance) {
                            cell.within += 1;
                        }
                        if let Some(d) = &a.out_dir {
                            let coc_mode = (problem == Problem::Coc).then_some(mode);
                            let r = kernel_report(&inst, "generated", coc_mode, &out, seed, us);
                            let name = format!("run-{}-n{n}-e{ep}-b{b}-w{w}-s{seed}.txt", problem);
                            write_atomic(&d.join(name), &r.to_text())?;
                        }
                    }
                    let bound = kernel_bound(&Instance { problem, graph: Default::default(), budget: b, cap: w });
                    writeln!(
                        table,
                        "{:<6} {:>5} {:>6} {:>6} {:>4} {:>5} {:>4} {:>4} {:>7} {:>5} {:>9} {:>9} {:>7} {:>10.3}",
                        problem.name(),
                        n,
                        ep,
                        b,
                        if problem.is_integrity() { "-".to_string() } else { w.to_string() },
                        cell.runs,
                        cell.yes,
                        cell.no,
                        cell.reduced,
                        cell.small,
                        cell.max_size,
                        bound,
                        format!("{}/{}", cell.within, cell.runs),
                        cell.total_us as f64 / cell.runs as f64 / 1000.0,
                    )?;
                }
            }
        }
    }
    let mode = if problem == Problem::Coc { mode_name(a.mode) } else { "-" };
    println!("# kernel size in {size_label}; bound is measured on the kernel's own budget; mode {mode}");
    print!("{table}");
    Ok(())
}
