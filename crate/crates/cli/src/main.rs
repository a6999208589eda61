use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use streamlab_core::engines::{run_stream, write_transcript, Algorithm, Problem};
use streamlab_core::experiments::{
    amortized_nondecreasing, measure, run_suite, sweep, write_sweep_csv, Family, Instance,
    InstanceSpec, RunTotals, Suite, SuiteConfig, SuiteReport, SweepRow,
};
use streamlab_core::window::{internal_nodes, MaskedStream};
use streamlab_core::witnesses::{
    decode_conv_kn, decode_conv_toeplitz, decode_hamming_blocks, write_reports_csv, DecodeMethod,
    DecodeReport,
};

#[derive(Parser, Debug)]
#[command(
    name = "streamlab",
    version,
    about = "Online processor laboratory on a traced cell store"
)]
struct Cli {
    /// Output directory.
    #[arg(
        long,
        global = true,
        env = "STREAMLAB_OUT",
        default_value = "streamlab-out"
    )]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an instance bundle.
    Gen(InstanceArgs),
    /// Run a processor on an instance under tracing.
    Run(RunArgs),
    /// Run witness suites.
    Verify(VerifyArgs),
    /// Measure probes and information transfer across stream lengths.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
struct InstanceArgs {
    #[arg(long, default_value = "conv")]
    problem: Problem,
    /// kn, kqn, toeplitz, random or hamming.
    #[arg(long, default_value = "random")]
    family: Family,
    /// Stream length; Hamming instances default to the smallest valid size.
    #[arg(long)]
    n: Option<usize>,
    /// Alphabet size; defaults depend on the family.
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, default_value_t = 32)]
    w: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hamming construction parameter.
    #[arg(long, default_value_t = 2)]
    mu: usize,
    /// Hamming code parameter.
    #[arg(long, default_value_t = 1)]
    gamma: usize,
}

impl InstanceArgs {
    fn spec(&self) -> InstanceSpec {
        let family = match self.family {
            Family::Hamming { .. } => Family::Hamming {
                mu: self.mu,
                gamma: self.gamma,
            },
            other => other,
        };
        InstanceSpec {
            problem: self.problem,
            family,
            n: self.n,
            q: self.q,
            w: self.w,
            seed: self.seed,
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Load this bundle instead of generating one from the flags.
    #[arg(long)]
    instance_dir: Option<PathBuf>,
    #[arg(long, default_value = "naive")]
    algo: Algorithm,
    /// Also write the raw probe trace.
    #[arg(long)]
    trace: bool,
    /// Decode every node with the family's witness decoder.
    #[arg(long)]
    witness: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value = "conv")]
    problem: Problem,
    #[arg(long, default_value = "naive")]
    algo: Algorithm,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    q: u64,
    #[arg(long, default_value_t = 32)]
    w: u32,
    /// Toeplitz dimension for the fraction suite.
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long, default_value_t = 2)]
    mu: usize,
    #[arg(long, default_value_t = 1)]
    gamma: usize,
    #[arg(long, default_value_t = 20)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value = "conv")]
    problem: Problem,
    /// Algorithms to compare.
    #[arg(long, value_delimiter = ',', default_value = "naive,fast")]
    algo: Vec<Algorithm>,
    /// Stream lengths.
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "64,128,256,512,1024,2048,4096")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    q: u64,
    #[arg(long, default_value_t = 32)]
    w: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Serialize)]
struct WitnessSummary {
    method: DecodeMethod,
    nodes: usize,
    recovered: usize,
    failed: usize,
}

#[derive(Serialize)]
struct RunReport {
    problem: Problem,
    algorithm: Algorithm,
    family: String,
    n: usize,
    q: u64,
    w: u32,
    seed: u64,
    totals: RunTotals,
    outputs_csv: PathBuf,
    tree_csv: PathBuf,
    trace_csv: Option<PathBuf>,
    witness: Option<WitnessSummary>,
    wall_time_ms: u128,
}

#[derive(Serialize)]
struct VerifyReport {
    suites: Vec<SuiteReport>,
    passed: bool,
    warn: bool,
}

#[derive(Serialize)]
struct SweepReport {
    problem: Problem,
    rows: Vec<SweepRow>,
    /// Algorithms whose amortized transfer decreased somewhere.
    warn: Vec<Algorithm>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)
        .with_context(|| format!("writing {}", path.display()))
}

fn cmd_gen(out: &Path, args: &InstanceArgs) -> Result<bool> {
    let inst = Instance::generate(args.spec()).context("generating instance")?;
    inst.save(out)?;
    let m = inst.manifest();
    println!(
        "wrote {} instance to {} (n = {}, q = {}, {} nonzero operand symbols)",
        inst.spec.family,
        out.display(),
        m.params.n(),
        m.params.q(),
        m.fixed_nonzero
    );
    Ok(true)
}

fn witness_reports(inst: &Instance) -> Result<Option<(DecodeMethod, Vec<DecodeReport>)>> {
    let q = inst.params.q();
    let n = inst.params.n();
    let method = match (inst.spec.family, inst.spec.problem) {
        (Family::Kn, Problem::Convolution) => DecodeMethod::ConvKn,
        (Family::ToeplitzRandom, Problem::Convolution) => DecodeMethod::ConvToeplitz,
        (Family::Hamming { .. }, Problem::Hamming) => DecodeMethod::HammingBlocks,
        _ => return Ok(None),
    };
    let outputs = run_stream(
        inst.processor(Algorithm::Naive)?.as_ref(),
        inst.stream.as_slice(),
    )?;
    let mut reports = Vec::new();
    for v in internal_nodes(n)? {
        let visible = MaskedStream::new(&inst.stream, &v)?;
        let mut rep = match method {
            DecodeMethod::ConvKn => decode_conv_kn(&outputs, &v, &inst.fixed, &visible, q)?,
            DecodeMethod::ConvToeplitz => {
                decode_conv_toeplitz(&outputs, &v, &inst.fixed, &visible, q)?
            }
            DecodeMethod::HammingBlocks => {
                if v.ell * v.ell < n {
                    continue;
                }
                let h = inst
                    .hamming
                    .as_ref()
                    .context("hamming construction missing")?;
                let rep = decode_hamming_blocks(&outputs, &v, h, &visible)?;
                let draws = inst.draws.as_deref().unwrap_or_default();
                if rep
                    .blocks
                    .iter()
                    .any(|(&b, &idx)| draws.get(b) != Some(&idx))
                {
                    bail!(
                        "node {}: decoded block identities differ from the draws",
                        v.node_id
                    );
                }
                rep
            }
        };
        rep.verify(inst.stream.as_slice());
        reports.push(rep);
    }
    Ok(Some((method, reports)))
}

fn cmd_run(out: &Path, args: &RunArgs) -> Result<bool> {
    let start = Instant::now();
    let inst = match &args.instance_dir {
        Some(dir) => Instance::load(dir).with_context(|| format!("loading {}", dir.display()))?,
        None => Instance::generate(args.instance.spec()).context("generating instance")?,
    };
    let proc = inst.processor(args.algo)?;
    let measured = measure(proc.as_ref(), inst.stream.as_slice(), args.trace)?;
    fs::create_dir_all(out)?;

    let outputs_csv = out.join("outputs.csv");
    write_transcript(
        create(&outputs_csv)?,
        inst.stream.as_slice(),
        &measured.outputs,
    )?;
    let tree_csv = out.join("tree.csv");
    measured.tree.write_csv(create(&tree_csv)?)?;
    let trace_csv = match &measured.trace {
        Some(trace) => {
            let path = out.join("trace.csv");
            trace.write_csv(create(&path)?)?;
            Some(path)
        }
        None => None,
    };

    let mut ok = measured.totals.counting_bound_ok;
    let witness = if args.witness {
        match witness_reports(&inst)? {
            Some((method, reports)) => {
                write_reports_csv(create(&out.join("decode.csv"))?, &reports)?;
                let failed = reports.iter().filter(|r| r.ok != Some(true)).count();
                ok &= failed == 0;
                Some(WitnessSummary {
                    method,
                    nodes: reports.len(),
                    recovered: reports.iter().map(DecodeReport::recovered_count).sum(),
                    failed,
                })
            }
            None => {
                eprintln!(
                    "no witness decoder for family {} with problem {:?}",
                    inst.spec.family, inst.spec.problem
                );
                None
            }
        }
    } else {
        None
    };

    let t = measured.totals;
    let report = RunReport {
        problem: inst.spec.problem,
        algorithm: args.algo,
        family: inst.spec.family.to_string(),
        n: inst.params.n(),
        q: inst.params.q(),
        w: inst.params.w(),
        seed: inst.spec.seed,
        totals: t,
        outputs_csv,
        tree_csv,
        trace_csv,
        witness,
        wall_time_ms: start.elapsed().as_millis(),
    };
    write_json(&out.join("report.json"), &report)?;
    println!(
        "probes {}  sum I_v (probed/probed) {}  sum I_v (written/read) {}  probes/output {:.3}",
        t.probes, t.sum_iv_pp, t.sum_iv_wr, t.amortized_probes
    );
    if !t.counting_bound_ok {
        eprintln!("FAIL: information transfer exceeds the probe count");
    }
    if let Some(w) = &report.witness {
        println!(
            "witness {}: {} nodes, {} symbols recovered, {} failed",
            w.method.as_str(),
            w.nodes,
            w.recovered,
            w.failed
        );
    }
    Ok(ok)
}

fn cmd_verify(out: &Path, args: &VerifyArgs) -> Result<bool> {
    let suites: Vec<Suite> = if args.suite.eq_ignore_ascii_case("all") {
        Suite::ALL.to_vec()
    } else {
        args.suite
            .split(',')
            .map(|s| s.trim().parse::<Suite>())
            .collect::<Result<_, _>>()?
    };
    let cfg = SuiteConfig {
        problem: args.problem,
        algorithm: args.algo,
        n: args.n,
        q: args.q,
        w: args.w,
        ell: args.ell,
        mu: args.mu,
        gamma: args.gamma,
        trials: args.trials,
        seed: args.seed,
    };
    let mut reports = Vec::new();
    for suite in suites {
        let report = run_suite(suite, &cfg).with_context(|| format!("suite {}", suite.name()))?;
        let status = if !report.passed() {
            "FAIL"
        } else if !report.warnings.is_empty() {
            "WARN"
        } else {
            "PASS"
        };
        println!("{status} {} ({} checks)", report.suite, report.checks);
        for f in &report.failures {
            println!("  failure: {f}");
        }
        for w in &report.warnings {
            println!("  warning: {w}");
        }
        reports.push(report);
    }
    let passed = reports.iter().all(SuiteReport::passed);
    let warn = reports.iter().any(|r| !r.warnings.is_empty());
    fs::create_dir_all(out)?;
    write_json(
        &out.join("verify.json"),
        &VerifyReport {
            suites: reports,
            passed,
            warn,
        },
    )?;
    Ok(passed)
}

fn cmd_sweep(out: &Path, args: &SweepArgs) -> Result<bool> {
    let rows = sweep(args.problem, &args.algo, &args.n, args.q, args.w, args.seed)?;
    fs::create_dir_all(out)?;
    write_sweep_csv(create(&out.join("sweep.csv"))?, &rows)?;
    let warn: Vec<Algorithm> = args
        .algo
        .iter()
        .copied()
        .filter(|&a| !amortized_nondecreasing(&rows, a))
        .collect();
    for r in &rows {
        println!(
            "n {:>6}  {:?}  probes {:>10}  sum I_v {:>9}  I_v/n {:.3}",
            r.n, r.algorithm, r.probes, r.sum_iv_pp, r.amortized_iv
        );
    }
    for a in &warn {
        println!("WARN amortized transfer of {a:?} decreases somewhere");
    }
    write_json(
        &out.join("sweep.json"),
        &SweepReport {
            problem: args.problem,
            rows,
            warn,
        },
    )?;
    Ok(true)
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let ok = match &cli.command {
        Command::Gen(args) => cmd_gen(&cli.out, args)?,
        Command::Run(args) => cmd_run(&cli.out, args)?,
        Command::Verify(args) => cmd_verify(&cli.out, args)?,
        Command::Sweep(args) => cmd_sweep(&cli.out, args)?,
    };
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
