//! Command-line workflows: instance generation, run simulation, recovery,
//! solving, robustness sweeps, and the circuit cost formulas. Every workflow
//! is fully deterministic given `--seed`; machine output goes to `--out`
//! (stdout when omitted) and a human summary to the other stream.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use regevlab::experiments::{
    bad_generator_demo, measure_basis_profile, run_experiment, ExperimentConfig, TaskName,
};
use regevlab::numtheory::{
    gen_instance_with, instance_from_modulus, GeneratorStyle, Instance, NumTheoryError,
    OracleBudget,
};
use regevlab::postprocess::{
    assemble_embedding_lattice, extract_relations, PostReport, PostprocessError,
    PostprocessParams,
};
use regevlab::simulate::{
    build_relation_lattice, cost_estimate, provenance_to_jsonl, run_batch, runs_from_jsonl,
    runs_to_jsonl, NoiseModel, SimParams,
};
use regevlab::solvers::FactorRoute;
use regevlab::tasks::{
    dlog_via_small_generator, prepare_task, referee_success, run_pipeline, shape_task,
    PipelineConfig, TaskAnswer, TaskError, TaskKind,
};
use regevlab::InstanceKind;

#[derive(Parser)]
#[command(
    name = "regevlab",
    version,
    about = "Classical laboratory for multidimensional period-finding post-processing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance (optionally shaped for a task)
    Instance(InstanceArgs),
    /// Simulate a batch of runs and write them as JSONL
    Simulate(SimulateArgs),
    /// Post-process a run file into verified relation vectors
    Post(PostArgs),
    /// Factor end to end (splitting, via order, or via phi)
    Factor(FactorArgs),
    /// Compute a discrete logarithm end to end
    Dlog(DlogArgs),
    /// Find an element order end to end
    Order(OrderArgs),
    /// Compute the group order end to end
    Phi(PhiArgs),
    /// Robustness sweep over (C, m, m2) grids, reported as CSV
    Robust(RobustArgs),
    /// Evaluate the leading-order circuit cost formulas
    Cost(CostArgs),
    /// Demonstrate the deliberately bad generator choice g_i = g^i
    DemoBadGen(DemoBadGenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    #[value(alias = "rsa")]
    RsaSemiprime,
    #[value(alias = "safe-prime")]
    SafePrimeGroup,
    #[value(alias = "schnorr")]
    SchnorrGroup,
    #[value(alias = "generic")]
    GenericModulus,
    #[value(alias = "synthetic")]
    SyntheticCyclic,
}

impl From<KindArg> for InstanceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::RsaSemiprime => InstanceKind::RsaSemiprime,
            KindArg::SafePrimeGroup => InstanceKind::SafePrimeGroup,
            KindArg::SchnorrGroup => InstanceKind::SchnorrGroup,
            KindArg::GenericModulus => InstanceKind::GenericModulus,
            KindArg::SyntheticCyclic => InstanceKind::SyntheticCyclic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    UniformBall,
    TruncatedGaussian,
    Off,
}

impl From<NoiseArg> for NoiseModel {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::UniformBall => NoiseModel::UniformBall,
            NoiseArg::TruncatedGaussian => NoiseModel::TruncatedGaussian,
            NoiseArg::Off => NoiseModel::Off,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TaskArg {
    None,
    Factor,
    Dlog,
    DlogPre,
    Multi,
    Order,
    Phi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Integrated,
    Precomputed,
    Multi,
    TwoStage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RouteArg {
    Regev,
    ViaOrder,
    ViaPhi,
}

#[derive(Args)]
struct OutputArgs {
    /// Base seed; all randomness derives from it through named substreams
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Machine output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    bits: u64,
    #[arg(long)]
    d: usize,
    /// Shape the instance for a task (populates the arbitrary elements)
    #[arg(long, value_enum, default_value = "none")]
    task: TaskArg,
    /// Number of dlog targets for --task multi
    #[arg(long, default_value_t = 2)]
    targets: usize,
    /// Use prime squares as generators (the splitting construction)
    #[arg(long, default_value_t = false)]
    squares: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Read the instance from a file instead of generating one
    #[arg(long, value_name = "PATH")]
    instance: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "instance")]
    kind: Option<KindArg>,
    #[arg(long, required_unless_present = "instance")]
    bits: Option<u64>,
    #[arg(long, required_unless_present = "instance")]
    d: Option<usize>,
    /// Shape the generated instance for a task
    #[arg(long, value_enum, default_value = "none")]
    task: TaskArg,
    #[arg(long, default_value_t = 2)]
    targets: usize,
    /// Window-scaling constant C (R = 2^(C sqrt(n)))
    #[arg(long = "C")]
    c: f64,
    /// Total number of runs
    #[arg(long)]
    m: usize,
    /// Number of bad (uniform) runs among them
    #[arg(long, default_value_t = 0)]
    m2: usize,
    #[arg(long, value_enum, default_value = "uniform-ball")]
    noise: NoiseArg,
    /// Also write <out>.provenance.jsonl revealing good/bad labels
    #[arg(long, default_value_t = false)]
    reveal_provenance: bool,
    /// Write the (possibly generated) instance here
    #[arg(long)]
    instance_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PostArgs {
    /// Run file (JSONL) produced by `simulate`
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Instance file the runs were simulated from
    #[arg(long, value_name = "PATH")]
    instance: PathBuf,
    /// log2 of the embedding scale S (defaults to the run grid: S = D)
    #[arg(long)]
    log2_scale: Option<u32>,
    /// Lovász parameter as NUM/DEN
    #[arg(long, default_value = "99/100")]
    lll_delta: String,
    /// Disable the heuristic float pre-pass
    #[arg(long, default_value_t = false)]
    no_prepass: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, value_enum, default_value = "rsa-semiprime")]
    kind: KindArg,
    #[arg(long)]
    bits: Option<u64>,
    /// Lattice dimension d (defaults to ceil(sqrt(bits)))
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "C", default_value_t = 4.0)]
    c: f64,
    /// Runs per batch (defaults to d + 4)
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    m2: usize,
    #[arg(long, value_enum, default_value = "uniform-ball")]
    noise: NoiseArg,
    /// Write the post-processing report here (for staged comparisons)
    #[arg(long)]
    emit_post_report: Option<PathBuf>,
}

#[derive(Args)]
struct FactorArgs {
    /// Factor this modulus instead of sampling one
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long, value_enum, default_value = "regev")]
    route: RouteArg,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct DlogArgs {
    #[arg(long, value_enum, default_value = "integrated")]
    method: MethodArg,
    /// Number of simultaneous targets for --method multi
    #[arg(long, default_value_t = 2)]
    targets: usize,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OrderArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PhiArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RobustTaskArg {
    Factor,
    Dlog,
    Order,
    Phi,
}

#[derive(Args)]
struct RobustArgs {
    /// JSON experiment config (overrides the inline flags)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "synthetic-cyclic")]
    kind: KindArg,
    #[arg(long, default_value_t = 25)]
    bits: u64,
    #[arg(long, default_value_t = 6)]
    d: usize,
    #[arg(long, value_enum, default_value = "dlog")]
    task: RobustTaskArg,
    /// Comma-separated C grid
    #[arg(long, default_value = "1,2,3,4")]
    c_grid: String,
    /// Comma-separated m grid (defaults to d+4)
    #[arg(long)]
    m_grid: Option<String>,
    /// Comma-separated m2 grid
    #[arg(long, default_value = "0")]
    m2_grid: String,
    #[arg(long, default_value_t = 100)]
    trials: u32,
    #[arg(long, value_enum, default_value = "uniform-ball")]
    noise: NoiseArg,
    /// Number of rayon workers (results are identical for any value)
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Include measured wall-clock in the CSV (breaks byte reproducibility)
    #[arg(long, default_value_t = false)]
    timing: bool,
    /// Profile basis lengths across a comma-separated d grid instead
    #[arg(long, value_name = "D_LIST")]
    k_profile: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CostArgs {
    /// Bit length of the modulus
    #[arg(long)]
    n: u64,
    #[arg(long = "C")]
    c: f64,
    /// Gate cost of one modular multiply-add circuit
    #[arg(long = "G", default_value_t = 0.0)]
    gate_cost: f64,
    /// Ancilla count of that circuit
    #[arg(long = "S", default_value_t = 0)]
    ancillas: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct DemoBadGenArgs {
    /// Prime order of the cyclic group
    #[arg(long)]
    r: u64,
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    output: OutputArgs,
}

enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<NumTheoryError> for CliError {
    fn from(e: NumTheoryError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn classify_task_error(e: TaskError) -> CliError {
    match &e {
        TaskError::Setup(_) | TaskError::Instance(_) => CliError::Usage(e.to_string()),
        _ => CliError::Failure(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) | CliError::Failure(m) => m,
            };
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}

/// Writes machine output to --out (plus summary to stdout), or machine
/// output to stdout (summary to stderr) when --out is missing.
fn emit(output: &OutputArgs, machine: &str, summary: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => {
            fs::write(path, machine).map_err(usage)?;
            println!("{summary}");
            println!("wrote {}", path.display());
        }
        None => {
            print!("{machine}");
            if !machine.ends_with('\n') {
                println!();
            }
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn write_side_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(usage)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Instance(args) => cmd_instance(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Post(args) => cmd_post(args),
        Command::Factor(args) => cmd_factor(args),
        Command::Dlog(args) => cmd_dlog(args),
        Command::Order(args) => cmd_order(args),
        Command::Phi(args) => cmd_phi(args),
        Command::Robust(args) => cmd_robust(args),
        Command::Cost(args) => cmd_cost(args),
        Command::DemoBadGen(args) => cmd_demo_bad_gen(args),
    }
}

fn budget() -> OracleBudget {
    OracleBudget::default()
}

fn task_kind_of(task: TaskArg, targets: usize) -> Option<TaskKind> {
    match task {
        TaskArg::None => None,
        TaskArg::Factor => Some(TaskKind::Factor {
            route: FactorRoute::RegevSplit,
        }),
        TaskArg::Dlog => Some(TaskKind::DlogIntegrated),
        TaskArg::DlogPre => Some(TaskKind::DlogPrecomputed),
        TaskArg::Multi => Some(TaskKind::MultiDlog { targets }),
        TaskArg::Order => Some(TaskKind::Order),
        TaskArg::Phi => Some(TaskKind::Phi),
    }
}

fn build_instance(
    kind: KindArg,
    bits: u64,
    d: usize,
    task: TaskArg,
    targets: usize,
    squares: bool,
    seed: u64,
) -> Result<Instance, CliError> {
    let ik: InstanceKind = kind.into();
    match task_kind_of(task, targets) {
        None => {
            let style = if squares {
                GeneratorStyle::PrimeSquares
            } else {
                GeneratorStyle::Primes
            };
            gen_instance_with(ik, bits, d, seed, &budget(), style).map_err(usage)
        }
        Some(tk) => prepare_task(tk, ik, bits, d, seed, &budget())
            .map(|t| t.instance)
            .map_err(classify_task_error),
    }
}

fn cmd_instance(args: InstanceArgs) -> Result<(), CliError> {
    let inst = build_instance(
        args.kind,
        args.bits,
        args.d,
        args.task,
        args.targets,
        args.squares,
        args.output.seed,
    )?;
    let summary = format!(
        "instance: kind={:?} bits={} d={} u-elements={}",
        inst.kind,
        inst.bits,
        inst.dim(),
        inst.u_elements.len()
    );
    emit(&args.output, &inst.to_json_string(), &summary)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let inst = match &args.instance {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(usage)?;
            Instance::from_json_str(&text).map_err(usage)?
        }
        None => build_instance(
            args.kind.expect("required unless instance"),
            args.bits.expect("required unless instance"),
            args.d.expect("required unless instance"),
            args.task,
            args.targets,
            false,
            args.output.seed,
        )?,
    };
    let lattice = build_relation_lattice(&inst, None).map_err(usage)?;
    let d = lattice.dim();
    if args.m2 > args.m {
        return Err(CliError::Usage("m2 exceeds m".into()));
    }
    let params = SimParams::new(
        inst.bits,
        d,
        inst.u_elements.len(),
        args.c,
        args.noise.into(),
    );
    let batch = run_batch(&lattice, &params, args.m, args.m2, 0, args.output.seed);
    let jsonl = runs_to_jsonl(&batch);
    if let Some(path) = &args.instance_out {
        write_side_file(path, &inst.to_json_string())?;
    }
    if args.reveal_provenance {
        let side = match &args.output.out {
            Some(p) => {
                let mut s = p.as_os_str().to_owned();
                s.push(".provenance.jsonl");
                PathBuf::from(s)
            }
            None => PathBuf::from("runs.provenance.jsonl"),
        };
        write_side_file(&side, &provenance_to_jsonl(&batch))?;
    }
    let summary = format!(
        "simulated {} runs ({} bad) at C={} D=2^{}",
        args.m, args.m2, args.c, params.log2_grid
    );
    emit(&args.output, &jsonl, &summary)
}

fn parse_delta(s: &str) -> Result<(u32, u32), CliError> {
    let (num, den) = s
        .split_once('/')
        .ok_or_else(|| CliError::Usage("lll-delta must be NUM/DEN".into()))?;
    let p: u32 = num.trim().parse().map_err(usage)?;
    let q: u32 = den.trim().parse().map_err(usage)?;
    Ok((p, q))
}

fn post_error(e: PostprocessError) -> CliError {
    match e {
        PostprocessError::NoRelationsRecovered { .. } => {
            CliError::Failure(format!("post-processing: {e}"))
        }
        other => CliError::Usage(format!("post-processing: {other}")),
    }
}

fn cmd_post(args: PostArgs) -> Result<(), CliError> {
    let runs_text = fs::read_to_string(&args.input).map_err(usage)?;
    let runs = runs_from_jsonl(&runs_text).map_err(usage)?;
    if runs.is_empty() {
        return Err(CliError::Usage(format!(
            "no run records in {}",
            args.input.display()
        )));
    }
    let inst_text = fs::read_to_string(&args.instance).map_err(usage)?;
    let inst = Instance::from_json_str(&inst_text).map_err(usage)?;
    let d = inst.dim();
    if runs.iter().any(|r| r.w_num.len() != d) {
        return Err(CliError::Usage(
            "run dimension does not match the instance".into(),
        ));
    }
    let mut params = PostprocessParams::for_grid(d, runs.len(), runs[0].log2_grid);
    if let Some(ls) = args.log2_scale {
        params.log2_scale = ls;
    }
    params.lll_delta = parse_delta(&args.lll_delta)?;
    params.float_prepass = !args.no_prepass;

    let embedding = assemble_embedding_lattice(&runs, d, &params.scale()).map_err(post_error)?;
    let ctx = inst.eval_context();
    let recovered = extract_relations(&embedding, &ctx, &params).map_err(post_error)?;
    let report = PostReport::from_recovered(&recovered);
    let machine = serde_json::to_string_pretty(&report).map_err(usage)?;
    let summary = format!(
        "recovered {} verified relation vectors from {} candidates",
        report.verified_count, report.candidate_count
    );
    emit(&args.output, &machine, &summary)
}

fn pipeline_setup(
    p: &PipelineArgs,
    default_concrete_bits: u64,
) -> Result<(InstanceKind, u64, usize, PipelineConfig), CliError> {
    let kind: InstanceKind = p.kind.into();
    let bits = p.bits.unwrap_or(default_concrete_bits);
    let d = p.d.unwrap_or(((bits as f64).sqrt().ceil()) as usize);
    let m = p.m.unwrap_or(d + 4);
    if p.m2 > m {
        return Err(CliError::Usage("m2 exceeds m".into()));
    }
    let cfg = PipelineConfig::new(p.c, m, p.m2, p.noise.into());
    Ok((kind, bits, d, cfg))
}

fn maybe_emit_post_report(
    path: &Option<PathBuf>,
    recovered: &regevlab::postprocess::RecoveredLattice,
) -> Result<(), CliError> {
    if let Some(p) = path {
        let report = PostReport::from_recovered(recovered);
        write_side_file(p, &serde_json::to_string_pretty(&report).map_err(usage)?)?;
    }
    Ok(())
}

fn cmd_factor(args: FactorArgs) -> Result<(), CliError> {
    let route = match args.route {
        RouteArg::Regev => FactorRoute::RegevSplit,
        RouteArg::ViaOrder => FactorRoute::ViaOrder,
        RouteArg::ViaPhi => FactorRoute::ViaPhi,
    };
    let (kind, bits, d, cfg) = pipeline_setup(&args.pipeline, 28)?;
    let seed = args.output.seed;
    let task = match &args.n {
        Some(n_str) => {
            let n: BigUint = n_str
                .parse()
                .map_err(|_| CliError::Usage("invalid --N".into()))?;
            let d = args
                .pipeline
                .d
                .unwrap_or(((n.bits() as f64).sqrt().ceil()) as usize);
            let style = if route == FactorRoute::RegevSplit {
                GeneratorStyle::PrimeSquares
            } else {
                GeneratorStyle::Primes
            };
            let inst = instance_from_modulus(&n, d, &budget(), style).map_err(usage)?;
            shape_task(TaskKind::Factor { route }, inst, seed, &budget())
                .map_err(classify_task_error)?
        }
        None => {
            if !kind.is_concrete() {
                return Err(CliError::Usage(
                    "factoring requires a concrete instance kind".into(),
                ));
            }
            prepare_task(TaskKind::Factor { route }, kind, bits, d, seed, &budget())
                .map_err(classify_task_error)?
        }
    };
    let out = run_pipeline(&task, &cfg, 0, seed).map_err(classify_task_error)?;
    maybe_emit_post_report(&args.pipeline.emit_post_report, &out.recovered)?;
    let TaskAnswer::Factor(ans) = &out.answer else {
        return Err(CliError::Failure("unexpected answer type".into()));
    };
    let verified = referee_success(&task, &out.answer);
    let summary = format!(
        "N = {} -> {} factors, complete={} (referee: {})",
        task.instance.modulus.as_ref().expect("concrete"),
        ans.factors.len(),
        ans.complete,
        if verified { "match" } else { "MISMATCH" }
    );
    emit(&args.output, &ans.to_json_string(), &summary)
}

fn cmd_dlog(args: DlogArgs) -> Result<(), CliError> {
    let (kind, bits, d, cfg) = pipeline_setup(&args.pipeline, 28)?;
    let seed = args.output.seed;
    match args.method {
        MethodArg::TwoStage => {
            let (task, answer) = dlog_via_small_generator(kind, bits, d, &cfg, seed, &budget())
                .map_err(classify_task_error)?;
            let verified = referee_success(&task, &TaskAnswer::Dlog(answer.clone()));
            let summary = format!(
                "two-stage dlog: e = {} (referee: {})",
                answer.e,
                if verified { "match" } else { "MISMATCH" }
            );
            emit(&args.output, &answer.to_json_string(), &summary)
        }
        method => {
            let tk = match method {
                MethodArg::Integrated => TaskKind::DlogIntegrated,
                MethodArg::Precomputed => TaskKind::DlogPrecomputed,
                MethodArg::Multi => TaskKind::MultiDlog {
                    targets: args.targets,
                },
                MethodArg::TwoStage => unreachable!(),
            };
            let task =
                prepare_task(tk, kind, bits, d, seed, &budget()).map_err(classify_task_error)?;
            let out = run_pipeline(&task, &cfg, 0, seed).map_err(classify_task_error)?;
            maybe_emit_post_report(&args.pipeline.emit_post_report, &out.recovered)?;
            let verified = referee_success(&task, &out.answer);
            let (machine, headline) = match &out.answer {
                TaskAnswer::Dlog(a) => (a.to_json_string(), format!("e = {}", a.e)),
                TaskAnswer::MultiDlog(list) => {
                    let joined = list
                        .iter()
                        .map(|a| a.to_json_string())
                        .collect::<Vec<_>>()
                        .join(",\n");
                    (
                        format!("[\n{joined}\n]"),
                        format!("{} logarithms", list.len()),
                    )
                }
                _ => return Err(CliError::Failure("unexpected answer type".into())),
            };
            let summary = format!(
                "dlog: {headline} (referee: {})",
                if verified { "match" } else { "MISMATCH" }
            );
            emit(&args.output, &machine, &summary)
        }
    }
}

fn cmd_order(args: OrderArgs) -> Result<(), CliError> {
    let (kind, bits, d, cfg) = pipeline_setup(&args.pipeline, 20)?;
    let seed = args.output.seed;
    let task = prepare_task(TaskKind::Order, kind, bits, d, seed, &budget())
        .map_err(classify_task_error)?;
    let out = run_pipeline(&task, &cfg, 0, seed).map_err(classify_task_error)?;
    maybe_emit_post_report(&args.pipeline.emit_post_report, &out.recovered)?;
    let TaskAnswer::Order(r) = &out.answer else {
        return Err(CliError::Failure("unexpected answer type".into()));
    };
    let verified = referee_success(&task, &out.answer);
    let machine = format!("{{\n  \"r\": \"{r}\",\n  \"verified\": true\n}}\n");
    let summary = format!(
        "order: r = {r} (referee: {})",
        if verified { "match" } else { "MISMATCH" }
    );
    emit(&args.output, &machine, &summary)
}

fn cmd_phi(args: PhiArgs) -> Result<(), CliError> {
    let (kind, bits, d, cfg) = pipeline_setup(&args.pipeline, 20)?;
    let seed = args.output.seed;
    let task =
        prepare_task(TaskKind::Phi, kind, bits, d, seed, &budget()).map_err(classify_task_error)?;
    let out = run_pipeline(&task, &cfg, 0, seed).map_err(classify_task_error)?;
    maybe_emit_post_report(&args.pipeline.emit_post_report, &out.recovered)?;
    let TaskAnswer::Phi(phi) = &out.answer else {
        return Err(CliError::Failure("unexpected answer type".into()));
    };
    let verified = referee_success(&task, &out.answer);
    let machine = format!("{{\n  \"phi\": \"{phi}\"\n}}\n");
    let summary = format!(
        "phi: {phi} (referee: {})",
        if verified { "match" } else { "MISMATCH" }
    );
    emit(&args.output, &machine, &summary)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("invalid {what} entry: {x}")))
        })
        .collect()
}

fn cmd_robust(args: RobustArgs) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(usage)?;

    if let Some(d_list) = &args.k_profile {
        let d_values: Vec<usize> = parse_list(d_list, "k-profile d")?;
        let profile = measure_basis_profile(
            args.kind.into(),
            args.bits,
            &d_values,
            args.trials,
            args.output.seed,
        )
        .map_err(|e| CliError::Failure(e.to_string()))?;
        let machine = serde_json::to_string_pretty(&profile).map_err(usage)?;
        let summary = format!(
            "basis profile over d={d_values:?}: shrinking_with_d={}",
            profile.shrinking_with_d
        );
        return emit(&args.output, &machine, &summary);
    }

    let config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(usage)?;
            serde_json::from_str::<ExperimentConfig>(&text).map_err(usage)?
        }
        None => {
            let task = match args.task {
                RobustTaskArg::Factor => TaskName::Factor,
                RobustTaskArg::Dlog => TaskName::Dlog,
                RobustTaskArg::Order => TaskName::Order,
                RobustTaskArg::Phi => TaskName::Phi,
            };
            ExperimentConfig {
                kind: args.kind.into(),
                bits: args.bits,
                d: args.d,
                task,
                c_grid: parse_list(&args.c_grid, "c-grid")?,
                m_grid: match &args.m_grid {
                    Some(s) => parse_list(s, "m-grid")?,
                    None => vec![args.d + 4],
                },
                m2_grid: parse_list(&args.m2_grid, "m2-grid")?,
                trials: args.trials,
                noise_model: args.noise.into(),
                seed: args.output.seed,
            }
        }
    };
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let report = pool
        .install(|| run_experiment(&config))
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let machine = report.to_csv(args.timing);
    let total_cells = report.cells.len();
    let best = report.cells.iter().map(|c| c.successes).max().unwrap_or(0);
    let summary = format!(
        "sweep done: {total_cells} cells x {} trials, best cell {best}/{} successes",
        config.trials, config.trials
    );
    emit(&args.output, &machine, &summary)
}

fn cmd_cost(args: CostArgs) -> Result<(), CliError> {
    if args.n < 1 || args.c <= 0.0 {
        return Err(CliError::Usage("need n >= 1 and C > 0".into()));
    }
    let est = cost_estimate(args.n, args.c, args.gate_cost, args.ancillas);
    let machine = serde_json::to_string_pretty(&est).map_err(usage)?;
    let summary = format!(
        "n={} C={}: ~{} qubits, gates ~ {:.3e} ({})",
        args.n, args.c, est.qubits, est.gates_order, est.scaling
    );
    emit(&args.output, &machine, &summary)
}

fn cmd_demo_bad_gen(args: DemoBadGenArgs) -> Result<(), CliError> {
    let report = bad_generator_demo(args.r, args.d, args.output.seed).map_err(|e| {
        if matches!(e, regevlab::experiments::ExperimentError::BadConfig(_)) {
            CliError::Usage(e.to_string())
        } else {
            CliError::Failure(e.to_string())
        }
    })?;
    let machine = serde_json::to_string_pretty(&report).map_err(usage)?;
    let summary = format!(
        "bad generators g_i = g^i at r={} d={}: norm bound holds: {}, recovery complete: bad={} control={}",
        report.r,
        report.d,
        report.norm_bound_holds,
        report.bad_recovery_complete,
        report.control_recovery_complete
    );
    emit(&args.output, &machine, &summary)
}
