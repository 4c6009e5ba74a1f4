//! `o2dlearn` — command-line pipeline around the o2dlearn-core library:
//! dataset generation, pool construction, incremental learning,
//! verification, planning with replay, PDDL export, and ASP emission.
//!
//! Exit codes: 0 success, 1 domain error (no solution, failed verification,
//! unsolvable instance, bad input), 2 resource cap exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use o2dlearn_core::asp::{emit_asp, SOLVER_OPTIONS};
use o2dlearn_core::datagen::{
    blocks3ops_world, blocks4ops_world, build_dataset, dump_dataset, hanoi_world, load_dataset,
    slidingtile_world, small_grid, small_sokoban, HiddenWorld, Mode, Registry, RenderedDataset,
};
use o2dlearn_core::grounding::{
    build_instance, parse_grounded_domain, write_grounded_domain, Dataset,
};
use o2dlearn_core::learner::{cost, Hyperparams};
use o2dlearn_core::o2d::{parse_state, O2DSignature, O2DState};
use o2dlearn_core::planner::{
    plan_bfs, plan_gbfs_hadd, replay, validate_plan, write_plan, GraphSimulator, PlanError,
    PlanOutcome,
};
use o2dlearn_core::pool::PredicatePool;
use o2dlearn_core::strips::{export_pddl_domain, export_pddl_problem};
use o2dlearn_core::verifier::{incremental_learn, verify, IncrementalError, Status};
use o2dlearn_core::FORMAT_VERSION;

fn long_version() -> &'static str {
    Box::leak(
        format!("{} (file format v{FORMAT_VERSION})", env!("CARGO_PKG_VERSION")).into_boxed_str(),
    )
}

#[derive(Parser)]
#[command(
    name = "o2dlearn",
    version,
    long_version = long_version(),
    about = "Learn, verify, and plan with grounded STRIPS domains over O2D states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled O2D dataset from a bundled hidden world.
    GenData(GenDataArgs),
    /// Build the description-logic predicate pool over a dataset.
    BuildPool(BuildPoolArgs),
    /// Learn a grounded domain incrementally from a dataset.
    Learn(LearnArgs),
    /// Verify a grounded domain against a dataset (C1 + C2).
    Verify(VerifyArgs),
    /// Plan between two O2D states with a learned domain.
    Plan(PlanArgs),
    /// Export a learned domain (and optionally one instance) as PDDL.
    ExportPddl(ExportPddlArgs),
    /// Emit the learning task as an ASP program plus facts.
    EmitAsp(EmitAspArgs),
}

/// Options shared by commands that take hyperparameters; every field can
/// come from `--config` (JSON) with flags taking precedence.
#[derive(Args, Debug, Default)]
struct CommonOpts {
    /// JSON run-configuration file supplying defaults for the other flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Pool complexity bound m.
    #[arg(long)]
    m: Option<usize>,
    /// Maximum schema arity (part of the hyperparameters).
    #[arg(long)]
    max_arity: Option<usize>,
    /// Maximum number of domain predicates (part of the hyperparameters).
    #[arg(long)]
    num_predicates: Option<usize>,
    /// Solver search-node budget.
    #[arg(long)]
    node_cap: Option<u64>,
    /// Solver wall-clock budget in seconds.
    #[arg(long)]
    time_limit_s: Option<u64>,
    /// State cap for graph enumeration.
    #[arg(long)]
    cap: Option<usize>,
    /// Random seed recorded in the run configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results are independent of this value.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

/// The fully resolved configuration of one run, serialized into every
/// output directory so runs can be reproduced exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    domain: String,
    registry: Option<PathBuf>,
    m: usize,
    max_arity: usize,
    num_predicates: usize,
    node_cap: u64,
    time_limit_s: Option<u64>,
    cap: usize,
    seed: u64,
    jobs: usize,
    out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        let beta = Hyperparams::default();
        RunConfig {
            domain: String::new(),
            registry: None,
            m: 2,
            max_arity: beta.max_arity,
            num_predicates: beta.num_predicates,
            node_cap: beta.node_cap,
            time_limit_s: None,
            cap: 1_000_000,
            seed: 0,
            jobs: 1,
            out: None,
        }
    }
}

impl RunConfig {
    /// Loads `--config` if given, then applies flag overrides.
    fn resolve(opts: &CommonOpts) -> Result<RunConfig> {
        let mut cfg = match &opts.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = opts.$f.clone() { cfg.$f = v; } )* };
        }
        over!(m, max_arity, num_predicates, node_cap, cap, seed, jobs);
        if let Some(t) = opts.time_limit_s {
            cfg.time_limit_s = Some(t);
        }
        Ok(cfg)
    }

    fn beta(&self) -> Hyperparams {
        Hyperparams {
            max_arity: self.max_arity,
            num_predicates: self.num_predicates,
            node_cap: self.node_cap,
            time_limit: self.time_limit_s.map(Duration::from_secs),
        }
    }

    fn write_into(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("run-config.json"), json + "\n")?;
        Ok(())
    }
}

#[derive(Args)]
struct GenDataArgs {
    /// World name: blocks3ops, blocks4ops, hanoi1op, hanoi4ops,
    /// slidingtile, grid, sokoban.
    #[arg(long)]
    domain: String,
    /// Instance sizes (blocks/disks), e.g. `--sizes 2,3,4`.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Board dimensions for slidingtile, e.g. `--boards 1x2,2x2`.
    #[arg(long, value_delimiter = ',')]
    boards: Vec<String>,
    /// Registry JSON with rendering rules (defaults to the bundled one).
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Output dataset directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct BuildPoolArgs {
    /// Dataset directory (from gen-data).
    #[arg(long)]
    data: PathBuf,
    /// Output file for the pool listing (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct LearnArgs {
    /// Dataset directory (from gen-data).
    #[arg(long)]
    data: PathBuf,
    /// Output directory: domain.txt, trace.tsv, run-config.json.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct VerifyArgs {
    /// Dataset directory.
    #[arg(long)]
    data: PathBuf,
    /// Grounded-domain file (from learn).
    #[arg(long)]
    domain: PathBuf,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct PlanArgs {
    /// Grounded-domain file.
    #[arg(long)]
    domain: PathBuf,
    /// O2D signature file (signature.txt of a dataset).
    #[arg(long)]
    signature: PathBuf,
    /// Initial O2D state file.
    #[arg(long)]
    s0: PathBuf,
    /// Goal O2D state file.
    #[arg(long)]
    sg: PathBuf,
    /// Use greedy best-first search instead of optimal BFS.
    #[arg(long)]
    greedy: bool,
    /// Replay the plan through the named hidden world's simulator.
    #[arg(long, value_name = "WORLD")]
    replay: Option<String>,
    /// Instance sizes for the replay world (as in gen-data).
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Board dimensions for a slidingtile replay world.
    #[arg(long, value_delimiter = ',')]
    boards: Vec<String>,
    /// Plan output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct ExportPddlArgs {
    /// Grounded-domain file.
    #[arg(long)]
    domain: PathBuf,
    /// Output directory: domain.pddl (+ problem.pddl with --s0/--sg).
    #[arg(long)]
    out: PathBuf,
    /// O2D signature file; required with --s0/--sg.
    #[arg(long)]
    signature: Option<PathBuf>,
    /// Initial O2D state file (with --sg, also writes problem.pddl).
    #[arg(long)]
    s0: Option<PathBuf>,
    /// Goal O2D state file.
    #[arg(long)]
    sg: Option<PathBuf>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct EmitAspArgs {
    /// Dataset directory.
    #[arg(long)]
    data: PathBuf,
    /// Output directory: program.lp, facts.lp, run-config.json.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: CommonOpts,
}

/// Errors that map to exit code 2 instead of 1.
fn is_cap_error(err: &anyhow::Error) -> bool {
    err.downcast_ref::<IncrementalError>()
        .map(|e| matches!(e, IncrementalError::BudgetExhausted(_)))
        .unwrap_or(false)
        || err
            .downcast_ref::<PlanError>()
            .map(|e| matches!(e, PlanError::CapExceeded(_)))
            .unwrap_or(false)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(a) => cmd_gen_data(a),
        Command::BuildPool(a) => cmd_build_pool(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Plan(a) => cmd_plan(a),
        Command::ExportPddl(a) => cmd_export_pddl(a),
        Command::EmitAsp(a) => cmd_emit_asp(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_cap_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

// ---------------------------------------------------------------------------
// World selection
// ---------------------------------------------------------------------------

fn parse_boards(boards: &[String]) -> Result<Vec<(usize, usize)>> {
    boards
        .iter()
        .map(|b| {
            let (r, c) = b
                .split_once('x')
                .ok_or_else(|| anyhow!("bad board `{b}`, expected RxC"))?;
            Ok((r.parse()?, c.parse()?))
        })
        .collect()
}

fn world_by_name(name: &str, sizes: &[usize], boards: &[String]) -> Result<HiddenWorld> {
    let sizes_or = |default: &[usize]| -> Vec<usize> {
        if sizes.is_empty() {
            default.to_vec()
        } else {
            sizes.to_vec()
        }
    };
    Ok(match name {
        "blocks3ops" => blocks3ops_world(&sizes_or(&[2, 3, 4, 5])),
        "blocks4ops" => blocks4ops_world(&sizes_or(&[1, 2, 3, 4, 5])),
        "hanoi1op" => hanoi_world(false, &sizes_or(&[1, 2, 3, 4, 5])),
        "hanoi4ops" => hanoi_world(true, &sizes_or(&[1, 2, 3, 4, 5])),
        "slidingtile" => {
            let dims = if boards.is_empty() {
                vec![(1, 2), (2, 1), (1, 3), (3, 1), (2, 2), (2, 3), (3, 2)]
            } else {
                parse_boards(boards)?
            };
            slidingtile_world(&dims)
        }
        "grid" => small_grid(),
        "sokoban" => small_sokoban(),
        other => bail!(
            "unknown world `{other}` (expected blocks3ops, blocks4ops, \
             hanoi1op, hanoi4ops, slidingtile, grid, or sokoban)"
        ),
    })
}

fn load_registry(path: &Option<PathBuf>) -> Result<Registry> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading registry {}", p.display()))?;
            Ok(Registry::parse(&text)?)
        }
        None => Ok(Registry::bundled()),
    }
}

fn rendered_dataset(
    name: &str,
    sizes: &[usize],
    boards: &[String],
    registry: &Option<PathBuf>,
    cap: usize,
) -> Result<RenderedDataset> {
    let world = world_by_name(name, sizes, boards)?;
    let registry = load_registry(registry)?;
    Ok(build_dataset(world, &registry, Mode::Full, cap)?)
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_gen_data(args: GenDataArgs) -> Result<()> {
    let mut cfg = RunConfig::resolve(&args.common)?;
    cfg.domain = args.domain.clone();
    cfg.registry = args.registry.clone();
    cfg.out = Some(args.out.clone());
    let rendered = rendered_dataset(&args.domain, &args.sizes, &args.boards, &args.registry, cfg.cap)?;
    dump_dataset(&rendered.dataset, &args.out)?;
    cfg.write_into(&args.out)?;
    println!(
        "wrote {}: {} instances, {} states, {} edges",
        args.out.display(),
        rendered.dataset.instances.len(),
        rendered.num_states(),
        rendered.num_edges()
    );
    Ok(())
}

fn pool_over(dataset: &Dataset, m: usize) -> Result<PredicatePool> {
    let insts: Vec<(String, Vec<O2DState>)> = dataset
        .instances
        .iter()
        .map(|i| (i.name.clone(), i.states.clone()))
        .collect();
    Ok(PredicatePool::build(&dataset.signature, &insts, m)?)
}

fn cmd_build_pool(args: BuildPoolArgs) -> Result<()> {
    let cfg = RunConfig::resolve(&args.common)?;
    let dataset = load_dataset(&args.data)?;
    let pool = pool_over(&dataset, cfg.m)?;
    let listing = pool.dump();
    match &args.out {
        Some(path) => std::fs::write(path, &listing)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{listing}"),
    }
    println!("pool size |P| = {} at m = {}", pool.entries.len(), cfg.m);
    Ok(())
}

fn cmd_learn(args: LearnArgs) -> Result<()> {
    let mut cfg = RunConfig::resolve(&args.common)?;
    cfg.out = Some(args.out.clone());
    let dataset = load_dataset(&args.data)?;
    cfg.domain = dataset
        .instances
        .first()
        .map(|i| i.name.clone())
        .unwrap_or_default();
    let pool = pool_over(&dataset, cfg.m)?;
    let (gd, trace) = match incremental_learn(&dataset, &pool, &cfg.beta()) {
        Ok(ok) => ok,
        Err(err) => {
            // Persist the trace for diagnosis even on failure.
            if let IncrementalError::NoSolution(t) | IncrementalError::BudgetExhausted(t) = &err {
                std::fs::create_dir_all(&args.out)?;
                std::fs::write(args.out.join("trace.tsv"), t.to_tsv())?;
            }
            return Err(err.into());
        }
    };
    let c = cost(&gd.domain);
    let stats = format!(
        "cost {c}; {} iterations; pool size {} at m = {}",
        trace.iterations.len(),
        pool.entries.len(),
        cfg.m
    );
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(
        args.out.join("domain.txt"),
        write_grounded_domain(&gd, Some(&stats)),
    )?;
    std::fs::write(args.out.join("trace.tsv"), trace.to_tsv())?;
    cfg.write_into(&args.out)?;
    println!(
        "learned domain with cost {c} in {} iterations -> {}",
        trace.iterations.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let cfg = RunConfig::resolve(&args.common)?;
    let dataset = load_dataset(&args.data)?;
    let text = std::fs::read_to_string(&args.domain)
        .with_context(|| format!("reading {}", args.domain.display()))?;
    let gd = parse_grounded_domain(&text)?;
    // Split per instance so --jobs can verify instances in parallel;
    // verdicts are merged in instance order, independent of the job count.
    let parts: Vec<Dataset> = dataset
        .instances
        .iter()
        .map(|inst| Dataset {
            signature: dataset.signature.clone(),
            labels: dataset.labels.clone(),
            instances: vec![inst.clone()],
        })
        .collect();
    let verdicts = run_jobs(cfg.jobs.max(1), &parts, |part| verify(&gd, part))?;
    for verdict in verdicts {
        let verdict = verdict?;
        if !verdict.is_ok() {
            let what = match verdict.status {
                Status::C1Violation => "C1 (distinguishability)",
                Status::C2Violation => "C2 (labeled successors)",
                Status::Ok => unreachable!(),
            };
            bail!(
                "verification failed: {what} on instance {}; {} extension state(s)",
                verdict.failing_instance.as_deref().unwrap_or("?"),
                verdict.delta.len()
            );
        }
    }
    println!(
        "verification ok: {} instances, {} states",
        dataset.instances.len(),
        dataset.instances.iter().map(|i| i.states.len()).sum::<usize>()
    );
    Ok(())
}

fn cmd_plan(args: PlanArgs) -> Result<()> {
    let cfg = RunConfig::resolve(&args.common)?;
    let text = std::fs::read_to_string(&args.domain)
        .with_context(|| format!("reading {}", args.domain.display()))?;
    let gd = parse_grounded_domain(&text)?;
    let sig = O2DSignature::parse(&std::fs::read_to_string(&args.signature)?)?;
    let s0 = parse_state(&sig, &std::fs::read_to_string(&args.s0)?)?;
    let sg = parse_state(&sig, &std::fs::read_to_string(&args.sg)?)?;
    let instance = build_instance(&gd, &sig, &s0, &sg)?;
    let outcome = if args.greedy {
        plan_gbfs_hadd(&gd.domain, &instance, cfg.cap)?
    } else {
        plan_bfs(&gd.domain, &instance, cfg.cap)?
    };
    let plan = match outcome {
        PlanOutcome::Plan(p) => p,
        PlanOutcome::Unsolvable => bail!("no plan exists between s0 and sg"),
    };
    debug_assert!(validate_plan(&gd.domain, &instance, &plan)?);
    let text = write_plan(&plan, &instance.universe);
    match &args.out {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }
    println!("plan with {} step(s)", plan.len());
    if let Some(world) = &args.replay {
        let rendered = rendered_dataset(world, &args.sizes, &args.boards, &None, cfg.cap)?;
        let inst = rendered
            .dataset
            .instances
            .iter()
            .position(|i| i.states.iter().any(|s| s.atoms == s0.atoms))
            .ok_or_else(|| anyhow!("s0 is not a state of any `{world}` instance"))?;
        let sim = GraphSimulator::new(&rendered, inst);
        let trajectory = replay(&plan, &gd, &sig, &sim, &s0)
            .map_err(|e| anyhow!("replay mismatch: {e}"))?;
        let end = trajectory.last().expect("non-empty trajectory");
        if end.atoms != sg.atoms {
            bail!("replay ended at a state different from sg");
        }
        println!("replay ok: {} states, ends at sg", trajectory.len());
    }
    Ok(())
}

fn cmd_export_pddl(args: ExportPddlArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.domain)
        .with_context(|| format!("reading {}", args.domain.display()))?;
    let gd = parse_grounded_domain(&text)?;
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("domain.pddl"), export_pddl_domain(&gd.domain))?;
    let mut wrote = vec!["domain.pddl"];
    if let (Some(s0), Some(sg)) = (&args.s0, &args.sg) {
        let sig_path = args
            .signature
            .as_ref()
            .ok_or_else(|| anyhow!("--signature is required with --s0/--sg"))?;
        let sig = O2DSignature::parse(&std::fs::read_to_string(sig_path)?)?;
        let s0 = parse_state(&sig, &std::fs::read_to_string(s0)?)?;
        let sg = parse_state(&sig, &std::fs::read_to_string(sg)?)?;
        let instance = build_instance(&gd, &sig, &s0, &sg)?;
        std::fs::write(
            args.out.join("problem.pddl"),
            export_pddl_problem(&gd.domain, &instance),
        )?;
        wrote.push("problem.pddl");
    }
    println!("wrote {} in {}", wrote.join(" and "), args.out.display());
    Ok(())
}

fn cmd_emit_asp(args: EmitAspArgs) -> Result<()> {
    let mut cfg = RunConfig::resolve(&args.common)?;
    cfg.out = Some(args.out.clone());
    let dataset = load_dataset(&args.data)?;
    let pool = pool_over(&dataset, cfg.m)?;
    let emission = emit_asp(&dataset, &pool, &cfg.beta());
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("program.lp"), &emission.program)?;
    std::fs::write(args.out.join("facts.lp"), &emission.facts)?;
    cfg.write_into(&args.out)?;
    println!(
        "wrote program.lp and facts.lp in {}; suggested solver options: {SOLVER_OPTIONS}",
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Deterministic worker pool
// ---------------------------------------------------------------------------

/// Maps `f` over `items` on up to `jobs` threads; the result order matches
/// the input order regardless of the job count.
fn run_jobs<T: Sync, R: Send>(
    jobs: usize,
    items: &[T],
    f: impl Fn(&T) -> R + Sync,
) -> Result<Vec<R>> {
    if jobs <= 1 || items.len() <= 1 {
        return Ok(items.iter().map(&f).collect());
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let slot_ptrs: Vec<_> = slots.iter_mut().map(|s| std::sync::Mutex::new(s)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(items.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                **slot_ptrs[i].lock().unwrap() = Some(f(&items[i]));
            });
        }
    });
    drop(slot_ptrs);
    slots
        .into_iter()
        .map(|s| s.ok_or_else(|| anyhow!("worker failed to produce a result")))
        .collect()
}
