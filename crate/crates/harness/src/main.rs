use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spip_core::instance::validate_instance;
use spip_core::sparsifier::{sparsify, ColoringConfig, Hypergraph};
use spip_core::witness::{
    enumerate_sparse_cover, enumerate_tdi_cover, rational_from_f64, verify_cover_property, CoverCheck,
};
use spip_harness::experiment::{
    rows_to_csv, run_experiment, summary_text, summary_to_csv, sweep_t, workers_from_env, ExperimentSpec,
};
use spip_harness::generate::{generate, Distribution, GeneratorSpec, ObjectiveSpec};
use spip_harness::io::{read_instance, write_text, InstanceFile};
use spip_harness::HarnessError;

/// Stochastic packing integer programs with queries.
#[derive(Parser)]
#[command(name = "spip", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file against the standing assumptions.
    Validate { file: PathBuf },
    /// Generate an instance file.
    Gen(GenArgs),
    /// Run an experiment spec and write one CSV row per trial.
    Run(RunArgs),
    /// Run a spec with a T grid and write one CSV row per grid point.
    Sweep(RunArgs),
    /// Enumerate a witness cover, optionally checking it against an objective.
    Witness(WitnessArgs),
    /// Color-code a matching-type instance and keep the colorful hyperedges.
    Sparsify(SparsifyArgs),
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    id: Option<String>,
    /// Attach an objective with this lower value (needs --p).
    #[arg(long, global = true)]
    c_minus: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    c_plus_min: u64,
    #[arg(long, global = true, default_value_t = 1)]
    c_plus_max: u64,
    #[arg(long, global = true)]
    p: Option<f64>,
}

#[derive(Subcommand)]
enum GenKind {
    Bipartite {
        left: usize,
        right: usize,
        edge_prob: f64,
    },
    Graph {
        vertices: usize,
        edge_prob: f64,
    },
    KHypergraph {
        vertices: usize,
        edges: usize,
        k: usize,
    },
    Matroid {
        #[arg(value_enum)]
        matroid: MatroidKindArg,
        /// uniform: ground size; partition: block count; graphic: vertex count.
        size: usize,
        /// uniform: rank; partition: block size; graphic: unused.
        #[arg(long, default_value_t = 1)]
        param: usize,
        /// partition: per-block capacity.
        #[arg(long, default_value_t = 1)]
        capacity: usize,
        /// graphic: edge probability.
        #[arg(long, default_value_t = 0.5)]
        edge_prob: f64,
    },
    RandomPacking {
        rows: usize,
        cols: usize,
        #[arg(long, default_value_t = 3)]
        max_capacity: u64,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
    },
    KCspip {
        rows: usize,
        cols: usize,
        k: usize,
        #[arg(long, default_value_t = 3)]
        max_capacity: u64,
    },
    PlantedBipartite {
        left: usize,
        right: usize,
        planted: usize,
        edge_prob: f64,
    },
    Explicit {
        path: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MatroidKindArg {
    Uniform,
    Partition,
    Graphic,
}

#[derive(Args)]
struct RunArgs {
    spec: PathBuf,
    /// CSV destination; defaults to the spec's output.csv, else stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Summary destination; defaults to the spec's output.summary, else stderr.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Worker threads (overrides SPIP_WORKERS; 0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverKindArg {
    Tdi,
    Sparse,
}

#[derive(Args)]
struct WitnessArgs {
    file: PathBuf,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "tdi")]
    kind: CoverKindArg,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Comma-separated objective to check the cover property against.
    #[arg(long, value_delimiter = ',')]
    check: Option<Vec<u64>>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SparsifyArgs {
    file: PathBuf,
    /// Defaults to the instance's hyperedge size.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    /// Target matching size; defaults to the instance's edge count.
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the sparsified instance here.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn emit(path: Option<&PathBuf>, text: &str, fallback_stderr: bool) -> Result<(), HarnessError> {
    match path {
        Some(p) => write_text(p, text),
        None if fallback_stderr => {
            eprint!("{text}");
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen_spec(kind: &GenKind) -> GeneratorSpec {
    match *kind {
        GenKind::Bipartite { left, right, edge_prob } => GeneratorSpec::Bipartite { left, right, edge_prob },
        GenKind::Graph { vertices, edge_prob } => GeneratorSpec::Graph { vertices, edge_prob },
        GenKind::KHypergraph { vertices, edges, k } => GeneratorSpec::KHypergraph { vertices, edges, k },
        GenKind::Matroid { matroid, size, param, capacity, edge_prob } => match matroid {
            MatroidKindArg::Uniform => GeneratorSpec::UniformMatroid { ground_size: size, rank: param },
            MatroidKindArg::Partition => GeneratorSpec::PartitionMatroid { blocks: size, block_size: param, capacity },
            MatroidKindArg::Graphic => GeneratorSpec::GraphicMatroid { vertices: size, edge_prob },
        },
        GenKind::RandomPacking { rows, cols, max_capacity, density } => {
            GeneratorSpec::RandomPacking { rows, cols, max_capacity, density }
        }
        GenKind::KCspip { rows, cols, k, max_capacity } => GeneratorSpec::KCspip { rows, cols, k, max_capacity },
        GenKind::PlantedBipartite { left, right, planted, edge_prob } => {
            GeneratorSpec::PlantedBipartite { left, right, planted, edge_prob }
        }
        GenKind::Explicit { ref path } => GeneratorSpec::Explicit { path: path.clone() },
    }
}

fn cmd_validate(file: &PathBuf) -> Result<(), HarnessError> {
    let (inst, obj) = read_instance(file)?.build()?;
    let report = validate_instance(&inst);
    println!("family = \"{}\"", inst.family());
    println!("rows = {}\ncols = {}", inst.rows(), inst.cols());
    if let Some(w) = report.w_scale {
        println!("w = {w}");
    }
    if let Some(o) = obj {
        println!("objective_items = {}\ndelta_c = {}\np = {}", o.len(), o.delta_c(), o.p());
    }
    for v in &report.violations {
        println!("violation = \"{v}\"");
    }
    report.into_result()?;
    println!("status = \"pass\"");
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<(), HarnessError> {
    let spec = gen_spec(&args.kind);
    let g = generate(&spec, args.seed)?;
    let obj = match (args.c_minus, args.p) {
        (Some(c_minus), Some(p)) => Some(
            ObjectiveSpec {
                c_minus,
                c_plus_min: args.c_plus_min,
                c_plus_max: args.c_plus_max,
                p,
                distribution: Distribution::TwoPoint,
            }
            .build(g.instance.cols(), args.seed)?,
        ),
        (None, None) => g.objective,
        _ => return Err(HarnessError::Invalid("--c-minus and --p go together".into())),
    };
    let id = args.id.clone().unwrap_or_else(|| format!("{}-{}", spec.kind(), args.seed));
    emit(args.output.as_ref(), &InstanceFile::new(id, &g.instance, obj.as_ref()).to_toml(), false)
}

fn cmd_run(args: &RunArgs, sweep: bool) -> Result<(), HarnessError> {
    let spec = ExperimentSpec::load(&args.spec)?;
    let workers = args.workers.unwrap_or_else(workers_from_env);
    let out = if sweep { sweep_t(&spec, workers)? } else { run_experiment(&spec, workers)? };
    let csv = if sweep { summary_to_csv(&out.summary) } else { rows_to_csv(&out.rows) };
    emit(args.output.as_ref().or(spec.output.csv.as_ref()), &csv, false)?;
    emit(args.summary.as_ref().or(spec.output.summary.as_ref()), &summary_text(&spec, &out), true)
}

fn cmd_witness(args: &WitnessArgs) -> Result<(), HarnessError> {
    let (inst, _) = read_instance(&args.file)?.build()?;
    let mu = rational_from_f64(args.mu);
    let eps = rational_from_f64(args.epsilon);
    let cover = match args.kind {
        CoverKindArg::Tdi => enumerate_tdi_cover(inst.capacities(), &mu, &eps)?,
        CoverKindArg::Sparse => enumerate_sparse_cover(inst.capacities(), &mu, &eps, &rational_from_f64(args.gamma))?,
    };
    let mut text = cover.to_text();
    if let Some(c) = &args.check {
        if c.len() != inst.cols() {
            return Err(HarnessError::Invalid(format!("--check has {} entries, instance has {} items", c.len(), inst.cols())));
        }
        let a: Vec<Vec<u64>> = (0..inst.rows()).map(|i| inst.row(i).to_vec()).collect();
        let line = match verify_cover_property(&cover, &a, inst.capacities(), c)? {
            CoverCheck::FeasibleMember { index } => format!("check = \"feasible member {index}\"\n"),
            CoverCheck::Holds { margin: Some(m) } => format!("check = \"holds\"\nmargin = \"{m}\"\n"),
            CoverCheck::Holds { margin: None } => "check = \"holds (no feasible dual)\"\n".to_string(),
            CoverCheck::Violated { counterexample, value } => {
                let y: Vec<String> = counterexample.iter().map(ToString::to_string).collect();
                return Err(HarnessError::Compute(format!(
                    "cover property violated: dual {y:?} of value {value} is feasible"
                )));
            }
        };
        text = line + &text;
    }
    emit(args.output.as_ref(), &text, false)
}

fn cmd_sparsify(args: &SparsifyArgs) -> Result<(), HarnessError> {
    let file = read_instance(&args.file)?;
    let (inst, _) = file.build()?;
    let h = Hypergraph::from_instance(&inst)?;
    let k = args.k.unwrap_or(h.k);
    let config = ColoringConfig {
        k,
        epsilon: args.epsilon,
        delta: args.delta,
        s: args.s.unwrap_or(h.edges.len()).max(1),
        seed: args.seed,
    };
    let sparse = sparsify(&h, &config)?;
    let report = sparse.report(k, h.edges.len());
    print!("{}", toml::to_string(&report).expect("report serializes"));
    if let Some(path) = &args.output {
        let id = format!("{}-sparsified-{}", file.id, args.seed);
        write_text(path, &InstanceFile::new(id, &sparse.instance, None).to_toml())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { file } => cmd_validate(file),
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args, false),
        Command::Sweep(args) => cmd_run(args, true),
        Command::Witness(args) => cmd_witness(args),
        Command::Sparsify(args) => cmd_sparsify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spip: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
