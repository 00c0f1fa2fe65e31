use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hnsw_bench::{
    build_index, ground_truth, parse_distance, parse_selector, query_rows, sweep,
    truth_from_ids, write_csv, Cap, Grid, LevelMult, Queries,
};
use hnsw_core::dataset::{
    generate_reporting, read_fvecs_file, read_ivecs_file, write_fvecs_file, write_ivecs_file,
    Family, SyntheticSpec, DEFAULT_CLUSTER_SPREAD,
};
use hnsw_core::storage::{load_index_file, save_index_file};
use hnsw_core::{Dataset, IndexParams};

#[derive(Parser)]
#[command(name = "hnsw-bench", version, about = "Build, query and sweep HNSW indexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as fvecs.
    Gen(GenArgs),
    /// Compute exact k-NN ground truth as ivecs.
    Gt(GtArgs),
    /// Build an index and save a snapshot.
    Build(BuildArgs),
    /// Query a snapshot at one or more ef values; emits CSV.
    Query(QueryArgs),
    /// Build and query every point of a parameter grid; emits CSV.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Uniform,
    Clusters,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, default_value_t = DEFAULT_CLUSTER_SPREAD)]
    spread: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GtArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, required_unless_present = "self_queries")]
    queries: Option<PathBuf>,
    /// Use the dataset itself as the query set.
    #[arg(long, conflicts_with = "queries")]
    self_queries: bool,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "l2")]
    distance: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long, default_value = "l2")]
    distance: String,
    #[arg(long, default_value_t = 16)]
    m: usize,
    /// Defaults to M.
    #[arg(long)]
    mmax: Option<usize>,
    /// Defaults to 2M; `inf` for no cap.
    #[arg(long)]
    mmax0: Option<Cap>,
    #[arg(long, default_value_t = 100)]
    ef_construction: usize,
    /// Defaults to 1/ln(M).
    #[arg(long)]
    level_mult: Option<f64>,
    #[arg(long, default_value = "heuristic")]
    selector: String,
    #[arg(long)]
    extend_candidates: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    keep_pruned: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl IndexArgs {
    fn params(&self) -> Result<IndexParams> {
        let m = self.m;
        let mut p = IndexParams::new(m)
            .with_mmax(self.mmax.unwrap_or(m))
            .with_mmax0(self.mmax0.unwrap_or(Cap::Auto).resolve(m))
            .with_ef_construction(self.ef_construction)
            .with_selector(parse_selector(&self.selector)?)
            .with_extend_candidates(self.extend_candidates)
            .with_keep_pruned_connections(self.keep_pruned)
            .with_seed(self.seed);
        if let Some(lm) = self.level_mult {
            p = p.with_level_mult(lm);
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    index: IndexArgs,
    /// Snapshot path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    /// Snapshot written by `build`.
    #[arg(long)]
    index: PathBuf,
    #[arg(long, required_unless_present = "self_queries")]
    queries: Option<PathBuf>,
    /// Query with every indexed element.
    #[arg(long, conflicts_with = "queries")]
    self_queries: bool,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    ef: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, required_unless_present = "self_queries")]
    queries: Option<PathBuf>,
    /// Draw queries from the indexed elements.
    #[arg(long, conflicts_with = "queries")]
    self_queries: bool,
    #[arg(long, default_value_t = 100)]
    num_queries: usize,
    #[arg(long, default_value = "l2")]
    distance: String,
    #[arg(long, value_delimiter = ',', default_value = "16")]
    m: Vec<usize>,
    #[arg(long)]
    mmax: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "auto")]
    mmax0: Vec<Cap>,
    #[arg(long, value_delimiter = ',', default_value = "auto")]
    level_mult: Vec<LevelMult>,
    #[arg(long, value_delimiter = ',', default_value = "heuristic")]
    selector: Vec<String>,
    #[arg(long, default_value_t = 100)]
    ef_construction: usize,
    #[arg(long)]
    extend_candidates: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    keep_pruned: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    ef: Vec<usize>,
    /// Dataset prefixes to index; defaults to the whole dataset.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    read_fvecs_file(path).with_context(|| format!("reading {}", path.display()))
}

fn csv_sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    ensure!(args.dim > 0, "--dim must be positive");
    let spec = SyntheticSpec {
        family: match args.family {
            FamilyArg::Uniform => Family::UniformCube,
            FamilyArg::Clusters => Family::Clusters,
        },
        n: args.n,
        dim: args.dim,
        cluster_count: args.clusters,
        cluster_spread: args.spread,
        seed: args.seed,
    };
    if spec.family == Family::Clusters {
        ensure!(spec.cluster_count > 0, "--clusters must be positive");
        ensure!(spec.cluster_spread > 0.0, "--spread must be positive");
    }
    let (data, used) = generate_reporting(&spec);
    if used != spec.seed {
        eprintln!("note: seed {} gave overlapping clusters, used seed {used}", spec.seed);
    }
    write_fvecs_file(&args.out, &data)?;
    Ok(())
}

fn cmd_gt(args: GtArgs) -> Result<()> {
    let kind = parse_distance(&args.distance)?;
    let data = load_dataset(&args.dataset)?;
    let queries = match &args.queries {
        Some(q) => load_dataset(q)?,
        None => data.clone(),
    };
    let truth = ground_truth(&data, &kind, &queries, args.k)?;
    write_ivecs_file(&args.out, &truth.ids())?;
    Ok(())
}

fn cmd_build(args: BuildArgs) -> Result<()> {
    let kind = parse_distance(&args.index.distance)?;
    let params = args.index.params()?;
    let data = load_dataset(&args.dataset)?;
    let (index, build_ms) = build_index(&data, &kind, params)?;
    let summary = save_index_file(&index, &args.out)?;
    let p = index.params();
    let stats = index.stats();
    let mmax0 = if p.mmax0 == usize::MAX {
        "inf".to_string()
    } else {
        p.mmax0.to_string()
    };
    let population: Vec<String> = stats.layer_population.iter().map(|c| c.to_string()).collect();
    println!("dataset={}", label(&args.dataset));
    println!("n={}", index.len());
    println!("dim={}", index.dim());
    println!("distance={}", kind.label());
    println!("m={}", p.m);
    println!("mmax={}", p.mmax);
    println!("mmax0={mmax0}");
    println!("ef_construction={}", p.ef_construction);
    println!("level_mult={:.6}", p.level_mult);
    println!("selector={}", p.selector.label());
    println!("extend_candidates={}", p.extend_candidates);
    println!("keep_pruned={}", p.keep_pruned_connections);
    println!("seed={}", p.seed);
    println!("build_ms={build_ms:.3}");
    println!("max_layer={}", stats.max_layer);
    println!("layer_population={}", population.join(","));
    println!("total_link_entries={}", stats.total_link_entries);
    println!("mean_level={:.6}", stats.mean_level);
    println!("snapshot_bytes={}", summary.total_bytes);
    Ok(())
}

fn cmd_query(args: QueryArgs) -> Result<()> {
    ensure!(args.k > 0, "--k must be positive");
    if let Some(&ef) = args.ef.iter().find(|&&ef| ef < args.k) {
        bail!("--k {} exceeds ef {ef}", args.k);
    }
    let index = load_index_file(&args.index)
        .with_context(|| format!("loading {}", args.index.display()))?;
    let queries = match &args.queries {
        Some(q) => load_dataset(q)?,
        None => {
            Dataset::from_rows(index.dim(), (0..index.len() as u32).map(|i| index.vector(i.into())))?
        }
    };
    ensure!(
        queries.is_empty() || queries.dim() == index.dim(),
        "query dimension {} differs from index dimension {}",
        queries.dim(),
        index.dim()
    );
    let ids = read_ivecs_file(&args.gt).with_context(|| format!("reading {}", args.gt.display()))?;
    let truth = truth_from_ids(&index, &queries, &ids, args.k)?;
    let rows = query_rows(&label(&args.index), &index, &queries, &truth, args.k, &args.ef, None);
    if let Some(bad) = rows.iter().find(|r| !r.is_ok()) {
        bail!("{}", bad.status);
    }
    write_csv(csv_sink(&args.out)?, &rows)?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let kind = parse_distance(&args.distance)?;
    let data = load_dataset(&args.dataset)?;
    let queries = match &args.queries {
        Some(q) => Queries::Held(load_dataset(q)?),
        None => Queries::SelfSample {
            count: args.num_queries,
            seed: args.seed,
        },
    };
    let grid = Grid {
        sizes: args.sizes,
        ms: args.m,
        level_mults: args.level_mult,
        mmax0s: args.mmax0,
        selectors: args
            .selector
            .iter()
            .map(|s| parse_selector(s))
            .collect::<Result<_>>()?,
        efs: args.ef,
        mmax: args.mmax,
        ef_construction: args.ef_construction,
        extend_candidates: args.extend_candidates,
        keep_pruned: args.keep_pruned,
        seed: args.seed,
        k: args.k,
    };
    let rows = sweep(&label(&args.dataset), &data, &kind, &queries, &grid);
    write_csv(csv_sink(&args.out)?, &rows)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Gt(a) => cmd_gt(a),
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
