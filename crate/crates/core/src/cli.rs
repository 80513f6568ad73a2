//! Command-line front end.
//!
//! Every subcommand writes its outputs plus a JSON run manifest into
//! `--out-dir`. Exit codes: 0 success, 1 input/usage errors, 2 infeasible
//! exact cover, 3 resource or numerical limits.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generators::{
    enumerate_small_instances, fixture_contrived, random_filament_network, random_geometric_tree,
    random_overlapping_tree_cover,
};
use crate::gml::{format_float, load_gml, save_graph, write_csv, CoordinateMode, GraphFile};
use crate::graph::{EdgePartition, WeightedGeometricGraph};
use crate::metrics::{compute_metrics, write_metrics_csv};
use crate::pipeline::{build_pool, PathMethod, PipelineConfig};
use crate::pool::{SamplerConfig, RNG_NAME};
use crate::robustness::{run_deletion_scan, run_noise_scan, PerturbationKind, PerturbationPlan};
use crate::roughness::RoughnessKind;
use crate::similarity::{rand_jaccard, similarity_report};
use crate::solver::{postprocess_merge, solve, CoverMode, FilamentCover, Objective, SolverConfig};
use crate::tree::{solve_tree, TreeCoverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (build ",
    env!("FILACOVER_BUILD_HASH"),
    ")"
);

#[derive(Debug, Parser)]
#[command(name = "filacover", version = LONG_VERSION, about = "Decompose weighted geometric networks into filaments")]
pub struct Cli {
    /// Worker threads for sweeps and perturbation scans.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample paths and solve the cover program.
    Decompose(DecomposeArgs),
    /// Run all 16 option combinations (same as `decompose --sweep`).
    Sweep(DecomposeArgs),
    /// Compare the labels of two annotated graph files.
    Compare(CompareArgs),
    /// Exact cover of a tree by dynamic programming.
    Treesolve(TreeArgs),
    /// Edge-deletion or weight-noise scan against reference labels.
    Robustness(RobustnessArgs),
    /// Merge a fragmented decomposition into longer filaments.
    Postprocess(PostprocessArgs),
    /// Write a synthetic network.
    Generate(GenerateArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Directory receiving all outputs.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// File name prefix; defaults to the input file stem.
    #[arg(long)]
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SamplerArgs {
    /// Path sampler.
    #[arg(long, value_enum, default_value_t = PathMethod::Bfs)]
    pub paths: PathMethod,
    /// Largest deflection in degrees between consecutive BFS edges.
    #[arg(long, default_value_t = 60.0)]
    pub angle_threshold: f64,
    /// Random spanning trees drawn by the RMST sampler.
    #[arg(long, default_value_t = 100)]
    pub rmst_trees: usize,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Pool size at which sampling aborts.
    #[arg(long, default_value_t = 5_000_000)]
    pub max_paths: usize,
}

impl SamplerArgs {
    fn config(&self) -> SamplerConfig {
        SamplerConfig {
            angle_threshold_deg: self.angle_threshold,
            rmst_trees: self.rmst_trees,
            max_paths: self.max_paths,
            rng_seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Cover every edge exactly once or at least once.
    #[arg(long, value_enum, default_value_t = CoverMode::Over)]
    pub mode: CoverMode,
    /// Minimize the total or the average roughness.
    #[arg(long, value_enum, default_value_t = Objective::Total)]
    pub objective: Objective,
    /// Roughness functional.
    #[arg(long, value_enum, default_value_t = RoughnessKind::Pair)]
    pub roughness: RoughnessKind,
    /// Branch-and-bound node budget.
    #[arg(long, default_value_t = 10_000_000)]
    pub node_limit: u64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            cover_mode: self.mode,
            objective: self.objective,
            roughness_kind: self.roughness,
            node_limit: self.node_limit,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecomposeArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Annotated graph whose labels are the reference decomposition.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Run all 16 combinations of paths, mode, objective and roughness.
    #[arg(long)]
    pub sweep: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    pub left: PathBuf,
    pub right: PathBuf,
    /// Comma-separated distances for the structure-aware indices; `inf`
    /// is the unbounded distance.
    #[arg(long, value_delimiter = ',', default_value = "1,inf")]
    pub d: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TreeArgs {
    pub input: PathBuf,
    /// Most filaments allowed through one edge (1 to 3).
    #[arg(long, default_value_t = 1)]
    pub k_overlap: usize,
    /// Minimize the total or the average roughness.
    #[arg(long, value_enum, default_value_t = Objective::Total)]
    pub objective: Objective,
    /// Roughness functional.
    #[arg(long, value_enum, default_value_t = RoughnessKind::Pair)]
    pub roughness: RoughnessKind,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RobustnessArgs {
    pub input: PathBuf,
    /// Reference labels; defaults to the labels stored in the input.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long = "scan", value_enum, default_value_t = PerturbationKind::DeleteEdges)]
    pub kind: PerturbationKind,
    /// Comma-separated deletion counts or noise factors.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub levels: Vec<f64>,
    /// Trials per level; defaults to E for deletion and 100 for noise.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Draw noise with zero variance.
    #[arg(long)]
    pub zero_variance: bool,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PostprocessArgs {
    /// Annotated graph carrying the fragmented decomposition.
    pub input: PathBuf,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Roughness functional.
    #[arg(long, value_enum, default_value_t = RoughnessKind::Pair)]
    pub roughness: RoughnessKind,
    /// Branch-and-bound node budget.
    #[arg(long, default_value_t = 10_000_000)]
    pub node_limit: u64,
    /// Annotated graph whose labels are the reference decomposition.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GenerateKind {
    /// Contrived network with truth labels.
    Fixture,
    /// Random geometric tree with a random overlapping path cover.
    Tree,
    /// Jittered lattice network.
    Network,
    /// Small-instance corpus, one file per graph.
    Corpus,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = GenerateKind::Fixture)]
    pub kind: GenerateKind,
    /// Nodes of a tree or lattice side of a network.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Largest edge count in the corpus.
    #[arg(long, default_value_t = 7)]
    pub max_edges: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub build: String,
    pub subcommand: String,
    /// Arguments after the program name; replaying them reproduces the run.
    pub argv: Vec<String>,
    pub options: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub results: Value,
    pub wall_time_s: f64,
}

/// Exit code of an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InfeasibleExactCover { .. } => EXIT_INFEASIBLE,
        Error::PoolExplosion { .. }
        | Error::NodeLimitExceeded { .. }
        | Error::NumericalFailure(_) => EXIT_RESOURCE,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Diagnostics go to `err`, summaries to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let argv: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match dispatch(cli, argv, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error [{}]: {e}", e.module());
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli, argv: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let threads = cli.threads.max(1);
    let start = Instant::now();
    let ctx = Context {
        argv,
        start,
        threads,
    };
    match cli.command {
        Command::Decompose(a) if a.sweep => cmd_sweep(&ctx, &a, out),
        Command::Decompose(a) => cmd_decompose(&ctx, &a, out),
        Command::Sweep(a) => cmd_sweep(&ctx, &a, out),
        Command::Compare(a) => cmd_compare(&ctx, &a, out),
        Command::Treesolve(a) => cmd_treesolve(&ctx, &a, out),
        Command::Robustness(a) => cmd_robustness(&ctx, &a, out),
        Command::Postprocess(a) => cmd_postprocess(&ctx, &a, out),
        Command::Generate(a) => cmd_generate(&ctx, &a, out),
        Command::Replay(a) => cmd_replay(&a, out, err),
    }
}

struct Context {
    argv: Vec<String>,
    start: Instant,
    threads: usize,
}

impl Context {
    #[allow(clippy::too_many_arguments)]
    fn manifest(
        &self,
        subcommand: &str,
        options: &impl Serialize,
        seed: Option<u64>,
        inputs: &[&Path],
        outputs: &[PathBuf],
        results: Value,
        path: &Path,
    ) -> Result<()> {
        let manifest = RunManifest {
            tool: "filacover".into(),
            version: crate::VERSION.into(),
            build: crate::BUILD_HASH.into(),
            subcommand: subcommand.into(),
            argv: self.argv.clone(),
            options: serde_json::to_value(options).map_err(|e| Error::Config(e.to_string()))?,
            seed,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            results,
            wall_time_s: self.start.elapsed().as_secs_f64(),
        };
        let text =
            serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }
}

fn read_graph_file(path: &Path) -> Result<GraphFile> {
    let file = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    load_gml(std::io::BufReader::new(file), CoordinateMode::Any)
}

fn labels_of(path: &Path) -> Result<(WeightedGeometricGraph, EdgePartition)> {
    let file = read_graph_file(path)?;
    let labels = file.partition.ok_or_else(|| {
        Error::Validation(format!("{} carries no filament labels", path.display()))
    })?;
    Ok((file.graph, labels))
}

/// Loads reference labels and checks they describe `graph`.
fn reference_for(graph: &WeightedGeometricGraph, path: &Path) -> Result<EdgePartition> {
    let (g, labels) = labels_of(path)?;
    same_graph(graph, &g)?;
    Ok(labels)
}

fn same_graph(a: &WeightedGeometricGraph, b: &WeightedGeometricGraph) -> Result<()> {
    if a.edge_count() != b.edge_count() {
        return Err(Error::MismatchedEdgeSets {
            left: a.edge_count(),
            right: b.edge_count(),
        });
    }
    if !a.approx_eq(b, 1e-9) {
        return Err(Error::Validation(
            "the two files describe different graphs".into(),
        ));
    }
    Ok(())
}

fn prefix_for(output: &OutputArgs, input: Option<&Path>, fallback: &str) -> String {
    output.prefix.clone().unwrap_or_else(|| {
        input
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| fallback.to_string())
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes the annotated graph and, for geometric graphs, the filament
/// table. Returns the written paths.
fn write_cover(
    graph: &WeightedGeometricGraph,
    cover: &FilamentCover,
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>> {
    let gml = dir.join(format!("{stem}.gml"));
    let mut sink = create(&gml)?;
    save_graph(graph, Some(&cover.labels), &mut sink)?;
    sink.flush()?;
    let mut written = vec![gml];
    if graph.is_geometric() {
        let csv = dir.join(format!("{stem}.filaments.csv"));
        let mut sink = create(&csv)?;
        write_metrics_csv(&compute_metrics(cover, graph)?, &mut sink)?;
        sink.flush()?;
        written.push(csv);
    }
    Ok(written)
}

fn cover_results(cover: &FilamentCover) -> Value {
    json!({
        "n_filaments": cover.len(),
        "objective_value": cover.objective_value,
        "objective": cover.objective_kind.name(),
        "roughness": cover.roughness_kind.name(),
        "cover_mode": cover.cover_mode.name(),
        "nodes_explored": cover.stats.nodes_explored,
        "pool_size": cover.stats.pool_size,
        "method": cover.stats.method,
        "rng": cover.stats.rng,
        "subproblems": cover.stats.subproblems,
    })
}

fn reference_scores(
    graph: &WeightedGeometricGraph,
    cover: &EdgePartition,
    reference: &EdgePartition,
) -> Result<(f64, f64, f64, f64)> {
    let (ri1, ji1, _) = rand_jaccard(cover, reference, Some(1), Some(graph))?;
    let (ri, ji, _) = rand_jaccard(cover, reference, None, None)?;
    Ok((ji1, ji, ri1, ri))
}

fn cmd_decompose(ctx: &Context, a: &DecomposeArgs, out: &mut dyn Write) -> Result<()> {
    let graph = read_graph_file(&a.input)?.graph;
    let reference = a
        .reference
        .as_deref()
        .map(|p| reference_for(&graph, p))
        .transpose()?;
    let config = PipelineConfig {
        paths: a.sampler.paths,
        sampler: a.sampler.config(),
        solver: a.solver.config(),
    };
    let pool = build_pool(&graph, config.paths, &config.sampler)?;
    let cover = solve(&pool, &graph, &config.solver)?;
    let prefix = prefix_for(&a.output, Some(&a.input), "decompose");
    let mut outputs = write_cover(
        &graph,
        &cover,
        &a.output.out_dir,
        &format!("{prefix}.cover"),
    )?;
    let mut results = cover_results(&cover);
    writeln!(out, "filaments: {}", cover.len())?;
    writeln!(out, "objective: {}", format_float(cover.objective_value))?;
    if let Some(r) = &reference {
        let (ji1, ji, ri1, ri) = reference_scores(&graph, &cover.labels, r)?;
        writeln!(
            out,
            "ji1: {}  ji: {}  ri1: {}  ri: {}",
            format_float(ji1),
            format_float(ji),
            format_float(ri1),
            format_float(ri)
        )?;
        results["ji1"] = json!(ji1);
        results["ji"] = json!(ji);
        results["ri1"] = json!(ri1);
        results["ri"] = json!(ri);
    }
    let manifest = a.output.out_dir.join(format!("{prefix}.decompose.json"));
    outputs.push(manifest.clone());
    let mut inputs = vec![a.input.as_path()];
    inputs.extend(a.reference.as_deref());
    ctx.manifest(
        "decompose",
        a,
        Some(a.sampler.seed),
        &inputs,
        &outputs,
        results,
        &manifest,
    )
}

fn cmd_sweep(ctx: &Context, a: &DecomposeArgs, out: &mut dyn Write) -> Result<()> {
    let graph = read_graph_file(&a.input)?.graph;
    let reference = a
        .reference
        .as_deref()
        .map(|p| reference_for(&graph, p))
        .transpose()?;
    let prefix = prefix_for(&a.output, Some(&a.input), "sweep");
    let mut combos = Vec::new();
    for paths in [PathMethod::Bfs, PathMethod::Rmst] {
        for mode in [CoverMode::Exact, CoverMode::Over] {
            for objective in [Objective::Total, Objective::Avg] {
                for kind in [RoughnessKind::Pair, RoughnessKind::All] {
                    combos.push((paths, mode, objective, kind));
                }
            }
        }
    }
    let job =
        |&(paths, mode, objective, kind): &(PathMethod, CoverMode, Objective, RoughnessKind)| {
            let config = PipelineConfig {
                paths,
                sampler: a.sampler.config(),
                solver: SolverConfig {
                    cover_mode: mode,
                    objective,
                    roughness_kind: kind,
                    ..a.solver.config()
                },
            };
            build_pool(&graph, paths, &config.sampler)
                .and_then(|pool| solve(&pool, &graph, &config.solver))
        };
    let covers: Vec<Result<FilamentCover>> = if ctx.threads > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| combos.par_iter().map(job).collect())
    } else {
        combos.iter().map(job).collect()
    };
    let mut rows = Vec::new();
    let mut outputs = Vec::new();
    for (&(paths, mode, objective, kind), cover) in combos.iter().zip(&covers) {
        let tag = format!(
            "{}-{}-{}-{}",
            paths.name(),
            mode.name(),
            objective.name(),
            kind.name()
        );
        let mut row = vec![
            paths.name().to_string(),
            mode.name().into(),
            objective.name().into(),
            kind.name().into(),
        ];
        match cover {
            Ok(c) => {
                let path = a.output.out_dir.join(format!("{prefix}.{tag}.gml"));
                let mut sink = create(&path)?;
                save_graph(&graph, Some(&c.labels), &mut sink)?;
                sink.flush()?;
                outputs.push(path);
                row.extend([
                    "ok".to_string(),
                    c.len().to_string(),
                    format_float(c.objective_value),
                ]);
                match &reference {
                    Some(r) => {
                        let (ji1, ji, ri1, ri) = reference_scores(&graph, &c.labels, r)?;
                        row.extend([ji1, ji, ri1, ri].map(format_float));
                    }
                    None => row.extend(std::iter::repeat_n(String::new(), 4)),
                }
            }
            Err(e) => {
                row.push(format!("error:{}", e.module()));
                row.extend(std::iter::repeat_n(String::new(), 6));
            }
        }
        rows.push(row);
    }
    let summary = a.output.out_dir.join(format!("{prefix}.sweep.csv"));
    let mut sink = create(&summary)?;
    write_csv(
        &mut sink,
        "paths,mode,objective,roughness,status,n_filaments,objective_value,ji1,ji,ri1,ri",
        &rows,
    )?;
    sink.flush()?;
    outputs.push(summary);
    let ok = covers.iter().filter(|c| c.is_ok()).count();
    writeln!(out, "combinations: {} ({} solved)", rows.len(), ok)?;
    let manifest = a.output.out_dir.join(format!("{prefix}.sweep.json"));
    outputs.push(manifest.clone());
    let mut inputs = vec![a.input.as_path()];
    inputs.extend(a.reference.as_deref());
    ctx.manifest(
        "sweep",
        a,
        Some(a.sampler.seed),
        &inputs,
        &outputs,
        json!({ "solved": ok }),
        &manifest,
    )
}

fn parse_distance(s: &str) -> Result<Option<u32>> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") {
        return Ok(None);
    }
    match t.parse::<u32>() {
        Ok(d) if d >= 1 => Ok(Some(d)),
        _ => Err(Error::Config(format!(
            "invalid distance {t:?}; expected a positive integer or inf"
        ))),
    }
}

fn cmd_compare(ctx: &Context, a: &CompareArgs, out: &mut dyn Write) -> Result<()> {
    let (g1, left) = labels_of(&a.left)?;
    let (g2, right) = labels_of(&a.right)?;
    same_graph(&g1, &g2)?;
    let ds: Vec<Option<u32>> =
        a.d.iter()
            .map(|s| parse_distance(s))
            .collect::<Result<_>>()?;
    let report = similarity_report(&left, &right, Some(&g1), &ds)?;
    let mut header = vec!["vi".to_string(), "ri".into(), "ji".into()];
    let mut row = vec![
        report
            .vi
            .map_or_else(|| "undefined".to_string(), format_float),
        format_float(report.ri),
        format_float(report.ji),
    ];
    for d in &ds {
        let name = d.map_or_else(|| "inf".to_string(), |d| d.to_string());
        header.push(format!("ri_{name}"));
        header.push(format!("ji_{name}"));
        row.push(format_float(report.ri_d[d]));
        row.push(format_float(report.ji_d[d]));
    }
    let header = header.join(",");
    write_csv(out, &header, std::slice::from_ref(&row))?;
    let prefix = prefix_for(&a.output, Some(&a.left), "compare");
    let csv = a.output.out_dir.join(format!("{prefix}.compare.csv"));
    let mut sink = create(&csv)?;
    write_csv(&mut sink, &header, &[row])?;
    sink.flush()?;
    let manifest = a.output.out_dir.join(format!("{prefix}.compare.json"));
    let results =
        serde_json::to_value(report_json(&report)).map_err(|e| Error::Config(e.to_string()))?;
    ctx.manifest(
        "compare",
        a,
        None,
        &[&a.left, &a.right],
        &[csv, manifest.clone()],
        results,
        &manifest,
    )
}

fn report_json(r: &crate::similarity::SimilarityReport) -> Value {
    let key = |d: &Option<u32>| d.map_or_else(|| "inf".to_string(), |d| d.to_string());
    json!({
        "vi": r.vi,
        "ri": r.ri,
        "ji": r.ji,
        "ri_d": r.ri_d.iter().map(|(d, v)| (key(d), json!(v))).collect::<serde_json::Map<_, _>>(),
        "ji_d": r.ji_d.iter().map(|(d, v)| (key(d), json!(v))).collect::<serde_json::Map<_, _>>(),
    })
}

fn cmd_treesolve(ctx: &Context, a: &TreeArgs, out: &mut dyn Write) -> Result<()> {
    let graph = read_graph_file(&a.input)?.graph;
    let config = TreeCoverConfig {
        k_overlap: a.k_overlap,
        objective: a.objective,
        roughness_kind: a.roughness,
    };
    let cover = solve_tree(&graph, &config)?;
    let prefix = prefix_for(&a.output, Some(&a.input), "tree");
    let mut outputs = write_cover(&graph, &cover, &a.output.out_dir, &format!("{prefix}.tree"))?;
    writeln!(out, "filaments: {}", cover.len())?;
    writeln!(out, "objective: {}", format_float(cover.objective_value))?;
    let manifest = a.output.out_dir.join(format!("{prefix}.treesolve.json"));
    outputs.push(manifest.clone());
    ctx.manifest(
        "treesolve",
        a,
        None,
        &[&a.input],
        &outputs,
        cover_results(&cover),
        &manifest,
    )
}

fn cmd_robustness(ctx: &Context, a: &RobustnessArgs, out: &mut dyn Write) -> Result<()> {
    let file = read_graph_file(&a.input)?;
    let graph = file.graph;
    let reference = match &a.reference {
        Some(p) => reference_for(&graph, p)?,
        None => file.partition.ok_or_else(|| {
            Error::Validation("no reference labels: pass --reference or annotate the input".into())
        })?,
    };
    let config = PipelineConfig {
        paths: a.sampler.paths,
        sampler: a.sampler.config(),
        solver: a.solver.config(),
    };
    let mut plan = match a.kind {
        PerturbationKind::DeleteEdges => {
            let mut plan = PerturbationPlan::deletion(Vec::new(), &graph, a.sampler.seed);
            plan.levels = a.levels.clone();
            plan
        }
        PerturbationKind::WeightNoise => PerturbationPlan::noise(a.levels.clone(), a.sampler.seed),
    };
    if let Some(t) = a.trials {
        plan.trials_per_level = t;
    }
    plan.zero_variance = a.zero_variance;
    let table = match a.kind {
        PerturbationKind::DeleteEdges => {
            run_deletion_scan(&graph, &reference, &plan, &config, ctx.threads)?
        }
        PerturbationKind::WeightNoise => {
            run_noise_scan(&graph, &reference, &plan, &config, ctx.threads)?
        }
    };
    let prefix = prefix_for(&a.output, Some(&a.input), "robustness");
    let scan = match a.kind {
        PerturbationKind::DeleteEdges => "delete",
        PerturbationKind::WeightNoise => "noise",
    };
    let csv = a.output.out_dir.join(format!("{prefix}.{scan}.csv"));
    let mut sink = create(&csv)?;
    table.write_csv(&mut sink)?;
    sink.flush()?;
    let summary = table.summary();
    for s in &summary {
        let level = s.level.map_or_else(|| "baseline".to_string(), format_float);
        writeln!(
            out,
            "level {level}: mean ji1 {}  mean ri1 {}",
            format_float(s.mean_ji1),
            format_float(s.mean_ri1)
        )?;
    }
    let slope = table.ji1_slope();
    if let Some(s) = slope {
        writeln!(out, "ji1 slope per level: {}", format_float(s))?;
    }
    let failures: Vec<Value> = table
        .rows
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| json!({ "level": r.level, "trial": r.trial, "error": e }))
        })
        .collect();
    let results =
        json!({ "plan": plan, "summary": summary, "ji1_slope": slope, "failures": failures });
    let manifest = a.output.out_dir.join(format!("{prefix}.robustness.json"));
    let mut inputs = vec![a.input.as_path()];
    inputs.extend(a.reference.as_deref());
    ctx.manifest(
        "robustness",
        a,
        Some(a.sampler.seed),
        &inputs,
        &[csv, manifest.clone()],
        results,
        &manifest,
    )
}

fn cmd_postprocess(ctx: &Context, a: &PostprocessArgs, out: &mut dyn Write) -> Result<()> {
    let (graph, initial) = labels_of(&a.input)?;
    let reference = a
        .reference
        .as_deref()
        .map(|p| reference_for(&graph, p))
        .transpose()?;
    let pool = build_pool(&graph, a.sampler.paths, &a.sampler.config())?;
    let config = SolverConfig {
        roughness_kind: a.roughness,
        node_limit: a.node_limit,
        ..SolverConfig::default()
    };
    let cover = postprocess_merge(&graph, &initial, &pool, &config)?;
    let prefix = prefix_for(&a.output, Some(&a.input), "merged");
    let mut outputs = write_cover(
        &graph,
        &cover,
        &a.output.out_dir,
        &format!("{prefix}.merged"),
    )?;
    let mut results = cover_results(&cover);
    writeln!(
        out,
        "fragments: {}  filaments: {}",
        initial.filaments().len(),
        cover.len()
    )?;
    if let Some(r) = &reference {
        let (ji1, ji, ri1, ri) = reference_scores(&graph, &cover.labels, r)?;
        writeln!(out, "ji1: {}  ji: {}", format_float(ji1), format_float(ji))?;
        results["ji1"] = json!(ji1);
        results["ji"] = json!(ji);
        results["ri1"] = json!(ri1);
        results["ri"] = json!(ri);
    }
    let manifest = a.output.out_dir.join(format!("{prefix}.postprocess.json"));
    outputs.push(manifest.clone());
    let mut inputs = vec![a.input.as_path()];
    inputs.extend(a.reference.as_deref());
    ctx.manifest(
        "postprocess",
        a,
        Some(a.sampler.seed),
        &inputs,
        &outputs,
        results,
        &manifest,
    )
}

fn cmd_generate(ctx: &Context, a: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let name = match a.kind {
        GenerateKind::Fixture => "fixture",
        GenerateKind::Tree => "tree",
        GenerateKind::Network => "network",
        GenerateKind::Corpus => "corpus",
    };
    let prefix = prefix_for(&a.output, None, name);
    let dir = &a.output.out_dir;
    let mut outputs = Vec::new();
    let mut write = |graph: &WeightedGeometricGraph,
                     labels: Option<&EdgePartition>,
                     stem: String|
     -> Result<()> {
        let path = dir.join(format!("{stem}.gml"));
        let mut sink = create(&path)?;
        save_graph(graph, labels, &mut sink)?;
        sink.flush()?;
        outputs.push(path);
        Ok(())
    };
    let mut count = 1;
    match a.kind {
        GenerateKind::Fixture => {
            let f = fixture_contrived();
            write(&f.graph, Some(&f.truth), prefix.clone())?;
        }
        GenerateKind::Tree => {
            let tree = random_geometric_tree(a.n, a.seed)?;
            let labels = random_overlapping_tree_cover(&tree, 10, a.seed)?;
            write(&tree, Some(&labels), prefix.clone())?;
        }
        GenerateKind::Network => {
            write(&random_filament_network(a.n, a.seed)?, None, prefix.clone())?;
        }
        GenerateKind::Corpus => {
            let corpus = enumerate_small_instances(a.max_edges);
            count = corpus.len();
            for (i, g) in corpus.iter().enumerate() {
                write(g, None, format!("{prefix}-{i:03}"))?;
            }
        }
    }
    writeln!(out, "wrote {count} graph file(s) to {}", dir.display())?;
    let manifest = dir.join(format!("{prefix}.generate.json"));
    outputs.push(manifest.clone());
    let seed = matches!(a.kind, GenerateKind::Tree | GenerateKind::Network).then_some(a.seed);
    ctx.manifest(
        "generate",
        a,
        seed,
        &[],
        &outputs,
        json!({ "graphs": count, "rng": RNG_NAME }),
        &manifest,
    )
}

fn cmd_replay(a: &ReplayArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&a.manifest)?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    if manifest.subcommand == "replay" || manifest.argv.iter().any(|s| s == "replay") {
        return Err(Error::Config("a manifest cannot replay a replay".into()));
    }
    let mut args = vec!["filacover".to_string()];
    args.extend(manifest.argv);
    match run(args, out, err) {
        EXIT_OK => Ok(()),
        code => Err(Error::Config(format!(
            "replayed command failed with exit code {code}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances_parse() {
        assert_eq!(parse_distance("inf").unwrap(), None);
        assert_eq!(parse_distance(" 4").unwrap(), Some(4));
        assert!(parse_distance("0").is_err());
        assert!(parse_distance("x").is_err());
    }

    #[test]
    fn exit_codes_are_stable() {
        assert_eq!(exit_code(&Error::Validation("x".into())), 1);
        assert_eq!(
            exit_code(&Error::InfeasibleExactCover {
                uncoverable: vec![]
            }),
            2
        );
        assert_eq!(exit_code(&Error::PoolExplosion { cap: 1 }), 3);
        assert_eq!(exit_code(&Error::KTooLarge(4)), 1);
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["filacover", "decompose"], &mut o, &mut e), 1);
        assert_eq!(run(["filacover", "--version"], &mut o, &mut e), 0);
        let text = String::from_utf8(o).unwrap();
        assert!(text.contains(env!("CARGO_PKG_VERSION")) && text.contains("build"));
    }
}
