//! C ABI over the filacover library.
//!
//! Graphs and covers are opaque heap handles released with their `*_free`
//! function. Every fallible call returns an [`FcStatus`]; on failure the
//! message is available from [`fc_last_error_message`] on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use filacover::gml::{load_gml, save_graph, CoordinateMode};
use filacover::graph::NodeRecord;
use filacover::pipeline::{decompose, PathMethod, PipelineConfig};
use filacover::similarity::rand_jaccard;
use filacover::tree::{solve_tree, TreeCoverConfig};
use filacover::{
    CoverMode, Error, FilamentCover, Objective, RoughnessKind, SamplerConfig, SolverConfig,
    WeightedGeometricGraph,
};

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    MissingCoordinates = 5,
    DegenerateGeometry = 6,
    PoolExplosion = 7,
    GraphMismatch = 8,
    InfeasibleExactCover = 9,
    NodeLimitExceeded = 10,
    NumericalFailure = 11,
    NotATree = 12,
    KTooLarge = 13,
    MismatchedEdgeSets = 14,
    Config = 15,
    Io = 16,
    BufferTooSmall = 17,
    Panic = 18,
}

impl From<&Error> for FcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } => FcStatus::Parse,
            Error::Validation(_) => FcStatus::Validation,
            Error::MissingCoordinates(_) => FcStatus::MissingCoordinates,
            Error::DegenerateGeometry(_) => FcStatus::DegenerateGeometry,
            Error::PoolExplosion { .. } => FcStatus::PoolExplosion,
            Error::GraphMismatch => FcStatus::GraphMismatch,
            Error::InfeasibleExactCover { .. } => FcStatus::InfeasibleExactCover,
            Error::NodeLimitExceeded { .. } => FcStatus::NodeLimitExceeded,
            Error::NumericalFailure(_) => FcStatus::NumericalFailure,
            Error::NotATree(_) => FcStatus::NotATree,
            Error::KTooLarge(_) => FcStatus::KTooLarge,
            Error::MismatchedEdgeSets { .. } => FcStatus::MismatchedEdgeSets,
            Error::Config(_) => FcStatus::Config,
            Error::Io(_) => FcStatus::Io,
        }
    }
}

pub const FC_PATHS_BFS: u32 = 0;
pub const FC_PATHS_RMST: u32 = 1;
pub const FC_PATHS_BOTH: u32 = 2;
pub const FC_MODE_EXACT: u32 = 0;
pub const FC_MODE_OVER: u32 = 1;
pub const FC_OBJECTIVE_TOTAL: u32 = 0;
pub const FC_OBJECTIVE_AVG: u32 = 1;
pub const FC_ROUGHNESS_PAIR: u32 = 0;
pub const FC_ROUGHNESS_ALL: u32 = 1;
/// Passed as `d` to [`fc_compare`] for the unbounded distance.
pub const FC_DISTANCE_INF: u32 = 0;

/// Opaque graph handle.
pub struct FcGraph(WeightedGeometricGraph);

/// Opaque cover handle.
pub struct FcCover(FilamentCover);

/// Sampling and solver options; obtain defaults from
/// [`fc_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FcOptions {
    pub paths: u32,
    pub cover_mode: u32,
    pub objective: u32,
    pub roughness: u32,
    pub angle_threshold_deg: f64,
    pub rmst_trees: usize,
    pub max_paths: usize,
    pub seed: u64,
    pub node_limit: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), FcStatus>) -> FcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FcStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            FcStatus::Panic
        }
    }
}

fn fail(e: Error) -> FcStatus {
    let status = FcStatus::from(&e);
    set_error(e.to_string());
    status
}

fn invalid(msg: &str) -> FcStatus {
    set_error(msg.to_string());
    FcStatus::InvalidArgument
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, FcStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null pointer argument".into());
        FcStatus::NullPointer
    })
}

unsafe fn slice<'a, T>(p: *const T, n: usize) -> Result<&'a [T], FcStatus> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        set_error("null array argument".into());
        return Err(FcStatus::NullPointer);
    }
    Ok(std::slice::from_raw_parts(p, n))
}

fn objective(v: u32) -> Result<Objective, FcStatus> {
    match v {
        FC_OBJECTIVE_TOTAL => Ok(Objective::Total),
        FC_OBJECTIVE_AVG => Ok(Objective::Avg),
        _ => Err(invalid("unknown objective")),
    }
}

fn roughness(v: u32) -> Result<RoughnessKind, FcStatus> {
    match v {
        FC_ROUGHNESS_PAIR => Ok(RoughnessKind::Pair),
        FC_ROUGHNESS_ALL => Ok(RoughnessKind::All),
        _ => Err(invalid("unknown roughness kind")),
    }
}

impl FcOptions {
    fn pipeline(&self) -> Result<PipelineConfig, FcStatus> {
        let paths = match self.paths {
            FC_PATHS_BFS => PathMethod::Bfs,
            FC_PATHS_RMST => PathMethod::Rmst,
            FC_PATHS_BOTH => PathMethod::Both,
            _ => return Err(invalid("unknown path method")),
        };
        let cover_mode = match self.cover_mode {
            FC_MODE_EXACT => CoverMode::Exact,
            FC_MODE_OVER => CoverMode::Over,
            _ => return Err(invalid("unknown cover mode")),
        };
        Ok(PipelineConfig {
            paths,
            sampler: SamplerConfig {
                angle_threshold_deg: self.angle_threshold_deg,
                rmst_trees: self.rmst_trees,
                max_paths: self.max_paths,
                rng_seed: self.seed,
            },
            solver: SolverConfig {
                cover_mode,
                objective: objective(self.objective)?,
                roughness_kind: roughness(self.roughness)?,
                node_limit: self.node_limit,
                ..SolverConfig::default()
            },
        })
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fc_version() -> *const c_char {
    const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn fc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default options: BFS pool, over mode, total objective, pair roughness.
#[no_mangle]
pub extern "C" fn fc_options_default() -> FcOptions {
    let s = SamplerConfig::default();
    let v = SolverConfig::default();
    FcOptions {
        paths: FC_PATHS_BFS,
        cover_mode: FC_MODE_OVER,
        objective: FC_OBJECTIVE_TOTAL,
        roughness: FC_ROUGHNESS_PAIR,
        angle_threshold_deg: s.angle_threshold_deg,
        rmst_trees: s.rmst_trees,
        max_paths: s.max_paths,
        seed: s.rng_seed,
        node_limit: v.node_limit,
    }
}

/// Parses a graph from NUL-terminated GML text.
///
/// # Safety
/// `text` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_graph_from_gml(
    text: *const c_char,
    out: *mut *mut FcGraph,
) -> FcStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return Err(invalid("null argument"));
        }
        let bytes = CStr::from_ptr(text).to_bytes();
        let file = load_gml(bytes, CoordinateMode::Any).map_err(fail)?;
        *out = Box::into_raw(Box::new(FcGraph(file.graph)));
        Ok(())
    })
}

/// Builds a graph from arrays. `coords` holds `dim` values per node (row
/// major) or is NULL with `dim = 0` for a graph without coordinates.
///
/// # Safety
/// Every array must hold the stated number of elements.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fc_graph_from_arrays(
    n_nodes: usize,
    node_ids: *const i64,
    coords: *const f64,
    dim: usize,
    n_edges: usize,
    sources: *const i64,
    targets: *const i64,
    weights: *const f64,
    out: *mut *mut FcGraph,
) -> FcStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("null output pointer"));
        }
        let ids = slice(node_ids, n_nodes)?;
        let xyz = slice(coords, n_nodes * dim)?;
        let (s, t, w) = (
            slice(sources, n_edges)?,
            slice(targets, n_edges)?,
            slice(weights, n_edges)?,
        );
        let nodes = ids
            .iter()
            .enumerate()
            .map(|(i, &id)| NodeRecord {
                id,
                position: xyz[i * dim..(i + 1) * dim].to_vec(),
            })
            .collect();
        let edges = (0..n_edges).map(|k| (s[k], t[k], w[k])).collect();
        let graph = WeightedGeometricGraph::new(nodes, edges).map_err(fail)?;
        *out = Box::into_raw(Box::new(FcGraph(graph)));
        Ok(())
    })
}

/// Number of nodes, or 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fc_graph_node_count(graph: *const FcGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

/// Number of edges, or 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fc_graph_edge_count(graph: *const FcGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Releases a graph. NULL is ignored.
///
/// # Safety
/// `graph` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_graph_free(graph: *mut FcGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Samples a path pool and solves the cover program.
///
/// # Safety
/// `graph` and `options` must be live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_decompose(
    graph: *const FcGraph,
    options: *const FcOptions,
    out: *mut *mut FcCover,
) -> FcStatus {
    guard(|| {
        let g = deref(graph)?;
        let config = deref(options)?.pipeline()?;
        if out.is_null() {
            return Err(invalid("null output pointer"));
        }
        let cover = decompose(&g.0, &config).map_err(fail)?;
        *out = Box::into_raw(Box::new(FcCover(cover)));
        Ok(())
    })
}

/// Exact cover of a tree with at most `k_overlap` paths per edge.
///
/// # Safety
/// `graph` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_solve_tree(
    graph: *const FcGraph,
    k_overlap: usize,
    objective_kind: u32,
    roughness_kind: u32,
    out: *mut *mut FcCover,
) -> FcStatus {
    guard(|| {
        let g = deref(graph)?;
        if out.is_null() {
            return Err(invalid("null output pointer"));
        }
        let config = TreeCoverConfig {
            k_overlap,
            objective: objective(objective_kind)?,
            roughness_kind: roughness(roughness_kind)?,
        };
        let cover = solve_tree(&g.0, &config).map_err(fail)?;
        *out = Box::into_raw(Box::new(FcCover(cover)));
        Ok(())
    })
}

/// Number of filaments, or 0 for NULL.
///
/// # Safety
/// `cover` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fc_cover_filament_count(cover: *const FcCover) -> usize {
    cover.as_ref().map_or(0, |c| c.0.len())
}

/// Objective value, or NaN for NULL.
///
/// # Safety
/// `cover` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fc_cover_objective(cover: *const FcCover) -> f64 {
    cover.as_ref().map_or(f64::NAN, |c| c.0.objective_value)
}

/// Copies the ordered edge ids of filament `index` into `buf`. `len`
/// receives the required length; returns `BufferTooSmall` if `cap` is
/// insufficient (nothing is copied then).
///
/// # Safety
/// `cover` must be live, `buf` must hold `cap` elements, `len` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_cover_filament_edges(
    cover: *const FcCover,
    index: usize,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> FcStatus {
    guard(|| {
        let c = deref(cover)?;
        let path =
            c.0.selected
                .get(index)
                .ok_or_else(|| invalid("filament index out of range"))?;
        copy_out(path.edges(), buf, cap, len)
    })
}

/// Copies the labels of edge `edge` into `buf`, with the same length
/// protocol as [`fc_cover_filament_edges`].
///
/// # Safety
/// `cover` must be live, `buf` must hold `cap` elements, `len` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_cover_edge_labels(
    cover: *const FcCover,
    edge: usize,
    buf: *mut u32,
    cap: usize,
    len: *mut usize,
) -> FcStatus {
    guard(|| {
        let c = deref(cover)?;
        if edge >= c.0.labels.edge_count() {
            return Err(invalid("edge index out of range"));
        }
        copy_out(c.0.labels.labels(edge), buf, cap, len)
    })
}

unsafe fn copy_out<T: Copy>(
    src: &[T],
    buf: *mut T,
    cap: usize,
    len: *mut usize,
) -> Result<(), FcStatus> {
    if len.is_null() {
        return Err(invalid("null length pointer"));
    }
    *len = src.len();
    if src.len() > cap {
        set_error(format!("buffer holds {cap} elements, {} needed", src.len()));
        return Err(FcStatus::BufferTooSmall);
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(invalid("null buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

/// Serializes the graph annotated with the cover's labels as GML. The
/// returned string must be released with [`fc_string_free`].
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_cover_to_gml(
    graph: *const FcGraph,
    cover: *const FcCover,
    out: *mut *mut c_char,
) -> FcStatus {
    guard(|| {
        let (g, c) = (deref(graph)?, deref(cover)?);
        if out.is_null() {
            return Err(invalid("null output pointer"));
        }
        if c.0.labels.edge_count() != g.0.edge_count() {
            return Err(fail(Error::MismatchedEdgeSets {
                left: g.0.edge_count(),
                right: c.0.labels.edge_count(),
            }));
        }
        let mut buf = Vec::new();
        save_graph(&g.0, Some(&c.0.labels), &mut buf).map_err(fail)?;
        *out = CString::new(buf)
            .map_err(|_| invalid("output contains NUL"))?
            .into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Rand and Jaccard indices between two covers of `graph` restricted to
/// edge pairs within line-graph distance `d` (`FC_DISTANCE_INF` for all
/// pairs).
///
/// # Safety
/// All handles must be live; `ri` and `ji` writable.
#[no_mangle]
pub unsafe extern "C" fn fc_compare(
    graph: *const FcGraph,
    a: *const FcCover,
    b: *const FcCover,
    d: u32,
    ri: *mut f64,
    ji: *mut f64,
) -> FcStatus {
    guard(|| {
        let (g, a, b) = (deref(graph)?, deref(a)?, deref(b)?);
        if ri.is_null() || ji.is_null() {
            return Err(invalid("null output pointer"));
        }
        let d = (d != FC_DISTANCE_INF).then_some(d);
        let (r, j, _) = rand_jaccard(&a.0.labels, &b.0.labels, d, Some(&g.0)).map_err(fail)?;
        *ri = r;
        *ji = j;
        Ok(())
    })
}

/// Releases a cover. NULL is ignored.
///
/// # Safety
/// `cover` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_cover_free(cover: *mut FcCover) {
    if !cover.is_null() {
        drop(Box::from_raw(cover));
    }
}
