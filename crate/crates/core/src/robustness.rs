//! Perturbation scans: random edge deletion and Gaussian weight noise,
//! scored against a reference decomposition.

use std::io::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gml::{format_float, write_csv};
use crate::graph::{EdgePartition, WeightedGeometricGraph};
use crate::pipeline::{decompose, PipelineConfig};
use crate::similarity::rand_jaccard;

/// Relative floor applied to perturbed weights.
pub const WEIGHT_FLOOR: f64 = 1e-6;
/// Header of the scan table.
pub const SCAN_CSV_HEADER: &str = "level,trial,ji1,ri1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    #[value(name = "delete")]
    DeleteEdges,
    #[value(name = "noise")]
    WeightNoise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPlan {
    pub kind: PerturbationKind,
    /// Numbers of deleted edges, or noise factors.
    pub levels: Vec<f64>,
    pub trials_per_level: usize,
    pub rng_seed: u64,
    /// Draws noise with zero variance, so every trial sees the original
    /// weights.
    pub zero_variance: bool,
}

impl PerturbationPlan {
    /// Deletion scan with one trial per edge by default.
    pub fn deletion(levels: Vec<usize>, graph: &WeightedGeometricGraph, rng_seed: u64) -> Self {
        Self {
            kind: PerturbationKind::DeleteEdges,
            levels: levels.into_iter().map(|k| k as f64).collect(),
            trials_per_level: graph.edge_count(),
            rng_seed,
            zero_variance: false,
        }
    }

    /// Noise scan with 100 trials per factor by default.
    pub fn noise(factors: Vec<f64>, rng_seed: u64) -> Self {
        Self {
            kind: PerturbationKind::WeightNoise,
            levels: factors,
            trials_per_level: 100,
            rng_seed,
            zero_variance: false,
        }
    }

    fn validate(&self, graph: &WeightedGeometricGraph) -> Result<()> {
        if self.trials_per_level == 0 {
            return Err(Error::Config("trials per level must be at least 1".into()));
        }
        for &l in &self.levels {
            let ok = match self.kind {
                PerturbationKind::DeleteEdges => {
                    l >= 0.0 && l.fract() == 0.0 && (l as usize) < graph.edge_count()
                }
                PerturbationKind::WeightNoise => l.is_finite() && l >= 0.0,
            };
            if !ok {
                return Err(Error::Config(format!("invalid perturbation level {l}")));
            }
        }
        Ok(())
    }
}

/// One trial of a scan. `level` is `None` for the unperturbed baseline.
/// Failed trials keep the error message and score `NaN`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub level: Option<f64>,
    pub trial: usize,
    pub ji1: f64,
    pub ri1: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub kind: PerturbationKind,
    pub rows: Vec<ScanRow>,
}

/// Mean scores of one level over its successful trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: Option<f64>,
    pub mean_ji1: f64,
    pub mean_ri1: f64,
    pub failures: usize,
}

impl ScanTable {
    pub fn summary(&self) -> Vec<LevelSummary> {
        let mut out: Vec<LevelSummary> = Vec::new();
        let mut i = 0;
        while i < self.rows.len() {
            let level = self.rows[i].level;
            let group: Vec<&ScanRow> = self.rows[i..]
                .iter()
                .take_while(|r| r.level == level)
                .collect();
            i += group.len();
            let ok: Vec<&&ScanRow> = group.iter().filter(|r| r.error.is_none()).collect();
            let n = ok.len() as f64;
            out.push(LevelSummary {
                level,
                mean_ji1: ok.iter().map(|r| r.ji1).sum::<f64>() / n,
                mean_ri1: ok.iter().map(|r| r.ri1).sum::<f64>() / n,
                failures: group.len() - ok.len(),
            });
        }
        out
    }

    /// Least-squares slope of JI¹ against the level over all successful
    /// perturbed trials; `None` with fewer than two distinct levels.
    pub fn ji1_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.error.is_none())
            .filter_map(|r| r.level.map(|l| (l, r.ji1)))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if pts.len() < 2 || sxx == 0.0 {
            return None;
        }
        Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
    }

    pub fn write_csv<W: Write>(&self, sink: &mut W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.level.map_or_else(|| "baseline".to_string(), format_float),
                    r.trial.to_string(),
                    format_float(r.ji1),
                    format_float(r.ri1),
                ]
            })
            .collect();
        write_csv(sink, SCAN_CSV_HEADER, &rows)
    }
}

/// Independent generator for `(level, trial)`; level `u64::MAX` marks the
/// baseline.
fn trial_rng(seed: u64, level: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level.wrapping_mul(1 << 32).wrapping_add(trial));
    rng
}

fn score(
    cover: &EdgePartition,
    reference: &EdgePartition,
    graph: &WeightedGeometricGraph,
) -> Result<(f64, f64)> {
    let (ri1, ji1, _) = rand_jaccard(cover, reference, Some(1), Some(graph))?;
    Ok((ji1, ri1))
}

fn row(level: Option<f64>, trial: usize, result: Result<(f64, f64)>) -> ScanRow {
    match result {
        Ok((ji1, ri1)) => ScanRow {
            level,
            trial,
            ji1,
            ri1,
            error: None,
        },
        Err(e) => ScanRow {
            level,
            trial,
            ji1: f64::NAN,
            ri1: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

/// Runs `job` over every `(level index, trial)` pair, in parallel on
/// `threads` workers when more than one is requested. Output order is
/// independent of scheduling.
fn run_trials<F>(levels: usize, trials: usize, threads: usize, job: F) -> Result<Vec<ScanRow>>
where
    F: Fn(usize, usize) -> ScanRow + Sync,
{
    let jobs: Vec<(usize, usize)> = (0..levels)
        .flat_map(|l| (0..trials).map(move |t| (l, t)))
        .collect();
    if threads <= 1 {
        return Ok(jobs.into_iter().map(|(l, t)| job(l, t)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(|&(l, t)| job(l, t)).collect()))
}

fn check_reference(graph: &WeightedGeometricGraph, reference: &EdgePartition) -> Result<()> {
    if reference.edge_count() != graph.edge_count() {
        return Err(Error::MismatchedEdgeSets {
            left: graph.edge_count(),
            right: reference.edge_count(),
        });
    }
    Ok(())
}

/// For each level `k` and trial, deletes `k` random edges, decomposes the
/// rest and scores against `reference`. Deleted edges receive fresh
/// singleton labels.
pub fn run_deletion_scan(
    graph: &WeightedGeometricGraph,
    reference: &EdgePartition,
    plan: &PerturbationPlan,
    config: &PipelineConfig,
    threads: usize,
) -> Result<ScanTable> {
    check_reference(graph, reference)?;
    plan.validate(graph)?;
    if plan.kind != PerturbationKind::DeleteEdges {
        return Err(Error::Config("plan is not a deletion scan".into()));
    }
    let rows = run_trials(plan.levels.len(), plan.trials_per_level, threads, |l, t| {
        let k = plan.levels[l] as usize;
        let mut rng = trial_rng(plan.rng_seed, l as u64, t as u64);
        let deleted = sample(&mut rng, graph.edge_count(), k).into_vec();
        let result = (|| {
            let (sub, kept) = graph.without_edges(&deleted);
            let cover = decompose(&sub, config)?;
            let mut labels: Vec<Vec<u32>> = vec![Vec::new(); graph.edge_count()];
            for (i, &e) in kept.iter().enumerate() {
                labels[e] = cover.labels.labels(i).to_vec();
            }
            let mut dummy = cover.labels.max_label().map_or(0, |m| m + 1);
            for e in &mut labels {
                if e.is_empty() {
                    e.push(dummy);
                    dummy += 1;
                }
            }
            score(&EdgePartition::new(labels)?, reference, graph)
        })();
        row(Some(plan.levels[l]), t, result)
    })?;
    Ok(ScanTable {
        kind: plan.kind,
        rows,
    })
}

/// Weight noise scan: each weight becomes `w + N(0, σ²)` with
/// `σ = (1 + f/100)·w`, floored at `10⁻⁶·w`. A baseline row with the
/// original weights comes first.
pub fn run_noise_scan(
    graph: &WeightedGeometricGraph,
    reference: &EdgePartition,
    plan: &PerturbationPlan,
    config: &PipelineConfig,
    threads: usize,
) -> Result<ScanTable> {
    check_reference(graph, reference)?;
    plan.validate(graph)?;
    if plan.kind != PerturbationKind::WeightNoise {
        return Err(Error::Config("plan is not a noise scan".into()));
    }
    let baseline = row(
        None,
        0,
        decompose(graph, config).and_then(|c| score(&c.labels, reference, graph)),
    );
    let rows = run_trials(plan.levels.len(), plan.trials_per_level, threads, |l, t| {
        let f = plan.levels[l];
        let mut rng = trial_rng(plan.rng_seed, l as u64, t as u64);
        let result = (|| {
            let weights: Vec<f64> = graph
                .weights()
                .iter()
                .map(|&w| {
                    if plan.zero_variance {
                        return w;
                    }
                    let noise =
                        Normal::new(0.0, (1.0 + f / 100.0) * w).expect("finite positive deviation");
                    (w + noise.sample(&mut rng)).max(WEIGHT_FLOOR * w)
                })
                .collect();
            let noisy = graph.with_weights(&weights)?;
            let cover = decompose(&noisy, config)?;
            score(&cover.labels, reference, graph)
        })();
        row(Some(f), t, result)
    })?;
    let mut all = vec![baseline];
    all.extend(rows);
    Ok(ScanTable {
        kind: plan.kind,
        rows: all,
    })
}
