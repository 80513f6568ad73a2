//! Per-filament descriptive statistics and the filament CSV table.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gml::{format_float, write_csv, FILAMENT_CSV_HEADER};
use crate::graph::WeightedGeometricGraph;
use crate::roughness::{direction, roughness_angle, FilamentPath};
use crate::solver::FilamentCover;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilamentMetrics {
    pub filament_id: u32,
    pub n_edges: usize,
    /// Sum of Euclidean edge lengths.
    pub length: f64,
    /// Length-weighted mean edge weight.
    pub mean_weight: f64,
    pub roughness_pair: f64,
    pub roughness_all: f64,
    pub max_angle_deg: f64,
    /// Median over edges of the angle to the first coordinate axis, folded
    /// into [0°, 90°].
    pub median_angle_deg: f64,
    /// Length divided by the largest side of the axis-aligned bounding box.
    pub convolutedness: f64,
}

impl FilamentMetrics {
    /// CSV fields in header order.
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.filament_id.to_string(),
            self.n_edges.to_string(),
            format_float(self.length),
            format_float(self.mean_weight),
            format_float(self.roughness_pair),
            format_float(self.roughness_all),
            format_float(self.max_angle_deg),
            format_float(self.median_angle_deg),
            format_float(self.convolutedness),
        ]
    }
}

fn axis_angle(d: &[f64]) -> f64 {
    let along = d[0].abs();
    let across = d[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    across.atan2(along).to_degrees()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Statistics of one filament.
pub fn filament_metrics(
    path: &FilamentPath,
    graph: &WeightedGeometricGraph,
    filament_id: u32,
) -> Result<FilamentMetrics> {
    if !graph.is_geometric() {
        return Err(Error::MissingCoordinates(
            "filament metrics need node positions".into(),
        ));
    }
    let length: f64 = path
        .edges()
        .iter()
        .map(|&e| graph.edge(e).euclidean_length)
        .sum();
    let dim = graph.dimension().expect("geometric graph");
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for &n in path.nodes() {
        for (k, &x) in graph.position(n).iter().enumerate() {
            lo[k] = lo[k].min(x);
            hi[k] = hi[k].max(x);
        }
    }
    let side = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    if side <= 0.0 || length <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "filament {filament_id} has a collapsed bounding box"
        )));
    }
    let mean_weight = path
        .edges()
        .iter()
        .map(|&e| graph.weight(e) * graph.edge(e).euclidean_length)
        .sum::<f64>()
        / length;
    let angles = path
        .nodes()
        .windows(2)
        .map(|w| axis_angle(&direction(graph, w[0], w[1])))
        .collect();
    Ok(FilamentMetrics {
        filament_id,
        n_edges: path.len(),
        length,
        mean_weight,
        roughness_pair: path.r_pair(),
        roughness_all: path.r_all(),
        max_angle_deg: roughness_angle(path, graph)?,
        median_angle_deg: median(angles),
        convolutedness: length / side,
    })
}

/// One row per selected filament, in label order.
pub fn compute_metrics(
    cover: &FilamentCover,
    graph: &WeightedGeometricGraph,
) -> Result<Vec<FilamentMetrics>> {
    cover
        .selected
        .iter()
        .enumerate()
        .map(|(i, p)| filament_metrics(p, graph, i as u32))
        .collect()
}

/// Writes the filament table with its fixed header.
pub fn write_metrics_csv<W: Write>(rows: &[FilamentMetrics], sink: &mut W) -> Result<()> {
    let rows: Vec<Vec<String>> = rows.iter().map(FilamentMetrics::csv_row).collect();
    write_csv(sink, FILAMENT_CSV_HEADER, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeRecord;

    fn polyline(points: &[(f64, f64)]) -> (WeightedGeometricGraph, FilamentPath) {
        let nodes = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| NodeRecord {
                id: i as i64,
                position: vec![x, y],
            })
            .collect();
        let edges = (1..points.len())
            .map(|i| (i as i64 - 1, i as i64, i as f64))
            .collect();
        let g = WeightedGeometricGraph::new(nodes, edges).unwrap();
        let p = FilamentPath::from_edges(&g, (0..points.len() - 1).collect()).unwrap();
        (g, p)
    }

    #[test]
    fn straight_filament() {
        let (g, p) = polyline(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let m = filament_metrics(&p, &g, 0).unwrap();
        assert_eq!(
            (
                m.length,
                m.convolutedness,
                m.median_angle_deg,
                m.max_angle_deg
            ),
            (2.0, 1.0, 0.0, 0.0)
        );
        assert_eq!(m.mean_weight, 1.5);
    }

    #[test]
    fn l_shape() {
        let (g, p) = polyline(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]);
        let m = filament_metrics(&p, &g, 0).unwrap();
        assert_eq!(m.length, 2.0);
        assert_eq!(m.convolutedness, 2.0);
        assert!((m.max_angle_deg - 90.0).abs() < 1e-12);
        assert!((m.median_angle_deg - 45.0).abs() < 1e-12);
    }

    #[test]
    fn vertical_edge_and_folding() {
        let (g, p) = polyline(&[(0.0, 1.0), (0.0, 0.0)]);
        assert_eq!(filament_metrics(&p, &g, 0).unwrap().median_angle_deg, 90.0);
        let (g, p) = polyline(&[(1.0, 1.0), (0.0, 0.0)]);
        assert!((filament_metrics(&p, &g, 0).unwrap().median_angle_deg - 45.0).abs() < 1e-12);
    }

    #[test]
    fn translation_invariance() {
        let pts = [(0.0, 0.0), (1.0, 0.3), (1.5, 1.2), (3.0, 1.0)];
        let (g, p) = polyline(&pts);
        let shifted: Vec<_> = pts.iter().map(|&(x, y)| (x + 12.5, y - 3.0)).collect();
        let (h, q) = polyline(&shifted);
        let (a, b) = (
            filament_metrics(&p, &g, 0).unwrap(),
            filament_metrics(&q, &h, 0).unwrap(),
        );
        assert!((a.convolutedness - b.convolutedness).abs() < 1e-12);
        assert!(a.convolutedness >= 1.0);
    }

    #[test]
    fn csv_header_is_exact() {
        let (g, p) = polyline(&[(0.0, 0.0), (1.0, 0.0)]);
        let m = filament_metrics(&p, &g, 0).unwrap();
        let mut buf = Vec::new();
        write_metrics_csv(&[m], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "filament_id,n_edges,length,mean_weight,roughness_pair,roughness_all,max_angle_deg,median_angle_deg,convolutedness\n0,1,1,1,1,1,0,0,1\n"
        );
    }
}
