//! Reader and writer for the GML graph-exchange format and the filament
//! CSV table.
//!
//! The reader accepts node coordinates either as flat `x`/`y`/`z` keys or
//! nested in a `graphics [ ... ]` block. Edge filament labels are read from
//! a `filament` attribute holding either an integer or a `;`-separated
//! list in a string. The writer always emits flat coordinates, lower-case
//! keys, LF line endings and numbers with nine significant digits.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::graph::{EdgePartition, NodeRecord, WeightedGeometricGraph};

/// Header of the per-filament CSV table.
pub const FILAMENT_CSV_HEADER: &str =
    "filament_id,n_edges,length,mean_weight,roughness_pair,roughness_all,max_angle_deg,median_angle_deg,convolutedness";

/// Whether node coordinates are mandatory when loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateMode {
    Geometric,
    /// Coordinates may be absent; angle-based operations are then unavailable.
    Any,
}

/// A loaded graph together with the filament labels found on its edges.
#[derive(Debug, Clone)]
pub struct GraphFile {
    pub graph: WeightedGeometricGraph,
    pub partition: Option<EdgePartition>,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Key(String),
    Num(f64),
    Str(String),
}

#[derive(Debug, Clone)]
enum Value {
    Num(f64),
    Str(String),
    List(Vec<(String, Value, usize)>),
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut line = 1;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'[' => {
                out.push((Token::Open, line));
                i += 1;
            }
            b']' => {
                out.push((Token::Close, line));
                i += 1;
            }
            b'"' => {
                let start_line = line;
                let start = i + 1;
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' {
                    if bytes[i] == b'\n' {
                        line += 1;
                    }
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err(Error::Parse {
                        line: start_line,
                        message: "unterminated string".into(),
                    });
                }
                out.push((Token::Str(text[start..i].to_string()), start_line));
                i += 1;
            }
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && bytes[i] != b'['
                    && bytes[i] != b']'
                {
                    i += 1;
                }
                let word = &text[start..i];
                let first = word.as_bytes()[0];
                if first.is_ascii_alphabetic() || first == b'_' {
                    out.push((Token::Key(word.to_string()), line));
                } else {
                    let v: f64 = word.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid token `{word}`"),
                    })?;
                    out.push((Token::Num(v), line));
                }
            }
        }
    }
    Ok(out)
}

fn parse_list(
    tokens: &[(Token, usize)],
    pos: &mut usize,
    nested: bool,
) -> Result<Vec<(String, Value, usize)>> {
    let mut items = Vec::new();
    loop {
        let Some((tok, line)) = tokens.get(*pos) else {
            if nested {
                let line = tokens.last().map(|t| t.1).unwrap_or(1);
                return Err(Error::Parse {
                    line,
                    message: "unexpected end of input, missing `]`".into(),
                });
            }
            return Ok(items);
        };
        let line = *line;
        match tok {
            Token::Close if nested => {
                *pos += 1;
                return Ok(items);
            }
            Token::Key(k) => {
                *pos += 1;
                let key = k.to_ascii_lowercase();
                let value = match tokens.get(*pos) {
                    Some((Token::Num(v), _)) => {
                        *pos += 1;
                        Value::Num(*v)
                    }
                    Some((Token::Str(s), _)) => {
                        *pos += 1;
                        Value::Str(s.clone())
                    }
                    Some((Token::Open, _)) => {
                        *pos += 1;
                        Value::List(parse_list(tokens, pos, true)?)
                    }
                    _ => {
                        return Err(Error::Parse {
                            line,
                            message: format!("key `{k}` has no value"),
                        })
                    }
                };
                items.push((key, value, line));
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected a key, found {other:?}"),
                })
            }
        }
    }
}

fn num(items: &[(String, Value, usize)], key: &str) -> Option<f64> {
    items.iter().find_map(|(k, v, _)| match (k == key, v) {
        (true, Value::Num(x)) => Some(*x),
        (true, Value::Str(s)) => s.trim().parse().ok(),
        _ => None,
    })
}

fn coordinates(items: &[(String, Value, usize)]) -> Vec<f64> {
    let read = |items: &[(String, Value, usize)]| -> Vec<f64> {
        match (num(items, "x"), num(items, "y")) {
            (Some(x), Some(y)) => match num(items, "z") {
                Some(z) => vec![x, y, z],
                None => vec![x, y],
            },
            _ => Vec::new(),
        }
    };
    let flat = read(items);
    if !flat.is_empty() {
        return flat;
    }
    items
        .iter()
        .find_map(|(k, v, _)| match (k.as_str(), v) {
            ("graphics", Value::List(inner)) => Some(read(inner)),
            _ => None,
        })
        .unwrap_or_default()
}

fn parse_labels(value: &Value, line: usize) -> Result<Vec<u32>> {
    let bad = |s: &str| Error::Parse {
        line,
        message: format!("invalid filament label list `{s}`"),
    };
    match value {
        Value::Num(x) if *x >= 0.0 && x.fract() == 0.0 => Ok(vec![*x as u32]),
        Value::Str(s) => s
            .split([';', ','])
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u32>().map_err(|_| bad(s)))
            .collect(),
        Value::Num(x) => Err(bad(&x.to_string())),
        Value::List(_) => Err(bad("[...]")),
    }
}

/// Reads a graph (and any filament labels) from GML text.
pub fn load_gml<R: Read>(mut source: R, mode: CoordinateMode) -> Result<GraphFile> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let tokens = tokenize(&text)?;
    let mut pos = 0;
    let top = parse_list(&tokens, &mut pos, false)?;
    let graph_items = top
        .iter()
        .find_map(|(k, v, _)| match (k.as_str(), v) {
            ("graph", Value::List(items)) => Some(items),
            _ => None,
        })
        .ok_or(Error::Parse {
            line: 1,
            message: "no `graph [ ... ]` block".into(),
        })?;

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut labels: Vec<Option<Vec<u32>>> = Vec::new();
    for (key, value, line) in graph_items {
        let Value::List(items) = value else { continue };
        match key.as_str() {
            "node" => {
                let id = num(items, "id").ok_or(Error::Parse {
                    line: *line,
                    message: "node without numeric `id`".into(),
                })?;
                if id.fract() != 0.0 {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("node id {id} is not an integer"),
                    });
                }
                let position = coordinates(items);
                if position.is_empty() && mode == CoordinateMode::Geometric {
                    return Err(Error::MissingCoordinates(format!(
                        "node {id} (line {line}) has no x/y"
                    )));
                }
                nodes.push(NodeRecord {
                    id: id as i64,
                    position,
                });
            }
            "edge" => {
                let k = edges.len();
                let endpoint = |name: &str| {
                    num(items, name).ok_or(Error::Parse {
                        line: *line,
                        message: format!("edge #{k} without `{name}`"),
                    })
                };
                let (s, t) = (endpoint("source")?, endpoint("target")?);
                let w = num(items, "weight").ok_or(Error::Parse {
                    line: *line,
                    message: format!("edge #{k} ({s}-{t}) has no numeric `weight` attribute"),
                })?;
                edges.push((s as i64, t as i64, w));
                let l = items
                    .iter()
                    .find(|(k, _, _)| k == "filament")
                    .map(|(_, v, l)| parse_labels(v, *l))
                    .transpose()?;
                labels.push(l);
            }
            _ => {}
        }
    }

    // Labels follow the file's edge order; re-key them by canonical edge id.
    let keyed: Vec<(i64, i64, Option<Vec<u32>>)> = edges
        .iter()
        .zip(labels)
        .map(|(&(s, t, _), l)| (s.min(t), s.max(t), l))
        .collect();
    let graph = WeightedGeometricGraph::new(nodes, edges)?;
    let labeled = keyed
        .iter()
        .filter(|k| k.2.as_ref().is_some_and(|l| !l.is_empty()))
        .count();
    let partition = if labeled == 0 {
        None
    } else if labeled < keyed.len() {
        return Err(Error::Validation(format!(
            "only {labeled} of {} edges carry filament labels",
            keyed.len()
        )));
    } else {
        let mut per_edge = vec![Vec::new(); graph.edge_count()];
        for (s, t, l) in keyed {
            let a = graph.node_index(s).expect("validated endpoint");
            let b = graph.node_index(t).expect("validated endpoint");
            let e = graph.edge_between(a, b).expect("validated edge");
            per_edge[e] = l.unwrap_or_default();
        }
        Some(EdgePartition::new(per_edge)?)
    };
    Ok(GraphFile { graph, partition })
}

/// Reads a geometric graph, ignoring any filament labels.
pub fn load_graph<R: Read>(source: R) -> Result<WeightedGeometricGraph> {
    Ok(load_gml(source, CoordinateMode::Geometric)?.graph)
}

/// Nine significant digits when they reproduce `x` exactly, otherwise the
/// shortest representation that does. Used for graph files so that saving
/// and loading is the identity.
pub fn format_exact(x: f64) -> String {
    let short = format_float(x);
    if short.parse::<f64>().ok() == Some(x) {
        short
    } else {
        format!("{x:?}")
    }
}

/// Formats a float with nine significant digits, `%g` style.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Deterministic display color for a filament label.
pub fn label_color(label: u32) -> &'static str {
    const PALETTE: [&str; 20] = [
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
        "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
        "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
    ];
    PALETTE[label as usize % PALETTE.len()]
}

/// Writes a graph in GML. When `labels` is given, every edge carries a
/// `filament` list of all its labels and a `color` derived from the lowest.
pub fn save_graph<W: Write>(
    graph: &WeightedGeometricGraph,
    labels: Option<&EdgePartition>,
    sink: &mut W,
) -> Result<()> {
    if let Some(p) = labels {
        if p.edge_count() != graph.edge_count() {
            return Err(Error::Validation(format!(
                "labels cover {} edges, graph has {}",
                p.edge_count(),
                graph.edge_count()
            )));
        }
    }
    let mut out = String::new();
    out.push_str("graph [\n  directed 0\n");
    for n in graph.nodes() {
        out.push_str(&format!("  node [\n    id {}\n", n.id));
        for (key, c) in ["x", "y", "z"].iter().zip(&n.position) {
            out.push_str(&format!("    {key} {}\n", format_exact(*c)));
        }
        out.push_str("  ]\n");
    }
    for (e, edge) in graph.edges().iter().enumerate() {
        out.push_str(&format!(
            "  edge [\n    source {}\n    target {}\n    weight {}\n",
            graph.node(edge.source).id,
            graph.node(edge.target).id,
            format_exact(edge.weight)
        ));
        if let Some(p) = labels {
            let ls = p.labels(e);
            let list: Vec<String> = ls.iter().map(u32::to_string).collect();
            out.push_str(&format!(
                "    filament \"{}\"\n    color \"{}\"\n",
                list.join(";"),
                label_color(ls[0])
            ));
        }
        out.push_str("  ]\n");
    }
    out.push_str("]\n");
    sink.write_all(out.as_bytes())?;
    Ok(())
}

/// Writes a CSV table: the header line followed by one line per row, each
/// field formatted with [`format_float`] unless already a string.
pub fn write_csv<W: Write + ?Sized>(
    sink: &mut W,
    header: &str,
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    sink.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_NODES: &str = "graph [\n node [ id 0 x 0 y 0 ]\n node [ id 1 x 1 y 0 ]\n edge [ source 0 target 1 weight 1.0 ]\n]\n";

    #[test]
    fn reads_unit_segment() {
        let g = load_graph(TWO_NODES.as_bytes()).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert_eq!(g.edge(0).euclidean_length, 1.0);
    }

    #[test]
    fn reads_graphics_block_and_comments() {
        let text = "# comment\nCreator \"x\"\ngraph [\n directed 0\n node [ id 3 label \"a\" graphics [ x 0.5 y 2 z 1 ] ]\n node [ id 4 graphics [ x 1.5 y 2 z 1 ] ]\n edge [ source 4 target 3 weight 2 ]\n]";
        let g = load_graph(text.as_bytes()).unwrap();
        assert_eq!(g.dimension(), Some(3));
        assert_eq!(g.position(0), &[0.5, 2.0, 1.0]);
    }

    #[test]
    fn rejects_negative_weight_and_missing_weight() {
        let neg = TWO_NODES.replace("weight 1.0", "weight -0.5");
        assert!(matches!(
            load_graph(neg.as_bytes()),
            Err(Error::Validation(_))
        ));
        let missing = TWO_NODES.replace("weight 1.0", "");
        let err = load_graph(missing.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("edge #0 (0-1)"), "{err}");
    }

    #[test]
    fn missing_coordinates_depend_on_mode() {
        let text = "graph [ node [ id 0 ] node [ id 1 ] edge [ source 0 target 1 weight 1 ] ]";
        assert!(matches!(
            load_graph(text.as_bytes()),
            Err(Error::MissingCoordinates(_))
        ));
        let g = load_gml(text.as_bytes(), CoordinateMode::Any)
            .unwrap()
            .graph;
        assert!(!g.is_geometric());
    }

    #[test]
    fn malformed_input_is_a_parse_error() {
        for bad in [
            "graph [ node [ id 0 x 0 y 0 ",
            "graph [ node [ id \"a ] ]",
            "nothing 1",
            "graph [ [ ] ]",
        ] {
            assert!(
                matches!(load_graph(bad.as_bytes()), Err(Error::Parse { .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.25), "0.25");
        assert_eq!(format_float(-3.5), "-3.5");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333");
        assert_eq!(format_float(123456789.4), "123456789");
        assert_eq!(format_float(1234567890.0), "1.23456789e+09");
        assert_eq!(format_float(0.000012345), "1.2345e-05");
        assert_eq!(format_float(9.9999999999), "10");
        assert_eq!(format_exact(0.25), "0.25");
        assert_eq!(format_exact(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(format_exact(1e300).parse::<f64>().unwrap(), 1e300);
    }

    proptest::proptest! {
        #[test]
        fn save_then_load_is_the_identity(
            coords in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 2..12),
            weights in proptest::collection::vec(1e-9f64..1e9, 11),
        ) {
            let nodes: Vec<NodeRecord> = coords
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| NodeRecord { id: 3 * i as i64 - 5, position: vec![x, y] })
                .collect();
            let edges: Vec<(i64, i64, f64)> = (1..nodes.len())
                .map(|i| (nodes[i - 1].id, nodes[i].id, weights[i - 1]))
                .collect();
            let g = WeightedGeometricGraph::new(nodes, edges).unwrap();
            let mut buf = Vec::new();
            save_graph(&g, None, &mut buf).unwrap();
            let back = load_graph(buf.as_slice()).unwrap();
            proptest::prop_assert!(back.approx_eq(&g, 0.0));
        }
    }

    #[test]
    fn writes_labels_and_colors() {
        let g = load_graph(TWO_NODES.as_bytes()).unwrap();
        let mut buf = Vec::new();
        save_graph(&g, Some(&EdgePartition::from_assignment(&[0])), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("filament \"0\""));
        assert!(text.contains(&format!("color \"{}\"", label_color(0))));

        let overlap = EdgePartition::new(vec![vec![5, 2]]).unwrap();
        let mut buf = Vec::new();
        save_graph(&g, Some(&overlap), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("filament \"2;5\""));
        assert!(text.contains(&format!("color \"{}\"", label_color(2))));
        let back = load_gml(text.as_bytes(), CoordinateMode::Geometric).unwrap();
        assert_eq!(back.partition, Some(overlap));
    }

    #[test]
    fn partial_labels_are_rejected() {
        let text = "graph [ node [ id 0 x 0 y 0 ] node [ id 1 x 1 y 0 ] node [ id 2 x 2 y 0 ]
            edge [ source 0 target 1 weight 1 filament 0 ] edge [ source 1 target 2 weight 1 ] ]";
        assert!(load_gml(text.as_bytes(), CoordinateMode::Geometric).is_err());
    }
}
