//! Edge-list text format.
//!
//! One `u v` pair per line (whitespace separated, decimal ids), each
//! undirected edge listed once. `#` starts a comment. A `# nodes: N` comment
//! declares the node count, which is how graphs with isolated ids (the single
//! node graph) survive a round trip; without it `N` is one more than the
//! largest id.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Graph, NodeId};
use crate::error::GraphError;

pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut declared: Option<usize> = None;
    let mut edges: Vec<(NodeId, NodeId, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b, Some(c)),
            None => (raw, None),
        };
        if let Some(c) = comment {
            if let Some(v) = c.trim().strip_prefix("nodes:") {
                let n = v.trim().parse().map_err(|_| GraphError::Parse {
                    line,
                    message: format!("bad node count {:?}", v.trim()),
                })?;
                declared = Some(n);
            }
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            [u, v] => {
                let parse = |s: &str| {
                    s.parse::<NodeId>().map_err(|_| GraphError::Parse {
                        line,
                        message: format!("invalid node id {s:?}"),
                    })
                };
                let (u, v) = (parse(u)?, parse(v)?);
                if u == v {
                    return Err(GraphError::Parse {
                        line,
                        message: format!("self-loop on node {u}"),
                    });
                }
                edges.push((u, v, line));
            }
            _ => {
                return Err(GraphError::Parse {
                    line,
                    message: format!("expected two node ids, found {}", fields.len()),
                })
            }
        }
    }
    let implied = edges
        .iter()
        .map(|&(u, v, _)| u.max(v) + 1)
        .max()
        .unwrap_or(0);
    let n = match declared {
        Some(d) if d < implied => {
            return Err(GraphError::Parse {
                line: 0,
                message: format!("declared {d} nodes but ids reach {}", implied - 1),
            })
        }
        Some(d) => d,
        None => implied,
    };
    let mut seen = std::collections::HashSet::new();
    for &(u, v, line) in &edges {
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(GraphError::Parse {
                line,
                message: format!("duplicate edge {u}-{v}"),
            });
        }
    }
    Graph::from_edges(n, edges.into_iter().map(|(u, v, _)| (u, v)))
}

pub fn to_edge_list(g: &Graph) -> String {
    let mut out = format!("# nodes: {}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn load(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| GraphError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_edge_list(&text)
}

pub fn save(g: &Graph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let path = path.as_ref();
    fs::write(path, to_edge_list(g)).map_err(|e| GraphError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphFamily};

    #[test]
    fn parses_path() {
        let g = parse_edge_list("0 1\n1 2").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.diameter(), 2);
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse_edge_list("# a triangle\n\n0 1 # first\n1 2\n2 0\n").unwrap();
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn self_loop_reports_line() {
        let err = parse_edge_list("0 1\n0 0\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("self-loop"));
    }

    #[test]
    fn bad_lines() {
        assert!(matches!(
            parse_edge_list("0 1\n1 x\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 2\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1\n1 0\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert_eq!(parse_edge_list(""), Err(GraphError::Empty));
    }

    #[test]
    fn disconnected_file_rejected() {
        let err = parse_edge_list("0 1\n2 3\n").unwrap_err();
        assert_eq!(
            err,
            GraphError::Disconnected {
                component: vec![2, 3]
            }
        );
    }

    #[test]
    fn single_node_round_trip() {
        let g = generate(&GraphFamily::Path, 1, 0).unwrap();
        assert_eq!(parse_edge_list(&to_edge_list(&g)).unwrap(), g);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        let g = generate(&GraphFamily::BA, 60, 4).unwrap();
        save(&g, &path).unwrap();
        assert_eq!(load(&path).unwrap(), g);
    }
}
