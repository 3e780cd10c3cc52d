//! Plain-text edge lists: one `i j` pair per line, `#` starts a comment line.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{Graph, GraphError};

fn data_lines<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<(usize, Vec<String>), GraphError>> {
    reader.lines().enumerate().filter_map(|(idx, line)| {
        let line_no = idx + 1;
        match line {
            Err(e) => Some(Err(GraphError::Io(e.to_string()))),
            Ok(text) => {
                let trimmed = text.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    None
                } else {
                    Some(Ok((
                        line_no,
                        trimmed.split_whitespace().map(str::to_owned).collect(),
                    )))
                }
            }
        }
    })
}

fn two_tokens(line: usize, tokens: &[String]) -> Result<(&str, &str), GraphError> {
    match tokens {
        [a, b] => Ok((a, b)),
        [a] => Err(GraphError::Parse {
            line,
            token: a.clone(),
        }),
        _ => Err(GraphError::Parse {
            line,
            token: tokens[2..].join(" "),
        }),
    }
}

/// Reads a 0-based integer edge list. Without an explicit `n`, the node
/// count is `max id + 1`.
pub fn read_edge_list<R: BufRead>(reader: R, n: Option<usize>) -> Result<Graph, GraphError> {
    let mut edges = Vec::new();
    for item in data_lines(reader) {
        let (line, tokens) = item?;
        let (a, b) = two_tokens(line, &tokens)?;
        let parse = |t: &str| {
            t.parse::<usize>().map_err(|_| GraphError::Parse {
                line,
                token: t.to_owned(),
            })
        };
        let (i, j) = (parse(a)?, parse(b)?);
        if i == j {
            return Err(GraphError::SelfLoop { line, node: i });
        }
        if let Some(n) = n {
            if let Some(&bad) = [i, j].iter().find(|&&v| v >= n) {
                return Err(GraphError::OutOfRange { line, node: bad, n });
            }
        }
        edges.push((i, j));
    }
    let n = match n {
        Some(n) => n,
        None => edges.iter().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(0),
    };
    if n == 0 {
        return Err(GraphError::Empty);
    }
    Ok(Graph::from_edges(n, edges))
}

/// A graph read from arbitrary node labels, with `labels[id]` giving the
/// original label of dense id `id`.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Vec<String>,
}

/// Reads an edge list with arbitrary string labels, assigning dense ids in
/// order of first appearance.
pub fn read_labeled_edge_list<R: BufRead>(reader: R) -> Result<LabeledGraph, GraphError> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    for item in data_lines(reader) {
        let (line, tokens) = item?;
        let (a, b) = two_tokens(line, &tokens)?;
        if a == b {
            return Err(GraphError::SelfLoop {
                line,
                node: ids.get(a).copied().unwrap_or(labels.len()),
            });
        }
        let mut id_of = |label: &str| {
            *ids.entry(label.to_owned()).or_insert_with(|| {
                labels.push(label.to_owned());
                labels.len() - 1
            })
        };
        let (i, j) = (id_of(a), id_of(b));
        edges.push((i, j));
    }
    if labels.is_empty() {
        return Err(GraphError::Empty);
    }
    Ok(LabeledGraph {
        graph: Graph::from_edges(labels.len(), edges),
        labels,
    })
}

/// Writes the canonical form: sorted unique pairs with `i < j`.
pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W) -> std::io::Result<()> {
    for (i, j) in graph.edges() {
        writeln!(out, "{i} {j}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::pair_count;
    use proptest::prelude::*;

    fn read(text: &str, n: Option<usize>) -> Result<Graph, GraphError> {
        read_edge_list(text.as_bytes(), n)
    }

    #[test]
    fn reads_path() {
        let g = read("0 1\n1 2\n", None).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn reversed_pair_collapses() {
        assert_eq!(read("0 1\n1 0\n", None).unwrap().edge_count(), 1);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let g = read("# header\n\n0 2\n  # indented\n", Some(4)).unwrap();
        assert_eq!((g.n(), g.edge_count()), (4, 1));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            read("0 0\n", None),
            Err(GraphError::SelfLoop { line: 1, node: 0 })
        );
        assert_eq!(
            read("0 1\n1 x\n", None),
            Err(GraphError::Parse {
                line: 2,
                token: "x".into()
            })
        );
        assert_eq!(
            read("0 1\n1 5\n", Some(3)),
            Err(GraphError::OutOfRange {
                line: 2,
                node: 5,
                n: 3
            })
        );
        assert!(matches!(read("0 1 2\n", None), Err(GraphError::Parse { .. })));
        assert_eq!(read("", None), Err(GraphError::Empty));
    }

    #[test]
    fn labels_are_remapped_densely() {
        let lg = read_labeled_edge_list("alice bob\nbob carol\ncarol alice\n".as_bytes()).unwrap();
        assert_eq!(lg.labels, vec!["alice", "bob", "carol"]);
        assert_eq!(lg.graph.summarize().triangles, 1);
    }

    proptest! {
        #[test]
        fn canonical_round_trip(n in 2usize..20, seed in proptest::collection::vec(any::<bool>(), 190)) {
            let g = Graph::from_pair_flags(n, seed.into_iter().take(pair_count(n)));
            let mut buf = Vec::new();
            write_edge_list(&g, &mut buf).unwrap();
            let back = read_edge_list(buf.as_slice(), Some(n)).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
