//! Graph file formats: a JSON object and a DIMACS-like text form.

use serde::{Deserialize, Serialize};

use super::WeightedGraph;
use crate::error::{Error, Result};

/// On-disk JSON shape of a [`WeightedGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub weights: Vec<f64>,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphFile> for WeightedGraph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        if f.weights.len() != f.n {
            return Err(Error::input(format!(
                "graph declares n = {} but lists {} weights",
                f.n,
                f.weights.len()
            )));
        }
        WeightedGraph::new(f.weights, f.edges.into_iter().map(|[a, b]| (a, b)))
    }
}

impl From<WeightedGraph> for GraphFile {
    fn from(g: WeightedGraph) -> Self {
        GraphFile {
            n: g.n(),
            edges: g.edges().iter().map(|&(a, b)| [a, b]).collect(),
            weights: g.weights,
        }
    }
}

/// Parses either format. Input whose first non-blank character is `{` is
/// read as JSON, anything else as DIMACS-like text:
///
/// ```text
/// c comment
/// p mwis 3 2
/// n 2 5.0
/// e 1 2
/// e 2 3
/// ```
///
/// Text indices are 1-based; vertices without an `n` line weigh 1.
pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    if text.trim_start().starts_with('{') {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        return WeightedGraph::try_from(file);
    }
    parse_dimacs(text)
}

fn parse_dimacs(text: &str) -> Result<WeightedGraph> {
    let mut n: Option<usize> = None;
    let mut weights = Vec::new();
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let perr = |message: String| Error::Parse { line, message };
        let mut tok = raw.split_whitespace();
        let Some(kind) = tok.next() else { continue };
        let rest: Vec<&str> = tok.collect();
        let index = |s: &str, n: usize| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| perr(format!("bad vertex index `{s}`")))?;
            if v == 0 || v > n {
                return Err(perr(format!("vertex {v} outside 1..={n}")));
            }
            Ok(v - 1)
        };
        match kind {
            "c" => {}
            "p" => {
                if n.is_some() {
                    return Err(perr("second problem line".into()));
                }
                // `p <word> <n> <m>` or `p <n> <m>`
                let nums: Vec<&str> = match rest.len() {
                    3 => rest[1..].to_vec(),
                    2 => rest.clone(),
                    _ => return Err(perr("expected `p [format] <n> <m>`".into())),
                };
                let count: usize =
                    nums[0].parse().map_err(|_| perr(format!("bad vertex count `{}`", nums[0])))?;
                nums[1]
                    .parse::<usize>()
                    .map_err(|_| perr(format!("bad edge count `{}`", nums[1])))?;
                n = Some(count);
                weights = vec![1.0; count];
            }
            "n" | "e" => {
                let Some(count) = n else {
                    return Err(perr(format!("`{kind}` line before the problem line")));
                };
                if rest.len() != 2 {
                    return Err(perr(format!("`{kind}` line needs two fields")));
                }
                let a = index(rest[0], count)?;
                if kind == "n" {
                    let w: f64 =
                        rest[1].parse().map_err(|_| perr(format!("bad weight `{}`", rest[1])))?;
                    if !w.is_finite() {
                        return Err(perr("weight is not finite".into()));
                    }
                    weights[a] = w;
                } else {
                    let b = index(rest[1], count)?;
                    if a == b {
                        return Err(perr(format!("self-loop on vertex {}", a + 1)));
                    }
                    edges.push((a, b));
                }
            }
            other => return Err(perr(format!("unknown line type `{other}`"))),
        }
    }
    if n.is_none() {
        return Err(Error::Parse { line: text.lines().count().max(1), message: "missing problem line".into() });
    }
    WeightedGraph::new(weights, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let g = WeightedGraph::new(vec![1.0, 5.0, 1.0], [(0, 1), (1, 2)]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"n":3,"weights":[1.0,5.0,1.0],"edges":[[0,1],[1,2]]}"#);
        assert_eq!(parse_graph(&text).unwrap(), g);
    }

    #[test]
    fn dimacs_text() {
        let g = parse_graph("c path\np mwis 3 2\nn 2 5\ne 1 2\n\ne 2 3\n").unwrap();
        assert_eq!(g.weights(), &[1.0, 5.0, 1.0]);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(parse_graph("p 2 0\n").unwrap().n(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line_of = |text: &str| match parse_graph(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(line_of("p mwis 3 1\ne 1 4\n"), 2);
        assert_eq!(line_of("c x\nc y\nn 1 2\n"), 3);
        assert_eq!(line_of("p mwis 2 0\nn 1 abc\n"), 2);
        assert_eq!(line_of("p mwis 2 0\nq\n"), 2);
        assert_eq!(line_of("{\"n\": 2,\n \"weights\": [1.0,\n oops]}"), 3);
    }

    #[test]
    fn json_count_mismatch_is_input_error() {
        let r = parse_graph(r#"{"n": 3, "weights": [1.0], "edges": []}"#);
        assert!(matches!(r, Err(Error::Input(_))));
    }
}
