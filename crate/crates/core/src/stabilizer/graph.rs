use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::pauli::{Pauli, PauliString, Phase};
use crate::error::{Error, Result};

/// Undirected simple graph on vertices `1..=n`.
///
/// Text form: a first line `n=<int>` followed by one `<u> <v>` edge per line.
/// Blank lines and lines starting with `#` are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct GraphSpec {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for GraphSpec {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        GraphSpec::new(raw.n, raw.edges)
    }
}

impl From<GraphSpec> for RawGraph {
    fn from(g: GraphSpec) -> Self {
        RawGraph {
            n: g.n,
            edges: g.edges.into_iter().collect(),
        }
    }
}

impl GraphSpec {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("vertex count must be at least 1".into()));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == 0 || u > n || v == 0 || v > n {
                return Err(Error::InvalidGraph(format!("edge {u}-{v} outside 1..={n}")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge {u}-{v}")));
            }
        }
        Ok(Self { n, edges: set })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    /// Path `1-2-…-n`.
    pub fn linear(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|k| (k, k + 1)))
    }

    /// T-shaped cluster: vertex 2 joins 1, 3 and 4, and a chain runs `4-5-…-n`.
    pub fn t_shaped(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGraph(format!("T-shaped graph needs n >= 4, got {n}")));
        }
        let mut edges = vec![(1, 2), (2, 3), (2, 4)];
        edges.extend((4..n).map(|k| (k, k + 1)));
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Generator `k` has `X` at vertex `k` and `Z` on each neighbor.
    pub fn stabilizer_generators(&self) -> Vec<PauliString> {
        (1..=self.n)
            .map(|k| {
                let mut ops = vec![Pauli::I; self.n];
                ops[k - 1] = Pauli::X;
                for nb in self.neighbors(k) {
                    ops[nb - 1] = Pauli::Z;
                }
                PauliString::new(Phase::PLUS_ONE, ops)
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidGraph("missing `n=<int>` header".into()))?;
        let n = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::InvalidGraph(format!("bad header `{header}`")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => return Err(Error::InvalidGraph(format!("bad edge line `{line}`"))),
            }
        }
        GraphSpec::new(n, edges)
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(g: &GraphSpec) -> Vec<String> {
        g.stabilizer_generators().iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn isolated_vertex() {
        assert_eq!(strs(&GraphSpec::empty(1).unwrap()), ["+X"]);
    }

    #[test]
    fn single_edge() {
        let g = GraphSpec::new(2, [(2, 1)]).unwrap();
        assert_eq!(strs(&g), ["+XZ", "+ZX"]);
    }

    #[test]
    fn t_shape_generators() {
        let g = GraphSpec::t_shaped(5).unwrap();
        assert_eq!(strs(&g), ["+XZIII", "+ZXZZI", "+IZXII", "+IZIXZ", "+IIIZX"]);
    }

    #[test]
    fn generators_commute() {
        let g = GraphSpec::t_shaped(8).unwrap();
        let gens = g.stabilizer_generators();
        for a in &gens {
            for b in &gens {
                assert!(a.commutes_with(b));
            }
        }
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(GraphSpec::new(0, []).is_err());
        assert!(GraphSpec::new(3, [(1, 1)]).is_err());
        assert!(GraphSpec::new(3, [(1, 4)]).is_err());
        assert!(GraphSpec::new(3, [(1, 2), (2, 1)]).is_err());
        assert!(GraphSpec::t_shaped(3).is_err());
    }

    #[test]
    fn text_format() {
        let g: GraphSpec = "n=4\n# star\n1 2\n2 3\n\n2 4\n".parse().unwrap();
        assert_eq!(g, GraphSpec::t_shaped(4).unwrap());
        assert_eq!(g.to_text().parse::<GraphSpec>().unwrap(), g);
        assert!("1 2\n".parse::<GraphSpec>().is_err());
        assert!("n=3\n1 2 3\n".parse::<GraphSpec>().is_err());
        assert!("n=3\n1 x\n".parse::<GraphSpec>().is_err());
    }
}
