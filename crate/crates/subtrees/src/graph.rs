//! Immutable multigraph representation, standard generators and the text format.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Dense vertex id.
pub type Vertex = u32;

/// Sentinel for "no vertex".
pub const NO_VERTEX: Vertex = u32::MAX;

/// Specification of a standard generated graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// (Z/NZ)^2 with nearest-neighbour edges. N=1 is a single vertex (loops
    /// dropped), N=2 carries parallel edges with multiplicity 2.
    Torus(u32),
    /// W x H rectangular grid.
    Grid(u32, u32),
    /// Complete graph on N vertices.
    Complete(u32),
    /// Path with N vertices.
    Line(u32),
    /// A line of m1 vertices attached to a 2 x (m2/2) ladder (m2 even).
    LadderLine(u32, u32),
    /// Complete d-ary tree of height h.
    Dary(u32, u32),
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Torus(n) => write!(f, "torus:{n}"),
            GeneratorSpec::Grid(w, h) => write!(f, "grid:{w}x{h}"),
            GeneratorSpec::Complete(n) => write!(f, "complete:{n}"),
            GeneratorSpec::Line(n) => write!(f, "line:{n}"),
            GeneratorSpec::LadderLine(a, b) => write!(f, "ladderline:{a},{b}"),
            GeneratorSpec::Dary(d, h) => write!(f, "dary:{d},{h}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(s.to_string());
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
        let spec = match kind {
            "torus" => GeneratorSpec::Torus(parse(args)?),
            "grid" => {
                let (w, h) = args.split_once('x').ok_or_else(bad)?;
                GeneratorSpec::Grid(parse(w)?, parse(h)?)
            }
            "complete" => GeneratorSpec::Complete(parse(args)?),
            "line" => GeneratorSpec::Line(parse(args)?),
            "ladderline" => {
                let (a, b) = args.split_once(',').ok_or_else(bad)?;
                GeneratorSpec::LadderLine(parse(a)?, parse(b)?)
            }
            "dary" => {
                let (d, h) = args.split_once(',').ok_or_else(bad)?;
                GeneratorSpec::Dary(parse(d)?, parse(h)?)
            }
            _ => return Err(bad()),
        };
        spec.check()?;
        Ok(spec)
    }
}

impl GeneratorSpec {
    fn check(&self) -> Result<()> {
        let ok = match *self {
            GeneratorSpec::Torus(n) => n >= 1,
            GeneratorSpec::Grid(w, h) => w >= 1 && h >= 1,
            GeneratorSpec::Complete(n) => n >= 1,
            GeneratorSpec::Line(n) => n >= 1,
            GeneratorSpec::LadderLine(m1, m2) => m1 >= 1 && m2 >= 2 && m2 % 2 == 0,
            GeneratorSpec::Dary(d, _) => d >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(self.to_string()))
        }
    }
}

/// Immutable multigraph with dense vertex ids.
///
/// The adjacency is stored in CSR form with one slot per edge copy, so
/// `degree(v)` counts multiplicities and drawing a uniform slot draws a
/// uniform incident edge copy. Tori of side at least 3 also answer neighbour
/// queries arithmetically so that hot loops avoid the adjacency arrays.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    offsets: Vec<u32>,
    neighbors: Vec<Vertex>,
    /// One `(u, v)` entry with `u <= v` per edge copy.
    edges: Vec<(Vertex, Vertex)>,
    simple: bool,
    spec: Option<GeneratorSpec>,
}

impl Graph {
    /// Builds a graph from a list of `(u, v, multiplicity)` entries.
    pub fn from_edges(n: usize, edge_mults: &[(Vertex, Vertex, u32)]) -> Result<Graph> {
        let mut edges = Vec::new();
        for &(u, v, m) in edge_mults {
            if u as usize >= n || v as usize >= n || u == v || m == 0 {
                return Err(Error::Parse(format!("bad edge ({u}, {v}) x{m}")));
            }
            let (a, b) = if u <= v { (u, v) } else { (v, u) };
            for _ in 0..m {
                edges.push((a, b));
            }
        }
        edges.sort_unstable();
        let mut deg = vec![0u32; n];
        for &(u, v) in &edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0u32;
        offsets.push(0);
        for d in &deg {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor: Vec<u32> = offsets[..n].to_vec();
        let mut neighbors = vec![0 as Vertex; acc as usize];
        for &(u, v) in &edges {
            neighbors[cursor[u as usize] as usize] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize] as usize] = u;
            cursor[v as usize] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v] as usize..offsets[v + 1] as usize].sort_unstable();
        }
        let simple = edges.windows(2).all(|w| w[0] != w[1]);
        Ok(Graph {
            n,
            offsets,
            neighbors,
            edges,
            simple,
            spec: None,
        })
    }

    /// Generates a standard graph. Identical specs yield identical adjacency.
    pub fn generate(spec: GeneratorSpec) -> Result<Graph> {
        spec.check()?;
        let mut g = match spec {
            GeneratorSpec::Torus(n) => Self::torus(n)?,
            GeneratorSpec::Grid(w, h) => Self::grid(w, h)?,
            GeneratorSpec::Complete(n) => {
                let mut e = Vec::new();
                for u in 0..n {
                    for v in (u + 1)..n {
                        e.push((u, v, 1));
                    }
                }
                Self::from_edges(n as usize, &e)?
            }
            GeneratorSpec::Line(n) => {
                let e: Vec<_> = (1..n).map(|v| (v - 1, v, 1)).collect();
                Self::from_edges(n as usize, &e)?
            }
            GeneratorSpec::LadderLine(m1, m2) => {
                // Line vertices 0..m1; ladder rails occupy m1..m1+m2 in
                // column-major pairs; the line end attaches to the first rail
                // vertex.
                let k = m2 / 2;
                let mut e: Vec<_> = (1..m1).map(|v| (v - 1, v, 1)).collect();
                let rail = |col: u32, row: u32| m1 + 2 * col + row;
                for col in 0..k {
                    e.push((rail(col, 0), rail(col, 1), 1));
                    if col + 1 < k {
                        e.push((rail(col, 0), rail(col + 1, 0), 1));
                        e.push((rail(col, 1), rail(col + 1, 1), 1));
                    }
                }
                e.push((m1 - 1, rail(0, 0), 1));
                Self::from_edges((m1 + m2) as usize, &e)?
            }
            GeneratorSpec::Dary(d, h) => {
                let mut e = Vec::new();
                let mut total = 1u64;
                let mut level = 1u64;
                for _ in 0..h {
                    level *= d as u64;
                    total += level;
                }
                for v in 1..total {
                    e.push((((v - 1) / d as u64) as u32, v as u32, 1));
                }
                Self::from_edges(total as usize, &e)?
            }
        };
        g.spec = Some(spec);
        Ok(g)
    }

    fn torus(n: u32) -> Result<Graph> {
        if n == 1 {
            // Single vertex; the four would-be edges are loops and are dropped.
            return Self::from_edges(1, &[]);
        }
        let mut e = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = r * n + c;
                let right = r * n + (c + 1) % n;
                let down = ((r + 1) % n) * n + c;
                e.push((v, right, 1));
                e.push((v, down, 1));
            }
        }
        Self::from_edges((n * n) as usize, &e)
    }

    fn grid(w: u32, h: u32) -> Result<Graph> {
        let mut e = Vec::new();
        for r in 0..h {
            for c in 0..w {
                let v = r * w + c;
                if c + 1 < w {
                    e.push((v, v + 1, 1));
                }
                if r + 1 < h {
                    e.push((v, v + w, 1));
                }
            }
        }
        Self::from_edges((w * h) as usize, &e)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    /// Number of edge copies.
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// |E| counted with both orientations.
    pub fn directed_edge_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Degree counted with multiplicity.
    #[inline]
    pub fn degree(&self, v: Vertex) -> u32 {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    #[inline]
    pub fn neighbors_of(&self, v: Vertex) -> &[Vertex] {
        &self.neighbors[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    /// Number of directed-edge slots owned by vertices below `v`.
    #[inline]
    pub fn neighbors_upto(&self, v: usize) -> usize {
        self.offsets[v] as usize
    }

    /// The `i`-th incident edge slot of `v`. Tori of side >= 3 answer without
    /// touching the adjacency arrays.
    #[inline]
    pub fn nth_neighbor(&self, v: Vertex, i: u32) -> Vertex {
        if let Some(GeneratorSpec::Torus(n)) = self.spec {
            if n >= 3 {
                let r = v / n;
                let c = v % n;
                return match i {
                    0 => r * n + if c == 0 { n - 1 } else { c - 1 },
                    1 => r * n + if c + 1 == n { 0 } else { c + 1 },
                    2 => (if r == 0 { n - 1 } else { r - 1 }) * n + c,
                    _ => (if r + 1 == n { 0 } else { r + 1 }) * n + c,
                };
            }
        }
        self.neighbors[(self.offsets[v as usize] + i) as usize]
    }

    /// One `(u, v)` entry with `u <= v` per edge copy, sorted.
    pub fn edge_list(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.neighbors_of(u).binary_search(&v).is_ok()
    }

    /// True when no pair of vertices carries more than one edge.
    pub fn is_simple(&self) -> bool {
        self.simple
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0 as Vertex];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in self.neighbors_of(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    pub fn is_regular(&self) -> bool {
        let d = self.degree(0);
        (0..self.n as Vertex).all(|v| self.degree(v) == d)
    }

    /// True when the graph is itself a tree.
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n && self.is_connected()
    }

    pub fn spec(&self) -> Option<GeneratorSpec> {
        self.spec
    }

    /// Torus side when the graph was generated as a torus.
    pub fn torus_side(&self) -> Option<u32> {
        match self.spec {
            Some(GeneratorSpec::Torus(n)) => Some(n),
            _ => None,
        }
    }

    /// Grid dimensions `(w, h)`; a torus also reports its side pair.
    pub fn grid_dims(&self) -> Option<(u32, u32)> {
        match self.spec {
            Some(GeneratorSpec::Grid(w, h)) => Some((w, h)),
            Some(GeneratorSpec::Torus(n)) => Some((n, n)),
            _ => None,
        }
    }

    pub fn set_spec_label(&mut self, spec: GeneratorSpec) {
        self.spec = Some(spec);
    }

    pub fn shared(self) -> Arc<Graph> {
        Arc::new(self)
    }

    /// Text format: `graph <num_vertices>` then `e <u> <v> [mult]` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("graph {}\n", self.n);
        let mut i = 0;
        while i < self.edges.len() {
            let (u, v) = self.edges[i];
            let mut m = 1;
            while i + m < self.edges.len() && self.edges[i + m] == (u, v) {
                m += 1;
            }
            if m == 1 {
                out.push_str(&format!("e {u} {v}\n"));
            } else {
                out.push_str(&format!("e {u} {v} {m}\n"));
            }
            i += m;
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Graph> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let mut it = header.split_whitespace();
        if it.next() != Some("graph") {
            return Err(Error::Parse("expected `graph <n>` header".into()));
        }
        let n: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad vertex count".into()))?;
        let mut edges = Vec::new();
        for line in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() || toks[0] != "e" || toks.len() < 3 || toks.len() > 4 {
                return Err(Error::Parse(format!("bad edge line: {line}")));
            }
            let u: Vertex = toks[1].parse().map_err(|_| Error::Parse(line.into()))?;
            let v: Vertex = toks[2].parse().map_err(|_| Error::Parse(line.into()))?;
            let m: u32 = if toks.len() == 4 {
                toks[3].parse().map_err(|_| Error::Parse(line.into()))?
            } else {
                1
            };
            edges.push((u, v, m));
        }
        Graph::from_edges(n, &edges)
    }
}

/// Coordinates of a vertex on a `side x side` torus or a `w x h` grid laid out
/// row major: `v = row * width + col`.
#[inline]
pub fn grid_coords(v: Vertex, width: u32) -> (u32, u32) {
    (v / width, v % width)
}

#[inline]
pub fn grid_vertex(row: u32, col: u32, width: u32) -> Vertex {
    row * width + col
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_sizes() {
        let g = Graph::generate(GeneratorSpec::Torus(3)).unwrap();
        assert_eq!(g.num_vertices(), 9);
        assert_eq!(g.num_edges(), 18);
        assert!(g.is_simple());
        assert!(g.is_connected());
        assert!(g.is_regular());

        // Torus(2): 4 vertices, 4 vertex pairs each with multiplicity 2.
        let g = Graph::generate(GeneratorSpec::Torus(2)).unwrap();
        assert_eq!(g.num_vertices(), 4);
        assert_eq!(g.num_edges(), 8);
        assert!(!g.is_simple());
        let mut pairs: Vec<_> = g.edge_list().to_vec();
        pairs.dedup();
        assert_eq!(pairs.len(), 4);

        // Torus(1): a single loop-free vertex.
        let g = Graph::generate(GeneratorSpec::Torus(1)).unwrap();
        assert_eq!(g.num_vertices(), 1);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn generate_is_deterministic() {
        let a = Graph::generate(GeneratorSpec::Grid(4, 3)).unwrap();
        let b = Graph::generate(GeneratorSpec::Grid(4, 3)).unwrap();
        assert_eq!(a.edge_list(), b.edge_list());
    }

    #[test]
    fn torus_arithmetic_neighbors_match_csr() {
        let g = Graph::generate(GeneratorSpec::Torus(5)).unwrap();
        for v in 0..25 {
            let mut fast: Vec<_> = (0..4).map(|i| g.nth_neighbor(v, i)).collect();
            fast.sort_unstable();
            assert_eq!(fast.as_slice(), g.neighbors_of(v));
        }
    }

    #[test]
    fn spec_round_trip() {
        for s in ["torus:7", "grid:3x9", "complete:5", "line:4", "ladderline:3,6", "dary:2,3"] {
            let spec: GeneratorSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            Graph::generate(spec).unwrap();
        }
        assert!("torus:0".parse::<GeneratorSpec>().is_err());
        assert!("ladderline:3,5".parse::<GeneratorSpec>().is_err());
        assert!("blob:3".parse::<GeneratorSpec>().is_err());
    }

    #[test]
    fn text_round_trip() {
        let g = Graph::generate(GeneratorSpec::Torus(2)).unwrap();
        let t = g.to_text();
        let h = Graph::from_text(&t).unwrap();
        assert_eq!(g.edge_list(), h.edge_list());
    }

    #[test]
    fn dary_count() {
        let g = Graph::generate(GeneratorSpec::Dary(2, 3)).unwrap();
        assert_eq!(g.num_vertices(), 15);
        assert!(g.is_tree());
    }
}
