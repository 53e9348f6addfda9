//! Birth-and-death kernels on the set of all subtree sizes, parametrised by a
//! per-size triplet sequence (p_i, q_i, r_i): the probabilities of trying to
//! add an edge, doing nothing, and trying to remove one. Their invariant
//! measures weight each size-m tree by an explicit product of the triplets.

use crate::error::{Error, Result};
use crate::graph::Vertex;
use crate::mcmc::{add_with_break, BreakCycleRule};
use crate::tree::EmbeddedTree;
use rand::Rng;

/// Per-size triplets (p_i, q_i, r_i), i = 1..=|V|, each summing to 1, with an
/// optional size window [n1, n2] outside which the chain never moves.
#[derive(Debug, Clone)]
pub struct PqrConfig {
    /// p[i], q[i], r[i] indexed by tree size i (index 0 unused).
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub window: Option<(usize, usize)>,
}

impl PqrConfig {
    /// Constant triplets (p, q, r) for every size.
    pub fn constant(num_vertices: usize, p: f64, q: f64, r: f64) -> Result<PqrConfig> {
        let cfg = PqrConfig {
            p: vec![p; num_vertices + 1],
            q: vec![q; num_vertices + 1],
            r: vec![r; num_vertices + 1],
            window: None,
        };
        cfg.validate(num_vertices)?;
        Ok(cfg)
    }

    /// p_i = r_i = 1/2: the invariant law is uniform over all subtree sizes
    /// apart from singletons, which carry half weight in the unrooted chain.
    pub fn uniform(num_vertices: usize) -> PqrConfig {
        Self::constant(num_vertices, 0.5, 0.0, 0.5).expect("valid")
    }

    /// Geometric bias: the invariant weight ratio between consecutive sizes is
    /// `c` in the unrooted and rooted chains (p_i = c/(1+c), r_i = 1/(1+c)).
    pub fn geometric(num_vertices: usize, c: f64) -> Result<PqrConfig> {
        if !(c > 0.0) {
            return Err(Error::InvalidConfig("geometric ratio must be positive".into()));
        }
        Self::constant(num_vertices, c / (1.0 + c), 0.0, 1.0 / (1.0 + c))
    }

    /// Restricts movement to sizes in [n1, n2] by zeroing r at n1 and p at n2
    /// (moving the mass to q).
    pub fn with_window(mut self, n1: usize, n2: usize) -> Result<PqrConfig> {
        if n1 < 1 || n1 > n2 || n2 >= self.p.len() {
            return Err(Error::InvalidConfig("bad window".into()));
        }
        for i in 1..self.p.len() {
            if i <= n1 {
                self.q[i] += self.r[i];
                self.r[i] = 0.0;
            }
            if i >= n2 {
                self.q[i] += self.p[i];
                self.p[i] = 0.0;
            }
        }
        self.window = Some((n1, n2));
        self.validate(self.p.len() - 1)?;
        Ok(self)
    }

    /// Parses `i p q r` lines.
    pub fn from_lines(text: &str, num_vertices: usize) -> Result<PqrConfig> {
        let mut cfg = PqrConfig {
            p: vec![0.0; num_vertices + 1],
            q: vec![1.0; num_vertices + 1],
            r: vec![0.0; num_vertices + 1],
            window: None,
        };
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 {
                return Err(Error::Parse(format!("expected `i p q r`: {line}")));
            }
            let i: usize = toks[0].parse().map_err(|_| Error::Parse(line.into()))?;
            if i == 0 || i > num_vertices {
                return Err(Error::Parse(format!("size {i} out of range")));
            }
            cfg.p[i] = toks[1].parse().map_err(|_| Error::Parse(line.into()))?;
            cfg.q[i] = toks[2].parse().map_err(|_| Error::Parse(line.into()))?;
            cfg.r[i] = toks[3].parse().map_err(|_| Error::Parse(line.into()))?;
        }
        cfg.validate(num_vertices)?;
        Ok(cfg)
    }

    pub fn validate(&self, num_vertices: usize) -> Result<()> {
        if self.p.len() <= num_vertices {
            return Err(Error::InvalidConfig("triplet table too short".into()));
        }
        for i in 1..=num_vertices {
            let (p, q, r) = (self.p[i], self.q[i], self.r[i]);
            if p < 0.0 || q < 0.0 || r < 0.0 || (p + q + r - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!(
                    "triplet at size {i} must be non-negative and sum to 1"
                )));
            }
        }
        Ok(())
    }

    /// Irreducibility over the configured window: growth must be possible
    /// below its top and shrinkage above its bottom.
    pub fn validate_irreducible(&self, num_vertices: usize) -> Result<()> {
        self.validate(num_vertices)?;
        let (n1, n2) = self.window.unwrap_or((1, num_vertices));
        for i in n1..n2 {
            if self.p[i] <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "irreducibility requires p_{i} > 0 inside the window"
                )));
            }
            if self.r[i + 1] <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "irreducibility requires r_{} > 0 inside the window",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    fn draw_choice<R: Rng>(&self, size: usize, rng: &mut R) -> Choice {
        let x: f64 = rng.gen();
        if x < self.p[size] {
            Choice::Add
        } else if x < self.p[size] + self.q[size] {
            Choice::Hold
        } else {
            Choice::Remove
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Choice {
    Add,
    Hold,
    Remove,
}

/// Unrooted removal: a single-edge tree keeps the tail of the oriented edge;
/// otherwise the edge goes only if a tree remains (a pendant edge drops its
/// leaf, anything else is a no-op).
pub fn remove_unrooted(t: &mut EmbeddedTree, tail: Vertex, head: Vertex) {
    if !t.is_tree_edge(tail, head) {
        return;
    }
    if t.size() == 2 {
        t.detach_leaf(head);
        return;
    }
    if t.is_leaf(tail) {
        t.detach_leaf(tail);
    } else if t.is_leaf(head) {
        t.detach_leaf(head);
    }
}

/// Rooted removal: drops the far endpoint of `e` only when it is a leaf; the
/// root is preserved (and never counts as a leaf).
pub fn remove_rooted(t: &mut EmbeddedTree, a: Vertex, b: Vertex) {
    if !t.is_tree_edge(a, b) {
        return;
    }
    let child = if t.parent_of(a) == b { a } else { b };
    if t.is_leaf(child) {
        t.detach_leaf(child);
    }
}

/// Adds edge `{a, b}` when adjacent to the tree; a cycle-closing addition is a
/// graph of excess one and is corrected by the break-cycle rule in the kernel.
pub fn add(t: &mut EmbeddedTree, a: Vertex, b: Vertex, rule: BreakCycleRule, rng: &mut impl Rng) {
    add_with_break(t, a, b, rule, rng);
}

/// One transition of the unrooted variable-size kernel: a uniform oriented
/// host edge and a (p, q, r) choice indexed by the current size.
pub fn kernel_d_step<R: Rng>(
    t: &mut EmbeddedTree,
    cfg: &PqrConfig,
    rule: BreakCycleRule,
    rng: &mut R,
) {
    let m = t.host().num_edges();
    let slot = rng.gen_range(0..2 * m);
    let (a, b) = t.host().edge_list()[slot / 2];
    let (tail, head) = if slot % 2 == 0 { (a, b) } else { (b, a) };
    match cfg.draw_choice(t.size(), rng) {
        Choice::Add => add_with_break(t, a, b, rule, rng),
        Choice::Hold => {}
        Choice::Remove => remove_unrooted(t, tail, head),
    }
}

/// Rooted variant: unoriented edge draws, rooted removal, root preserved.
pub fn kernel_d_rooted_step<R: Rng>(
    t: &mut EmbeddedTree,
    cfg: &PqrConfig,
    rule: BreakCycleRule,
    rng: &mut R,
) {
    debug_assert!(t.root().is_some());
    let m = t.host().num_edges();
    let (a, b) = t.host().edge_list()[rng.gen_range(0..m)];
    match cfg.draw_choice(t.size(), rng) {
        Choice::Add => add_with_break(t, a, b, rule, rng),
        Choice::Hold => {}
        Choice::Remove => remove_rooted(t, a, b),
    }
}

/// Fast kernel for regular hosts: the oriented edge starts at a uniform tree
/// vertex instead of being uniform over all host edges.
pub fn kernel_e_step<R: Rng>(
    t: &mut EmbeddedTree,
    cfg: &PqrConfig,
    rule: BreakCycleRule,
    rng: &mut R,
) {
    let u = t.nth_member(rng.gen_range(0..t.size()));
    let host = t.host().clone();
    let u2 = host.nth_neighbor(u, rng.gen_range(0..host.degree(u)));
    match cfg.draw_choice(t.size(), rng) {
        Choice::Add => add_with_break(t, u, u2, rule, rng),
        Choice::Hold => {}
        Choice::Remove => remove_unrooted(t, u, u2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureVariant {
    Unrooted,
    Rooted,
    Regular,
    /// The windowed regular chain; the reference size is the lower window end.
    Windowed,
}

/// Unnormalised invariant weight per size, index m = tree size (index 0
/// unused, weight 0). Normalisation requires the subtree counts |T(G, m)|.
pub fn invariant_measure(
    cfg: &PqrConfig,
    variant: MeasureVariant,
    num_vertices: usize,
) -> Result<Vec<f64>> {
    let mut nu = vec![0.0; num_vertices + 1];
    let (start, end) = match variant {
        MeasureVariant::Windowed => cfg
            .window
            .ok_or_else(|| Error::InvalidConfig("windowed measure needs a window".into()))?,
        _ => (1, num_vertices),
    };
    nu[start] = 1.0;
    for m in start + 1..=end {
        if cfg.r[m] <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "invariant measure undefined: r_{m} = 0 inside the range"
            )));
        }
        let ratio = match variant {
            MeasureVariant::Unrooted | MeasureVariant::Rooted => cfg.p[m - 1] / cfg.r[m],
            MeasureVariant::Regular | MeasureVariant::Windowed => {
                (cfg.p[m - 1] / (m - 1) as f64) / (2.0 * cfg.r[m] / m as f64)
            }
        };
        nu[m] = nu[m - 1] * ratio;
    }
    // The size-1 / size-2 boundary carries an extra factor 2 in the oriented
    // (unrooted, regular) chains: removing the single edge of a 2-vertex tree
    // lands on a specific singleton for only one of its two orientations.
    let oriented_boundary = match variant {
        MeasureVariant::Unrooted | MeasureVariant::Regular => true,
        MeasureVariant::Windowed => start == 1,
        MeasureVariant::Rooted => false,
    };
    if oriented_boundary {
        for w in nu.iter_mut().skip(2) {
            *w *= 2.0;
        }
    }
    Ok(nu)
}

/// Normalises `nu` against subtree counts so that sum_m nu_m |T(G, m)| = 1.
pub fn normalize_measure(nu: &[f64], counts: &[f64]) -> Vec<f64> {
    let z: f64 = nu
        .iter()
        .zip(counts)
        .map(|(&w, &c)| w * c)
        .sum();
    nu.iter().map(|&w| w / z).collect()
}
