//! Exact subtree counting by deletion–contraction, spanning-tree counts by the
//! matrix-tree theorem, a brute-force subtree enumerator, and exact / Boltzmann
//! samplers driven by the counts.
//!
//! The counting recursion expands `T_r(G) = x T_r(G.e) + T_r(G \ e)` over an
//! edge `e` adjacent to `r` (lowest neighbour first, deterministic). Its cost
//! is at least linear in the number of counted subtrees, so everything here is
//! for desk-scale graphs; a node budget guards against runaway instances.

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use std::collections::HashMap;
use std::fmt;

/// Default recursion-node budget for the counting recursion.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Index into [`Graph::edge_list`]; parallel copies are distinct edges.
pub type EdgeId = u32;

/// Generating function of rooted (or unrooted) subtrees: coefficient `k` is
/// the number of subtrees with `k` edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtreePolynomial {
    pub coeffs: Vec<BigUint>,
}

impl SubtreePolynomial {
    pub fn coefficient(&self, k: usize) -> BigUint {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    /// Total number of counted subtrees (evaluation at 1).
    pub fn total(&self) -> BigUint {
        self.coeffs.iter().sum()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.to_f64().unwrap_or(f64::INFINITY);
        }
        acc
    }

    fn trim(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }
}

impl fmt::Display for SubtreePolynomial {
    /// Descending-degree rendering, e.g. `32 x^3 + 12 x^2 + 4 x + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for k in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[k];
            if c.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c} x")?,
                _ => write!(f, "{c} x^{k}")?,
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Multivariate generating function of root-disjoint forests: maps the vector
/// of per-root edge counts to the number of forests realising it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ForestPolynomial {
    pub coeffs: HashMap<Vec<u32>, BigUint>,
}

impl ForestPolynomial {
    pub fn coefficient(&self, exps: &[u32]) -> BigUint {
        self.coeffs.get(exps).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> BigUint {
        self.coeffs.values().sum()
    }
}

/// Dense multigraph used by the counting recursion. Contraction merges a
/// vertex into the root; loops created by contraction are dropped immediately
/// (they carry no subtrees).
#[derive(Debug, Clone, Default)]
struct MultiMat {
    n: usize,
    m: Vec<u16>,
}

impl MultiMat {
    fn from_graph(g: &Graph) -> MultiMat {
        let n = g.num_vertices();
        let mut m = vec![0u16; n * n];
        for &(u, v) in g.edge_list() {
            m[u as usize * n + v as usize] += 1;
            m[v as usize * n + u as usize] += 1;
        }
        MultiMat { n, m }
    }

    #[inline]
    fn lowest_at(&self, r: usize) -> Option<usize> {
        let row = &self.m[r * self.n..(r + 1) * self.n];
        row.iter().position(|&c| c > 0)
    }

    /// Writes `self` with `b` merged into `r` (and loops dropped) into `out`.
    fn contract_into(&self, r: usize, b: usize, out: &mut MultiMat) {
        out.n = self.n;
        out.m.clear();
        out.m.extend_from_slice(&self.m);
        let n = self.n;
        for w in 0..n {
            let c = out.m[b * n + w];
            if c > 0 && w != r && w != b {
                out.m[r * n + w] += c;
                out.m[w * n + r] += c;
            }
            out.m[b * n + w] = 0;
            out.m[w * n + b] = 0;
        }
        out.m[r * n + r] = 0;
    }
}

struct PolyRec {
    max_deg: usize,
    acc: Vec<BigUint>,
    pool: Vec<MultiMat>,
    budget: u64,
}

impl PolyRec {
    fn run(mat: &mut MultiMat, r: usize, max_deg: usize, budget: u64) -> Result<Vec<BigUint>> {
        let mut s = PolyRec {
            max_deg,
            acc: vec![BigUint::zero(); max_deg + 1],
            pool: Vec::new(),
            budget,
        };
        s.rec(mat, 0, r, 0)?;
        Ok(s.acc)
    }

    fn rec(&mut self, mat: &mut MultiMat, depth: usize, r: usize, shift: usize) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::ResourceCap(
                "counting recursion exceeded its node budget".into(),
            ));
        }
        self.budget -= 1;
        let Some(b) = mat.lowest_at(r) else {
            self.acc[shift] += 1u32;
            return Ok(());
        };
        if shift < self.max_deg {
            if self.pool.len() <= depth {
                self.pool.resize_with(depth + 1, MultiMat::default);
            }
            let mut cmat = std::mem::take(&mut self.pool[depth]);
            mat.contract_into(r, b, &mut cmat);
            self.rec(&mut cmat, depth + 1, r, shift + 1)?;
            self.pool[depth] = cmat;
        }
        let n = mat.n;
        mat.m[r * n + b] -= 1;
        mat.m[b * n + r] -= 1;
        self.rec(mat, depth, r, shift)?;
        mat.m[r * n + b] += 1;
        mat.m[b * n + r] += 1;
        Ok(())
    }
}

/// Exact generating function of the subtrees of `g` containing `r`, counted by
/// edge number. Handles multigraphs; components not containing `r` are
/// ignored.
pub fn subtree_polynomial_rooted(g: &Graph, r: Vertex) -> Result<SubtreePolynomial> {
    subtree_polynomial_rooted_budget(g, r, DEFAULT_NODE_BUDGET)
}

pub fn subtree_polynomial_rooted_budget(
    g: &Graph,
    r: Vertex,
    budget: u64,
) -> Result<SubtreePolynomial> {
    let max_deg = g.num_vertices().saturating_sub(1);
    let mut mat = MultiMat::from_graph(g);
    let coeffs = PolyRec::run(&mut mat, r as usize, max_deg, budget)?;
    Ok(SubtreePolynomial { coeffs }.trim())
}

/// Coefficients up to `x^max_deg` only: number of rooted subtrees with exactly
/// `k <= max_deg` edges. Truncation keeps the recursion cheap for size-targeted
/// sampling.
fn rooted_counts_truncated(
    mat: &mut MultiMat,
    r: usize,
    max_deg: usize,
    budget: u64,
) -> Result<Vec<BigUint>> {
    PolyRec::run(mat, r, max_deg, budget)
}

/// Exact generating function of unrooted subtrees: coefficient of `x^k` is
/// `|T(g, k+1)|`. Computed by summing rooted polynomials; each unrooted
/// subtree with `k` edges is counted `k + 1` times.
pub fn subtree_polynomial_unrooted(g: &Graph) -> Result<SubtreePolynomial> {
    subtree_polynomial_unrooted_budget(g, DEFAULT_NODE_BUDGET)
}

pub fn subtree_polynomial_unrooted_budget(g: &Graph, budget: u64) -> Result<SubtreePolynomial> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.num_vertices();
    let mut sum = vec![BigUint::zero(); n];
    for r in 0..n {
        let p = subtree_polynomial_rooted_budget(g, r as Vertex, budget)?;
        for (k, c) in p.coeffs.iter().enumerate() {
            sum[k] += c;
        }
    }
    for (k, c) in sum.iter_mut().enumerate() {
        let q = k as u32 + 1;
        let (d, rem) = c.div_rem(&BigUint::from(q));
        if !rem.is_zero() {
            return Err(Error::Domain(format!(
                "rooted sum not divisible by {q} at degree {k}: implementation bug"
            )));
        }
        *c = d;
    }
    Ok(SubtreePolynomial { coeffs: sum }.trim())
}

/// Multivariate generating function of forests of `roots.len()` disjoint trees,
/// tree `j` containing `roots[j]`, counted by per-tree edge numbers.
pub fn forest_polynomial(g: &Graph, roots: &[Vertex]) -> Result<ForestPolynomial> {
    let k = roots.len();
    if k == 0 {
        return Err(Error::InvalidConfig("at least one root".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for &r in roots {
        if !seen.insert(r) {
            return Err(Error::InvalidConfig("duplicate roots".into()));
        }
    }
    let mut mat = MultiMat::from_graph(g);
    let mut root_of = vec![usize::MAX; g.num_vertices()];
    for (j, &r) in roots.iter().enumerate() {
        root_of[r as usize] = j;
    }
    let mut out = ForestPolynomial::default();
    let mut exps = vec![0u32; k];
    let mut budget = DEFAULT_NODE_BUDGET;
    forest_rec(&mut mat, &root_of, &mut exps, &mut out, &mut budget)?;
    Ok(out)
}

fn forest_rec(
    mat: &mut MultiMat,
    root_of: &[usize],
    exps: &mut Vec<u32>,
    out: &mut ForestPolynomial,
    budget: &mut u64,
) -> Result<()> {
    if *budget == 0 {
        return Err(Error::ResourceCap("forest recursion budget".into()));
    }
    *budget -= 1;
    let n = mat.n;
    // An edge between two roots can never be used by a root-disjoint forest:
    // delete it outright.
    let mut pick: Option<(usize, usize)> = None;
    'scan: for u in 0..n {
        if root_of[u] == usize::MAX {
            continue;
        }
        for w in 0..n {
            if mat.m[u * n + w] > 0 {
                if root_of[w] != usize::MAX {
                    mat.m[u * n + w] -= 1;
                    mat.m[w * n + u] -= 1;
                    let res = forest_rec(mat, root_of, exps, out, budget);
                    mat.m[u * n + w] += 1;
                    mat.m[w * n + u] += 1;
                    return res;
                }
                pick = Some((u, w));
                break 'scan;
            }
        }
    }
    let Some((u, w)) = pick else {
        // no edge adjacent to exactly one root remains
        *out.coeffs.entry(exps.clone()).or_default() += 1u32;
        return Ok(());
    };
    let j = root_of[u];
    // contract branch: w merges into the root u
    let mut cmat = MultiMat::default();
    mat.contract_into(u, w, &mut cmat);
    exps[j] += 1;
    forest_rec(&mut cmat, root_of, exps, out, budget)?;
    exps[j] -= 1;
    // delete branch
    mat.m[u * n + w] -= 1;
    mat.m[w * n + u] -= 1;
    forest_rec(mat, root_of, exps, out, budget)?;
    mat.m[u * n + w] += 1;
    mat.m[w * n + u] += 1;
    Ok(())
}

/// Number of spanning trees by the matrix-tree theorem: determinant of the
/// reduced Laplacian in exact integer arithmetic (fraction-free elimination).
pub fn count_spanning_trees(g: &Graph) -> Result<BigUint> {
    if g.num_vertices() == 0 {
        return Err(Error::Disconnected);
    }
    if g.num_vertices() == 1 {
        return Ok(BigUint::one());
    }
    let n = g.num_vertices();
    let m = n - 1;
    let mut a = vec![vec![BigInt::zero(); m]; m];
    for &(u, v) in g.edge_list() {
        let (u, v) = (u as usize, v as usize);
        if u > 0 {
            a[u - 1][u - 1] += 1;
        }
        if v > 0 {
            a[v - 1][v - 1] += 1;
        }
        if u > 0 && v > 0 {
            a[u - 1][v - 1] -= 1;
            a[v - 1][u - 1] -= 1;
        }
    }
    let det = bareiss_det(&mut a);
    Ok(det.abs().to_biguint().expect("non-negative determinant"))
}

fn bareiss_det(a: &mut [Vec<BigInt>]) -> BigInt {
    let m = a.len();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..m {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..m).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..m {
            for j in k + 1..m {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = a[m - 1][m - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Brute-force oracle: the complete, duplicate-free list of subtrees with `n`
/// vertices (containing `root` when given), each as a sorted list of edge ids.
/// Parallel copies are distinct edges.
pub fn enumerate_subtrees(g: &Graph, n: usize, root: Option<Vertex>) -> Result<Vec<Vec<EdgeId>>> {
    enumerate_subtrees_budget(g, n, root, DEFAULT_NODE_BUDGET)
}

pub fn enumerate_subtrees_budget(
    g: &Graph,
    n: usize,
    root: Option<Vertex>,
    mut budget: u64,
) -> Result<Vec<Vec<EdgeId>>> {
    let mut out = Vec::new();
    match root {
        Some(r) => {
            enumerate_rooted(g, n, r, 0, &mut out, &mut budget)?;
        }
        None => {
            // Each unrooted subtree is generated exactly once, rooted at its
            // minimal vertex.
            for r in 0..g.num_vertices() as Vertex {
                enumerate_rooted(g, n, r, r, &mut out, &mut budget)?;
            }
        }
    }
    Ok(out)
}

fn enumerate_rooted(
    g: &Graph,
    n: usize,
    r: Vertex,
    min_vertex: Vertex,
    out: &mut Vec<Vec<EdgeId>>,
    budget: &mut u64,
) -> Result<()> {
    if n == 0 || r < min_vertex {
        return Ok(());
    }
    let mut in_tree = vec![false; g.num_vertices()];
    in_tree[r as usize] = true;
    let mut banned = vec![false; g.num_edges()];
    let mut edges: Vec<EdgeId> = Vec::new();
    rec_enum(g, n, min_vertex, &mut in_tree, &mut banned, &mut edges, 1, out, budget)
}

#[allow(clippy::too_many_arguments)]
fn rec_enum(
    g: &Graph,
    n: usize,
    min_vertex: Vertex,
    in_tree: &mut [bool],
    banned: &mut [bool],
    edges: &mut Vec<EdgeId>,
    size: usize,
    out: &mut Vec<Vec<EdgeId>>,
    budget: &mut u64,
) -> Result<()> {
    if *budget == 0 {
        return Err(Error::ResourceCap("subtree enumeration budget".into()));
    }
    *budget -= 1;
    if size == n {
        let mut e = edges.clone();
        e.sort_unstable();
        out.push(e);
        return Ok(());
    }
    // lowest-id extension edge: exactly one endpoint inside, new endpoint
    // admissible, not banned
    let pick = g.edge_list().iter().enumerate().find_map(|(id, &(u, v))| {
        if banned[id] {
            return None;
        }
        let (iu, iv) = (in_tree[u as usize], in_tree[v as usize]);
        if iu == iv {
            return None;
        }
        let new = if iu { v } else { u };
        (new >= min_vertex).then_some((id as EdgeId, new))
    });
    let Some((id, new)) = pick else { return Ok(()) };
    // include
    in_tree[new as usize] = true;
    edges.push(id);
    rec_enum(g, n, min_vertex, in_tree, banned, edges, size + 1, out, budget)?;
    edges.pop();
    in_tree[new as usize] = false;
    // exclude
    banned[id as usize] = true;
    rec_enum(g, n, min_vertex, in_tree, banned, edges, size, out, budget)?;
    banned[id as usize] = false;
    Ok(())
}

/// Multigraph with original edge identities, supporting the delete/contract
/// decisions of the exact samplers.
#[derive(Debug, Clone)]
struct IdGraph {
    adj: Vec<Vec<(Vertex, EdgeId)>>,
}

impl IdGraph {
    fn from_graph(g: &Graph) -> IdGraph {
        let mut adj = vec![Vec::new(); g.num_vertices()];
        for (id, &(u, v)) in g.edge_list().iter().enumerate() {
            adj[u as usize].push((v, id as EdgeId));
            adj[v as usize].push((u, id as EdgeId));
        }
        IdGraph { adj }
    }

    /// Lowest incident edge at `r`: minimal neighbour, then minimal id.
    fn lowest_at(&self, r: Vertex) -> Option<(Vertex, EdgeId)> {
        self.adj[r as usize].iter().copied().min()
    }

    fn delete(&mut self, u: Vertex, v: Vertex, id: EdgeId) {
        let pos = self.adj[u as usize]
            .iter()
            .position(|&(w, i)| w == v && i == id)
            .expect("edge in adjacency");
        self.adj[u as usize].swap_remove(pos);
        let pos = self.adj[v as usize]
            .iter()
            .position(|&(w, i)| w == u && i == id)
            .expect("edge in adjacency");
        self.adj[v as usize].swap_remove(pos);
    }

    /// Merges `b` into `r`, dropping loops.
    fn contract(&mut self, r: Vertex, b: Vertex) {
        let entries = std::mem::take(&mut self.adj[b as usize]);
        for (w, id) in entries {
            if w == r {
                let pos = self.adj[r as usize]
                    .iter()
                    .position(|&(x, i)| x == b && i == id)
                    .expect("counterpart");
                self.adj[r as usize].swap_remove(pos);
            } else {
                let pos = self.adj[w as usize]
                    .iter()
                    .position(|&(x, i)| x == b && i == id)
                    .expect("counterpart");
                self.adj[w as usize][pos].0 = r;
                self.adj[r as usize].push((w, id));
            }
        }
    }

    fn to_matrix(&self) -> MultiMat {
        let n = self.adj.len();
        let mut m = vec![0u16; n * n];
        for (u, row) in self.adj.iter().enumerate() {
            for &(v, _) in row {
                m[u * n + v as usize] += 1;
            }
        }
        MultiMat { n, m }
    }

    fn count_rooted(&self, r: Vertex, k: usize, budget: u64) -> Result<BigUint> {
        let mut mat = self.to_matrix();
        let coeffs = rooted_counts_truncated(&mut mat, r as usize, k, budget)?;
        Ok(coeffs.into_iter().nth(k).unwrap_or_default())
    }
}

/// Exactly uniform sample from the subtrees of `g` with `n` vertices
/// containing `r`, as a list of edge ids. Recursive keep/contract-vs-delete
/// decisions weighted by exact sub-counts.
pub fn exact_sample_rooted<R: Rng>(
    g: &Graph,
    r: Vertex,
    n: usize,
    rng: &mut R,
) -> Result<Vec<EdgeId>> {
    let mut idg = IdGraph::from_graph(g);
    let budget = DEFAULT_NODE_BUDGET;
    let mut k = n
        .checked_sub(1)
        .ok_or_else(|| Error::InvalidConfig("n must be at least 1".into()))?;
    let total = idg.count_rooted(r, k, budget)?;
    if total.is_zero() {
        return Err(Error::EmptyClass);
    }
    let mut chosen = Vec::with_capacity(k);
    while k > 0 {
        let (b, id) = idg.lowest_at(r).expect("positive count implies an edge");
        let del_count = {
            let mut del = idg.clone();
            del.delete(r, b, id);
            del.count_rooted(r, k, budget)?
        };
        let keep_count = {
            let mut con = idg.clone();
            con.contract(r, b);
            con.count_rooted(r, k - 1, budget)?
        };
        let total = &keep_count + &del_count;
        debug_assert!(!total.is_zero());
        let draw = rand_biguint_below(rng, &total);
        if draw < del_count {
            idg.delete(r, b, id);
        } else {
            chosen.push(id);
            idg.contract(r, b);
            k -= 1;
        }
    }
    Ok(chosen)
}

/// Boltzmann sampler: P(t) proportional to x^{|E(t)|} over all rooted subtrees
/// containing `r`. Conditioned on its size the output is uniform.
pub fn boltzmann_sample<R: Rng>(g: &Graph, r: Vertex, x: f64, rng: &mut R) -> Result<Vec<EdgeId>> {
    if !(x > 0.0) {
        return Err(Error::InvalidConfig("x must be positive".into()));
    }
    let budget = DEFAULT_NODE_BUDGET;
    let max_deg = g.num_vertices().saturating_sub(1);
    let mut idg = IdGraph::from_graph(g);
    let mut chosen = Vec::new();
    loop {
        let Some((b, id)) = idg.lowest_at(r) else {
            return Ok(chosen);
        };
        let del_val = {
            let mut del = idg.clone();
            del.delete(r, b, id);
            let mut mat = del.to_matrix();
            let coeffs = rooted_counts_truncated(&mut mat, r as usize, max_deg, budget)?;
            (SubtreePolynomial { coeffs }).eval_f64(x)
        };
        let keep_val = {
            let mut con = idg.clone();
            con.contract(r, b);
            let mut mat = con.to_matrix();
            let coeffs = rooted_counts_truncated(&mut mat, r as usize, max_deg, budget)?;
            x * (SubtreePolynomial { coeffs }).eval_f64(x)
        };
        let p_del = del_val / (del_val + keep_val);
        if rng.gen::<f64>() < p_del {
            idg.delete(r, b, id);
        } else {
            chosen.push(id);
            idg.contract(r, b);
        }
    }
}

/// Uniform sample from all subtrees of `g` with `n` vertices: the root is
/// drawn proportionally to |T_r(g, n)| and a rooted sample follows. Every
/// size-n tree is counted once per vertex, so the unrooted law is uniform.
pub fn exact_sample_unrooted<R: Rng>(g: &Graph, n: usize, rng: &mut R) -> Result<Vec<EdgeId>> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let idg = IdGraph::from_graph(g);
    let mut weights = Vec::with_capacity(g.num_vertices());
    let mut total = BigUint::zero();
    for r in 0..g.num_vertices() as Vertex {
        let w = idg.count_rooted(r, n - 1, DEFAULT_NODE_BUDGET)?;
        total += &w;
        weights.push(w);
    }
    if total.is_zero() {
        return Err(Error::EmptyClass);
    }
    let mut draw = rand_biguint_below(rng, &total);
    let mut root = 0 as Vertex;
    for (r, w) in weights.iter().enumerate() {
        if &draw < w {
            root = r as Vertex;
            break;
        }
        draw -= w;
    }
    exact_sample_rooted(g, root, n, rng)
}

/// Uniform BigUint below `bound`, by rejection above 64 bits.
pub fn rand_biguint_below<R: Rng>(rng: &mut R, bound: &BigUint) -> BigUint {
    debug_assert!(!bound.is_zero());
    if let Some(b) = bound.to_u64() {
        return BigUint::from(rng.gen_range(0..b));
    }
    let bits = bound.bits();
    loop {
        let mut limbs: Vec<u32> = Vec::with_capacity(bits.div_ceil(32) as usize);
        let mut remaining = bits;
        while remaining > 0 {
            let take = remaining.min(32);
            let mask = if take == 32 { u32::MAX } else { (1u32 << take) - 1 };
            limbs.push(rng.gen::<u32>() & mask);
            remaining -= take;
        }
        let candidate = BigUint::new(limbs);
        if &candidate < bound {
            return candidate;
        }
    }
}

/// Materialises a sampled edge-id list as an [`crate::EmbeddedTree`].
pub fn tree_from_edge_ids(
    host: &std::sync::Arc<Graph>,
    root: Option<Vertex>,
    anchor_hint: Vertex,
    ids: &[EdgeId],
) -> Result<crate::EmbeddedTree> {
    let edges: Vec<(Vertex, Vertex)> = ids
        .iter()
        .map(|&id| host.edge_list()[id as usize])
        .collect();
    crate::EmbeddedTree::from_edges(host.clone(), root, anchor_hint, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GeneratorSpec;

    #[test]
    fn torus_polynomials_match_published_values() {
        let p1 = subtree_polynomial_rooted(&Graph::generate(GeneratorSpec::Torus(1)).unwrap(), 0)
            .unwrap();
        assert_eq!(p1.to_string(), "1");
        let p2 = subtree_polynomial_rooted(&Graph::generate(GeneratorSpec::Torus(2)).unwrap(), 0)
            .unwrap();
        assert_eq!(p2.to_string(), "32 x^3 + 12 x^2 + 4 x + 1");
        let p3 = subtree_polynomial_rooted(&Graph::generate(GeneratorSpec::Torus(3)).unwrap(), 0)
            .unwrap();
        assert_eq!(
            p3.to_string(),
            "11664 x^8 + 9408 x^7 + 4074 x^6 + 1308 x^5 + 345 x^4 + 80 x^3 + 18 x^2 + 4 x + 1"
        );
    }

    #[test]
    fn budget_is_enforced() {
        let g = Graph::generate(GeneratorSpec::Torus(3)).unwrap();
        assert!(matches!(
            subtree_polynomial_rooted_budget(&g, 0, 100),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn unrooted_triangle() {
        let g = Graph::generate(GeneratorSpec::Complete(3)).unwrap();
        let p = subtree_polynomial_unrooted(&g).unwrap();
        assert_eq!(p.to_string(), "3 x^2 + 3 x + 3");
    }

    #[test]
    fn spanning_counts() {
        let k3 = Graph::generate(GeneratorSpec::Complete(3)).unwrap();
        assert_eq!(count_spanning_trees(&k3).unwrap(), 3u32.into());
        let t2 = Graph::generate(GeneratorSpec::Torus(2)).unwrap();
        assert_eq!(count_spanning_trees(&t2).unwrap(), 32u32.into());
        let t3 = Graph::generate(GeneratorSpec::Torus(3)).unwrap();
        assert_eq!(count_spanning_trees(&t3).unwrap(), 11664u32.into());
        let k5 = Graph::generate(GeneratorSpec::Complete(5)).unwrap();
        assert_eq!(count_spanning_trees(&k5).unwrap(), 125u32.into());
    }

    #[test]
    fn spanning_count_equals_top_coefficient() {
        for spec in [GeneratorSpec::Torus(2), GeneratorSpec::Torus(3), GeneratorSpec::Complete(4)] {
            let g = Graph::generate(spec).unwrap();
            let p = subtree_polynomial_rooted(&g, 0).unwrap();
            assert_eq!(
                count_spanning_trees(&g).unwrap(),
                p.coefficient(g.num_vertices() - 1)
            );
        }
    }

    #[test]
    fn enumerate_matches_coefficients() {
        for spec in [
            GeneratorSpec::Torus(2),
            GeneratorSpec::Torus(3),
            GeneratorSpec::Complete(4),
            GeneratorSpec::Grid(3, 2),
        ] {
            let g = Graph::generate(spec).unwrap();
            let p = subtree_polynomial_rooted(&g, 0).unwrap();
            for k in 0..=p.degree() {
                let listed = enumerate_subtrees(&g, k + 1, Some(0)).unwrap();
                assert_eq!(
                    BigUint::from(listed.len()),
                    p.coefficient(k),
                    "{spec:?} k={k}"
                );
                let mut sorted = listed.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted.len(), listed.len());
            }
        }
    }

    #[test]
    fn enumerate_unrooted_matches_unrooted_polynomial() {
        let g = Graph::generate(GeneratorSpec::Torus(3)).unwrap();
        let p = subtree_polynomial_unrooted(&g).unwrap();
        for k in 0..=4usize {
            let listed = enumerate_subtrees(&g, k + 1, None).unwrap();
            assert_eq!(BigUint::from(listed.len()), p.coefficient(k), "k={k}");
        }
    }

    #[test]
    fn torus3_key_counts() {
        let g = Graph::generate(GeneratorSpec::Torus(3)).unwrap();
        assert_eq!(enumerate_subtrees(&g, 4, Some(0)).unwrap().len(), 80);
        assert_eq!(enumerate_subtrees(&g, 6, Some(0)).unwrap().len(), 1308);
        assert_eq!(enumerate_subtrees(&g, 1, Some(0)).unwrap(), vec![Vec::<EdgeId>::new()]);
    }

    #[test]
    fn deletion_contraction_on_a_multigraph() {
        let g = Graph::from_edges(4, &[(0, 1, 2), (1, 2, 1), (2, 3, 1), (0, 3, 1), (0, 2, 1)])
            .unwrap();
        let p = subtree_polynomial_rooted(&g, 0).unwrap();
        for k in 0..=p.degree() {
            let listed = enumerate_subtrees(&g, k + 1, Some(0)).unwrap();
            assert_eq!(BigUint::from(listed.len()), p.coefficient(k));
        }
    }

    #[test]
    fn forest_polynomial_cases() {
        // single root reduces to the rooted subtree polynomial
        let g = Graph::generate(GeneratorSpec::Complete(3)).unwrap();
        let f = forest_polynomial(&g, &[0]).unwrap();
        let p = subtree_polynomial_rooted(&g, 0).unwrap();
        for k in 0..=p.degree() {
            assert_eq!(f.coefficient(&[k as u32]), p.coefficient(k));
        }

        // path a-b, both endpoints roots: only the trivial forest
        let line = Graph::generate(GeneratorSpec::Line(2)).unwrap();
        let f = forest_polynomial(&line, &[0, 1]).unwrap();
        assert_eq!(f.total(), BigUint::one());
        assert_eq!(f.coefficient(&[0, 0]), BigUint::one());

        assert!(forest_polynomial(&line, &[0, 0]).is_err());
    }

    #[test]
    fn forest_polynomial_vs_brute_force_on_cycle() {
        let c4 = Graph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]).unwrap();
        let f = forest_polynomial(&c4, &[0, 2]).unwrap();
        let edges = c4.edge_list();
        let mut expect: HashMap<Vec<u32>, BigUint> = HashMap::new();
        for mask in 0u32..(1 << edges.len()) {
            let subset: Vec<(Vertex, Vertex)> = (0..edges.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| edges[i])
                .collect();
            if let Some(exps) = classify_forest(&subset, &[0, 2]) {
                *expect.entry(exps).or_default() += 1u32;
            }
        }
        assert_eq!(f.coeffs, expect);
    }

    /// Per-root component edge counts when `subset` is a forest whose every
    /// component contains exactly one of `roots`; `None` otherwise.
    fn classify_forest(subset: &[(Vertex, Vertex)], roots: &[Vertex]) -> Option<Vec<u32>> {
        use std::collections::{HashMap, HashSet};
        let mut adj: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
        let mut verts: HashSet<Vertex> = roots.iter().copied().collect();
        for &(u, v) in subset {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
            verts.insert(u);
            verts.insert(v);
        }
        let mut comp: HashMap<Vertex, usize> = HashMap::new();
        let mut ncomp = 0;
        for &s in &verts {
            if comp.contains_key(&s) {
                continue;
            }
            let mut stack = vec![s];
            comp.insert(s, ncomp);
            while let Some(v) = stack.pop() {
                for &w in adj.get(&v).into_iter().flatten() {
                    if !comp.contains_key(&w) {
                        comp.insert(w, ncomp);
                        stack.push(w);
                    }
                }
            }
            ncomp += 1;
        }
        if subset.len() + ncomp != verts.len() {
            return None; // cycle
        }
        let mut root_of_comp = vec![None; ncomp];
        for (j, &r) in roots.iter().enumerate() {
            let c = comp[&r];
            if root_of_comp[c].is_some() {
                return None;
            }
            root_of_comp[c] = Some(j);
        }
        if root_of_comp.iter().any(|x| x.is_none()) {
            return None;
        }
        let mut exps = vec![0u32; roots.len()];
        for &(u, _) in subset {
            let j = root_of_comp[comp[&u]].unwrap();
            exps[j] += 1;
        }
        Some(exps)
    }

    #[test]
    fn exact_sample_rooted_small() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = Graph::generate(GeneratorSpec::Torus(3)).unwrap();
        assert_eq!(exact_sample_rooted(&g, 0, 1, &mut rng).unwrap(), Vec::<EdgeId>::new());
        for _ in 0..20 {
            let ids = exact_sample_rooted(&g, 0, 4, &mut rng).unwrap();
            assert_eq!(ids.len(), 3);
            let t = tree_from_edge_ids(&g.clone().shared(), Some(0), 0, &ids).unwrap();
            t.validate().unwrap();
            assert!(t.contains(0));
        }
        assert!(matches!(
            exact_sample_rooted(&Graph::generate(GeneratorSpec::Line(2)).unwrap(), 0, 5, &mut rng),
            Err(Error::EmptyClass)
        ));
    }

    #[test]
    fn boltzmann_small_x_collapses_to_root() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let g = Graph::generate(GeneratorSpec::Torus(3)).unwrap();
        for _ in 0..50 {
            let ids = boltzmann_sample(&g, 0, 1e-9, &mut rng).unwrap();
            assert!(ids.is_empty());
        }
    }
}
