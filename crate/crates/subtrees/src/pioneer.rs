//! The pioneer random tree: the first-entrance tree of a walk stopped once n
//! distinct vertices have been seen, edge-labelled by discovery order, and the
//! erase-oldest-edge chain on labelled rooted n-trees whose stationary law it
//! is.

use crate::error::{Error, Result};
use crate::exhaustive::solve_linear;
use crate::graph::{Graph, Vertex};
use crate::tree::EmbeddedTree;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use std::collections::HashMap;
use std::sync::Arc;

fn ekey(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// A rooted tree whose edges carry the labels 1..n-1, strictly decreasing on
/// every injective path from a leaf to the root.
#[derive(Clone)]
pub struct LabelledRootedTree {
    pub tree: EmbeddedTree,
    labels: HashMap<(Vertex, Vertex), u32>,
    /// label -> edge; index 0 is scratch, 1..=n-1 are live.
    by_label: Vec<(Vertex, Vertex)>,
}

/// Canonical state: (root, sorted labelled edge list).
pub type LabelledKey = (Vertex, Vec<(Vertex, Vertex, u32)>);

impl LabelledRootedTree {
    pub fn new(tree: EmbeddedTree, labels: HashMap<(Vertex, Vertex), u32>) -> Result<Self> {
        if tree.root().is_none() {
            return Err(Error::InvalidConfig("labelled tree must be rooted".into()));
        }
        let n1 = tree.size() - 1;
        let mut by_label = vec![(0, 0); n1 + 1];
        for (&e, &l) in &labels {
            if l == 0 || l as usize > n1 {
                return Err(Error::InvalidConfig("labels must cover 1..n-1".into()));
            }
            by_label[l as usize] = e;
        }
        let t = LabelledRootedTree { tree, labels, by_label };
        Ok(t)
    }

    pub fn label_of(&self, u: Vertex, v: Vertex) -> Option<u32> {
        self.labels.get(&ekey(u, v)).copied()
    }

    pub fn size(&self) -> usize {
        self.tree.size()
    }

    pub fn key(&self) -> LabelledKey {
        let mut edges: Vec<(Vertex, Vertex, u32)> = self
            .labels
            .iter()
            .map(|(&(u, v), &l)| (u, v, l))
            .collect();
        edges.sort_unstable();
        (self.tree.root().unwrap(), edges)
    }

    /// Bijectivity of the labels plus the decreasing-toward-the-root property.
    pub fn validate_labels(&self) -> Result<()> {
        let n1 = self.tree.size() - 1;
        if self.labels.len() != n1 {
            return Err(Error::Domain("label count mismatch".into()));
        }
        let mut seen = vec![false; n1 + 1];
        for (&(u, v), &l) in &self.labels {
            if !self.tree.is_tree_edge(u, v) {
                return Err(Error::Domain(format!("labelled non-edge ({u},{v})")));
            }
            if l == 0 || l as usize > n1 || seen[l as usize] {
                return Err(Error::Domain(format!("bad or duplicate label {l}")));
            }
            seen[l as usize] = true;
            if self.by_label[l as usize] != ekey(u, v) {
                return Err(Error::Domain("label index out of sync".into()));
            }
        }
        // decreasing from every vertex toward the root: each non-root vertex's
        // parent edge must carry a smaller label than all its child edges
        for &v in self.tree.members() {
            let p = self.tree.parent_of(v);
            if p == crate::graph::NO_VERTEX {
                continue;
            }
            let lp = self.labels[&ekey(v, p)];
            let gp = self.tree.parent_of(p);
            if gp != crate::graph::NO_VERTEX {
                let lg = self.labels[&ekey(p, gp)];
                if lg >= lp {
                    return Err(Error::Domain(format!(
                        "labels not decreasing toward the root at ({v},{p}): {lp} then {lg}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// After removing the edge labelled `m` and inserting `new_edge` with a
    /// temporary label 0: labels above `m` stay, the rest shift up by one and
    /// the new edge receives label 1.
    fn relabel(&mut self, m: u32, new_edge: (Vertex, Vertex)) {
        for l in (1..m).rev() {
            let e = self.by_label[l as usize];
            self.by_label[(l + 1) as usize] = e;
            self.labels.insert(e, l + 1);
        }
        self.by_label[1] = new_edge;
        self.labels.insert(new_edge, 1);
    }

    /// Applies the erase-oldest-edge move for a given root step `r1`
    /// (deterministic given `r1`).
    pub fn eoe_move(&mut self, r1: Vertex) {
        self.move_impl(r1, true);
    }

    /// The degenerate comparison variant: erase the youngest edge instead.
    pub fn youngest_move(&mut self, r1: Vertex) {
        self.move_impl(r1, false);
    }

    fn move_impl(&mut self, r1: Vertex, oldest: bool) {
        let r0 = self.tree.root().expect("rooted");
        if r1 == r0 {
            return;
        }
        if self.tree.contains(r1) {
            if self.tree.is_tree_edge(r0, r1) {
                // traversing an existing edge: the doubled-edge cycle consists
                // of the old copy only; it is removed and the fresh copy keeps
                // the edge in place with the temporary label
                let e = ekey(r0, r1);
                let m = self.labels[&e];
                self.tree.reroot(r1);
                self.relabel(m, e);
            } else {
                // a genuine cycle: tree path r0..r1 plus the new edge
                let path = self.tree.tree_path(r0, r1);
                let mut pick: Option<(u32, (Vertex, Vertex))> = None;
                for w in path.windows(2) {
                    let e = ekey(w[0], w[1]);
                    let l = self.labels[&e];
                    let better = match pick {
                        None => true,
                        Some((best, _)) => {
                            if oldest {
                                l > best
                            } else {
                                l < best
                            }
                        }
                    };
                    if better {
                        pick = Some((l, e));
                    }
                }
                let (m, edge) = pick.expect("cycle has tree edges");
                self.tree.swap_cycle_edge(r0, r1, edge);
                self.labels.remove(&edge);
                let new_edge = ekey(r0, r1);
                self.tree.reroot(r1);
                self.relabel(m, new_edge);
            }
        } else {
            // new vertex: drop a pendant edge (the oldest chain always drops
            // the maximal label n-1, which is necessarily pendant; the
            // youngest chain drops the minimal label among pendant edges)
            let (m, edge, leaf) = if oldest {
                let edge = self.by_label[self.by_label.len() - 1];
                let leaf = self.pendant_end(edge);
                ((self.by_label.len() - 1) as u32, edge, leaf)
            } else {
                let mut pick: Option<(u32, (Vertex, Vertex), Vertex)> = None;
                for (&e, &l) in &self.labels {
                    let (a, b) = e;
                    let cand = if self.tree.is_leaf(a) {
                        Some(a)
                    } else if self.tree.is_leaf(b) {
                        Some(b)
                    } else {
                        None
                    };
                    if let Some(leaf) = cand {
                        if pick.map_or(true, |(best, _, _)| l < best) {
                            pick = Some((l, e, leaf));
                        }
                    }
                }
                pick.expect("a tree with >= 2 vertices has a pendant edge")
            };
            self.tree.attach_leaf(r0, r1);
            self.tree.detach_leaf(leaf);
            self.labels.remove(&edge);
            let new_edge = ekey(r0, r1);
            self.tree.reroot(r1);
            self.relabel(m, new_edge);
        }
    }

    fn pendant_end(&self, (a, b): (Vertex, Vertex)) -> Vertex {
        if self.tree.is_leaf(a) {
            a
        } else {
            debug_assert!(self.tree.is_leaf(b), "max-label edge must be pendant");
            b
        }
    }
}

/// One transition of the erase-oldest-edge kernel: the root walks to a
/// uniform neighbour, the created cycle (or the oldest leaf edge, for a new
/// vertex) loses its maximal-label edge, and labels shift.
pub fn eoe_step<R: Rng>(state: &mut LabelledRootedTree, rng: &mut R) {
    let r0 = state.tree.root().expect("rooted");
    let host = state.tree.host().clone();
    let r1 = host.nth_neighbor(r0, rng.gen_range(0..host.degree(r0)));
    state.eoe_move(r1);
}

/// The youngest-edge comparison chain (degenerate model; the decreasing-label
/// property is not preserved).
pub fn youngest_step<R: Rng>(state: &mut LabelledRootedTree, rng: &mut R) {
    let r0 = state.tree.root().expect("rooted");
    let host = state.tree.host().clone();
    let r1 = host.nth_neighbor(r0, rng.gen_range(0..host.degree(r0)));
    state.youngest_move(r1);
}

/// Removes the edge with the largest label; the projection of the n-chain is
/// the (n-1)-chain in distribution.
pub fn project_drop_max(state: &LabelledRootedTree) -> Result<LabelledRootedTree> {
    if state.size() < 2 {
        return Err(Error::InvalidConfig("nothing to project on a singleton".into()));
    }
    let mut out = state.clone();
    let edge = out.by_label.pop().expect("max label");
    out.labels.remove(&edge);
    let leaf = out.pendant_end(edge);
    out.tree.detach_leaf(leaf);
    Ok(out)
}

/// How the initial walk position is drawn.
#[derive(Debug, Clone, Copy)]
pub enum PioneerStart {
    /// Exact draw from the walk's stationary law (degree-proportional).
    Stationary,
    At(Vertex),
}

/// Runs a simple random walk to the first time n distinct vertices are seen
/// and returns the first-entrance tree with discovery-order labels: the edge
/// discovering the k-th vertex is labelled k-1.
pub fn pioneer_tree<R: Rng>(
    host: &Arc<Graph>,
    n: usize,
    start: PioneerStart,
    rng: &mut R,
) -> Result<LabelledRootedTree> {
    if !host.is_simple() {
        return Err(Error::NotSimple);
    }
    if n < 1 || n > host.num_vertices() {
        return Err(Error::InvalidConfig("n out of range".into()));
    }
    let w0 = match start {
        PioneerStart::At(v) => v,
        PioneerStart::Stationary => {
            // a uniform directed-edge slot lands on v with probability
            // deg(v)/sum(deg): exactly the stationary law
            let slot = rng.gen_range(0..host.directed_edge_count());
            slot_owner(host, slot)
        }
    };
    let mut tree = EmbeddedTree::singleton(host.clone(), w0, true);
    let mut labels = HashMap::new();
    let mut cur = w0;
    let mut discovered = 1usize;
    let cap = 1_000_000 + 100 * host.num_vertices() as u64 * host.num_edges() as u64;
    let mut steps = 0u64;
    while discovered < n {
        let next = host.nth_neighbor(cur, rng.gen_range(0..host.degree(cur)));
        if !tree.contains(next) {
            tree.attach_leaf(cur, next);
            discovered += 1;
            labels.insert(ekey(cur, next), discovered as u32 - 1);
        }
        cur = next;
        steps += 1;
        if steps > cap {
            return Err(Error::ResourceCap("pioneer walk step cap".into()));
        }
    }
    LabelledRootedTree::new(tree, labels)
}

/// Pioneer tree read off a given walk prefix (the first n distinct vertices
/// must appear in the path).
pub fn pioneer_tree_from_walk(
    host: &Arc<Graph>,
    path: &[Vertex],
    n: usize,
) -> Result<LabelledRootedTree> {
    if path.is_empty() {
        return Err(Error::InvalidConfig("empty walk".into()));
    }
    let mut tree = EmbeddedTree::singleton(host.clone(), path[0], true);
    let mut labels = HashMap::new();
    let mut discovered = 1usize;
    for k in 1..path.len() {
        if discovered == n {
            break;
        }
        let (prev, cur) = (path[k - 1], path[k]);
        if !tree.contains(cur) {
            tree.attach_leaf(prev, cur);
            discovered += 1;
            labels.insert(ekey(prev, cur), discovered as u32 - 1);
        }
    }
    if discovered < n {
        return Err(Error::InvalidConfig("walk visits fewer than n vertices".into()));
    }
    LabelledRootedTree::new(tree, labels)
}

/// All valid labelled rooted n-trees of a host, by brute force.
pub fn all_labelled_states(g: &Arc<Graph>, n: usize) -> Result<Vec<LabelledRootedTree>> {
    let mut out = Vec::new();
    for ids in crate::enumeration::enumerate_subtrees(g, n, None)? {
        let edges: Vec<(Vertex, Vertex)> =
            ids.iter().map(|&i| g.edge_list()[i as usize]).collect();
        let mut verts: Vec<Vertex> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        verts.sort_unstable();
        verts.dedup();
        if verts.is_empty() {
            verts.push(0); // n == 1 on a single-vertex enumeration
        }
        for &root in &verts {
            let tree = EmbeddedTree::from_edges(g.clone(), Some(root), root, &edges)?;
            let mut perm: Vec<u32> = (1..n as u32).collect();
            permute_labels(&tree, &edges, &mut perm, 0, &mut out);
        }
    }
    Ok(out)
}

fn permute_labels(
    tree: &EmbeddedTree,
    edges: &[(Vertex, Vertex)],
    perm: &mut Vec<u32>,
    k: usize,
    out: &mut Vec<LabelledRootedTree>,
) {
    if k == perm.len() {
        let labels: HashMap<(Vertex, Vertex), u32> = edges
            .iter()
            .zip(perm.iter())
            .map(|(&(u, v), &l)| (ekey(u, v), l))
            .collect();
        if let Ok(state) = LabelledRootedTree::new(tree.clone(), labels) {
            if state.validate_labels().is_ok() {
                out.push(state);
            }
        }
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute_labels(tree, edges, perm, k + 1, out);
        perm.swap(k, i);
    }
}

/// Exact transition matrix of the erase-oldest-edge chain over all labelled
/// rooted n-trees, in rational arithmetic.
pub fn eoe_matrix_exact(
    g: &Arc<Graph>,
    n: usize,
) -> Result<(Vec<LabelledKey>, Vec<Vec<BigRational>>)> {
    let states = all_labelled_states(g, n)?;
    let keys: Vec<LabelledKey> = states.iter().map(|s| s.key()).collect();
    let index: HashMap<LabelledKey, usize> =
        keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    let m = states.len();
    let mut matrix = vec![vec![BigRational::zero(); m]; m];
    for (i, s) in states.iter().enumerate() {
        let r0 = s.tree.root().unwrap();
        let d = g.degree(r0) as i64;
        for nb in g.neighbors_of(r0) {
            let mut t = s.clone();
            t.eoe_move(*nb);
            t.validate_labels()?;
            let j = *index
                .get(&t.key())
                .ok_or_else(|| Error::Domain("EOE left the labelled state space".into()))?;
            matrix[i][j] += BigRational::new(BigInt::from(1), BigInt::from(d));
        }
    }
    Ok((keys, matrix))
}

/// Exact law of the pioneer n-tree under a stationary walk start, by solving
/// the absorbing chain over (partial labelled tree, walk position) states.
pub fn pioneer_law_exact(g: &Arc<Graph>, n: usize) -> Result<HashMap<LabelledKey, BigRational>> {
    #[derive(Clone, PartialEq, Eq, Hash)]
    struct Partial {
        key: LabelledKey,
        pos: Vertex,
    }
    // transient states, BFS expansion
    let deg_total: i64 = (0..g.num_vertices() as Vertex)
        .map(|v| g.degree(v) as i64)
        .sum();
    let mut states: Vec<Partial> = Vec::new();
    let mut index: HashMap<Partial, usize> = HashMap::new();
    let mut initial: Vec<BigRational> = Vec::new();
    for v in 0..g.num_vertices() as Vertex {
        let p = Partial { key: (v, vec![]), pos: v };
        index.insert(p.clone(), states.len());
        states.push(p);
        initial.push(BigRational::new(BigInt::from(g.degree(v) as i64), BigInt::from(deg_total)));
    }
    // expansion: state -> list of (target transient | absorbed tree, prob)
    let mut frontier = 0usize;
    let mut transitions: Vec<Vec<(usize, BigRational)>> = Vec::new();
    let mut absorbed: Vec<Vec<(LabelledKey, BigRational)>> = Vec::new();
    while frontier < states.len() {
        let s = states[frontier].clone();
        let mut ts = Vec::new();
        let mut abs = Vec::new();
        let (root, ref edges) = s.key;
        let verts: Vec<Vertex> = {
            let mut v: Vec<Vertex> =
                edges.iter().flat_map(|&(a, b, _)| [a, b]).collect();
            v.push(root);
            v.sort_unstable();
            v.dedup();
            v
        };
        let k = verts.len();
        let d = g.degree(s.pos) as i64;
        for nb in g.neighbors_of(s.pos) {
            let p = BigRational::new(BigInt::from(1), BigInt::from(d));
            if verts.contains(nb) {
                let t = Partial { key: s.key.clone(), pos: *nb };
                let j = *index.entry(t.clone()).or_insert_with(|| {
                    states.push(t);
                    initial.push(BigRational::zero());
                    states.len() - 1
                });
                ts.push((j, p));
            } else {
                let mut new_edges = edges.clone();
                let (a, b) = ekey(s.pos, *nb);
                new_edges.push((a, b, k as u32));
                new_edges.sort_unstable();
                let key2: LabelledKey = (root, new_edges);
                if k + 1 == n {
                    abs.push((key2, p));
                } else {
                    let t = Partial { key: key2, pos: *nb };
                    let j = *index.entry(t.clone()).or_insert_with(|| {
                        states.push(t);
                        initial.push(BigRational::zero());
                        states.len() - 1
                    });
                    ts.push((j, p));
                }
            }
        }
        transitions.push(ts);
        absorbed.push(abs);
        frontier += 1;
    }
    // occupancy x solves x = initial + x Q, i.e. (I - Q^T) x^T = initial^T
    let m = states.len();
    let mut a = vec![vec![BigRational::zero(); m]; m];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = BigRational::new(BigInt::from(1), BigInt::from(1));
    }
    for (i, ts) in transitions.iter().enumerate() {
        for (j, p) in ts {
            a[*j][i] -= p;
        }
    }
    let x = solve_linear(a, initial)?;
    let mut law: HashMap<LabelledKey, BigRational> = HashMap::new();
    for (i, abs) in absorbed.iter().enumerate() {
        for (key, p) in abs {
            *law.entry(key.clone()).or_insert_with(BigRational::zero) += &x[i] * p;
        }
    }
    Ok(law)
}

fn slot_owner(g: &Graph, slot: usize) -> Vertex {
    // binary search over the CSR offsets
    let mut lo = 0usize;
    let mut hi = g.num_vertices();
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if g.neighbors_upto(mid) <= slot {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo as Vertex
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GeneratorSpec;
    use num_traits::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pioneer_basics() {
        let g = Graph::generate(GeneratorSpec::Torus(4)).unwrap().shared();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let t = pioneer_tree(&g, 1, PioneerStart::At(3), &mut rng).unwrap();
        assert_eq!(t.size(), 1);
        let t = pioneer_tree(&g, 6, PioneerStart::Stationary, &mut rng).unwrap();
        assert_eq!(t.size(), 6);
        t.validate_labels().unwrap();
        t.tree.validate().unwrap();
    }

    #[test]
    fn pioneer_nesting_along_one_walk() {
        let g = Graph::generate(GeneratorSpec::Torus(4)).unwrap().shared();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let walk = crate::spanning::WalkPath::random(&g, 5, 400, &mut rng);
        for n in 2..=8 {
            let small = pioneer_tree_from_walk(&g, &walk.0, n).unwrap();
            let big = pioneer_tree_from_walk(&g, &walk.0, n + 1).unwrap();
            // PRT_n is PRT_{n+1} minus its largest label, with the same labels
            let proj = project_drop_max(&big).unwrap();
            assert_eq!(small.key(), proj.key());
        }
    }

    #[test]
    fn eoe_preserves_labels_and_size() {
        let g = Graph::generate(GeneratorSpec::Torus(4)).unwrap().shared();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut state = pioneer_tree(&g, 7, PioneerStart::Stationary, &mut rng).unwrap();
        for _ in 0..10_000 {
            eoe_step(&mut state, &mut rng);
        }
        assert_eq!(state.size(), 7);
        state.tree.validate().unwrap();
        state.validate_labels().unwrap();
    }

    #[test]
    fn youngest_preserves_size_and_bijection() {
        let g = Graph::generate(GeneratorSpec::Torus(4)).unwrap().shared();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut state = pioneer_tree(&g, 7, PioneerStart::Stationary, &mut rng).unwrap();
        for _ in 0..5_000 {
            youngest_step(&mut state, &mut rng);
            assert_eq!(state.size(), 7);
        }
        state.tree.validate().unwrap();
        // labels remain a bijection onto 1..n-1 even though the decreasing
        // property is lost by this variant
        let mut seen: Vec<u32> = state.labels.values().copied().collect();
        seen.sort_unstable();
        assert_eq!(seen, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn eoe_exact_stationarity_on_k3() {
        let g = Graph::generate(GeneratorSpec::Complete(3)).unwrap().shared();
        let (keys, matrix) = eoe_matrix_exact(&g, 3).unwrap();
        assert_eq!(keys.len(), 12); // 3 spanning paths x (2 end roots + 2 centre labellings)
        let pi = crate::exhaustive::stationary_of(&matrix).unwrap();
        let law = pioneer_law_exact(&g, 3).unwrap();
        let total: BigRational = law.values().fold(BigRational::zero(), |a, b| a + b);
        assert!(total.is_one(), "absorption law must be a distribution");
        for (i, key) in keys.iter().enumerate() {
            assert_eq!(pi[i], law[key], "state {key:?}");
        }
    }
}
