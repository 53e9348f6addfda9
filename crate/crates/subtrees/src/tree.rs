//! Mutable subtree of a host graph with O(1) membership, uniform-member and
//! uniform-leaf draws, plus the edge-exchange and cycle-walk primitives the
//! Markov kernels are built from.

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, NO_VERTEX};
use std::sync::Arc;

/// A subtree of a host graph, stored as parent pointers toward an anchor
/// vertex. `root` is the semantic root: when set, it is never reported as a
/// leaf. Unrooted trees still keep an internal anchor for orientation; any
/// degree-1 member (including the anchor) is then a leaf.
#[derive(Clone)]
pub struct EmbeddedTree {
    host: Arc<Graph>,
    root: Option<Vertex>,
    anchor: Vertex,
    parent: Vec<Vertex>,
    child_count: Vec<u32>,
    in_tree: Vec<u64>,
    members: Vec<Vertex>,
    member_pos: Vec<u32>,
    leaves: Vec<Vertex>,
    leaf_pos: Vec<u32>,
    stamp: Vec<u32>,
    stamp_gen: u32,
}

const NO_POS: u32 = u32::MAX;

impl EmbeddedTree {
    /// Tree reduced to a single vertex.
    pub fn singleton(host: Arc<Graph>, v: Vertex, rooted: bool) -> EmbeddedTree {
        let n = host.num_vertices();
        let mut t = EmbeddedTree {
            host,
            root: if rooted { Some(v) } else { None },
            anchor: v,
            parent: vec![NO_VERTEX; n],
            child_count: vec![0; n],
            in_tree: vec![0; n.div_ceil(64)],
            members: Vec::new(),
            member_pos: vec![NO_POS; n],
            leaves: Vec::new(),
            leaf_pos: vec![NO_POS; n],
            stamp: vec![0; n],
            stamp_gen: 0,
        };
        t.insert_member(v);
        t
    }

    /// Builds a tree from an explicit edge list. Fails if the edges do not
    /// form a tree in the host containing `anchor_hint` (or any vertex when
    /// the list is empty and `anchor_hint` is given for a singleton).
    pub fn from_edges(
        host: Arc<Graph>,
        root: Option<Vertex>,
        anchor_hint: Vertex,
        edges: &[(Vertex, Vertex)],
    ) -> Result<EmbeddedTree> {
        let anchor = root.unwrap_or(anchor_hint);
        let mut t = EmbeddedTree::singleton(host, anchor, root.is_some());
        if edges.is_empty() {
            return Ok(t);
        }
        // Repeatedly attach edges adjacent to the current tree.
        let mut pending: Vec<(Vertex, Vertex)> = edges.to_vec();
        loop {
            let before = pending.len();
            pending.retain(|&(u, v)| {
                let (iu, iv) = (t.contains(u), t.contains(v));
                if iu && iv {
                    // would close a cycle, or duplicate
                    false
                } else if iu {
                    t.attach_leaf(u, v);
                    false
                } else if iv {
                    t.attach_leaf(v, u);
                    false
                } else {
                    true
                }
            });
            if pending.is_empty() {
                break;
            }
            if pending.len() == before {
                return Err(Error::NotATree);
            }
        }
        if t.size() != edges.len() + 1 {
            return Err(Error::NotATree);
        }
        Ok(t)
    }

    pub fn host(&self) -> &Arc<Graph> {
        &self.host
    }

    pub fn root(&self) -> Option<Vertex> {
        self.root
    }

    pub fn anchor(&self) -> Vertex {
        self.anchor
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        self.in_tree[v as usize >> 6] >> (v & 63) & 1 == 1
    }

    /// Parent of `v` in the anchor orientation (`NO_VERTEX` for the anchor).
    #[inline]
    pub fn parent_of(&self, v: Vertex) -> Vertex {
        self.parent[v as usize]
    }

    #[inline]
    pub fn tree_degree(&self, v: Vertex) -> u32 {
        self.child_count[v as usize] + (self.parent[v as usize] != NO_VERTEX) as u32
    }

    #[inline]
    pub fn is_tree_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.contains(u)
            && self.contains(v)
            && (self.parent[u as usize] == v || self.parent[v as usize] == u)
    }

    /// True when `v` is a current leaf (degree 1; a rooted root never counts).
    #[inline]
    pub fn is_leaf(&self, v: Vertex) -> bool {
        self.contains(v) && self.leaf_pos[v as usize] != NO_POS
    }

    pub fn members(&self) -> &[Vertex] {
        &self.members
    }

    pub fn leaves(&self) -> &[Vertex] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    #[inline]
    pub fn nth_member(&self, i: usize) -> Vertex {
        self.members[i]
    }

    #[inline]
    pub fn nth_leaf(&self, i: usize) -> Vertex {
        self.leaves[i]
    }

    /// Edges as `(child, parent)` pairs in the anchor orientation.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.members
            .iter()
            .filter(|&&v| self.parent[v as usize] != NO_VERTEX)
            .map(|&v| (v, self.parent[v as usize]))
    }

    /// Canonical sorted edge set with `u <= v`, usable as a classification key.
    pub fn edge_set(&self) -> Vec<(Vertex, Vertex)> {
        let mut out: Vec<(Vertex, Vertex)> = self
            .edges()
            .map(|(u, v)| if u <= v { (u, v) } else { (v, u) })
            .collect();
        out.sort_unstable();
        out
    }

    fn insert_member(&mut self, v: Vertex) {
        self.in_tree[v as usize >> 6] |= 1 << (v & 63);
        self.member_pos[v as usize] = self.members.len() as u32;
        self.members.push(v);
        self.refresh_leaf(v);
    }

    fn refresh_leaf(&mut self, v: Vertex) {
        let should = self.contains(v) && self.tree_degree(v) == 1 && Some(v) != self.root;
        let pos = self.leaf_pos[v as usize];
        if should && pos == NO_POS {
            self.leaf_pos[v as usize] = self.leaves.len() as u32;
            self.leaves.push(v);
        } else if !should && pos != NO_POS {
            let last = *self.leaves.last().unwrap();
            self.leaves.swap_remove(pos as usize);
            if last != v {
                self.leaf_pos[last as usize] = pos;
            }
            self.leaf_pos[v as usize] = NO_POS;
        }
    }

    /// Adds `child` (not in the tree) as a new leaf under `at` (in the tree).
    pub fn attach_leaf(&mut self, at: Vertex, child: Vertex) {
        debug_assert!(self.contains(at) && !self.contains(child));
        self.parent[child as usize] = at;
        self.child_count[at as usize] += 1;
        self.insert_member(child);
        self.refresh_leaf(at);
    }

    /// Removes a degree-1 member. The anchor is re-anchored to its only
    /// neighbour first when required. The semantic root must not be removed.
    pub fn detach_leaf(&mut self, v: Vertex) {
        debug_assert!(self.contains(v) && self.tree_degree(v) <= 1 && Some(v) != self.root);
        if v == self.anchor {
            debug_assert!(self.size() > 1);
            // v has exactly one child; make it the new anchor.
            let child = *self
                .members
                .iter()
                .find(|&&w| self.parent[w as usize] == v)
                .expect("anchor leaf must have a child");
            self.parent[child as usize] = NO_VERTEX;
            self.child_count[v as usize] -= 1;
            self.parent[v as usize] = child;
            self.child_count[child as usize] += 1;
            self.anchor = child;
        }
        let p = self.parent[v as usize];
        self.parent[v as usize] = NO_VERTEX;
        if p != NO_VERTEX {
            self.child_count[p as usize] -= 1;
        }
        self.in_tree[v as usize >> 6] &= !(1 << (v & 63));
        let pos = self.member_pos[v as usize];
        let last = *self.members.last().unwrap();
        self.members.swap_remove(pos as usize);
        if last != v {
            self.member_pos[last as usize] = pos;
        }
        self.member_pos[v as usize] = NO_POS;
        self.refresh_leaf(v);
        if p != NO_VERTEX {
            self.refresh_leaf(p);
        }
    }

    /// Re-orients parent pointers so that `v` becomes the anchor. For rooted
    /// trees the semantic root moves with the anchor.
    pub fn reroot(&mut self, v: Vertex) {
        debug_assert!(self.contains(v));
        if v == self.anchor {
            if self.root.is_some() {
                self.root = Some(v);
            }
            return;
        }
        self.make_parentless(v);
        self.anchor = v;
        if self.root.is_some() {
            let old = self.root.replace(v);
            if let Some(r) = old {
                self.refresh_leaf(r);
            }
            self.refresh_leaf(v);
        }
    }

    /// Reverses parent pointers from `v` up to its component's parentless end.
    /// Every vertex on the path keeps its degree, so leaf bookkeeping is
    /// untouched.
    fn make_parentless(&mut self, v: Vertex) {
        let mut prev = NO_VERTEX;
        let mut cur = v;
        while cur != NO_VERTEX {
            let next = self.parent[cur as usize];
            if next != NO_VERTEX {
                self.child_count[next as usize] -= 1;
            }
            self.parent[cur as usize] = prev;
            if prev != NO_VERTEX {
                self.child_count[prev as usize] += 1;
            }
            prev = cur;
            cur = next;
        }
    }

    /// The parentless end reached by walking up from `u`.
    fn parentless_end(&self, u: Vertex) -> Vertex {
        let mut cur = u;
        while self.parent[cur as usize] != NO_VERTEX {
            cur = self.parent[cur as usize];
        }
        cur
    }

    /// Path of vertices from `u` up to the anchor.
    fn path_to_anchor(&self, u: Vertex) -> Vec<Vertex> {
        let mut path = vec![u];
        let mut cur = u;
        while self.parent[cur as usize] != NO_VERTEX {
            cur = self.parent[cur as usize];
            path.push(cur);
        }
        path
    }

    /// Vertices of the tree path from `u` to `v` (inclusive).
    pub fn tree_path(&mut self, u: Vertex, v: Vertex) -> Vec<Vertex> {
        debug_assert!(self.contains(u) && self.contains(v));
        self.stamp_gen = self.stamp_gen.wrapping_add(1);
        if self.stamp_gen == 0 {
            self.stamp.fill(0);
            self.stamp_gen = 1;
        }
        let gen = self.stamp_gen;
        let mut cur = u;
        loop {
            self.stamp[cur as usize] = gen;
            if self.parent[cur as usize] == NO_VERTEX {
                break;
            }
            cur = self.parent[cur as usize];
        }
        // walk from v until a stamped vertex: that is the meeting point
        let mut down = vec![v];
        let mut w = v;
        while self.stamp[w as usize] != gen {
            w = self.parent[w as usize];
            down.push(w);
        }
        let lca = w;
        let mut up = Vec::new();
        let mut c = u;
        while c != lca {
            up.push(c);
            c = self.parent[c as usize];
        }
        up.push(lca);
        // up = u..lca ; down = v..lca. Full path: u..lca..v
        while let Some(&x) = down.last() {
            if x == lca {
                down.pop();
            } else {
                break;
            }
        }
        down.reverse();
        up.extend(down);
        up
    }

    /// The unique cycle of `t ∪ {e}` for an edge `e = {u, v}` of the host with
    /// both endpoints in the tree, as the list of its edges including `e`.
    pub fn cycle_walk(&mut self, u: Vertex, v: Vertex) -> Result<Vec<(Vertex, Vertex)>> {
        if !self.contains(u) || !self.contains(v) {
            return Err(Error::NoCycle);
        }
        let path = self.tree_path(u, v);
        let mut cyc: Vec<(Vertex, Vertex)> = path.windows(2).map(|w| (w[0], w[1])).collect();
        cyc.push((v, u));
        Ok(cyc)
    }

    /// The edge-exchange map: replaces the edge set by `E ∪ {e} \ {e'}` when
    /// that set is again a tree with the same number of vertices, and leaves
    /// the tree unchanged otherwise. Returns whether the tree changed.
    pub fn try_exchange(&mut self, e: (Vertex, Vertex), f: (Vertex, Vertex)) -> bool {
        let same = |a: (Vertex, Vertex), b: (Vertex, Vertex)| {
            (a.0 == b.0 && a.1 == b.1) || (a.0 == b.1 && a.1 == b.0)
        };
        if same(e, f) {
            return false;
        }
        let (u1, u2) = e;
        let in1 = self.contains(u1);
        let in2 = self.contains(u2);
        if !in1 && !in2 {
            return false;
        }
        if in1 && in2 {
            if self.is_tree_edge(u1, u2) {
                // adding changes nothing; removing f would shrink the tree
                return false;
            }
            // e closes a cycle; f must lie on it.
            let path = self.tree_path(u1, u2);
            let on_path = path.windows(2).any(|w| same((w[0], w[1]), f));
            if !on_path {
                return false;
            }
            self.swap_cycle_edge(u1, u2, f);
            return true;
        }
        // Exactly one endpoint inside: e would attach a new leaf; f must be a
        // pendant edge of t ∪ {e}, i.e. a tree edge whose dropped endpoint has
        // degree 1 there.
        let (at, new) = if in1 { (u1, u2) } else { (u2, u1) };
        let (f1, f2) = f;
        if !self.is_tree_edge(f1, f2) {
            return false;
        }
        let drop = if self.tree_degree(f1) == 1 && f1 != at {
            f1
        } else if self.tree_degree(f2) == 1 && f2 != at {
            f2
        } else {
            return false;
        };
        if self.root == Some(drop) {
            return false;
        }
        self.detach_leaf(drop);
        self.attach_leaf(at, new);
        true
    }

    /// Removes tree edge `f` lying on the cycle closed by `{u, v}` and inserts
    /// `{u, v}`, re-orienting parent pointers along the popped cycle. The
    /// vertex set and the anchor are unchanged.
    pub fn swap_cycle_edge(&mut self, u: Vertex, v: Vertex, f: (Vertex, Vertex)) {
        // f = (a, b) with one of them the parent of the other; cutting it
        // detaches the subtree hanging below the child side.
        let (a, b) = f;
        let child = if self.parent[a as usize] == b {
            a
        } else {
            debug_assert_eq!(self.parent[b as usize], a);
            b
        };
        let p = self.parent[child as usize];
        self.parent[child as usize] = NO_VERTEX;
        self.child_count[p as usize] -= 1;
        // Exactly one of u, v hangs below child (f lies on their tree path).
        let (inner, outer) = if self.parentless_end(u) == child {
            (u, v)
        } else {
            debug_assert_eq!(self.parentless_end(v), child);
            (v, u)
        };
        self.make_parentless(inner);
        self.parent[inner as usize] = outer;
        self.child_count[outer as usize] += 1;
        for w in [child, p, inner, outer] {
            self.refresh_leaf(w);
        }
    }

    /// Depth of `v` below the anchor.
    pub fn depth(&self, v: Vertex) -> usize {
        self.path_to_anchor(v).len() - 1
    }

    /// Tree-graph distance between two members.
    pub fn tree_distance(&mut self, u: Vertex, v: Vertex) -> usize {
        self.tree_path(u, v).len() - 1
    }

    /// Full validity check: edges exist in the host, the edge set is a tree,
    /// and the leaf set matches a recomputation. Test support.
    pub fn validate(&self) -> Result<()> {
        let edges: Vec<_> = self.edges().collect();
        if edges.len() + 1 != self.size() {
            return Err(Error::NotATree);
        }
        for &(u, v) in &edges {
            if !self.host.has_edge(u, v) {
                return Err(Error::Domain(format!("edge ({u},{v}) not in host")));
            }
        }
        if !check_tree_with_anchor(&self.host, &edges, self.anchor) {
            return Err(Error::NotATree);
        }
        // leaf set
        let mut deg = std::collections::HashMap::new();
        for &(u, v) in &edges {
            *deg.entry(u).or_insert(0u32) += 1;
            *deg.entry(v).or_insert(0u32) += 1;
        }
        for &m in &self.members {
            let d = deg.get(&m).copied().unwrap_or(0);
            if d != self.tree_degree(m) {
                return Err(Error::Domain(format!("degree mismatch at {m}")));
            }
            let should = d == 1 && Some(m) != self.root;
            if should != self.is_leaf(m) {
                return Err(Error::Domain(format!("leaf set mismatch at {m}")));
            }
        }
        Ok(())
    }
}

/// True iff `edges` form a connected acyclic subgraph of the host. An empty
/// edge set counts as a (single-vertex) tree.
pub fn check_tree(host: &Graph, edges: &[(Vertex, Vertex)]) -> bool {
    if edges.is_empty() {
        return true;
    }
    check_tree_with_anchor(host, edges, edges[0].0)
}

fn check_tree_with_anchor(host: &Graph, edges: &[(Vertex, Vertex)], start: Vertex) -> bool {
    use std::collections::HashMap;
    for &(u, v) in edges {
        if !host.has_edge(u, v) {
            return false;
        }
    }
    let mut adj: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let vertex_count = adj.len().max(1);
    if edges.len() + 1 != vertex_count {
        return false;
    }
    // BFS from start
    let mut seen = std::collections::HashSet::new();
    let mut queue = vec![start];
    seen.insert(start);
    while let Some(v) = queue.pop() {
        for &w in adj.get(&v).into_iter().flatten() {
            if seen.insert(w) {
                queue.push(w);
            }
        }
    }
    seen.len() == vertex_count
}

/// Comb-shaped tree of `w * h` vertices on a torus or grid host: the bottom
/// row is a path and every column grows upward from it. Root at the origin.
pub fn rectangle_tree(host: Arc<Graph>, w: u32, h: u32, rooted: bool) -> Result<EmbeddedTree> {
    let width = host
        .grid_dims()
        .ok_or_else(|| Error::InvalidConfig("rectangle tree needs a torus or grid host".into()))?
        .0;
    if w > width || h > host.grid_dims().unwrap().1 {
        return Err(Error::InvalidConfig("rectangle larger than host".into()));
    }
    let mut t = EmbeddedTree::singleton(host, 0, rooted);
    for c in 1..w {
        t.attach_leaf(c - 1, c);
    }
    for c in 0..w {
        for r in 1..h {
            t.attach_leaf((r - 1) * width + c, r * width + c);
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GeneratorSpec;

    fn k3() -> Arc<Graph> {
        Graph::generate(GeneratorSpec::Complete(3)).unwrap().shared()
    }

    #[test]
    fn check_tree_basics() {
        let g = k3();
        assert!(check_tree(&g, &[]));
        assert!(check_tree(&g, &[(0, 1), (1, 2)]));
        assert!(!check_tree(&g, &[(0, 1), (1, 2), (0, 2)])); // cycle
        let g4 = Graph::generate(GeneratorSpec::Line(4)).unwrap();
        assert!(!check_tree(&g4, &[(0, 1), (2, 3)])); // disconnected
    }

    #[test]
    fn exchange_cases() {
        let g = k3();
        // path 0-1-2; exchange e={0,2}, e'={0,1} -> path 1-2-0
        let mut t = EmbeddedTree::from_edges(g.clone(), None, 0, &[(0, 1), (1, 2)]).unwrap();
        assert!(t.try_exchange((0, 2), (0, 1)));
        assert_eq!(t.edge_set(), vec![(0, 2), (1, 2)]);
        t.validate().unwrap();

        // e = e' in the tree: unchanged
        let mut t = EmbeddedTree::from_edges(g.clone(), None, 0, &[(0, 1), (1, 2)]).unwrap();
        assert!(!t.try_exchange((0, 1), (0, 1)));
        assert_eq!(t.edge_set(), vec![(0, 1), (1, 2)]);

        // e disconnected from t: unchanged
        let line = Graph::generate(GeneratorSpec::Line(5)).unwrap().shared();
        let mut t = EmbeddedTree::from_edges(line, None, 0, &[(0, 1)]).unwrap();
        assert!(!t.try_exchange((3, 4), (0, 1)));
        assert_eq!(t.edge_set(), vec![(0, 1)]);
    }

    #[test]
    fn exchange_leaf_swap_size_two() {
        // t = {0,1}; add (0,2), remove (0,1): valid, drops 1
        let g = k3();
        let mut t = EmbeddedTree::from_edges(g, None, 0, &[(0, 1)]).unwrap();
        assert!(t.try_exchange((0, 2), (0, 1)));
        assert_eq!(t.edge_set(), vec![(0, 2)]);
        t.validate().unwrap();
    }

    #[test]
    fn exchange_rejects_growth() {
        // f not in the tree: E ∪ {e} \ {f} would have n+1 vertices
        let line = Graph::generate(GeneratorSpec::Line(4)).unwrap().shared();
        let mut t = EmbeddedTree::from_edges(line, None, 1, &[(1, 2)]).unwrap();
        assert!(!t.try_exchange((0, 1), (2, 3)));
        assert_eq!(t.edge_set(), vec![(1, 2)]);
    }

    #[test]
    fn cycle_walk_triangle_and_square() {
        let g = k3();
        let mut t = EmbeddedTree::from_edges(g, None, 0, &[(0, 1), (1, 2)]).unwrap();
        let cyc = t.cycle_walk(0, 2).unwrap();
        assert_eq!(cyc.len(), 3);

        let c4 = Graph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)])
            .unwrap()
            .shared();
        let mut t = EmbeddedTree::from_edges(c4, None, 0, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let cyc = t.cycle_walk(3, 0).unwrap();
        assert_eq!(cyc.len(), 4);

        // endpoint outside the tree
        let line = Graph::generate(GeneratorSpec::Line(4)).unwrap().shared();
        let mut t = EmbeddedTree::from_edges(line, None, 0, &[(0, 1)]).unwrap();
        assert!(t.cycle_walk(1, 2).is_err());
    }

    #[test]
    fn rooted_root_never_leaf() {
        let line = Graph::generate(GeneratorSpec::Line(3)).unwrap().shared();
        let t = EmbeddedTree::from_edges(line, Some(0), 0, &[(0, 1), (1, 2)]).unwrap();
        assert!(!t.is_leaf(0));
        assert!(t.is_leaf(2));
        assert_eq!(t.leaf_count(), 1);
    }

    #[test]
    fn unrooted_anchor_counts_as_leaf() {
        let line = Graph::generate(GeneratorSpec::Line(3)).unwrap().shared();
        let t = EmbeddedTree::from_edges(line, None, 0, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(t.leaf_count(), 2);
        assert!(t.is_leaf(0));
        assert!(t.is_leaf(2));
    }

    #[test]
    fn detach_anchor_leaf_reanchors() {
        let line = Graph::generate(GeneratorSpec::Line(3)).unwrap().shared();
        let mut t = EmbeddedTree::from_edges(line, None, 0, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(t.anchor(), 0);
        t.detach_leaf(0);
        t.validate().unwrap();
        assert_eq!(t.size(), 2);
        assert!(!t.contains(0));
    }

    #[test]
    fn rectangle_tree_valid() {
        let g = Graph::generate(GeneratorSpec::Torus(10)).unwrap().shared();
        let t = rectangle_tree(g, 4, 3, false).unwrap();
        assert_eq!(t.size(), 12);
        t.validate().unwrap();
    }
}
