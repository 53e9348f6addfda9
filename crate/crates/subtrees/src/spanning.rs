//! Uniform spanning tree samplers and the walk-to-tree constructions they rest
//! on: first-entrance and last-exit trees, Aldous–Broder, Wilson's algorithm
//! and cycle popping.
//!
//! All samplers use the simple random walk kernel (uniform neighbour), under
//! which the output law is uniform over spanning trees rooted at the start.

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, NO_VERTEX};
use crate::tree::EmbeddedTree;
use rand::Rng;
use std::sync::Arc;

/// A walk on the host graph: consecutive vertices are adjacent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkPath(pub Vec<Vertex>);

impl WalkPath {
    pub fn reversed(&self) -> WalkPath {
        let mut v = self.0.clone();
        v.reverse();
        WalkPath(v)
    }

    /// Simple random walk of `steps` steps from `start`.
    pub fn random<R: Rng>(g: &Graph, start: Vertex, steps: usize, rng: &mut R) -> WalkPath {
        let mut v = Vec::with_capacity(steps + 1);
        v.push(start);
        let mut cur = start;
        for _ in 0..steps {
            let d = g.degree(cur);
            cur = g.nth_neighbor(cur, rng.gen_range(0..d));
            v.push(cur);
        }
        WalkPath(v)
    }
}

/// Rooted tree whose edges are the first-entrance edges of the path: for every
/// vertex other than the start, the step that discovered it. Rooted at the
/// first vertex of the path.
pub fn first_entrance_tree(host: Arc<Graph>, path: &WalkPath) -> Result<EmbeddedTree> {
    let w = &path.0;
    if w.is_empty() {
        return Err(Error::InvalidConfig("empty path".into()));
    }
    let mut t = EmbeddedTree::singleton(host, w[0], true);
    for k in 1..w.len() {
        if !t.contains(w[k]) {
            t.attach_leaf(w[k - 1], w[k]);
        }
    }
    Ok(t)
}

/// Rooted tree of last-exit edges, rooted at the final vertex: built by
/// sweeping the path, at each step dropping the current vertex's outgoing edge
/// and re-rooting at the new position.
pub fn last_exit_tree(host: Arc<Graph>, path: &WalkPath) -> Result<EmbeddedTree> {
    let w = &path.0;
    if w.is_empty() {
        return Err(Error::InvalidConfig("empty path".into()));
    }
    let mut t = EmbeddedTree::singleton(host, w[0], true);
    for k in 1..w.len() {
        let (prev, cur) = (w[k - 1], w[k]);
        if prev == cur {
            continue;
        }
        if t.contains(cur) {
            if t.parent_of(cur) == prev || t.parent_of(prev) == cur {
                // the traversed edge is already present; just move the root
                t.reroot(cur);
            } else {
                // cur's outgoing edge (toward the old root prev) is replaced
                // by the new edge (prev, cur)
                t.swap_cycle_edge(prev, cur, (cur, t.parent_of(cur)));
                t.reroot(cur);
            }
        } else {
            t.attach_leaf(prev, cur);
            t.reroot(cur);
        }
    }
    Ok(t)
}

/// Aldous–Broder: walk from `root` until every vertex has been seen; the
/// first-entrance tree is then a uniform spanning tree rooted at `root`.
pub fn aldous_broder<R: Rng>(host: &Arc<Graph>, root: Vertex, rng: &mut R) -> Result<EmbeddedTree> {
    require_connected_simple(host)?;
    let n = host.num_vertices();
    let mut t = EmbeddedTree::singleton(host.clone(), root, true);
    let mut cur = root;
    let cap = step_cap(host);
    let mut steps = 0u64;
    while t.size() < n {
        let d = host.degree(cur);
        let next = host.nth_neighbor(cur, rng.gen_range(0..d));
        if !t.contains(next) {
            t.attach_leaf(cur, next);
        }
        cur = next;
        steps += 1;
        if steps > cap {
            return Err(Error::ResourceCap(format!(
                "random walk did not cover the graph within {cap} steps"
            )));
        }
    }
    Ok(t)
}

/// Wilson's algorithm: loop-erased random walks from each vertex in ascending
/// id order, stitched onto the tree grown from `root`.
pub fn wilson<R: Rng>(host: &Arc<Graph>, root: Vertex, rng: &mut R) -> Result<EmbeddedTree> {
    require_connected_simple(host)?;
    let n = host.num_vertices();
    let mut t = EmbeddedTree::singleton(host.clone(), root, true);
    let mut next = vec![NO_VERTEX; n];
    let cap = step_cap(host);
    for start in 0..n as Vertex {
        if t.contains(start) {
            continue;
        }
        // random walk recording successors; retracing afterwards erases loops
        let mut cur = start;
        let mut steps = 0u64;
        while !t.contains(cur) {
            let d = host.degree(cur);
            let nxt = host.nth_neighbor(cur, rng.gen_range(0..d));
            next[cur as usize] = nxt;
            cur = nxt;
            steps += 1;
            if steps > cap {
                return Err(Error::ResourceCap(format!(
                    "loop-erased walk did not reach the tree within {cap} steps"
                )));
            }
        }
        // attach the loop-erased path in tree-to-start order
        let mut path = Vec::new();
        let mut v = start;
        while !t.contains(v) {
            path.push(v);
            v = next[v as usize];
        }
        let mut at = v;
        for &w in path.iter().rev() {
            t.attach_leaf(at, w);
            at = w;
        }
    }
    Ok(t)
}

/// Cycle popping: every non-root vertex draws a uniform outgoing edge; while
/// the orientation contains a directed cycle, the cycle through the lowest-id
/// vertex on any cycle is popped (its arrows are resampled). The surviving
/// orientation is a spanning tree with the same law as Wilson's output.
pub fn cycle_popping<R: Rng>(host: &Arc<Graph>, root: Vertex, rng: &mut R) -> Result<EmbeddedTree> {
    require_connected_simple(host)?;
    let n = host.num_vertices();
    let mut arrow = vec![NO_VERTEX; n];
    for v in 0..n as Vertex {
        if v != root {
            let d = host.degree(v);
            arrow[v as usize] = host.nth_neighbor(v, rng.gen_range(0..d));
        }
    }
    // state: 0 unknown, 1 on current probe, 2 settled (leads to root)
    let mut state = vec![0u8; n];
    state[root as usize] = 2;
    let cap = step_cap(host);
    let mut ops = 0u64;
    for v in 0..n as Vertex {
        loop {
            // probe from v
            let mut path = Vec::new();
            let mut cur = v;
            while state[cur as usize] == 0 {
                state[cur as usize] = 1;
                path.push(cur);
                cur = arrow[cur as usize];
                ops += 1;
                if ops > cap {
                    return Err(Error::ResourceCap("cycle popping step cap".into()));
                }
            }
            if state[cur as usize] == 2 {
                for &w in &path {
                    state[w as usize] = 2;
                }
                break;
            }
            // hit the probe itself: pop the cycle through `cur`
            let cycle_start = path.iter().position(|&w| w == cur).expect("on probe");
            for &w in &path[cycle_start..] {
                let d = host.degree(w);
                arrow[w as usize] = host.nth_neighbor(w, rng.gen_range(0..d));
            }
            for &w in &path {
                state[w as usize] = 0;
            }
        }
    }
    let edges: Vec<(Vertex, Vertex)> = (0..n as Vertex)
        .filter(|&v| v != root)
        .map(|v| (v, arrow[v as usize]))
        .collect();
    EmbeddedTree::from_edges(host.clone(), Some(root), root, &edges)
}

fn require_connected_simple(g: &Graph) -> Result<()> {
    if !g.is_simple() {
        return Err(Error::NotSimple);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

fn step_cap(g: &Graph) -> u64 {
    // generous multiple of the cover-time scale |V||E|
    1_000_000 + 100 * g.num_vertices() as u64 * g.num_edges() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GeneratorSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_entrance_examples() {
        let k3 = Graph::generate(GeneratorSpec::Complete(3)).unwrap().shared();
        let t = first_entrance_tree(k3.clone(), &WalkPath(vec![0])).unwrap();
        assert_eq!(t.size(), 1);
        assert_eq!(t.root(), Some(0));

        // path (a,b,a,c) -> edges (b,a),(c,a) rooted at a
        let t = first_entrance_tree(k3, &WalkPath(vec![0, 1, 0, 2])).unwrap();
        assert_eq!(t.root(), Some(0));
        assert_eq!(t.edge_set(), vec![(0, 1), (0, 2)]);
        assert_eq!(t.parent_of(1), 0);
        assert_eq!(t.parent_of(2), 0);
    }

    #[test]
    fn last_exit_examples() {
        let k3 = Graph::generate(GeneratorSpec::Complete(3)).unwrap().shared();
        let t = last_exit_tree(k3.clone(), &WalkPath(vec![0])).unwrap();
        assert_eq!(t.size(), 1);

        // path (a,b,a,c): edges (b,a),(a,c) rooted at c
        let t = last_exit_tree(k3, &WalkPath(vec![0, 1, 0, 2])).unwrap();
        assert_eq!(t.root(), Some(2));
        assert_eq!(t.edge_set(), vec![(0, 1), (0, 2)]);
        assert_eq!(t.parent_of(0), 2);
        assert_eq!(t.parent_of(1), 0);
    }

    #[test]
    fn fet_equals_let_of_reversed_path() {
        let g = Graph::generate(GeneratorSpec::Torus(4)).unwrap().shared();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let start = rng.gen_range(0..16);
            let path = WalkPath::random(&g, start, 50, &mut rng);
            let fet = first_entrance_tree(g.clone(), &path).unwrap();
            let let_ = last_exit_tree(g.clone(), &path.reversed()).unwrap();
            assert_eq!(fet.root(), let_.root());
            assert_eq!(fet.edge_set(), let_.edge_set());
            fet.validate().unwrap();
            let_.validate().unwrap();
            // orientation agrees too
            for &m in fet.members() {
                assert_eq!(fet.parent_of(m), let_.parent_of(m));
            }
        }
    }

    #[test]
    fn samplers_span_and_validate() {
        let g = Graph::generate(GeneratorSpec::Grid(3, 3)).unwrap().shared();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            for t in [
                aldous_broder(&g, 4, &mut rng).unwrap(),
                wilson(&g, 4, &mut rng).unwrap(),
                cycle_popping(&g, 4, &mut rng).unwrap(),
            ] {
                assert_eq!(t.size(), 9);
                t.validate().unwrap();
            }
        }
    }

    #[test]
    fn path_graph_unique_tree() {
        let g = Graph::generate(GeneratorSpec::Line(6)).unwrap().shared();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let expect: Vec<(Vertex, Vertex)> = (0..5).map(|i| (i, i + 1)).collect();
        assert_eq!(aldous_broder(&g, 0, &mut rng).unwrap().edge_set(), expect);
        assert_eq!(wilson(&g, 2, &mut rng).unwrap().edge_set(), expect);
        assert_eq!(cycle_popping(&g, 5, &mut rng).unwrap().edge_set(), expect);
    }

    #[test]
    fn multigraph_rejected() {
        let g = Graph::generate(GeneratorSpec::Torus(2)).unwrap().shared();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(wilson(&g, 0, &mut rng), Err(Error::NotSimple)));
    }
}
