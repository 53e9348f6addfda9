//! Random subtrees of a fixed tree: the four leaf-evaporation models with
//! their exact laws, uniform edge removal, the tree-specific subtree
//! polynomial, and an exact coupling-from-the-past sampler for the rooted
//! birth-and-death kernel (monotone under Hypothesis M).

use crate::enumeration::SubtreePolynomial;
use crate::error::{Error, Result};
use crate::graph::{Vertex, NO_VERTEX};
use crate::mcmc::variable::PqrConfig;
use crate::tree::EmbeddedTree;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use std::collections::HashMap;

fn ekey(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Monotonicity constraints making the rooted kernel monotone for inclusion:
/// p non-decreasing up to |T|-1 and r non-increasing from 2 on.
pub fn validate_hypothesis_m(cfg: &PqrConfig, num_vertices: usize) -> Result<()> {
    cfg.validate(num_vertices)?;
    for i in 2..num_vertices {
        if cfg.p[i] + 1e-12 < cfg.p[i - 1] {
            return Err(Error::InvalidConfig(format!(
                "Hypothesis M violated: p_{} > p_{i}",
                i - 1
            )));
        }
    }
    for i in 3..=num_vertices {
        if cfg.r[i] > cfg.r[i - 1] + 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "Hypothesis M violated: r_{} < r_{i}",
                i - 1
            )));
        }
    }
    Ok(())
}

/// Draws i.i.d. Uniform(0,1) weights for every edge of a tree.
pub fn uniform_edge_weights<R: Rng>(t: &EmbeddedTree, rng: &mut R) -> HashMap<(Vertex, Vertex), f64> {
    t.edges().map(|(u, v)| (ekey(u, v), rng.gen::<f64>())).collect()
}

/// k successive uniform-leaf removals (the root is never a leaf).
pub fn uniform_leaf_evaporation<R: Rng>(
    t: &EmbeddedTree,
    k: usize,
    rng: &mut R,
) -> Result<EmbeddedTree> {
    if t.root().is_none() {
        return Err(Error::InvalidConfig("evaporation needs a rooted tree".into()));
    }
    if k > t.size() - 1 {
        return Err(Error::InvalidConfig("cannot remove more than |T|-1 leaves".into()));
    }
    let mut out = t.clone();
    for _ in 0..k {
        let leaf = out.nth_leaf(rng.gen_range(0..out.leaf_count()));
        out.detach_leaf(leaf);
    }
    Ok(out)
}

/// Exact law of uniform leaf evaporation, by direct recursion over histories:
/// the probability that k removals starting from `t` leave exactly `target`.
pub fn uniform_leaf_evaporation_law(
    t: &EmbeddedTree,
    k: usize,
    target: &[(Vertex, Vertex)],
) -> f64 {
    fn rec(t: &EmbeddedTree, k: usize, target: &[(Vertex, Vertex)]) -> f64 {
        if k == 0 {
            return if t.edge_set() == target { 1.0 } else { 0.0 };
        }
        let leaves = t.leaves().to_vec();
        let mut acc = 0.0;
        for &leaf in &leaves {
            let mut t2 = t.clone();
            t2.detach_leaf(leaf);
            acc += rec(&t2, k - 1, target) / leaves.len() as f64;
        }
        acc
    }
    rec(t, k, target)
}

/// Repeatedly removes the leaf whose pendant edge has the smallest weight
/// among pendant edges, down to `n` vertices.
pub fn smallest_leaf_evaporation(
    t: &EmbeddedTree,
    n: usize,
    weights: &HashMap<(Vertex, Vertex), f64>,
) -> Result<EmbeddedTree> {
    if t.root().is_none() {
        return Err(Error::InvalidConfig("evaporation needs a rooted tree".into()));
    }
    if n < 1 || n > t.size() {
        return Err(Error::InvalidConfig("target size out of range".into()));
    }
    let mut out = t.clone();
    while out.size() > n {
        let mut best: Option<(f64, Vertex)> = None;
        for &leaf in out.leaves() {
            let w = weights[&ekey(leaf, out.parent_of(leaf))];
            if best.map_or(true, |(bw, _)| w < bw) {
                best = Some((w, leaf));
            }
        }
        let (_, leaf) = best.expect("a rooted tree of size >= 2 has a leaf");
        out.detach_leaf(leaf);
    }
    Ok(out)
}

/// Recursively strips the leaves whose pendant edge weight is at most `w`.
/// P(T(w) = t) = (1-w)^{|leaves(t)|} w^{|T \ t|} for Uniform(0,1) weights.
pub fn threshold_evaporation(
    t: &EmbeddedTree,
    w: f64,
    weights: &HashMap<(Vertex, Vertex), f64>,
) -> Result<EmbeddedTree> {
    if t.root().is_none() {
        return Err(Error::InvalidConfig("evaporation needs a rooted tree".into()));
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidConfig("threshold must lie in [0,1]".into()));
    }
    let mut out = t.clone();
    loop {
        let victim = out
            .leaves()
            .iter()
            .copied()
            .find(|&leaf| weights[&ekey(leaf, out.parent_of(leaf))] <= w);
        match victim {
            Some(leaf) => out.detach_leaf(leaf),
            None => return Ok(out),
        }
    }
}

/// Election-type evaporation: leaves carry exponential lifetimes whose rates
/// accumulate the parameters received from already-evaporated neighbours
/// (weight 1 per node); stops when `n` nodes remain. With n = 1 the survivor
/// is a uniform vertex.
pub fn election_evaporation<R: Rng>(
    t: &EmbeddedTree,
    n: usize,
    rng: &mut R,
) -> Result<EmbeddedTree> {
    if n < 1 || n > t.size() {
        return Err(Error::InvalidConfig("target size out of range".into()));
    }
    let mut out = t.clone();
    out.clear_root(); // the election model is unrooted
    let mut received: HashMap<Vertex, f64> = HashMap::new();
    // (evaporation time, vertex); BinaryHeap is a max-heap, so times negate
    let mut queue: Vec<(f64, Vertex)> = Vec::new();
    let mut activate = |v: Vertex, now: f64, received: &HashMap<Vertex, f64>, rng: &mut R,
                        queue: &mut Vec<(f64, Vertex)>| {
        let q = 1.0 + received.get(&v).copied().unwrap_or(0.0);
        let lifetime = -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln() / q;
        queue.push((now + lifetime, v));
        queue.sort_by(|a, b| b.0.total_cmp(&a.0)); // min at the end
    };
    for &leaf in out.leaves() {
        activate(leaf, 0.0, &received, rng, &mut queue);
    }
    while out.size() > n {
        let (now, v) = queue.pop().expect("active leaf exists while size > 1");
        debug_assert!(out.is_leaf(v));
        // transmit v's parameter to its single neighbour
        let neighbor = if out.parent_of(v) != NO_VERTEX {
            out.parent_of(v)
        } else {
            // v is the anchor; its single child is the neighbour
            *out.members()
                .iter()
                .find(|&&w| out.parent_of(w) == v)
                .expect("leaf anchor has one child")
        };
        let qv = 1.0 + received.get(&v).copied().unwrap_or(0.0);
        *received.entry(neighbor).or_insert(0.0) += qv;
        let was_leaf = out.is_leaf(neighbor);
        out.detach_leaf(v);
        if out.size() > 1 && !was_leaf && out.is_leaf(neighbor) {
            activate(neighbor, now, &received, rng, &mut queue);
        }
    }
    Ok(out)
}

/// Exact election law: P(Evaporation(T, n) = t) for an n-vertex subtree t of
/// T, per the closed formula with the attached-forest sizes.
pub fn election_law(t_full: &EmbeddedTree, target: &EmbeddedTree) -> f64 {
    let n_total = t_full.size();
    let n = target.size();
    // components of T minus the edges of target, keyed by their target vertex
    let mut delta: HashMap<Vertex, usize> = HashMap::new();
    for &v in target.members() {
        delta.insert(v, component_size_without(t_full, target, v));
    }
    // leaves of target, unrooted
    let boundary: Vec<Vertex> = target
        .members()
        .iter()
        .copied()
        .filter(|&v| unrooted_degree(target, v) <= 1 && target.size() > 1)
        .collect();
    let b = if target.size() == 1 { 1 } else { boundary.len() };
    let removed = n_total - n;
    // ((|∂t|-1)! (N-n)!) / ((|∂t|+N-n)!) * sum over boundary of |Δ_v|
    let mut log_coef = 0.0;
    for i in 1..b {
        log_coef += (i as f64).ln();
    }
    for i in 1..=removed {
        log_coef += (i as f64).ln();
    }
    for i in 1..=(b + removed) {
        log_coef -= (i as f64).ln();
    }
    let sum: usize = if target.size() == 1 {
        delta[&target.members()[0]]
    } else {
        boundary.iter().map(|v| delta[v]).sum()
    };
    log_coef.exp() * sum as f64
}

fn unrooted_degree(t: &EmbeddedTree, v: Vertex) -> u32 {
    t.tree_degree(v)
}

/// Size of the component of `v` in `full` after removing all edges of `sub`
/// (the fragment of the host tree hanging at `v`), `v` included.
fn component_size_without(full: &EmbeddedTree, sub: &EmbeddedTree, v: Vertex) -> usize {
    let mut seen = vec![v];
    let mut stack = vec![v];
    let adj: HashMap<Vertex, Vec<Vertex>> = {
        let mut m: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
        for (a, b) in full.edges() {
            m.entry(a).or_default().push(b);
            m.entry(b).or_default().push(a);
        }
        m
    };
    while let Some(x) = stack.pop() {
        for &y in adj.get(&x).into_iter().flatten() {
            if sub.is_tree_edge(x, y) || seen.contains(&y) {
                continue;
            }
            seen.push(y);
            stack.push(y);
        }
    }
    seen.len()
}

/// Removes a uniform k-subset of the edges and returns the root's component.
pub fn uniform_edge_removal<R: Rng>(
    t: &EmbeddedTree,
    k: usize,
    rng: &mut R,
) -> Result<EmbeddedTree> {
    let root = t
        .root()
        .ok_or_else(|| Error::InvalidConfig("edge removal needs a rooted tree".into()))?;
    let mut edges: Vec<(Vertex, Vertex)> = t.edges().collect();
    if k > edges.len() {
        return Err(Error::InvalidConfig("k exceeds the edge count".into()));
    }
    // partial Fisher-Yates: the first k entries are the removed subset
    for i in 0..k {
        let j = rng.gen_range(i..edges.len());
        edges.swap(i, j);
    }
    root_component(t, root, &edges[k..])
}

/// The threshold form of edge removal: keeps the edges with weight > w and
/// returns the root's component. P(T_r*(w) = t) = w^{|B(t)|} (1-w)^{|E(t)|}.
pub fn uniform_edge_threshold(
    t: &EmbeddedTree,
    w: f64,
    weights: &HashMap<(Vertex, Vertex), f64>,
) -> Result<EmbeddedTree> {
    let root = t
        .root()
        .ok_or_else(|| Error::InvalidConfig("edge removal needs a rooted tree".into()))?;
    let kept: Vec<(Vertex, Vertex)> = t
        .edges()
        .filter(|&(u, v)| weights[&ekey(u, v)] > w)
        .collect();
    root_component(t, root, &kept)
}

fn root_component(
    t: &EmbeddedTree,
    root: Vertex,
    kept: &[(Vertex, Vertex)],
) -> Result<EmbeddedTree> {
    let mut adj: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for &(u, v) in kept {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let mut out = EmbeddedTree::singleton(t.host().clone(), root, true);
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        for &w in adj.get(&v).into_iter().flatten() {
            if !out.contains(w) {
                out.attach_leaf(v, w);
                stack.push(w);
            }
        }
    }
    Ok(out)
}

/// Subtree polynomial of a rooted tree by root decomposition: the generating
/// function at v is the product over children of (1 + x F_child). Linear-size
/// recursion, agrees with the generic deletion–contraction.
pub fn subtree_polynomial_of_tree(t: &EmbeddedTree) -> Result<SubtreePolynomial> {
    let root = t
        .root()
        .ok_or_else(|| Error::InvalidConfig("needs a rooted tree".into()))?;
    // children lists
    let mut children: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for &v in t.members() {
        let p = t.parent_of(v);
        if p != NO_VERTEX {
            children.entry(p).or_default().push(v);
        }
    }
    // iterative post-order (host trees can be deep)
    let mut order = Vec::with_capacity(t.size());
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        order.push(v);
        for &c in children.get(&v).into_iter().flatten() {
            stack.push(c);
        }
    }
    let mut poly: HashMap<Vertex, Vec<BigUint>> = HashMap::new();
    for &v in order.iter().rev() {
        let mut f = vec![BigUint::one()];
        for &c in children.get(&v).into_iter().flatten() {
            let fc = &poly[&c];
            // f *= 1 + x * fc
            let mut g = vec![BigUint::zero(); f.len() + fc.len()];
            for (i, a) in f.iter().enumerate() {
                g[i] += a;
                for (j, b) in fc.iter().enumerate() {
                    g[i + j + 1] += a * b;
                }
            }
            while g.len() > 1 && g.last().map_or(false, |c| c.is_zero()) {
                g.pop();
            }
            f = g;
            poly.remove(&c);
        }
        poly.insert(v, f);
    }
    Ok(SubtreePolynomial {
        coeffs: poly.remove(&root).unwrap(),
    })
}

/// The shared-randomness update map of the rooted kernel on the subtrees of a
/// tree: add the drawn edge when v <= p_{|t|}, remove it (rooted removal) when
/// v >= 1 - r_{|t|}, hold otherwise. Monotone for inclusion under
/// Hypothesis M.
pub fn cftp_update(t: &mut EmbeddedTree, cfg: &PqrConfig, a: Vertex, b: Vertex, v: f64) {
    let s = t.size();
    if v <= cfg.p[s] {
        let (ia, ib) = (t.contains(a), t.contains(b));
        if ia != ib {
            let (at, new) = if ia { (a, b) } else { (b, a) };
            t.attach_leaf(at, new);
        }
        // both inside a tree host cannot close a cycle unless the edge is
        // already present; both outside is a no-op
    } else if v >= 1.0 - cfg.r[s] {
        crate::mcmc::variable::remove_rooted(t, a, b);
    }
}

/// Statistics reported by a coupling-from-the-past run.
pub struct CftpOutcome {
    pub tree: EmbeddedTree,
    /// Number of past steps that were needed for coalescence.
    pub depth: u64,
}

/// Exact sample from the invariant law of the rooted kernel on the subtrees
/// of the host tree `t_full` (which must be rooted). Monotone coupling from
/// the past with the doubling schedule, reusing the same randomness across
/// restarts.
pub fn cftp_subtree<R: Rng>(
    t_full: &EmbeddedTree,
    cfg: &PqrConfig,
    rng: &mut R,
    max_depth: u64,
) -> Result<CftpOutcome> {
    let root = t_full
        .root()
        .ok_or_else(|| Error::InvalidConfig("CFTP needs a rooted host tree".into()))?;
    let nv = t_full.size();
    validate_hypothesis_m(cfg, nv)?;
    cfg.validate_irreducible(nv)?;
    let edges: Vec<(Vertex, Vertex)> = t_full.edges().collect();
    // draws[k] is the randomness used k+1 steps before time zero
    let mut draws: Vec<((Vertex, Vertex), f64)> = Vec::new();
    let mut s: u64 = 1;
    loop {
        while (draws.len() as u64) < s {
            let e = edges[rng.gen_range(0..edges.len())];
            draws.push((e, rng.gen::<f64>()));
        }
        let mut bottom = EmbeddedTree::singleton(t_full.host().clone(), root, true);
        let mut top = t_full.clone();
        for k in (0..s as usize).rev() {
            let ((a, b), v) = draws[k];
            cftp_update(&mut bottom, cfg, a, b, v);
            cftp_update(&mut top, cfg, a, b, v);
        }
        if bottom.edge_set() == top.edge_set() {
            return Ok(CftpOutcome { tree: bottom, depth: s });
        }
        if s >= max_depth {
            return Err(Error::ResourceCap(format!(
                "coupling from the past did not coalesce within {max_depth} steps"
            )));
        }
        s *= 2;
    }
}

/// Forward coupling time: first s with F_0^s(bottom) = F_0^s(top) under
/// shared randomness.
pub fn forward_coupling_time<R: Rng>(
    t_full: &EmbeddedTree,
    cfg: &PqrConfig,
    rng: &mut R,
    cap: u64,
) -> Result<u64> {
    let root = t_full.root().ok_or_else(|| Error::InvalidConfig("rooted host".into()))?;
    let edges: Vec<(Vertex, Vertex)> = t_full.edges().collect();
    let mut bottom = EmbeddedTree::singleton(t_full.host().clone(), root, true);
    let mut top = t_full.clone();
    for s in 1..=cap {
        let (a, b) = edges[rng.gen_range(0..edges.len())];
        let v = rng.gen::<f64>();
        cftp_update(&mut bottom, cfg, a, b, v);
        cftp_update(&mut top, cfg, a, b, v);
        if bottom.size() == top.size() && bottom.edge_set() == top.edge_set() {
            return Ok(s);
        }
    }
    Err(Error::ResourceCap("forward coupling cap".into()))
}

/// Backward coupling time: smallest s with F_{-s}^0(bottom) = F_{-s}^0(top),
/// growing the past one step at a time over a fixed randomness stream.
pub fn backward_coupling_time<R: Rng>(
    t_full: &EmbeddedTree,
    cfg: &PqrConfig,
    rng: &mut R,
    cap: u64,
) -> Result<u64> {
    let root = t_full.root().ok_or_else(|| Error::InvalidConfig("rooted host".into()))?;
    let edges: Vec<(Vertex, Vertex)> = t_full.edges().collect();
    let mut draws: Vec<((Vertex, Vertex), f64)> = Vec::new();
    for s in 1..=cap {
        let e = edges[rng.gen_range(0..edges.len())];
        draws.push((e, rng.gen::<f64>()));
        let mut bottom = EmbeddedTree::singleton(t_full.host().clone(), root, true);
        let mut top = t_full.clone();
        for k in (0..s as usize).rev() {
            let ((a, b), v) = draws[k];
            cftp_update(&mut bottom, cfg, a, b, v);
            cftp_update(&mut top, cfg, a, b, v);
        }
        if bottom.edge_set() == top.edge_set() {
            return Ok(s);
        }
    }
    Err(Error::ResourceCap("backward coupling cap".into()))
}

/// Extremes over the `i`-vertex rooted subtrees of the host tree: the minimal
/// leaf count and the maximal perimeter (vertices at distance one), by brute
/// force.
pub fn leaf_perimeter_extremes(t_full: &EmbeddedTree, i: usize) -> Result<(usize, usize)> {
    let root = t_full.root().ok_or_else(|| Error::InvalidConfig("rooted host".into()))?;
    let host = t_full.host();
    let lists = crate::enumeration::enumerate_subtrees(host, i, Some(root))?;
    if lists.is_empty() {
        return Err(Error::EmptyClass);
    }
    let mut min_leaves = usize::MAX;
    let mut max_perimeter = 0usize;
    for ids in lists {
        let edges: Vec<(Vertex, Vertex)> =
            ids.iter().map(|&id| host.edge_list()[id as usize]).collect();
        let sub = EmbeddedTree::from_edges(host.clone(), Some(root), root, &edges)?;
        min_leaves = min_leaves.min(sub.leaf_count());
        let mut peri = 0;
        for v in 0..host.num_vertices() as Vertex {
            if !sub.contains(v) && host.neighbors_of(v).iter().any(|&w| sub.contains(w)) {
                peri += 1;
            }
        }
        max_perimeter = max_perimeter.max(peri);
    }
    Ok((min_leaves, max_perimeter))
}

/// The closed-form coupling-time bound for a complete d-ary host tree under
/// the ratio hypothesis p_i / r_i <= c * minleaves(i) / maxperimeter(i):
/// (1 / (r_N (c-1))) * (d/(d-1)) * ((c - c^N)/(1 - c) - (N - 1)).
pub fn coupling_time_bound(
    t_full: &EmbeddedTree,
    d: u32,
    cfg: &PqrConfig,
    c: f64,
) -> Result<f64> {
    let nv = t_full.size();
    validate_hypothesis_m(cfg, nv)?;
    if (c - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidConfig("c = 1 makes the closed form singular".into()));
    }
    for i in 2..nv {
        let (min_l, max_p) = leaf_perimeter_extremes(t_full, i)?;
        if cfg.p[i] / cfg.r[i] > c * min_l as f64 / max_p as f64 + 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "ratio hypothesis fails at size {i}: p/r = {} > c * {min_l}/{max_p}",
                cfg.p[i] / cfg.r[i]
            )));
        }
    }
    let n = nv as f64;
    let r_n = cfg.r[nv];
    Ok((1.0 / (r_n * (c - 1.0))) * (d as f64 / (d as f64 - 1.0))
        * ((c - c.powf(n)) / (1.0 - c) - (n - 1.0)))
}

/// The same bound in summation form: (d/(d-1)) (1/r_N) sum_{j=2}^N
/// (c^{j-1} - 1)/(c - 1); algebraically identical to the closed form.
pub fn coupling_time_bound_summation(nv: usize, d: u32, r_n: f64, c: f64) -> f64 {
    let mut sum = 0.0;
    for j in 2..=nv {
        sum += (c.powi(j as i32 - 1) - 1.0) / (c - 1.0);
    }
    (d as f64 / (d as f64 - 1.0)) * sum / r_n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GeneratorSpec, Graph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn spanning_tree_of(g: &Arc<Graph>, root: Vertex) -> EmbeddedTree {
        let edges: Vec<(Vertex, Vertex)> = g.edge_list().to_vec();
        EmbeddedTree::from_edges(g.clone(), Some(root), root, &edges).unwrap()
    }

    fn dary_tree(d: u32, h: u32) -> EmbeddedTree {
        let g = Graph::generate(GeneratorSpec::Dary(d, h)).unwrap().shared();
        spanning_tree_of(&g, 0)
    }

    #[test]
    fn uniform_leaf_evaporation_bounds() {
        let t = dary_tree(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let full = uniform_leaf_evaporation(&t, 0, &mut rng).unwrap();
        assert_eq!(full.edge_set(), t.edge_set());
        let single = uniform_leaf_evaporation(&t, t.size() - 1, &mut rng).unwrap();
        assert_eq!(single.size(), 1);
        assert!(single.contains(0));
    }

    #[test]
    fn star_two_removals_uniform() {
        // 4-node star rooted at the centre: two removals leave each 2-leaf
        // subtree... i.e. each pair of remaining leaves equally likely
        let g = Graph::from_edges(4, &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]).unwrap().shared();
        let t = spanning_tree_of(&g, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts: HashMap<Vec<(Vertex, Vertex)>, u32> = HashMap::new();
        let reps = 30_000;
        for _ in 0..reps {
            let out = uniform_leaf_evaporation(&t, 2, &mut rng).unwrap();
            *counts.entry(out.edge_set()).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        for (key, c) in &counts {
            let p = *c as f64 / reps as f64;
            assert!((p - 1.0 / 3.0).abs() < 0.02, "{key:?}: {p}");
            // oracle agrees
            let exact = uniform_leaf_evaporation_law(&t, 2, key);
            assert!((exact - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn smallest_leaf_deterministic_trace() {
        // path 0-1-2 rooted at 0 with fixed weights: leaf 2 is the only leaf
        let g = Graph::generate(GeneratorSpec::Line(3)).unwrap().shared();
        let t = spanning_tree_of(&g, 0);
        let mut weights = HashMap::new();
        weights.insert((0, 1), 0.9);
        weights.insert((1, 2), 0.1);
        let out = smallest_leaf_evaporation(&t, 1, &weights).unwrap();
        assert_eq!(out.size(), 1);
        assert!(out.contains(0));
        let out = smallest_leaf_evaporation(&t, 3, &weights).unwrap();
        assert_eq!(out.size(), 3);
    }

    #[test]
    fn threshold_extremes() {
        let t = dary_tree(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let weights = uniform_edge_weights(&t, &mut rng);
        let all = threshold_evaporation(&t, 0.0, &weights).unwrap();
        assert_eq!(all.size(), t.size()); // weights are a.s. positive
        let none = threshold_evaporation(&t, 1.0, &weights).unwrap();
        assert_eq!(none.size(), 1);
    }

    #[test]
    fn election_extremes_and_uniform_survivor() {
        let t = dary_tree(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let full = election_evaporation(&t, t.size(), &mut rng).unwrap();
        assert_eq!(full.size(), t.size());
        // n = 1: survivor uniform over the 7 vertices
        let mut counts = vec![0u32; 7];
        let reps = 70_000;
        for _ in 0..reps {
            let out = election_evaporation(&t, 1, &mut rng).unwrap();
            counts[out.members()[0] as usize] += 1;
        }
        for &c in &counts {
            let p = c as f64 / reps as f64;
            assert!((p - 1.0 / 7.0).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn uniform_edge_removal_formulas() {
        // star with root at the centre, k = 1: each leaf-removed tree has
        // probability 1/3, matching the binomial formula
        let g = Graph::from_edges(4, &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]).unwrap().shared();
        let t = spanning_tree_of(&g, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts: HashMap<usize, u32> = HashMap::new();
        let reps = 30_000;
        for _ in 0..reps {
            let out = uniform_edge_removal(&t, 1, &mut rng).unwrap();
            *counts.entry(out.size()).or_default() += 1;
        }
        assert_eq!(counts[&3], reps);
        // k = 0 returns the full tree
        let out = uniform_edge_removal(&t, 0, &mut rng).unwrap();
        assert_eq!(out.edge_set(), t.edge_set());
    }

    #[test]
    fn tree_polynomial_matches_generic_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            // random 12-node tree host via a uniform attachment process
            let mut edges = Vec::new();
            for v in 1..12u32 {
                edges.push((rng.gen_range(0..v), v, 1));
            }
            let g = Graph::from_edges(12, &edges).unwrap().shared();
            let t = spanning_tree_of(&g, 0);
            let fast = subtree_polynomial_of_tree(&t).unwrap();
            let generic = crate::enumeration::subtree_polynomial_rooted(&g, 0).unwrap();
            assert_eq!(fast, generic);
        }
        // path of 3 rooted at an end: 1 + x + x^2
        let g = Graph::generate(GeneratorSpec::Line(3)).unwrap().shared();
        let t = spanning_tree_of(&g, 0);
        assert_eq!(subtree_polynomial_of_tree(&t).unwrap().to_string(), "x^2 + x + 1");
    }

    #[test]
    fn cftp_two_point_law() {
        // host tree = single edge, p1 = r2 = 1/2: invariant weights are equal,
        // so both states are equally likely
        let g = Graph::generate(GeneratorSpec::Line(2)).unwrap().shared();
        let t = spanning_tree_of(&g, 0);
        let cfg = PqrConfig::uniform(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut singles = 0u32;
        let reps = 40_000;
        for _ in 0..reps {
            let out = cftp_subtree(&t, &cfg, &mut rng, 1 << 20).unwrap();
            if out.tree.size() == 1 {
                singles += 1;
            }
        }
        let p = singles as f64 / reps as f64;
        assert!((p - 0.5).abs() < 0.01, "p = {p}");
    }

    #[test]
    fn cftp_monotone_update_exhaustive() {
        // all pairs t <= t' of rooted subtrees of a 7-node binary tree, all
        // host edges, and v values probing every threshold region
        let t_full = dary_tree(2, 2);
        let host = t_full.host().clone();
        let cfg = PqrConfig::constant(7, 0.3, 0.2, 0.5).unwrap();
        validate_hypothesis_m(&cfg, 7).unwrap();
        let mut subtrees = Vec::new();
        for n in 1..=7 {
            for ids in crate::enumeration::enumerate_subtrees(&host, n, Some(0)).unwrap() {
                let edges: Vec<(Vertex, Vertex)> =
                    ids.iter().map(|&i| host.edge_list()[i as usize]).collect();
                subtrees.push(EmbeddedTree::from_edges(host.clone(), Some(0), 0, &edges).unwrap());
            }
        }
        let vs: Vec<f64> = vec![0.05, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95];
        let edges: Vec<(Vertex, Vertex)> = t_full.edges().collect();
        let le = |a: &EmbeddedTree, b: &EmbeddedTree| {
            a.edge_set().iter().all(|e| b.edge_set().contains(e)) && a.size() <= b.size()
        };
        for a in &subtrees {
            for b in &subtrees {
                if !le(a, b) {
                    continue;
                }
                for &(x, y) in &edges {
                    for &v in &vs {
                        let mut a2 = a.clone();
                        let mut b2 = b.clone();
                        cftp_update(&mut a2, &cfg, x, y, v);
                        cftp_update(&mut b2, &cfg, x, y, v);
                        assert!(le(&a2, &b2), "monotonicity broken at ({x},{y}) v={v}");
                    }
                }
            }
        }
    }

    #[test]
    fn coupling_bound_forms_agree() {
        let t = dary_tree(2, 2); // N = 7
        let cfg = PqrConfig::constant(7, 0.05, 0.35, 0.6).unwrap();
        let c = 2.0;
        let closed = coupling_time_bound(&t, 2, &cfg, c).unwrap();
        let summed = coupling_time_bound_summation(7, 2, cfg.r[7], c);
        assert!((closed - summed).abs() / closed < 1e-12);
        assert!(closed > 0.0);
        // small c with tiny p: still finite and positive
        let cfg = PqrConfig::constant(7, 0.01, 0.39, 0.6).unwrap();
        let closed = coupling_time_bound(&t, 2, &cfg, 0.5).unwrap();
        assert!(closed.is_finite() && closed > 0.0);
    }

    #[test]
    fn forward_backward_coupling_same_scale() {
        let t = dary_tree(2, 2);
        let cfg = PqrConfig::constant(7, 0.25, 0.15, 0.6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let reps = 400;
        let mut fsum = 0.0;
        let mut bsum = 0.0;
        for _ in 0..reps {
            fsum += forward_coupling_time(&t, &cfg, &mut rng, 1 << 20).unwrap() as f64;
            bsum += backward_coupling_time(&t, &cfg, &mut rng, 1 << 20).unwrap() as f64;
        }
        let (fm, bm) = (fsum / reps as f64, bsum / reps as f64);
        assert!((fm - bm).abs() / fm < 0.25, "forward {fm} vs backward {bm}");
    }
}
