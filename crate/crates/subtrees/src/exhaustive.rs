//! Small-instance oracles in exact rational arithmetic: exhaustively expanded
//! transition matrices for every kernel, their balance identities, and a
//! rational stationary-vector solver. Desk-scale only; state spaces are
//! enumerated by brute force.

use crate::enumeration::enumerate_subtrees;
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::mcmc::BreakCycleRule;
use crate::tree::EmbeddedTree;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::sync::Arc;

/// A subtree state: sorted vertex list plus sorted edge list (the vertex list
/// disambiguates singletons).
pub type StateKey = (Vec<Vertex>, Vec<(Vertex, Vertex)>);

pub fn state_key(t: &EmbeddedTree) -> StateKey {
    let mut vs = t.members().to_vec();
    vs.sort_unstable();
    (vs, t.edge_set())
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact per-size triplets for the variable-size kernels.
#[derive(Debug, Clone)]
pub struct RationalPqr {
    pub p: Vec<BigRational>,
    pub q: Vec<BigRational>,
    pub r: Vec<BigRational>,
}

impl RationalPqr {
    pub fn constant(num_vertices: usize, p: BigRational, q: BigRational, r: BigRational) -> Self {
        RationalPqr {
            p: vec![p; num_vertices + 1],
            q: vec![q; num_vertices + 1],
            r: vec![r; num_vertices + 1],
        }
    }

    /// Exact invariant weights per size for the chosen kernel variant,
    /// reference weight 1 at size 1.
    pub fn invariant_weights(&self, variant: Variant, num_vertices: usize) -> Vec<BigRational> {
        let mut nu = vec![BigRational::zero(); num_vertices + 1];
        nu[1] = BigRational::one();
        for m in 2..=num_vertices {
            let base = &nu[m - 1] * &self.p[m - 1] / &self.r[m];
            nu[m] = match variant {
                Variant::Unrooted | Variant::Rooted => base,
                Variant::Regular => {
                    base * ratio(m as i64, 1) / ratio(2 * (m as i64 - 1), 1)
                }
            };
        }
        let doubled = matches!(variant, Variant::Unrooted | Variant::Regular);
        if doubled {
            for w in nu.iter_mut().skip(2) {
                *w *= ratio(2, 1);
            }
        }
        nu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Unrooted,
    Rooted,
    Regular,
}

/// State space plus exact transition matrix.
pub struct ExactChain {
    pub states: Vec<StateKey>,
    pub index: HashMap<StateKey, usize>,
    pub matrix: Vec<Vec<BigRational>>,
}

impl ExactChain {
    fn new(states: Vec<StateKey>) -> ExactChain {
        let index = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        let n = states.len();
        ExactChain {
            states,
            index,
            matrix: vec![vec![BigRational::zero(); n]; n],
        }
    }

    fn add(&mut self, from: usize, to: &StateKey, p: BigRational) {
        let j = self.index[to];
        self.matrix[from][j] += p;
    }

    /// Largest |K(t,t') - K(t',t)| as a rational; zero iff symmetric.
    pub fn symmetry_defect(&self) -> BigRational {
        let mut worst = BigRational::zero();
        for i in 0..self.states.len() {
            for j in 0..i {
                let d = (&self.matrix[i][j] - &self.matrix[j][i]).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Largest |nu_i K(i,j) - nu_j K(j,i)| with per-state weights.
    pub fn balance_defect(&self, weights: &[BigRational]) -> BigRational {
        let mut worst = BigRational::zero();
        for i in 0..self.states.len() {
            for j in 0..i {
                let d = (&weights[i] * &self.matrix[i][j] - &weights[j] * &self.matrix[j][i]).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Rows sum to one (sanity for the expansion itself).
    pub fn rows_are_stochastic(&self) -> bool {
        self.matrix.iter().all(|row| {
            row.iter().fold(BigRational::zero(), |a, b| a + b) == BigRational::one()
        })
    }

    /// Unique stationary distribution of an irreducible chain, exactly.
    pub fn stationary(&self) -> Result<Vec<BigRational>> {
        stationary_of(&self.matrix)
    }
}

/// Stationary distribution of an irreducible stochastic matrix, exactly:
/// solves pi (K - I) = 0 with the normalisation sum(pi) = 1.
pub fn stationary_of(matrix: &[Vec<BigRational>]) -> Result<Vec<BigRational>> {
    let n = matrix.len();
    let mut a = vec![vec![BigRational::zero(); n]; n];
    let mut b = vec![BigRational::zero(); n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = matrix[j][i].clone();
        }
        a[i][i] -= BigRational::one();
    }
    for j in 0..n {
        a[n - 1][j] = BigRational::one();
    }
    b[n - 1] = BigRational::one();
    solve_linear(a, b)
}

/// Exact Gaussian elimination over the rationals.
pub fn solve_linear(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .find(|&i| !a[i][col].is_zero())
            .ok_or_else(|| Error::Domain("singular system".into()))?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in col..n {
                    a[i][j] = &a[i][j] - &f * &a[col][j];
                }
                b[i] = &b[i] - &f * &b[col];
            }
        }
    }
    Ok(b)
}

fn tree_from_state(host: &Arc<Graph>, key: &StateKey, root: Option<Vertex>) -> EmbeddedTree {
    let anchor = root.unwrap_or(key.0[0]);
    EmbeddedTree::from_edges(host.clone(), root, anchor, &key.1).expect("state is a tree")
}

/// All subtrees with `n` vertices as states (unrooted).
pub fn fixed_size_states(g: &Arc<Graph>, n: usize) -> Result<Vec<StateKey>> {
    let lists = enumerate_subtrees(g, n, None)?;
    Ok(lists
        .into_iter()
        .map(|ids| ids_to_state(g, &ids))
        .collect())
}

/// All subtrees of every size (unrooted), or all containing `root`.
pub fn all_size_states(g: &Arc<Graph>, root: Option<Vertex>) -> Result<Vec<StateKey>> {
    let mut out = Vec::new();
    for n in 1..=g.num_vertices() {
        for ids in enumerate_subtrees(g, n, root)? {
            out.push(ids_to_state_rooted(g, &ids, root, n));
        }
    }
    Ok(out)
}

fn ids_to_state(g: &Graph, ids: &[u32]) -> StateKey {
    let edges: Vec<(Vertex, Vertex)> = ids.iter().map(|&i| g.edge_list()[i as usize]).collect();
    let mut vs: Vec<Vertex> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    vs.sort_unstable();
    vs.dedup();
    let mut es = edges;
    es.sort_unstable();
    (vs, es)
}

fn ids_to_state_rooted(g: &Graph, ids: &[u32], root: Option<Vertex>, n: usize) -> StateKey {
    if ids.is_empty() {
        // singleton: the vertex is the root for rooted spaces; enumeration
        // without a root never returns an ambiguous empty list for n == 1
        // because it enumerates each vertex separately.
        let v = root.expect("unrooted singleton states need explicit handling");
        debug_assert_eq!(n, 1);
        return (vec![v], vec![]);
    }
    ids_to_state(g, ids)
}

/// Unrooted all-size states including every singleton.
pub fn all_size_states_unrooted(g: &Arc<Graph>) -> Result<Vec<StateKey>> {
    let mut out: Vec<StateKey> = (0..g.num_vertices() as Vertex)
        .map(|v| (vec![v], vec![]))
        .collect();
    for n in 2..=g.num_vertices() {
        for ids in enumerate_subtrees(g, n, None)? {
            out.push(ids_to_state(g, &ids));
        }
    }
    Ok(out)
}

/// Outcomes of a break-cycle draw when edge `{a, b}` closes a cycle on `t`:
/// pairs of (resulting state, probability).
fn break_cycle_outcomes(
    t: &EmbeddedTree,
    a: Vertex,
    b: Vertex,
    rule: BreakCycleRule,
    root: Option<Vertex>,
) -> Vec<(StateKey, BigRational)> {
    let mut base = t.clone();
    let path = base.tree_path(a, b);
    let cycle_len = path.len() as i64;
    let mut out = Vec::new();
    let (den, include_self) = match rule {
        BreakCycleRule::UniformIncluding => (cycle_len, true),
        BreakCycleRule::UniformExcluding => (cycle_len - 1, false),
    };
    for w in path.windows(2) {
        let mut t2 = t.clone();
        t2.swap_cycle_edge(a, b, (w[0], w[1]));
        if let Some(r) = root {
            t2.reroot(r);
        }
        out.push((state_key(&t2), ratio(1, den)));
    }
    if include_self {
        out.push((state_key(t), ratio(1, den)));
    }
    out
}

/// Exhaustive transition matrix of kernel A on the `n`-vertex subtrees.
pub fn kernel_a_matrix(g: &Arc<Graph>, n: usize) -> Result<ExactChain> {
    require_simple(g)?;
    let states = fixed_size_states(g, n)?;
    let mut chain = ExactChain::new(states.clone());
    let m = g.num_edges() as i64;
    for (i, key) in states.iter().enumerate() {
        let t = tree_from_state(g, key, None);
        for &e1 in g.edge_list() {
            for &e2 in g.edge_list() {
                let mut t2 = t.clone();
                t2.try_exchange(e1, e2);
                chain.add(i, &state_key(&t2), ratio(1, m * m));
            }
        }
    }
    debug_assert!(chain.rows_are_stochastic());
    Ok(chain)
}

/// Exhaustive transition matrix of kernel B (or its leaf variant).
pub fn kernel_b_matrix(g: &Arc<Graph>, n: usize, leaf_variant: bool) -> Result<ExactChain> {
    require_simple(g)?;
    let states = fixed_size_states(g, n)?;
    let mut chain = ExactChain::new(states.clone());
    for (i, key) in states.iter().enumerate() {
        let t = tree_from_state(g, key, None);
        let nn = t.size() as i64;
        for &u in t.members() {
            for &v in t.members() {
                for u2 in g.neighbors_of(u) {
                    for v2 in g.neighbors_of(v) {
                        let p = ratio(1, nn * nn * g.degree(u) as i64 * g.degree(v) as i64);
                        let mut t2 = t.clone();
                        if leaf_variant {
                            if t2.is_tree_edge(u, *u2)
                                && t2.is_leaf(*u2)
                                && !t2.contains(*v2)
                                && v != *u2
                            {
                                t2.detach_leaf(*u2);
                                t2.attach_leaf(v, *v2);
                            }
                        } else {
                            t2.try_exchange((u, *u2), (v, *v2));
                        }
                        chain.add(i, &state_key(&t2), p);
                    }
                }
            }
        }
    }
    debug_assert!(chain.rows_are_stochastic());
    Ok(chain)
}

/// Exhaustive transition matrix of kernel C.
pub fn kernel_c_matrix(g: &Arc<Graph>, n: usize, rule: BreakCycleRule) -> Result<ExactChain> {
    require_simple(g)?;
    let states = fixed_size_states(g, n)?;
    let mut chain = ExactChain::new(states.clone());
    for (i, key) in states.iter().enumerate() {
        let t = tree_from_state(g, key, None);
        let nn = t.size() as i64;
        for &u in t.members() {
            for u2 in g.neighbors_of(u) {
                let p1 = ratio(1, nn * g.degree(u) as i64);
                if !t.contains(*u2) {
                    // leaf branch: second draw, exchange fallback
                    for &v in t.members() {
                        for v2 in g.neighbors_of(v) {
                            let p = &p1 * ratio(1, nn * g.degree(v) as i64);
                            let mut t2 = t.clone();
                            t2.try_exchange((u, *u2), (v, *v2));
                            chain.add(i, &state_key(&t2), p);
                        }
                    }
                } else if !t.is_tree_edge(u, *u2) {
                    for (s, pbc) in break_cycle_outcomes(&t, u, *u2, rule, None) {
                        chain.add(i, &s, &p1 * pbc);
                    }
                } else {
                    chain.add(i, key, p1);
                }
            }
        }
    }
    debug_assert!(chain.rows_are_stochastic());
    Ok(chain)
}

/// Exhaustive transition matrix of the variable-size kernels D (unrooted),
/// D_r (rooted at `root`), and E (regular-fast), under exact triplets.
pub fn variable_kernel_matrix(
    g: &Arc<Graph>,
    cfg: &RationalPqr,
    rule: BreakCycleRule,
    variant: Variant,
    root: Option<Vertex>,
) -> Result<ExactChain> {
    require_simple(g)?;
    if variant == Variant::Regular && !g.is_regular() {
        return Err(Error::NotRegular);
    }
    if variant == Variant::Rooted && root.is_none() {
        return Err(Error::InvalidConfig("rooted variant needs a root".into()));
    }
    let states = match variant {
        Variant::Rooted => all_size_states(g, root)?,
        _ => all_size_states_unrooted(g)?,
    };
    let mut chain = ExactChain::new(states.clone());
    let m = g.num_edges() as i64;
    for (i, key) in states.iter().enumerate() {
        let t = tree_from_state(g, key, if variant == Variant::Rooted { root } else { None });
        let s = t.size();
        // enumerate the edge draw
        let draws: Vec<(Vertex, Vertex, BigRational)> = match variant {
            Variant::Unrooted => g
                .edge_list()
                .iter()
                .flat_map(|&(a, b)| [(a, b), (b, a)])
                .map(|(tail, head)| (tail, head, ratio(1, 2 * m)))
                .collect(),
            Variant::Rooted => g
                .edge_list()
                .iter()
                .map(|&(a, b)| (a, b, ratio(1, m)))
                .collect(),
            Variant::Regular => {
                let mut v = Vec::new();
                for &u in t.members() {
                    for u2 in g.neighbors_of(u) {
                        v.push((u, *u2, ratio(1, s as i64 * g.degree(u) as i64)));
                    }
                }
                v
            }
        };
        for (tail, head, pe) in draws {
            // add
            if !cfg.p[s].is_zero() {
                let pa = &pe * &cfg.p[s];
                let (ia, ib) = (t.contains(tail), t.contains(head));
                if ia && ib && !t.is_tree_edge(tail, head) {
                    for (sk, pbc) in break_cycle_outcomes(&t, tail, head, rule, root) {
                        chain.add(i, &sk, &pa * pbc);
                    }
                } else if ia != ib {
                    let mut t2 = t.clone();
                    let (at, new) = if ia { (tail, head) } else { (head, tail) };
                    t2.attach_leaf(at, new);
                    chain.add(i, &state_key(&t2), pa);
                } else {
                    chain.add(i, key, pa);
                }
            }
            // hold
            if !cfg.q[s].is_zero() {
                chain.add(i, key, &pe * &cfg.q[s]);
            }
            // remove
            if !cfg.r[s].is_zero() {
                let pr = &pe * &cfg.r[s];
                let mut t2 = t.clone();
                match variant {
                    Variant::Rooted => {
                        crate::mcmc::variable::remove_rooted(&mut t2, tail, head);
                    }
                    _ => crate::mcmc::variable::remove_unrooted(&mut t2, tail, head),
                }
                chain.add(i, &state_key(&t2), pr);
            }
        }
    }
    debug_assert!(chain.rows_are_stochastic());
    Ok(chain)
}

/// Per-state invariant weights (by size) aligned with a chain's state list.
pub fn size_weights(chain: &ExactChain, nu: &[BigRational]) -> Vec<BigRational> {
    chain
        .states
        .iter()
        .map(|(vs, _)| nu[vs.len()].clone())
        .collect()
}

fn require_simple(g: &Graph) -> Result<()> {
    if g.is_simple() {
        Ok(())
    } else {
        Err(Error::NotSimple)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GeneratorSpec;

    fn c4() -> Arc<Graph> {
        Graph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)])
            .unwrap()
            .shared()
    }

    /// Irregular 4-vertex host: a triangle with a pendant edge.
    fn paw() -> Arc<Graph> {
        Graph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (0, 2, 1), (2, 3, 1)])
            .unwrap()
            .shared()
    }

    #[test]
    fn kernel_a_symmetric_even_on_irregular_hosts() {
        for g in [c4(), paw()] {
            for n in 2..=3 {
                let chain = kernel_a_matrix(&g, n).unwrap();
                assert!(chain.rows_are_stochastic());
                assert!(chain.symmetry_defect().is_zero());
            }
        }
    }

    #[test]
    fn kernel_b_and_c_symmetric_on_regular_hosts() {
        let g = c4();
        for n in 2..=4 {
            let b = kernel_b_matrix(&g, n, false).unwrap();
            assert!(b.symmetry_defect().is_zero(), "B n={n}");
            let bl = kernel_b_matrix(&g, n, true).unwrap();
            assert!(bl.symmetry_defect().is_zero(), "B-leaf n={n}");
            for rule in [BreakCycleRule::UniformIncluding, BreakCycleRule::UniformExcluding] {
                let c = kernel_c_matrix(&g, n, rule).unwrap();
                assert!(c.symmetry_defect().is_zero(), "C n={n} {rule:?}");
            }
        }
    }

    #[test]
    fn kernel_d_balance_on_irregular_host() {
        let g = paw();
        let cfg = RationalPqr::constant(4, ratio(2, 5), ratio(1, 5), ratio(2, 5));
        let chain = variable_kernel_matrix(
            &g,
            &cfg,
            BreakCycleRule::UniformIncluding,
            Variant::Unrooted,
            None,
        )
        .unwrap();
        let nu = cfg.invariant_weights(Variant::Unrooted, 4);
        let w = size_weights(&chain, &nu);
        assert!(chain.balance_defect(&w).is_zero());
    }

    #[test]
    fn kernel_d_rooted_balance() {
        let g = paw();
        let cfg = RationalPqr::constant(4, ratio(1, 3), ratio(1, 3), ratio(1, 3));
        let chain = variable_kernel_matrix(
            &g,
            &cfg,
            BreakCycleRule::UniformExcluding,
            Variant::Rooted,
            Some(2),
        )
        .unwrap();
        let nu = cfg.invariant_weights(Variant::Rooted, 4);
        let w = size_weights(&chain, &nu);
        assert!(chain.balance_defect(&w).is_zero());
    }

    #[test]
    fn kernel_e_balance_on_regular_host() {
        let g = c4();
        let cfg = RationalPqr::constant(4, ratio(1, 2), ratio(0, 1), ratio(1, 2));
        let chain = variable_kernel_matrix(
            &g,
            &cfg,
            BreakCycleRule::UniformIncluding,
            Variant::Regular,
            None,
        )
        .unwrap();
        let nu = cfg.invariant_weights(Variant::Regular, 4);
        let w = size_weights(&chain, &nu);
        assert!(chain.balance_defect(&w).is_zero());
    }

    #[test]
    fn stationary_solver_on_kernel_a() {
        // kernel A is symmetric, so the stationary law is uniform
        let g = c4();
        let chain = kernel_a_matrix(&g, 3).unwrap();
        let pi = chain.stationary().unwrap();
        let expect = ratio(1, pi.len() as i64);
        for p in &pi {
            assert_eq!(*p, expect);
        }
    }
}
