//! Ergodic kernels on the subtrees of a fixed size n, all with the uniform
//! invariant distribution. Kernel A exchanges two uniform host edges, kernel B
//! two edges drawn adjacent to the current tree, and kernel C forces the
//! second edge onto the cycle created by the first (the fast kernel used for
//! the large torus simulations).

use crate::error::{Error, Result};
use crate::mcmc::{add_with_break, BreakCycleRule};
use crate::tree::EmbeddedTree;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedKernel {
    A,
    B,
    /// The leaf-only variant of kernel B: the exchange is performed only when
    /// the first edge is a pendant tree edge and the second attaches a new
    /// vertex, so no cycles are ever created.
    BLeaf,
    C(BreakCycleRule),
}

/// Chain state: the current tree plus the number of applied steps.
pub struct ChainState {
    pub tree: EmbeddedTree,
    pub step_count: u64,
}

impl ChainState {
    pub fn new(tree: EmbeddedTree) -> ChainState {
        ChainState { tree, step_count: 0 }
    }
}

/// One transition of kernel A: exchange the status of two independent uniform
/// edges of the host.
pub fn kernel_a_step<R: Rng>(t: &mut EmbeddedTree, rng: &mut R) {
    let m = t.host().num_edges();
    let e1 = t.host().edge_list()[rng.gen_range(0..m)];
    let e2 = t.host().edge_list()[rng.gen_range(0..m)];
    t.try_exchange(e1, e2);
}

/// One transition of kernel B: two i.i.d. uniform tree vertices, a uniform
/// neighbour of each, then exchange. The transition probability to a distinct
/// reachable tree is 1/(n^2 deg(u) deg(v)).
pub fn kernel_b_step<R: Rng>(t: &mut EmbeddedTree, rng: &mut R) {
    let n = t.size();
    let u = t.nth_member(rng.gen_range(0..n));
    let v = t.nth_member(rng.gen_range(0..n));
    let host = t.host().clone();
    let u2 = host.nth_neighbor(u, rng.gen_range(0..host.degree(u)));
    let v2 = host.nth_neighbor(v, rng.gen_range(0..host.degree(v)));
    t.try_exchange((u, u2), (v, v2));
}

/// The leaf-only variant: the move applies only when `(u, u')` is a pendant
/// tree edge with leaf `u'` and `v'` lies outside the tree; the leaf moves.
pub fn kernel_b_leaf_step<R: Rng>(t: &mut EmbeddedTree, rng: &mut R) {
    let n = t.size();
    let u = t.nth_member(rng.gen_range(0..n));
    let v = t.nth_member(rng.gen_range(0..n));
    let host = t.host().clone();
    let u2 = host.nth_neighbor(u, rng.gen_range(0..host.degree(u)));
    let v2 = host.nth_neighbor(v, rng.gen_range(0..host.degree(v)));
    if t.is_tree_edge(u, u2) && t.is_leaf(u2) && !t.contains(v2) && v != u2 {
        t.detach_leaf(u2);
        t.attach_leaf(v, v2);
    }
}

/// One transition of kernel C. The first oriented edge starts at a uniform
/// tree vertex. If its addition would attach a new leaf, a second such edge is
/// drawn and the pair is exchanged; if it closes a cycle, a break-cycle draw
/// removes one cycle edge; if it is already a tree edge nothing happens.
pub fn kernel_c_step<R: Rng>(t: &mut EmbeddedTree, rule: BreakCycleRule, rng: &mut R) {
    let n = t.size();
    let u = t.nth_member(rng.gen_range(0..n));
    let host = t.host().clone();
    let u2 = host.nth_neighbor(u, rng.gen_range(0..host.degree(u)));
    if !t.contains(u2) {
        let v = t.nth_member(rng.gen_range(0..n));
        let v2 = host.nth_neighbor(v, rng.gen_range(0..host.degree(v)));
        t.try_exchange((u, u2), (v, v2));
    } else if !t.is_tree_edge(u, u2) {
        add_with_break(t, u, u2, rule, rng);
    }
}

pub fn step<R: Rng>(kernel: FixedKernel, t: &mut EmbeddedTree, rng: &mut R) {
    match kernel {
        FixedKernel::A => kernel_a_step(t, rng),
        FixedKernel::B => kernel_b_step(t, rng),
        FixedKernel::BLeaf => kernel_b_leaf_step(t, rng),
        FixedKernel::C(rule) => kernel_c_step(t, rule, rng),
    }
}

/// Runs `steps` transitions, invoking the observer after every
/// `observe_every`-th step (0 disables observation). Deterministic given the
/// seed behind `rng`.
pub fn run_chain<R: Rng>(
    kernel: FixedKernel,
    state: &mut ChainState,
    steps: u64,
    observe_every: u64,
    rng: &mut R,
    mut observer: impl FnMut(u64, &EmbeddedTree),
) -> Result<()> {
    if !state.tree.host().is_simple() {
        return Err(Error::NotSimple);
    }
    for _ in 0..steps {
        step(kernel, &mut state.tree, rng);
        state.step_count += 1;
        if observe_every > 0 && state.step_count % observe_every == 0 {
            observer(state.step_count, &state.tree);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GeneratorSpec, Graph};
    use crate::tree::rectangle_tree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn size_is_invariant_and_trees_stay_valid() {
        let g = Graph::generate(GeneratorSpec::Torus(4)).unwrap().shared();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for kernel in [
            FixedKernel::A,
            FixedKernel::B,
            FixedKernel::BLeaf,
            FixedKernel::C(BreakCycleRule::UniformIncluding),
            FixedKernel::C(BreakCycleRule::UniformExcluding),
        ] {
            let t = rectangle_tree(g.clone(), 3, 2, false).unwrap();
            let mut state = ChainState::new(t);
            run_chain(kernel, &mut state, 3000, 0, &mut rng, |_, _| {}).unwrap();
            assert_eq!(state.tree.size(), 6, "{kernel:?}");
            state.tree.validate().unwrap();
        }
    }

    #[test]
    fn zero_steps_is_identity_and_seeds_reproduce() {
        let g = Graph::generate(GeneratorSpec::Torus(5)).unwrap().shared();
        let t0 = rectangle_tree(g.clone(), 4, 2, false).unwrap();
        let before = t0.edge_set();
        let mut state = ChainState::new(t0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        run_chain(FixedKernel::C(BreakCycleRule::UniformIncluding), &mut state, 0, 0, &mut rng, |_, _| {})
            .unwrap();
        assert_eq!(state.tree.edge_set(), before);

        let run = |seed: u64| {
            let mut s = ChainState::new(rectangle_tree(g.clone(), 4, 2, false).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_chain(
                FixedKernel::C(BreakCycleRule::UniformIncluding),
                &mut s,
                20_000,
                0,
                &mut rng,
                |_, _| {},
            )
            .unwrap();
            s.tree.edge_set()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn multigraph_host_rejected() {
        let g = Graph::generate(GeneratorSpec::Torus(2)).unwrap().shared();
        let t = crate::EmbeddedTree::singleton(g, 0, false);
        let mut state = ChainState::new(t);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(run_chain(FixedKernel::A, &mut state, 1, 0, &mut rng, |_, _| {}).is_err());
    }
}
