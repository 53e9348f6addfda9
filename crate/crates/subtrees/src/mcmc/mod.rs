//! Markov kernels on subtree spaces: fixed-size chains with uniform invariant
//! law and variable-size birth-and-death chains with computable invariant
//! measures.

pub mod fixed;
pub mod variable;

use crate::graph::Vertex;
use crate::tree::EmbeddedTree;
use rand::Rng;

/// Rule for choosing which edge of a freshly created unique cycle to delete.
/// Both variants satisfy the reversibility identity
/// `BC(g,e)({e'}) = BC(g,e')({e})` for every pair of cycle edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BreakCycleRule {
    /// Uniform over the whole cycle, the freshly added edge included (so the
    /// move may be a no-op).
    #[default]
    UniformIncluding,
    /// Uniform over the cycle without the added edge.
    UniformExcluding,
}

/// Adds host edge `{a, b}` to the tree. A cycle-closing addition removes one
/// cycle edge drawn from the break-cycle rule; a non-adjacent edge is a no-op.
/// The vertex set grows by one exactly when one endpoint was outside.
pub(crate) fn add_with_break<R: Rng>(
    t: &mut EmbeddedTree,
    a: Vertex,
    b: Vertex,
    rule: BreakCycleRule,
    rng: &mut R,
) {
    let (ia, ib) = (t.contains(a), t.contains(b));
    if ia && ib {
        if t.is_tree_edge(a, b) {
            return;
        }
        let path = t.tree_path(a, b);
        let cycle_len = path.len(); // path edges + the closing edge
        let j = match rule {
            BreakCycleRule::UniformIncluding => rng.gen_range(0..cycle_len),
            BreakCycleRule::UniformExcluding => rng.gen_range(0..cycle_len - 1),
        };
        if j < cycle_len - 1 {
            t.swap_cycle_edge(a, b, (path[j], path[j + 1]));
        }
        // j == cycle_len - 1 removes the added edge itself: no-op
    } else if ia {
        t.attach_leaf(a, b);
    } else if ib {
        t.attach_leaf(b, a);
    }
}
