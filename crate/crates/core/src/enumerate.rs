//! Set-partition enumeration by restricted growth strings.
//!
//! Player `p` goes into one of the blocks opened by players `1..p` or opens a
//! new one, which yields every partition of `1..=n` exactly once. Blocks that
//! would exceed the size bound are skipped, and a caller-supplied `admit`
//! hook can prune placements early.

use std::ops::ControlFlow;

use crate::game::{Player, SizeBound};
use crate::partition::CoalitionStructure;

/// Calls `visit` with the blocks of every partition of `1..=n` whose parts
/// respect `bound` and whose placements all pass `admit(block, player)`.
pub fn for_each_partition<A, V>(n: usize, bound: SizeBound, mut admit: A, mut visit: V) -> ControlFlow<()>
where
    A: FnMut(&[Player], Player) -> bool,
    V: FnMut(&[Vec<Player>]) -> ControlFlow<()>,
{
    let mut blocks: Vec<Vec<Player>> = Vec::new();
    place(1, n, bound, &mut blocks, &mut admit, &mut visit)
}

fn place<A, V>(
    p: Player,
    n: usize,
    bound: SizeBound,
    blocks: &mut Vec<Vec<Player>>,
    admit: &mut A,
    visit: &mut V,
) -> ControlFlow<()>
where
    A: FnMut(&[Player], Player) -> bool,
    V: FnMut(&[Vec<Player>]) -> ControlFlow<()>,
{
    if p > n {
        return visit(blocks);
    }
    for b in 0..blocks.len() {
        if !bound.admits(blocks[b].len() + 1) || !admit(&blocks[b], p) {
            continue;
        }
        blocks[b].push(p);
        let flow = place(p + 1, n, bound, blocks, admit, visit);
        blocks[b].pop();
        flow?;
    }
    if admit(&[], p) {
        blocks.push(vec![p]);
        let flow = place(p + 1, n, bound, blocks, admit, visit);
        blocks.pop();
        flow?;
    }
    ControlFlow::Continue(())
}

/// Every partition of `1..=n` with parts bounded by `bound`.
pub fn all_partitions(n: usize, bound: SizeBound) -> Vec<CoalitionStructure> {
    let mut out = Vec::new();
    let _ = for_each_partition(
        n,
        bound,
        |_, _| true,
        |blocks| {
            out.push(CoalitionStructure::new(n, blocks.to_vec(), bound).expect("enumerated partition is valid"));
            ControlFlow::Continue(())
        },
    );
    out
}
