//! Iterative connectivity repair.
//!
//! Scans flagged cells row-major, checking their four borders in N, E, S,
//! W order. A one-sided interior border is fixed by flipping the facing
//! bit of the *neighbor* (the unique minimal-bit change that restores
//! reciprocity there), which flags the neighbor for re-checking. A
//! connection pointing off-grid is cleared on the cell itself. Passes
//! repeat until one makes no change or the iteration budget runs out.

use crate::grid::Grid;
use crate::tiles::Direction;

/// Per-cell "needs checking" flags accompanying a grid through repair.
#[derive(Clone, Debug)]
pub struct DirtyMask {
    height: usize,
    width: usize,
    flags: Vec<bool>,
}

impl DirtyMask {
    /// A mask with no cell flagged.
    pub fn new(height: usize, width: usize) -> DirtyMask {
        DirtyMask {
            height,
            width,
            flags: vec![false; height * width],
        }
    }

    /// A mask with every cell flagged.
    pub fn all(height: usize, width: usize) -> DirtyMask {
        DirtyMask {
            height,
            width,
            flags: vec![true; height * width],
        }
    }

    pub fn mark(&mut self, row: usize, col: usize) {
        self.flags[row * self.width + col] = true;
    }

    pub fn is_marked(&self, row: usize, col: usize) -> bool {
        self.flags[row * self.width + col]
    }

    pub fn marked_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

/// Result of a repair run: the fixed grid plus convergence bookkeeping.
#[derive(Clone, Debug)]
pub struct RepairOutcome {
    pub grid: Grid,
    /// Full passes executed.
    pub iterations: usize,
    /// True when the last pass made no change.
    pub converged: bool,
}

/// Default pass budget: generous, since repair settles in two passes.
pub fn default_budget(height: usize, width: usize) -> usize {
    4 * height * width
}

/// Repairs the flagged region of `grid`. Cells touched by a fix are
/// flagged in turn; flags are never cleared within a run.
pub fn repair(grid: &Grid, mask: &DirtyMask, max_iterations: usize) -> RepairOutcome {
    assert!(max_iterations > 0, "repair needs at least one pass");
    assert!(
        mask.height == grid.height() && mask.width == grid.width(),
        "mask shape must match grid"
    );
    let mut g = grid.clone();
    let mut dirty = mask.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        let mut changed = false;
        for r in 0..g.height() {
            for c in 0..g.width() {
                if !dirty.is_marked(r, c) {
                    continue;
                }
                for d in Direction::ALL {
                    let code = g.get(r, c);
                    match g.neighbor(r, c, d) {
                        Some((nr, nc)) => {
                            let other = g.get(nr, nc);
                            let back = d.opposite();
                            if code.connects(d) != other.connects(back) {
                                g.set(nr, nc, other.with_connection(back, code.connects(d)));
                                dirty.mark(nr, nc);
                                changed = true;
                            }
                        }
                        None => {
                            if code.connects(d) {
                                g.set(r, c, code.with_connection(d, false));
                                changed = true;
                            }
                        }
                    }
                }
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    RepairOutcome {
        grid: g,
        iterations,
        converged,
    }
}

/// Repairs the whole grid (every cell flagged).
pub fn repair_full(grid: &Grid, max_iterations: usize) -> RepairOutcome {
    repair(
        grid,
        &DirtyMask::all(grid.height(), grid.width()),
        max_iterations,
    )
}

/// Connects every empty cell to one in-grid neighbor by setting both
/// facing bits, so full-coverage pipelines stay full after repair.
/// Prefers a non-empty neighbor (N, E, S, W order, row-major scan); the
/// surgery touches only interior borders and keeps them reciprocal, so a
/// repaired grid stays mismatch- and boundary-violation-free.
pub fn enforce_coverage(grid: &Grid) -> Grid {
    let mut g = grid.clone();
    for r in 0..g.height() {
        for c in 0..g.width() {
            if !g.get(r, c).is_empty() {
                continue;
            }
            let pick = Direction::ALL
                .iter()
                .copied()
                .filter_map(|d| g.neighbor(r, c, d).map(|n| (d, n)))
                .find(|&(_, (nr, nc))| !g.get(nr, nc).is_empty())
                .or_else(|| {
                    Direction::ALL
                        .iter()
                        .copied()
                        .find_map(|d| g.neighbor(r, c, d).map(|n| (d, n)))
                });
            if let Some((d, (nr, nc))) = pick {
                g.set(r, c, g.get(r, c).with_connection(d, true));
                g.set(nr, nc, g.get(nr, nc).with_connection(d.opposite(), true));
            }
        }
    }
    g
}
