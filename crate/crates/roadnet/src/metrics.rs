//! Graph-theoretic quality metrics for road network grids.
//!
//! Everything here is exact integer arithmetic except `coverage`. The
//! report bundles every metric from one pass so downstream consumers
//! (fitness, behavior descriptors, benchmarks) agree on the numbers.

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, NetworkGraph};
use crate::tiles::{Direction, TileClass};

/// Every metric of one grid in a single flat record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub nodes: usize,
    pub edges: usize,
    pub connected_components: usize,
    pub cyclomatic_complexity: i64,
    pub dead_ends: usize,
    pub boundary_violations: usize,
    pub bridges: usize,
    pub adjacent_crossing_violation_score: u64,
    pub adjacent_crossing_pairs: usize,
    pub adjacent_turns: usize,
    pub straight_run_score: u64,
    pub crossings: usize,
    pub coverage: f64,
}

/// Five-dimensional structural signature used for niche mapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BehaviorDescriptor {
    pub components: usize,
    pub cyclomatic: usize,
    pub dangling: usize,
    pub adjacent_crossings: usize,
    pub adjacent_turns: usize,
}

/// Number of connected components; isolated non-empty cells count.
pub fn connected_components(graph: &NetworkGraph) -> usize {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &to in graph.neighbors(v) {
                if !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
    }
    components
}

/// Cyclomatic complexity `E - N + P`: the number of independent cycles.
pub fn cyclomatic_complexity(graph: &NetworkGraph) -> i64 {
    let p = connected_components(graph) as i64;
    graph.edge_count() as i64 - graph.node_count() as i64 + p
}

/// Nodes with exactly one reciprocated connection.
pub fn dead_ends(graph: &NetworkGraph) -> usize {
    (0..graph.node_count())
        .filter(|&n| graph.degree(n) == 1)
        .count()
}

/// Declared connections pointing off the grid edge.
pub fn boundary_violations(grid: &Grid) -> usize {
    let mut count = 0;
    for r in 0..grid.height() {
        for c in 0..grid.width() {
            let code = grid.get(r, c);
            for d in Direction::ALL {
                if code.connects(d) && grid.neighbor(r, c, d).is_none() {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Bridge count via one low-link depth-first pass (iterative, so deep
/// graphs cannot overflow the call stack).
pub fn bridges(graph: &NetworkGraph) -> usize {
    let n = graph.node_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut bridges = 0;
    // Frame: (node, parent, next adjacency slot, parent edge consumed).
    let mut stack: Vec<(usize, usize, usize, bool)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        stack.push((root, usize::MAX, 0, false));
        while let Some(frame) = stack.last_mut() {
            let (v, parent, slot, parent_used) = *frame;
            if slot < graph.neighbors(v).len() {
                frame.2 += 1;
                let to = graph.neighbors(v)[slot];
                if to == parent && !parent_used {
                    // Skip the tree edge back to the parent exactly once;
                    // a second occurrence would be a parallel edge.
                    frame.3 = true;
                } else if disc[to] != usize::MAX {
                    low[v] = low[v].min(disc[to]);
                } else {
                    disc[to] = timer;
                    low[to] = timer;
                    timer += 1;
                    stack.push((to, v, 0, false));
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        bridges += 1;
                    }
                }
            }
        }
    }
    bridges
}

fn reciprocal_pairs(grid: &Grid) -> impl Iterator<Item = ((usize, usize), (usize, usize))> + '_ {
    let (h, w) = (grid.height(), grid.width());
    (0..h).flat_map(move |r| {
        (0..w).flat_map(move |c| {
            let a = grid.get(r, c);
            let east = (c + 1 < w
                && a.connects(Direction::East)
                && grid.get(r, c + 1).connects(Direction::West))
            .then_some(((r, c), (r, c + 1)));
            let south = (r + 1 < h
                && a.connects(Direction::South)
                && grid.get(r + 1, c).connects(Direction::North))
            .then_some(((r, c), (r + 1, c)));
            east.into_iter().chain(south)
        })
    })
}

/// Reciprocally connected pairs where both tiles have 3+ connections.
pub fn adjacent_crossing_pairs(grid: &Grid) -> usize {
    reciprocal_pairs(grid)
        .filter(|&((r1, c1), (r2, c2))| {
            grid.get(r1, c1).is_crossing() && grid.get(r2, c2).is_crossing()
        })
        .count()
}

/// Adjacent-crossing violation score: for each offending pair, the sum of
/// both tiles' connection counts.
pub fn adjacent_crossing_violation_score(grid: &Grid) -> u64 {
    reciprocal_pairs(grid)
        .filter_map(|((r1, c1), (r2, c2))| {
            let (a, b) = (grid.get(r1, c1), grid.get(r2, c2));
            (a.is_crossing() && b.is_crossing()).then(|| (a.degree() + b.degree()) as u64)
        })
        .sum()
}

/// Reciprocally connected pairs where both tiles are turns.
pub fn adjacent_turns(grid: &Grid) -> usize {
    reciprocal_pairs(grid)
        .filter(|&((r1, c1), (r2, c2))| {
            grid.get(r1, c1).classify() == TileClass::Turn
                && grid.get(r2, c2).classify() == TileClass::Turn
        })
        .count()
}

/// Sum of squared lengths of maximal straight runs: horizontal runs of
/// east-west tiles (code 5) and vertical runs of north-south tiles
/// (code 10). An isolated straight tile is a run of length 1.
pub fn straight_run_score(grid: &Grid) -> u64 {
    let mut score = 0u64;
    for r in 0..grid.height() {
        let mut run = 0u64;
        for c in 0..grid.width() {
            if grid.get(r, c).value() == 5 {
                run += 1;
            } else {
                score += run * run;
                run = 0;
            }
        }
        score += run * run;
    }
    for c in 0..grid.width() {
        let mut run = 0u64;
        for r in 0..grid.height() {
            if grid.get(r, c).value() == 10 {
                run += 1;
            } else {
                score += run * run;
                run = 0;
            }
        }
        score += run * run;
    }
    score
}

/// Fraction of cells holding a non-empty tile.
pub fn coverage(grid: &Grid) -> f64 {
    grid.occupied() as f64 / (grid.height() * grid.width()) as f64
}

/// Number of tiles with 3+ connections.
pub fn crossings(grid: &Grid) -> usize {
    grid.cells().iter().filter(|c| c.is_crossing()).count()
}

/// Computes every metric of `grid` in one pass.
pub fn full_report(grid: &Grid) -> MetricReport {
    let graph = grid.build_graph();
    MetricReport {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        connected_components: connected_components(&graph),
        cyclomatic_complexity: cyclomatic_complexity(&graph),
        dead_ends: dead_ends(&graph),
        boundary_violations: boundary_violations(grid),
        bridges: bridges(&graph),
        adjacent_crossing_violation_score: adjacent_crossing_violation_score(grid),
        adjacent_crossing_pairs: adjacent_crossing_pairs(grid),
        adjacent_turns: adjacent_turns(grid),
        straight_run_score: straight_run_score(grid),
        crossings: crossings(grid),
        coverage: coverage(grid),
    }
}

/// Projects a report onto the five descriptor axes. Crossing adjacency
/// enters as the raw pair count, not the degree-weighted score.
pub fn behavior_descriptor(report: &MetricReport) -> BehaviorDescriptor {
    BehaviorDescriptor {
        components: report.connected_components,
        cyclomatic: report.cyclomatic_complexity.max(0) as usize,
        dangling: report.dead_ends,
        adjacent_crossings: report.adjacent_crossing_pairs,
        adjacent_turns: report.adjacent_turns,
    }
}
