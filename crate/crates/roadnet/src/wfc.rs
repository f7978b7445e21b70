//! Wave function collapse over tile codes.
//!
//! Each cell holds a 16-bit possibility mask. The loop collapses the
//! uncollapsed cell with the fewest possibilities (row-major on ties) to
//! one uniformly random survivor, then filters the four neighbor masks:
//! codes incompatible with the collapsed tile's facing bit drop out, and
//! when crossing separation is on, a collapsed 3+ degree tile removes all
//! crossing codes from its neighbors. An emptied mask aborts the attempt;
//! attempts restart with the same RNG stream up to `max_attempts`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::Grid;
use crate::tiles::{Direction, TileCode};

/// Settings for one generation call.
#[derive(Clone, Debug)]
pub struct WfcConfig {
    /// Restart budget; generation fails once it is exhausted.
    pub max_attempts: usize,
    /// Remove crossing codes next to a collapsed crossing, which
    /// guarantees a violation score of zero.
    pub forbid_adjacent_crossings: bool,
    /// Strip outward-pointing codes from border cells up front instead of
    /// tolerating boundary violations.
    pub hard_boundary: bool,
    /// Keep the empty tile in the alphabet. Off by default so every
    /// collapsed cell carries road.
    pub allow_empty: bool,
    pub seed: u64,
}

impl Default for WfcConfig {
    fn default() -> Self {
        WfcConfig {
            max_attempts: 10,
            forbid_adjacent_crossings: true,
            hard_boundary: false,
            allow_empty: false,
            seed: 0,
        }
    }
}

/// All attempts ran out of possibilities somewhere.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("collapse failed after {attempts} attempts; last contradiction at ({row}, {col})")]
pub struct WfcFailure {
    pub attempts: usize,
    pub row: usize,
    pub col: usize,
}

const FULL: u16 = 0xFFFF;
const CROSSING_MASK: u16 = (1 << 7) | (1 << 11) | (1 << 13) | (1 << 14) | (1 << 15);

/// Runs wave function collapse on an `height x width` grid.
pub fn generate(height: usize, width: usize, cfg: &WfcConfig) -> Result<Grid, WfcFailure> {
    assert!(height > 0 && width > 0, "grid dimensions must be positive");
    assert!(cfg.max_attempts > 0, "need at least one attempt");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut last_contradiction = (0, 0);
    for _ in 0..cfg.max_attempts {
        match attempt(height, width, cfg, &mut rng) {
            Ok(grid) => return Ok(grid),
            Err(at) => last_contradiction = at,
        }
    }
    Err(WfcFailure {
        attempts: cfg.max_attempts,
        row: last_contradiction.0,
        col: last_contradiction.1,
    })
}

fn initial_mask(cfg: &WfcConfig, row: usize, col: usize, h: usize, w: usize) -> u16 {
    let mut mask = FULL;
    if !cfg.allow_empty {
        mask &= !1;
    }
    if cfg.hard_boundary {
        for code in TileCode::all() {
            let out = (code.connects(Direction::North) && row == 0)
                || (code.connects(Direction::South) && row == h - 1)
                || (code.connects(Direction::West) && col == 0)
                || (code.connects(Direction::East) && col == w - 1);
            if out {
                mask &= !(1 << code.value());
            }
        }
    }
    mask
}

fn attempt(
    h: usize,
    w: usize,
    cfg: &WfcConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Grid, (usize, usize)> {
    let mut masks = vec![0u16; h * w];
    for r in 0..h {
        for c in 0..w {
            let m = initial_mask(cfg, r, c, h, w);
            if m == 0 {
                return Err((r, c));
            }
            masks[r * w + c] = m;
        }
    }
    let mut collapsed = vec![false; h * w];
    for _ in 0..h * w {
        // Lowest possibility count first; ties resolve row-major.
        let mut target = usize::MAX;
        let mut best = u32::MAX;
        for i in 0..h * w {
            if !collapsed[i] {
                let n = masks[i].count_ones();
                if n < best {
                    best = n;
                    target = i;
                }
            }
        }
        let (r, c) = (target / w, target % w);
        let pick = nth_set_bit(masks[target], rng.random_range(0..best));
        masks[target] = 1 << pick;
        collapsed[target] = true;
        let code = TileCode::new(pick as u8).expect("bit index is a code");

        for d in Direction::ALL {
            let Some((nr, nc)) = neighbor(r, c, d, h, w) else {
                continue;
            };
            let ni = nr * w + nc;
            let mut m = masks[ni];
            let back = d.opposite();
            for cand in 0..16u8 {
                if m & (1 << cand) == 0 {
                    continue;
                }
                let cand_code = TileCode::new(cand).expect("candidate is a code");
                if cand_code.connects(back) != code.connects(d) {
                    m &= !(1 << cand);
                }
            }
            if cfg.forbid_adjacent_crossings && code.is_crossing() {
                m &= !CROSSING_MASK;
            }
            if m == 0 {
                return Err((nr, nc));
            }
            masks[ni] = m;
        }
    }
    let cells = masks
        .iter()
        .map(|m| TileCode::new(m.trailing_zeros() as u8).expect("collapsed to one code"))
        .collect();
    Ok(Grid::new(h, w, cells).expect("mask layout matches grid"))
}

fn neighbor(r: usize, c: usize, d: Direction, h: usize, w: usize) -> Option<(usize, usize)> {
    let (dr, dc) = d.offset();
    let nr = r.checked_add_signed(dr)?;
    let nc = c.checked_add_signed(dc)?;
    (nr < h && nc < w).then_some((nr, nc))
}

fn nth_set_bit(mask: u16, n: u32) -> u32 {
    let mut remaining = n;
    for bit in 0..16 {
        if mask & (1 << bit) != 0 {
            if remaining == 0 {
                return bit;
            }
            remaining -= 1;
        }
    }
    unreachable!("n must be below the popcount of mask");
}
