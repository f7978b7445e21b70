//! 4-bit connectivity tiles and their pairwise compatibility rules.
//!
//! A tile code packs four booleans, one per cardinal direction, into the
//! low nibble of a byte: `8*north + 4*east + 2*south + 1*west`. Code 0 is
//! the empty cell; all 16 values are admissible grid content.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the four cardinal directions a tile can connect toward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    /// All directions in N, E, S, W order, the canonical scan order.
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    /// The direction pointing back at the sender.
    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
        }
    }

    /// Row and column delta of the adjacent cell in this direction.
    pub fn offset(self) -> (isize, isize) {
        match self {
            Direction::North => (-1, 0),
            Direction::East => (0, 1),
            Direction::South => (1, 0),
            Direction::West => (0, -1),
        }
    }

    fn mask(self) -> u8 {
        match self {
            Direction::North => 0b1000,
            Direction::East => 0b0100,
            Direction::South => 0b0010,
            Direction::West => 0b0001,
        }
    }
}

/// Structural class of a tile, by connection count and shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TileClass {
    Empty,
    DeadEnd,
    Straight,
    Turn,
    TeeCrossing,
    FullCrossing,
}

/// A tile's connectivity, encoded in 4 bits: north, east, south, west.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TileCode(u8);

impl TileCode {
    /// The empty cell.
    pub const EMPTY: TileCode = TileCode(0);

    /// Largest valid code value.
    pub const MAX: u8 = 15;

    /// Codes with three or more connections, in ascending order.
    pub const CROSSINGS: [TileCode; 5] = [
        TileCode(7),
        TileCode(11),
        TileCode(13),
        TileCode(14),
        TileCode(15),
    ];

    /// Builds a code from `0..=15`, rejecting anything else.
    pub fn new(code: u8) -> Option<TileCode> {
        (code <= Self::MAX).then_some(TileCode(code))
    }

    /// Packs four connection flags into a code.
    pub fn encode(north: bool, east: bool, south: bool, west: bool) -> TileCode {
        TileCode((north as u8) << 3 | (east as u8) << 2 | (south as u8) << 1 | west as u8)
    }

    /// The raw code value.
    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Whether the tile declares a connection toward `d`.
    pub fn connects(self, d: Direction) -> bool {
        self.0 & d.mask() != 0
    }

    /// Copy of the code with the `d` connection set or cleared.
    pub fn with_connection(self, d: Direction, on: bool) -> TileCode {
        if on {
            TileCode(self.0 | d.mask())
        } else {
            TileCode(self.0 & !d.mask())
        }
    }

    /// Number of declared connections, 0 through 4.
    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    /// Tiles with three or more connections count as crossings.
    pub fn is_crossing(self) -> bool {
        self.degree() >= 3
    }

    /// The connection pattern rotated 90 degrees clockwise.
    pub fn rotate_cw(self) -> TileCode {
        let n = (self.0 >> 3) & 1;
        let e = (self.0 >> 2) & 1;
        let s = (self.0 >> 1) & 1;
        let w = self.0 & 1;
        TileCode(w << 3 | n << 2 | e << 1 | s)
    }

    pub fn classify(self) -> TileClass {
        match (self.degree(), self.0) {
            (0, _) => TileClass::Empty,
            (1, _) => TileClass::DeadEnd,
            (2, 0b1010) | (2, 0b0101) => TileClass::Straight,
            (2, _) => TileClass::Turn,
            (3, _) => TileClass::TeeCrossing,
            _ => TileClass::FullCrossing,
        }
    }

    /// All 16 codes in ascending order.
    pub fn all() -> impl Iterator<Item = TileCode> {
        (0..=Self::MAX).map(TileCode)
    }
}

impl fmt::Display for TileCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for TileCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for TileCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<TileCode, D::Error> {
        let raw = u8::deserialize(deserializer)?;
        TileCode::new(raw)
            .ok_or_else(|| D::Error::custom(format!("tile code {raw} outside 0..=15")))
    }
}

/// True when `a`'s edge toward `d` agrees with neighbor `b`'s edge back:
/// both connected or both closed.
pub fn compatible(a: TileCode, b: TileCode, d: Direction) -> bool {
    a.connects(d) == b.connects(d.opposite())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(code: u8) -> TileCode {
        TileCode::new(code).unwrap()
    }

    #[test]
    fn encoding_matches_bit_layout() {
        assert_eq!(TileCode::encode(true, false, false, false).value(), 8);
        assert_eq!(TileCode::encode(false, true, false, false).value(), 4);
        assert_eq!(TileCode::encode(false, false, true, false).value(), 2);
        assert_eq!(TileCode::encode(false, false, false, true).value(), 1);
        assert_eq!(TileCode::encode(true, true, true, true).value(), 15);
        assert_eq!(TileCode::encode(false, true, true, false).value(), 6);
    }

    #[test]
    fn new_rejects_out_of_range() {
        assert!(TileCode::new(15).is_some());
        assert!(TileCode::new(16).is_none());
        assert!(TileCode::new(255).is_none());
    }

    #[test]
    fn connects_reads_each_bit() {
        let code = t(0b1010);
        assert!(code.connects(Direction::North));
        assert!(!code.connects(Direction::East));
        assert!(code.connects(Direction::South));
        assert!(!code.connects(Direction::West));
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(t(10).rotate_cw(), t(5));
        assert_eq!(t(5).rotate_cw(), t(10));
        assert_eq!(t(6).rotate_cw(), t(3));
        assert_eq!(t(3).rotate_cw(), t(9));
        assert_eq!(t(9).rotate_cw(), t(12));
        assert_eq!(t(12).rotate_cw(), t(6));
        assert_eq!(t(14).rotate_cw(), t(7));
        assert_eq!(t(7).rotate_cw(), t(11));
        assert_eq!(t(11).rotate_cw(), t(13));
        assert_eq!(t(13).rotate_cw(), t(14));
        assert_eq!(t(15).rotate_cw(), t(15));
        assert_eq!(t(0).rotate_cw(), t(0));
    }

    #[test]
    fn four_rotations_are_identity() {
        for code in TileCode::all() {
            let back = code.rotate_cw().rotate_cw().rotate_cw().rotate_cw();
            assert_eq!(back, code);
        }
    }

    #[test]
    fn rotation_preserves_degree() {
        for code in TileCode::all() {
            assert_eq!(code.rotate_cw().degree(), code.degree());
        }
    }

    #[test]
    fn classification_covers_all_codes() {
        assert_eq!(t(0).classify(), TileClass::Empty);
        for &c in &[1, 2, 4, 8] {
            assert_eq!(t(c).classify(), TileClass::DeadEnd);
        }
        assert_eq!(t(5).classify(), TileClass::Straight);
        assert_eq!(t(10).classify(), TileClass::Straight);
        for &c in &[3, 6, 9, 12] {
            assert_eq!(t(c).classify(), TileClass::Turn);
        }
        for &c in &[7, 11, 13, 14] {
            assert_eq!(t(c).classify(), TileClass::TeeCrossing);
        }
        assert_eq!(t(15).classify(), TileClass::FullCrossing);
    }

    #[test]
    fn crossing_codes_are_exactly_degree_three_plus() {
        for code in TileCode::all() {
            assert_eq!(code.is_crossing(), code.degree() >= 3);
            assert_eq!(TileCode::CROSSINGS.contains(&code), code.is_crossing(),);
        }
    }

    #[test]
    fn compatibility_requires_agreement() {
        // 4 (east) meets 1 (west): both declare the shared border.
        assert!(compatible(t(4), t(1), Direction::East));
        // 4 (east) meets 2 (south): right tile leaves the border closed.
        assert!(!compatible(t(4), t(2), Direction::East));
        // Two closed borders agree.
        assert!(compatible(t(2), t(2), Direction::East));
        assert!(compatible(t(0), t(0), Direction::North));
    }

    #[test]
    fn compatibility_is_symmetric() {
        for a in TileCode::all() {
            for b in TileCode::all() {
                for d in Direction::ALL {
                    assert_eq!(compatible(a, b, d), compatible(b, a, d.opposite()));
                }
            }
        }
    }

    #[test]
    fn with_connection_round_trips() {
        for code in TileCode::all() {
            for d in Direction::ALL {
                let on = code.with_connection(d, true);
                assert!(on.connects(d));
                let off = code.with_connection(d, false);
                assert!(!off.connects(d));
                assert_eq!(code.with_connection(d, code.connects(d)), code);
            }
        }
    }

    #[test]
    fn serde_rejects_out_of_range_codes() {
        let ok: TileCode = serde_json::from_str("9").unwrap();
        assert_eq!(ok, t(9));
        assert!(serde_json::from_str::<TileCode>("16").is_err());
    }
}
