//! The tile grid, its derived connection graph, and the JSON interchange
//! format `{"height": H, "width": W, "cells": [codes...]}` (row-major).

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::tiles::{Direction, TileCode};

/// Errors raised when building or parsing a grid.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid dimensions must be positive, got {height}x{width}")]
    EmptyDimensions { height: usize, width: usize },
    #[error("expected {expected} cells for a {height}x{width} grid, got {actual}")]
    CellCountMismatch {
        height: usize,
        width: usize,
        expected: usize,
        actual: usize,
    },
    #[error("cell {index} holds code {value}, outside 0..=15")]
    CodeOutOfRange { index: usize, value: i64 },
    #[error("malformed grid document: {0}")]
    Malformed(#[from] serde_json::Error),
}

/// A height x width matrix of tile codes, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    height: usize,
    width: usize,
    cells: Vec<TileCode>,
}

impl Grid {
    /// Builds a grid, validating dimensions against the cell count.
    pub fn new(height: usize, width: usize, cells: Vec<TileCode>) -> Result<Grid, GridError> {
        if height == 0 || width == 0 {
            return Err(GridError::EmptyDimensions { height, width });
        }
        let expected = height * width;
        if cells.len() != expected {
            return Err(GridError::CellCountMismatch {
                height,
                width,
                expected,
                actual: cells.len(),
            });
        }
        Ok(Grid {
            height,
            width,
            cells,
        })
    }

    /// A grid with every cell set to `code`.
    pub fn filled(height: usize, width: usize, code: TileCode) -> Grid {
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        Grid {
            height,
            width,
            cells: vec![code; height * width],
        }
    }

    /// Convenience constructor from raw code values; panics on bad input.
    pub fn from_rows(rows: &[&[u8]]) -> Grid {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let cells = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), width, "ragged rows");
                r.iter().map(|&v| TileCode::new(v).expect("code in 0..=15"))
            })
            .collect();
        Grid::new(height, width, cells).expect("consistent literal grid")
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Row-major cell slice.
    pub fn cells(&self) -> &[TileCode] {
        &self.cells
    }

    /// Flat index of `(row, col)`.
    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    pub fn get(&self, row: usize, col: usize) -> TileCode {
        self.cells[self.index(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, code: TileCode) {
        let i = self.index(row, col);
        self.cells[i] = code;
    }

    /// Coordinates of the 4-neighbor in direction `d`, if it is in-grid.
    pub fn neighbor(&self, row: usize, col: usize, d: Direction) -> Option<(usize, usize)> {
        let (dr, dc) = d.offset();
        let r = row.checked_add_signed(dr)?;
        let c = col.checked_add_signed(dc)?;
        (r < self.height && c < self.width).then_some((r, c))
    }

    /// Number of non-empty cells.
    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_empty()).count()
    }

    /// The grid rotated 90 degrees clockwise, rotating each tile with the
    /// layout so connectivity is preserved.
    pub fn rotate_cw(&self) -> Grid {
        let (h, w) = (self.height, self.width);
        let mut cells = vec![TileCode::EMPTY; h * w];
        for r in 0..h {
            for c in 0..w {
                // (r, c) lands at (c, h - 1 - r) in the w x h result.
                cells[c * h + (h - 1 - r)] = self.get(r, c).rotate_cw();
            }
        }
        Grid {
            height: w,
            width: h,
            cells,
        }
    }

    /// Interior borders where exactly one side declares a connection.
    pub fn mismatch_count(&self) -> usize {
        let mut count = 0;
        for r in 0..self.height {
            for c in 0..self.width {
                let a = self.get(r, c);
                if c + 1 < self.width {
                    let b = self.get(r, c + 1);
                    if a.connects(Direction::East) != b.connects(Direction::West) {
                        count += 1;
                    }
                }
                if r + 1 < self.height {
                    let b = self.get(r + 1, c);
                    if a.connects(Direction::South) != b.connects(Direction::North) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    /// Derives the graph of reciprocated connections between adjacent
    /// non-empty cells.
    pub fn build_graph(&self) -> NetworkGraph {
        let mut node_of = vec![usize::MAX; self.cells.len()];
        let mut coords = Vec::new();
        for r in 0..self.height {
            for c in 0..self.width {
                if !self.get(r, c).is_empty() {
                    node_of[self.index(r, c)] = coords.len();
                    coords.push((r, c));
                }
            }
        }
        let mut adjacency = vec![Vec::new(); coords.len()];
        let mut edges = Vec::new();
        for r in 0..self.height {
            for c in 0..self.width {
                let a = self.get(r, c);
                if c + 1 < self.width {
                    let b = self.get(r, c + 1);
                    if a.connects(Direction::East) && b.connects(Direction::West) {
                        let (u, v) = (node_of[self.index(r, c)], node_of[self.index(r, c + 1)]);
                        adjacency[u].push(v);
                        adjacency[v].push(u);
                        edges.push((u, v));
                    }
                }
                if r + 1 < self.height {
                    let b = self.get(r + 1, c);
                    if a.connects(Direction::South) && b.connects(Direction::North) {
                        let (u, v) = (node_of[self.index(r, c)], node_of[self.index(r + 1, c)]);
                        adjacency[u].push(v);
                        adjacency[v].push(u);
                        edges.push((u, v));
                    }
                }
            }
        }
        NetworkGraph {
            coords,
            adjacency,
            edges,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Grid, GridError> {
        let doc: GridDoc = serde_json::from_str(text)?;
        doc.validate()
    }
}

#[derive(Serialize, Deserialize)]
struct GridDoc {
    height: usize,
    width: usize,
    cells: Vec<i64>,
}

impl GridDoc {
    fn validate(self) -> Result<Grid, GridError> {
        let mut cells = Vec::with_capacity(self.cells.len());
        for (index, &value) in self.cells.iter().enumerate() {
            let code = u8::try_from(value)
                .ok()
                .and_then(TileCode::new)
                .ok_or(GridError::CodeOutOfRange { index, value })?;
            cells.push(code);
        }
        Grid::new(self.height, self.width, cells)
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let doc = GridDoc {
            height: self.height,
            width: self.width,
            cells: self.cells.iter().map(|c| c.value() as i64).collect(),
        };
        doc.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Grid, D::Error> {
        let doc = GridDoc::deserialize(deserializer)?;
        doc.validate().map_err(D::Error::custom)
    }
}

/// Connection graph over the non-empty cells of a grid.
///
/// Nodes are numbered in row-major cell order; isolated non-empty cells
/// are nodes with no incident edges.
#[derive(Clone, Debug)]
pub struct NetworkGraph {
    coords: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl NetworkGraph {
    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Grid coordinates of each node.
    pub fn coords(&self) -> &[(usize, usize)] {
        &self.coords
    }

    /// Undirected edge list, each edge listed once.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    /// Number of reciprocated connections at `node`.
    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }
}
