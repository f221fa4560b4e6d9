use std::fmt;

use serde::{Deserialize, Serialize};

use super::tiles::TileKindId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const ORIGIN: Coord = Coord { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Coord { x, y }
    }

    /// Neighbour across side `s` (N=0, E=1, S=2, W=3); north is +y.
    pub fn step(self, side: usize) -> Coord {
        match side {
            0 => Coord::new(self.x, self.y + 1),
            1 => Coord::new(self.x + 1, self.y),
            2 => Coord::new(self.x, self.y - 1),
            _ => Coord::new(self.x - 1, self.y),
        }
    }

    pub fn ring(self) -> impl Iterator<Item = Coord> {
        const D: [(i32, i32); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
        D.into_iter().map(move |(dx, dy)| Coord::new(self.x + dx, self.y + dy))
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlacedTile {
    pub pos: Coord,
    pub kind: TileKindId,
    /// Clockwise quarter turns.
    pub rot: u8,
    /// Id of the tile's slot 0 in the feature graph.
    pub(crate) feat_base: u16,
}

const EMPTY: u8 = 0;
const FRONTIER: u8 = u8::MAX;
const MARGIN: i32 = 4;

/// Dense grid over the bounding box of placed tiles, grown on demand.
///
/// A cell holds 0 when empty, `FRONTIER` when empty but adjacent to a tile,
/// otherwise the placement index plus one.
#[derive(Clone, Debug)]
pub struct Board {
    min_x: i32,
    min_y: i32,
    width: i32,
    height: i32,
    cells: Vec<u8>,
    placed: Vec<PlacedTile>,
    frontier: Vec<Coord>,
}

impl Board {
    pub(crate) fn new() -> Self {
        let side = 2 * MARGIN + 1;
        Board {
            min_x: -MARGIN,
            min_y: -MARGIN,
            width: side,
            height: side,
            cells: vec![EMPTY; (side * side) as usize],
            placed: Vec::with_capacity(72),
            frontier: Vec::with_capacity(48),
        }
    }

    #[inline]
    fn offset(&self, c: Coord) -> Option<usize> {
        let dx = c.x - self.min_x;
        let dy = c.y - self.min_y;
        if dx < 0 || dy < 0 || dx >= self.width || dy >= self.height {
            None
        } else {
            Some((dy * self.width + dx) as usize)
        }
    }

    /// Placement index of the tile at `c`.
    #[inline]
    pub(crate) fn index_at(&self, c: Coord) -> Option<usize> {
        match self.offset(c).map(|o| self.cells[o]) {
            Some(v) if v != EMPTY && v != FRONTIER => Some(v as usize - 1),
            _ => None,
        }
    }

    #[inline]
    pub fn get(&self, c: Coord) -> Option<&PlacedTile> {
        self.index_at(c).map(|i| &self.placed[i])
    }

    pub fn is_occupied(&self, c: Coord) -> bool {
        self.index_at(c).is_some()
    }

    pub fn placed(&self) -> &[PlacedTile] {
        &self.placed
    }

    pub fn len(&self) -> usize {
        self.placed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placed.is_empty()
    }

    /// Empty cells adjacent to at least one tile.
    pub fn frontier(&self) -> &[Coord] {
        &self.frontier
    }

    fn ensure_room(&mut self, c: Coord) {
        let lo_x = c.x - 1;
        let hi_x = c.x + 1;
        let lo_y = c.y - 1;
        let hi_y = c.y + 1;
        if lo_x >= self.min_x
            && lo_y >= self.min_y
            && hi_x < self.min_x + self.width
            && hi_y < self.min_y + self.height
        {
            return;
        }
        let new_min_x = self.min_x.min(lo_x - MARGIN);
        let new_min_y = self.min_y.min(lo_y - MARGIN);
        let new_max_x = (self.min_x + self.width).max(hi_x + MARGIN + 1);
        let new_max_y = (self.min_y + self.height).max(hi_y + MARGIN + 1);
        let w = new_max_x - new_min_x;
        let h = new_max_y - new_min_y;
        let mut cells = vec![EMPTY; (w * h) as usize];
        for y in 0..self.height {
            for x in 0..self.width {
                let v = self.cells[(y * self.width + x) as usize];
                let nx = x + self.min_x - new_min_x;
                let ny = y + self.min_y - new_min_y;
                cells[(ny * w + nx) as usize] = v;
            }
        }
        self.min_x = new_min_x;
        self.min_y = new_min_y;
        self.width = w;
        self.height = h;
        self.cells = cells;
    }

    /// Puts a tile at `c`; the caller guarantees `c` is free.
    pub(crate) fn put(&mut self, tile: PlacedTile) -> usize {
        let c = tile.pos;
        self.ensure_room(c);
        let idx = self.placed.len();
        debug_assert!(idx < FRONTIER as usize - 1);
        let o = self.offset(c).expect("room ensured");
        if self.cells[o] == FRONTIER {
            if let Some(i) = self.frontier.iter().position(|f| *f == c) {
                self.frontier.swap_remove(i);
            }
        }
        self.cells[o] = idx as u8 + 1;
        self.placed.push(tile);
        for s in 0..4 {
            let n = c.step(s);
            let no = self.offset(n).expect("room ensured");
            if self.cells[no] == EMPTY {
                self.cells[no] = FRONTIER;
                self.frontier.push(n);
            }
        }
        idx
    }

    /// Number of the eight surrounding cells holding a tile.
    pub fn occupied_ring(&self, c: Coord) -> u8 {
        c.ring().filter(|n| self.is_occupied(*n)).count() as u8
    }
}
