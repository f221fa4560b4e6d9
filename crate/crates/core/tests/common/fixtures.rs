//! Hand-scored boards. The start tile D sits at the origin with its city
//! to the north (+y), road running east-west and field to the south.
//! Rotations are clockwise quarter turns.

use carcassonne_lab::engine::{GameState, Placement};
use carcassonne_lab::game::PlayerId::{self, P1, P2};

use super::tile;

pub struct Table {
    pub s: GameState,
}

impl Table {
    pub fn new() -> Self {
        Table {
            s: GameState::scenario(Vec::new()),
        }
    }

    pub fn put(&mut self, who: PlayerId, name: &str, x: i32, y: i32, rot: u8, meeple: Option<u8>) -> Result<[u32; 2], String> {
        self.s
            .place_for(who, tile(name), Placement::new(x, y, rot), meeple)
            .map_err(|e| format!("placing {name} at ({x},{y}) r{rot}: {e}"))
    }
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, expected {want:?}"))
    }
}

/// D + E closes a two-tile city: 2 points per tile.
pub fn two_tile_city() -> Result<(), String> {
    let mut t = Table::new();
    let g = t.put(P1, "E", 0, 1, 2, Some(0))?;
    expect("gain", g, [4, 0])?;
    expect("meeples back", t.s.meeples_left(P1), 7)
}

/// E + F + E closes a three-tile city holding one pennant: 3*2 + 2.
pub fn pennant_city() -> Result<(), String> {
    let mut t = Table::new();
    t.put(P1, "F", 0, -1, 0, Some(0))?;
    expect("open city", t.put(P2, "E", 1, -1, 3, None)?, [0, 0])?;
    expect("closing", t.put(P2, "E", -1, -1, 1, None)?, [8, 0])
}

/// Two pennant tiles in a four-tile city: 4*2 + 2*2.
pub fn two_pennant_city() -> Result<(), String> {
    let mut t = Table::new();
    t.put(P2, "F", 0, -1, 0, Some(0))?;
    t.put(P1, "F", -1, -1, 0, None)?;
    t.put(P1, "E", 1, -1, 3, None)?;
    expect("closing", t.put(P1, "E", -2, -1, 1, None)?, [0, 12])
}

/// W junction, start road, A monastery end: a three-tile road.
pub fn three_tile_road() -> Result<(), String> {
    let mut t = Table::new();
    expect("open road", t.put(P1, "W", 1, 0, 0, Some(2))?, [0, 0])?;
    expect("closing", t.put(P2, "A", -1, 0, 3, None)?, [3, 0])?;
    expect("meeples back", t.s.meeples_left(P1), 7)
}

fn monastery_ring(t: &mut Table, owner: PlayerId, closer: PlayerId) -> Result<[u32; 2], String> {
    t.put(closer, "B", 0, -1, 0, None)?;
    t.put(owner, "B", 0, -2, 0, Some(0))?;
    let ring = [(-1, -1), (1, -1), (-1, -2), (1, -2), (-1, -3), (0, -3)];
    for (x, y) in ring {
        expect("ring", t.put(closer, "B", x, y, 0, None)?, [0, 0])?;
    }
    t.put(closer, "B", 1, -3, 0, None)
}

/// Monastery surrounded by eight tiles scores 9, whoever places the last one.
pub fn completed_monastery() -> Result<(), String> {
    let mut t = Table::new();
    let g = monastery_ring(&mut t, P2, P1)?;
    expect("closing", g, [0, 9])?;
    expect("meeples back", t.s.meeples_left(P2), 7)
}

/// Two P1 meeples against one P2 on a seven-tile road: P1 alone scores.
pub fn road_majority() -> Result<(), String> {
    let mut t = Table::new();
    t.put(P2, "U", -1, 0, 1, Some(0))?;
    for x in [0, 1, 2] {
        t.put(P1, "B", x, -1, 0, None)?;
    }
    t.put(P1, "U", 2, 0, 1, Some(0))?;
    t.put(P1, "U", 3, 0, 1, Some(0))?;
    expect("two P1 meeples", t.s.meeples_left(P1), 5)?;
    expect("joined", t.put(P1, "U", 1, 0, 1, None)?, [0, 0])?;
    expect("east end", t.put(P2, "W", 4, 0, 0, None)?, [0, 0])?;
    expect("closing", t.put(P2, "A", -2, 0, 3, None)?, [7, 0])?;
    expect("meeples back", (t.s.meeples_left(P1), t.s.meeples_left(P2)), (7, 7))
}

/// One meeple each on a five-tile city: both score 10.
pub fn city_tie() -> Result<(), String> {
    let mut t = Table::new();
    t.put(P1, "G", 0, 1, 0, Some(0))?;
    t.put(P2, "E", 1, 1, 0, Some(0))?;
    t.put(P1, "N", 0, 2, 2, None)?;
    expect("closing", t.put(P2, "N", 1, 2, 3, None)?, [10, 10])
}

/// A farmer beside one completed city earns 3 at the end.
pub fn farm_one_city() -> Result<(), String> {
    let mut t = Table::new();
    expect("unclaimed city closes", t.put(P1, "E", 0, 1, 2, Some(1))?, [0, 0])?;
    expect("farmer stays", t.s.meeples_left(P1), 6)?;
    expect("end points", t.s.end_game_points(), [3, 0])
}

/// Only completed cities count for a farm.
pub fn farm_counts_completed_cities() -> Result<(), String> {
    let mut t = Table::new();
    expect("south city closes", t.put(P2, "H", 0, 1, 0, Some(2))?, [0, 0])?;
    expect("one city", t.s.end_game_points(), [0, 3])?;
    expect("north city closes", t.put(P1, "E", 0, 2, 2, None)?, [0, 0])?;
    expect("two cities", t.s.end_game_points(), [0, 6])
}

/// A farm touching the same city through two of its fields counts it once.
pub fn farm_city_counted_once() -> Result<(), String> {
    let mut t = Table::new();
    t.put(P1, "E", 0, 1, 2, Some(1))?;
    t.put(P2, "U", 1, 0, 1, None)?;
    t.put(P2, "B", 1, 1, 0, None)?;
    expect("end points", t.s.end_game_points(), [3, 0])
}

/// Unfinished city with a pennant, road and monastery at game end.
pub fn incomplete_features() -> Result<(), String> {
    let mut t = Table::new();
    t.put(P1, "M", 0, 1, 2, Some(0))?;
    t.put(P2, "U", 1, 0, 1, Some(0))?;
    t.put(P1, "B", 0, -1, 0, Some(0))?;
    // city 2 tiles + 1 pennant, monastery 1 + two neighbours, road 2 tiles
    expect("end points", t.s.end_game_points(), [3 + 3, 2])
}

/// A tied farm pays both farmers.
pub fn farm_tie() -> Result<(), String> {
    let mut t = Table::new();
    t.put(P1, "E", 0, 1, 2, Some(1))?;
    t.put(P2, "U", 1, 0, 1, Some(2))?;
    t.put(P2, "B", 1, 1, 0, None)?;
    expect("end points", t.s.end_game_points(), [3, 3])
}

/// Road slots already holding an opponent meeple are not offered.
pub fn opponent_slot_excluded() -> Result<(), String> {
    let mut t = Table::new();
    t.put(P2, "U", -1, 0, 1, Some(0))?;
    let u = tile("U");
    let p = Placement::new(1, 0, 1);
    expect("road blocked for P1", t.s.slot_claimable(u, p, 0, P1), false)?;
    expect("road open for P2", t.s.slot_claimable(u, p, 0, P2), true)?;
    expect("field open for P1", t.s.slot_claimable(u, p, 1, P1), true)?;
    if t.put(P1, "U", 1, 0, 1, Some(0)).is_ok() {
        return Err("claimed a road holding an opponent meeple".into());
    }
    Ok(())
}

/// Closing an unclaimed road pays nobody; the monastery counts its one
/// neighbour at the end.
pub fn monastery_with_road() -> Result<(), String> {
    let mut t = Table::new();
    // A's road ends at the monastery; the start road is closed by a W junction
    t.put(P1, "A", -1, 0, 3, Some(0))?;
    expect("road closes", t.put(P2, "W", 1, 0, 0, None)?, [0, 0])?;
    // monastery: 1 + neighbour (0,0)
    expect("end points", t.s.end_game_points(), [2, 0])
}

pub const ALL: &[(&str, fn() -> Result<(), String>)] = &[
    ("two_tile_city", two_tile_city),
    ("pennant_city", pennant_city),
    ("two_pennant_city", two_pennant_city),
    ("three_tile_road", three_tile_road),
    ("completed_monastery", completed_monastery),
    ("road_majority", road_majority),
    ("city_tie", city_tie),
    ("farm_one_city", farm_one_city),
    ("farm_counts_completed_cities", farm_counts_completed_cities),
    ("farm_city_counted_once", farm_city_counted_once),
    ("incomplete_features", incomplete_features),
    ("farm_tie", farm_tie),
    ("opponent_slot_excluded", opponent_slot_excluded),
    ("monastery_with_road", monastery_with_road),
];
