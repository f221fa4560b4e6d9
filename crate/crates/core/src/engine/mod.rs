//! Two-player Carcassonne base game.
//!
//! Positions are values: [`apply`] returns a new state and never mutates its
//! input. Tile data comes from `data/tiles.toml`, loaded once.

mod board;
mod features;
mod record;
mod scoring;
mod state;
mod tiles;

pub use board::{Board, Coord, PlacedTile};
pub use features::{FeatureGraph, Segment};
pub use record::{replay, GameRecord, ReplayReport, TurnRecord, RECORD_HEADER};
pub use scoring::{ScoringTable, SCORING};
pub use state::{Action, GameState, Placement, MEEPLES_PER_PLAYER};
pub use tiles::{EdgeKind, FeatureKind, FeatureTemplate, TileKind, TileKindId, TileSet, PORT_NAMES, SIDE_NAMES, TILE_COUNT};

use crate::error::{Error, Result};
use crate::game::{GameOutcome, PlayerId};

/// Fresh game: start tile at the origin, 71 tiles shuffled by `seed`, no tile drawn yet.
pub fn new_game(seed: u64) -> GameState {
    GameState::new_game(seed)
}

pub fn legal_placements(state: &GameState, tile: TileKindId) -> Vec<Placement> {
    state.legal_placements(tile)
}

pub fn legal_actions(state: &GameState) -> Result<Vec<Action>> {
    state.legal_actions()
}

/// Places the drawn tile, scores completed features, passes the turn and draws the next tile.
pub fn apply(state: &GameState, action: &Action) -> Result<GameState> {
    state.apply(action)
}

pub fn final_scoring(state: &GameState) -> Result<GameOutcome> {
    state.final_scoring()
}

pub fn is_terminal(state: &GameState) -> bool {
    state.is_terminal()
}

pub fn current_player(state: &GameState) -> PlayerId {
    state.to_move()
}

/// Draws the next tile off the shuffled deck, discarding unplaceable ones.
pub fn draw_tile(state: &GameState) -> Result<GameState> {
    if state.drawn_tile().is_some() {
        return Err(Error::Contract("a tile is already drawn".into()));
    }
    if state.deck().is_empty() {
        return Err(Error::Contract("draw from an empty deck".into()));
    }
    let mut next = state.clone();
    next.draw_next();
    Ok(next)
}
