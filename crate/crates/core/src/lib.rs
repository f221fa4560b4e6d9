//! Carcassonne game-playing laboratory: a base-game engine, search
//! controllers (MCTS, RAVE, Star expectimax, evolved-UCT MCTS, random) and a
//! round-robin league harness.

pub mod controller;
pub mod engine;
pub mod error;
pub mod evolution;
pub mod expr;
pub mod game;
pub mod mcts;
pub mod par;
pub mod random;
pub mod rave;
pub mod star;
pub mod tournament;

pub use error::{Error, Result};
