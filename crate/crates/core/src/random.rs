//! Uniform-random baseline.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::game::Game;

/// A legal action drawn uniformly at random.
pub fn random_move<G: Game, R: Rng + ?Sized>(state: &G, rng: &mut R) -> Result<G::Action> {
    state
        .legal_actions()
        .choose(rng)
        .cloned()
        .ok_or_else(|| Error::Contract("random_move on a position without legal actions".into()))
}
