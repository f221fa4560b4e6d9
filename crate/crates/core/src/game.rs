//! Two-player stochastic game contract shared by every controller, plus the
//! reward systems used to turn a finished game into a search signal.

use std::fmt;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the two seats at the table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlayerId {
    P1,
    P2,
}

impl PlayerId {
    pub const BOTH: [PlayerId; 2] = [PlayerId::P1, PlayerId::P2];

    pub fn index(self) -> usize {
        match self {
            PlayerId::P1 => 0,
            PlayerId::P2 => 1,
        }
    }

    pub fn from_index(i: usize) -> PlayerId {
        if i == 0 {
            PlayerId::P1
        } else {
            PlayerId::P2
        }
    }
}

/// The other player.
pub fn opponent(p: PlayerId) -> PlayerId {
    match p {
        PlayerId::P1 => PlayerId::P2,
        PlayerId::P2 => PlayerId::P1,
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlayerId::P1 => f.write_str("P1"),
            PlayerId::P2 => f.write_str("P2"),
        }
    }
}

impl std::str::FromStr for PlayerId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P1" => Ok(PlayerId::P1),
            "P2" => Ok(PlayerId::P2),
            other => Err(Error::Parse(format!("unknown player `{other}`"))),
        }
    }
}

/// How a terminal outcome is mapped to a scalar reward.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RewardSystem {
    /// +1 / 0 / -1 for win / draw / loss.
    R1,
    /// Own final score minus the opponent's.
    #[default]
    R2,
}

impl fmt::Display for RewardSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewardSystem::R1 => f.write_str("r1"),
            RewardSystem::R2 => f.write_str("r2"),
        }
    }
}

/// Reward in game-score units (R2) or in {-1, 0, 1} (R1).
pub type Reward = f64;

/// Final (or running) scores of a game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub score_p1: u32,
    pub score_p2: u32,
    pub terminal: bool,
}

impl GameOutcome {
    pub fn new(score_p1: u32, score_p2: u32, terminal: bool) -> Self {
        GameOutcome {
            score_p1,
            score_p2,
            terminal,
        }
    }

    pub fn score(&self, p: PlayerId) -> u32 {
        match p {
            PlayerId::P1 => self.score_p1,
            PlayerId::P2 => self.score_p2,
        }
    }

    /// `None` on a draw.
    pub fn winner(&self) -> Option<PlayerId> {
        match self.score_p1.cmp(&self.score_p2) {
            std::cmp::Ordering::Greater => Some(PlayerId::P1),
            std::cmp::Ordering::Less => Some(PlayerId::P2),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// Score difference from `p`'s point of view.
    pub fn diff(&self, p: PlayerId) -> i64 {
        self.score(p) as i64 - self.score(opponent(p)) as i64
    }
}

/// Reward of a terminal outcome seen from `perspective`.
pub fn reward(outcome: &GameOutcome, perspective: PlayerId, system: RewardSystem) -> Result<Reward> {
    if !outcome.terminal {
        return Err(Error::Contract("reward requested for a non-terminal outcome".into()));
    }
    Ok(terminal_reward(outcome, perspective, system))
}

pub(crate) fn terminal_reward(outcome: &GameOutcome, perspective: PlayerId, system: RewardSystem) -> Reward {
    let diff = outcome.diff(perspective);
    match system {
        RewardSystem::R1 => diff.signum() as f64,
        RewardSystem::R2 => diff as f64,
    }
}

/// Capabilities a game must offer to be searched.
///
/// A decision is followed by an optional chance event (for Carcassonne, the
/// next tile draw). Searchers call [`Game::sample_chance`] whenever
/// [`Game::needs_chance`] reports a pending event; expectimax-style searchers
/// enumerate [`Game::chance_outcomes`] instead.
pub trait Game: Clone + Send + Sync {
    type Action: Clone + PartialEq + Eq + Hash + fmt::Debug + Send + Sync;
    type Chance: Clone + PartialEq + fmt::Debug;

    fn current_player(&self) -> PlayerId;
    fn is_terminal(&self) -> bool;
    /// Legal decisions; empty when terminal or when a chance event is pending.
    fn legal_actions(&self) -> Vec<Self::Action>;
    /// Applies a decision taken from [`Game::legal_actions`] without re-validating it.
    fn apply_action(&mut self, action: &Self::Action);
    fn needs_chance(&self) -> bool;
    /// Distinct chance outcomes with integer weights (e.g. remaining copies),
    /// most likely first. Empty when the pending event cannot produce a
    /// decision, in which case [`Game::sample_chance`] ends the game.
    fn chance_weights(&self) -> Vec<(Self::Chance, u32)>;
    /// Distinct chance outcomes with probabilities summing to one.
    fn chance_outcomes(&self) -> Vec<(Self::Chance, f64)> {
        let w = self.chance_weights();
        let total: u32 = w.iter().map(|(_, n)| n).sum();
        w.into_iter().map(|(c, n)| (c, n as f64 / total as f64)).collect()
    }
    fn apply_chance(&mut self, outcome: &Self::Chance);
    fn sample_chance<R: Rng + ?Sized>(&mut self, rng: &mut R);
    /// Running score difference from `p`'s point of view.
    fn score_diff(&self, p: PlayerId) -> i64;
    /// Final outcome; only meaningful once terminal.
    fn outcome(&self) -> GameOutcome;
}
