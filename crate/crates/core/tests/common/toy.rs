//! A small two-player game with chance events, for testing searchers
//! without the cost of Carcassonne.
//!
//! Each turn the mover picks one of `width` actions worth `0..width` points,
//! then a die adds 0, 1 or 2 points (weights 1:2:1) to the same player.
//! Actions matching the turn parity score double. Scores are multiplied by
//! `scale`.

use carcassonne_lab::game::{Game, GameOutcome, PlayerId};
use rand::Rng;

#[derive(Clone, Debug)]
pub struct Toy {
    pub width: u32,
    pub turns_left: u32,
    pub scale: u32,
    pub scores: [u32; 2],
    pub to_move: PlayerId,
    pub pending: Option<PlayerId>,
}

impl Toy {
    pub fn new(width: u32, turns: u32) -> Self {
        Toy {
            width,
            turns_left: turns,
            scale: 1,
            scores: [0, 0],
            to_move: PlayerId::P1,
            pending: None,
        }
    }

    pub fn scaled(mut self, scale: u32) -> Self {
        self.scale = scale;
        self
    }
}

impl Game for Toy {
    type Action = u32;
    type Chance = u32;

    fn current_player(&self) -> PlayerId {
        self.to_move
    }

    fn is_terminal(&self) -> bool {
        self.turns_left == 0 && self.pending.is_none()
    }

    fn legal_actions(&self) -> Vec<u32> {
        if self.is_terminal() || self.pending.is_some() {
            Vec::new()
        } else {
            (0..self.width).collect()
        }
    }

    fn apply_action(&mut self, a: &u32) {
        let bonus = if a % 2 == self.turns_left % 2 { 2 } else { 1 };
        self.scores[self.to_move.index()] += a * bonus * self.scale;
        self.pending = Some(self.to_move);
        self.to_move = carcassonne_lab::game::opponent(self.to_move);
        self.turns_left -= 1;
    }

    fn needs_chance(&self) -> bool {
        self.pending.is_some()
    }

    fn chance_weights(&self) -> Vec<(u32, u32)> {
        vec![(1, 2), (0, 1), (2, 1)]
    }

    fn apply_chance(&mut self, c: &u32) {
        if let Some(p) = self.pending.take() {
            self.scores[p.index()] += c * self.scale;
        }
    }

    fn sample_chance<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let c = match rng.gen_range(0..4) {
            0 => 0,
            3 => 2,
            _ => 1,
        };
        self.apply_chance(&c);
    }

    fn score_diff(&self, p: PlayerId) -> i64 {
        self.scores[p.index()] as i64 - self.scores[1 - p.index()] as i64
    }

    fn outcome(&self) -> GameOutcome {
        GameOutcome::new(self.scores[0], self.scores[1], self.is_terminal())
    }
}
