#![allow(dead_code)]

pub mod fixtures;
pub mod toy;

use carcassonne_lab::engine::{self, GameState, TileSet};
use carcassonne_lab::game::{Game, PlayerId};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random play from `seed` until `turns` placements are made; returns the
/// position with the next tile drawn.
pub fn midgame(seed: u64, turns: u32) -> GameState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut s = engine::draw_tile(&engine::new_game(seed)).unwrap();
    while !s.is_terminal() && s.turn() < turns {
        let acts = s.legal_actions().unwrap();
        let a = *acts.choose(&mut rng).unwrap();
        s = engine::apply(&s, &a).unwrap();
    }
    s
}

pub fn tile(name: &str) -> engine::TileKindId {
    TileSet::standard().by_name(name).unwrap()
}

/// Brute-force expectimax: every root action, every opponent draw weighted by
/// remaining copies, every opponent reply; leaf = clamped score difference.
/// Returns the value and the first action reaching it.
pub fn expectimax_oracle(root: &GameState, lower: i64, upper: i64) -> (Ratio<i64>, engine::Action) {
    let me = root.to_move();
    let leaf = |s: &GameState| -> Ratio<i64> {
        let d = if s.is_terminal() {
            let o = s.final_scoring().unwrap();
            o.diff(me)
        } else {
            let sc = s.scores();
            sc[me.index()] as i64 - sc[1 - me.index()] as i64
        };
        Ratio::from_integer(d.clamp(lower, upper))
    };
    let mut best: Option<(Ratio<i64>, engine::Action)> = None;
    for a in root.legal_actions().unwrap() {
        let mut after = root.clone();
        after.apply_action(&a);
        let v = if after.is_terminal() {
            leaf(&after)
        } else {
            // group the remaining deck by kind, dropping kinds with no placement
            let mut kinds: Vec<(engine::TileKindId, i64)> = Vec::new();
            for &t in after.deck() {
                match kinds.iter_mut().find(|(k, _)| *k == t) {
                    Some(e) => e.1 += 1,
                    None => kinds.push((t, 1)),
                }
            }
            kinds.retain(|(k, _)| !after.legal_placements(*k).is_empty());
            if kinds.is_empty() {
                let mut end = after.clone();
                end.sample_chance(&mut ChaCha8Rng::seed_from_u64(1));
                leaf(&end)
            } else {
                let total: i64 = kinds.iter().map(|(_, n)| n).sum();
                let mut acc = Ratio::from_integer(0);
                for (k, n) in kinds {
                    let mut drawn = after.clone();
                    drawn.apply_chance(&k);
                    let mut worst: Option<Ratio<i64>> = None;
                    for b in drawn.legal_actions().unwrap() {
                        let mut s = drawn.clone();
                        s.apply_action(&b);
                        let v = leaf(&s);
                        worst = Some(worst.map_or(v, |w: Ratio<i64>| w.min(v)));
                    }
                    acc += Ratio::new(n, total) * worst.unwrap();
                }
                acc
            }
        };
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, a));
        }
    }
    best.unwrap()
}

pub fn other(p: PlayerId) -> PlayerId {
    carcassonne_lab::game::opponent(p)
}

/// Plays a uniformly random game from `seed`, auditing every position:
/// edge matching, connectivity, meeple conservation, the 72-tile census,
/// monotone running scores and alternating movers.
pub fn audited_random_game(seed: u64) -> Result<GameState, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut s = engine::draw_tile(&engine::new_game(seed)).map_err(|e| e.to_string())?;
    let mut prev = [0u32; 2];
    while !s.is_terminal() {
        s.audit().map_err(|e| format!("seed {seed} turn {}: {e}", s.turn()))?;
        let mover = s.to_move();
        let acts = s.legal_actions().map_err(|e| e.to_string())?;
        let a = *acts.choose(&mut rng).ok_or("no legal action")?;
        s = engine::apply(&s, &a).map_err(|e| e.to_string())?;
        if s.to_move() != other(mover) {
            return Err(format!("seed {seed}: mover did not alternate"));
        }
        let sc = s.scores();
        if sc[0] < prev[0] || sc[1] < prev[1] {
            return Err(format!("seed {seed}: running score decreased"));
        }
        prev = sc;
    }
    s.audit().map_err(|e| format!("seed {seed} at the end: {e}"))?;
    let out = engine::final_scoring(&s).map_err(|e| e.to_string())?;
    if out.score_p1 < prev[0] || out.score_p2 < prev[1] {
        return Err(format!("seed {seed}: final score below running score"));
    }
    if s.board().len() + s.discarded().len() != 72 {
        return Err(format!("seed {seed}: census {} placed + {} discarded", s.board().len(), s.discarded().len()));
    }
    Ok(s)
}
