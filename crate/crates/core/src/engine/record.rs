//! Line-oriented game records and bit-exact replay.
//!
//! ```text
//! # carcassonne-record v1
//! seed 42
//! turn 1 P1 V 0 -1 90 - 0 0
//! discard X
//! final 71 64
//! ```
//!
//! A `turn` line holds the turn number, the mover, the placed tile, its
//! coordinates, rotation in degrees, the meeple slot (or `-`) and both running
//! scores after the placement. `discard` lines record tiles drawn afterwards
//! that had no legal placement.

use std::fmt::Write as _;

use super::state::{Action, GameState, Placement};
use super::tiles::TileSet;
use crate::error::{Error, Result};
use crate::game::PlayerId;

pub const RECORD_HEADER: &str = "# carcassonne-record v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurnRecord {
    pub turn: u32,
    pub player: PlayerId,
    pub action: Action,
    pub scores: [u32; 2],
    /// Tiles discarded while drawing the following tile.
    pub discards_after: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameRecord {
    pub seed: u64,
    /// Tiles discarded before the first turn.
    pub initial_discards: Vec<String>,
    pub turns: Vec<TurnRecord>,
    pub final_scores: Option<[u32; 2]>,
}

impl GameRecord {
    pub fn new(seed: u64) -> Self {
        GameRecord {
            seed,
            initial_discards: Vec::new(),
            turns: Vec::new(),
            final_scores: None,
        }
    }

    pub fn to_text(&self) -> String {
        let set = TileSet::standard();
        let mut out = String::new();
        let _ = writeln!(out, "{RECORD_HEADER}");
        let _ = writeln!(out, "seed {}", self.seed);
        for d in &self.initial_discards {
            let _ = writeln!(out, "discard {d}");
        }
        for t in &self.turns {
            let a = &t.action;
            let meeple = a.meeple.map_or_else(|| "-".to_string(), |m| m.to_string());
            let _ = writeln!(
                out,
                "turn {} {} {} {} {} {} {} {} {}",
                t.turn,
                t.player,
                set.kind(a.tile).id,
                a.placement.pos.x,
                a.placement.pos.y,
                a.placement.rot as u32 * 90,
                meeple,
                t.scores[0],
                t.scores[1]
            );
            for d in &t.discards_after {
                let _ = writeln!(out, "discard {d}");
            }
        }
        if let Some([a, b]) = self.final_scores {
            let _ = writeln!(out, "final {a} {b}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<GameRecord> {
        let set = TileSet::standard();
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let bad = |line: usize, reason: String| Error::Replay { line, reason };
        match lines.next() {
            Some((_, RECORD_HEADER)) => {}
            Some((n, other)) => return Err(bad(n, format!("expected header, found `{other}`"))),
            None => return Err(bad(1, "empty record".into())),
        }
        let (n, seed_line) = lines.next().ok_or_else(|| bad(2, "missing seed line".into()))?;
        let seed = seed_line
            .strip_prefix("seed ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad(n, format!("malformed seed line `{seed_line}`")))?;
        let mut rec = GameRecord::new(seed);
        for (n, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            match f[0] {
                "discard" if f.len() == 2 => {
                    set.by_name(f[1]).ok_or_else(|| bad(n, format!("unknown tile `{}`", f[1])))?;
                    match rec.turns.last_mut() {
                        Some(t) => t.discards_after.push(f[1].to_string()),
                        None => rec.initial_discards.push(f[1].to_string()),
                    }
                }
                "turn" if f.len() == 10 => {
                    let num = |i: usize| -> Result<i64> {
                        f[i].parse::<i64>()
                            .map_err(|_| bad(n, format!("field {i} `{}` is not a number", f[i])))
                    };
                    let tile = set.by_name(f[3]).ok_or_else(|| bad(n, format!("unknown tile `{}`", f[3])))?;
                    let deg = num(6)?;
                    if deg.rem_euclid(90) != 0 || !(0..360).contains(&deg) {
                        return Err(bad(n, format!("rotation {deg} is not a multiple of 90 below 360")));
                    }
                    let meeple = match f[7] {
                        "-" => None,
                        m => Some(m.parse::<u8>().map_err(|_| bad(n, format!("bad meeple slot `{m}`")))?),
                    };
                    rec.turns.push(TurnRecord {
                        turn: num(1)? as u32,
                        player: f[2].parse().map_err(|_| bad(n, format!("bad player `{}`", f[2])))?,
                        action: Action {
                            tile,
                            placement: Placement::new(num(4)? as i32, num(5)? as i32, (deg / 90) as u8),
                            meeple,
                        },
                        scores: [num(8)? as u32, num(9)? as u32],
                        discards_after: Vec::new(),
                    });
                }
                "final" if f.len() == 3 => {
                    let a = f[1].parse().map_err(|_| bad(n, "bad final score".into()))?;
                    let b = f[2].parse().map_err(|_| bad(n, "bad final score".into()))?;
                    rec.final_scores = Some([a, b]);
                }
                _ => return Err(bad(n, format!("unrecognised line `{line}`"))),
            }
        }
        Ok(rec)
    }
}

/// Summary of a clean replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayReport {
    pub turns: usize,
    pub discards: usize,
    pub final_scores: [u32; 2],
}

/// Replays `text` from its seed, checking every action, running score,
/// discard and the final score. The error names the first diverging line.
pub fn replay(text: &str) -> Result<ReplayReport> {
    let rec = GameRecord::parse(text)?;
    let set = TileSet::standard();
    // line numbers are recomputed by walking the text alongside the record
    let mut line_of_turn = Vec::new();
    let mut line_of_discard = Vec::new();
    let mut final_line = 0;
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.starts_with("turn ") {
            line_of_turn.push(i + 1);
        } else if l.starts_with("discard ") {
            line_of_discard.push(i + 1);
        } else if l.starts_with("final ") {
            final_line = i + 1;
        }
    }
    fn fail<T>(line: usize, reason: String) -> Result<T> {
        Err(Error::Replay { line, reason })
    }

    let mut state = GameState::new_game(rec.seed);
    state.draw_next();
    let mut discard_cursor = 0usize;
    let mut check_discards = |state: &GameState, expected: &[String], seen: &mut usize| -> Result<()> {
        let actual = &state.discarded()[*seen..];
        for (i, name) in expected.iter().enumerate() {
            let line = line_of_discard.get(discard_cursor + i).copied().unwrap_or(0);
            match actual.get(i) {
                Some(t) if set.kind(*t).id == *name => {}
                Some(t) => return fail(line, format!("discarded {} but record says {name}", set.kind(*t).id)),
                None => return fail(line, format!("record discards {name} but the tile was placeable")),
            }
        }
        if actual.len() > expected.len() {
            let t = actual[expected.len()];
            return fail(
                line_of_discard.get(discard_cursor + expected.len()).copied().unwrap_or(0),
                format!("unrecorded discard of {}", set.kind(t).id),
            );
        }
        discard_cursor += expected.len();
        *seen = state.discarded().len();
        Ok(())
    };
    let mut seen = 0usize;
    check_discards(&state, &rec.initial_discards, &mut seen)?;
    for (i, t) in rec.turns.iter().enumerate() {
        let line = line_of_turn[i];
        if state.is_terminal() {
            return fail(line, "game already over".into());
        }
        if t.player != state.to_move() {
            return fail(line, format!("{} recorded but {} is to move", t.player, state.to_move()));
        }
        if t.turn != state.turn() + 1 {
            return fail(line, format!("turn {} recorded, expected {}", t.turn, state.turn() + 1));
        }
        state = match state.apply(&t.action) {
            Ok(s) => s,
            Err(e) => return fail(line, e.to_string()),
        };
        if state.scores() != t.scores {
            let s = state.scores();
            return fail(line, format!("scores {} {} recorded, engine has {} {}", t.scores[0], t.scores[1], s[0], s[1]));
        }
        check_discards(&state, &t.discards_after, &mut seen)?;
    }
    if !state.is_terminal() {
        let line = line_of_turn.last().copied().unwrap_or(2);
        return fail(line, "record ends before the game is over".into());
    }
    let out = state.final_scoring()?;
    let final_scores = [out.score_p1, out.score_p2];
    match rec.final_scores {
        Some(f) if f == final_scores => {}
        Some(f) => {
            return fail(
                final_line,
                format!("final {} {} recorded, engine has {} {}", f[0], f[1], final_scores[0], final_scores[1]),
            )
        }
        None => return fail(0, "missing final line".into()),
    }
    Ok(ReplayReport {
        turns: rec.turns.len(),
        discards: state.discarded().len(),
        final_scores,
    })
}
