use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::board::{Board, Coord, PlacedTile};
use super::features::{FeatureGraph, Segment};
use super::scoring::SCORING;
use super::tiles::{partner_port, EdgeKind, FeatureKind, TileKind, TileKindId, TileSet, NO_SLOT, TILE_COUNT};
use crate::error::{Error, Result};
use crate::game::{opponent, Game, GameOutcome, PlayerId};

pub const MEEPLES_PER_PLAYER: u8 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Placement {
    pub pos: Coord,
    /// Clockwise quarter turns, 0..4.
    pub rot: u8,
}

impl Placement {
    pub fn new(x: i32, y: i32, rot: u8) -> Self {
        Placement {
            pos: Coord::new(x, y),
            rot,
        }
    }
}

/// One decision: where the drawn tile goes and, optionally, which of its
/// feature slots receives a meeple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub tile: TileKindId,
    pub placement: Placement,
    pub meeple: Option<u8>,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = TileSet::standard();
        write!(
            f,
            "{}@{},{}r{}",
            set.kind(self.tile).id,
            self.placement.pos.x,
            self.placement.pos.y,
            self.placement.rot as u32 * 90
        )?;
        match self.meeple {
            Some(m) => write!(f, "+m{m}"),
            None => Ok(()),
        }
    }
}

/// Complete Carcassonne position.
#[derive(Clone, Debug)]
pub struct GameState {
    board: Board,
    features: FeatureGraph,
    /// Remaining tiles; the next draw is the last element.
    deck: Vec<TileKindId>,
    drawn: Option<TileKindId>,
    meeples_left: [u8; 2],
    scores: [u32; 2],
    to_move: PlayerId,
    turn: u32,
    turns_taken: [u32; 2],
    discarded: Vec<TileKindId>,
}

impl GameState {
    /// Start tile at the origin, the other 71 tiles shuffled by `seed`, P1 to draw first.
    pub fn new_game(seed: u64) -> GameState {
        let set = TileSet::standard();
        let mut deck = Vec::with_capacity(TILE_COUNT);
        for k in &set.kinds {
            let n = if k.index == set.start { k.multiplicity - 1 } else { k.multiplicity };
            deck.extend(std::iter::repeat_n(k.index, n as usize));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        deck.shuffle(&mut rng);
        GameState::scenario(deck)
    }

    /// A position holding only the start tile, with an explicit deck (next draw last).
    ///
    /// Meant for fixtures: combine with [`GameState::place_for`] to build
    /// boards tile by tile.
    pub fn scenario(deck: Vec<TileKindId>) -> GameState {
        let set = TileSet::standard();
        let mut s = GameState {
            board: Board::new(),
            features: FeatureGraph::new(),
            deck,
            drawn: None,
            meeples_left: [MEEPLES_PER_PLAYER; 2],
            scores: [0, 0],
            to_move: PlayerId::P1,
            turn: 0,
            turns_taken: [0, 0],
            discarded: Vec::new(),
        };
        s.put_tile(set.start, Placement::new(0, 0, 0));
        s
    }

    pub fn tile_set(&self) -> &'static TileSet {
        TileSet::standard()
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn features(&self) -> &FeatureGraph {
        &self.features
    }

    pub fn deck(&self) -> &[TileKindId] {
        &self.deck
    }

    pub fn drawn_tile(&self) -> Option<TileKindId> {
        self.drawn
    }

    pub fn meeples_left(&self, p: PlayerId) -> u8 {
        self.meeples_left[p.index()]
    }

    pub fn scores(&self) -> [u32; 2] {
        self.scores
    }

    pub fn to_move(&self) -> PlayerId {
        self.to_move
    }

    /// Placements made so far, start tile excluded.
    pub fn turn(&self) -> u32 {
        self.turn
    }

    pub fn turns_taken(&self, p: PlayerId) -> u32 {
        self.turns_taken[p.index()]
    }

    pub fn discarded(&self) -> &[TileKindId] {
        &self.discarded
    }

    pub fn is_terminal(&self) -> bool {
        self.deck.is_empty() && self.drawn.is_none()
    }

    pub fn set_to_move(&mut self, p: PlayerId) {
        self.to_move = p;
    }

    /// Forces the drawn tile (fixtures and expectimax chance nodes).
    pub fn set_drawn(&mut self, tile: Option<TileKindId>) {
        self.drawn = tile;
    }

    /// Segment holding slot `slot` of the tile at `pos`.
    pub fn segment_at(&self, pos: Coord, slot: u8) -> Option<&Segment> {
        let t = self.board.get(pos)?;
        let k = self.tile_set().kind(t.kind);
        if slot as usize >= k.features.len() {
            return None;
        }
        Some(self.features.segment(t.feat_base as usize + slot as usize))
    }

    fn neighbour_edges(&self, c: Coord) -> [Option<EdgeKind>; 4] {
        let set = self.tile_set();
        let mut req = [None; 4];
        for (s, r) in req.iter_mut().enumerate() {
            if let Some(t) = self.board.get(c.step(s)) {
                *r = Some(set.kind(t.kind).rotation(t.rot).edges[(s + 2) % 4]);
            }
        }
        req
    }

    fn fits(kind: &TileKind, rot: u8, req: &[Option<EdgeKind>; 4]) -> bool {
        let edges = &kind.rotation(rot).edges;
        (0..4).all(|s| req[s].is_none_or(|e| edges[s] == e))
    }

    /// Every (cell, rotation) where `tile` edge-matches all its neighbours.
    /// Symmetric rotations are not collapsed.
    pub fn legal_placements(&self, tile: TileKindId) -> Vec<Placement> {
        let kind = self.tile_set().kind(tile);
        let mut out = Vec::new();
        for &c in self.board.frontier() {
            let req = self.neighbour_edges(c);
            for rot in 0..4 {
                if Self::fits(kind, rot, &req) {
                    out.push(Placement { pos: c, rot });
                }
            }
        }
        out
    }

    pub fn has_placement(&self, tile: TileKindId) -> bool {
        let kind = self.tile_set().kind(tile);
        self.board.frontier().iter().any(|&c| {
            let req = self.neighbour_edges(c);
            (0..4).any(|rot| Self::fits(kind, rot, &req))
        })
    }

    fn placement_fits(&self, tile: TileKindId, p: Placement) -> bool {
        if p.rot > 3 || self.board.is_occupied(p.pos) {
            return false;
        }
        let req = self.neighbour_edges(p.pos);
        req.iter().any(Option::is_some) && Self::fits(self.tile_set().kind(tile), p.rot, &req)
    }

    /// Feature id of the neighbouring slot touching side `s` (city/road) of a tile at `pos`.
    fn neighbour_side_feature(&self, pos: Coord, s: usize) -> Option<usize> {
        let t = self.board.get(pos.step(s))?;
        let slot = self.tile_set().kind(t.kind).rotation(t.rot).side_slot[(s + 2) % 4];
        (slot != NO_SLOT).then(|| t.feat_base as usize + slot as usize)
    }

    fn neighbour_port_feature(&self, pos: Coord, p: usize) -> Option<usize> {
        let t = self.board.get(pos.step(p / 2))?;
        let slot = self.tile_set().kind(t.kind).rotation(t.rot).port_slot[partner_port(p)];
        (slot != NO_SLOT).then(|| t.feat_base as usize + slot as usize)
    }

    /// Whether `player` may put a meeple on `slot` once the tile is placed:
    /// the merged feature must hold no opponent meeple.
    pub fn slot_claimable(&self, tile: TileKindId, p: Placement, slot: u8, player: PlayerId) -> bool {
        let kind = self.tile_set().kind(tile);
        let Some(f) = kind.features.get(slot as usize) else {
            return false;
        };
        let rot = kind.rotation(p.rot);
        let opp = opponent(player).index();
        match f.kind {
            FeatureKind::Monastery => true,
            FeatureKind::City | FeatureKind::Road => {
                let sides = rot.slot_sides[slot as usize];
                (0..4).filter(|s| sides & (1 << s) != 0).all(|s| {
                    self.neighbour_side_feature(p.pos, s)
                        .is_none_or(|fid| self.features.segment(fid).meeples[opp] == 0)
                })
            }
            FeatureKind::Field => {
                let ports = rot.slot_ports[slot as usize];
                (0..8).filter(|q| ports & (1 << q) != 0).all(|q| {
                    self.neighbour_port_feature(p.pos, q)
                        .is_none_or(|fid| self.features.segment(fid).meeples[opp] == 0)
                })
            }
        }
    }

    fn push_actions(&self, tile: TileKindId, out: &mut Vec<Action>) {
        let player = self.to_move;
        let can_meeple = self.meeples_left[player.index()] > 0;
        let nslots = self.tile_set().kind(tile).features.len() as u8;
        for placement in self.legal_placements(tile) {
            out.push(Action {
                tile,
                placement,
                meeple: None,
            });
            if can_meeple {
                for slot in 0..nslots {
                    if self.slot_claimable(tile, placement, slot, player) {
                        out.push(Action {
                            tile,
                            placement,
                            meeple: Some(slot),
                        });
                    }
                }
            }
        }
    }

    /// Legal placements of the drawn tile, each without a meeple and with
    /// every claimable slot.
    pub fn legal_actions(&self) -> Result<Vec<Action>> {
        let tile = self
            .drawn
            .ok_or_else(|| Error::Contract("legal_actions needs a drawn tile".into()))?;
        let mut out = Vec::new();
        self.push_actions(tile, &mut out);
        Ok(out)
    }

    pub fn check_action(&self, a: &Action) -> Result<()> {
        match self.drawn {
            Some(t) if t == a.tile => {}
            Some(t) => {
                return Err(Error::IllegalAction(format!(
                    "tile {} is not the drawn tile {}",
                    self.tile_set().kind(a.tile).id,
                    self.tile_set().kind(t).id
                )))
            }
            None => return Err(Error::Contract("no drawn tile".into())),
        }
        if !self.placement_fits(a.tile, a.placement) {
            return Err(Error::IllegalAction(format!(
                "tile {} cannot go at {} rotation {}",
                self.tile_set().kind(a.tile).id,
                a.placement.pos,
                a.placement.rot as u32 * 90
            )));
        }
        if let Some(slot) = a.meeple {
            if self.meeples_left[self.to_move.index()] == 0 {
                return Err(Error::IllegalAction("no meeples left".into()));
            }
            if !self.slot_claimable(a.tile, a.placement, slot, self.to_move) {
                return Err(Error::IllegalAction(format!(
                    "slot {slot} at {} is not claimable",
                    a.placement.pos
                )));
            }
        }
        Ok(())
    }

    /// Validated transition: place, score, hand over, draw the next tile.
    pub fn apply(&self, a: &Action) -> Result<GameState> {
        self.check_action(a)?;
        let mut next = self.clone();
        next.place(a);
        next.draw_next();
        Ok(next)
    }

    /// Places the drawn tile for the player to move and passes the turn.
    /// Leaves no drawn tile. Returns the points each player gained.
    pub(crate) fn place(&mut self, a: &Action) -> [u32; 2] {
        let player = self.to_move;
        let gained = self.place_tile_for(player, a.tile, a.placement, a.meeple);
        self.drawn = None;
        self.turn += 1;
        self.turns_taken[player.index()] += 1;
        self.to_move = opponent(player);
        gained
    }

    /// Fixture helper: validates edge matching and meeple claimability for
    /// `player`, ignoring the deck and whose turn it is.
    pub fn place_for(&mut self, player: PlayerId, tile: TileKindId, p: Placement, meeple: Option<u8>) -> Result<[u32; 2]> {
        if !self.placement_fits(tile, p) {
            return Err(Error::IllegalAction(format!(
                "tile {} cannot go at {} rotation {}",
                self.tile_set().kind(tile).id,
                p.pos,
                p.rot as u32 * 90
            )));
        }
        if let Some(slot) = meeple {
            if self.meeples_left[player.index()] == 0 || !self.slot_claimable(tile, p, slot, player) {
                return Err(Error::IllegalAction(format!("slot {slot} at {} is not claimable", p.pos)));
            }
        }
        Ok(self.place_tile_for(player, tile, p, meeple))
    }

    fn put_tile(&mut self, tile: TileKindId, p: Placement) -> usize {
        let set = TileSet::standard();
        let kind = set.kind(tile);
        let feat_base = self.features.len();
        let idx = self.board.put(PlacedTile {
            pos: p.pos,
            kind: tile,
            rot: p.rot,
            feat_base: feat_base as u16,
        });
        let rot = kind.rotation(p.rot);
        for f in &kind.features {
            let open = match f.kind {
                FeatureKind::City | FeatureKind::Road => f.sides.count_ones() as u8,
                FeatureKind::Field => 0,
                FeatureKind::Monastery => 8 - self.board.occupied_ring(p.pos),
            };
            let pennant = kind.pennant && f.kind == FeatureKind::City;
            self.features.push(Segment::new(f.kind, idx, pennant, open));
        }
        for s in 0..4 {
            let Some(n) = self.board.get(p.pos.step(s)).copied() else {
                continue;
            };
            let nrot = set.kind(n.kind).rotation(n.rot);
            let mine = rot.side_slot[s];
            if mine != NO_SLOT {
                let theirs = nrot.side_slot[(s + 2) % 4];
                self.features
                    .join(feat_base + mine as usize, n.feat_base as usize + theirs as usize, true);
            }
            for q in [2 * s, 2 * s + 1] {
                let mine = rot.port_slot[q];
                if mine != NO_SLOT {
                    let theirs = nrot.port_slot[partner_port(q)];
                    self.features
                        .join(feat_base + mine as usize, n.feat_base as usize + theirs as usize, false);
                }
            }
        }
        for n in p.pos.ring() {
            if let Some(t) = self.board.get(n).copied() {
                if let Some(m) = monastery_slot(set.kind(t.kind)) {
                    self.features.root_mut(t.feat_base as usize + m).open -= 1;
                }
            }
        }
        idx
    }

    fn place_tile_for(&mut self, player: PlayerId, tile: TileKindId, p: Placement, meeple: Option<u8>) -> [u32; 2] {
        let set = TileSet::standard();
        let idx = self.put_tile(tile, p);
        let feat_base = self.board.placed()[idx].feat_base as usize;
        if let Some(slot) = meeple {
            self.features.root_mut(feat_base + slot as usize).meeples[player.index()] += 1;
            self.meeples_left[player.index()] -= 1;
        }

        let mut touched: Vec<usize> = Vec::with_capacity(8);
        let kind = set.kind(tile);
        for (slot, f) in kind.features.iter().enumerate() {
            if matches!(f.kind, FeatureKind::City | FeatureKind::Road | FeatureKind::Monastery) {
                touched.push(feat_base + slot);
            }
        }
        for n in p.pos.ring() {
            if let Some(t) = self.board.get(n) {
                if let Some(m) = monastery_slot(set.kind(t.kind)) {
                    touched.push(t.feat_base as usize + m);
                }
            }
        }
        let mut gained = [0u32; 2];
        let mut done: Vec<usize> = Vec::with_capacity(touched.len());
        for fid in touched {
            let root = self.features.find_mut(fid);
            if done.contains(&root) {
                continue;
            }
            done.push(root);
            let seg = *self.features.segment(root);
            if !seg.is_complete() || seg.meeple_count() == 0 {
                continue;
            }
            let pts = SCORING.completed(&seg);
            for w in seg.majority() {
                self.scores[w.index()] += pts;
                gained[w.index()] += pts;
            }
            self.meeples_left[0] += seg.meeples[0];
            self.meeples_left[1] += seg.meeples[1];
            self.features.root_mut(root).meeples = [0, 0];
        }
        gained
    }

    /// Pops tiles off the deck, discarding any that cannot be placed, until
    /// one is drawn or the deck runs out.
    pub(crate) fn draw_next(&mut self) {
        self.drawn = None;
        while let Some(t) = self.deck.pop() {
            if self.has_placement(t) {
                self.drawn = Some(t);
                return;
            }
            self.discarded.push(t);
        }
    }

    /// Draws uniformly from the remaining tiles regardless of deck order.
    pub(crate) fn draw_random<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.drawn = None;
        while !self.deck.is_empty() {
            let i = rng.gen_range(0..self.deck.len());
            let t = self.deck.swap_remove(i);
            if self.has_placement(t) {
                self.drawn = Some(t);
                return;
            }
            self.discarded.push(t);
        }
    }

    /// Removes one copy of `tile` from the deck and makes it the drawn tile.
    pub(crate) fn draw_specific(&mut self, tile: TileKindId) {
        if let Some(i) = self.deck.iter().rposition(|&t| t == tile) {
            self.deck.swap_remove(i);
        }
        self.drawn = Some(tile);
    }

    /// Points each player would collect from unfinished features and farms
    /// if the game ended now.
    pub fn end_game_points(&self) -> [u32; 2] {
        let set = self.tile_set();
        let mut pts = [0u32; 2];
        for root in self.features.roots() {
            let seg = self.features.segment(root);
            if seg.meeple_count() == 0 || seg.kind == FeatureKind::Field || seg.is_complete() {
                continue;
            }
            let v = SCORING.incomplete(seg);
            for w in seg.majority() {
                pts[w.index()] += v;
            }
        }
        let mut farm_cities: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for t in self.board.placed() {
            let kind = set.kind(t.kind);
            for (slot, f) in kind.features.iter().enumerate() {
                if f.kind != FeatureKind::Field || f.cities.is_empty() {
                    continue;
                }
                let froot = self.features.find(t.feat_base as usize + slot);
                if self.features.segment(froot).meeple_count() == 0 {
                    continue;
                }
                for &c in &f.cities {
                    let croot = self.features.find(t.feat_base as usize + c as usize);
                    if self.features.segment(croot).is_complete() {
                        farm_cities.entry(froot).or_default().insert(croot);
                    }
                }
            }
        }
        for (froot, cities) in farm_cities {
            let v = SCORING.farm(cities.len() as u32);
            for w in self.features.segment(froot).majority() {
                pts[w.index()] += v;
            }
        }
        pts
    }

    /// Running scores plus end-game points.
    pub fn final_scoring(&self) -> Result<GameOutcome> {
        if !self.is_terminal() {
            return Err(Error::Contract("final scoring before the deck is exhausted".into()));
        }
        let extra = self.end_game_points();
        Ok(GameOutcome::new(self.scores[0] + extra[0], self.scores[1] + extra[1], true))
    }

    pub fn meeples_on_board(&self) -> [u32; 2] {
        let mut n = [0u32; 2];
        for r in self.features.roots() {
            let s = self.features.segment(r);
            n[0] += s.meeples[0] as u32;
            n[1] += s.meeples[1] as u32;
        }
        n
    }

    /// Full consistency audit: edge matching, connectivity, meeple
    /// conservation and tile census.
    pub fn audit(&self) -> Result<()> {
        let set = self.tile_set();
        let fail = |m: String| Err(Error::Contract(format!("audit: {m}")));
        for t in self.board.placed() {
            let edges = set.kind(t.kind).rotation(t.rot).edges;
            for (s, e) in edges.iter().enumerate() {
                if let Some(n) = self.board.get(t.pos.step(s)) {
                    let other = set.kind(n.kind).rotation(n.rot).edges[(s + 2) % 4];
                    if other != *e {
                        return fail(format!("edge mismatch between {} and {}", t.pos, n.pos));
                    }
                }
            }
        }
        let mut seen = BTreeSet::from([Coord::ORIGIN]);
        let mut stack = vec![Coord::ORIGIN];
        while let Some(c) = stack.pop() {
            for s in 0..4 {
                let n = c.step(s);
                if self.board.is_occupied(n) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        if seen.len() != self.board.len() {
            return fail("board is not 4-connected".into());
        }
        let on_board = self.meeples_on_board();
        for p in PlayerId::BOTH {
            if self.meeples_left[p.index()] as u32 + on_board[p.index()] != MEEPLES_PER_PLAYER as u32 {
                return fail(format!("meeples of {p} not conserved"));
            }
        }
        let census = self.board.len() + self.deck.len() + usize::from(self.drawn.is_some()) + self.discarded.len();
        if census != TILE_COUNT {
            return fail(format!("tile census {census} != {TILE_COUNT}"));
        }
        Ok(())
    }
}

pub(crate) fn monastery_slot(kind: &TileKind) -> Option<usize> {
    kind.features.iter().position(|f| f.kind == FeatureKind::Monastery)
}

impl Game for GameState {
    type Action = Action;
    type Chance = TileKindId;

    fn current_player(&self) -> PlayerId {
        self.to_move
    }

    fn is_terminal(&self) -> bool {
        GameState::is_terminal(self)
    }

    fn legal_actions(&self) -> Vec<Action> {
        let mut out = Vec::new();
        if let Some(t) = self.drawn {
            self.push_actions(t, &mut out);
        }
        out
    }

    fn apply_action(&mut self, action: &Action) {
        self.place(action);
    }

    fn needs_chance(&self) -> bool {
        self.drawn.is_none() && !self.deck.is_empty()
    }

    /// Placeable tile kinds weighted by remaining copies, most likely first.
    /// Unplaceable tiles would be discarded, so they are conditioned away.
    fn chance_weights(&self) -> Vec<(TileKindId, u32)> {
        let mut counts: BTreeMap<TileKindId, u32> = BTreeMap::new();
        for &t in &self.deck {
            *counts.entry(t).or_default() += 1;
        }
        let mut outs: Vec<(TileKindId, u32)> = counts.into_iter().filter(|(t, _)| self.has_placement(*t)).collect();
        outs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        outs
    }

    fn apply_chance(&mut self, outcome: &TileKindId) {
        self.draw_specific(*outcome);
    }

    fn sample_chance<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.draw_random(rng);
    }

    fn score_diff(&self, p: PlayerId) -> i64 {
        self.scores[p.index()] as i64 - self.scores[opponent(p).index()] as i64
    }

    fn outcome(&self) -> GameOutcome {
        if self.is_terminal() {
            let extra = self.end_game_points();
            GameOutcome::new(self.scores[0] + extra[0], self.scores[1] + extra[1], true)
        } else {
            GameOutcome::new(self.scores[0], self.scores[1], false)
        }
    }
}
