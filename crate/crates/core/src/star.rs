//! Depth-limited expectiminimax with Star1 and Star2 pruning.
//!
//! Depth counts decision plies. At depth 2 the tree is: the root player's
//! move (tile known), a chance node over the opponent's draw, the opponent's
//! move, then a leaf. Values are exact rationals so pruned and unpruned
//! searches agree to the last bit.
//!
//! Star1 bounds a chance node's value using the global leaf bounds `L`/`U`
//! for children not yet searched. Star2 first probes the first `f`
//! move-ordered successors of every child; for children where the opponent
//! moves this yields upper bounds, which can fail the node low before any
//! full child search. The probe bounds are then reused by the Star1 pass.

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{Game, PlayerId};

pub type Value = Ratio<i64>;

/// Order in which successors of a non-root decision node are searched.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MoveOrdering {
    /// Mover's immediate score gain, best first.
    #[default]
    Promising,
    /// Mover's immediate score gain, worst first.
    Reversed,
    /// Legal-action order.
    Natural,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StarConfig {
    pub depth: u32,
    pub lower: i64,
    pub upper: i64,
    /// 0 = Star1, 1 = Star2, more = Star2.5.
    pub probing_factor: u32,
    pub ordering: MoveOrdering,
}

impl Default for StarConfig {
    fn default() -> Self {
        StarConfig {
            depth: 2,
            lower: -100,
            upper: 100,
            probing_factor: 0,
            ordering: MoveOrdering::Promising,
        }
    }
}

impl StarConfig {
    pub fn with_probing(f: u32) -> Self {
        StarConfig {
            probing_factor: f,
            ..StarConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower >= self.upper {
            return Err(Error::Contract(format!("star bounds {} >= {}", self.lower, self.upper)));
        }
        if self.depth == 0 {
            return Err(Error::Contract("star depth must be at least 1".into()));
        }
        Ok(())
    }
}

/// Search effort counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StarStats {
    /// Decision, chance and leaf nodes whose value the search consumed.
    pub nodes: u64,
    pub leaves: u64,
    pub chance_nodes: u64,
    /// Successor evaluations made while probing.
    pub probes: u64,
    pub cutoffs: u64,
}

#[derive(Clone, Debug)]
pub struct StarResult<A> {
    pub action: A,
    pub value: Value,
    pub stats: StarStats,
}

/// Heuristic value of a position from `perspective`: the final score
/// difference when the game is over, the running difference otherwise,
/// clamped to `[lower, upper]`.
pub fn evaluate_leaf<G: Game>(state: &G, perspective: PlayerId, lower: i64, upper: i64) -> i64 {
    let diff = if state.is_terminal() {
        state.outcome().diff(perspective)
    } else {
        state.score_diff(perspective)
    };
    diff.clamp(lower, upper)
}

fn int(v: i64) -> Value {
    Ratio::from_integer(v)
}

/// Star1 pass over a chance node.
///
/// `probs` are the outcome probabilities, `lo`/`hi` valid bounds on each
/// child's value (the global `L`/`U` unless probing tightened them).
/// `search(i, a, b)` must return child `i`'s value fail-hard in `[a, b]`.
/// Returns the exact value when it lies strictly inside `(alpha, beta)`,
/// otherwise `alpha` (value ≤ alpha) or `beta` (value ≥ beta).
pub fn star1_chance(
    probs: &[Value],
    lo: &[Value],
    hi: &[Value],
    alpha: Value,
    beta: Value,
    mut search: impl FnMut(usize, Value, Value) -> Value,
    cutoffs: &mut u64,
) -> Value {
    let n = probs.len();
    // suffix sums of p_j * hi_j and p_j * lo_j for j > i
    let mut rest_hi = vec![int(0); n + 1];
    let mut rest_lo = vec![int(0); n + 1];
    for i in (0..n).rev() {
        rest_hi[i] = rest_hi[i + 1] + probs[i] * hi[i];
        rest_lo[i] = rest_lo[i + 1] + probs[i] * lo[i];
    }
    let mut acc = int(0);
    for i in 0..n {
        let p = probs[i];
        let a_i = (alpha - acc - rest_hi[i + 1]) / p;
        let b_i = (beta - acc - rest_lo[i + 1]) / p;
        if hi[i] <= a_i {
            *cutoffs += 1;
            return alpha;
        }
        if lo[i] >= b_i {
            *cutoffs += 1;
            return beta;
        }
        if lo[i] == hi[i] {
            acc += p * lo[i];
            continue;
        }
        let ax = a_i.max(lo[i]);
        let bx = b_i.min(hi[i]);
        let v = search(i, ax, bx);
        if v <= a_i {
            *cutoffs += 1;
            return alpha;
        }
        if v >= b_i {
            *cutoffs += 1;
            return beta;
        }
        acc += p * v;
    }
    acc
}

/// Whether Star1 can cut a chance node after its first child: the spec-style
/// inequality check used by tests on hand-built nodes.
pub fn star1_first_child_cuts(probs: &[Value], v0: Value, alpha: Value, beta: Value, lower: Value, upper: Value) -> bool {
    let rest: Value = probs[1..].iter().copied().sum();
    let best = probs[0] * v0 + rest * upper;
    let worst = probs[0] * v0 + rest * lower;
    best <= alpha || worst >= beta
}

struct Succ<G: Game> {
    state: G,
    gain: i64,
}

struct Searcher<'c, G: Game> {
    cfg: &'c StarConfig,
    root: PlayerId,
    lower: Value,
    upper: Value,
    stats: StarStats,
    _g: std::marker::PhantomData<G>,
}

impl<'c, G: Game> Searcher<'c, G> {
    fn leaf(&mut self, s: &G) -> Value {
        self.stats.nodes += 1;
        self.stats.leaves += 1;
        int(evaluate_leaf(s, self.root, self.cfg.lower, self.cfg.upper))
    }

    fn successors(&self, s: &G) -> Vec<Succ<G>> {
        let mover = s.current_player();
        let before = s.score_diff(mover);
        let mut out: Vec<Succ<G>> = s
            .legal_actions()
            .into_iter()
            .map(|a| {
                let mut t = s.clone();
                t.apply_action(&a);
                let gain = t.score_diff(mover) - before;
                Succ { state: t, gain }
            })
            .collect();
        match self.cfg.ordering {
            MoveOrdering::Promising => out.sort_by(|x, y| y.gain.cmp(&x.gain)),
            MoveOrdering::Reversed => out.sort_by(|x, y| x.gain.cmp(&y.gain)),
            MoveOrdering::Natural => {}
        }
        out
    }

    /// Value of the position after a move, `depth` plies still to go.
    fn after_move(&mut self, s: &G, depth: u32, alpha: Value, beta: Value) -> Value {
        if depth == 0 || s.is_terminal() {
            return self.leaf(s);
        }
        if s.needs_chance() {
            return self.chance(s, depth, alpha, beta);
        }
        let succ = self.successors(s);
        self.decision(s, succ, 0, None, depth, alpha, beta)
    }

    /// Fail-hard decision node over ordered successors, skipping the first
    /// `skip` (already probed; `known` is the bound they established).
    #[allow(clippy::too_many_arguments)]
    fn decision(&mut self, s: &G, succ: Vec<Succ<G>>, skip: usize, known: Option<Value>, depth: u32, alpha: Value, beta: Value) -> Value {
        self.stats.nodes += 1;
        if succ.is_empty() {
            return self.leaf(s).clamp(alpha, beta);
        }
        let maximizing = s.current_player() == self.root;
        if maximizing {
            let mut best = match known {
                Some(k) => alpha.max(k),
                None => alpha,
            };
            if best >= beta {
                self.stats.cutoffs += 1;
                return beta;
            }
            for x in succ.into_iter().skip(skip) {
                let v = self.after_move(&x.state, depth - 1, best, beta);
                if v >= beta {
                    self.stats.cutoffs += 1;
                    return beta;
                }
                best = best.max(v);
            }
            best
        } else {
            let mut best = match known {
                Some(k) => beta.min(k),
                None => beta,
            };
            if best <= alpha {
                self.stats.cutoffs += 1;
                return alpha;
            }
            for x in succ.into_iter().skip(skip) {
                let v = self.after_move(&x.state, depth - 1, alpha, best);
                if v <= alpha {
                    self.stats.cutoffs += 1;
                    return alpha;
                }
                best = best.min(v);
            }
            best
        }
    }

    fn chance(&mut self, s: &G, depth: u32, alpha: Value, beta: Value) -> Value {
        let weights = s.chance_weights();
        if weights.is_empty() {
            // every remaining tile is unplaceable; the draw ends the game
            let mut t = s.clone();
            t.sample_chance(&mut ChaCha8Rng::seed_from_u64(0));
            return self.after_move(&t, 0, alpha, beta);
        }
        self.stats.nodes += 1;
        self.stats.chance_nodes += 1;
        let total: i64 = weights.iter().map(|(_, w)| *w as i64).sum();
        let probs: Vec<Value> = weights.iter().map(|(_, w)| Ratio::new(*w as i64, total)).collect();
        let children: Vec<G> = weights
            .iter()
            .map(|(c, _)| {
                let mut t = s.clone();
                t.apply_chance(c);
                t
            })
            .collect();
        let n = children.len();
        let mut lo = vec![self.lower; n];
        let mut hi = vec![self.upper; n];
        let f = self.cfg.probing_factor as usize;
        let mut succs: Vec<Option<Vec<Succ<G>>>> = (0..n).map(|_| None).collect();
        let mut probed = vec![0usize; n];

        if f > 0 && depth >= 1 {
            for i in 0..n {
                let child = &children[i];
                if child.is_terminal() || child.needs_chance() {
                    continue;
                }
                let list = self.successors(child);
                let take = f.min(list.len());
                if take == 0 {
                    succs[i] = Some(list);
                    continue;
                }
                let maximizing = child.current_player() == self.root;
                let mut bound: Option<Value> = None;
                for x in &list[..take] {
                    self.stats.probes += 1;
                    let v = self.after_move(&x.state, depth - 1, self.lower, self.upper);
                    bound = Some(match bound {
                        None => v,
                        Some(b) if maximizing => b.max(v),
                        Some(b) => b.min(v),
                    });
                }
                let b = bound.expect("probed at least one successor");
                if maximizing {
                    lo[i] = b;
                } else {
                    hi[i] = b;
                }
                probed[i] = take;
                succs[i] = Some(list);
                // bound the whole node with what is known so far
                let upper_bound: Value = (0..n).map(|j| probs[j] * hi[j]).sum();
                if upper_bound <= alpha {
                    self.stats.cutoffs += 1;
                    return alpha;
                }
                let lower_bound: Value = (0..n).map(|j| probs[j] * lo[j]).sum();
                if lower_bound >= beta {
                    self.stats.cutoffs += 1;
                    return beta;
                }
            }
        }

        let mut cutoffs = 0u64;
        let v = star1_chance(
            &probs,
            &lo.clone(),
            &hi.clone(),
            alpha,
            beta,
            |i, a, b| {
                let child = &children[i];
                match succs[i].take() {
                    Some(list) => {
                        let known = if probed[i] > 0 {
                            Some(if child.current_player() == self.root { lo[i] } else { hi[i] })
                        } else {
                            None
                        };
                        self.decision(child, list, probed[i], known, depth, a, b)
                    }
                    None => {
                        if child.is_terminal() || child.needs_chance() {
                            self.after_move(child, depth, a, b)
                        } else {
                            let list = self.successors(child);
                            self.decision(child, list, 0, None, depth, a, b)
                        }
                    }
                }
            },
            &mut cutoffs,
        );
        self.stats.cutoffs += cutoffs;
        v
    }
}

/// Star-pruned expectiminimax from the root player's point of view.
///
/// Root actions are searched in legal-action order and the first action
/// reaching the maximum value wins.
pub fn star_search<G: Game>(state: &G, cfg: &StarConfig) -> Result<StarResult<G::Action>> {
    cfg.validate()?;
    if state.is_terminal() {
        return Err(Error::Contract("star search from a terminal state".into()));
    }
    if state.needs_chance() {
        return Err(Error::Contract("star search root needs its tile drawn".into()));
    }
    let legal = state.legal_actions();
    if legal.is_empty() {
        return Err(Error::Contract("no legal actions at the star root".into()));
    }
    let mut s = Searcher::<G> {
        cfg,
        root: state.current_player(),
        lower: int(cfg.lower),
        upper: int(cfg.upper),
        stats: StarStats::default(),
        _g: std::marker::PhantomData,
    };
    if legal.len() == 1 {
        let mut t = state.clone();
        t.apply_action(&legal[0]);
        let value = s.after_move(&t, cfg.depth - 1, int(cfg.lower - 1), int(cfg.upper + 1));
        return Ok(StarResult {
            action: legal[0].clone(),
            value,
            stats: s.stats,
        });
    }
    s.stats.nodes += 1;
    let top = int(cfg.upper + 1);
    let mut best: Option<(G::Action, Value)> = None;
    for a in legal {
        let mut t = state.clone();
        t.apply_action(&a);
        let alpha = best.as_ref().map_or(int(cfg.lower - 1), |(_, v)| *v);
        let v = s.after_move(&t, cfg.depth - 1, alpha, top);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((a, v));
        }
    }
    let (action, value) = best.expect("at least one root action");
    Ok(StarResult {
        action,
        value,
        stats: s.stats,
    })
}
