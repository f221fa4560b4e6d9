//! Monte Carlo tree search with a pluggable selection expression.
//!
//! The tree is closed-loop on decisions and open-loop on chance: the tile the
//! root player holds is known, every later draw is re-sampled on each descent.
//! Children are keyed by the full action (tile, placement, meeple), so a node
//! only ever offers the children that are legal under the current sample.
//! Values are stored from the root player's point of view and flipped at
//! opponent nodes during selection.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::expr::{Expression, SelectionContext};
use crate::game::{terminal_reward, Game, PlayerId, Reward, RewardSystem};

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub simulations: u32,
    pub k: f64,
    pub reward_system: RewardSystem,
    pub seed: u64,
    /// Defaults to the UCT expression for `k`.
    pub selection_expr: Option<Expression>,
    /// Divide Q by the largest absolute reward seen so far before selection.
    pub normalize_q: bool,
    pub trace: bool,
}

impl SearchConfig {
    pub fn new(simulations: u32, k: f64) -> Self {
        SearchConfig {
            simulations,
            k,
            reward_system: RewardSystem::R2,
            seed: 0,
            selection_expr: None,
            normalize_q: false,
            trace: false,
        }
    }

    pub fn expression(&self) -> Expression {
        self.selection_expr.clone().unwrap_or_else(|| Expression::seeded_uct(self.k))
    }
}

/// RAVE blending parameters; see [`crate::rave`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaveParams {
    pub k: f64,
    pub b_tilde: f64,
}

/// How children are scored during selection.
#[derive(Clone, Copy, Debug)]
pub enum Policy<'a> {
    Expr(&'a Expression),
    Rave(RaveParams),
}

#[derive(Clone, Debug)]
pub struct Node<A> {
    pub action: Option<A>,
    /// Player to move at this node.
    pub player: PlayerId,
    pub visits: u32,
    /// Sum of rewards from the root player's point of view.
    pub value_sum: f64,
    pub children: Vec<u32>,
    pub parent: u32,
    /// Simulations evaluated from this node: its expansion rollout, plus
    /// every later descent that stopped here on a terminal position.
    pub rollouts: u32,
}

impl<A> Node<A> {
    pub fn q(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.value_sum / self.visits as f64
        }
    }
}

/// AMAF statistics for one action seen from one node.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AmafStats {
    pub visits: u32,
    pub value_sum: f64,
}

impl AmafStats {
    pub fn q(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.value_sum / self.visits as f64
        }
    }
}

/// One simulation as recorded by the trace dump.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub simulation: u32,
    pub path: Vec<String>,
    pub expanded: bool,
    pub reward: Reward,
}

/// Search tree rooted at a decision with a known drawn tile.
#[derive(Clone, Debug)]
pub struct Tree<G: Game> {
    root_state: G,
    root_player: PlayerId,
    nodes: Vec<Node<G::Action>>,
    amaf: Option<Vec<FxHashMap<G::Action, AmafStats>>>,
    max_abs_reward: f64,
    iterations: u64,
    rollout_steps: u64,
}

impl<G: Game> Tree<G> {
    pub fn new(root: &G, track_amaf: bool) -> Result<Self> {
        if root.is_terminal() {
            return Err(Error::Contract("search from a terminal state".into()));
        }
        if root.needs_chance() {
            return Err(Error::Contract("search root must have its chance event resolved".into()));
        }
        let player = root.current_player();
        Ok(Tree {
            root_state: root.clone(),
            root_player: player,
            nodes: vec![Node {
                action: None,
                player,
                visits: 0,
                value_sum: 0.0,
                children: Vec::new(),
                parent: 0,
                rollouts: 0,
            }],
            amaf: track_amaf.then(|| vec![FxHashMap::default()]),
            max_abs_reward: 0.0,
            iterations: 0,
            rollout_steps: 0,
        })
    }

    pub fn root_player(&self) -> PlayerId {
        self.root_player
    }

    pub fn root(&self) -> &Node<G::Action> {
        &self.nodes[0]
    }

    pub fn node(&self, id: u32) -> &Node<G::Action> {
        &self.nodes[id as usize]
    }

    pub fn nodes(&self) -> &[Node<G::Action>] {
        &self.nodes
    }

    /// AMAF table of a node (RAVE trees only).
    pub fn amaf(&self, id: u32) -> Option<&FxHashMap<G::Action, AmafStats>> {
        self.amaf.as_ref().map(|a| &a[id as usize])
    }

    /// Completed select/expand/rollout/backpropagate iterations.
    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn rollout_steps(&self) -> u64 {
        self.rollout_steps
    }

    fn add_child(&mut self, parent: u32, action: G::Action, player: PlayerId) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            action: Some(action),
            player,
            visits: 0,
            value_sum: 0.0,
            children: Vec::new(),
            parent,
            rollouts: 0,
        });
        if let Some(a) = self.amaf.as_mut() {
            a.push(FxHashMap::default());
        }
        self.nodes[parent as usize].children.push(id);
        id
    }

    fn q_for_selection(&self, raw: f64, sign: f64, normalize: bool) -> f64 {
        let q = sign * raw;
        if normalize && self.max_abs_reward > 0.0 {
            q / self.max_abs_reward
        } else {
            q
        }
    }

    fn score_child(&self, parent: u32, child: u32, policy: Policy<'_>, normalize: bool) -> f64 {
        let p = &self.nodes[parent as usize];
        let c = &self.nodes[child as usize];
        let sign = if p.player == self.root_player { 1.0 } else { -1.0 };
        let q = self.q_for_selection(c.q(), sign, normalize);
        match policy {
            Policy::Expr(e) => e.evaluate(&SelectionContext::new(q, p.visits as f64, c.visits as f64)),
            Policy::Rave(r) => {
                let amaf = self
                    .amaf
                    .as_ref()
                    .and_then(|t| c.action.as_ref().and_then(|a| t[parent as usize].get(a)))
                    .copied()
                    .unwrap_or_default();
                let q_tilde = self.q_for_selection(amaf.q(), sign, normalize);
                crate::rave::rave_value(q, q_tilde, amaf.visits, p.visits, c.visits, r)
            }
        }
    }

    /// Index of the best-scoring child among `candidates`, ties broken uniformly.
    fn argmax_child<R: Rng + ?Sized>(&self, parent: u32, candidates: &[u32], policy: Policy<'_>, normalize: bool, rng: &mut R) -> u32 {
        let mut best = f64::NEG_INFINITY;
        let mut ties: Vec<u32> = Vec::new();
        for &c in candidates {
            let v = self.score_child(parent, c, policy, normalize);
            if v > best {
                best = v;
                ties.clear();
                ties.push(c);
            } else if v == best {
                ties.push(c);
            }
        }
        if ties.is_empty() {
            // every score was NaN; cannot happen with saturated expressions
            return candidates[rng.gen_range(0..candidates.len())];
        }
        ties[rng.gen_range(0..ties.len())]
    }

    /// Selection step: requires that no legal action at `node` is unexpanded.
    pub fn select_child<R: Rng + ?Sized>(&self, node: u32, legal: &[G::Action], policy: Policy<'_>, normalize: bool, rng: &mut R) -> Result<u32> {
        let n = &self.nodes[node as usize];
        let mut candidates = Vec::with_capacity(legal.len());
        for a in legal {
            match n.children.iter().find(|&&c| self.nodes[c as usize].action.as_ref() == Some(a)) {
                Some(&c) => candidates.push(c),
                None => return Err(Error::Contract("select_child called with untried actions".into())),
            }
        }
        if candidates.is_empty() {
            return Err(Error::Contract("select_child called on a node without children".into()));
        }
        Ok(self.argmax_child(node, &candidates, policy, normalize, rng))
    }

    /// Runs one simulation and returns its reward (root player's view).
    pub fn iterate<R: Rng + ?Sized>(&mut self, policy: Policy<'_>, system: RewardSystem, normalize: bool, rng: &mut R) -> (Reward, Option<TraceEntry>) {
        self.iterate_inner(policy, system, normalize, false, rng)
    }

    pub fn iterate_traced<R: Rng + ?Sized>(&mut self, policy: Policy<'_>, system: RewardSystem, normalize: bool, rng: &mut R) -> (Reward, TraceEntry) {
        let (r, t) = self.iterate_inner(policy, system, normalize, true, rng);
        (r, t.expect("trace requested"))
    }

    fn iterate_inner<R: Rng + ?Sized>(&mut self, policy: Policy<'_>, system: RewardSystem, normalize: bool, trace: bool, rng: &mut R) -> (Reward, Option<TraceEntry>) {
        let track = self.amaf.is_some();
        let mut state = self.root_state.clone();
        let mut path: Vec<u32> = vec![0];
        let mut played: Vec<(PlayerId, G::Action)> = Vec::new();
        let mut node = 0u32;
        let mut expanded = false;
        let mut ended_in_tree = false;
        loop {
            if state.needs_chance() {
                state.sample_chance(rng);
            }
            if state.is_terminal() {
                ended_in_tree = true;
                break;
            }
            let legal = state.legal_actions();
            let n = &self.nodes[node as usize];
            let untried: Vec<&G::Action> = legal
                .iter()
                .filter(|a| !n.children.iter().any(|&c| self.nodes[c as usize].action.as_ref() == Some(*a)))
                .collect();
            let player = state.current_player();
            if !untried.is_empty() {
                let a = untried[rng.gen_range(0..untried.len())].clone();
                state.apply_action(&a);
                let child = self.add_child(node, a.clone(), state.current_player());
                if track {
                    played.push((player, a));
                }
                path.push(child);
                expanded = true;
                break;
            }
            let child = self
                .select_child(node, &legal, policy, normalize, rng)
                .expect("all legal actions are expanded");
            let a = self.nodes[child as usize].action.clone().expect("child has an action");
            state.apply_action(&a);
            if track {
                played.push((player, a));
            }
            path.push(child);
            node = child;
        }
        let last = *path.last().expect("path holds the root");
        self.nodes[last as usize].rollouts += 1;
        let reward = if ended_in_tree && !expanded {
            terminal_reward(&state.outcome(), self.root_player, system)
        } else {
            let (r, steps) = rollout_collect(&mut state, self.root_player, system, rng, track.then_some(&mut played));
            self.rollout_steps += steps;
            r
        };
        self.backpropagate(&path, reward);
        if track {
            self.amaf_update(&path, &played, reward);
        }
        self.max_abs_reward = self.max_abs_reward.max(reward.abs());
        self.iterations += 1;
        let t = trace.then(|| TraceEntry {
            simulation: self.iterations as u32,
            path: path[1..]
                .iter()
                .map(|&c| format!("{:?}", self.nodes[c as usize].action.as_ref().expect("non-root")))
                .collect(),
            expanded,
            reward,
        });
        (reward, t)
    }

    pub fn backpropagate(&mut self, path: &[u32], reward: Reward) {
        for &id in path {
            let n = &mut self.nodes[id as usize];
            n.visits += 1;
            n.value_sum += reward;
        }
    }

    /// For every node on the path, credit each later action by the node's
    /// own player once. `played[t]` is the action taken at `path[t]`.
    pub fn amaf_update(&mut self, path: &[u32], played: &[(PlayerId, G::Action)], reward: Reward) {
        let Some(tables) = self.amaf.as_mut() else {
            return;
        };
        for (t, &id) in path.iter().enumerate() {
            if t >= played.len() {
                break;
            }
            let player = self.nodes[id as usize].player;
            let table = &mut tables[id as usize];
            let mut seen: Vec<&G::Action> = Vec::new();
            for (p, a) in &played[t..] {
                if *p != player || seen.contains(&a) {
                    continue;
                }
                seen.push(a);
                let e = table.entry(a.clone()).or_default();
                e.visits += 1;
                e.value_sum += reward;
            }
        }
    }

    /// Root child with the highest mean value; ties broken uniformly.
    pub fn best_action<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<G::Action> {
        let root = &self.nodes[0];
        let mut best = f64::NEG_INFINITY;
        let mut ties: Vec<u32> = Vec::new();
        for &c in &root.children {
            let n = &self.nodes[c as usize];
            if n.visits == 0 {
                continue;
            }
            let q = n.q();
            if q > best {
                best = q;
                ties.clear();
                ties.push(c);
            } else if q == best {
                ties.push(c);
            }
        }
        let pick = *ties.get(rng.gen_range(0..ties.len().max(1)))?;
        self.nodes[pick as usize].action.clone()
    }

    /// Adds to `self` everything `other` gained since `base`, where both
    /// `other` and `self` started as clones of `base`.
    pub fn merge_delta(&mut self, base: &Tree<G>, other: &Tree<G>) {
        let base_len = base.nodes.len();
        let mut map: Vec<u32> = (0..base_len as u32).collect();
        for (j, n) in other.nodes.iter().enumerate() {
            let target = if j < base_len {
                let b = &base.nodes[j];
                let t = &mut self.nodes[j];
                t.visits += n.visits - b.visits;
                t.value_sum += n.value_sum - b.value_sum;
                t.rollouts += n.rollouts - b.rollouts;
                j as u32
            } else {
                let sp = map[n.parent as usize];
                let action = n.action.clone().expect("non-root node has an action");
                let existing = self.nodes[sp as usize]
                    .children
                    .iter()
                    .copied()
                    .find(|&c| self.nodes[c as usize].action.as_ref() == Some(&action));
                let id = existing.unwrap_or_else(|| self.add_child(sp, action, n.player));
                let t = &mut self.nodes[id as usize];
                t.visits += n.visits;
                t.value_sum += n.value_sum;
                t.rollouts += n.rollouts;
                id
            };
            if j >= base_len {
                map.push(target);
            }
        }
        self.max_abs_reward = self.max_abs_reward.max(other.max_abs_reward);
        self.iterations += other.iterations - base.iterations;
        self.rollout_steps += other.rollout_steps - base.rollout_steps;
    }

    /// Checks visit conservation: every node's visits are its own
    /// rollouts plus its children's visits.
    pub fn check_visits(&self) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            let below: u32 = n.children.iter().map(|&c| self.nodes[c as usize].visits).sum();
            if n.visits != n.rollouts + below {
                return Err(Error::Contract(format!(
                    "node {i}: visits {} != {} rollouts + {below}",
                    n.visits, n.rollouts
                )));
            }
        }
        Ok(())
    }
}

/// Plays uniformly random legal actions (sampling chance events) until the
/// game ends; returns the reward from `perspective`.
pub fn rollout<G: Game, R: Rng + ?Sized>(state: &G, perspective: PlayerId, system: RewardSystem, rng: &mut R) -> Reward {
    let mut s = state.clone();
    rollout_collect::<G, R>(&mut s, perspective, system, rng, None).0
}

fn rollout_collect<G: Game, R: Rng + ?Sized>(
    state: &mut G,
    perspective: PlayerId,
    system: RewardSystem,
    rng: &mut R,
    mut played: Option<&mut Vec<(PlayerId, G::Action)>>,
) -> (Reward, u64) {
    let mut steps = 0u64;
    loop {
        if state.needs_chance() {
            state.sample_chance(rng);
        }
        if state.is_terminal() {
            break;
        }
        let legal = state.legal_actions();
        let Some(a) = legal.choose(rng) else {
            break;
        };
        if let Some(p) = played.as_deref_mut() {
            p.push((state.current_player(), a.clone()));
        }
        state.apply_action(a);
        steps += 1;
    }
    (terminal_reward(&state.outcome(), perspective, system), steps)
}

/// Result of a search with the statistics callers may want to inspect.
#[derive(Clone, Debug)]
pub struct SearchOutcome<A> {
    pub action: A,
    pub simulations: u32,
    pub root_visits: u32,
    pub trace: Vec<TraceEntry>,
}

/// Runs `simulations` iterations on a fresh tree and returns the final move.
pub fn run_search<G: Game, R: Rng + ?Sized>(
    state: &G,
    simulations: u32,
    policy: Policy<'_>,
    system: RewardSystem,
    normalize: bool,
    trace: bool,
    rng: &mut R,
) -> Result<SearchOutcome<G::Action>> {
    let legal = state.legal_actions();
    let mut tree = Tree::new(state, matches!(policy, Policy::Rave(_)))?;
    if legal.len() == 1 {
        return Ok(SearchOutcome {
            action: legal[0].clone(),
            simulations: 0,
            root_visits: 0,
            trace: Vec::new(),
        });
    }
    if legal.is_empty() {
        return Err(Error::Contract("no legal actions at the search root".into()));
    }
    let mut entries = Vec::new();
    for _ in 0..simulations {
        if trace {
            entries.push(tree.iterate_traced(policy, system, normalize, rng).1);
        } else {
            tree.iterate(policy, system, normalize, rng);
        }
    }
    let action = tree
        .best_action(rng)
        .ok_or_else(|| Error::Contract("search ran no simulations".into()))?;
    Ok(SearchOutcome {
        action,
        simulations,
        root_visits: tree.root().visits,
        trace: entries,
    })
}

/// MCTS with the configured selection expression, seeded from `cfg.seed`.
pub fn search<G: Game>(state: &G, cfg: &SearchConfig) -> Result<G::Action> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    search_with_rng(state, cfg, &mut rng).map(|o| o.action)
}

pub fn search_with_rng<G: Game, R: Rng + ?Sized>(state: &G, cfg: &SearchConfig, rng: &mut R) -> Result<SearchOutcome<G::Action>> {
    if cfg.simulations == 0 {
        return Err(Error::Contract("simulations must be positive".into()));
    }
    let expr = cfg.expression();
    run_search(state, cfg.simulations, Policy::Expr(&expr), cfg.reward_system, cfg.normalize_q, cfg.trace, rng)
}

/// Text dump of a trace: one line per simulation.
pub fn format_trace(entries: &[TraceEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let _ = writeln!(
            out,
            "sim {} reward {} {} path {}",
            e.simulation,
            e.reward,
            if e.expanded { "expand" } else { "terminal" },
            e.path.join(" > ")
        );
    }
    out
}
