//! Per-turn evolution of the MCTS selection expression.
//!
//! Three variants share a (1, λ) loop seeded with the UCT expression:
//!
//! * `EaP` scores each offspring by one selection step on a scratch tree
//!   followed by a rollout.
//! * `Ea` scores each offspring by `S` full MCTS iterations on a working tree
//!   kept for the whole decision; fitness is the mean reward.
//! * `Siea` is `Ea` with semantic selection among offspring tied on fitness.
//!
//! Offspring of one generation are evaluated on the same snapshot of the
//! working tree with the same per-slot seeds, so their reward vectors are
//! paired sample by sample. Their statistics are then merged back into the
//! working tree.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{subtree_mutation, Expression};
use crate::game::{Game, RewardSystem};
use crate::mcts::{run_search, Policy, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "ea-p")]
    EaP,
    #[serde(rename = "ea")]
    Ea,
    #[serde(rename = "siea")]
    Siea,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::EaP => "ea-p",
            Variant::Ea => "ea",
            Variant::Siea => "siea",
        })
    }
}

/// Semantic similarity range: offspring whose distance to the parent lies
/// strictly inside `(alpha, beta)` are semantically similar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemanticBounds {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for SemanticBounds {
    fn default() -> Self {
        SemanticBounds { alpha: 5.0, beta: 10.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub variant: Variant,
    pub mu: u32,
    pub lambda: u32,
    pub generations: u32,
    /// Iterations per offspring (`S`).
    pub fitness_sims: u32,
    pub final_search_sims: u32,
    pub k_seed: f64,
    pub bounds: SemanticBounds,
    pub reward_system: RewardSystem,
    /// Rollouts per offspring for `EaP`.
    pub ea_p_fitness_rollouts: u32,
    /// Follow the semantic-selection listing literally.
    pub strict_pseudocode: bool,
    pub normalize_q: bool,
}

impl EvolutionConfig {
    pub fn new(variant: Variant) -> Self {
        EvolutionConfig {
            variant,
            mu: 1,
            lambda: 4,
            generations: 20,
            fitness_sims: 30,
            final_search_sims: 400,
            k_seed: std::f64::consts::SQRT_2,
            bounds: SemanticBounds::default(),
            reward_system: RewardSystem::R2,
            ea_p_fitness_rollouts: 1,
            strict_pseudocode: false,
            normalize_q: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu != 1 {
            return Err(Error::Contract("only mu = 1 is supported".into()));
        }
        if self.lambda == 0 || self.fitness_sims == 0 || self.final_search_sims == 0 || self.ea_p_fitness_rollouts == 0 {
            return Err(Error::Contract("lambda, S, final search and rollout counts must be positive".into()));
        }
        if !(0.0 < self.bounds.alpha && self.bounds.alpha < self.bounds.beta) {
            return Err(Error::Contract("semantic bounds need 0 < alpha < beta".into()));
        }
        Ok(())
    }

    /// Tree iterations (EA/SIEA) or rollouts (EA-p) spent on evolution per decision.
    pub fn evolution_budget(&self) -> u64 {
        let per = match self.variant {
            Variant::EaP => self.ea_p_fitness_rollouts,
            Variant::Ea | Variant::Siea => self.fitness_sims,
        };
        self.generations as u64 * self.lambda as u64 * per as u64
    }

    pub fn decision_budget(&self) -> u64 {
        self.evolution_budget() + self.final_search_sims as u64
    }
}

/// Per-simulation rewards of one individual.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SemanticsVector(pub Vec<f64>);

impl SemanticsVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.0.iter().sum::<f64>() / self.0.len() as f64
        }
    }
}

/// Sampling semantics distance: mean absolute difference.
pub fn ssd(p: &SemanticsVector, q: &SemanticsVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Contract(format!("semantics lengths differ: {} vs {}", p.len(), q.len())));
    }
    if p.is_empty() {
        return Ok(0.0);
    }
    Ok(p.0.iter().zip(&q.0).map(|(a, b)| (a - b).abs()).sum::<f64>() / p.len() as f64)
}

/// Semantic similarity: `alpha < ssd < beta`.
pub fn ssi(p: &SemanticsVector, q: &SemanticsVector, bounds: SemanticBounds) -> Result<bool> {
    let d = ssd(p, q)?;
    Ok(bounds.alpha < d && d < bounds.beta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub expr: Expression,
    pub fitness: f64,
    pub semantics: Option<SemanticsVector>,
}

impl Individual {
    pub fn unevaluated(expr: Expression) -> Self {
        Individual {
            expr,
            fitness: f64::NAN,
            semantics: None,
        }
    }
}

fn pick<R: Rng + ?Sized>(items: &[usize], rng: &mut R) -> usize {
    items[rng.gen_range(0..items.len())]
}

/// Chooses the next parent among `offspring`; returns its index.
///
/// The unique fittest offspring wins outright. Among several tied on the
/// best fitness, those semantically similar to the parent are preferred,
/// closest to `alpha` first; otherwise the pick is uniform over the tied set.
/// A parent without semantics (the seeded first parent) also falls back to
/// the uniform pick.
pub fn semantic_select<R: Rng + ?Sized>(
    offspring: &[Individual],
    parent: &Individual,
    bounds: SemanticBounds,
    strict: bool,
    rng: &mut R,
) -> Result<usize> {
    if offspring.is_empty() {
        return Err(Error::Contract("semantic_select needs offspring".into()));
    }
    if strict {
        return strict_select(offspring, parent, bounds, rng);
    }
    let h = offspring.iter().map(|o| o.fitness).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..offspring.len()).filter(|&i| offspring[i].fitness == h).collect();
    if tied.len() == 1 {
        return Ok(tied[0]);
    }
    let Some(ps) = parent.semantics.as_ref() else {
        return Ok(pick(&tied, rng));
    };
    let mut in_range: Vec<(usize, f64)> = Vec::new();
    for &i in &tied {
        let os = offspring[i]
            .semantics
            .as_ref()
            .ok_or_else(|| Error::Contract("offspring without semantics".into()))?;
        let d = ssd(os, ps)?;
        if bounds.alpha < d && d < bounds.beta {
            in_range.push((i, d));
        }
    }
    if in_range.is_empty() {
        return Ok(pick(&tied, rng));
    }
    let closest = in_range
        .iter()
        .map(|&(_, d)| (d - bounds.alpha).abs())
        .fold(f64::INFINITY, f64::min);
    let best: Vec<usize> = in_range
        .iter()
        .filter(|&&(_, d)| (d - bounds.alpha).abs() == closest)
        .map(|&(i, _)| i)
        .collect();
    Ok(pick(&best, rng))
}

/// The selection listing taken word for word: a unique maximum or fewer
/// than two similar offspring fall through to a uniform pick over all
/// offspring.
fn strict_select<R: Rng + ?Sized>(offspring: &[Individual], parent: &Individual, bounds: SemanticBounds, rng: &mut R) -> Result<usize> {
    let all: Vec<usize> = (0..offspring.len()).collect();
    let h = offspring.iter().map(|o| o.fitness).fold(f64::NEG_INFINITY, f64::max);
    let tied = offspring.iter().filter(|o| o.fitness == h).count();
    if tied <= 1 {
        return Ok(pick(&all, rng));
    }
    let Some(ps) = parent.semantics.as_ref() else {
        return Ok(pick(&all, rng));
    };
    let mut in_range: Vec<(usize, f64)> = Vec::new();
    for (i, o) in offspring.iter().enumerate() {
        let os = o
            .semantics
            .as_ref()
            .ok_or_else(|| Error::Contract("offspring without semantics".into()))?;
        let d = ssd(os, ps)?;
        if bounds.alpha < d && d < bounds.beta {
            in_range.push((i, d));
        }
    }
    if in_range.len() <= 1 {
        return Ok(pick(&all, rng));
    }
    let closest = in_range
        .iter()
        .map(|&(_, d)| (d - bounds.alpha).abs())
        .fold(f64::INFINITY, f64::min);
    let best: Vec<usize> = in_range
        .iter()
        .filter(|&&(_, d)| (d - bounds.alpha).abs() == closest)
        .map(|&(i, _)| i)
        .collect();
    Ok(pick(&best, rng))
}

/// Work done by one evolution run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BudgetCounters {
    pub fitness_rollouts: u64,
    pub tree_iterations: u64,
    pub final_search_sims: u64,
}

impl BudgetCounters {
    pub fn total(&self) -> u64 {
        self.fitness_rollouts + self.tree_iterations + self.final_search_sims
    }
}

#[derive(Clone, Debug)]
pub struct Evolved {
    pub best: Individual,
    pub counters: BudgetCounters,
}

fn argmax_uniform<R: Rng + ?Sized>(offspring: &[Individual], rng: &mut R) -> usize {
    let h = offspring.iter().map(|o| o.fitness).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..offspring.len()).filter(|&i| offspring[i].fitness == h).collect();
    pick(&tied, rng)
}

/// EA-p: fitness is the reward of a select-and-rollout episode from a
/// fresh scratch root, nothing is kept between evaluations.
pub fn evolve_ea_p<G: Game, R: Rng + ?Sized>(state: &G, cfg: &EvolutionConfig, rng: &mut R) -> Result<Evolved> {
    cfg.validate()?;
    Tree::new(state, false)?;
    let mut parent = Individual::unevaluated(Expression::seeded_uct(cfg.k_seed));
    let mut counters = BudgetCounters::default();
    for _ in 0..cfg.generations {
        let mut offspring = Vec::with_capacity(cfg.lambda as usize);
        for _ in 0..cfg.lambda {
            let expr = subtree_mutation(&parent.expr, rng);
            let mut scratch = Tree::new(state, false)?;
            let mut rewards = Vec::with_capacity(cfg.ea_p_fitness_rollouts as usize);
            for _ in 0..cfg.ea_p_fitness_rollouts {
                let (r, _) = scratch.iterate(Policy::Expr(&expr), cfg.reward_system, cfg.normalize_q, rng);
                rewards.push(r);
                counters.fitness_rollouts += 1;
            }
            let sem = SemanticsVector(rewards);
            offspring.push(Individual {
                expr,
                fitness: sem.mean(),
                semantics: Some(sem),
            });
        }
        let i = argmax_uniform(&offspring, rng);
        parent = offspring.swap_remove(i);
    }
    Ok(Evolved { best: parent, counters })
}

/// Runs one MCTS iteration per slot seed on a clone of `snapshot` using
/// `expr` for selection. Returns the reward vector and the grown clone.
pub fn evaluate_on_snapshot<G: Game>(snapshot: &Tree<G>, expr: &Expression, slots: &[u64], cfg: &EvolutionConfig) -> (SemanticsVector, Tree<G>) {
    let mut work = snapshot.clone();
    let rewards = slots
        .iter()
        .map(|&seed| {
            let mut slot_rng = ChaCha8Rng::seed_from_u64(seed);
            work.iterate(Policy::Expr(expr), cfg.reward_system, cfg.normalize_q, &mut slot_rng).0
        })
        .collect();
    (SemanticsVector(rewards), work)
}

/// EA and SIEA: offspring are scored by `S` MCTS iterations each on the
/// shared working tree. Returns the final parent and the working tree.
pub fn evolve_ea<G: Game, R: Rng + ?Sized>(state: &G, cfg: &EvolutionConfig, rng: &mut R) -> Result<(Evolved, Tree<G>)> {
    cfg.validate()?;
    let mut tree = Tree::new(state, false)?;
    let mut parent = Individual::unevaluated(Expression::seeded_uct(cfg.k_seed));
    let mut counters = BudgetCounters::default();
    for _ in 0..cfg.generations {
        let slots: Vec<u64> = (0..cfg.fitness_sims).map(|_| rng.gen()).collect();
        let snapshot = tree.clone();
        let mut offspring = Vec::with_capacity(cfg.lambda as usize);
        for _ in 0..cfg.lambda {
            let expr = subtree_mutation(&parent.expr, rng);
            let (sem, work) = evaluate_on_snapshot(&snapshot, &expr, &slots, cfg);
            counters.tree_iterations += slots.len() as u64;
            tree.merge_delta(&snapshot, &work);
            offspring.push(Individual {
                expr,
                fitness: sem.mean(),
                semantics: Some(sem),
            });
        }
        let i = match cfg.variant {
            Variant::Siea => semantic_select(&offspring, &parent, cfg.bounds, cfg.strict_pseudocode, rng)?,
            _ => argmax_uniform(&offspring, rng),
        };
        parent = offspring.swap_remove(i);
    }
    Ok((Evolved { best: parent, counters }, tree))
}

/// What a decision reports for the expression log.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionLog {
    pub variant: Variant,
    pub expression: Expression,
    pub node_count: usize,
    pub depth: usize,
    /// `None` when no offspring was evaluated (no generations or a forced move).
    pub fitness: Option<f64>,
    pub semantics: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Decision<A> {
    pub action: A,
    pub log: DecisionLog,
    pub counters: BudgetCounters,
}

/// Evolves this turn's expression, then searches a fresh tree with it.
pub fn decide<G: Game, R: Rng + ?Sized>(state: &G, cfg: &EvolutionConfig, rng: &mut R) -> Result<Decision<G::Action>> {
    cfg.validate()?;
    let legal = state.legal_actions();
    if legal.is_empty() {
        return Err(Error::Contract("decide needs a legal action".into()));
    }
    if legal.len() == 1 {
        let expr = Expression::seeded_uct(cfg.k_seed);
        return Ok(Decision {
            action: legal[0].clone(),
            log: DecisionLog {
                variant: cfg.variant,
                node_count: expr.node_count(),
                depth: expr.depth(),
                expression: expr,
                fitness: None,
                semantics: Vec::new(),
            },
            counters: BudgetCounters::default(),
        });
    }
    let evolved = match cfg.variant {
        Variant::EaP => evolve_ea_p(state, cfg, rng)?,
        Variant::Ea | Variant::Siea => evolve_ea(state, cfg, rng)?.0,
    };
    let mut counters = evolved.counters;
    let expr = evolved.best.expr;
    let out = run_search(state, cfg.final_search_sims, Policy::Expr(&expr), cfg.reward_system, cfg.normalize_q, false, rng)?;
    counters.final_search_sims += out.simulations as u64;
    let fitness = evolved.best.fitness;
    Ok(Decision {
        action: out.action,
        log: DecisionLog {
            variant: cfg.variant,
            node_count: expr.node_count(),
            depth: expr.depth(),
            expression: expr,
            fitness: (!fitness.is_nan()).then_some(fitness),
            semantics: evolved.best.semantics.map(|s| s.0).unwrap_or_default(),
        },
        counters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn sv(v: &[f64]) -> SemanticsVector {
        SemanticsVector(v.to_vec())
    }

    fn ind(fitness: f64, sem: &[f64]) -> Individual {
        Individual {
            expr: Expression::greedy(),
            fitness,
            semantics: Some(sv(sem)),
        }
    }

    #[test]
    fn ssd_hand_values() {
        assert_eq!(ssd(&sv(&[10.0, 0.0]), &sv(&[0.0, 10.0])).unwrap(), 10.0);
        assert_eq!(ssd(&sv(&[3.0, 4.0]), &sv(&[3.0, 4.0])).unwrap(), 0.0);
        assert!(ssd(&sv(&[1.0]), &sv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn ssi_is_strict() {
        let b = SemanticBounds::default();
        let zero = sv(&[0.0]);
        assert!(ssi(&sv(&[7.0]), &zero, b).unwrap());
        assert!(!ssi(&sv(&[5.0]), &zero, b).unwrap());
        assert!(!ssi(&sv(&[10.0]), &zero, b).unwrap());
    }

    #[test]
    fn unique_max_wins() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let parent = ind(0.0, &[0.0]);
        let o = [ind(9.0, &[0.0]), ind(7.0, &[0.0]), ind(7.0, &[0.0]), ind(5.0, &[0.0])];
        assert_eq!(semantic_select(&o, &parent, SemanticBounds::default(), false, &mut rng).unwrap(), 0);
    }

    #[test]
    fn tied_pair_prefers_closest_to_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let parent = ind(0.0, &[0.0]);
        let o = [ind(3.0, &[9.0]), ind(3.0, &[6.0]), ind(1.0, &[5.5])];
        for _ in 0..20 {
            assert_eq!(semantic_select(&o, &parent, SemanticBounds::default(), false, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn none_in_range_is_uniform_over_tied() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let parent = ind(0.0, &[0.0]);
        let o = [ind(3.0, &[2.0]), ind(3.0, &[14.0]), ind(1.0, &[6.0])];
        let mut seen = [0; 3];
        for _ in 0..400 {
            seen[semantic_select(&o, &parent, SemanticBounds::default(), false, &mut rng).unwrap()] += 1;
        }
        assert_eq!(seen[2], 0);
        assert!(seen[0] > 150 && seen[1] > 150, "{seen:?}");
    }

    #[test]
    fn strict_listing_randomises_single_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let parent = ind(0.0, &[0.0]);
        let o = [ind(3.0, &[6.0]), ind(3.0, &[14.0]), ind(1.0, &[2.0])];
        let mut seen = [0; 3];
        for _ in 0..600 {
            seen[semantic_select(&o, &parent, SemanticBounds::default(), true, &mut rng).unwrap()] += 1;
            assert_eq!(semantic_select(&o, &parent, SemanticBounds::default(), false, &mut rng).unwrap(), 0);
        }
        assert!(seen.iter().all(|&n| n > 120), "{seen:?}");
    }

    #[test]
    fn budgets_at_defaults() {
        let c = EvolutionConfig::new(Variant::Siea);
        assert_eq!(c.evolution_budget(), 2400);
        assert_eq!(c.decision_budget(), 2800);
        let p = EvolutionConfig::new(Variant::EaP);
        assert_eq!(p.evolution_budget(), 80);
        assert_eq!(p.decision_budget(), 480);
    }
}
