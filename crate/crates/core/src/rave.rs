//! MCTS-RAVE: all-moves-as-first statistics blended into the action value.
//!
//! A node keeps, per action key, how often that action was played by the
//! node's own player anywhere later in a simulation passing through it (Ñ)
//! and the mean reward of those simulations (Q̃). Selection uses
//!
//! ```text
//! (1 - β) Q + β Q̃ + 2k sqrt(2 ln N(s) / N(s,a)),   β = sqrt(b / (3 N(s) + b))
//! ```
//!
//! with β forced to zero while Ñ is still zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{Game, PlayerId, Reward, RewardSystem};
use crate::mcts::{run_search, Policy, RaveParams, SearchOutcome, Tree};

#[derive(Clone, Debug, PartialEq)]
pub struct RaveConfig {
    pub b_tilde: f64,
    pub k: f64,
    pub simulations: u32,
    pub reward_system: RewardSystem,
    pub seed: u64,
    pub normalize_q: bool,
    pub trace: bool,
}

impl RaveConfig {
    pub fn new(simulations: u32, k: f64, b_tilde: f64) -> Self {
        RaveConfig {
            b_tilde,
            k,
            simulations,
            reward_system: RewardSystem::R2,
            seed: 0,
            normalize_q: false,
            trace: false,
        }
    }

    pub fn params(&self) -> RaveParams {
        RaveParams {
            k: self.k,
            b_tilde: self.b_tilde,
        }
    }
}

pub fn beta(n_s: u32, b_tilde: f64) -> f64 {
    (b_tilde / (3.0 * n_s as f64 + b_tilde)).sqrt()
}

/// Blended selection value of a child.
pub fn rave_value(q: f64, q_tilde: f64, amaf_visits: u32, n_s: u32, n_sa: u32, p: RaveParams) -> f64 {
    let b = if amaf_visits == 0 { 0.0 } else { beta(n_s, p.b_tilde) };
    let explore = if n_sa == 0 {
        0.0
    } else {
        2.0 * p.k * (2.0 * (n_s.max(1) as f64).ln() / n_sa as f64).sqrt()
    };
    (1.0 - b) * q + b * q_tilde + explore
}

/// Standard backpropagation plus the AMAF update; `played[t]` is the
/// (mover, action) taken at `path[t]`, followed by the rollout's moves.
pub fn rave_backpropagate<G: Game>(tree: &mut Tree<G>, path: &[u32], played: &[(PlayerId, G::Action)], reward: Reward) {
    tree.backpropagate(path, reward);
    tree.amaf_update(path, played, reward);
}

pub fn rave_search<G: Game>(state: &G, cfg: &RaveConfig) -> Result<G::Action> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rave_search_with_rng(state, cfg, &mut rng).map(|o| o.action)
}

pub fn rave_search_with_rng<G: Game, R: Rng + ?Sized>(state: &G, cfg: &RaveConfig, rng: &mut R) -> Result<SearchOutcome<G::Action>> {
    if cfg.simulations == 0 {
        return Err(Error::Contract("simulations must be positive".into()));
    }
    if cfg.b_tilde <= 0.0 {
        return Err(Error::Contract("b_tilde must be positive".into()));
    }
    run_search(state, cfg.simulations, Policy::Rave(cfg.params()), cfg.reward_system, cfg.normalize_q, cfg.trace, rng)
}
