//! Controller specifications and the single decision entry point used by the
//! league harness and the command line.
//!
//! A specification is `family[:key=value,...]`:
//!
//! ```text
//! random
//! mcts:k=1.4142,sims=400,r=r2
//! rave:k=0.5,b=10,sims=2800
//! star:f=4,depth=2
//! siea:g=20,lambda=4,s=30,final=400
//! ea:g=5,lambda=4,s=10
//! eap:g=20,lambda=4,rollouts=1
//! ```
//!
//! Every family also accepts `name=<label>` to set the id shown in reports.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng;

use crate::engine::{Action, GameState};
use crate::error::{Error, Result};
use crate::evolution::{self, DecisionLog, EvolutionConfig, Variant};
use crate::game::RewardSystem;
use crate::mcts::{format_trace, run_search, Policy, RaveParams};
use crate::random::random_move;
use crate::star::{star_search, MoveOrdering, StarConfig};

#[derive(Clone, Debug, PartialEq)]
pub enum ControllerKind {
    Random,
    Mcts { k: f64, sims: u32, reward: RewardSystem },
    Rave { k: f64, b_tilde: f64, sims: u32, reward: RewardSystem },
    Star(StarConfig),
    Evolved(EvolutionConfig),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControllerSpec {
    pub name: String,
    pub kind: ControllerKind,
    pub normalize_q: bool,
    pub trace: bool,
}

/// One decision and whatever the controller reports about it.
#[derive(Clone, Debug)]
pub struct Move {
    pub action: Action,
    pub log: Option<DecisionLog>,
    pub trace: Option<String>,
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x = match v {
        "sqrt2" | "√2" => std::f64::consts::SQRT_2,
        _ => v
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("parameter `{key}` expects a number, got `{v}`")))?,
    };
    if !x.is_finite() {
        return Err(Error::Parse(format!("parameter `{key}` must be finite")));
    }
    Ok(x)
}

fn parse_u32(key: &str, v: &str) -> Result<u32> {
    v.parse::<u32>()
        .map_err(|_| Error::Parse(format!("parameter `{key}` expects a non-negative integer, got `{v}`")))
}

fn parse_positive(key: &str, v: &str) -> Result<u32> {
    match parse_u32(key, v)? {
        0 => Err(Error::Parse(format!("parameter `{key}` must be positive"))),
        n => Ok(n),
    }
}

fn parse_reward(v: &str) -> Result<RewardSystem> {
    match v {
        "r1" | "R1" => Ok(RewardSystem::R1),
        "r2" | "R2" => Ok(RewardSystem::R2),
        _ => Err(Error::Parse(format!("reward system must be r1 or r2, got `{v}`"))),
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Parse(format!("parameter `{key}` expects true or false, got `{v}`"))),
    }
}

fn unknown(family: &str, key: &str) -> Error {
    Error::Parse(format!("`{family}` has no parameter `{key}`"))
}

impl FromStr for ControllerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        let mut pairs = Vec::new();
        for item in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("parameter `{item}` is not key=value")))?;
            pairs.push((k.trim(), v.trim()));
        }
        let mut name = None;
        let mut kind = match family {
            "random" => ControllerKind::Random,
            "mcts" => ControllerKind::Mcts {
                k: std::f64::consts::SQRT_2,
                sims: 400,
                reward: RewardSystem::R2,
            },
            "rave" => ControllerKind::Rave {
                k: std::f64::consts::SQRT_2,
                b_tilde: 10.0,
                sims: 400,
                reward: RewardSystem::R2,
            },
            "star" => ControllerKind::Star(StarConfig::default()),
            "siea" => ControllerKind::Evolved(EvolutionConfig::new(Variant::Siea)),
            "ea" => ControllerKind::Evolved(EvolutionConfig::new(Variant::Ea)),
            "eap" | "ea-p" => ControllerKind::Evolved(EvolutionConfig::new(Variant::EaP)),
            other => return Err(Error::Parse(format!("unknown controller `{other}`"))),
        };
        for (key, v) in pairs {
            if key == "name" {
                if v.is_empty() {
                    return Err(Error::Parse("empty controller name".into()));
                }
                name = Some(v.to_string());
                continue;
            }
            match &mut kind {
                ControllerKind::Random => return Err(unknown(family, key)),
                ControllerKind::Mcts { k, sims, reward } => match key {
                    "k" => *k = parse_f64(key, v)?,
                    "sims" => *sims = parse_positive(key, v)?,
                    "r" => *reward = parse_reward(v)?,
                    _ => return Err(unknown(family, key)),
                },
                ControllerKind::Rave { k, b_tilde, sims, reward } => match key {
                    "k" => *k = parse_f64(key, v)?,
                    "b" => *b_tilde = parse_f64(key, v)?,
                    "sims" => *sims = parse_positive(key, v)?,
                    "r" => *reward = parse_reward(v)?,
                    _ => return Err(unknown(family, key)),
                },
                ControllerKind::Star(c) => match key {
                    "f" => c.probing_factor = parse_u32(key, v)?,
                    "depth" => c.depth = parse_positive(key, v)?,
                    "lower" => c.lower = v.parse().map_err(|_| Error::Parse(format!("bad lower bound `{v}`")))?,
                    "upper" => c.upper = v.parse().map_err(|_| Error::Parse(format!("bad upper bound `{v}`")))?,
                    "order" => {
                        c.ordering = match v {
                            "promising" => MoveOrdering::Promising,
                            "reversed" => MoveOrdering::Reversed,
                            "natural" => MoveOrdering::Natural,
                            _ => return Err(Error::Parse(format!("unknown move ordering `{v}`"))),
                        }
                    }
                    _ => return Err(unknown(family, key)),
                },
                ControllerKind::Evolved(c) => match key {
                    "g" => c.generations = parse_u32(key, v)?,
                    "lambda" => c.lambda = parse_positive(key, v)?,
                    "s" => c.fitness_sims = parse_positive(key, v)?,
                    "final" => c.final_search_sims = parse_positive(key, v)?,
                    "k" => c.k_seed = parse_f64(key, v)?,
                    "rollouts" => c.ea_p_fitness_rollouts = parse_positive(key, v)?,
                    "alpha" => c.bounds.alpha = parse_f64(key, v)?,
                    "beta" => c.bounds.beta = parse_f64(key, v)?,
                    "r" => c.reward_system = parse_reward(v)?,
                    "strict" => c.strict_pseudocode = parse_bool(key, v)?,
                    _ => return Err(unknown(family, key)),
                },
            }
        }
        match &kind {
            ControllerKind::Star(c) => c.validate().map_err(|e| Error::Parse(e.to_string()))?,
            ControllerKind::Evolved(c) => c.validate().map_err(|e| Error::Parse(e.to_string()))?,
            _ => {}
        }
        let mut spec = ControllerSpec {
            name: String::new(),
            kind,
            normalize_q: false,
            trace: false,
        };
        spec.name = name.unwrap_or_else(|| spec.canonical());
        Ok(spec)
    }
}

impl ControllerSpec {
    /// Full parameter string; parsing it back yields the same controller.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        match &self.kind {
            ControllerKind::Random => s.push_str("random"),
            ControllerKind::Mcts { k, sims, reward } => {
                let _ = write!(s, "mcts:k={k},sims={sims},r={reward}");
            }
            ControllerKind::Rave { k, b_tilde, sims, reward } => {
                let _ = write!(s, "rave:k={k},b={b_tilde},sims={sims},r={reward}");
            }
            ControllerKind::Star(c) => {
                let order = match c.ordering {
                    MoveOrdering::Promising => "promising",
                    MoveOrdering::Reversed => "reversed",
                    MoveOrdering::Natural => "natural",
                };
                let _ = write!(s, "star:f={},depth={},lower={},upper={},order={order}", c.probing_factor, c.depth, c.lower, c.upper);
            }
            ControllerKind::Evolved(c) => {
                let family = match c.variant {
                    Variant::EaP => "eap",
                    Variant::Ea => "ea",
                    Variant::Siea => "siea",
                };
                let _ = write!(
                    s,
                    "{family}:g={},lambda={},s={},final={},k={},rollouts={},alpha={},beta={},r={},strict={}",
                    c.generations,
                    c.lambda,
                    c.fitness_sims,
                    c.final_search_sims,
                    c.k_seed,
                    c.ea_p_fitness_rollouts,
                    c.bounds.alpha,
                    c.bounds.beta,
                    c.reward_system,
                    c.strict_pseudocode
                );
            }
        }
        s
    }

    pub fn variant(&self) -> Option<Variant> {
        match &self.kind {
            ControllerKind::Evolved(c) => Some(c.variant),
            _ => None,
        }
    }

    pub fn set_strict_pseudocode(&mut self, strict: bool) {
        if let ControllerKind::Evolved(c) = &mut self.kind {
            c.strict_pseudocode = strict;
        }
    }

    pub fn decide<R: Rng + ?Sized>(&self, state: &GameState, rng: &mut R) -> Result<Move> {
        let plain = |action| Move { action, log: None, trace: None };
        match &self.kind {
            ControllerKind::Random => random_move(state, rng).map(plain),
            ControllerKind::Mcts { k, sims, reward } => {
                let expr = crate::expr::Expression::seeded_uct(*k);
                let out = run_search(state, *sims, Policy::Expr(&expr), *reward, self.normalize_q, self.trace, rng)?;
                Ok(Move {
                    action: out.action,
                    log: None,
                    trace: self.trace.then(|| format_trace(&out.trace)),
                })
            }
            ControllerKind::Rave { k, b_tilde, sims, reward } => {
                let params = RaveParams { k: *k, b_tilde: *b_tilde };
                let out = run_search(state, *sims, Policy::Rave(params), *reward, self.normalize_q, self.trace, rng)?;
                Ok(Move {
                    action: out.action,
                    log: None,
                    trace: self.trace.then(|| format_trace(&out.trace)),
                })
            }
            ControllerKind::Star(c) => star_search(state, c).map(|r| plain(r.action)),
            ControllerKind::Evolved(c) => {
                let mut cfg = c.clone();
                cfg.normalize_q |= self.normalize_q;
                let d = evolution::decide(state, &cfg, rng)?;
                Ok(Move {
                    action: d.action,
                    log: Some(d.log),
                    trace: None,
                })
            }
        }
    }
}

impl fmt::Display for ControllerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_examples_parse() {
        for s in [
            "random",
            "mcts:k=1.4142,sims=400",
            "siea:g=20,lambda=4,s=30",
            "star:f=4,depth=2",
            "rave:k=0.5,b=10,sims=2800",
            "eap:g=0",
            "mcts:k=sqrt2,r=r1,name=R1",
        ] {
            let spec: ControllerSpec = s.parse().unwrap();
            let again: ControllerSpec = spec.canonical().parse().unwrap();
            assert_eq!(spec.kind, again.kind, "{s}");
        }
    }

    #[test]
    fn bad_parameters_are_rejected() {
        for s in ["mcts:k=abc", "nope", "mcts:sims=0", "random:k=1", "star:upper=-200", "siea:lambda", "mcts:k=inf"] {
            assert!(s.parse::<ControllerSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn label_overrides_name() {
        let spec: ControllerSpec = "mcts:k=0.5,name=K=0.5".parse().unwrap();
        assert_eq!(spec.name, "K=0.5");
    }
}
