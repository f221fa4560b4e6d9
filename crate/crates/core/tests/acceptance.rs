//! Acceptance suite. Each criterion is its own test and writes one
//! `criterion N ...: PASS|FAIL` line straight to stderr, so the summary is
//! visible even when the harness captures output.
//!
//! Run with `cargo test -p carcassonne-lab --test acceptance`.

mod common;

use std::fs;
use std::io::Write as _;

use carcassonne_lab::controller::ControllerSpec;
use carcassonne_lab::evolution::{self, ssd, ssi, EvolutionConfig, SemanticBounds, SemanticsVector, Variant};
use carcassonne_lab::expr::{protected_div, Expression, SelectionContext};
use carcassonne_lab::star::{star_search, StarConfig};
use carcassonne_lab::tournament::{league_table, node_count_quartiles, play_game, run_league, run_match, ExpressionRecord, LeagueRow, LeagueSpec, MatchResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, name: &str, failures: &[String], detail: &str) {
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr();
    let _ = writeln!(err, "criterion {n:>2} {name}: {verdict} ({detail})");
    for f in failures {
        let _ = writeln!(err, "    {f}");
    }
    assert!(failures.is_empty(), "criterion {n} failed: {failures:?}");
}

fn spec(s: &str) -> ControllerSpec {
    s.parse().unwrap()
}

// ---------------------------------------------------------------- 1

/// Square win matrix: `m[i][j]` = (wins of i, wins of j) with i moving first.
fn matches_from(names: &[&str], m: &[&[(u32, u32)]], games: u32) -> Vec<MatchResult> {
    let mut out = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &(w1, w2)) in row.iter().enumerate() {
            if i == j {
                continue;
            }
            let draws = games - w1 - w2;
            let mut diffs = vec![1i64; w1 as usize];
            diffs.extend(vec![-1i64; w2 as usize]);
            diffs.extend(vec![0i64; draws as usize]);
            out.push(MatchResult {
                p1: names[i].to_string(),
                p2: names[j].to_string(),
                games,
                wins1: w1,
                wins2: w2,
                draws,
                score_diffs: diffs,
            });
        }
    }
    out
}

/// (name, points, bwp, blp, w, l, d)
type Row = (&'static str, u32, u32, u32, u32, u32, u32);

fn compare_table(label: &str, got: &[LeagueRow], want: &[Row], failures: &mut Vec<String>) {
    for &(name, points, bwp, blp, w, l, d) in want {
        let Some(r) = got.iter().find(|r| r.controller == name) else {
            failures.push(format!("{label}: {name} missing"));
            continue;
        };
        let g = (r.points, r.bwp, r.blp, r.wins, r.losses, r.draws);
        if g != (points, bwp, blp, w, l, d) {
            failures.push(format!("{label}: {name} got (P,BWP,BLP,W,L,D) = {g:?}, table {:?}", (points, bwp, blp, w, l, d)));
        }
    }
    let order: Vec<&str> = got.iter().map(|r| r.controller.as_str()).collect();
    let expected: Vec<&str> = want.iter().map(|r| r.0).collect();
    if order != expected {
        failures.push(format!("{label}: ranking {order:?}, table {expected:?}"));
    }
}

#[test]
fn criterion_01_league_arithmetic() {
    let t0 = std::time::Instant::now();
    let mut failures = Vec::new();

    let mcts = ["K=0.25", "K=0.5", "K=1", "K=2", "K=sqrt2", "K=3"];
    let x = (0, 0);
    let table3: &[&[(u32, u32)]] = &[
        &[x, (10, 14), (12, 12), (15, 10), (8, 17), (12, 13)],
        &[(11, 13), x, (15, 10), (15, 10), (13, 10), (15, 9)],
        &[(9, 16), (11, 14), x, (15, 10), (10, 14), (17, 8)],
        &[(16, 9), (19, 6), (13, 11), x, (11, 13), (16, 8)],
        &[(22, 3), (16, 9), (11, 13), (17, 7), x, (15, 10)],
        &[(17, 8), (14, 11), (10, 15), (12, 13), (13, 12), x],
    ];
    let table4: &[Row] = &[
        ("K=sqrt2", 31, 1, 2, 7, 3, 0),
        ("K=0.5", 25, 0, 1, 6, 4, 0),
        ("K=2", 22, 1, 1, 5, 5, 0),
        ("K=1", 19, 0, 1, 4, 5, 1),
        ("K=3", 17, 0, 1, 4, 6, 0),
        ("K=0.25", 15, 0, 1, 3, 6, 1),
    ];
    compare_table("MCTS", &league_table(&matches_from(&mcts, table3, 25)), table4, &mut failures);

    let rave = ["K=0.25", "K=0.5", "K=1", "K=sqrt2", "K=2", "K=3"];
    let table5: &[&[(u32, u32)]] = &[
        &[x, (16, 9), (16, 9), (16, 9), (23, 1), (25, 0)],
        &[(14, 10), x, (19, 6), (20, 4), (22, 3), (25, 0)],
        &[(8, 17), (6, 18), x, (17, 8), (20, 4), (24, 1)],
        &[(4, 21), (6, 18), (11, 13), x, (19, 6), (22, 3)],
        &[(0, 25), (1, 24), (5, 20), (6, 18), x, (19, 6)],
        &[(1, 24), (0, 25), (2, 23), (4, 21), (7, 18), x],
    ];
    let table6: &[Row] = &[
        ("K=0.5", 44, 8, 0, 9, 1, 0),
        ("K=0.25", 40, 4, 0, 9, 1, 0),
        ("K=1", 28, 4, 0, 6, 4, 0),
        ("K=sqrt2", 21, 4, 1, 4, 6, 0),
        ("K=2", 9, 1, 0, 2, 8, 0),
        ("K=3", 0, 0, 0, 0, 10, 0),
    ];
    compare_table("RAVE", &league_table(&matches_from(&rave, table5, 25)), table6, &mut failures);

    let star = ["Star1", "Star2", "Star2.5"];
    let star_matrix: &[&[(u32, u32)]] = &[&[x, (14, 11), (12, 12)], &[(11, 14), x, (14, 10)], &[(11, 14), (9, 16), x]];
    let star_table: &[Row] = &[("Star1", 14, 0, 0, 3, 0, 1), ("Star2", 8, 0, 0, 2, 2, 0), ("Star2.5", 2, 0, 0, 0, 3, 1)];
    compare_table("Star", &league_table(&matches_from(&star, star_matrix, 25)), star_table, &mut failures);

    let elapsed = t0.elapsed();
    if elapsed.as_secs_f64() >= 1.0 {
        failures.push(format!("took {elapsed:?}"));
    }
    report(1, "league arithmetic vs published tables", &failures, &format!("3 leagues in {elapsed:?}"));
}

// ---------------------------------------------------------------- 2

#[test]
fn criterion_02_star_soundness() {
    let mut failures = Vec::new();
    let mut positions = 0;
    let mut nodes = [0u64; 3];
    let mut seed = 0u64;
    while positions < 200 {
        let turns = 4 + (seed * 7 % 66) as u32;
        let s = common::midgame(seed, turns);
        seed += 1;
        if s.is_terminal() {
            continue;
        }
        positions += 1;
        let (v, a) = common::expectimax_oracle(&s, -100, 100);
        for (i, f) in [0u32, 1, 4].into_iter().enumerate() {
            let r = star_search(&s, &StarConfig::with_probing(f)).unwrap();
            nodes[i] += r.stats.nodes;
            if r.value != v || r.action != a {
                failures.push(format!("seed {} turn {turns} f={f}: {} {} vs oracle {v} {a}", seed - 1, r.value, r.action));
            }
        }
    }
    report(
        2,
        "Star1/Star2/Star2.5 equal depth-2 expectimax",
        &failures,
        &format!("{positions} positions, nodes visited f=0/1/4: {nodes:?}"),
    );
}

// ---------------------------------------------------------------- 3

#[test]
fn criterion_03_protected_ops_and_uct() {
    let mut failures = Vec::new();
    for b in [0.0, 0.0009, -0.0009, 1e-12, -0.000999] {
        if protected_div(7.0, b) != 1.0 {
            failures.push(format!("ProtectedDiv(7, {b}) = {}", protected_div(7.0, b)));
        }
    }
    if protected_div(7.0, 0.001) != 7000.0 {
        failures.push("ProtectedDiv(7, 0.001) should divide".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.gen_range(0.0..4.0);
        let q = rng.gen_range(-100.0..100.0);
        let n_sa = rng.gen_range(1..5000) as f64;
        let n_s = n_sa + rng.gen_range(0..5000) as f64;
        let closed = q + 2.0 * k * (2.0 * n_s.ln() / n_sa).sqrt();
        let got = Expression::seeded_uct(k).evaluate(&SelectionContext::new(q, n_s, n_sa));
        worst = worst.max((got - closed).abs());
    }
    if worst > 1e-12 {
        failures.push(format!("max |expr - closed form| = {worst:e}"));
    }
    report(3, "protected operators and seeded UCT", &failures, &format!("max deviation {worst:e} over 1000 contexts"));
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_04_semantics() {
    let mut failures = Vec::new();
    let v = |x: &[f64]| SemanticsVector(x.to_vec());
    let b = SemanticBounds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let p = v(&(0..30).map(|_| rng.gen_range(-50.0..50.0)).collect::<Vec<_>>());
        let q = v(&(0..30).map(|_| rng.gen_range(-50.0..50.0)).collect::<Vec<_>>());
        if ssd(&p, &p).unwrap() != 0.0 {
            failures.push("ssd(p, p) != 0".into());
        }
        if ssd(&p, &q).unwrap() != ssd(&q, &p).unwrap() {
            failures.push("ssd not symmetric".into());
        }
    }
    let hand = [(vec![10.0, 0.0], vec![0.0, 10.0], 10.0), (vec![1.0, 2.0, 3.0], vec![2.0, 2.0, 6.0], 4.0 / 3.0)];
    for (p, q, want) in hand {
        let got = ssd(&v(&p), &v(&q)).unwrap();
        if (got - want).abs() > 1e-15 {
            failures.push(format!("ssd({p:?}, {q:?}) = {got}, expected {want}"));
        }
    }
    let zero = v(&[0.0]);
    for (d, want) in [(5.0, false), (10.0, false), (7.0, true), (5.000001, true), (9.999999, true), (4.0, false), (11.0, false)] {
        if ssi(&v(&[d]), &zero, b).unwrap() != want {
            failures.push(format!("ssi at ssd {d} should be {want}"));
        }
    }
    if ssd(&v(&[1.0]), &v(&[1.0, 2.0])).is_ok() {
        failures.push("length mismatch accepted".into());
    }
    report(4, "semantic distance and similarity", &failures, "identity, symmetry, hand values, strict bounds");
}

// ---------------------------------------------------------------- 5..7

fn paired_wins(a: &ControllerSpec, b: &ControllerSpec, games_each: u32, seed: u64) -> (u32, u32) {
    let (m1, _) = run_match(a, b, games_each, seed, None).unwrap();
    let (m2, _) = run_match(b, a, games_each, seed.wrapping_add(1_000_003), None).unwrap();
    (m1.wins1 + m2.wins2, m1.wins2 + m2.wins1)
}

#[test]
fn criterion_05_reward_systems() {
    let r2 = spec("mcts:k=sqrt2,sims=100,r=r2,name=R2");
    let r1 = spec("mcts:k=sqrt2,sims=100,r=r1,name=R1");
    let (w2, w1) = paired_wins(&r2, &r1, 15, 500);
    let failures = if w2 * 10 >= 30 * 7 { vec![] } else { vec![format!("R2 won {w2} of 30, needs 21")] };
    report(5, "R2 beats R1 at 100 simulations", &failures, &format!("R2 {w2} - R1 {w1}, {} drawn", 30 - w1 - w2));
}

#[test]
fn criterion_06_baseline_dominance() {
    let mcts = spec("mcts:k=sqrt2,sims=100");
    let random = spec("random");
    let (w, l) = paired_wins(&mcts, &random, 10, 600);
    let failures = if w >= 18 { vec![] } else { vec![format!("MCTS won {w} of 20, needs 18")] };
    report(6, "MCTS beats Random", &failures, &format!("MCTS {w} - Random {l}"));
}

#[test]
fn criterion_07_evolution_sanity() {
    let mut failures = Vec::new();
    for v in [Variant::Ea, Variant::Siea] {
        let c = EvolutionConfig::new(v);
        if (c.evolution_budget(), c.decision_budget()) != (2400, 2800) {
            failures.push(format!("{v} budget {} / {}", c.evolution_budget(), c.decision_budget()));
        }
    }
    // counters from a real decision at the published settings
    let s = common::midgame(77, 12);
    let d = evolution::decide(&s, &EvolutionConfig::new(Variant::Siea), &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    if (d.counters.tree_iterations, d.counters.final_search_sims) != (2400, 400) {
        failures.push(format!("measured counters {:?}", d.counters));
    }
    let siea = spec("siea:g=5,lambda=4,s=10,final=100");
    let eap = spec("eap:g=5,lambda=4,rollouts=10,final=100");
    let (w, l) = paired_wins(&siea, &eap, 10, 700);
    if w * 10 < 20 * 7 {
        failures.push(format!("SIEA won {w} of 20, needs 14"));
    }
    report(7, "SIEA beats EA-p at desk scale", &failures, &format!("SIEA {w} - EA-p {l}; budgets 2400/2800 checked"));
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_08_determinism() {
    let controllers = vec![
        spec("siea:g=2,lambda=3,s=5,final=30,name=siea"),
        spec("mcts:sims=30,name=mcts"),
        spec("rave:sims=30,name=rave"),
        spec("random"),
    ];
    let mk = |jobs| LeagueSpec {
        controllers: controllers.clone(),
        games: 2,
        seed: 2024,
        jobs,
        write_records: true,
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    run_league(&mk(Some(1)), dirs[0].path()).unwrap();
    run_league(&mk(Some(1)), dirs[1].path()).unwrap();
    run_league(&mk(Some(4)), dirs[2].path()).unwrap();
    let mut failures = Vec::new();
    for file in ["results.csv", "expressions.jsonl", "league.txt", "ttest.csv", "fig2_node_counts.csv"] {
        let base = fs::read(dirs[0].path().join(file)).unwrap();
        for d in &dirs[1..] {
            if fs::read(d.path().join(file)).unwrap() != base {
                failures.push(format!("{file} differs"));
            }
        }
    }
    let rows = fs::read_to_string(dirs[0].path().join("results.csv")).unwrap().lines().count() - 1;
    if rows != 24 {
        failures.push(format!("{rows} result rows, expected 24"));
    }
    report(8, "byte-identical league reruns", &failures, &format!("{rows} games, sequential and 4-worker runs compared"));
}

// ---------------------------------------------------------------- 9

#[test]
fn criterion_09_engine_fixtures() {
    let mut failures = Vec::new();
    for (name, f) in common::fixtures::ALL {
        if let Err(e) = f() {
            failures.push(format!("{name}: {e}"));
        }
    }
    if common::fixtures::ALL.len() < 12 {
        failures.push("fewer than 12 fixtures".into());
    }
    for seed in 0..1000 {
        if let Err(e) = common::audited_random_game(10_000 + seed) {
            failures.push(e);
        }
    }
    report(
        9,
        "hand-scored fixtures and random-game audits",
        &failures,
        &format!("{} fixtures, 1000 audited games", common::fixtures::ALL.len()),
    );
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10_expression_log() {
    let siea = spec("siea");
    let random = spec("random");
    let game = play_game(&siea, &random, 31).unwrap();
    let mut failures = Vec::new();
    let siea_turns: Vec<u32> = game.record.turns.iter().filter(|t| t.player == carcassonne_lab::game::PlayerId::P1).map(|t| t.turn).collect();
    let logged: Vec<u32> = game.logs.iter().map(|(t, _, _)| *t).collect();
    if logged != siea_turns {
        failures.push(format!("{} records for {} turns", logged.len(), siea_turns.len()));
    }
    let records: Vec<ExpressionRecord> = game
        .logs
        .iter()
        .map(|(turn, player, log)| ExpressionRecord {
            match_id: 0,
            game_idx: 0,
            seed: 31,
            turn: *turn,
            player: *player,
            controller: siea.name.clone(),
            variant: log.variant.to_string(),
            expression: log.expression.to_string(),
            node_count: log.node_count,
            depth: log.depth,
            fitness: log.fitness,
            semantics: log.semantics.clone(),
        })
        .collect();
    for r in &records {
        if r.node_count < 1 || r.depth > 8 {
            failures.push(format!("turn {}: node_count {} depth {}", r.turn, r.node_count, r.depth));
        }
        match Expression::parse(&r.expression) {
            Ok(e) if e.node_count() == r.node_count => {}
            _ => failures.push(format!("turn {}: expression does not round-trip", r.turn)),
        }
    }
    let quartiles = node_count_quartiles(&records);
    if quartiles.lines().count() != records.len() + 1 {
        failures.push("quartile file does not have one row per turn".into());
    }
    let sizes: Vec<usize> = records.iter().map(|r| r.node_count).collect();
    report(10, "one expression record per SIEA turn", &failures, &format!("{} records, node counts {:?}", records.len(), sizes));
}
