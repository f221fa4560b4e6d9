//! Round-robin league harness: games, matches, league points, Welch t-tests
//! and the files a league run leaves behind.
//!
//! Seeds: in a league, match `m` under master seed `s` has base seed
//! `derive_seed(s, m)`, and its `i`-th game uses `base + i`. A game seed
//! fixes the deck shuffle and both controllers' random streams, so any game
//! can be replayed on its own with `play_game`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::statistics::{Data, Min, Max, OrderStatistics};

use crate::controller::ControllerSpec;
use crate::engine::{GameRecord, GameState, TileSet, TurnRecord};
use crate::error::{Error, Result};
use crate::evolution::DecisionLog;
use crate::game::PlayerId;
use crate::par::map_ordered;

pub const RESULTS_HEADER: &str = "match_id,p1,p2,game_idx,seed,winner,score1,score2,turns";

/// SplitMix64 finaliser.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent seed for stream `stream` of `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream))
}

/// One evolved-expression record, written as a JSON line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpressionRecord {
    pub match_id: u32,
    pub game_idx: u32,
    pub seed: u64,
    pub turn: u32,
    pub player: PlayerId,
    pub controller: String,
    pub variant: String,
    pub expression: String,
    pub node_count: usize,
    pub depth: usize,
    pub fitness: Option<f64>,
    pub semantics: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PlayedGame {
    pub seed: u64,
    pub scores: [u32; 2],
    pub winner: Option<PlayerId>,
    pub turns: u32,
    pub record: GameRecord,
    /// Per-turn expression logs of evolved controllers, in turn order.
    pub logs: Vec<(u32, PlayerId, DecisionLog)>,
    /// Search traces of controllers that were asked for them.
    pub traces: Vec<(u32, PlayerId, String)>,
}

fn discard_names(state: &GameState, from: usize) -> Vec<String> {
    let set = TileSet::standard();
    state.discarded()[from..].iter().map(|t| set.kind(*t).id.clone()).collect()
}

/// Plays one game with `p1` moving first.
pub fn play_game(p1: &ControllerSpec, p2: &ControllerSpec, seed: u64) -> Result<PlayedGame> {
    let mut state = GameState::new_game(seed);
    state.draw_next();
    let mut rngs = [
        ChaCha8Rng::seed_from_u64(derive_seed(seed, 1)),
        ChaCha8Rng::seed_from_u64(derive_seed(seed, 2)),
    ];
    let mut record = GameRecord::new(seed);
    record.initial_discards = discard_names(&state, 0);
    let mut logs = Vec::new();
    let mut traces = Vec::new();
    while !state.is_terminal() {
        let mover = state.to_move();
        let spec = if mover == PlayerId::P1 { p1 } else { p2 };
        let mv = spec.decide(&state, &mut rngs[mover.index()])?;
        let seen = state.discarded().len();
        let next = state.apply(&mv.action)?;
        let turn = next.turn();
        if let Some(log) = mv.log {
            logs.push((turn, mover, log));
        }
        if let Some(t) = mv.trace {
            traces.push((turn, mover, t));
        }
        record.turns.push(TurnRecord {
            turn,
            player: mover,
            action: mv.action,
            scores: next.scores(),
            discards_after: discard_names(&next, seen),
        });
        state = next;
    }
    let out = state.final_scoring()?;
    let scores = [out.score_p1, out.score_p2];
    record.final_scores = Some(scores);
    Ok(PlayedGame {
        seed,
        scores,
        winner: out.winner(),
        turns: state.turn(),
        record,
        logs,
        traces,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub p1: String,
    pub p2: String,
    pub games: u32,
    pub wins1: u32,
    pub wins2: u32,
    pub draws: u32,
    /// Per game, p1's score minus p2's.
    pub score_diffs: Vec<i64>,
}

impl MatchResult {
    pub fn from_games(p1: &str, p2: &str, games: &[PlayedGame]) -> Self {
        let mut m = MatchResult {
            p1: p1.to_string(),
            p2: p2.to_string(),
            games: games.len() as u32,
            wins1: 0,
            wins2: 0,
            draws: 0,
            score_diffs: Vec::with_capacity(games.len()),
        };
        for g in games {
            match g.winner {
                Some(PlayerId::P1) => m.wins1 += 1,
                Some(PlayerId::P2) => m.wins2 += 1,
                None => m.draws += 1,
            }
            m.score_diffs.push(g.scores[0] as i64 - g.scores[1] as i64);
        }
        m
    }
}

/// Plays `games` games with `a` moving first; game `i` uses `base_seed + i`.
pub fn run_match(a: &ControllerSpec, b: &ControllerSpec, games: u32, base_seed: u64, jobs: Option<usize>) -> Result<(MatchResult, Vec<PlayedGame>)> {
    if games == 0 {
        return Err(Error::Contract("a match needs at least one game".into()));
    }
    let seeds: Vec<u64> = (0..games as u64).map(|i| base_seed.wrapping_add(i)).collect();
    let played = map_ordered(seeds, jobs, |s| play_game(a, b, s)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok((MatchResult::from_games(&a.name, &b.name, &played), played))
}

/// League points one match awards to each side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchPoints {
    /// 4 for a match win, 2 for a drawn match, 0 for a loss; bonuses excluded.
    pub points1: u32,
    pub bwp1: u32,
    pub blp1: u32,
    pub points2: u32,
    pub bwp2: u32,
    pub blp2: u32,
}

impl MatchPoints {
    pub fn total1(&self) -> u32 {
        self.points1 + self.bwp1 + self.blp1
    }

    pub fn total2(&self) -> u32 {
        self.points2 + self.bwp2 + self.blp2
    }
}

/// Bonus win point at a game-win share of at least 75% of decided games;
/// bonus loss point when the loser is at most two games behind.
pub fn match_points(m: &MatchResult) -> MatchPoints {
    let mut p = MatchPoints::default();
    let (w, l) = (m.wins1, m.wins2);
    if w == l {
        p.points1 = 2;
        p.points2 = 2;
        return p;
    }
    let (hi, lo) = (w.max(l), w.min(l));
    let bwp = u32::from(4 * hi >= 3 * (hi + lo));
    let blp = u32::from(hi - lo <= 2);
    if w > l {
        p.points1 = 4;
        p.bwp1 = bwp;
        p.blp2 = blp;
    } else {
        p.points2 = 4;
        p.bwp2 = bwp;
        p.blp1 = blp;
    }
    p
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeagueRow {
    pub controller: String,
    pub points: u32,
    pub bwp: u32,
    pub blp: u32,
    /// Matches won, lost and drawn.
    pub wins: u32,
    pub losses: u32,
    pub draws: u32,
    /// Mean per-game score difference over all the controller's games.
    pub pd: f64,
}

/// Aggregates matches per controller, ranked by points then PD.
pub fn league_table(matches: &[MatchResult]) -> Vec<LeagueRow> {
    let mut order: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, (LeagueRow, i64, u64)> = BTreeMap::new();
    let mut entry = |name: &str, order: &mut Vec<String>| {
        if !rows.contains_key(name) {
            order.push(name.to_string());
            rows.insert(
                name.to_string(),
                (
                    LeagueRow {
                        controller: name.to_string(),
                        points: 0,
                        bwp: 0,
                        blp: 0,
                        wins: 0,
                        losses: 0,
                        draws: 0,
                        pd: 0.0,
                    },
                    0,
                    0,
                ),
            );
        }
    };
    for m in matches {
        entry(&m.p1, &mut order);
        entry(&m.p2, &mut order);
    }
    for m in matches {
        let pts = match_points(m);
        let diff: i64 = m.score_diffs.iter().sum();
        let n = m.score_diffs.len() as u64;
        for (name, own, bwp, blp, sign) in [(&m.p1, pts.points1, pts.bwp1, pts.blp1, 1), (&m.p2, pts.points2, pts.bwp2, pts.blp2, -1)] {
            let (row, sum, count) = rows.get_mut(name.as_str()).expect("registered above");
            row.points += own + bwp + blp;
            row.bwp += bwp;
            row.blp += blp;
            match own {
                4 => row.wins += 1,
                2 => row.draws += 1,
                _ => row.losses += 1,
            }
            *sum += sign * diff;
            *count += n;
        }
    }
    let mut out: Vec<LeagueRow> = order
        .iter()
        .map(|name| {
            let (mut row, sum, count) = rows.remove(name).expect("registered above");
            row.pd = if count == 0 { 0.0 } else { sum as f64 / count as f64 };
            row
        })
        .collect();
    out.sort_by(|a, b| b.points.cmp(&a.points).then(b.pd.total_cmp(&a.pd)));
    out
}

/// League report laid out like the published tables.
pub fn format_league(rows: &[LeagueRow]) -> String {
    let width = rows.iter().map(|r| r.controller.len()).max().unwrap_or(6).max(6);
    let mut s = String::new();
    let _ = writeln!(s, "{:<4} {:<width$} {:>6} {:>3} {:>3} {:>3} {:>3} {:>3} {:>8}", "Rank", "Player", "Points", "BWP", "BLP", "W", "L", "D", "PD");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(
            s,
            "{:<4} {:<width$} {:>6} {:>3} {:>3} {:>3} {:>3} {:>3} {:>+8.2}",
            i + 1,
            r.controller,
            r.points,
            r.bwp,
            r.blp,
            r.wins,
            r.losses,
            r.draws,
            r.pd
        );
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TTestReport {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    pub significant: bool,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sided Welch t-test, significant at the 1% level. When both samples
/// have zero variance, p is 1 for equal means and 0 otherwise.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTestReport> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Contract("each sample needs at least two values".into()));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    if se2 == 0.0 {
        let (t, p) = if ma == mb { (0.0, 1.0) } else { ((ma - mb).signum() * f64::INFINITY, 0.0) };
        return Ok(TTestReport {
            t,
            df: (a.len() + b.len() - 2) as f64,
            p_value: p,
            significant: p < 0.01,
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Contract(format!("t distribution: {e}")))?;
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(TTestReport {
        t,
        df,
        p_value: p,
        significant: p < 0.01,
    })
}

/// One scheduled match: `p1` and `p2` index the controller list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub match_id: u32,
    pub p1: usize,
    pub p2: usize,
    pub base_seed: u64,
}

/// Everything needed to run a league.
#[derive(Clone, Debug)]
pub struct LeagueSpec {
    pub controllers: Vec<ControllerSpec>,
    pub games: u32,
    pub seed: u64,
    pub jobs: Option<usize>,
    /// Keep one replayable record file per game.
    pub write_records: bool,
}

impl LeagueSpec {
    /// Every ordered pair of distinct controllers.
    pub fn schedule(&self) -> Vec<Fixture> {
        let n = self.controllers.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1));
        for p1 in 0..n {
            for p2 in 0..n {
                if p1 != p2 {
                    let match_id = out.len() as u32;
                    out.push(Fixture {
                        match_id,
                        p1,
                        p2,
                        base_seed: derive_seed(self.seed, match_id as u64),
                    });
                }
            }
        }
        out
    }
}

/// What a batch of fixtures produced.
#[derive(Clone, Debug)]
pub struct FixtureResults {
    pub matches: Vec<MatchResult>,
    /// Each controller's own final score in every game it played.
    pub scores: Vec<Vec<f64>>,
    pub expressions: Vec<ExpressionRecord>,
    pub files: Vec<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct LeagueReport {
    pub table: Vec<LeagueRow>,
    pub matches: Vec<MatchResult>,
    /// `(row, column, report)` over controller indices, row < column.
    pub ttests: Vec<(usize, usize, TTestReport)>,
    pub files: Vec<PathBuf>,
}

/// Node-count quartiles of evolved expressions per (variant, turn).
pub fn node_count_quartiles(records: &[ExpressionRecord]) -> String {
    let mut groups: BTreeMap<(String, u32), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.variant.clone(), r.turn)).or_default().push(r.node_count as f64);
    }
    let mut s = String::from("variant,turn,n,min,q1,median,q3,max\n");
    for ((variant, turn), v) in groups {
        let n = v.len();
        let mut d = Data::new(v);
        let _ = writeln!(
            s,
            "{variant},{turn},{n},{},{},{},{},{}",
            d.min(),
            d.lower_quartile(),
            d.median(),
            d.upper_quartile(),
            d.max()
        );
    }
    s
}

fn write(path: PathBuf, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, contents)?;
    files.push(path);
    Ok(())
}

fn check_names(controllers: &[ControllerSpec]) -> Result<()> {
    for (i, c) in controllers.iter().enumerate() {
        if controllers[..i].iter().any(|d| d.name == c.name) {
            return Err(Error::Contract(format!("controller name `{}` used twice", c.name)));
        }
    }
    Ok(())
}

/// Plays every fixture and writes into `out`: `results.csv`,
/// `expressions.jsonl`, `fig2_node_counts.csv`, plus `records/` when asked
/// and `traces/` for controllers with tracing on. A failing game leaves the
/// rows of all other games in place before the error is returned.
pub fn run_fixtures(
    controllers: &[ControllerSpec],
    fixtures: &[Fixture],
    games: u32,
    jobs: Option<usize>,
    write_records: bool,
    out: &Path,
) -> Result<FixtureResults> {
    if games == 0 {
        return Err(Error::Contract("a match needs at least one game".into()));
    }
    check_names(controllers)?;
    fs::create_dir_all(out)?;
    let work: Vec<(Fixture, u32, u64)> = fixtures
        .iter()
        .flat_map(|&f| (0..games).map(move |g| (f, g, f.base_seed.wrapping_add(g as u64))))
        .collect();
    let results = map_ordered(work.clone(), jobs, |(f, _, seed)| play_game(&controllers[f.p1], &controllers[f.p2], seed));

    let mut files = Vec::new();
    let mut csv = format!("{RESULTS_HEADER}\n");
    let mut expressions = Vec::new();
    let mut first_error = None;
    let mut per_match: BTreeMap<u32, Vec<PlayedGame>> = BTreeMap::new();
    for (&(f, g, seed), res) in work.iter().zip(results) {
        let m = f.match_id;
        let game = match res {
            Ok(game) => game,
            Err(e) => {
                first_error.get_or_insert(Error::Contract(format!("match {m} game {g}: {e}")));
                continue;
            }
        };
        let (a, b) = (&controllers[f.p1], &controllers[f.p2]);
        let winner = match game.winner {
            Some(PlayerId::P1) => a.name.as_str(),
            Some(PlayerId::P2) => b.name.as_str(),
            None => "draw",
        };
        let _ = writeln!(csv, "{m},{},{},{g},{seed},{winner},{},{},{}", a.name, b.name, game.scores[0], game.scores[1], game.turns);
        for (turn, player, log) in &game.logs {
            expressions.push(ExpressionRecord {
                match_id: m,
                game_idx: g,
                seed,
                turn: *turn,
                player: *player,
                controller: if *player == PlayerId::P1 { a.name.clone() } else { b.name.clone() },
                variant: log.variant.to_string(),
                expression: log.expression.to_string(),
                node_count: log.node_count,
                depth: log.depth,
                fitness: log.fitness,
                semantics: log.semantics.clone(),
            });
        }
        if write_records {
            fs::create_dir_all(out.join("records"))?;
            write(out.join("records").join(format!("m{m:03}_g{g:03}.txt")), &game.record.to_text(), &mut files)?;
        }
        if !game.traces.is_empty() {
            fs::create_dir_all(out.join("traces"))?;
            let mut text = String::new();
            for (turn, player, t) in &game.traces {
                let _ = writeln!(text, "# turn {turn} {player}");
                text.push_str(t);
            }
            write(out.join("traces").join(format!("m{m:03}_g{g:03}.txt")), &text, &mut files)?;
        }
        per_match.entry(m).or_default().push(game);
    }
    write(out.join("results.csv"), &csv, &mut files)?;
    let mut jsonl = String::new();
    for r in &expressions {
        let line = serde_json::to_string(r).map_err(|e| Error::Contract(format!("serialising expression log: {e}")))?;
        jsonl.push_str(&line);
        jsonl.push('\n');
    }
    write(out.join("expressions.jsonl"), &jsonl, &mut files)?;
    write(out.join("fig2_node_counts.csv"), &node_count_quartiles(&expressions), &mut files)?;
    if let Some(e) = first_error {
        return Err(e);
    }

    let mut matches = Vec::with_capacity(fixtures.len());
    let mut scores: Vec<Vec<f64>> = vec![Vec::new(); controllers.len()];
    for f in fixtures {
        let games = &per_match[&f.match_id];
        matches.push(MatchResult::from_games(&controllers[f.p1].name, &controllers[f.p2].name, games));
        for g in games {
            scores[f.p1].push(g.scores[0] as f64);
            scores[f.p2].push(g.scores[1] as f64);
        }
    }
    Ok(FixtureResults {
        matches,
        scores,
        expressions,
        files,
    })
}

/// Runs every ordered pairing. Besides the files of [`run_fixtures`] it
/// writes `league.txt` and the pairwise Welch tests in `ttest.csv`.
pub fn run_league(spec: &LeagueSpec, out: &Path) -> Result<LeagueReport> {
    if spec.controllers.len() < 2 {
        return Err(Error::Contract("a league needs at least two controllers".into()));
    }
    check_names(&spec.controllers)?;
    let res = run_fixtures(&spec.controllers, &spec.schedule(), spec.games, spec.jobs, spec.write_records, out)?;
    let mut files = res.files;
    let table = league_table(&res.matches);
    write(out.join("league.txt"), &format_league(&table), &mut files)?;

    let mut ttests = Vec::new();
    let mut tcsv = String::from("a,b,t,df,p_value,significant\n");
    for i in 0..res.scores.len() {
        for j in i + 1..res.scores.len() {
            if let Ok(r) = welch_t_test(&res.scores[i], &res.scores[j]) {
                let _ = writeln!(
                    tcsv,
                    "{},{},{:.6},{:.3},{:.6e},{}",
                    spec.controllers[i].name, spec.controllers[j].name, r.t, r.df, r.p_value, r.significant
                );
                ttests.push((i, j, r));
            }
        }
    }
    write(out.join("ttest.csv"), &tcsv, &mut files)?;
    Ok(LeagueReport {
        table,
        matches: res.matches,
        ttests,
        files,
    })
}
