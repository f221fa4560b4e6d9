//! Argument parsing and command execution for `carc`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use carcassonne_lab::controller::ControllerSpec;
use carcassonne_lab::engine::{replay, EdgeKind, TileSet};
use carcassonne_lab::tournament::{
    derive_seed, format_league, match_points, play_game, run_fixtures, run_league, Fixture, LeagueSpec,
};
use clap::{Args, Parser, Subcommand};

const CONTROLLER_HELP: &str = "\
controller grammar: family[:key=value,...]
  random
  mcts:k=1.4142,sims=400,r=r2
  rave:k=0.5,b=10,sims=2800
  star:f=4,depth=2,order=promising
  siea:g=20,lambda=4,s=30,final=400   (also ea, eap; eap takes rollouts=N)
  any family: name=<label>";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Run(#[from] carcassonne_lab::Error),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "carc", version, about = "Carcassonne search controllers and league runner", after_help = CONTROLLER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Concurrent games (default: available parallelism)
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dump MCTS/RAVE search traces
    #[arg(long)]
    trace: bool,
    /// Normalise Q by the largest absolute reward during selection
    #[arg(long)]
    normalize_q: bool,
    /// Follow the semantic-selection listing literally
    #[arg(long)]
    strict_pseudocode: bool,
    /// Write one replayable record per game
    #[arg(long)]
    records: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Play one game
    Play {
        p1: String,
        p2: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Play a match of several games, first controller moving first
    Match {
        a: String,
        b: String,
        #[arg(long, default_value_t = 25)]
        games: u32,
        #[arg(long)]
        seed: Option<u64>,
        /// Also play the reverse match with the second controller first
        #[arg(long)]
        both_orders: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Round-robin league over every ordered pair of controllers
    League {
        controllers: Vec<String>,
        #[arg(long)]
        games: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directive file: one `controller`, `games`, `seed`, `jobs`, `out`
        /// or flag name per line; command-line values win
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Verify a game record by replaying it
    Replay { file: PathBuf },
    /// Validate a tile-set file (default: the built-in set) and print its census
    VerifyTiles {
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

/// Shared output options after validation.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub records: bool,
}

/// A validated invocation.
#[derive(Clone, Debug)]
pub enum RunSpec {
    Play {
        p1: ControllerSpec,
        p2: ControllerSpec,
        seed: u64,
        out: Option<PathBuf>,
    },
    Match {
        a: ControllerSpec,
        b: ControllerSpec,
        games: u32,
        seed: u64,
        both_orders: bool,
        output: Output,
    },
    League {
        spec: LeagueSpec,
        out: PathBuf,
    },
    Replay {
        file: PathBuf,
    },
    VerifyTiles {
        file: Option<PathBuf>,
    },
}

const DEFAULT_OUT: &str = "carc-out";

fn controller(s: &str, common: &Common) -> CliResult<ControllerSpec> {
    let mut c: ControllerSpec = s.parse().map_err(|e: carcassonne_lab::Error| CliError::Usage(format!("controller `{s}`: {e}")))?;
    c.normalize_q = common.normalize_q;
    c.trace = common.trace;
    if common.strict_pseudocode {
        c.set_strict_pseudocode(true);
    }
    Ok(c)
}

#[derive(Default)]
struct ConfigFile {
    controllers: Vec<String>,
    games: Option<u32>,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    flags: Common,
}

fn parse_config(path: &Path) -> CliResult<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = ConfigFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once(char::is_whitespace).map_or((line, ""), |(k, v)| (k, v.trim()));
        let bad = || CliError::Usage(format!("{}:{}: bad directive `{line}`", path.display(), i + 1));
        match (key, value.is_empty()) {
            ("controller", false) => cfg.controllers.push(value.to_string()),
            ("games", false) => cfg.games = Some(value.parse().map_err(|_| bad())?),
            ("seed", false) => cfg.seed = Some(value.parse().map_err(|_| bad())?),
            ("jobs", false) => cfg.jobs = Some(value.parse().map_err(|_| bad())?),
            ("out", false) => cfg.out = Some(PathBuf::from(value)),
            ("trace", true) => cfg.flags.trace = true,
            ("normalize-q", true) => cfg.flags.normalize_q = true,
            ("strict-pseudocode", true) => cfg.flags.strict_pseudocode = true,
            ("records", true) => cfg.flags.records = true,
            _ => return Err(bad()),
        }
    }
    Ok(cfg)
}

/// Parses and validates `argv` (program name first).
pub fn parse_args<I, T>(argv: I) -> CliResult<RunSpec>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(match cli.command {
        Cmd::Play { p1, p2, seed, common } => RunSpec::Play {
            p1: controller(&p1, &common)?,
            p2: controller(&p2, &common)?,
            seed,
            out: common.out.clone(),
        },
        Cmd::Match {
            a,
            b,
            games,
            seed,
            both_orders,
            common,
        } => {
            if games == 0 {
                return Err(CliError::Usage("--games must be positive".into()));
            }
            let seed = seed.ok_or_else(|| CliError::Usage("match needs --seed".into()))?;
            let (a, b) = (controller(&a, &common)?, controller(&b, &common)?);
            if a.name == b.name {
                return Err(CliError::Usage("the two controllers need distinct names (use name=...)".into()));
            }
            RunSpec::Match {
                a,
                b,
                games,
                seed,
                both_orders,
                output: Output {
                    dir: Some(common.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))),
                    jobs: common.jobs,
                    records: common.records,
                },
            }
        }
        Cmd::League {
            controllers,
            games,
            seed,
            config,
            common,
        } => {
            let file = match &config {
                Some(p) => parse_config(p)?,
                None => ConfigFile::default(),
            };
            let flags = Common {
                jobs: None,
                out: None,
                trace: common.trace || file.flags.trace,
                normalize_q: common.normalize_q || file.flags.normalize_q,
                strict_pseudocode: common.strict_pseudocode || file.flags.strict_pseudocode,
                records: common.records || file.flags.records,
            };
            let names = if controllers.is_empty() { file.controllers } else { controllers };
            if names.len() < 2 {
                return Err(CliError::Usage("league needs at least two controllers".into()));
            }
            let specs = names.iter().map(|s| controller(s, &flags)).collect::<CliResult<Vec<_>>>()?;
            let games = games.or(file.games).unwrap_or(25);
            if games == 0 {
                return Err(CliError::Usage("--games must be positive".into()));
            }
            let seed = seed.or(file.seed).ok_or_else(|| CliError::Usage("league needs --seed".into()))?;
            RunSpec::League {
                spec: LeagueSpec {
                    controllers: specs,
                    games,
                    seed,
                    jobs: common.jobs.or(file.jobs),
                    write_records: flags.records,
                },
                out: common.out.or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            }
        }
        Cmd::Replay { file } => RunSpec::Replay { file },
        Cmd::VerifyTiles { file } => RunSpec::VerifyTiles { file },
    })
}

fn edge_char(e: EdgeKind) -> char {
    match e {
        EdgeKind::City => 'C',
        EdgeKind::Road => 'R',
        EdgeKind::Field => 'F',
    }
}

/// Executes a spec and returns the report printed on success.
pub fn run(spec: &RunSpec) -> CliResult<String> {
    let mut report = String::new();
    match spec {
        RunSpec::Play { p1, p2, seed, out } => {
            let game = play_game(p1, p2, *seed)?;
            let _ = writeln!(report, "{} vs {} seed {}: {} - {} in {} turns", p1, p2, seed, game.scores[0], game.scores[1], game.turns);
            if let Some(dir) = out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("game.txt"), game.record.to_text())?;
                if !game.traces.is_empty() {
                    let mut text = String::new();
                    for (turn, player, t) in &game.traces {
                        let _ = writeln!(text, "# turn {turn} {player}");
                        text.push_str(t);
                    }
                    fs::write(dir.join("trace.txt"), text)?;
                }
                let _ = writeln!(report, "record written to {}", dir.join("game.txt").display());
            } else {
                report.push_str(&game.record.to_text());
            }
        }
        RunSpec::Match {
            a,
            b,
            games,
            seed,
            both_orders,
            output,
        } => {
            let controllers = [a.clone(), b.clone()];
            let mut fixtures = vec![Fixture {
                match_id: 0,
                p1: 0,
                p2: 1,
                base_seed: *seed,
            }];
            if *both_orders {
                fixtures.push(Fixture {
                    match_id: 1,
                    p1: 1,
                    p2: 0,
                    base_seed: derive_seed(*seed, 1),
                });
            }
            let dir = output.dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
            let res = run_fixtures(&controllers, &fixtures, *games, output.jobs, output.records, &dir)?;
            let mut summary = String::new();
            for m in &res.matches {
                let p = match_points(m);
                let _ = writeln!(
                    summary,
                    "{} vs {}: {}-{} ({} drawn), points {} - {}",
                    m.p1,
                    m.p2,
                    m.wins1,
                    m.wins2,
                    m.draws,
                    p.total1(),
                    p.total2()
                );
            }
            fs::write(dir.join("summary.txt"), &summary)?;
            report.push_str(&summary);
        }
        RunSpec::League { spec, out } => {
            let res = run_league(spec, out)?;
            report.push_str(&format_league(&res.table));
            let _ = writeln!(report, "{} matches, outputs in {}", res.matches.len(), out.display());
        }
        RunSpec::Replay { file } => {
            let text = fs::read_to_string(file)?;
            let r = replay(&text).map_err(|e| CliError::Verify(e.to_string()))?;
            let _ = writeln!(
                report,
                "ok: {} turns, {} discards, final {} {}",
                r.turns, r.discards, r.final_scores[0], r.final_scores[1]
            );
        }
        RunSpec::VerifyTiles { file } => {
            let owned;
            let set = match file {
                Some(p) => {
                    owned = TileSet::from_toml(&fs::read_to_string(p)?).map_err(|e| CliError::Verify(e.to_string()))?;
                    &owned
                }
                None => TileSet::standard(),
            };
            let _ = writeln!(report, "{:<3} {:>5} {:<5} {:<7} features", "id", "count", "edges", "pennant");
            for k in &set.kinds {
                let edges: String = k.edges.iter().map(|e| edge_char(*e)).collect();
                let feats: Vec<String> = k.features.iter().map(|f| f.kind.to_string()).collect();
                let _ = writeln!(report, "{:<3} {:>5} {:<5} {:<7} {}", k.id, k.multiplicity, edges, k.pennant, feats.join(" "));
            }
            let _ = writeln!(report, "total {} tiles in {} kinds, start {}", set.total_tiles(), set.kinds.len(), set.kind(set.start).id);
        }
    }
    Ok(report)
}
