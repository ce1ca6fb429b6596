//! Command-line front end: spec files, reports and the `pps` subcommands.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec_file;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{GameSource, Outcome};
pub use error::{CliError, Result};
use pps_core::analysis::DEFAULT_ASSIGNMENT_CAP;
use pps_core::model::{RewardDesign, DEFAULT_COALITION_LIMIT};
use pps_core::network::DEFAULT_STATE_CAP;
use pps_core::Caps;

#[derive(Debug, Parser)]
#[command(
    name = "pps",
    version,
    about = "Analyze and simulate partial-progress sharing games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    /// Game specification file (JSON).
    pub game: Option<PathBuf>,
    /// Built-in instance instead of a file: 1.1, 1.2 or 4.1.
    #[arg(long)]
    pub example: Option<String>,
    /// Number of tasks for a built-in instance.
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of agents for a built-in instance.
    #[arg(long)]
    pub n: Option<usize>,
    /// Replacement rewards in task id order, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rewards: Option<Vec<f64>>,
}

impl GameArgs {
    pub fn source(&self) -> GameSource {
        GameSource {
            path: self.game.clone(),
            example: self.example.clone(),
            m: self.m,
            n: self.n,
            rewards: self.rewards.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct CapArgs {
    /// Maximum number of enumerated states.
    #[arg(long = "opt-cap", env = "PPS_STATE_CAP", default_value_t = DEFAULT_STATE_CAP)]
    pub state_cap: usize,
    /// Maximum joint assignments examined at one state.
    #[arg(long, env = "PPS_ASSIGNMENT_CAP", default_value_t = DEFAULT_ASSIGNMENT_CAP)]
    pub assignment_cap: u128,
    /// Maximum number of agents for coalition enumeration.
    #[arg(long, env = "PPS_COALITION_LIMIT", default_value_t = DEFAULT_COALITION_LIMIT)]
    pub coalition_limit: usize,
}

impl CapArgs {
    pub fn caps(&self) -> Caps {
        Caps {
            state_cap: self.state_cap,
            assignment_cap: self.assignment_cap,
            coalition_limit: self.coalition_limit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DesignMode {
    Proportional,
    LineApprox,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a sufficient condition for PPS stability.
    Check {
        #[command(flatten)]
        game: GameArgs,
        /// line-ne, line-core, line-stackelberg, dag-ne, dag-sa,
        /// dag-stackelberg, dag-core or all.
        #[arg(long, default_value = "all")]
        which: String,
        #[command(flatten)]
        caps: CapArgs,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Utilities, makespans and exact best responses.
    Analyze {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        caps: CapArgs,
        /// Also value every proper coalition.
        #[arg(long)]
        core: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo replications of a strategy profile.
    Simulate {
        #[command(flatten)]
        game: GameArgs,
        /// `<agent>=<pps|split|delay:TAU|withhold>`, repeatable or comma
        /// separated; other agents play pps.
        #[arg(long)]
        strategy: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-replication CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Event log, one JSON object per line.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Replace the rewards of a separable game by a designed vector.
    Design {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value_t = DesignMode::Proportional)]
        mode: DesignMode,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Ratio for line-approx, in (0, 1].
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Check {
            game,
            which,
            caps,
            out,
        } => commands::cmd_check(&game.source().load()?, which, caps.caps(), out.as_deref()),
        Command::Analyze {
            game,
            caps,
            core,
            out,
        } => commands::cmd_analyze(&game.source().load()?, caps.caps(), *core, out.as_deref()),
        Command::Simulate {
            game,
            strategy,
            reps,
            seed,
            out,
            events,
        } => commands::cmd_simulate(
            &game.source().load()?,
            &commands::SimulateArgs {
                strategies: strategy,
                reps: *reps,
                seed: *seed,
                csv: out.as_deref(),
                events: events.as_deref(),
            },
        ),
        Command::Design {
            game,
            mode,
            scale,
            alpha,
            out,
        } => {
            let design = match mode {
                DesignMode::Proportional => RewardDesign::Proportional { scale: *scale },
                DesignMode::LineApprox => RewardDesign::LineApprox {
                    alpha: *alpha,
                    scale: *scale,
                },
            };
            commands::cmd_design(&game.source().load()?, design, out.as_deref())
        }
    }
}
