use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use naive_tm::synthesis::{HyperParams, LossKind};

/// `println!` that ignores a closed stdout, so piping into `head` is quiet.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

mod commands;
mod io;

#[derive(Parser)]
#[command(
    name = "naive-tm",
    version,
    about = "Naive probabilistic Turing machines and tape synthesis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a machine deterministically and print every configuration.
    Simulate {
        #[arg(long)]
        machine: PathBuf,
        /// JSON `{"tape": {"<pos>": "sym"}, "state": "q"}`; the state defaults to the start state.
        #[arg(long)]
        tape: PathBuf,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Push a belief through `steps` naive or exact steps.
    Propagate {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        belief: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Mode::Naive)]
        mode: Mode,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Gradient descent on the uncertain tape cells of a dataset.
    Descend {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated weights on each cell's second symbol, a JSON file
        /// of per-cell distributions, `uniform`, or `random` (uses --seed).
        #[arg(long, default_value = "uniform")]
        h0: String,
        /// Weight a cell needs before its symbol is reported as confident.
        #[arg(long, default_value_t = 0.8)]
        threshold: f64,
        #[command(flatten)]
        hyper: HyperArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sample the negative projected gradient on a grid.
    Flowfield {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Samples per uncertain cell, e.g. `21,21`.
        #[arg(long, default_value = "21,21")]
        grid: String,
        #[command(flatten)]
        hyper: HyperArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Per-cell loss derivatives at a uniform point, naive and exact.
    Causality {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Weight on every cell's second symbol.
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        #[command(flatten)]
        hyper: HyperArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write the bundled machines and datasets as JSON.
    Fixture {
        #[arg(value_enum)]
        name: FixtureName,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Naive,
    Standard,
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureName {
    ShiftMachine,
    ShiftLockstep,
    ShiftAa,
    ShiftAb,
    ShiftAaHalt,
    ShiftBeliefAa,
    CausalityMachine,
    CausalityDataset,
    All,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct HyperArgs {
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-6)]
    mu: f64,
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = Loss::Naive)]
    loss: Loss,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Loss {
    Naive,
    Standard,
}

impl HyperArgs {
    fn params(&self) -> HyperParams {
        HyperParams {
            lambda: self.lambda,
            mu: self.mu,
            eta: self.eta,
            max_iters: self.max_iters,
            eps: self.eps,
        }
    }

    fn kind(&self) -> LossKind {
        match self.loss {
            Loss::Naive => LossKind::Naive,
            Loss::Standard => LossKind::Standard,
        }
    }
}

/// 2 for bad input, 3 when an enumeration cap is hit, 4 for numerical failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<naive_tm::Error>() {
            if e.is_capacity() {
                return 3;
            }
            if e.is_numerical() {
                return 4;
            }
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
