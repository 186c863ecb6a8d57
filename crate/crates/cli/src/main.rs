//! `mf`: cube complexes, hyperplane gates, quasilines, and graphs of spaces
//! from the command line.
//!
//! Every run prints one deterministic report on stdout and exits with
//! 0 (pass/complete), 1 (input error, message on stderr), 2 (verdict
//! failure), or 3 (undecided-dominated outcome). `MF_CELL_BUDGET` caps the
//! total cells any development may create.

mod cmd_complex;
mod cmd_gog;
mod cmd_ql;
mod fixgen;
mod load;
mod report;
mod words;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::cmd_ql::QlArgs;
use crate::load::Ctx;
use crate::report::{render, Format, Report};

#[derive(Parser)]
#[command(
    name = "mf",
    version,
    about = "Cube complexes, gates, quasilines, and graphs of spaces"
)]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Include the proof-search log in the report.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that a complex file is well formed and nonpositively curved.
    Validate {
        complex: PathBuf,
    },
    /// List hyperplane classes with carriers, sides, and crossings.
    Hyperplanes {
        complex: PathBuf,
    },
    /// Wall distance and a geodesic between two vertices (CAT(0) input).
    Distance {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        complex: PathBuf,
    },
    /// Convex hull of a comma-separated vertex list (CAT(0) input).
    Hull {
        #[arg(long)]
        set: String,
        complex: PathBuf,
    },
    /// Hyperplane specialness verdict: two-sided, no self-crossing or
    /// osculation.
    Special {
        complex: PathBuf,
    },
    /// Develop the radius-R ball of the universal cover around a basepoint.
    Develop {
        #[arg(long, default_value_t = 3)]
        radius: u32,
        #[arg(long)]
        basepoint: Option<String>,
        complex: PathBuf,
    },
    /// Gate projections between the hulls of two vertex sets.
    Gate {
        #[arg(long = "set-a")]
        set_a: String,
        #[arg(long = "set-b")]
        set_b: String,
        complex: PathBuf,
    },
    /// Bridge decomposition between the hulls of two vertex sets.
    Bridge {
        #[arg(long = "set-a")]
        set_a: String,
        #[arg(long = "set-b")]
        set_b: String,
        complex: PathBuf,
    },
    /// Quasiline analysis of the deck transformation named by an edge word.
    #[command(subcommand)]
    Ql(QlCmd),
    /// Graph-of-spaces analysis.
    #[command(subcommand)]
    Gog(GogCmd),
    /// Developed tree windows and path stabilizers.
    #[command(subcommand)]
    Bs(BsCmd),
    /// Write a named fixture into a directory.
    Fixture {
        /// One of: grid, line, ladder, comb, torus, klein, tori_gog,
        /// transverse_gog, wise_gog.
        name: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Arguments shared by every quasiline subcommand.
#[derive(Args)]
struct QlShared {
    /// Comma-separated signed 1-based base edge references; the word's lift
    /// from the basepoint names the deck transformation.
    #[arg(long)]
    word: String,
    /// Development radius of the ambient window.
    #[arg(long, default_value_t = 6)]
    radius: u32,
    /// Base vertex to develop around (default: first vertex).
    #[arg(long)]
    basepoint: Option<String>,
    /// Minimum period demanded of the automorphism; 0 uses the default.
    #[arg(long = "min-period", default_value_t = 0)]
    min_period: u32,
    complex: PathBuf,
}

impl QlShared {
    fn as_args(&self) -> QlArgs<'_> {
        QlArgs {
            complex: &self.complex,
            word: &self.word,
            radius: self.radius,
            basepoint: self.basepoint.as_deref(),
            min_period: self.min_period,
        }
    }
}

#[derive(Subcommand)]
enum QlCmd {
    /// Classify window hyperplanes as essential, half-essential, or trivial.
    Classify {
        #[command(flatten)]
        shared: QlShared,
    },
    /// The classification plus the derived constant suite.
    Constants {
        #[command(flatten)]
        shared: QlShared,
    },
    /// Fellow-traveling certificate for a geodesic against the quasiline.
    Fellow {
        #[command(flatten)]
        shared: QlShared,
        /// JSON file: either a list of window vertex names or
        /// {"from_word": W, "to_word": W} walked from the basepoint.
        #[arg(long)]
        geodesic: PathBuf,
        /// Crossing threshold b; defaults to the suite's threshold B0.
        #[arg(long = "B")]
        b: Option<u64>,
    },
    /// Compare two words' quasilines over one window.
    Commensurate {
        #[command(flatten)]
        shared: QlShared,
        /// Second word, same syntax as --word.
        #[arg(long)]
        word2: String,
        /// Projection diameter below which the pair is reported unrelated.
        #[arg(long = "s-bound", default_value_t = 0)]
        s_bound: u32,
    },
}

#[derive(Subcommand)]
enum GogCmd {
    /// Check the gog file: spaces nonpositively curved, attachments local
    /// isometries, loops subdivided.
    Validate {
        gog: PathBuf,
    },
    /// Assemble and check the total space.
    Total {
        gog: PathBuf,
    },
    /// Stabilizer-intersection verdicts over edge or path cosets.
    Cyclonormal {
        /// `edges` or `paths:N`.
        #[arg(long, default_value = "edges")]
        mode: String,
        #[arg(long, default_value_t = 8)]
        radius: u32,
        /// Coset fan-out cap per chamber.
        #[arg(long, default_value_t = 6)]
        cap: usize,
        gog: PathBuf,
    },
    /// Tally stabilizer classes of descending paths by length.
    Stature {
        #[arg(long = "Lmax", default_value_t = 4)]
        l_max: u32,
        #[arg(long, default_value_t = 6)]
        radius: u32,
        #[arg(long, default_value_t = 4)]
        cap: usize,
        /// Root graph vertex (default: first).
        #[arg(long)]
        root: Option<String>,
        /// Override the empirical stature bound in the budget.
        #[arg(long = "s-bound")]
        s_bound: Option<u64>,
        gog: PathBuf,
    },
}

#[derive(Subcommand)]
enum BsCmd {
    /// Develop the tree window: chambers, strips, and path counts.
    Window {
        /// Path length bound in original edge units.
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, default_value_t = 6)]
        radius: u32,
        #[arg(long, default_value_t = 4)]
        cap: usize,
        #[arg(long)]
        root: Option<String>,
        gog: PathBuf,
    },
    /// Stabilizer verdict for one descending path, given by the outgoing
    /// strip ordinal chosen at each chamber.
    Stab {
        /// Comma-separated strip ordinals, e.g. `0,1,0`.
        #[arg(long)]
        path: String,
        #[arg(long, default_value_t = 6)]
        radius: u32,
        #[arg(long, default_value_t = 4)]
        cap: usize,
        #[arg(long)]
        root: Option<String>,
        gog: PathBuf,
    },
}

fn cell_budget() -> Result<usize, String> {
    match std::env::var("MF_CELL_BUDGET") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("MF_CELL_BUDGET=`{s}` is not a cell count")),
        Err(std::env::VarError::NotPresent) => Ok(mf_core::ball::DEFAULT_CELL_BUDGET),
        Err(e) => Err(format!("MF_CELL_BUDGET: {e}")),
    }
}

type Outcome = Result<(serde_json::Value, i32), String>;

fn dispatch(cmd: &Cmd, ctx: &mut Ctx) -> (String, Outcome) {
    match cmd {
        Cmd::Validate { complex } => ("validate".into(), cmd_complex::validate(ctx, complex)),
        Cmd::Hyperplanes { complex } => {
            ("hyperplanes".into(), cmd_complex::hyperplanes(ctx, complex))
        }
        Cmd::Distance { from, to, complex } => {
            ("distance".into(), cmd_complex::distance(ctx, complex, from, to))
        }
        Cmd::Hull { set, complex } => ("hull".into(), cmd_complex::hull(ctx, complex, set)),
        Cmd::Special { complex } => ("special".into(), cmd_complex::special(ctx, complex)),
        Cmd::Develop { radius, basepoint, complex } => (
            "develop".into(),
            cmd_complex::develop(ctx, complex, *radius, basepoint.as_deref()),
        ),
        Cmd::Gate { set_a, set_b, complex } => {
            ("gate".into(), cmd_complex::gate(ctx, complex, set_a, set_b))
        }
        Cmd::Bridge { set_a, set_b, complex } => {
            ("bridge".into(), cmd_complex::bridge_cmd(ctx, complex, set_a, set_b))
        }
        Cmd::Ql(q) => match q {
            QlCmd::Classify { shared } => {
                ("ql classify".into(), cmd_ql::classify(ctx, &shared.as_args()))
            }
            QlCmd::Constants { shared } => {
                ("ql constants".into(), cmd_ql::constants(ctx, &shared.as_args()))
            }
            QlCmd::Fellow { shared, geodesic, b } => (
                "ql fellow".into(),
                cmd_ql::fellow(ctx, &shared.as_args(), geodesic, *b),
            ),
            QlCmd::Commensurate { shared, word2, s_bound } => (
                "ql commensurate".into(),
                cmd_ql::commensurate_cmd(ctx, &shared.as_args(), word2, *s_bound),
            ),
        },
        Cmd::Gog(g) => match g {
            GogCmd::Validate { gog } => ("gog validate".into(), cmd_gog::validate(ctx, gog)),
            GogCmd::Total { gog } => ("gog total".into(), cmd_gog::total(ctx, gog)),
            GogCmd::Cyclonormal { mode, radius, cap, gog } => (
                "gog cyclonormal".into(),
                cmd_gog::cyclonormal(ctx, gog, mode, *radius, *cap),
            ),
            GogCmd::Stature { l_max, radius, cap, root, s_bound, gog } => (
                "gog stature".into(),
                cmd_gog::stature(ctx, gog, *l_max, *radius, *cap, root.as_deref(), *s_bound),
            ),
        },
        Cmd::Bs(b) => match b {
            BsCmd::Window { depth, radius, cap, root, gog } => (
                "bs window".into(),
                cmd_gog::window(ctx, gog, *depth, *radius, *cap, root.as_deref()),
            ),
            BsCmd::Stab { path, radius, cap, root, gog } => (
                "bs stab".into(),
                cmd_gog::stab(ctx, gog, path, *radius, *cap, root.as_deref()),
            ),
        },
        Cmd::Fixture { name, m, n, out } => (
            "fixture".into(),
            fixgen::generate(name, *m, *n, out).map(|v| (v, 0)),
        ),
    }
}

fn main() {
    let cli = Cli::parse();
    let budget = match cell_budget() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("mf: {e}");
            std::process::exit(1);
        }
    };
    let mut ctx = Ctx::new(cli.trace, budget);
    let (command, outcome) = dispatch(&cli.cmd, &mut ctx);
    match outcome {
        Ok((results, code)) => {
            let report = Report {
                command,
                inputs: ctx.inputs,
                results,
                caveats: ctx.caveats,
                trace: ctx.trace,
            };
            print!("{}", render(&report, cli.format));
            std::process::exit(code);
        }
        Err(msg) => {
            eprintln!("mf: {msg}");
            std::process::exit(1);
        }
    }
}
