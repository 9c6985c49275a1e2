use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use algdomain::cli::{self, AnalyzeOptions, AxisChoice};
use algdomain::domain::FlagOptions;
use algdomain::realize::TubeSpec;
use algdomain::surgery::Mode;
use algdomain::Result;

#[derive(Parser)]
#[command(name = "algdomain", version, about = "Refined algebraic domains and their Poincaré-Reeb graphs")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Nip,
    Ndtl,
    Ncv,
}

#[derive(Subcommand)]
enum Command {
    /// Characteristic sets, flags and Poincaré-Reeb graphs of a scene.
    Analyze {
        scene: PathBuf,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        axis: AxisArg,
        /// Solver tolerance, overriding the scene's.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        ndtl_same_curve_only: bool,
    },
    /// Remove inflections, double tangencies or curvature vertices by inserting disks.
    Surgery {
        scene: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        ndtl_same_curve_only: bool,
    },
    /// Build a domain whose x-projection graph is the given drawn graph.
    Realize {
        graph: PathBuf,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        /// Half-width of the tube around the drawing.
        #[arg(long, default_value_t = TubeSpec::default().width)]
        width: f64,
        #[arg(long, default_value_t = TubeSpec::default().fit_degree)]
        degree: u32,
        #[arg(long, default_value_t = TubeSpec::default().resolution)]
        resolution: usize,
    },
    /// Compare the certified results with a raster oracle.
    Check {
        scene: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1024)]
        resolution: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn run(cmd: Command) -> Result<serde_json::Value> {
    let value = match cmd {
        Command::Analyze { scene, out, axis, tol, ndtl_same_curve_only } => {
            let axis = match axis {
                AxisArg::X => AxisChoice::X,
                AxisArg::Y => AxisChoice::Y,
                AxisArg::Both => AxisChoice::Both,
            };
            let opts = AnalyzeOptions { axis, tol, flags: FlagOptions { ndtl_same_curve_only } };
            let r = cli::analyze(&scene, &out, &opts)?;
            serde_json::json!({ "morse": r.morse.morse, "flags": { "nip": r.flags.nip, "ndtl": r.flags.ndtl, "ncv": r.flags.ncv } })
        }
        Command::Surgery { scene, mode, out, tol, ndtl_same_curve_only } => {
            let mode = match mode {
                ModeArg::Nip => Mode::Nip,
                ModeArg::Ndtl => Mode::Ndtl,
                ModeArg::Ncv => Mode::Ncv,
            };
            serde_json::to_value(cli::surgery(&scene, mode, &out, FlagOptions { ndtl_same_curve_only }, tol)?)?
        }
        Command::Realize { graph, out, width, degree, resolution } => {
            let spec = TubeSpec { width, fit_degree: degree, resolution };
            let r = cli::realize(&graph, &out, &spec)?;
            serde_json::json!({ "matched": r.matched, "morse": r.morse, "degree": r.degree })
        }
        Command::Check { scene, out, resolution, tol } => {
            serde_json::to_value(cli::check(&scene, out.as_deref(), resolution, tol)?)?
        }
    };
    Ok(value)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", cli::error_json(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
