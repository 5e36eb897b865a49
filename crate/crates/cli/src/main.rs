use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toric_ball::verify::VerifyConfig;
use toric_ball_cli::{self as cli, CliError, Output};

#[derive(Parser)]
#[command(name = "toric-ball", version, about = "Ball models of the nonnegative part of complete toric varieties")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the fan axioms and completeness.
    Validate { file: PathBuf },
    /// Dump the chart of every maximal flag.
    Charts {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the boundary parameterization of one flag simplex.
    Param {
        file: PathBuf,
        #[arg(long)]
        flag: usize,
        /// Barycentric coordinates ξ_0,…,ξ_n.
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
    },
    /// Run every check and write a report.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9, value_parser = positive)]
        tol: f64,
        /// Samples per flag pair in the gluing checks.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shift one exponent of every chart (negative control).
        #[arg(long)]
        perturb_b: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export level sets of the ball homeomorphism as OFF meshes.
    Mesh {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        radii: String,
        #[arg(long, default_value_t = 8)]
        res: usize,
        #[arg(long, default_value = "mesh")]
        out: PathBuf,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("{s} is not a positive number")),
    }
}

fn dispatch(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Validate { file } => cli::validate(&file),
        Command::Charts { file, out } => cli::charts(&file, out.as_deref()),
        Command::Param { file, flag, xi } => cli::param(&file, flag, &cli::parse_list(&xi)?),
        Command::Verify {
            file,
            tol,
            samples,
            seed,
            perturb_b,
            out,
        } => {
            let cfg = VerifyConfig {
                tol,
                samples,
                seed,
                perturb_b,
            };
            cli::verify(&file, &cfg, out.as_deref())
        }
        Command::Mesh {
            file,
            radii,
            res,
            out,
        } => cli::mesh(&file, &cli::parse_list(&radii)?, res, &out),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match dispatch(args.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
