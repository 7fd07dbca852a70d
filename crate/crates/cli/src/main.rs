use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use output::{render, CliError};

#[derive(Parser, Debug)]
#[command(name = "opensusy", version, about = "Spectra, scattering and SUSY partners of one-dimensional open wave systems")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON run configuration; flags override its keys
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Potential: JSON object or one of free, well, barrier, multistep, pt, truncated-pt
    #[arg(long, global = true)]
    pub potential: Option<String>,
    /// Write the JSON report here as well as to stdout
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Write plot-ready CSV here
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GenArgs {
    /// Generator type: 1, 2, 3a, 3b
    #[arg(long = "type")]
    pub gen_type: Option<String>,
    /// Im Omega of the generator (Omega^2 = -omega^2)
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Even generator of a symmetric potential
    #[arg(long)]
    pub symmetric: bool,
    /// Mixed generator beyond the support: side,c,d
    #[arg(long, allow_hyphen_values = true)]
    pub mix: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Modes of J_q (or J_t) inside a rectangle of the omega plane
    Spectrum {
        /// re_min,re_max,im_min,im_max
        #[arg(long, allow_hyphen_values = true)]
        region: Option<String>,
        /// q for (quasi)normal modes, t for total-transmission modes
        #[arg(long)]
        which: Option<String>,
    },
    /// Build a SUSY generator and its partner potential
    Susy {
        #[command(flatten)]
        generator: GenArgs,
        /// Re-find the modes of this region on the partner
        #[arg(long, allow_hyphen_values = true)]
        region: Option<String>,
        /// lo,hi,count sample points for the CSV profile
        #[arg(long, allow_hyphen_values = true)]
        x_range: Option<String>,
    },
    /// Reflection and transmission amplitudes on real frequencies
    Scatter {
        /// lo,hi,count
        #[arg(long, allow_hyphen_values = true)]
        omega_range: Option<String>,
        #[command(flatten)]
        generator: GenArgs,
    },
    /// Invariant checks on one potential
    Verify {
        #[arg(long, allow_hyphen_values = true)]
        region: Option<String>,
    },
    /// Regge-Wheeler / Zerilli superpartner checks
    Blackhole {
        /// Only `verify` is available
        action: String,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        mass: Option<f64>,
    },
    /// Wave equation <-> Klein-Gordon transformations
    Convert {
        /// we-to-kge or kge-to-we
        #[arg(long)]
        direction: Option<String>,
        /// CSV input: z,rho for we-to-kge, x,V for kge-to-we
        #[arg(long)]
        input: Option<PathBuf>,
        /// CSV output of the counterpart
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Poschl-Teller ladder, partners and the Jordan block
    Pt {
        #[arg(long, allow_hyphen_values = true)]
        strength: Option<f64>,
        #[arg(long)]
        width: Option<f64>,
        #[arg(long)]
        n_max: Option<usize>,
        /// n,sign of the generator Phi_n^{+-}
        #[arg(long, allow_hyphen_values = true)]
        partner: Option<String>,
        /// Half-width of the bilinear check when the partner has a double zero
        #[arg(long)]
        jordan: Option<f64>,
        /// Self-replicating pair with V~ = alpha V
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Acceptance criteria with measured values and tolerances
    Regression {
        /// Criteria by number or name (all when empty)
        names: Vec<String>,
        /// Multiply every numeric tolerance (below 1 tightens)
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// List the criteria and exit
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let err = CliError::validation(e.to_string().trim().to_string());
            eprint!("{}", render(&err.record()));
            return ExitCode::from(2);
        }
    };
    match commands::dispatch(&cli.common, cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprint!("{}", render(&e.record()));
            ExitCode::from(e.code as u8)
        }
    }
}
