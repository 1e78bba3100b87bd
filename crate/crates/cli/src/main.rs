// SPDX-License-Identifier: Apache-2.0

//! `rigkit` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 input parse, 3 validation failure,
//! 4 numerical divergence.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rigkit::RigError;

#[derive(Parser, Debug)]
#[command(name = "rigkit", version, about = "Rigging and animation toolkit")]
pub struct Cli {
    /// Seed for every random choice a subcommand makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Progress messages on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a rig file (and optionally a mesh) and print a report.
    Validate {
        rig: PathBuf,
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// Encode a rig as a token file.
    Tokenize(TokenizeArgs),
    /// Decode a token file back into a rig.
    Detokenize {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Skeleton and skinning metrics of a predicted rig against a reference.
    Metrics(MetricsArgs),
    /// Pose a skinned mesh and write it as OBJ.
    Deform {
        #[arg(long)]
        rig: PathBuf,
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        pose: PathBuf,
        /// Frame of the pose file to apply.
        #[arg(long, default_value_t = 0)]
        frame: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Geometric skinning weights for a mesh and skeleton.
    SkinHeuristic {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        rig: PathBuf,
        #[arg(long, default_value_t = rigkit::deform::DEFAULT_K_NEAREST)]
        k: usize,
        #[arg(long, default_value_t = rigkit::deform::DEFAULT_FALLOFF)]
        falloff: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Finite-difference gradient table for the differentiable kernels.
    GradCheck {
        #[arg(long, default_value_t = 20)]
        instances: usize,
    },
    /// Render 2D tracks of an animated rig.
    SynthTracks {
        #[arg(long)]
        rig: PathBuf,
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        animation: PathBuf,
        #[arg(long)]
        camera: PathBuf,
        /// Per-axis Gaussian pixel noise.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Number of tracked vertices.
        #[arg(long, default_value_t = 256)]
        vertices: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit an animation to tracks.
    Animate(AnimateArgs),
    /// Permutation probability at every integer epoch.
    Anneal {
        #[arg(long)]
        epochs: u32,
    },
    /// Area-weighted surface samples of a mesh.
    Sample {
        mesh: PathBuf,
        #[arg(long, default_value_t = 16)]
        count: usize,
    },
    /// Every intersection of a ray with a mesh.
    Raycast {
        mesh: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        origin: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        direction: Vec<f64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    Joint,
    Bone,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderArg {
    Hier,
    Spatial,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalizeArg {
    /// Mesh box when a mesh is given, otherwise each rig's own box.
    Auto,
    None,
    Own,
    Union,
}

#[derive(Args, Debug)]
pub struct TokenizeArgs {
    pub rig: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Joint)]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = OrderArg::Hier)]
    pub order: OrderArg,
    /// Shuffle joint groups with this seed (joint scheme only).
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub permute_prob: f64,
    #[arg(long, default_value_t = rigkit::codec::vocab::DEFAULT_SHAPE_TOKENS)]
    pub shape_tokens: usize,
    /// Scale the skeleton into the unit cube first.
    #[arg(long)]
    pub normalize: bool,
    /// Write the "tok indicator" text dump instead of the binary file.
    #[arg(long)]
    pub text: bool,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    pub pred: PathBuf,
    pub gt: PathBuf,
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = NormalizeArg::Auto)]
    pub normalize: NormalizeArg,
    #[arg(long)]
    pub bone_samples: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub poses: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnimateArgs {
    #[arg(long)]
    pub rig: PathBuf,
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub tracks: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Write one posed OBJ per frame into this directory.
    #[arg(long)]
    pub obj_dir: Option<PathBuf>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub final_lr_fraction: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub lambda_reg: Option<f64>,
    #[arg(long)]
    pub translation_weight: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Rig(RigError),
}

impl From<RigError> for CliError {
    fn from(e: RigError) -> Self {
        CliError::Rig(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 3,
            CliError::Rig(e) => match e {
                RigError::Parse { .. } | RigError::Io(_) | RigError::Json(_) => 2,
                RigError::Diverged { .. } => 4,
                _ => 3,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Validation(m) => f.write_str(m),
            CliError::Rig(e) => write!(f, "{e}"),
        }
    }
}

fn threads() -> Result<usize, CliError> {
    match std::env::var("RIGKIT_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Usage(format!("RIGKIT_THREADS must be a thread count, got {v:?}"))
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = threads().and_then(|n| rigkit::par::with_threads(n, || commands::run(&cli)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
