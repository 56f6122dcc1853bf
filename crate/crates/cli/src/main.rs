use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod settings;

use settings::Settings;

/// Denoising, inpainting and evaluation of diffusion-tensor fields.
#[derive(Parser, Debug)]
#[command(name = "spdreg", version, about)]
struct Cli {
    /// Cap on worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// TOML file with default values for any of the parameter flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a phantom, its noisy refit and a provenance record
    Generate(GenerateArgs),
    /// Denoise a tensor field
    Denoise(SolveArgs),
    /// Fill the masked-out pixels of a tensor field
    Inpaint(InpaintArgs),
    /// Compare two tensor fields
    Evaluate(EvaluateArgs),
    /// Draw a tensor field as SVG ellipses
    Render(RenderArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Directory receiving phantom.dtf, noisy.dtf and provenance.json
    #[arg(long)]
    out_dir: PathBuf,
    /// Also write the noisy diffusion-weighted images to dwi.txt
    #[arg(long)]
    dwi: bool,
    /// Also write mask.msk with a hole COL,ROW,WIDTH,HEIGHT
    #[arg(long, value_parser = parse_hole)]
    hole: Option<[usize; 4]>,
    #[command(flatten)]
    settings: Settings,
}

fn parse_hole(s: &str) -> Result<[usize; 4], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| format!("'{t}' is not a non-negative integer"))
        })
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "expected COL,ROW,WIDTH,HEIGHT".to_string())
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Solver report path (default: output with a .json extension)
    #[arg(long)]
    report: Option<PathBuf>,
    /// Repeat the run over NAME=V1,V2,... (alpha, beta, p or s)
    #[arg(long)]
    sweep: Option<String>,
    /// Record wall-clock time in the report
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args, Debug)]
pub struct InpaintArgs {
    /// Mask file; 0 marks pixels to fill
    #[arg(long)]
    mask: PathBuf,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Ground-truth field
    #[arg(long)]
    orig: PathBuf,
    /// Reconstructed field
    #[arg(long)]
    rec: PathBuf,
    /// Write per-column mean largest and smallest eigenvalues to this CSV
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files or parameter values; exit code 2.
    Usage(String),
    /// Failure while running; exit code 3.
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<spdreg::Error> for CliError {
    fn from(e: spdreg::Error) -> Self {
        match e {
            spdreg::Error::Io(_) | spdreg::Error::LineSearch { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let file = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    match cli.command {
        Command::Generate(args) => commands::generate(&args, &args.settings.over(&file)),
        Command::Denoise(args) => commands::solve(&args, None, &args.settings.over(&file)),
        Command::Inpaint(args) => commands::solve(&args.solve, Some(&args.mask), &args.solve.settings.over(&file)),
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Render(args) => commands::render(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
