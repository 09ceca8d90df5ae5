//! Command-line entry point; all work happens in `conemetric::cli`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use conemetric::cli::{self, exit, Command, Format, ProblemInput, RunConfig};
use conemetric::liouville::MeshParams;
use conemetric::Error;

#[derive(Parser, Debug)]
#[command(name = "conemetric", version, about = "Spherical cone metric toolkit")]
struct Args {
    /// Read the whole run configuration from a JSON file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report into this directory instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Half-width of the eigenvalue window around 2.
    #[arg(long, global = true)]
    window: Option<f64>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Angle-region membership.
    Angles {
        #[arg(long, default_value_t = 0)]
        genus: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        beta: Vec<f64>,
    },
    /// Branches of a cone-point splitting.
    Split {
        #[arg(long)]
        beta0: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<f64>,
        /// Coefficients as re,im,re,im,...
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        a: Vec<f64>,
    },
    /// Football eigenvalues.
    Spectrum {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 2.0)]
        lambda_max: f64,
    },
    /// Liouville solve for a football; use --config for other problems.
    Solve {
        #[arg(long)]
        football: f64,
        #[arg(long)]
        radial_cells: Option<usize>,
    },
    /// Pairing data from a solve report.
    Pair {
        #[arg(long)]
        diagnostics: PathBuf,
        /// Direction in R^{2K} as comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Only these criteria.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<usize>>,
    },
}

fn build(args: Args) -> Result<RunConfig, Error> {
    let mut cfg = match (&args.config, args.command) {
        (Some(path), None) => RunConfig::from_file(path)?,
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput("give either --config or a subcommand".into()))
        }
        (None, None) => return Err(Error::InvalidInput("a subcommand or --config is required".into())),
        (None, Some(sub)) => RunConfig::new(match sub {
            Sub::Angles { genus, beta } => Command::Angles { genus, beta },
            Sub::Split { beta0, targets, a } => {
                if a.len() % 2 != 0 {
                    return Err(Error::InvalidInput("--a needs re,im pairs".into()));
                }
                Command::Split {
                    beta0,
                    targets,
                    a: a.chunks(2).map(|c| [c[0], c[1]]).collect(),
                }
            }
            Sub::Spectrum { beta, lambda_max } => Command::Spectrum { beta, lambda_max },
            Sub::Solve { football, radial_cells } => {
                let mut mesh = MeshParams::default();
                if let Some(n) = radial_cells {
                    mesh.radial_cells = n;
                }
                Command::Solve {
                    problem: ProblemInput::Football { beta: football },
                    mesh,
                }
            }
            Sub::Pair { diagnostics, direction } => Command::Pair {
                diagnostics,
                split: None,
                direction,
            },
            Sub::Verify { criteria } => Command::Verify { criteria },
        }),
    };
    if let Some(o) = args.out {
        cfg.output_dir = Some(o);
    }
    if let Some(f) = args.format {
        cfg.format = match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        };
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.window {
        cfg.tolerances.window = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INVALID_INPUT as u8 } else { 0 });
        }
    };
    let result = cli::configure_threads()
        .and_then(|_| build(args))
        .and_then(|cfg| cli::run(&cfg));
    match result {
        Ok(out) => {
            match &out.path {
                Some(p) => eprintln!("wrote {}", p.display()),
                None => print!("{}", out.rendered),
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
