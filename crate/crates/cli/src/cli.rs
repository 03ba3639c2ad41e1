//! Command line arguments and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{self, Output};
use crate::instances::{Algebra, CliError, ModuleArg};

#[derive(Parser, Debug)]
#[command(name = "logvoa", version, about = "Exact checks of vertex algebras, logarithmic modules, conformal blocks and intertwining operators")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Weight cutoff of the built-in Heisenberg algebra.
    #[arg(long, global = true, default_value_t = 6)]
    pub l_max: usize,
    /// Window level, also the level cutoff of built-in modules.
    #[arg(long, global = true, default_value_t = 4)]
    pub level: usize,
    /// Algebra file to use instead of the built-in Heisenberg algebra.
    #[arg(long, global = true)]
    pub voa: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Bound on the mode indices of sampled Borcherds instances.
    #[arg(long, global = true)]
    pub seed_sweep: Option<i64>,
    /// List individual failures in text reports.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Text,
}

/// Three module arguments: `fock:<charge>`, `logfock:<charge>` or a module file.
#[derive(Args, Debug, Clone)]
pub struct TripleArgs {
    #[arg(value_name = "MODULE", num_args = 3, required = true)]
    pub modules: Vec<String>,
}

impl TripleArgs {
    fn args(&self) -> Result<[ModuleArg; 3], CliError> {
        let [a, b, c] = [0, 1, 2].map(|i| self.modules[i].parse::<ModuleArg>());
        Ok([a?, b?, c?])
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Borcherds sweep, Virasoro relations and grading checks on the algebra.
    CheckVoa,
    /// Borcherds sweeps on a module and its dual, plus the depth check.
    CheckModule {
        #[arg(value_name = "MODULE")]
        module: String,
    },
    /// Dimension estimate of the block space at the window level and the one below.
    BlocksDim(TripleArgs),
    /// Extracts an operator per basis block and checks every axiom on it.
    ExtractIntw {
        #[command(flatten)]
        modules: TripleArgs,
        /// Directory for the operator tables.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// Block to operator to block round trips.
    Roundtrip {
        #[command(flatten)]
        modules: TripleArgs,
        /// Round trip this operator table instead of the basis blocks.
        #[arg(long)]
        intw: Option<PathBuf>,
    },
    /// Symbolic identity sweeps.
    Identities {
        #[arg(long, default_value_t = 4)]
        max: usize,
    },
    /// Writes the algebra, or one module, as a JSON file.
    Export {
        #[arg(value_name = "MODULE")]
        module: Option<String>,
    },
}

fn algebra(g: &GlobalArgs) -> Result<Algebra, CliError> {
    match &g.voa {
        Some(p) => Algebra::from_file(p),
        None => Algebra::heisenberg(g.l_max),
    }
}

/// Runs one command. Files named by `--out` are written here; otherwise
/// the returned output is meant for standard output.
pub fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = &cfg.global;
    let v = g.verbose;
    let out = match &cfg.command {
        Command::CheckVoa => {
            let alg = algebra(g)?;
            Output::new(&commands::check_voa(alg.voa(), g.seed_sweep.unwrap_or(3), 3)?, v)
        }
        Command::CheckModule { module } => {
            let arg: ModuleArg = module.parse()?;
            let alg = algebra(g)?;
            let m = alg.module(&arg, g.level)?;
            Output::new(&commands::check_module(&arg, &m, g.seed_sweep.unwrap_or(2))?, v)
        }
        Command::BlocksDim(t) => {
            let args = t.args()?;
            let triple = algebra(g)?.triple(&args, g.level)?;
            Output::new(&commands::blocks_dim(&args, &triple, g.level)?, v)
        }
        Command::ExtractIntw { modules, tables } => {
            let args = modules.args()?;
            let triple = algebra(g)?.triple(&args, g.level)?;
            let r = commands::extract_intw(&args, &triple, g.level, g.seed_sweep.unwrap_or(2), tables.as_deref())?;
            Output::new(&r, v)
        }
        Command::Roundtrip { modules, intw } => {
            let args = modules.args()?;
            let triple = algebra(g)?.triple(&args, g.level)?;
            Output::new(&commands::roundtrip(&args, &triple, g.level, intw.as_deref())?, v)
        }
        Command::Identities { max } => Output::new(&commands::identities(*max), v),
        Command::Export { module } => {
            let arg = module.as_deref().map(str::parse::<ModuleArg>).transpose()?;
            let text = commands::export(&algebra(g)?, arg.as_ref().map(|s| (s, g.level)))?;
            Output {
                passed: true,
                json: text.clone(),
                text,
            }
        }
    };
    if let Some(path) = &g.out {
        let body = match g.format {
            OutputFormat::Json => &out.json,
            OutputFormat::Text => &out.text,
        };
        std::fs::write(path, body).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(out)
}
