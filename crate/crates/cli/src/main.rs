//! Command-line front end: each subcommand is one pipeline stage, guide
//! files are the single source of truth between stages.
//!
//! Exit codes: 0 success, 1 attention needed (verification failures or
//! non-compliance), 2 usage or input error.

mod commands;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "guideforge",
    version,
    about = "Compile security-configuration guides into verified, executable hardening plans"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect the settings catalog
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Import guides from other formats
    #[command(subcommand)]
    Guide(GuideCommand),
    /// Extract policy automations from guide prose
    Extract {
        #[arg(long)]
        guide: PathBuf,
        /// Extraction-rule file; the bundled grammar is used when absent
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Lexicon file; the bundled lexicon is used when absent
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Verify automations against the catalog and attach hints to failures
    Verify {
        #[arg(long)]
        guide: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        /// Exact display-string matching instead of the lenient default
        #[arg(long)]
        strict: bool,
        /// Number of path suggestions attached to a miss
        #[arg(long, default_value_t = 3)]
        suggestions: usize,
    },
    /// Translate checked automations into low-level automations
    Lower {
        #[arg(long)]
        guide: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
    },
    /// Emit deployable artifacts from a lowered guide
    Export {
        #[command(subcommand)]
        what: ExportCommand,
    },
    /// Apply, check, or revert a plan against a simulated machine state
    #[command(subcommand)]
    Sim(SimCommand),
    /// Print the extraction/verification breakdown of a guide
    Stats {
        #[arg(long)]
        guide: PathBuf,
    },
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// Compile ADMX/ADML files and legacy definitions into a catalog file
    Build {
        /// Directory with .admx files
        #[arg(long)]
        admx: PathBuf,
        /// Directory with matching .adml files
        #[arg(long)]
        adml: PathBuf,
        /// Legacy-definitions file
        #[arg(long)]
        legacy: Option<PathBuf>,
        /// Output catalog file
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum GuideCommand {
    /// Convert an XCCDF benchmark into a guide file
    Import {
        #[arg(long)]
        xccdf: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ExportCommand {
    /// Machine-readable implementation plan (JSON)
    Plan {
        #[arg(long)]
        guide: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Registry policy files, one per scope
    Pol {
        #[arg(long)]
        guide: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Security template (GptTmpl.inf)
    Inf {
        #[arg(long)]
        guide: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Audit policy CSV (audit.csv)
    Audit {
        #[arg(long)]
        guide: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Human-review report (CSV and HTML)
    Report {
        #[arg(long)]
        guide: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum SimCommand {
    /// Apply every plan rule to the state, writing checkpoints for revert
    Apply {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        state: PathBuf,
        /// Where the updated state goes; defaults to the input state file
        #[arg(long)]
        out_state: Option<PathBuf>,
        /// Where the revert checkpoints go
        #[arg(long)]
        checkpoints: Option<PathBuf>,
    },
    /// Check plan compliance; exits 0 only at 100%
    Check {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        state: PathBuf,
    },
    /// Revert checkpoints last-in-first-out
    Revert {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        checkpoints: PathBuf,
        /// Where the restored state goes; defaults to the input state file
        #[arg(long)]
        out_state: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Catalog(CatalogCommand::Build {
            admx,
            adml,
            legacy,
            out,
        }) => commands::catalog_build(&admx, &adml, legacy.as_deref(), &out),
        Command::Guide(GuideCommand::Import { xccdf, out }) => commands::guide_import(&xccdf, &out),
        Command::Extract {
            guide,
            rules,
            lexicon,
        } => commands::extract(&guide, rules.as_deref(), lexicon.as_deref()),
        Command::Verify {
            guide,
            catalog,
            strict,
            suggestions,
        } => commands::verify(&guide, &catalog, strict, suggestions),
        Command::Lower { guide, catalog } => commands::lower(&guide, &catalog),
        Command::Export { what } => match what {
            ExportCommand::Plan { guide, output } => commands::export_plan(&guide, &output),
            ExportCommand::Pol { guide, output } => commands::export_pol(&guide, &output),
            ExportCommand::Inf { guide, output } => commands::export_inf(&guide, &output),
            ExportCommand::Audit { guide, output } => commands::export_audit(&guide, &output),
            ExportCommand::Report { guide, output } => commands::export_report(&guide, &output),
        },
        Command::Sim(SimCommand::Apply {
            plan,
            state,
            out_state,
            checkpoints,
        }) => commands::sim_apply(&plan, &state, out_state.as_deref(), checkpoints.as_deref()),
        Command::Sim(SimCommand::Check { plan, state }) => commands::sim_check(&plan, &state),
        Command::Sim(SimCommand::Revert {
            state,
            checkpoints,
            out_state,
        }) => commands::sim_revert(&state, &checkpoints, out_state.as_deref()),
        Command::Stats { guide } => commands::stats(&guide),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(2)
        }
    }
}
