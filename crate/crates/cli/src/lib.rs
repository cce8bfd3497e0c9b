//! Command-line front end: configuration, subcommand dispatch, CSV I/O and
//! run manifests for reproducible outputs.

pub mod config;
pub mod csvio;
pub mod manifest;
pub mod par;
pub mod run;

use clap::error::ErrorKind;
use clap::Parser;

/// Error category, mapped one-to-one onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Io,
    Config,
    Input,
    Compute,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Usage => 2,
            Category::Io => 3,
            Category::Config => 4,
            Category::Input => 5,
            Category::Compute => 6,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Usage => "usage",
            Category::Io => "io",
            Category::Config => "config",
            Category::Input => "input",
            Category::Compute => "compute",
        }
    }
}

/// A categorized CLI failure.
#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub msg: String,
}

impl CliError {
    pub fn new(category: Category, msg: impl Into<String>) -> Self {
        CliError {
            category,
            msg: msg.into(),
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Self::new(Category::Usage, msg)
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Self::new(Category::Io, msg)
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Self::new(Category::Input, msg)
    }

    pub fn compute(msg: impl Into<String>) -> Self {
        Self::new(Category::Compute, msg)
    }
}

impl From<spinsim_core::Error> for CliError {
    fn from(e: spinsim_core::Error) -> Self {
        CliError::new(Category::Compute, e.to_string())
    }
}

/// Parses `argv` (without the binary name) and runs the chosen subcommand.
/// Returns the process exit code; 0 on success, a category-specific nonzero
/// code otherwise.
pub fn dispatch(argv: &[String]) -> i32 {
    let mut full = vec!["spinsim".to_string()];
    full.extend_from_slice(argv);
    let cli = match run::Cli::try_parse_from(&full) {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return Category::Usage.exit_code();
        }
    };
    let command_line = full.join(" ");
    match run::execute(cli, &command_line) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category.as_str(), e.msg);
            e.category.exit_code()
        }
    }
}
