use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use qispline::{run, Command, Family, Format, Function, Kind, RunConfig, RunError};

/// Quasi-interpolation experiments on clamped spline spaces.
///
/// Flags override values read from `--config`.
#[derive(Debug, Parser)]
#[command(name = "qispline", version)]
struct Cli {
    /// Subcommand; may instead come from the config file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// Flat TOML file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Spline degree.
    #[arg(long)]
    m: Option<usize>,
    /// Stencil half-width (defaults to m).
    #[arg(long)]
    p: Option<usize>,
    /// Polynomial exactness of the near-best operator.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Number of knot intervals.
    #[arg(long)]
    n: Option<usize>,
    /// Geometric ratio, arithmetic increment or random spread.
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Partitions in a random sweep.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, value_enum)]
    f: Option<Function>,
    /// Comma-separated interval counts for studies.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Output path (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit the per-index near-best JSON-lines stream.
    #[arg(long)]
    audit: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

impl Cli {
    fn resolve(self) -> Result<(RunConfig, bool), RunError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    RunError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                RunConfig::from_toml(&text)?
            }
            None => RunConfig::default(),
        };
        if self.command.is_none() && self.config.is_none() {
            return Err(RunError::Config("no command given".into()));
        }
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = self.$field { cfg.$field = v; })*};
        }
        set!(command, kind, m, q, family, a, b, n, seed, count, f, sizes, format);
        if self.p.is_some() {
            cfg.p = self.p;
        }
        if self.ratio.is_some() {
            cfg.ratio = self.ratio;
        }
        if self.out.is_some() {
            cfg.out = self.out;
        }
        cfg.audit |= self.audit;
        Ok((cfg, self.print_config))
    }
}

fn execute(cli: Cli) -> Result<(), RunError> {
    let (cfg, print_config) = cli.resolve()?;
    if print_config {
        cfg.validate()?;
        print!("{}", cfg.to_canonical()?);
        return Ok(());
    }
    let mut buf = Vec::new();
    run(&cfg, &mut buf)?;
    match &cfg.out {
        Some(path) => fs::write(path, &buf)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(|e| RunError::Io(io::Error::other(format!("{e:#}"))))?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qispline: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
