mod args;
mod run;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use serde::Serialize;

use args::{Cli, Command, Format};
use run::Done;

/// Exit status for a report that did not reach a violation.
const INCONCLUSIVE: u8 = 2;

#[derive(Serialize)]
struct RunConfig<'a> {
    #[serde(flatten)]
    cli: &'a Cli,
    /// Canonical form of the parsed function spec, when the command has one.
    resolved_spec: Option<String>,
    resolved_class: Option<String>,
    resolved_method: Option<args::Method>,
}

fn default_format(cmd: &Command) -> Format {
    match cmd {
        Command::Refute(_) | Command::Oracle(_) => Format::Json,
        Command::Hierarchy(h) if h.witness.is_some() => Format::Json,
        _ => Format::Tsv,
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig<'_>> {
    let (spec_src, class_src) = match &cli.command {
        Command::Eval(a) => (Some(&a.spec), None),
        Command::Refute(a) => (Some(&a.spec), Some(&a.class.class)),
        Command::Oracle(a) => (Some(&a.spec), Some(&a.class.class)),
        Command::Scan(a) => (Some(&a.spec), None),
        Command::Hierarchy(_) => (None, None),
    };
    let spec = spec_src.map(|s| run::parse_spec(s)).transpose()?;
    let class = match (&spec, class_src) {
        (Some(spec), Some(c)) => Some(run::parse_class(c, spec.dim())?),
        _ => None,
    };
    let method = match (&cli.command, &spec, &class) {
        (Command::Refute(a), Some(s), Some(c)) => Some(run::resolve_method(a, s, c)),
        _ => None,
    };
    Ok(RunConfig {
        cli,
        resolved_spec: spec.map(|s| s.to_string()),
        resolved_class: class.map(|c| c.to_string()),
        resolved_method: method,
    })
}

fn execute(cli: &Cli) -> Result<Done> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    if cli.dump_config {
        serde_json::to_writer_pretty(&mut out, &resolve(cli)?)?;
        writeln!(out)?;
        out.flush()?;
        return Ok(Done::Ok);
    }
    let format = cli.format.unwrap_or_else(|| default_format(&cli.command));
    let done = match &cli.command {
        Command::Eval(a) => run::eval(a, format, &mut out)?,
        Command::Refute(a) => run::refute(a, format, &mut out)?,
        Command::Oracle(a) => run::oracle(a, format, &mut out)?,
        Command::Hierarchy(a) => run::hierarchy(a, format, &mut out)?,
        Command::Scan(a) => run::scan(a, format, &mut out)?,
    };
    out.flush()?;
    Ok(done)
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let kind = c
            .downcast_ref::<io::Error>()
            .map(io::Error::kind)
            .or_else(|| c.downcast_ref::<serde_json::Error>().and_then(serde_json::Error::io_error_kind));
        kind == Some(io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Done::Report(rep)) if !rep.violates() => ExitCode::from(INCONCLUSIVE),
        Ok(_) => ExitCode::SUCCESS,
        // A closed downstream pipe (e.g. `| head`) is not a failure.
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
