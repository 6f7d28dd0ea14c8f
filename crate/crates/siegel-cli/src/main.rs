use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use siegel::report::{emit_report, parse_boundary, parse_config, run_command, Command, OutputFormat};

#[derive(Parser)]
#[command(name = "siegel", version, about = "Orthotube spectra of maximal representations into Sp(2n,R)")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Translation lengths of the peripherals and of configured words.
    Lengths(Common),
    /// Truncated orthotube spectrum with partial sums.
    Orthospectrum(Common),
    /// Finsler length inequalities.
    #[command(name = "verify-a1")]
    VerifyA1(Common),
    /// Riemannian length inequalities.
    #[command(name = "verify-a2")]
    VerifyA2(Common),
    /// Cross-ratio period identity.
    #[command(name = "verify-b")]
    VerifyB(Common),
    /// Doubled orthotube lengths on the holomorphic double.
    DoubleCheck(Common),
    /// Product-of-Fuchsians construction with small right-hand sums.
    Gap(Common),
    /// Embedded collar widths.
    Width(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Maximal conjugator length.
    #[arg(long)]
    depth: Option<usize>,
    /// gamma0, gamma1 or gamma2; all boundaries when omitted.
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
}

impl Cmd {
    fn split(self) -> (Command, Common) {
        match self {
            Cmd::Lengths(c) => (Command::Lengths, c),
            Cmd::Orthospectrum(c) => (Command::Orthospectrum, c),
            Cmd::VerifyA1(c) => (Command::VerifyA1, c),
            Cmd::VerifyA2(c) => (Command::VerifyA2, c),
            Cmd::VerifyB(c) => (Command::VerifyB, c),
            Cmd::DoubleCheck(c) => (Command::DoubleCheck, c),
            Cmd::Gap(c) => (Command::Gap, c),
            Cmd::Width(c) => (Command::Width, c),
        }
    }
}

fn run(cmd: Command, args: Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8, String> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let mut cfg = parse_config(&text).map_err(|e| e.to_string())?;
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    if let Some(b) = args.boundary {
        cfg.boundary = Some(b);
    }
    if let Some(f) = args.format {
        cfg.output.format = match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        };
    }
    if let Some(p) = &args.out {
        cfg.output.path = Some(p.display().to_string());
    }
    let doc = run_command(cmd, &cfg, args.timings).map_err(|e| format!("{}: {e}", cmd.name()))?;
    let bytes = emit_report(&doc, cfg.output.format).map_err(|e| e.to_string())?;
    match &cfg.output.path {
        Some(p) => fs::write(p, bytes).map_err(|e| format!("cannot write {p}: {e}"))?,
        None => stdout.write_all(bytes.as_bytes()).map_err(|e| e.to_string())?,
    }
    for c in doc.verdict.checks.iter().filter(|c| !c.passed) {
        let _ = match c.margin {
            Some(m) => writeln!(stderr, "FAIL {} (margin {m:e})", c.name),
            None => writeln!(stderr, "FAIL {}", c.name),
        };
    }
    Ok(doc.exit_status() as u8)
}

/// Parses `args` (program name first) and runs; returns the exit status.
fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
            return code;
        }
    };
    let (cmd, args) = cli.command.split();
    match run(cmd, args, stdout, stderr) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}

fn main() -> ExitCode {
    let code = run_cli(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code)
}
