mod cli;
mod commands;
mod error;
mod expr;
mod inputs;
mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapKind;
use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::{CliError, CliResult, EXIT_NUMERICAL, EXIT_OK};
use crate::inputs::Inputs;
use crate::manifest::{DocRef, InputCheck, ReplayReport, RunManifest, STDOUT};

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(run(argv));
}

fn fail(e: &CliError) -> i32 {
    eprintln!("{}", e.to_json());
    e.exit_code()
}

fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => {
                    let _ = e.print();
                    EXIT_OK
                }
                ClapKind::InvalidSubcommand => fail(&CliError::unknown_subcommand(first_line(&e))),
                _ => fail(&CliError::validation(first_line(&e))),
            };
        }
    };
    let result = match &cli.command {
        Command::Replay(r) => replay(&r.manifest, &cli),
        _ => run_command(&cli, &argv[1..]),
    };
    match result {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}

fn first_line(e: &clap::Error) -> String {
    e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string()
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<String> {
    match out {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, text)?;
            Ok(p.display().to_string())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(STDOUT.to_string())
        }
    }
}

fn input_refs(files: &[PathBuf]) -> CliResult<Vec<DocRef>> {
    let mut refs: Vec<DocRef> = Vec::new();
    for f in files {
        let path = f.display().to_string();
        if refs.iter().any(|r| r.path == path) {
            continue;
        }
        refs.push(DocRef { sha256: manifest::hash_file(f)?, path });
    }
    Ok(refs)
}

fn run_command(cli: &Cli, args: &[String]) -> CliResult<i32> {
    let mut inputs = Inputs::default();
    let text = commands::execute(cli, &mut inputs)?;
    let sha = manifest::sha256_hex(text.as_bytes());
    let out_path = emit(&text, cli.global.out.as_deref())?;
    let m = RunManifest {
        command: cli.command.name().to_string(),
        args: args.to_vec(),
        cwd: std::env::current_dir().map(|p| p.display().to_string()).unwrap_or_default(),
        inputs: input_refs(&inputs.files)?,
        seed: cli.global.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: vec![DocRef { path: out_path, sha256: sha.clone() }],
    };
    let loc = manifest::default_location(cli.global.manifest.as_deref(), cli.global.out.as_deref(), &m.command, &sha);
    manifest::write(&m, &loc)?;
    Ok(EXIT_OK)
}

fn replay(path: &Path, outer: &Cli) -> CliResult<i32> {
    let m = manifest::load(path)?;
    let cwd = Path::new(&m.cwd);
    if !m.cwd.is_empty() && cwd.is_dir() {
        std::env::set_current_dir(cwd)?;
    }
    let argv: Vec<String> = std::iter::once("hchan".to_string()).chain(m.args.iter().cloned()).collect();
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::validation(format!("manifest arguments: {}", first_line(&e))))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::validation("manifest records a replay"));
    }
    let expected = m
        .outputs
        .first()
        .ok_or_else(|| CliError::validation("manifest has no outputs"))?
        .sha256
        .clone();
    let inputs_report = m
        .inputs
        .iter()
        .map(|r| InputCheck {
            unchanged: manifest::hash_file(Path::new(&r.path)).is_ok_and(|h| h == r.sha256),
            path: r.path.clone(),
        })
        .collect();
    let mut inputs = Inputs::default();
    let text = commands::execute(&cli, &mut inputs)?;
    let actual = manifest::sha256_hex(text.as_bytes());
    let report = ReplayReport { identical: actual == expected, expected_sha256: expected, actual_sha256: actual, inputs: inputs_report };
    emit(&(serde_json::to_string_pretty(&report)? + "\n"), outer.global.out.as_deref())?;
    Ok(if report.identical { EXIT_OK } else { EXIT_NUMERICAL })
}
