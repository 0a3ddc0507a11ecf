mod args;
mod commands;
mod manifest;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command, ReplayArgs, DEFAULT_SEED};
use commands::{execute, RunContext, UsageError};
use manifest::{digest_file, sha256_hex, sidecar_path, FileDigest, RunManifest};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn write_output(path: &Path, data: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let workers = cli.workers.unwrap_or_else(default_workers);
    if let Command::Replay(args) = &cli.command {
        return replay(args, cli.workers);
    }
    let ctx = RunContext { seed: cli.seed.unwrap_or(DEFAULT_SEED), workers };
    let produced = execute(&cli.command, ctx)?;

    let output = match cli.command.out() {
        Some(path) => {
            write_output(path, &produced.data)?;
            FileDigest { path: path.display().to_string(), sha256: sha256_hex(&produced.data) }
        }
        None => {
            std::io::stdout().write_all(&produced.data)?;
            FileDigest { path: "-".into(), sha256: sha256_hex(&produced.data) }
        }
    };
    let manifest_paths: Vec<_> =
        cli.command.out().map(|p| sidecar_path(p)).into_iter().chain(cli.manifest_out.clone()).collect();
    if !manifest_paths.is_empty() {
        let manifest = RunManifest::new(&cli.command, ctx.seed, workers, output)?;
        for path in manifest_paths {
            manifest.save(&path)?;
        }
    }
    Ok(match produced.failure {
        Some(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    })
}

fn replay(args: &ReplayArgs, workers: Option<usize>) -> Result<ExitCode> {
    let manifest = RunManifest::load(&args.manifest)?;
    for input in &manifest.inputs {
        match digest_file(Path::new(&input.path)) {
            Ok(d) if d.sha256 == input.sha256 => {}
            Ok(_) => eprintln!("warning: input {} changed since the original run", input.path),
            Err(e) => eprintln!("warning: {e:#}"),
        }
    }
    let mut command = manifest.params.clone();
    let new_out = match command.out() {
        Some(original) => {
            let dir = args.out_dir.as_ref().ok_or_else(|| {
                UsageError("the original run wrote a file; pass --out-dir for the replayed copy".into())
            })?;
            let name = original.file_name().context("output path has no file name")?;
            Some(dir.join(name))
        }
        None => None,
    };
    command.set_out(new_out.clone());
    let ctx = RunContext { seed: manifest.master_seed, workers: workers.unwrap_or(manifest.workers) };
    let produced = execute(&command, ctx)?;
    if let Some(path) = &new_out {
        write_output(path, &produced.data)?;
    }
    let digest = sha256_hex(&produced.data);
    let expected = manifest.outputs.first().map(|o| o.sha256.as_str()).unwrap_or_default();
    if digest == expected {
        eprintln!("replay: output identical (sha256 {digest})");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("replay: output differs (expected {expected}, got {digest})");
        Ok(ExitCode::from(1))
    }
}
