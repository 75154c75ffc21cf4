mod args;
mod commands;
mod report;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command, OptimizerFlags};
use commands::{read_channel, CapacityArgs, GalleryArgs};
use report::{render, Outcome, RunReport};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let no_flags = OptimizerFlags {
        restarts: None,
        tol: None,
        max_iters: None,
        max_leaves: None,
    };
    let mut seed = commands::settings(None, &no_flags, cli.seed).seed;
    let (name, outcome, input_digest): (&str, Outcome, Option<String>) = match &cli.command {
        Command::Validate { path, gap_n } => {
            let input = read_channel(path)?;
            ("validate", commands::validate(&input, *gap_n)?, Some(input.digest))
        }
        Command::Capacity {
            path,
            n,
            s0,
            all_states,
            sweep_n,
            policy_out,
            opt,
        } => {
            let input = read_channel(path)?;
            let cfg = commands::settings(Some(&input.file), opt, cli.seed);
            seed = cfg.seed;
            let a = CapacityArgs {
                n: *n,
                s0: *s0,
                all_states: *all_states,
                sweep_n: *sweep_n,
                policy_out: policy_out.as_ref(),
                cfg,
            };
            ("capacity", commands::capacity(&input, a)?, Some(input.digest))
        }
        Command::DirectedInfo { path, policy, n, s0 } => {
            let input = read_channel(path)?;
            let (outcome, policy_digest) = commands::directed_info(&input, policy.as_deref(), *n, *s0)?;
            let digest = match policy_digest {
                Some(p) => format!("{} {p}", input.digest),
                None => input.digest,
            };
            ("directed-info", outcome, Some(digest))
        }
        Command::DmcCapacity { path, state, eps } => {
            let input = path.as_deref().map(read_channel).transpose()?;
            let outcome = commands::dmc(input.as_ref(), *state, eps.as_deref())?;
            ("dmc-capacity", outcome, input.map(|i| i.digest))
        }
        Command::Gallery {
            name,
            eps,
            lambda,
            k,
            states,
            x_size,
            y_size,
        } => {
            let g = commands::build_gallery(&GalleryArgs {
                name: *name,
                eps,
                lambda: lambda.as_deref(),
                k: *k,
                states: *states,
                x_size: *x_size,
                y_size: *y_size,
            })?;
            let text = g.to_file().to_json();
            match &cli.out {
                None => {
                    std::io::stdout().write_all(text.as_bytes())?;
                    return Ok(());
                }
                Some(path) => {
                    fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
                    ("gallery", commands::gallery_summary(&g, &text), None)
                }
            }
        }
        Command::DiscontinuityDemo { eps, k, n, opt } => {
            let cfg = commands::settings(None, opt, cli.seed);
            ("discontinuity-demo", commands::discontinuity(eps, k, *n, &cfg)?, None)
        }
        Command::LambdaSeq { program, mock, n, m_max } => {
            let (outcome, digest) = commands::lambda_seq(program.as_deref(), mock.as_deref(), *n, *m_max)?;
            ("lambda-seq", outcome, digest)
        }
        Command::Indecomp { path, n } => {
            let input = read_channel(path)?;
            ("indecomp", commands::indecomp(&input, *n)?, Some(input.digest))
        }
        Command::Connectivity { path } => {
            let input = read_channel(path)?;
            ("connectivity", commands::connectivity(&input)?, Some(input.digest))
        }
    };
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    let report = RunReport {
        command: name.to_string(),
        args: argv,
        input_digest,
        seed,
        results: outcome.results.clone(),
        diagnostics: outcome.diagnostics.clone(),
        wall_clock_ms: cli.timing.then_some(elapsed_ms),
    };
    let text = render(&report, &outcome, cli.format)?;
    // The gallery's --out already received the channel file; its report goes to stdout.
    match (&cli.out, name) {
        (Some(path), n) if n != "gallery" => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        _ => std::io::stdout().write_all(text.as_bytes())?,
    }
    if !cli.timing {
        eprintln!("wall-clock: {elapsed_ms:.1} ms");
    }
    Ok(())
}
