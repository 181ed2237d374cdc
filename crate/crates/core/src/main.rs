use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use parabolic_escape::cli::{error_json, execute, exit, render, Cli, RunResult};
use parabolic_escape::Error;

fn run() -> Result<i32, Error> {
    let cfg = Cli::parse().into_config()?;
    let result = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| execute(&cfg))?,
        None => execute(&cfg)?,
    };
    let text = render(&cfg, &result)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if let RunResult::Sweep(t) = &result {
        for f in &t.failures {
            eprintln!("{}", serde_json::json!({ "failure": { "N": f.n, "message": f.error } }));
        }
    }
    Ok(if result.ok() { exit::OK } else { exit::PARTIAL })
}

fn main() -> ExitCode {
    match run() {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("{}", error_json(&e));
            let code = match e {
                Error::Config(_) => exit::CONFIG,
                _ => exit::COMPUTATION,
            };
            ExitCode::from(code as u8)
        }
    }
}
