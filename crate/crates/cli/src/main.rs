use clap::Parser;
use pairdyn_cli::{execute, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    let (session, outcome) = execute(Cli::parse());
    for line in &session.log {
        println!("{line}");
    }
    println!(
        "{} file(s) under {}",
        session.written.len(),
        session.root.display()
    );
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
