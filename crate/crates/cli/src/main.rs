use clap::Parser;
use std::io::Write;
use std::process::ExitCode;
use tropical_refined_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &out.json) {
                    return fail(&CliError::Io(format!("{}: {e}", path.display())));
                }
            }
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(if cli.json { out.json.as_bytes() } else { out.text.as_bytes() });
            match out.violation {
                Some(v) => fail(&CliError::Violation(v)),
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("tropref: {e}");
    ExitCode::from(e.exit_code() as u8)
}
