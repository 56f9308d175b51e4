use std::io::Read;
use std::process::ExitCode;

use clap::Parser;

use morcalc::cli::{exit_code, run_request, Cli, Request};
use morcalc::dsl::{parse_dsl, print_dsl, DslProgram};
use morcalc::verification::report::render;
use morcalc::{MorError, Result};

fn load(req: &Request) -> Result<Option<DslProgram>> {
    let needs_program = !matches!(req, Request::Verify(_));
    let text = match req.input() {
        Some(path) => std::fs::read_to_string(path).map_err(|e| MorError::Usage(format!("cannot read {}: {e}", path.display())))?,
        None if needs_program => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| MorError::Usage(format!("cannot read standard input: {e}")))?;
            s
        }
        None => return Ok(None),
    };
    parse_dsl(&text).map(Some)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli.request).and_then(|program| {
        if let Request::Print { .. } = cli.request {
            // canonical text rather than JSON, so the output parses again
            let p = program.expect("print reads a program");
            return Ok((print_dsl(&p), true));
        }
        let o = run_request(&cli.request, program.as_ref())?;
        Ok((render(&o.value), o.pass))
    });
    match result {
        Ok((text, pass)) => {
            print!("{text}");
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
