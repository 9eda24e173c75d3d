use std::process::ExitCode;

fn main() -> ExitCode {
    match multidendrogram::cli::main_with_args(std::env::args_os()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
