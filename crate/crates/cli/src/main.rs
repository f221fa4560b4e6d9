use std::process::ExitCode;

fn main() -> ExitCode {
    let result = carcassonne_cli::parse_args(std::env::args_os()).and_then(|spec| carcassonne_cli::run(&spec));
    match result {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("carc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
