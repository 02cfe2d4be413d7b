use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let wrote_out = args.iter().any(|a| a == "--out" || a.starts_with("--out="));
    let report = randsum_cli::run(args);
    let code = randsum_cli::finish(&report, wrote_out);
    ExitCode::from(code as u8)
}
