use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let res = ckc_cli::run(std::env::args_os(), &mut out);
    let _ = out.flush();
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(ckc_cli::CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ckc: {}", e.to_string().trim_end());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
