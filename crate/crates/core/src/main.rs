use std::process::ExitCode;

fn main() -> ExitCode {
    hybrid_ocr::cli::run()
}
