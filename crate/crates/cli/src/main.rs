fn main() {
    reprrec_cli::init_logging();
    if let Err(err) = reprrec_cli::run_from_args(std::env::args_os()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
