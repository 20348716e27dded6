fn main() {
    std::process::exit(wasserlim_cli::run_cli(std::env::args_os()));
}
