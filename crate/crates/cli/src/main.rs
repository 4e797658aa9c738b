fn main() {
    std::process::exit(ymc_cli::run_cli(std::env::args_os()));
}
