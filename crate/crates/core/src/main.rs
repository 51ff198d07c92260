fn main() {
    std::process::exit(plasmon::cli::run(std::env::args_os()));
}
