fn main() {
    std::process::exit(specbisect::cli::run(std::env::args_os()));
}
