fn main() {
    std::process::exit(hess2_cli::run(std::env::args_os()));
}
