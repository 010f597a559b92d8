fn main() {
    std::process::exit(indlab::cli::run(std::env::args_os()));
}
