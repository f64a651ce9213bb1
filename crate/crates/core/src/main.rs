fn main() {
    std::process::exit(simred::cli::run(std::env::args_os()));
}
