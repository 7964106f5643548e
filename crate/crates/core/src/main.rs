fn main() {
    std::process::exit(cdklab::cli::run(std::env::args_os()));
}
