fn main() {
    std::process::exit(docsim::cli::run(std::env::args_os()));
}
