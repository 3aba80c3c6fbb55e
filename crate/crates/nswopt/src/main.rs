fn main() {
    std::process::exit(nswopt::cli::run(std::env::args_os()));
}
