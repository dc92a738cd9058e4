fn main() {
    std::process::exit(sercomp::cli::run(std::env::args_os()));
}
