fn main() {
    std::process::exit(qbinom::cli::run(std::env::args_os()));
}
