fn main() {
    std::process::exit(folkrec::cli::run(std::env::args_os()));
}
