fn main() {
    std::process::exit(rffit::cli::run(std::env::args_os()));
}
