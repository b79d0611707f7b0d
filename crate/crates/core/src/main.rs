fn main() {
    std::process::exit(fecscan::cli::run(std::env::args_os()));
}
