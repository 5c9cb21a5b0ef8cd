fn main() {
    std::process::exit(icthmc::cli::run(std::env::args_os()));
}
