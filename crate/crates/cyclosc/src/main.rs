fn main() {
    std::process::exit(cyclosc::cli::run_from_env());
}
