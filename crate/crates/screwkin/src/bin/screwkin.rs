fn main() {
    std::process::exit(screwkin::interface::cli::run_from_env());
}
