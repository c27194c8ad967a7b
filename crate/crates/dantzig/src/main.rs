fn main() {
    std::process::exit(dantzig::cli::run());
}
