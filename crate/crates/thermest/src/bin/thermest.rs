fn main() {
    std::process::exit(thermest::cli::run());
}
