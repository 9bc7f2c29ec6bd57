fn main() {
    std::process::exit(hexvof::cli::run());
}
