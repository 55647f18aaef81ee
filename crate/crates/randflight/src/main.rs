fn main() {
    std::process::exit(randflight::cli::run());
}
