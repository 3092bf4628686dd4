fn main() {
    std::process::exit(ntvortex::cli::run());
}
