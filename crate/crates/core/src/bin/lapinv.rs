fn main() {
    std::process::exit(lapinv::cli::run());
}
