fn main() {
    std::process::exit(jointree::cli::run());
}
