fn main() {
    std::process::exit(crossvote::cli::run());
}
