fn main() {
    std::process::exit(owsec::cli::run());
}
