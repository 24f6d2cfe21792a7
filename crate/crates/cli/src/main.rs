fn main() {
    std::process::exit(envelope_cli::run());
}
