fn main() {
    std::process::exit(repcap::cli::main());
}
