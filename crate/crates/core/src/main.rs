fn main() {
    std::process::exit(kci_core::cli::run(std::env::args_os()));
}
