fn main() {
    std::process::exit(vmm::cli::run_cli(std::env::args_os()));
}
