fn main() {
    std::process::exit(hcopt::harness::cli_main(std::env::args_os()));
}
