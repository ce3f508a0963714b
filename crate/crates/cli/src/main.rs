fn main() {
    std::process::exit(orbcd_cli::cli_main(std::env::args_os()));
}
