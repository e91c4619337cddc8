fn main() {
    std::process::exit(napss_cli::run(std::env::args_os()));
}
