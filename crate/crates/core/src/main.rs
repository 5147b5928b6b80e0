fn main() {
    std::process::exit(onebit_radar::cli::parse_and_dispatch(std::env::args_os()));
}
