fn main() {
    std::process::exit(tilerange::cli::dispatch(std::env::args_os()));
}
