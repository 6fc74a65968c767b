fn main() {
    std::process::exit(swcoref::cli::dispatch(std::env::args_os()));
}
