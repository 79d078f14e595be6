fn main() {
    std::process::exit(moran_spectral::cli::main_with_args(std::env::args_os()));
}
