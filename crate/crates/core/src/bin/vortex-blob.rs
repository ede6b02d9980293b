fn main() {
    std::process::exit(vortex_blob::cli::run(std::env::args_os()));
}
