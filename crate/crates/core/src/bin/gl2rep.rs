fn main() {
    std::process::exit(gl2rep::cli::run(std::env::args_os()));
}
