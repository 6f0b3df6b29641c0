fn main() {
    std::process::exit(dimlab::cli::main_with_args(std::env::args_os()));
}
