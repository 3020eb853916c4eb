fn main() {
    std::process::exit(pathforge::harness::cli::main_with_args(std::env::args_os()));
}
