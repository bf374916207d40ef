fn main() {
    std::process::exit(witness::cli::main_with_args(std::env::args_os()));
}
