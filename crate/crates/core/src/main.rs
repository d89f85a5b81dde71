fn main() {
    std::process::exit(skewns::cli::main_with_args(std::env::args_os()));
}
