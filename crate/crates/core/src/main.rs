fn main() {
    std::process::exit(diamag::cli::main_with_args(std::env::args_os()));
}
