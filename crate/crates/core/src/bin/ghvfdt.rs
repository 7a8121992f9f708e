fn main() {
    std::process::exit(ghvfdt::cli::main_with_args(std::env::args_os()));
}
