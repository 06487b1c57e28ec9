fn main() {
    std::process::exit(cbiou::cli::main_with_args(std::env::args_os()));
}
