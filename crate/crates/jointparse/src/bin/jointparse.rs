fn main() {
    std::process::exit(jointparse::cli::main_with_args(std::env::args_os()));
}
