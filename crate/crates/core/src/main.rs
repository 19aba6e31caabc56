fn main() {
    std::process::exit(pillowcase::cli::main_with_args(std::env::args_os()));
}
