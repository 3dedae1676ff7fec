fn main() {
    std::process::exit(ms_compiler::cli::main_with_args(std::env::args_os()));
}
