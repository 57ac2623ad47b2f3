fn main() {
    std::process::exit(npset::cli::main_exit_code(std::env::args_os()));
}
