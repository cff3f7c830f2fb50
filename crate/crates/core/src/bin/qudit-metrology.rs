fn main() {
    std::process::exit(qudit_metrology::cli::main_with_args(std::env::args_os()));
}
