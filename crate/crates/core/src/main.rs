fn main() {
    std::process::exit(qms_epr::cli::main_with_args(std::env::args_os()));
}
