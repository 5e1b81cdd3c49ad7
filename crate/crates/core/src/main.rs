fn main() {
    std::process::exit(fil_abm::cli::main_with_args(std::env::args_os()));
}
