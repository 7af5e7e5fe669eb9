fn main() {
    std::process::exit(nsch::cli::main_with_args(std::env::args_os()));
}
