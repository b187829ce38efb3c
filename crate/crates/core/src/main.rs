fn main() {
    std::process::exit(nilmoment::cli::main_with_args(std::env::args_os()));
}
