fn main() {
    std::process::exit(qvdp_cli::main_with_args(std::env::args_os()));
}
