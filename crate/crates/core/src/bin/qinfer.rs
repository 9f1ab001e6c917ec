fn main() {
    std::process::exit(qinfer::cli::main_with_args(std::env::args_os().collect()));
}
