fn main() {
    std::process::exit(arladv::cli::main_with_args(std::env::args_os()));
}
