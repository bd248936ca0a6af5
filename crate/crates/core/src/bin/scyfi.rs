fn main() {
    std::process::exit(scyfi::cli::main_with_args(std::env::args_os()));
}
