fn main() {
    std::process::exit(padic_dm::cli::main_with(std::env::args_os()));
}
