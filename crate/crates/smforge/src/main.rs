fn main() {
    std::process::exit(smforge::cli::main_with(std::env::args_os()));
}
