fn main() {
    std::process::exit(hofbauer::cli::main_with_args(std::env::args_os()));
}
