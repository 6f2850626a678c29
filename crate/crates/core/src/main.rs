fn main() {
    std::process::exit(ttsfc::cli::main_with_args(std::env::args_os()));
}
