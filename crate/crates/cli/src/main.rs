fn main() {
    std::process::exit(descentlab_cli::main_with(std::env::args_os()));
}
