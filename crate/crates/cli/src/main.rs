fn main() {
    std::process::exit(eit_cli::run(std::env::args_os()));
}
