fn main() {
    std::process::exit(sidelobe_cli::run(std::env::args_os()));
}
