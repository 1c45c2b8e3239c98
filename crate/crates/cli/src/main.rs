fn main() {
    std::process::exit(dsine_cli::run(std::env::args_os()));
}
