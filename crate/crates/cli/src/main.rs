fn main() {
    std::process::exit(reformcause_cli::run(std::env::args_os()));
}
