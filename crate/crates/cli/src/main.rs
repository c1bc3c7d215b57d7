fn main() {
    std::process::exit(qeq_cli::run(std::env::args_os()));
}
