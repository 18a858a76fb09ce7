fn main() {
    std::process::exit(fairaudit_cli::run(std::env::args_os()));
}
