fn main() {
    std::process::exit(pam_cli::run(std::env::args_os()));
}
