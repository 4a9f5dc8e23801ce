fn main() {
    std::process::exit(affrec_cli::run(std::env::args_os()));
}
