fn main() {
    std::process::exit(hclex::cli::run(std::env::args_os()));
}
