fn main() {
    std::process::exit(dirac_dfb::cli::run(std::env::args_os()));
}
