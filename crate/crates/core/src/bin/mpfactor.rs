fn main() {
    std::process::exit(mpfactor::cli::run(std::env::args_os()));
}
