fn main() {
    std::process::exit(gpflow::cli::run(std::env::args_os()));
}
