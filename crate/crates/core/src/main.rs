fn main() {
    std::process::exit(numina_core::cli::run(std::env::args_os()));
}
