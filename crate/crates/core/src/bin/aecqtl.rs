fn main() {
    std::process::exit(aecqtl::cli::run(std::env::args_os()));
}
