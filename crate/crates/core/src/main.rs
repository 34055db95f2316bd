fn main() {
    std::process::exit(sharp_threshold::cli::run(std::env::args_os()));
}
