fn main() {
    std::process::exit(hgkit::cli::run(std::env::args_os()));
}
